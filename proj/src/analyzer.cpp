#include "staktau/analyzer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>

namespace staktau {

std::vector<std::pair<std::string, std::uint64_t>>
aggregate_syscalls(const ProfileDocument& doc) {
    std::map<std::string, std::uint64_t> totals;
    for (const ThreadProfile& t : doc.threads)
        for (const auto& [name, stats] : t.per_syscall)
            totals[name] += stats.total_ns;

    std::vector<std::pair<std::string, std::uint64_t>> out(totals.begin(), totals.end());
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return out;
}

double mean(std::span<const double> xs) {
    if (xs.empty()) throw std::invalid_argument("mean of an empty sequence");
    double sum = 0.0;
    for (double x : xs) sum += x;
    return sum / static_cast<double>(xs.size());
}

double sample_std(std::span<const double> xs) {
    if (xs.empty()) throw std::invalid_argument("std of an empty sequence");
    if (xs.size() == 1) return 0.0;
    const double m = mean(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

OverheadRow overhead_stats(std::string benchmark,
                           std::span<const RunSample> vanilla,
                           std::span<const RunSample> profiled) {
    if (vanilla.empty() || profiled.empty())
        throw std::invalid_argument("overhead_stats: both run sets must be non-empty");

    auto times = [](std::span<const RunSample> runs) {
        std::vector<double> t;
        t.reserve(runs.size());
        for (const RunSample& r : runs) t.push_back(r.wall_seconds);
        return t;
    };
    const std::vector<double> vt = times(vanilla);
    const std::vector<double> pt = times(profiled);

    OverheadRow row;
    row.benchmark = std::move(benchmark);
    row.vanilla_mean_s = mean(vt);
    row.vanilla_std_s = sample_std(vt);
    row.profiled_mean_s = mean(pt);
    row.profiled_std_s = sample_std(pt);
    if (row.vanilla_mean_s <= 0.0)
        throw std::invalid_argument("overhead_stats: vanilla mean must be positive");
    row.overhead_percent = 100.0 * row.profiled_mean_s / row.vanilla_mean_s;

    double bytes = 0.0;
    for (const RunSample& r : profiled) bytes += static_cast<double>(r.trace_bytes);
    row.trace_file_bytes =
        static_cast<std::uint64_t>(std::llround(bytes / static_cast<double>(profiled.size())));
    return row;
}

double logging_intensity(std::uint64_t trace_bytes, double wall_seconds) {
    if (!(wall_seconds > 0.0))
        throw std::invalid_argument("logging_intensity: wall_seconds must be positive");
    return static_cast<double>(trace_bytes) / (wall_seconds * 1000.0);
}

double total_kernel_fraction(const ThreadProfile& thread) {
    if (!thread.first_entry_mono || !thread.last_exit_mono)
        throw std::invalid_argument("total_kernel_fraction: thread window is undefined");
    if (*thread.last_exit_mono <= *thread.first_entry_mono)
        throw std::invalid_argument("total_kernel_fraction: thread window is empty");
    const double window =
        static_cast<double>(*thread.last_exit_mono - *thread.first_entry_mono);
    return static_cast<double>(thread.total_syscall_ns()) / window;
}

namespace {

std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

} // namespace

std::string render_overhead_table(const OverheadTable& table) {
    std::string out;
    out += "Benchmark      | Execution time (s) | Std dev | Trace file size\n";
    out += "---------------+--------------------+---------+----------------\n";
    auto line = [&out](const std::string& label, const std::string& time,
                       const std::string& dev, const std::string& size) {
        auto pad = [](std::string s, std::size_t w) {
            if (s.size() < w) s.append(w - s.size(), ' ');
            return s;
        };
        out += pad(label, 15) + "| " + pad(time, 19) + "| " + pad(dev, 8) + "| " + size;
        while (!out.empty() && out.back() == ' ') out.pop_back();
        out += '\n';
    };
    for (const OverheadRow& r : table.rows) {
        line(r.benchmark, "", "", "");
        line("  Vanilla:", fixed(r.vanilla_mean_s, 3), fixed(r.vanilla_std_s, 3), "");
        line("  STaKTAU:", fixed(r.profiled_mean_s, 3), fixed(r.profiled_std_s, 3),
             std::to_string(r.trace_file_bytes) + " B");
        line("  Overhead:", fixed(r.overhead_percent, 1) + "%", "", "");
        out += "---------------+--------------------+---------+----------------\n";
    }
    return out;
}

std::string overhead_table_csv(const OverheadTable& table) {
    std::string out = "benchmark,vanilla_mean_s,vanilla_std_s,profiled_mean_s,"
                      "profiled_std_s,overhead_percent,trace_file_bytes\n";
    for (const OverheadRow& r : table.rows) {
        char buf[256];
        std::snprintf(buf, sizeof buf, "%s,%.9g,%.9g,%.9g,%.9g,%.9g,%llu\n",
                      r.benchmark.c_str(), r.vanilla_mean_s, r.vanilla_std_s,
                      r.profiled_mean_s, r.profiled_std_s, r.overhead_percent,
                      static_cast<unsigned long long>(r.trace_file_bytes));
        out += buf;
    }
    return out;
}

} // namespace staktau
