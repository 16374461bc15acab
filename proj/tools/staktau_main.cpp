#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "staktau/analyzer.hpp"
#include "staktau/bench.hpp"
#include "staktau/raytrace.hpp"
#include "staktau/trace_format.hpp"
#include "staktau/tracer.hpp"

namespace {

// Exit codes: 0 success (or the target's own code for `run`), 64 usage,
// 65 bad input data, 70 tracer desync, 127 target launch failure.
constexpr int kExitUsage = 64;
constexpr int kExitData = 65;
constexpr int kExitDesync = 70;
constexpr int kExitLaunch = 127;

std::string default_output(const char* fallback) {
    const char* env = std::getenv("STAKTAU_OUTPUT");
    return env && *env ? env : fallback;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<staktau::RunSample> read_samples_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<staktau::RunSample> samples;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        lineno++;
        if (line.empty() || (lineno == 1 && line.rfind("wall_seconds", 0) == 0)) continue;
        staktau::RunSample s;
        char sep = 0;
        std::istringstream fields(line);
        unsigned long long bytes = 0;
        if (!(fields >> s.wall_seconds >> sep >> bytes) || sep != ',')
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected 'wall_seconds,trace_bytes'");
        s.trace_bytes = bytes;
        samples.push_back(s);
    }
    if (samples.empty()) throw std::runtime_error(path + ": no samples");
    return samples;
}

void write_samples_csv(const std::string& path,
                       const std::vector<staktau::RunSample>& samples) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "wall_seconds,trace_bytes\n";
    for (const staktau::RunSample& s : samples) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.9g,%llu\n", s.wall_seconds,
                      static_cast<unsigned long long>(s.trace_bytes));
        out << buf;
    }
}

int cmd_run(const std::string& output, std::size_t buffer, bool verbose,
            const std::vector<std::string>& target) {
    staktau::TraceConfig cfg;
    cfg.command = target;
    cfg.buffer_capacity = buffer;
    cfg.output_path = output;
    cfg.echo_events = verbose;

    staktau::RunResult run;
    try {
        run = staktau::trace_process(cfg);
    } catch (const staktau::LaunchError& e) {
        std::fprintf(stderr, "staktau: error: %s\n", e.what());
        return kExitLaunch;
    }

    std::size_t rows = 0;
    for (const staktau::ThreadProfile& t : run.profiles) rows += t.per_syscall.size();
    std::fprintf(stderr,
                 "staktau: %zu thread%s, %zu syscall row%s, %llu missed, %llu bytes -> %s\n",
                 run.profiles.size(), run.profiles.size() == 1 ? "" : "s", rows,
                 rows == 1 ? "" : "s",
                 static_cast<unsigned long long>(run.missed_records),
                 static_cast<unsigned long long>(run.trace_bytes), output.c_str());

    if (run.desync) return kExitDesync;
    if (run.term_signal) return 128 + *run.term_signal;
    return run.exit_code;
}

int cmd_report(const std::vector<std::string>& paths, const std::string& vanilla_csv,
               const std::string& profiled_csv, const std::string& bench_name,
               bool csv) {
    try {
        for (const std::string& path : paths) {
            staktau::ProfileDocument doc;
            try {
                doc = staktau::parse_profile(read_file(path));
            } catch (const staktau::ParseError& e) {
                std::fprintf(stderr, "staktau: error: %s: %s\n", path.c_str(), e.what());
                return kExitData;
            }
            if (paths.size() > 1) std::printf("== %s ==\n", path.c_str());
            std::fputs(staktau::write_profile(doc).c_str(), stdout);
            const auto totals = staktau::aggregate_syscalls(doc);
            if (!totals.empty()) {
                std::printf("\nAggregate over %zu thread%s:\n", doc.threads.size(),
                            doc.threads.size() == 1 ? "" : "s");
                for (const auto& [name, total] : totals)
                    std::printf("%-24s| %llu\n", name.c_str(),
                                static_cast<unsigned long long>(total));
            }
        }

        if (!vanilla_csv.empty() && !profiled_csv.empty()) {
            staktau::OverheadTable table;
            table.rows.push_back(staktau::overhead_stats(bench_name,
                                                         read_samples_csv(vanilla_csv),
                                                         read_samples_csv(profiled_csv)));
            std::fputs(csv ? staktau::overhead_table_csv(table).c_str()
                           : staktau::render_overhead_table(table).c_str(),
                       stdout);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "staktau: error: %s\n", e.what());
        return kExitData;
    }
    return 0;
}

int cmd_bench(std::string only, bool no_profiler, unsigned reps, unsigned threads,
              std::size_t buffer, std::uint64_t pi_intervals, int rt_width,
              int rt_height, int rt_samples, const std::string& workload,
              const std::string& samples_prefix, bool csv) {
    staktau::OverheadTable table;
    std::uint64_t missed = 0;
    std::vector<staktau::BenchKind> kinds;
    if (only.empty() || only == "pi") kinds.push_back(staktau::BenchKind::Pi);
    if (only.empty() || only == "raytrace") kinds.push_back(staktau::BenchKind::Raytrace);

    try {
        for (staktau::BenchKind kind : kinds) {
            staktau::BenchSpec spec;
            spec.name = kind;
            spec.threads = threads;
            spec.repetitions = reps;
            spec.pi_intervals = pi_intervals;
            spec.rt_width = rt_width;
            spec.rt_height = rt_height;
            spec.rt_samples = rt_samples;
            spec.workload_binary = workload;

            std::optional<staktau::TraceConfig> profiler;
            if (!no_profiler) {
                profiler.emplace();
                profiler->buffer_capacity = buffer;
            }
            std::fprintf(stderr, "staktau: benchmarking %s (%u reps, %u threads)...\n",
                         std::string(staktau::bench_kind_name(kind)).c_str(), reps,
                         staktau::resolve_threads(threads));
            staktau::ExperimentResult result = staktau::run_experiment(spec, profiler);
            missed += result.missed_records;
            table.rows.push_back(result.row);
            if (!samples_prefix.empty()) {
                const std::string stem =
                    samples_prefix + "-" + std::string(staktau::bench_kind_name(kind));
                write_samples_csv(stem + "-vanilla.csv", result.vanilla);
                write_samples_csv(stem + "-profiled.csv", result.profiled);
            }
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "staktau: error: benchmark failed: %s\n", e.what());
        return 1;
    }

    std::fputs(csv ? staktau::overhead_table_csv(table).c_str()
                   : staktau::render_overhead_table(table).c_str(),
               stdout);
    if (missed > 0)
        std::fprintf(stderr, "staktau: warning: %llu records were missed during profiling\n",
                     static_cast<unsigned long long>(missed));
    return 0;
}

int cmd_emit_script(const std::string& output, std::size_t buffer) {
    staktau::TraceConfig cfg;
    cfg.command = {"-"};   // unused by the emitter; keeps the config valid
    cfg.buffer_capacity = buffer;
    const std::string text = staktau::emit_probe_script(cfg);
    if (output.empty() || output == "-") {
        std::fputs(text.c_str(), stdout);
        return 0;
    }
    std::ofstream out(output);
    if (!out || !(out << text).flush()) {
        std::fprintf(stderr, "staktau: error: cannot write %s\n", output.c_str());
        return 1;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"staktau - per-thread syscall time profiler"};
    app.require_subcommand(1);

    std::size_t buffer = staktau::FlushBuffer::kDefaultCapacity;
    app.add_option("--buffer", buffer, "Record buffer capacity")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    // run
    auto* run = app.add_subcommand("run", "Trace a command and write its profile");
    run->fallthrough();   // global options may follow the subcommand
    std::string run_output = default_output("staktau.prof");
    bool verbose = false;
    std::vector<std::string> target;
    run->add_option("-o,--output", run_output, "Profile output path")
        ->capture_default_str();
    run->add_flag("-v,--verbose", verbose, "Echo every syscall stop to stderr");
    run->add_option("target", target, "Target command (prefix with --)")
        ->required();
    run->positionals_at_end();

    // report
    auto* report = app.add_subcommand("report", "Read profiles and print tables");
    report->fallthrough();
    std::vector<std::string> report_paths;
    std::string vanilla_csv, profiled_csv, bench_name = "benchmark";
    bool report_csv = false;
    report->add_option("paths", report_paths, "Profile files to read");
    report->add_option("--vanilla-samples", vanilla_csv,
                       "CSV of vanilla run samples (with --profiled-samples)");
    report->add_option("--profiled-samples", profiled_csv,
                       "CSV of profiled run samples (with --vanilla-samples)");
    report->add_option("--name", bench_name, "Benchmark label for the overhead table");
    report->add_flag("--csv", report_csv, "Emit the overhead table as CSV");

    // bench
    auto* bench = app.add_subcommand("bench", "Run the overhead benchmarks");
    bench->fallthrough();
    std::string only, workload, samples_prefix;
    bool no_profiler = false, bench_csv = false;
    unsigned reps = 10, threads = 0;
    std::uint64_t pi_intervals = 10'000'000;
    int rt_width = 960, rt_height = 720, rt_samples = 16;
    bench->add_option("--only", only, "Run a single benchmark")
        ->check(CLI::IsMember({"pi", "raytrace"}));
    bench->add_flag("--no-profiler", no_profiler, "Time both arms without tracing");
    bench->add_option("--reps", reps, "Repetitions per arm")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    bench->add_option("--threads", threads, "Worker threads (0 = hardware)")
        ->capture_default_str();
    bench->add_option("--pi-intervals", pi_intervals, "Midpoint-rule interval count")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    bench->add_option("--rt-width", rt_width, "Render width")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    bench->add_option("--rt-height", rt_height, "Render height")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    bench->add_option("--rt-samples", rt_samples, "Samples per pixel")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    bench->add_option("--workload", workload, "Path to the staktau-workload binary");
    bench->add_option("--samples", samples_prefix,
                      "Write per-run samples to <prefix>-<bench>-{vanilla,profiled}.csv");
    bench->add_flag("--csv", bench_csv, "Emit the overhead table as CSV");

    // emit-script
    auto* emit = app.add_subcommand("emit-script",
                                    "Write the equivalent kernel-probe script");
    emit->fallthrough();
    std::string emit_output = default_output("");
    emit->add_option("-o,--output", emit_output, "Script path ('-' or empty: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (run->parsed()) return cmd_run(run_output, buffer, verbose, target);
        if (report->parsed())
            return cmd_report(report_paths, vanilla_csv, profiled_csv, bench_name,
                              report_csv);
        if (bench->parsed())
            return cmd_bench(only, no_profiler, reps, threads, buffer, pi_intervals,
                             rt_width, rt_height, rt_samples, workload, samples_prefix,
                             bench_csv);
        if (emit->parsed()) return cmd_emit_script(emit_output, buffer);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "staktau: error: %s\n", e.what());
        return 1;
    }
    return 0;
}
