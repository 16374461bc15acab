#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "staktau/trace_format.hpp"

namespace staktau {

// One timed execution of a benchmark or traced target.
struct RunSample {
    double wall_seconds = 0.0;
    std::uint64_t trace_bytes = 0;   // 0 for vanilla (unprofiled) runs
};

// One benchmark's worth of overhead statistics.
struct OverheadRow {
    std::string benchmark;
    double vanilla_mean_s = 0.0;
    double vanilla_std_s = 0.0;
    double profiled_mean_s = 0.0;
    double profiled_std_s = 0.0;
    double overhead_percent = 0.0;   // 100 * profiled_mean / vanilla_mean
    std::uint64_t trace_file_bytes = 0;
};

struct OverheadTable {
    std::vector<OverheadRow> rows;
};

// Cross-thread rollup: total ns per syscall name over the whole document,
// ordered by descending total, ties broken alphabetically.
std::vector<std::pair<std::string, std::uint64_t>>
aggregate_syscalls(const ProfileDocument& doc);

double mean(std::span<const double> xs);

// Sample standard deviation (n-1 denominator); 0 for a single observation.
double sample_std(std::span<const double> xs);

// Means, sample stds, and the profiled/vanilla ratio in percent.  The row's
// trace size is the mean of the profiled samples' byte counts, rounded to the
// nearest byte.  Throws std::invalid_argument when either sequence is empty.
OverheadRow overhead_stats(std::string benchmark,
                           std::span<const RunSample> vanilla,
                           std::span<const RunSample> profiled);

// Bytes of trace produced per millisecond of execution.
// Throws std::invalid_argument when wall_seconds <= 0.
double logging_intensity(std::uint64_t trace_bytes, double wall_seconds);

// Fraction of the thread's observed window spent inside syscalls:
// sum of per-syscall totals / (last exit - first entry).  Throws
// std::invalid_argument when the window is missing or empty.
double total_kernel_fraction(const ThreadProfile& thread);

// Aligned plain-text rendering of the table (one benchmark block per row).
std::string render_overhead_table(const OverheadTable& table);

// The same data as comma-separated values with a header line.
std::string overhead_table_csv(const OverheadTable& table);

} // namespace staktau
