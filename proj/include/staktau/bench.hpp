#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "staktau/analyzer.hpp"
#include "staktau/tracer.hpp"

namespace staktau {

enum class BenchKind { Pi, Raytrace };

std::string_view bench_kind_name(BenchKind kind);

struct BenchSpec {
    BenchKind name = BenchKind::Pi;
    unsigned threads = 0;              // 0 = hardware thread count
    unsigned repetitions = 10;

    // Pi workload: midpoint-rule interval count.
    std::uint64_t pi_intervals = 10'000'000;

    // Raytrace workload.
    int rt_width = 960;
    int rt_height = 720;
    int rt_samples = 16;
    std::string rt_scene_path;         // "" = write and read the default scene
    std::string rt_image_path;         // "" = temporary file

    // Helper binary that run_experiment executes as a separate process.
    std::string workload_binary;       // "" = staktau-workload next to this binary
};

// 0 -> hardware concurrency (at least 1).
unsigned resolve_threads(unsigned requested);

// The staktau-workload binary installed alongside the current executable.
std::string default_workload_binary();

struct PiResult {
    double estimate = 0.0;
    RunSample sample;
};

// Midpoint-rule integration of 4/(1+x^2) over [0,1], intervals split across a
// freshly spawned thread team and combined by an ordered reduction.  The
// spawn/join per call is deliberate: thread synchronization syscalls are the
// point of this workload.
PiResult bench_pi(const BenchSpec& spec);

// Renders the fixed sphere scene: scene file read up front, image file
// written at the end, pure computation in between.
RunSample bench_raytrace(const BenchSpec& spec);

struct ExperimentResult {
    OverheadRow row;
    std::vector<RunSample> vanilla;
    std::vector<RunSample> profiled;
    std::uint64_t missed_records = 0;
    std::uint64_t orphan_exits = 0;
    std::string last_trace_path;       // profile of the final profiled run
};

// Runs spec.repetitions vanilla and spec.repetitions profiled executions of
// the workload binary, interleaved to decorrelate machine drift, and reduces
// them with overhead_stats.  With no profiler config, both arms run vanilla
// (a null experiment).  Any failing run aborts with std::runtime_error.
ExperimentResult run_experiment(const BenchSpec& spec,
                                const std::optional<TraceConfig>& profiler);

} // namespace staktau
