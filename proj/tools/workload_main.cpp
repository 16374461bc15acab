#include <cstdio>

#include "CLI11.hpp"

#include "staktau/bench.hpp"

// Benchmark workloads as a standalone process, so the profiler can trace them
// the same way it traces any other target.  Silent unless asked to print:
// stray output would add syscalls to the very thing being measured.
int main(int argc, char** argv) {
    CLI::App app{"staktau-workload - benchmark programs for the staktau harness"};
    app.require_subcommand(1);

    unsigned threads = 0;
    app.add_option("--threads", threads, "Worker threads (0 = hardware)")
        ->capture_default_str();

    auto* pi = app.add_subcommand("pi", "Midpoint-rule estimate of pi");
    pi->fallthrough();   // --threads may follow the subcommand
    std::uint64_t intervals = 10'000'000;
    bool print = false;
    pi->add_option("--intervals", intervals, "Interval count")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    pi->add_flag("--print", print, "Print the estimate");

    auto* rt = app.add_subcommand("raytrace", "Render the fixed sphere scene");
    rt->fallthrough();
    int width = 960, height = 720, samples = 16;
    std::string scene, image;
    rt->add_option("--width", width, "Image width")->check(CLI::PositiveNumber);
    rt->add_option("--height", height, "Image height")->check(CLI::PositiveNumber);
    rt->add_option("--samples", samples, "Samples per pixel")->check(CLI::PositiveNumber);
    rt->add_option("--scene", scene, "Scene file (default: generated)");
    rt->add_option("--image", image, "Output image path (default: temporary)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    staktau::BenchSpec spec;
    spec.threads = threads;
    try {
        if (pi->parsed()) {
            spec.name = staktau::BenchKind::Pi;
            spec.pi_intervals = intervals;
            const staktau::PiResult result = staktau::bench_pi(spec);
            if (print) std::printf("%.12f\n", result.estimate);
        } else {
            spec.name = staktau::BenchKind::Raytrace;
            spec.rt_width = width;
            spec.rt_height = height;
            spec.rt_samples = samples;
            spec.rt_scene_path = scene;
            spec.rt_image_path = image;
            staktau::bench_raytrace(spec);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "staktau-workload: error: %s\n", e.what());
        return 1;
    }
    return 0;
}
