#include "staktau/bench.hpp"

#include "staktau/raytrace.hpp"

#include <cerrno>
#include <cstring>
#include <ctime>
#include <filesystem>
#include <stdexcept>
#include <thread>

#include <sys/wait.h>
#include <unistd.h>

namespace staktau {

namespace {

// Compensated summation; chunk sums stay exact enough that the reduction
// order (and with it the thread count) cannot move the result.
struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;

    void add(double x) {
        const double y = x - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

double elapsed_seconds(const timespec& begin, const timespec& end) {
    return static_cast<double>(end.tv_sec - begin.tv_sec) +
           static_cast<double>(end.tv_nsec - begin.tv_nsec) * 1e-9;
}

timespec now_mono() {
    timespec ts{};
    clock_gettime(CLOCK_MONOTONIC, &ts);
    return ts;
}

std::string temp_path(const std::string& stem) {
    return (std::filesystem::temp_directory_path() /
            (stem + "-" + std::to_string(getpid())))
        .string();
}

// Forks, execs argv, waits; returns the child's exit code.  Throws when the
// child cannot be spawned or dies of a signal.
int spawn_and_wait(const std::vector<std::string>& argv) {
    std::vector<char*> cargv;
    cargv.reserve(argv.size() + 1);
    for (const std::string& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
    cargv.push_back(nullptr);

    pid_t child = fork();
    if (child < 0)
        throw std::runtime_error(std::string("fork: ") + std::strerror(errno));
    if (child == 0) {
        execvp(cargv[0], cargv.data());
        _exit(127);
    }
    int status = 0;
    if (waitpid(child, &status, 0) < 0)
        throw std::runtime_error(std::string("waitpid: ") + std::strerror(errno));
    if (WIFSIGNALED(status))
        throw std::runtime_error(argv[0] + " killed by signal " +
                                 std::to_string(WTERMSIG(status)));
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::string> workload_argv(const BenchSpec& spec) {
    std::string binary =
        spec.workload_binary.empty() ? default_workload_binary() : spec.workload_binary;
    const std::string threads = std::to_string(resolve_threads(spec.threads));
    if (spec.name == BenchKind::Pi)
        return {binary, "pi", "--threads", threads, "--intervals",
                std::to_string(spec.pi_intervals)};
    std::string image =
        spec.rt_image_path.empty() ? temp_path("staktau-render") + ".ppm" : spec.rt_image_path;
    std::vector<std::string> argv{binary,
                                  "raytrace",
                                  "--threads",
                                  threads,
                                  "--width",
                                  std::to_string(spec.rt_width),
                                  "--height",
                                  std::to_string(spec.rt_height),
                                  "--samples",
                                  std::to_string(spec.rt_samples),
                                  "--image",
                                  image};
    if (!spec.rt_scene_path.empty()) {
        argv.push_back("--scene");
        argv.push_back(spec.rt_scene_path);
    }
    return argv;
}

void validate(const BenchSpec& spec) {
    if (spec.repetitions < 1)
        throw std::invalid_argument("bench: repetitions must be >= 1");
    if (spec.pi_intervals < 1)
        throw std::invalid_argument("bench: intervals must be >= 1");
    if (spec.rt_width < 1 || spec.rt_height < 1 || spec.rt_samples < 1)
        throw std::invalid_argument("bench: image parameters must be >= 1");
}

} // namespace

std::string_view bench_kind_name(BenchKind kind) {
    return kind == BenchKind::Pi ? "pi" : "raytrace";
}

unsigned resolve_threads(unsigned requested) {
    if (requested >= 1) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    return hw >= 1 ? hw : 1;
}

std::string default_workload_binary() {
    char buf[4096];
    ssize_t len = readlink("/proc/self/exe", buf, sizeof buf - 1);
    if (len <= 0) return "staktau-workload";   // fall back to PATH lookup
    buf[len] = '\0';
    return (std::filesystem::path(buf).parent_path() / "staktau-workload").string();
}

PiResult bench_pi(const BenchSpec& spec) {
    validate(spec);
    const unsigned threads = resolve_threads(spec.threads);
    const std::uint64_t n = spec.pi_intervals;

    const timespec begin = now_mono();

    // one fresh team per call: the spawn/join syscalls are part of the workload
    std::vector<double> partial(threads, 0.0);
    std::vector<std::thread> team;
    team.reserve(threads);
    const std::uint64_t per = n / threads;
    const std::uint64_t extra = n % threads;
    std::uint64_t lo = 0;
    for (unsigned i = 0; i < threads; i++) {
        const std::uint64_t hi = lo + per + (i < extra ? 1 : 0);
        team.emplace_back(
            [n, lo, hi, &slot = partial[i]] {
                KahanSum sum;
                for (std::uint64_t k = lo; k < hi; k++) {
                    const double x = (static_cast<double>(k) + 0.5) / static_cast<double>(n);
                    sum.add(1.0 / (1.0 + x * x));
                }
                slot = sum.sum;
            });
        lo = hi;
    }
    for (std::thread& t : team) t.join();

    KahanSum total;   // ordered reduction: deterministic for a fixed chunking
    for (double p : partial) total.add(p);

    PiResult result;
    result.estimate = 4.0 * total.sum / static_cast<double>(n);
    result.sample.wall_seconds = elapsed_seconds(begin, now_mono());
    return result;
}

RunSample bench_raytrace(const BenchSpec& spec) {
    validate(spec);
    const unsigned threads = resolve_threads(spec.threads);

    std::string scene_path = spec.rt_scene_path;
    if (scene_path.empty()) {
        scene_path = temp_path("staktau-scene") + ".txt";
        rt::write_scene(rt::default_scene(), scene_path);
    }
    const std::string image_path =
        spec.rt_image_path.empty() ? temp_path("staktau-render") + ".ppm"
                                   : spec.rt_image_path;

    const timespec begin = now_mono();
    const rt::Scene scene = rt::read_scene(scene_path);
    const rt::Image image =
        rt::render(scene, spec.rt_width, spec.rt_height, spec.rt_samples, threads);
    rt::write_ppm(image, image_path);

    RunSample sample;
    sample.wall_seconds = elapsed_seconds(begin, now_mono());
    return sample;
}

ExperimentResult run_experiment(const BenchSpec& spec,
                                const std::optional<TraceConfig>& profiler) {
    validate(spec);
    const std::vector<std::string> argv = workload_argv(spec);

    ExperimentResult result;
    result.vanilla.reserve(spec.repetitions);
    result.profiled.reserve(spec.repetitions);

    auto run_vanilla = [&]() {
        const timespec begin = now_mono();
        const int code = spawn_and_wait(argv);
        const double secs = elapsed_seconds(begin, now_mono());
        if (code != 0)
            throw std::runtime_error(std::string(bench_kind_name(spec.name)) +
                                     " workload exited with code " + std::to_string(code));
        return RunSample{secs, 0};
    };

    auto run_profiled = [&](unsigned rep) {
        TraceConfig cfg = *profiler;
        cfg.command = argv;
        cfg.output_path = temp_path("staktau-trace-" +
                                    std::string(bench_kind_name(spec.name))) +
                          "-" + std::to_string(rep) + ".prof";
        const timespec begin = now_mono();
        const RunResult run = trace_process(cfg);
        const double secs = elapsed_seconds(begin, now_mono());
        if (run.term_signal)
            throw std::runtime_error(std::string(bench_kind_name(spec.name)) +
                                     " workload killed by signal " +
                                     std::to_string(*run.term_signal));
        if (run.exit_code != 0)
            throw std::runtime_error(std::string(bench_kind_name(spec.name)) +
                                     " workload exited with code " +
                                     std::to_string(run.exit_code));
        if (run.desync)
            throw std::runtime_error("tracer desync while profiling: " +
                                     run.desync_reason);
        result.missed_records += run.missed_records;
        result.orphan_exits += run.orphan_exits;
        result.last_trace_path = cfg.output_path;
        return RunSample{secs, run.trace_bytes};
    };

    // vanilla/profiled alternate so slow drift hits both arms equally
    for (unsigned rep = 0; rep < spec.repetitions; rep++) {
        result.vanilla.push_back(run_vanilla());
        result.profiled.push_back(profiler ? run_profiled(rep) : run_vanilla());
    }

    result.row = overhead_stats(std::string(bench_kind_name(spec.name)), result.vanilla,
                                result.profiled);
    return result;
}

} // namespace staktau
