#include "doctest.h"

#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "staktau/analyzer.hpp"

using namespace staktau;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

ThreadProfile thread_with(pid_t tid,
                          std::vector<std::pair<std::string, std::uint64_t>> rows) {
    ThreadProfile t;
    t.tid = tid;
    for (auto& [name, total] : rows)
        t.per_syscall.emplace_back(std::move(name), SyscallStats{total, 1});
    return t;
}

std::vector<RunSample> seconds(std::initializer_list<double> xs) {
    std::vector<RunSample> out;
    for (double x : xs) out.push_back({x, 0});
    return out;
}

} // namespace

TEST_CASE("aggregate over the reference profile ranks futex first") {
    const ProfileDocument doc = parse_profile(slurp(GOLDEN_PROFILE_PATH));
    const auto totals = aggregate_syscalls(doc);
    REQUIRE_FALSE(totals.empty());
    CHECK(totals[0].first == "futex");
    CHECK(totals[0].second == 12486935ull + 17912269ull);
    CHECK(totals[0].second == 30399204ull);
}

TEST_CASE("aggregating one thread reorders its rows by total") {
    const auto doc = make_document({thread_with(1, {{"read", 5}, {"futex", 100}})});
    const auto totals = aggregate_syscalls(doc);
    REQUIRE(totals.size() == 2);
    CHECK(totals[0] == std::pair<std::string, std::uint64_t>{"futex", 100});
    CHECK(totals[1] == std::pair<std::string, std::uint64_t>{"read", 5});
}

TEST_CASE("aggregation sums rows across threads and breaks ties by name") {
    const auto doc = make_document({thread_with(1, {{"write", 10}, {"bbb", 3}}),
                                    thread_with(2, {{"write", 10}, {"aaa", 3}})});
    const auto totals = aggregate_syscalls(doc);
    REQUIRE(totals.size() == 3);
    CHECK(totals[0] == std::pair<std::string, std::uint64_t>{"write", 20});
    CHECK(totals[1] == std::pair<std::string, std::uint64_t>{"aaa", 3});
    CHECK(totals[2] == std::pair<std::string, std::uint64_t>{"bbb", 3});
}

TEST_CASE("aggregate is invariant under thread permutation") {
    const auto d1 = make_document({thread_with(1, {{"a", 1}, {"b", 9}}),
                                   thread_with(2, {{"b", 2}, {"c", 4}})});
    const auto d2 = make_document({thread_with(2, {{"b", 2}, {"c", 4}}),
                                   thread_with(1, {{"a", 1}, {"b", 9}})});
    CHECK(aggregate_syscalls(d1) == aggregate_syscalls(d2));
}

TEST_CASE("overhead stats on the reference timing summary") {
    // means rounded to 3 decimals lose a little of the original ratio; the
    // recomputed percentages land near but not on the reference percentages
    const auto pi = overhead_stats("pi", seconds({0.037}), seconds({0.062}));
    CHECK(pi.overhead_percent == doctest::Approx(100.0 * 0.062 / 0.037).epsilon(1e-12));
    CHECK(std::abs(pi.overhead_percent - 169.2) < 5.0);

    const auto ray = overhead_stats("ray", seconds({20.946}), seconds({20.823}));
    CHECK(ray.overhead_percent == doctest::Approx(100.0 * 20.823 / 20.946).epsilon(1e-12));
    CHECK(std::abs(ray.overhead_percent - 99.2) < 5.0);
}

TEST_CASE("identical run sets give exactly 100 percent") {
    const auto row = overhead_stats("x", seconds({1.5, 2.5}), seconds({1.5, 2.5}));
    CHECK(row.overhead_percent == 100.0);
}

TEST_CASE("constant sequences have zero deviation") {
    const auto row = overhead_stats("x", seconds({2.0, 2.0}), seconds({3.0, 3.0}));
    CHECK(row.vanilla_mean_s == 2.0);
    CHECK(row.profiled_mean_s == 3.0);
    CHECK(row.vanilla_std_s == 0.0);
    CHECK(row.profiled_std_s == 0.0);
    CHECK(row.overhead_percent == 150.0);
}

TEST_CASE("stds use the n-1 denominator and singletons have std 0") {
    std::vector<double> xs{1.0, 2.0, 3.0};
    CHECK(mean(xs) == 2.0);
    CHECK(sample_std(xs) == doctest::Approx(1.0));   // sqrt((1+0+1)/2)
    std::vector<double> one{7.0};
    CHECK(sample_std(one) == 0.0);
}

TEST_CASE("overhead is scale-consistent") {
    const auto a = overhead_stats("x", seconds({1.0, 1.2, 0.9}), seconds({1.5, 1.4, 1.6}));
    const auto b = overhead_stats("x", seconds({3.0, 3.6, 2.7}), seconds({4.5, 4.2, 4.8}));
    CHECK(a.overhead_percent == doctest::Approx(b.overhead_percent).epsilon(1e-12));
}

TEST_CASE("trace size is the mean of profiled byte counts") {
    std::vector<RunSample> vanilla{{1.0, 0}};
    std::vector<RunSample> profiled{{1.0, 100}, {1.0, 101}, {1.0, 101}};
    const auto row = overhead_stats("x", vanilla, profiled);
    CHECK(row.trace_file_bytes == 101);   // 302/3 rounds to nearest
}

TEST_CASE("overhead stats reject empty inputs") {
    std::vector<RunSample> empty, some{{1.0, 0}};
    CHECK_THROWS_AS(overhead_stats("x", empty, some), std::invalid_argument);
    CHECK_THROWS_AS(overhead_stats("x", some, empty), std::invalid_argument);
}

TEST_CASE("logging intensity reproduces the reference byte rates") {
    CHECK(logging_intensity(65236, 0.062) == doctest::Approx(1052.19).epsilon(1e-3));
    CHECK(std::abs(logging_intensity(65236, 0.062) - 1052.0) < 1.0);
    CHECK(logging_intensity(82332, 20.823) == doctest::Approx(3.9539).epsilon(1e-3));
    CHECK(logging_intensity(0, 1.0) == 0.0);
    CHECK_THROWS_AS(logging_intensity(100, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(logging_intensity(100, -1.0), std::invalid_argument);
}

TEST_CASE("kernel fraction relates syscall time to the thread window") {
    ThreadProfile t = thread_with(1, {{"write", 100}});
    t.first_entry_mono = 1000;
    t.last_exit_mono = 1100;
    CHECK(total_kernel_fraction(t) == doctest::Approx(1.0));

    t.last_exit_mono = 1400;
    CHECK(total_kernel_fraction(t) == doctest::Approx(0.25));

    // the reference thread 40739 against a synthetic 20 ms window
    ThreadProfile b = thread_with(40739, {{"set_robust_list", 4760},
                                          {"rt_sigprocmask", 4213},
                                          {"futex", 17912269}});
    b.first_entry_mono = 0;
    b.last_exit_mono = 20'000'000;
    CHECK(total_kernel_fraction(b) == doctest::Approx(0.8960621).epsilon(1e-6));

    ThreadProfile undefined = thread_with(2, {{"read", 1}});
    CHECK_THROWS_AS(total_kernel_fraction(undefined), std::invalid_argument);
    undefined.first_entry_mono = 5;
    undefined.last_exit_mono = 5;
    CHECK_THROWS_AS(total_kernel_fraction(undefined), std::invalid_argument);
}

TEST_CASE("the overhead table renders both text and csv") {
    OverheadTable table;
    table.rows.push_back({"pi", 0.037, 0.003, 0.062, 0.004, 167.567, 65236});
    table.rows.push_back({"raytrace", 20.946, 0.113, 20.823, 0.121, 99.413, 82332});

    const std::string text = render_overhead_table(table);
    CHECK(text.find("Benchmark") != std::string::npos);
    CHECK(text.find("pi") != std::string::npos);
    CHECK(text.find("0.062") != std::string::npos);
    CHECK(text.find("65236 B") != std::string::npos);
    CHECK(text.find("167.6%") != std::string::npos);
    CHECK(text.find("STaKTAU:") != std::string::npos);

    const std::string csv = overhead_table_csv(table);
    CHECK(csv.rfind("benchmark,vanilla_mean_s,vanilla_std_s,profiled_mean_s,"
                    "profiled_std_s,overhead_percent,trace_file_bytes\n", 0) == 0);
    CHECK(csv.find("\npi,") != std::string::npos);
    CHECK(csv.find(",65236\n") != std::string::npos);
    CHECK(csv.find("raytrace,") != std::string::npos);
}
