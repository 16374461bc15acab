#include "doctest.h"

#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "staktau/flush_buffer.hpp"
#include "staktau/profile.hpp"

using namespace staktau;

namespace {

// Small fixed namer so tests control every name.
std::string test_name(long nr) {
    switch (nr) {
    case 1: return "write";
    case 35: return "nanosleep";
    case 98: return "futex";
    case 231: return "exit_group";
    default: return "sys_" + std::to_string(nr);
    }
}

SyscallEvent entry(pid_t tid, long nr, std::uint64_t ts) {
    return {tid, nr, Phase::Entry, ts, std::nullopt};
}

SyscallEvent exit_ev(pid_t tid, long nr, std::uint64_t ts) {
    return {tid, nr, Phase::Exit, ts, std::nullopt};
}

struct TestSink : RecordSink {
    std::vector<std::string> received;
    std::size_t batches = 0;
    bool fail = false;

    bool write(std::span<const std::string> records) override {
        if (fail) return false;
        batches++;
        received.insert(received.end(), records.begin(), records.end());
        return true;
    }
};

} // namespace

TEST_CASE("a paired entry/exit accumulates its delta") {
    Accumulator acc(test_name);
    acc.ingest(entry(7, 1, 100));
    acc.ingest(exit_ev(7, 1, 350));
    auto profiles = acc.finalize(1000);
    REQUIRE(profiles.size() == 1);
    CHECK(profiles[0].tid == 7);
    REQUIRE(profiles[0].per_syscall.size() == 1);
    CHECK(profiles[0].per_syscall[0].first == "write");
    CHECK(profiles[0].per_syscall[0].second.total_ns == 250);
    CHECK(profiles[0].per_syscall[0].second.count == 1);
    CHECK(profiles[0].first_entry_mono == 100);
    CHECK(profiles[0].last_exit_mono == 350);
    CHECK_FALSE(profiles[0].forced_close);
}

TEST_CASE("an exit with no open timer is discarded as an orphan") {
    Accumulator acc(test_name);
    acc.ingest(exit_ev(7, 0, 50));
    CHECK(acc.orphan_exits() == 1);
    CHECK(acc.thread_count() == 0);
    CHECK(acc.finalize(100).empty());
}

TEST_CASE("repeated calls to one syscall share a single row") {
    Accumulator acc(test_name);
    std::uint64_t ts = 0;
    for (std::uint64_t d : {4760u, 4213u, 17903296u}) {
        acc.ingest(entry(40739, 98, ts));
        acc.ingest(exit_ev(40739, 98, ts + d));
        ts += d + 10;
    }
    auto profiles = acc.finalize(ts);
    REQUIRE(profiles.size() == 1);
    REQUIRE(profiles[0].per_syscall.size() == 1);
    CHECK(profiles[0].per_syscall[0].first == "futex");
    CHECK(profiles[0].per_syscall[0].second.total_ns == 17912269);
    CHECK(profiles[0].per_syscall[0].second.count == 3);
}

TEST_CASE("a mismatched exit closes the timer on the entry's syscall") {
    Accumulator acc(test_name);
    acc.ingest(entry(3, 1, 100));
    acc.ingest(exit_ev(3, 35, 180));
    CHECK(acc.mismatched_exits() == 1);
    auto profiles = acc.finalize(500);
    REQUIRE(profiles[0].per_syscall.size() == 1);
    CHECK(profiles[0].per_syscall[0].first == "write");
    CHECK(profiles[0].per_syscall[0].second.total_ns == 80);
    CHECK(profiles[0].last_exit_mono == 180);
}

TEST_CASE("an entry over an open timer closes the old timer first") {
    Accumulator acc(test_name);
    acc.ingest(entry(3, 1, 100));
    acc.ingest(entry(3, 98, 150));
    acc.ingest(exit_ev(3, 98, 170));
    CHECK(acc.mismatched_exits() == 1);
    auto profiles = acc.finalize(500);
    REQUIRE(profiles[0].per_syscall.size() == 2);
    CHECK(profiles[0].per_syscall[0].first == "write");
    CHECK(profiles[0].per_syscall[0].second.total_ns == 50);
    CHECK(profiles[0].per_syscall[1].first == "futex");
    CHECK(profiles[0].per_syscall[1].second.total_ns == 20);
    // the forced close of "write" is not an observed exit
    CHECK(profiles[0].last_exit_mono == 170);
}

TEST_CASE("finalize closes open timers at the session end") {
    Accumulator acc(test_name);
    acc.ingest(entry(9, 35, 10));
    CHECK(acc.open_timers() == 1);
    auto profiles = acc.finalize(110);
    REQUIRE(profiles.size() == 1);
    CHECK(profiles[0].per_syscall[0].first == "nanosleep");
    CHECK(profiles[0].per_syscall[0].second.total_ns == 100);
    CHECK(profiles[0].forced_close);
    CHECK_FALSE(profiles[0].last_exit_mono.has_value());
    CHECK(acc.thread_count() == 0);   // finalize empties the accumulator
}

TEST_CASE("an empty session finalizes to an empty profile set") {
    Accumulator acc(test_name);
    CHECK(acc.finalize(0).empty());
}

TEST_CASE("the first event's wall timestamp becomes the thread header") {
    Accumulator acc(test_name);
    SyscallEvent first = entry(5, 1, 100);
    first.ts_wall = 1680935665981760030ull;
    acc.ingest(first);
    acc.ingest(exit_ev(5, 1, 110));
    SyscallEvent later = entry(5, 1, 200);
    later.ts_wall = 42;   // ignored: the header is pinned to the first event
    acc.ingest(later);
    acc.ingest(exit_ev(5, 1, 210));
    auto profiles = acc.finalize(300);
    CHECK(profiles[0].start_wall_ns == 1680935665981760030ull);
}

TEST_CASE("profiles come back ordered by tid with first-occurrence rows") {
    Accumulator acc(test_name);
    acc.ingest(entry(300, 98, 10));
    acc.ingest(exit_ev(300, 98, 20));
    acc.ingest(entry(100, 35, 30));
    acc.ingest(exit_ev(100, 35, 40));
    acc.ingest(entry(300, 1, 50));
    acc.ingest(exit_ev(300, 1, 60));
    auto profiles = acc.finalize(100);
    REQUIRE(profiles.size() == 2);
    CHECK(profiles[0].tid == 100);
    CHECK(profiles[1].tid == 300);
    REQUIRE(profiles[1].per_syscall.size() == 2);
    CHECK(profiles[1].per_syscall[0].first == "futex");   // seen before write
    CHECK(profiles[1].per_syscall[1].first == "write");
}

TEST_CASE("ingest is deterministic over identical streams") {
    auto run = [] {
        Accumulator acc(test_name);
        std::mt19937 rng(1234);
        std::uint64_t ts = 0;
        for (int i = 0; i < 500; i++) {
            const pid_t tid = static_cast<pid_t>(rng() % 4 + 1);
            const long nr = static_cast<long>(rng() % 3);
            acc.ingest(entry(tid, nr, ts));
            acc.ingest(exit_ev(tid, nr, ts + rng() % 100));
            ts += 100;
        }
        return acc.finalize(ts);
    };
    auto a = run();
    auto b = run();
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); i++) {
        CHECK(a[i].tid == b[i].tid);
        CHECK(a[i].per_syscall == b[i].per_syscall);
    }
}

TEST_CASE("pairing soundness: interleaved tids match per-tid brute force") {
    std::mt19937 rng(20230405);
    for (int round = 0; round < 20; round++) {
        const int tids = 1 + static_cast<int>(rng() % 8);
        // build per-tid alternating streams, then merge them randomly
        struct Pending {
            std::vector<SyscallEvent> events;
            std::size_t next = 0;
        };
        std::vector<Pending> streams(tids);
        std::map<pid_t, std::uint64_t> expected_total;
        std::map<pid_t, std::pair<std::uint64_t, std::uint64_t>> window;
        std::uint64_t ts = 1;
        const int pairs = 50 + static_cast<int>(rng() % 200);
        for (int p = 0; p < pairs; p++) {
            const int idx = static_cast<int>(rng() % tids);
            const pid_t tid = static_cast<pid_t>(idx + 1);
            const long nr = static_cast<long>(rng() % 5);
            const std::uint64_t dur = rng() % 1000;
            streams[idx].events.push_back(entry(tid, nr, ts));
            streams[idx].events.push_back(exit_ev(tid, nr, ts + dur));
            expected_total[tid] += dur;
            if (!window.count(tid)) window[tid].first = ts;
            window[tid].second = ts + dur;
            ts += dur + 1 + rng() % 50;
        }

        Accumulator acc(test_name);
        // merge: randomly pick a stream with events left; within a tid the
        // order stays entry, exit, entry, exit
        std::vector<int> with_left;
        for (;;) {
            with_left.clear();
            for (int i = 0; i < tids; i++)
                if (streams[i].next < streams[i].events.size()) with_left.push_back(i);
            if (with_left.empty()) break;
            Pending& s = streams[with_left[rng() % with_left.size()]];
            acc.ingest(s.events[s.next++]);
        }

        auto profiles = acc.finalize(ts);
        CHECK(acc.orphan_exits() == 0);
        CHECK(acc.mismatched_exits() == 0);
        for (const ThreadProfile& t : profiles) {
            CHECK(t.total_syscall_ns() == expected_total[t.tid]);
            REQUIRE(t.first_entry_mono.has_value());
            REQUIRE(t.last_exit_mono.has_value());
            CHECK(*t.first_entry_mono == window[t.tid].first);
            CHECK(*t.last_exit_mono == window[t.tid].second);
            // syscalls are serialized within a thread
            CHECK(t.total_syscall_ns() <= *t.last_exit_mono - *t.first_entry_mono);
        }
    }
}

TEST_CASE("buffer: records stay pending until capacity is reached") {
    TestSink sink;
    FlushBuffer buf(2);
    buf.push("r1", sink);
    CHECK(buf.pending() == 1);
    CHECK(sink.batches == 0);
    buf.push("r2", sink);
    CHECK(buf.pending() == 0);
    CHECK(sink.batches == 1);
    REQUIRE(sink.received.size() == 2);
    CHECK(sink.received[0] == "r1");
    CHECK(sink.received[1] == "r2");
}

TEST_CASE("buffer: 5000 records through capacity 2048") {
    TestSink sink;
    FlushBuffer buf(2048);
    for (int i = 0; i < 5000; i++) buf.push("r" + std::to_string(i), sink);
    CHECK(sink.batches == 2);
    CHECK(buf.emitted() == 4096);
    CHECK(buf.pending() == 904);
    CHECK(buf.missed() == 0);
    buf.flush(sink);
    CHECK(buf.emitted() == 5000);
    CHECK(sink.received.size() == 5000);
    CHECK(sink.received.front() == "r0");
    CHECK(sink.received.back() == "r4999");
}

TEST_CASE("buffer: a rejected flush counts every record as missed, once warned") {
    TestSink sink;
    sink.fail = true;
    FlushBuffer buf(3);
    int warnings = 0;
    std::string last_warning;
    buf.set_diagnostic([&](const std::string& line) {
        warnings++;
        last_warning = line;
    });
    for (int i = 0; i < 3; i++) buf.push("r", sink);
    CHECK(buf.missed() == 3);
    CHECK(buf.pending() == 0);
    CHECK(warnings == 1);
    CHECK(last_warning.find("3 records missed") != std::string::npos);

    // collection continues after the failure
    sink.fail = false;
    buf.push("s", sink);
    buf.flush(sink);
    CHECK(buf.emitted() == 1);
    CHECK(buf.pushed() == buf.emitted() + buf.missed());
}

TEST_CASE("buffer: conservation holds under randomized failure schedules") {
    std::mt19937 rng(77);
    for (int round = 0; round < 100; round++) {
        TestSink sink;
        FlushBuffer buf(1 + rng() % 16);
        buf.set_diagnostic([](const std::string&) {});
        const int ops = 1 + static_cast<int>(rng() % 300);
        for (int i = 0; i < ops; i++) {
            sink.fail = (rng() % 4) == 0;
            if ((rng() % 8) == 0) buf.flush(sink);
            else buf.push("r", sink);
            CHECK(buf.pending() <= buf.capacity());
            CHECK(buf.pushed() == buf.emitted() + buf.missed() + buf.pending());
        }
        sink.fail = false;
        buf.flush(sink);
        CHECK(buf.pushed() == buf.emitted() + buf.missed());
        CHECK(static_cast<std::uint64_t>(sink.received.size()) == buf.emitted());
    }
}

TEST_CASE("buffer: zero capacity is rejected, empty flush is a no-op") {
    CHECK_THROWS_AS(FlushBuffer(0), std::invalid_argument);
    TestSink sink;
    FlushBuffer buf(4);
    buf.flush(sink);
    CHECK(sink.batches == 0);
    CHECK(buf.flushes() == 0);
}

TEST_CASE("buffer: emitted bytes include the record terminator") {
    TestSink sink;
    FlushBuffer buf(1);
    buf.push("abc", sink);    // 3 + newline
    buf.push("", sink);       // newline only
    CHECK(buf.emitted_bytes() == 5);
}
