#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <sys/types.h>
#include <utility>
#include <vector>

namespace staktau {

enum class Phase { Entry, Exit };

// One kernel-boundary crossing observed by the tracer.
struct SyscallEvent {
    pid_t tid = 0;
    long syscall = -1;                      // architecture-specific number
    Phase phase = Phase::Entry;
    std::uint64_t ts_mono = 0;              // monotonic clock, ns
    std::optional<std::uint64_t> ts_wall;   // epoch ns; present on a thread's first event only
};

struct SyscallStats {
    std::uint64_t total_ns = 0;
    std::uint64_t count = 0;   // 0 when unknown (profiles parsed from text carry no counts)

    bool operator==(const SyscallStats&) const = default;
};

// Per-thread accumulation. per_syscall keeps first-occurrence order, which is
// also the order rows are printed in.
struct ThreadProfile {
    pid_t tid = 0;
    std::uint64_t start_wall_ns = 0;               // wall clock at first observed event
    std::optional<std::uint64_t> first_entry_mono;
    std::optional<std::uint64_t> last_exit_mono;   // final observed exit (exit-family when present)
    bool forced_close = false;                     // a timer was closed at session end
    std::vector<std::pair<std::string, SyscallStats>> per_syscall;

    SyscallStats* find(std::string_view name);
    const SyscallStats* find(std::string_view name) const;
    SyscallStats& row(std::string_view name);      // inserts at the back on first use
    std::uint64_t total_syscall_ns() const;
};

using SyscallNamer = std::function<std::string(long)>;

// Default namer used when no syscall table is supplied.
std::string fallback_syscall_name(long number);

// Folds a SyscallEvent stream into per-thread profiles. Single-writer: one
// coordinator calls ingest/finalize; the object is movable between threads but
// never shared.
class Accumulator {
public:
    Accumulator() : Accumulator(fallback_syscall_name) {}
    explicit Accumulator(SyscallNamer namer);

    // Entry installs the thread's active timer; Exit closes it and adds the
    // delta to the entry syscall's row. An Exit without a timer is discarded
    // (orphan). An Exit whose number disagrees with the open timer closes the
    // timer at the exit timestamp, attributes the time to the entry's
    // syscall, and bumps the mismatch counter. An Entry over an open timer is
    // also treated as a mismatch: the old timer is closed at the new entry's
    // timestamp before the new one is installed.
    void ingest(const SyscallEvent& ev);

    // Closes any open timers at session_end_mono (attributed normally, thread
    // marked forced_close) and returns all profiles ordered by ascending tid.
    // The accumulator is left empty.
    std::vector<ThreadProfile> finalize(std::uint64_t session_end_mono);

    std::uint64_t orphan_exits() const { return orphan_exits_; }
    std::uint64_t mismatched_exits() const { return mismatched_exits_; }
    std::size_t open_timers() const;
    std::size_t thread_count() const { return threads_.size(); }

private:
    struct ActiveTimer {
        long syscall = -1;
        std::uint64_t entry_ts = 0;
    };
    struct PerThread {
        std::uint64_t start_wall_ns = 0;
        std::optional<std::uint64_t> first_entry_mono;
        std::optional<std::uint64_t> last_exit_mono;
        std::optional<ActiveTimer> timer;
        bool forced_close = false;
        // id-keyed rows in first-occurrence order; names resolved in finalize
        std::vector<std::pair<long, SyscallStats>> rows;

        SyscallStats& row(long syscall);
        void close_timer(std::uint64_t exit_ts, bool observed_exit);
    };

    SyscallNamer namer_;
    std::map<pid_t, PerThread> threads_;
    std::uint64_t orphan_exits_ = 0;
    std::uint64_t mismatched_exits_ = 0;
};

} // namespace staktau
