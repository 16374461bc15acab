#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "staktau/flush_buffer.hpp"
#include "staktau/profile.hpp"
#include "staktau/syscall_table.hpp"

#include <sys/types.h>

namespace staktau {

struct TraceConfig {
    std::vector<std::string> command;       // target argv; command[0] is the program
    std::size_t buffer_capacity = 2048;     // record buffer size for the profile dump
    bool follow_threads = true;             // attach to threads the target creates
    std::string output_path;                // where the profile dump is written ("" = no file)
    bool echo_events = false;               // verbose: one line per syscall stop to stderr
};

// Outcome of tracing one process to completion.
struct RunResult {
    int exit_code = 0;                      // meaningful when !term_signal
    std::optional<int> term_signal;         // set when the target died of a signal
    std::vector<ThreadProfile> profiles;    // per-thread accumulation, tid ascending
    std::uint64_t orphan_exits = 0;         // exits observed with no open timer
    std::uint64_t mismatched_exits = 0;     // exit syscall id != entry syscall id
    std::uint64_t missed_records = 0;       // records lost to sink failures
    std::uint64_t forced_closures = 0;      // timers still open at session end
    std::uint64_t trace_bytes = 0;          // bytes written to output_path
    bool desync = false;                    // aborted on an unexpected stop sequence
    std::string desync_reason;
};

// Target could not be started (bad path, permissions, ...).
class LaunchError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class StopKind {
    SyscallEntry,
    SyscallExit,
    ThreadCreated,
    ThreadExited,
    Other,
};

std::string_view stop_kind_name(StopKind kind);

struct TraceeState {
    pid_t tid = 0;
    bool in_syscall = false;
    std::optional<long> current_syscall;
    bool alive = true;
};

// One stop notification, reduced to what classification needs.  The live
// tracer fills this from the wait status and thread registers; tests can
// construct arbitrary sequences.
struct RawStop {
    bool syscall_stop = false;      // syscall-entry-or-exit trap
    int ptrace_event = 0;           // thread lifecycle event code, 0 if none
    int signal = 0;                 // signal that caused the stop
    long syscall_nr = -1;           // valid at syscall stops
};

struct Classification {
    StopKind kind = StopKind::Other;
    bool synthesized_creation = false;  // tid was unknown; creation was recorded first
    long syscall = -1;                  // syscall id for Entry/Exit kinds
};

// Tracks entry/exit parity per thread.  Syscall stops carry no direction
// flag, so the classifier derives it: first stop of a pair is the entry,
// the next one the exit.
class StopClassifier {
public:
    Classification classify(pid_t tid, const RawStop& stop);

    const TraceeState* state(pid_t tid) const;
    std::size_t tracked() const { return states_.size(); }

private:
    std::map<pid_t, TraceeState> states_;
    TraceeState& state_for(pid_t tid, bool& created);
};

// Convenience wrapper over the per-architecture tables.
std::string syscall_name(Arch arch, long number);

// Runs config.command under syscall tracing, feeds every entry/exit into an
// Accumulator, and dumps the resulting profile document through `sink` (and
// to config.output_path when set).  Blocks until the target exits.
RunResult trace_process(const TraceConfig& config, RecordSink& sink);

// As above, writing the dump to config.output_path only.
RunResult trace_process(const TraceConfig& config);

// Renders the equivalent kernel-probe script: entry probe starts a per-tid
// timer, return probe accumulates the delta per (tid, syscall), records pass
// through a buffer of config.buffer_capacity, and the end probe prints the
// same per-TID tables the user-space tracer writes.  Pure function of config.
std::string emit_probe_script(const TraceConfig& config);

} // namespace staktau
