#include "staktau/tracer.hpp"

#include "staktau/trace_format.hpp"

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <filesystem>
#include <set>
#include <system_error>

#include <elf.h>
#include <fcntl.h>
#include <signal.h>
#include <sys/ptrace.h>
#include <sys/uio.h>
#include <sys/user.h>
#include <sys/wait.h>
#include <unistd.h>

namespace staktau {

namespace {

constexpr int kSyscallTrapSig = SIGTRAP | 0x80;   // needs PTRACE_O_TRACESYSGOOD

std::uint64_t clock_ns(clockid_t clock) {
    timespec ts{};
    clock_gettime(clock, &ts);
    return static_cast<std::uint64_t>(ts.tv_sec) * 1'000'000'000ull +
           static_cast<std::uint64_t>(ts.tv_nsec);
}

// Syscall number of the stopped thread. False with errno set on failure
// (ESRCH: the thread died under us).
bool read_syscall_nr(pid_t tid, long& nr) {
#if defined(__x86_64__)
    user_regs_struct regs{};
    if (ptrace(PTRACE_GETREGS, tid, nullptr, &regs) != 0) return false;
    nr = static_cast<long>(regs.orig_rax);
    return true;
#elif defined(__aarch64__)
    user_pt_regs regs{};
    iovec iov{&regs, sizeof regs};
    if (ptrace(PTRACE_GETREGSET, tid, reinterpret_cast<void*>(NT_PRSTATUS), &iov) != 0)
        return false;
    nr = static_cast<long>(regs.regs[8]);
    return true;
#else
#error "unsupported architecture"
#endif
}

void validate(const TraceConfig& config) {
    if (config.command.empty())
        throw std::invalid_argument("trace_process: command must not be empty");
    if (config.buffer_capacity == 0)
        throw std::invalid_argument("trace_process: buffer_capacity must be >= 1");
}

} // namespace

std::string_view stop_kind_name(StopKind kind) {
    switch (kind) {
    case StopKind::SyscallEntry: return "syscall-entry";
    case StopKind::SyscallExit: return "syscall-exit";
    case StopKind::ThreadCreated: return "thread-created";
    case StopKind::ThreadExited: return "thread-exited";
    case StopKind::Other: return "other";
    }
    return "other";
}

std::string syscall_name(Arch arch, long number) {
    return SyscallTable::builtin(arch).name(number);
}

TraceeState& StopClassifier::state_for(pid_t tid, bool& created) {
    auto [it, inserted] = states_.try_emplace(tid);
    if (inserted) {
        it->second.tid = tid;
        created = true;
    }
    return it->second;
}

const TraceeState* StopClassifier::state(pid_t tid) const {
    auto it = states_.find(tid);
    return it == states_.end() ? nullptr : &it->second;
}

Classification StopClassifier::classify(pid_t tid, const RawStop& stop) {
    Classification out;
    bool created = false;
    TraceeState& st = state_for(tid, created);

    if (stop.syscall_stop) {
        // Direction is pure parity: syscall stops alternate entry, exit.
        out.synthesized_creation = created;
        if (!st.in_syscall) {
            st.in_syscall = true;
            st.current_syscall = stop.syscall_nr;
            out.kind = StopKind::SyscallEntry;
            out.syscall = stop.syscall_nr;
        } else {
            out.kind = StopKind::SyscallExit;
            out.syscall = st.current_syscall.value_or(stop.syscall_nr);
            st.in_syscall = false;
            st.current_syscall.reset();
        }
        return out;
    }

    if (stop.ptrace_event == PTRACE_EVENT_EXIT) {
        out.synthesized_creation = created;
        out.kind = StopKind::ThreadExited;
        // Hand the open syscall (if any) to the caller so its timer can be
        // closed at this notification; exit-family calls never return.
        out.syscall = st.current_syscall.value_or(-1);
        st.in_syscall = false;
        st.current_syscall.reset();
        st.alive = false;
        return out;
    }

    if (created) {
        // First sighting outside a syscall stop: the attach stop of a freshly
        // created thread (or a caller-registered root).
        out.kind = StopKind::ThreadCreated;
        return out;
    }

    out.kind = StopKind::Other;
    return out;
}

RunResult trace_process(const TraceConfig& config, RecordSink& sink) {
    validate(config);

    // errno travels back over a CLOEXEC pipe: empty on exec success.
    int epipe[2];
    if (pipe2(epipe, O_CLOEXEC) != 0)
        throw std::system_error(errno, std::generic_category(), "pipe2");

    pid_t child = fork();
    if (child < 0) {
        int err = errno;
        close(epipe[0]);
        close(epipe[1]);
        throw std::system_error(err, std::generic_category(), "fork");
    }
    if (child == 0) {
        close(epipe[0]);
        ptrace(PTRACE_TRACEME, 0, nullptr, nullptr);
        std::vector<char*> argv;
        argv.reserve(config.command.size() + 1);
        for (const std::string& arg : config.command)
            argv.push_back(const_cast<char*>(arg.c_str()));
        argv.push_back(nullptr);
        execvp(argv[0], argv.data());
        int err = errno;
        ssize_t ignored = write(epipe[1], &err, sizeof err);
        (void)ignored;
        _exit(127);
    }

    close(epipe[1]);
    int exec_errno = 0;
    ssize_t got;
    do {
        got = read(epipe[0], &exec_errno, sizeof exec_errno);
    } while (got < 0 && errno == EINTR);
    close(epipe[0]);
    if (got == static_cast<ssize_t>(sizeof exec_errno)) {
        int status = 0;
        waitpid(child, &status, 0);
        throw LaunchError("cannot launch '" + config.command[0] +
                          "': " + std::strerror(exec_errno));
    }

    // The exec trap: the target is stopped and waiting for options.
    int status = 0;
    if (waitpid(child, &status, 0) < 0 || !WIFSTOPPED(status)) {
        kill(child, SIGKILL);
        waitpid(child, &status, 0);
        throw LaunchError("target did not reach its launch stop");
    }
    long opts = PTRACE_O_TRACESYSGOOD | PTRACE_O_TRACEEXIT | PTRACE_O_TRACEEXEC |
                PTRACE_O_EXITKILL;
    if (config.follow_threads) opts |= PTRACE_O_TRACECLONE;
    if (ptrace(PTRACE_SETOPTIONS, child, nullptr, opts) != 0) {
        kill(child, SIGKILL);
        waitpid(child, &status, 0);
        throw LaunchError("cannot set trace options on the target");
    }

    RunResult result;
    StopClassifier classifier;
    // Register the root so its first loop stop is not mistaken for a fresh
    // thread's attach stop.
    classifier.classify(child, RawStop{});

    const SyscallTable& table = SyscallTable::builtin(host_arch());
    Accumulator acc([&table](long nr) { return table.name(nr); });
    std::set<pid_t> live{child};
    std::set<pid_t> seen_first_event;
    bool root_reaped = false;

    auto note_desync = [&](std::string reason) {
        if (result.desync) return;
        result.desync = true;
        result.desync_reason = std::move(reason);
        std::fprintf(stderr, "staktau: error: tracer desync: %s\n",
                     result.desync_reason.c_str());
        kill(child, SIGKILL);
    };

    auto resume = [&](pid_t tid, int sig) {
        if (ptrace(PTRACE_SYSCALL, tid, nullptr, sig) != 0 && errno != ESRCH)
            note_desync("cannot resume tid " + std::to_string(tid) + ": " +
                        std::strerror(errno));
    };

    resume(child, 0);
    while (!live.empty()) {
        int st = 0;
        pid_t tid = waitpid(-1, &st, __WALL);
        if (tid < 0) {
            if (errno == EINTR) continue;
            if (errno == ECHILD) {
                if (!root_reaped)
                    note_desync("children vanished before delivering an exit status");
                break;
            }
            note_desync(std::string("waitpid: ") + std::strerror(errno));
            break;
        }

        if (WIFEXITED(st) || WIFSIGNALED(st)) {
            live.erase(tid);
            if (tid == child) {
                root_reaped = true;
                if (WIFEXITED(st)) result.exit_code = WEXITSTATUS(st);
                else result.term_signal = WTERMSIG(st);
            }
            continue;
        }
        if (!WIFSTOPPED(st)) continue;
        live.insert(tid);

        const int sig = WSTOPSIG(st);
        const int event = static_cast<int>(static_cast<unsigned>(st) >> 16);
        RawStop raw;
        raw.signal = sig;
        raw.ptrace_event = event;
        raw.syscall_stop = (sig == kSyscallTrapSig) && event == 0;
        if (raw.syscall_stop) {
            long nr = -1;
            if (!read_syscall_nr(tid, nr)) {
                if (errno != ESRCH) {
                    note_desync("cannot read registers of tid " + std::to_string(tid) +
                                ": " + std::strerror(errno));
                    break;
                }
                continue;   // thread evaporated between stop and inspection
            }
            raw.syscall_nr = nr;
        }

        const Classification c = classifier.classify(tid, raw);
        const std::uint64_t now = clock_ns(CLOCK_MONOTONIC);
        int inject = 0;
        switch (c.kind) {
        case StopKind::SyscallEntry: {
            SyscallEvent ev{tid, c.syscall, Phase::Entry, now, std::nullopt};
            if (seen_first_event.insert(tid).second)
                ev.ts_wall = clock_ns(CLOCK_REALTIME);
            acc.ingest(ev);
            break;
        }
        case StopKind::SyscallExit:
            acc.ingest({tid, c.syscall, Phase::Exit, now, std::nullopt});
            break;
        case StopKind::ThreadExited:
            if (c.syscall >= 0)
                acc.ingest({tid, c.syscall, Phase::Exit, now, std::nullopt});
            break;
        case StopKind::ThreadCreated:
            // Auto-attach stop of a new thread; swallow its SIGSTOP.
            break;
        case StopKind::Other:
            // Genuine signal delivery must be passed on; event stops
            // (clone/exec notifications) resume signal-free.
            if (event == 0 && sig != SIGTRAP) inject = sig;
            break;
        }
        if (config.echo_events)
            std::fprintf(stderr, "staktau: tid %d %s%s%s\n", static_cast<int>(tid),
                         std::string(stop_kind_name(c.kind)).c_str(),
                         c.syscall >= 0 ? " " : "",
                         c.syscall >= 0 ? table.name(c.syscall).c_str() : "");
        if (result.desync) break;
        resume(tid, inject);
        if (result.desync) break;
    }

    if (result.desync) {
        // Reap whatever is left so no zombie outlives the session.
        int st = 0;
        pid_t tid;
        while ((tid = waitpid(-1, &st, __WALL)) > 0) {
            if (tid == child && (WIFEXITED(st) || WIFSIGNALED(st))) {
                root_reaped = true;
                if (WIFEXITED(st)) result.exit_code = WEXITSTATUS(st);
                else result.term_signal = WTERMSIG(st);
            }
        }
    }

    const std::size_t open = acc.open_timers();
    result.forced_closures = open;
    result.orphan_exits = acc.orphan_exits();
    result.mismatched_exits = acc.mismatched_exits();
    result.profiles = acc.finalize(clock_ns(CLOCK_MONOTONIC));

    // Dump: render the document and stream its rows through the bounded
    // buffer so sink back-pressure follows the drop-and-warn policy.
    FlushBuffer buffer(config.buffer_capacity);
    ProfileDocument doc = make_document(result.profiles);
    for (std::string& line : render_profile_lines(doc))
        buffer.push(std::move(line), sink);
    buffer.flush(sink);
    result.missed_records = buffer.missed();
    result.trace_bytes = buffer.emitted_bytes();
    return result;
}

RunResult trace_process(const TraceConfig& config) {
    validate(config);
    if (config.output_path.empty()) {
        // No destination: still trace, but drop the dump.
        class NullSink : public RecordSink {
        public:
            bool write(std::span<const std::string>) override { return true; }
        } null_sink;
        RunResult r = trace_process(config, null_sink);
        r.trace_bytes = 0;
        return r;
    }
    FileRecordSink file(config.output_path);
    if (!file.is_open())
        throw std::system_error(errno, std::generic_category(),
                                "cannot open output file '" + config.output_path + "'");
    try {
        RunResult r = trace_process(config, file);
        file.close();
        r.trace_bytes = file.bytes_written();
        return r;
    } catch (const LaunchError&) {
        // Nothing was traced; do not leave an empty output file behind.
        file.close();
        std::error_code ec;
        std::filesystem::remove(config.output_path, ec);
        throw;
    }
}

} // namespace staktau
