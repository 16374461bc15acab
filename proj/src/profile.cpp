#include "staktau/profile.hpp"

#include <algorithm>
#include <stdexcept>

namespace staktau {

SyscallStats* ThreadProfile::find(std::string_view name) {
    for (auto& [n, s] : per_syscall)
        if (n == name) return &s;
    return nullptr;
}

const SyscallStats* ThreadProfile::find(std::string_view name) const {
    for (const auto& [n, s] : per_syscall)
        if (n == name) return &s;
    return nullptr;
}

SyscallStats& ThreadProfile::row(std::string_view name) {
    if (SyscallStats* s = find(name)) return *s;
    per_syscall.emplace_back(std::string(name), SyscallStats{});
    return per_syscall.back().second;
}

std::uint64_t ThreadProfile::total_syscall_ns() const {
    std::uint64_t sum = 0;
    for (const auto& [n, s] : per_syscall) sum += s.total_ns;
    return sum;
}

std::string fallback_syscall_name(long number) {
    return "sys_" + std::to_string(number);
}

Accumulator::Accumulator(SyscallNamer namer) : namer_(std::move(namer)) {
    if (!namer_) throw std::invalid_argument("Accumulator: null syscall namer");
}

SyscallStats& Accumulator::PerThread::row(long syscall) {
    for (auto& [nr, s] : rows)
        if (nr == syscall) return s;
    rows.emplace_back(syscall, SyscallStats{});
    return rows.back().second;
}

void Accumulator::PerThread::close_timer(std::uint64_t exit_ts, bool observed_exit) {
    SyscallStats& s = row(timer->syscall);
    // monotonic input makes exit_ts >= entry_ts; clamp in case a forced
    // closure races a clock read
    s.total_ns += exit_ts >= timer->entry_ts ? exit_ts - timer->entry_ts : 0;
    s.count += 1;
    if (observed_exit) last_exit_mono = exit_ts;
    timer.reset();
}

void Accumulator::ingest(const SyscallEvent& ev) {
    if (ev.phase == Phase::Exit) {
        auto it = threads_.find(ev.tid);
        if (it == threads_.end() || !it->second.timer) {
            // attach happened mid-syscall: no entry timestamp exists
            orphan_exits_++;
            return;
        }
        PerThread& t = it->second;
        if (t.timer->syscall != ev.syscall) mismatched_exits_++;
        t.close_timer(ev.ts_mono, /*observed_exit=*/true);
        return;
    }

    PerThread& t = threads_[ev.tid];
    if (ev.ts_wall && t.start_wall_ns == 0) t.start_wall_ns = *ev.ts_wall;
    if (!t.first_entry_mono) t.first_entry_mono = ev.ts_mono;
    if (t.timer) {
        // entry over an open timer: tracer desync; close the old one without
        // extending the observed window
        mismatched_exits_++;
        t.close_timer(ev.ts_mono, /*observed_exit=*/false);
    }
    t.timer = ActiveTimer{ev.syscall, ev.ts_mono};
}

std::vector<ThreadProfile> Accumulator::finalize(std::uint64_t session_end_mono) {
    std::vector<ThreadProfile> out;
    out.reserve(threads_.size());
    for (auto& [tid, t] : threads_) {
        if (t.timer) {
            t.close_timer(session_end_mono, /*observed_exit=*/false);
            t.forced_close = true;
        }
        ThreadProfile p;
        p.tid = tid;
        p.start_wall_ns = t.start_wall_ns;
        p.first_entry_mono = t.first_entry_mono;
        p.last_exit_mono = t.last_exit_mono;
        p.forced_close = t.forced_close;
        for (const auto& [nr, stats] : t.rows) {
            // distinct numbers normally map to distinct names; merge if a
            // custom namer collides
            SyscallStats& row = p.row(namer_(nr));
            row.total_ns += stats.total_ns;
            row.count += stats.count;
        }
        out.push_back(std::move(p));
    }
    threads_.clear();
    return out;  // std::map iteration is already tid-ascending
}

std::size_t Accumulator::open_timers() const {
    std::size_t n = 0;
    for (const auto& [tid, t] : threads_)
        if (t.timer) n++;
    return n;
}

} // namespace staktau
