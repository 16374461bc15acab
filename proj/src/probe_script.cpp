#include "staktau/tracer.hpp"

#include <string>

namespace staktau {

// The in-kernel collector equivalent of trace_process, in the SystemTap
// dialect.  Kept as a single template so the emitted text is trivially
// deterministic; the only substitution point is the buffer capacity.
std::string emit_probe_script(const TraceConfig& config) {
    const std::string cap = std::to_string(config.buffer_capacity);
    std::string s;
    s += "// STaKTAU kernel-side syscall collector.\n";
    s += "//\n";
    s += "// Usage:\n";
    s += "//   stap staktau.stp -c '<command>'  > profile.txt\n";
    s += "//   stap staktau.stp -x <pid>        > profile.txt\n";
    s += "//\n";
    s += "// Entering a syscall starts a per-thread timer; returning from it stops\n";
    s += "// the timer and accumulates the delta per (thread, syscall).  Event\n";
    s += "// records are staged in a " + cap + "-slot buffer that is printed when\n";
    s += "// full and at the end of the session, followed by the per-TID tables.\n";
    s += "\n";
    s += "global start_wall    // tid -> wall-clock ns at the thread's first syscall\n";
    s += "global entry_ts      // tid -> monotonic ns of the currently open entry\n";
    s += "global entry_call    // tid -> name of the currently open syscall\n";
    s += "global total_ns      // tid, call -> accumulated ns\n";
    s += "global first_seen    // tid, call -> discovery index, fixes row order\n";
    s += "global seen_counter\n";
    s += "global buf           // staged event records\n";
    s += "global buf_used\n";
    s += "global buf_capacity = " + cap + "\n";
    s += "\n";
    s += "function flush_buffer() {\n";
    s += "    for (i = 0; i < buf_used; i++)\n";
    s += "        printf(\"%s\\n\", buf[i])\n";
    s += "    delete buf\n";
    s += "    buf_used = 0\n";
    s += "}\n";
    s += "\n";
    s += "probe syscall_any {\n";
    s += "    if (target_set_pid(pid())) {\n";
    s += "        t = tid()\n";
    s += "        if (!(t in start_wall))\n";
    s += "            start_wall[t] = gettimeofday_ns()\n";
    s += "        entry_ts[t] = local_clock_ns()\n";
    s += "        entry_call[t] = name\n";
    s += "    }\n";
    s += "}\n";
    s += "\n";
    s += "probe syscall_any.return {\n";
    s += "    t = tid()\n";
    s += "    if (t in entry_ts) {\n";
    s += "        delta = local_clock_ns() - entry_ts[t]\n";
    s += "        call = entry_call[t]\n";
    s += "        if (!([t, call] in total_ns))\n";
    s += "            first_seen[t, call] = seen_counter++\n";
    s += "        total_ns[t, call] += delta\n";
    s += "        buf[buf_used++] = sprintf(\"# event %d %s %d\", t, call, delta)\n";
    s += "        if (buf_used >= buf_capacity)\n";
    s += "            flush_buffer()\n";
    s += "        delete entry_ts[t]\n";
    s += "        delete entry_call[t]\n";
    s += "    }\n";
    s += "}\n";
    s += "\n";
    s += "probe end {\n";
    s += "    flush_buffer()\n";
    s += "    foreach (t+ in start_wall) {\n";
    s += "        printf(\"----- TID %d -----\\n\", t)\n";
    s += "        printf(\"%-24s| time\\n\", \"call\")\n";
    s += "        printf(\"---------------------------------\\n\")\n";
    s += "        printf(\"%-24s| %d\\n\", \"STaKTAU application\", start_wall[t])\n";
    s += "        foreach ([t2, call] in first_seen+) {\n";
    s += "            if (t2 == t)\n";
    s += "                printf(\"%-24s| %d\\n\", call, total_ns[t2, call])\n";
    s += "        }\n";
    s += "    }\n";
    s += "}\n";
    return s;
}

} // namespace staktau
