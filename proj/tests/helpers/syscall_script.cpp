// Test target with a syscall budget fixed by construction:
//
//   syscall_script K M T [EXIT]
//
// performs exactly K zero-length writes and M zero-length nanosleeps on the
// main thread, then spawns T threads that each perform exactly one
// zero-length write, joins them, and exits with EXIT (default 0).  A negative
// EXIT makes the process raise signal -EXIT instead.  Raw syscall(2) is used
// throughout so libc cannot batch, cache, or split the calls.

#include <cstdlib>
#include <ctime>
#include <thread>
#include <vector>

#include <signal.h>
#include <sys/syscall.h>
#include <unistd.h>

namespace {

void one_write() { syscall(SYS_write, 1, "", 0); }

void one_sleep() {
    timespec ts{0, 0};
    syscall(SYS_nanosleep, &ts, nullptr);
}

} // namespace

int main(int argc, char** argv) {
    const long k = argc > 1 ? std::atol(argv[1]) : 0;
    const long m = argc > 2 ? std::atol(argv[2]) : 0;
    const long t = argc > 3 ? std::atol(argv[3]) : 0;
    const long exit_code = argc > 4 ? std::atol(argv[4]) : 0;

    for (long i = 0; i < k; i++) one_write();
    for (long i = 0; i < m; i++) one_sleep();

    std::vector<std::thread> team;
    team.reserve(static_cast<std::size_t>(t));
    for (long i = 0; i < t; i++) team.emplace_back(one_write);
    for (std::thread& th : team) th.join();

    if (exit_code < 0) {
        raise(static_cast<int>(-exit_code));
        return 99;   // unreachable for fatal signals
    }
    return static_cast<int>(exit_code);
}
