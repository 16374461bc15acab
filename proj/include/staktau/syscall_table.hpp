#pragma once

#include <map>
#include <string>
#include <string_view>

namespace staktau {

enum class Arch {
    x86_64,
    aarch64,
};

// Architecture the profiler itself was compiled for.
Arch host_arch();

std::string_view arch_name(Arch arch);

// Maps syscall numbers to names.  Numbers without an entry render as
// "sys_<number>" so unknown or brand-new syscalls still produce usable rows.
class SyscallTable {
public:
    // Table for `arch` compiled into the binary.
    static const SyscallTable& builtin(Arch arch);

    // Loads a table from a text file of "<number> <name>" lines.  Blank lines
    // and lines starting with '#' are ignored.  Throws std::runtime_error on
    // unreadable files or malformed lines.
    static SyscallTable load_file(const std::string& path);

    std::string name(long number) const;

    // True if `number` has an explicit entry.
    bool known(long number) const { return entries_.count(number) != 0; }

    std::size_t size() const { return entries_.size(); }

private:
    std::map<long, std::string> entries_;
};

} // namespace staktau
