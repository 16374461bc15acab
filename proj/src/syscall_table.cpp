#include "staktau/syscall_table.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace staktau {

namespace {

struct Entry {
    long number;
    std::string_view name;
};

constexpr Entry kTableX86_64[] = {
#include "syscalls_x86_64.inc"
};

constexpr Entry kTableAarch64[] = {
#include "syscalls_aarch64.inc"
};

} // namespace

Arch host_arch() {
#if defined(__x86_64__)
    return Arch::x86_64;
#elif defined(__aarch64__)
    return Arch::aarch64;
#else
#error "unsupported architecture"
#endif
}

std::string_view arch_name(Arch arch) {
    switch (arch) {
    case Arch::x86_64: return "x86_64";
    case Arch::aarch64: return "aarch64";
    }
    return "unknown";
}

const SyscallTable& SyscallTable::builtin(Arch arch) {
    static const SyscallTable x86 = [] {
        SyscallTable t;
        for (const Entry& e : kTableX86_64) t.entries_.emplace(e.number, e.name);
        return t;
    }();
    static const SyscallTable arm = [] {
        SyscallTable t;
        for (const Entry& e : kTableAarch64) t.entries_.emplace(e.number, e.name);
        return t;
    }();
    return arch == Arch::x86_64 ? x86 : arm;
}

SyscallTable SyscallTable::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open syscall table: " + path);
    SyscallTable table;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        lineno++;
        std::istringstream fields(line);
        long number = 0;
        std::string name;
        if (!(fields >> number)) {
            // allow blank lines and comments
            std::istringstream peek(line);
            std::string first;
            if (!(peek >> first) || first.front() == '#') continue;
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": malformed syscall table line");
        }
        if (!(fields >> name))
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": missing syscall name");
        table.entries_[number] = name;
    }
    return table;
}

std::string SyscallTable::name(long number) const {
    auto it = entries_.find(number);
    if (it != entries_.end()) return it->second;
    return "sys_" + std::to_string(number);
}

} // namespace staktau
