#include "staktau/trace_format.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <optional>

namespace staktau {

namespace {

constexpr std::size_t kCallColumn = 33;   // width of the dash rule line
constexpr std::size_t kNameWidth = 24;

std::string pad_name(std::string_view name) {
    std::string out(name);
    if (out.size() < kNameWidth) out.append(kNameWidth - out.size(), ' ');
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

bool all_dashes(std::string_view s) {
    return !s.empty() && s.find_first_not_of('-') == std::string_view::npos;
}

// "----- TID <n> -----" with optional surrounding whitespace
std::optional<pid_t> match_tid_header(std::string_view line) {
    std::string_view s = trim(line);
    std::size_t dash = s.find_first_not_of('-');
    if (dash == 0 || dash == std::string_view::npos) return std::nullopt;
    s.remove_prefix(dash);
    s = trim(s);
    if (!s.starts_with("TID")) return std::nullopt;
    s.remove_prefix(3);
    s = trim(s);
    std::size_t end = s.find_first_not_of("0123456789");
    if (end == 0 || end == std::string_view::npos) return std::nullopt;
    std::string_view digits = s.substr(0, end);
    if (!all_dashes(trim(s.substr(end)))) return std::nullopt;
    pid_t tid = 0;
    auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), tid);
    if (ec != std::errc{}) return std::nullopt;
    return tid;
}

std::optional<std::uint64_t> parse_u64(std::string_view s) {
    if (s.empty()) return std::nullopt;
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
    return v;
}

} // namespace

ProfileDocument make_document(std::vector<ThreadProfile> profiles) {
    std::sort(profiles.begin(), profiles.end(),
              [](const ThreadProfile& a, const ThreadProfile& b) { return a.tid < b.tid; });
    for (std::size_t i = 1; i < profiles.size(); i++)
        if (profiles[i].tid == profiles[i - 1].tid)
            throw std::invalid_argument("duplicate tid " + std::to_string(profiles[i].tid) +
                                        " in profile document");
    return ProfileDocument{std::move(profiles)};
}

std::vector<std::string> render_profile_lines(const ProfileDocument& doc, bool with_counts) {
    std::vector<std::string> lines;
    for (const ThreadProfile& t : doc.threads) {
        lines.push_back("----- TID " + std::to_string(t.tid) + " -----");
        lines.push_back(pad_name("call") + (with_counts ? "| time | count" : "| time"));
        lines.push_back(std::string(kCallColumn, '-'));
        lines.push_back(pad_name(kApplicationRow) + "| " + std::to_string(t.start_wall_ns));
        for (const auto& [name, stats] : t.per_syscall) {
            std::string row = pad_name(name) + "| " + std::to_string(stats.total_ns);
            if (with_counts) row += " | " + std::to_string(stats.count);
            lines.push_back(std::move(row));
        }
    }
    return lines;
}

std::string write_profile(const ProfileDocument& doc, bool with_counts) {
    std::string out;
    for (const std::string& line : render_profile_lines(doc, with_counts)) {
        out += line;
        out += '\n';
    }
    return out;
}

ParseError::ParseError(std::size_t line, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}

ProfileDocument parse_profile(std::string_view text) {
    // split keeping 1-based line numbers
    std::vector<std::pair<std::size_t, std::string_view>> lines;
    {
        std::size_t lineno = 1, pos = 0;
        while (pos < text.size()) {
            std::size_t nl = text.find('\n', pos);
            std::size_t end = nl == std::string_view::npos ? text.size() : nl;
            lines.emplace_back(lineno, text.substr(pos, end - pos));
            pos = end + 1;
            lineno++;
        }
    }

    std::vector<ThreadProfile> threads;
    std::size_t i = 0;
    auto skip_blank = [&] {
        while (i < lines.size() && trim(lines[i].second).empty()) i++;
    };

    skip_blank();
    while (i < lines.size()) {
        auto [lineno, line] = lines[i];
        std::optional<pid_t> tid = match_tid_header(line);
        if (!tid) throw ParseError(lineno, "expected a '----- TID <n> -----' header");
        i++;

        skip_blank();
        if (i >= lines.size())
            throw ParseError(lineno, "section for TID " + std::to_string(*tid) +
                                         " ends before the column header");
        {
            auto [n, l] = lines[i];
            std::string_view s = trim(l);
            std::size_t bar = s.find('|');
            if (bar == std::string_view::npos || trim(s.substr(0, bar)) != "call" ||
                trim(s.substr(bar + 1)) != "time")
                throw ParseError(n, "expected the 'call | time' column header");
            i++;
        }

        skip_blank();
        if (i >= lines.size() || !all_dashes(trim(lines[i].second)))
            throw ParseError(i < lines.size() ? lines[i].first : lines.back().first,
                             "missing rule line after the column header");
        i++;

        ThreadProfile t;
        t.tid = *tid;
        bool saw_app_row = false;
        while (i < lines.size()) {
            auto [n, l] = lines[i];
            std::string_view s = trim(l);
            if (s.empty()) {
                i++;
                continue;
            }
            if (match_tid_header(s)) break;   // next section
            std::size_t bar = s.find('|');
            if (bar == std::string_view::npos)
                throw ParseError(n, "expected 'call | time' row");
            std::string_view name = trim(s.substr(0, bar));
            std::string_view value = trim(s.substr(bar + 1));
            if (name.empty()) throw ParseError(n, "empty call name");
            std::optional<std::uint64_t> v = parse_u64(value);
            if (!v)
                throw ParseError(n, "time for '" + std::string(name) +
                                        "' is not an unsigned decimal number");
            if (name == kApplicationRow) {
                if (saw_app_row)
                    throw ParseError(n, "duplicate application row in TID section");
                saw_app_row = true;
                t.start_wall_ns = *v;
            } else {
                if (t.find(name))
                    throw ParseError(n, "duplicate row '" + std::string(name) +
                                            "' in TID section");
                t.per_syscall.emplace_back(std::string(name), SyscallStats{*v, 0});
            }
            i++;
        }
        for (const ThreadProfile& seen : threads)
            if (seen.tid == t.tid)
                throw ParseError(lineno, "duplicate TID " + std::to_string(t.tid));
        threads.push_back(std::move(t));
        skip_blank();
    }

    std::sort(threads.begin(), threads.end(),
              [](const ThreadProfile& a, const ThreadProfile& b) { return a.tid < b.tid; });
    return ProfileDocument{std::move(threads)};
}

bool semantically_equal(const ProfileDocument& a, const ProfileDocument& b) {
    if (a.threads.size() != b.threads.size()) return false;
    for (std::size_t i = 0; i < a.threads.size(); i++) {
        const ThreadProfile& x = a.threads[i];
        const ThreadProfile& y = b.threads[i];
        if (x.tid != y.tid || x.start_wall_ns != y.start_wall_ns) return false;
        if (x.per_syscall.size() != y.per_syscall.size()) return false;
        for (std::size_t j = 0; j < x.per_syscall.size(); j++) {
            if (x.per_syscall[j].first != y.per_syscall[j].first) return false;
            if (x.per_syscall[j].second.total_ns != y.per_syscall[j].second.total_ns)
                return false;
        }
    }
    return true;
}

} // namespace staktau
