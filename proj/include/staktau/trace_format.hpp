#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "staktau/profile.hpp"

namespace staktau {

// The row that carries the thread's wall-clock start timestamp.
inline constexpr std::string_view kApplicationRow = "STaKTAU application";

// Per-TID profile sections, ascending tid, unique tids.
struct ProfileDocument {
    std::vector<ThreadProfile> threads;
};

// Builds a document from profiles in any order; sorts by tid.
// Throws std::invalid_argument on duplicate tids.
ProfileDocument make_document(std::vector<ThreadProfile> profiles);

// Canonical text rendering, one string per row:
//
//   ----- TID 40739 -----
//   call                    | time
//   ---------------------------------
//   STaKTAU application     | 1680935665984544508
//   set_robust_list         | 4760
//
// Call names occupy a 24-character column; times are plain decimal
// nanoseconds. with_counts appends a third column (not part of the
// interchange dialect).
std::vector<std::string> render_profile_lines(const ProfileDocument& doc,
                                              bool with_counts = false);

// render_profile_lines joined with a newline after every row. Empty document
// renders as empty text.
std::string write_profile(const ProfileDocument& doc, bool with_counts = false);

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& message);
    std::size_t line() const { return line_; }   // 1-based

private:
    std::size_t line_;
};

// Parses the write_profile dialect. Tolerates variable inter-column
// whitespace and blank lines. The application row populates start_wall_ns;
// other rows populate per_syscall in order with unknown (zero) counts.
ProfileDocument parse_profile(std::string_view text);

// Format-level equality: tid, start_wall_ns and the (name, total_ns) row
// sequence. Counts and monotonic bounds are not part of the text format.
bool semantically_equal(const ProfileDocument& a, const ProfileDocument& b);

} // namespace staktau
