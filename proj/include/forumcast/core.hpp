#pragma once

// Shared vocabulary types: calendar months, UTC instants, monthly series,
// missing-value conventions and small parsing/formatting helpers used by
// every other module.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace forumcast {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

// Invalid user-supplied inputs (files, flags, configs). The CLI maps this to
// exit code 2.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A computation that cannot proceed (singular systems, infeasible windows)
// even though inputs were well-formed. The CLI maps this to exit code 3.
class ComputationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Missing values
// ---------------------------------------------------------------------------

inline constexpr double missing_value() {
  return std::numeric_limits<double>::quiet_NaN();
}

inline bool is_missing(double x) { return std::isnan(x); }

// ---------------------------------------------------------------------------
// Calendar months
// ---------------------------------------------------------------------------

struct YearMonth {
  int year = 0;
  int month = 1;  // 1..12

  constexpr int index() const { return year * 12 + (month - 1); }

  static constexpr YearMonth from_index(int idx) {
    int y = idx / 12;
    int m = idx % 12;
    if (m < 0) {
      m += 12;
      --y;
    }
    return YearMonth{y, m + 1};
  }

  YearMonth plus(int months) const { return from_index(index() + months); }

  friend constexpr bool operator==(const YearMonth& a, const YearMonth& b) {
    return a.index() == b.index();
  }
  friend constexpr auto operator<=>(const YearMonth& a, const YearMonth& b) {
    return a.index() <=> b.index();
  }

  // "YYYY-MM"
  static std::optional<YearMonth> parse(std::string_view s) {
    if (s.size() != 7 || s[4] != '-') return std::nullopt;
    int y = 0, m = 0;
    auto [p1, e1] = std::from_chars(s.data(), s.data() + 4, y);
    auto [p2, e2] = std::from_chars(s.data() + 5, s.data() + 7, m);
    if (e1 != std::errc{} || e2 != std::errc{}) return std::nullopt;
    if (p1 != s.data() + 4 || p2 != s.data() + 7) return std::nullopt;
    if (m < 1 || m > 12) return std::nullopt;
    return YearMonth{y, m};
  }

  std::string str() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d", year, month);
    return std::string(buf);
  }
};

inline bool is_leap_year(int y) {
  return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

inline int days_in_month(YearMonth ym) {
  static constexpr std::array<int, 12> kDays = {31, 28, 31, 30, 31, 30,
                                                31, 31, 30, 31, 30, 31};
  int d = kDays[static_cast<std::size_t>(ym.month - 1)];
  if (ym.month == 2 && is_leap_year(ym.year)) d = 29;
  return d;
}

// ---------------------------------------------------------------------------
// UTC instants (seconds since the Unix epoch)
// ---------------------------------------------------------------------------

namespace detail {

// Days from civil date, epoch 1970-01-01 (Howard Hinnant's algorithm).
constexpr std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);            // [0,399]
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;  // [0,365]
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;           // [0,146096]
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

struct CivilDate {
  std::int64_t year;
  unsigned month;
  unsigned day;
};

constexpr CivilDate civil_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);          // [0,146096]
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);          // [0,365]
  const unsigned mp = (5 * doy + 2) / 153;                               // [0,11]
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;                       // [1,31]
  const unsigned m = mp + (mp < 10 ? 3 : -9);                            // [1,12]
  return CivilDate{y + (m <= 2), m, d};
}

}  // namespace detail

// Parses "YYYY-MM-DDTHH:MM:SS" with an optional trailing "Z". Returns seconds
// since the Unix epoch, or nullopt on malformed input.
inline std::optional<std::int64_t> parse_instant(std::string_view s) {
  if (!s.empty() && s.back() == 'Z') s.remove_suffix(1);
  if (s.size() != 19 || s[4] != '-' || s[7] != '-' || s[10] != 'T' ||
      s[13] != ':' || s[16] != ':') {
    return std::nullopt;
  }
  auto num = [&](std::size_t pos, std::size_t len, int& out) {
    auto first = s.data() + pos;
    auto [p, e] = std::from_chars(first, first + len, out);
    return e == std::errc{} && p == first + len;
  };
  int y, mo, d, h, mi, sec;
  if (!num(0, 4, y) || !num(5, 2, mo) || !num(8, 2, d) || !num(11, 2, h) ||
      !num(14, 2, mi) || !num(17, 2, sec)) {
    return std::nullopt;
  }
  if (mo < 1 || mo > 12 || d < 1 || h > 23 || mi > 59 || sec > 59) {
    return std::nullopt;
  }
  if (d > days_in_month(YearMonth{y, mo})) return std::nullopt;
  return detail::days_from_civil(y, static_cast<unsigned>(mo),
                                 static_cast<unsigned>(d)) *
             86400 +
         h * 3600 + mi * 60 + sec;
}

inline std::string format_instant(std::int64_t t) {
  std::int64_t days = t / 86400;
  std::int64_t rem = t % 86400;
  if (rem < 0) {
    rem += 86400;
    --days;
  }
  const auto cd = detail::civil_from_days(days);
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02uT%02lld:%02lld:%02lldZ",
                static_cast<long long>(cd.year), cd.month, cd.day,
                static_cast<long long>(rem / 3600),
                static_cast<long long>((rem / 60) % 60),
                static_cast<long long>(rem % 60));
  return std::string(buf);
}

inline YearMonth month_of_instant(std::int64_t t) {
  std::int64_t days = t / 86400;
  if (t % 86400 < 0) --days;
  const auto cd = detail::civil_from_days(days);
  return YearMonth{static_cast<int>(cd.year), static_cast<int>(cd.month)};
}

// First second of the month, as an instant.
inline std::int64_t month_begin_instant(YearMonth ym) {
  return detail::days_from_civil(ym.year, static_cast<unsigned>(ym.month), 1) *
         86400;
}

// Half-open time window [begin, end).
struct TimeWindow {
  std::int64_t begin = 0;
  std::int64_t end = 0;
  bool contains(std::int64_t t) const { return t >= begin && t < end; }
  static TimeWindow for_month(YearMonth ym) {
    return TimeWindow{month_begin_instant(ym), month_begin_instant(ym.plus(1))};
  }
};

// ---------------------------------------------------------------------------
// Monthly series
// ---------------------------------------------------------------------------

struct MonthlySeries {
  std::string name;
  YearMonth start{};
  std::vector<double> values;  // NaN marks missing observations

  std::size_t size() const { return values.size(); }

  // Value at a given month; missing when outside the stored range.
  double at(YearMonth ym) const {
    const int off = ym.index() - start.index();
    if (off < 0 || off >= static_cast<int>(values.size())) {
      return missing_value();
    }
    return values[static_cast<std::size_t>(off)];
  }

  YearMonth month_at(std::size_t i) const {
    return start.plus(static_cast<int>(i));
  }
};

// ---------------------------------------------------------------------------
// Small string / number helpers
// ---------------------------------------------------------------------------

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = s.find(sep, pos);
    if (next == std::string_view::npos) {
      out.emplace_back(s.substr(pos));
      break;
    }
    out.emplace_back(s.substr(pos, next - pos));
    pos = next + 1;
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' ||
                        s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  // std::from_chars for double is available in libstdc++ 11.
  double v = 0;
  auto [p, e] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (e != std::errc{} || p != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::optional<long long> parse_int(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  long long v = 0;
  auto [p, e] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (e != std::errc{} || p != s.data() + s.size()) return std::nullopt;
  return v;
}

// Full-precision round-trippable formatting for doubles in output files.
inline std::string format_double(double v) {
  if (is_missing(v)) return "";
  char buf[40];
  // Integral values print as plain integers; %g would render round tens and
  // hundreds in exponent notation ("2e+01") once the precision drops to one.
  if (v == std::floor(v) && std::abs(v) < 1e15) {
    std::snprintf(buf, sizeof(buf), "%.0f", v);
    return std::string(buf);
  }
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  // Trim to the shortest representation that round-trips.
  for (int prec = 1; prec <= 17; ++prec) {
    char cand[40];
    std::snprintf(cand, sizeof(cand), "%.*g", prec, v);
    double back = 0;
    std::sscanf(cand, "%lf", &back);
    if (back == v) return std::string(cand);
  }
  return std::string(buf);
}

// ---------------------------------------------------------------------------
// File helpers
// ---------------------------------------------------------------------------

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ValidationError("cannot open file: " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::filesystem::path& path,
                            std::string_view content) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ValidationError("cannot write file: " + path.string());
  }
  out << content;
  if (!out) {
    throw ComputationError("failed writing file: " + path.string());
  }
}

// Splits file content into lines; tolerates missing trailing newline and
// CRLF endings.
inline std::vector<std::string> split_lines(std::string_view content) {
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos < content.size()) {
    std::size_t next = content.find('\n', pos);
    if (next == std::string_view::npos) next = content.size();
    std::string_view line = content.substr(pos, next - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.emplace_back(line);
    pos = next + 1;
  }
  return lines;
}

// FNV-1a 64-bit digest, used for input fingerprints in run manifests.
inline std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string fnv1a64_hex(std::string_view data) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(data)));
  return std::string(buf);
}

// Per-record input problem, reported with its 1-based line number.
struct RecordError {
  std::size_t line = 0;
  std::string message;
};

// Result of loading a file: parsed value plus per-record and corpus-level
// problems. Loaders accept what they can and report the rest.
template <class T>
struct LoadResult {
  T value{};
  std::vector<RecordError> record_errors;
  std::vector<std::string> corpus_errors;

  bool ok() const { return record_errors.empty() && corpus_errors.empty(); }

  std::string error_summary() const {
    std::ostringstream ss;
    for (const auto& e : record_errors) {
      ss << "line " << e.line << ": " << e.message << "\n";
    }
    for (const auto& e : corpus_errors) {
      ss << e << "\n";
    }
    return ss.str();
  }
};

}  // namespace forumcast
