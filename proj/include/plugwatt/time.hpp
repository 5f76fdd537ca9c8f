#pragma once

#include <cctype>
#include <chrono>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "plugwatt/error.hpp"

namespace plugwatt {

using Seconds = std::chrono::seconds;
using Instant = std::chrono::sys_seconds;
using Date = std::chrono::sys_days;

inline constexpr std::int64_t kSecondsPerDay = 86400;
inline constexpr std::int64_t kSecondsPerHour = 3600;

inline std::int64_t to_unix(Instant t) { return t.time_since_epoch().count(); }
inline Instant from_unix(std::int64_t s) { return Instant{Seconds{s}}; }

/// Monday = 0 ... Sunday = 6.
inline int weekday_index(Date d) {
  return static_cast<int>(std::chrono::weekday{d}.iso_encoding()) - 1;
}

inline std::string_view weekday_name(int idx) {
  static constexpr std::string_view names[] = {"Mon", "Tue", "Wed", "Thu",
                                               "Fri", "Sat", "Sun"};
  return names[idx % 7];
}

inline bool is_workday(Date d) { return weekday_index(d) < 5; }

namespace detail {

inline int parse_digits(std::string_view s, std::size_t pos, std::size_t n,
                        bool& ok) {
  if (pos + n > s.size()) {
    ok = false;
    return 0;
  }
  int v = 0;
  for (std::size_t i = 0; i < n; ++i) {
    char c = s[pos + i];
    if (c < '0' || c > '9') {
      ok = false;
      return 0;
    }
    v = v * 10 + (c - '0');
  }
  return v;
}

inline void put2(std::string& out, int v) {
  out.push_back(static_cast<char>('0' + v / 10));
  out.push_back(static_cast<char>('0' + v % 10));
}

}  // namespace detail

/// Parses YYYY-MM-DD.
inline std::optional<Date> parse_date(std::string_view s) {
  bool ok = true;
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  int y = detail::parse_digits(s, 0, 4, ok);
  int m = detail::parse_digits(s, 5, 2, ok);
  int d = detail::parse_digits(s, 8, 2, ok);
  if (!ok) return std::nullopt;
  std::chrono::year_month_day ymd{std::chrono::year{y},
                                  std::chrono::month{static_cast<unsigned>(m)},
                                  std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  return Date{ymd};
}

inline Date require_date(std::string_view s) {
  auto d = parse_date(s);
  if (!d) throw Error("invalid date '" + std::string(s) + "'");
  return *d;
}

/// Parses ISO 8601 instants: YYYY-MM-DDTHH:MM:SS with optional fractional
/// seconds (truncated) and a Z or +HH:MM / -HH:MM suffix. A space is accepted
/// in place of 'T'. A missing suffix means UTC.
inline std::optional<Instant> parse_instant(std::string_view s) {
  if (s.size() < 19) return std::nullopt;
  auto date = parse_date(s.substr(0, 10));
  if (!date || (s[10] != 'T' && s[10] != ' ') || s[13] != ':' || s[16] != ':')
    return std::nullopt;
  bool ok = true;
  int hh = detail::parse_digits(s, 11, 2, ok);
  int mm = detail::parse_digits(s, 14, 2, ok);
  int ss = detail::parse_digits(s, 17, 2, ok);
  if (!ok || hh > 23 || mm > 59 || ss > 60) return std::nullopt;
  std::size_t pos = 19;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
  }
  std::int64_t offset = 0;
  if (pos < s.size()) {
    char c = s[pos];
    if (c == 'Z' || c == 'z') {
      ++pos;
    } else if (c == '+' || c == '-') {
      int oh = detail::parse_digits(s, pos + 1, 2, ok);
      std::size_t mpos = pos + 3;
      if (mpos < s.size() && s[mpos] == ':') ++mpos;
      int om = detail::parse_digits(s, mpos, 2, ok);
      if (!ok) return std::nullopt;
      offset = (c == '+' ? 1 : -1) * (oh * 3600 + om * 60);
      pos = mpos + 2;
    } else {
      return std::nullopt;
    }
  }
  if (pos != s.size()) return std::nullopt;
  Instant t = Instant{*date} + Seconds{hh * 3600 + mm * 60 + ss};
  return t - Seconds{offset};
}

inline Instant require_instant(std::string_view s) {
  auto t = parse_instant(s);
  if (!t) throw Error("invalid timestamp '" + std::string(s) + "'");
  return *t;
}

inline std::string format_date(Date d) {
  std::chrono::year_month_day ymd{d};
  std::string out = std::to_string(static_cast<int>(ymd.year()));
  out.push_back('-');
  detail::put2(out, static_cast<int>(static_cast<unsigned>(ymd.month())));
  out.push_back('-');
  detail::put2(out, static_cast<int>(static_cast<unsigned>(ymd.day())));
  return out;
}

/// YYYY-MM-DDTHH:MM:SSZ
inline std::string format_instant(Instant t) {
  auto day = std::chrono::floor<std::chrono::days>(t);
  std::int64_t sod = (t - day).count();
  std::string out = format_date(Date{day});
  out.push_back('T');
  detail::put2(out, static_cast<int>(sod / 3600));
  out.push_back(':');
  detail::put2(out, static_cast<int>(sod / 60 % 60));
  out.push_back(':');
  detail::put2(out, static_cast<int>(sod % 60));
  out.push_back('Z');
  return out;
}

// Site-local calendar built on a POSIX TZ rule ("PST8PDT,M3.2.0,M11.1.0").
// Only the Mm.w.d transition form is supported, which covers every zone
// the experiments are likely to run in.
class SiteClock {
 public:
  SiteClock() = default;

  static SiteClock utc() { return SiteClock{}; }

  static SiteClock from_name(std::string_view name) {
    struct Alias {
      std::string_view iana;
      std::string_view posix;
    };
    static constexpr Alias aliases[] = {
        {"America/Los_Angeles", "PST8PDT,M3.2.0,M11.1.0"},
        {"America/Denver", "MST7MDT,M3.2.0,M11.1.0"},
        {"America/Phoenix", "MST7"},
        {"America/Chicago", "CST6CDT,M3.2.0,M11.1.0"},
        {"America/New_York", "EST5EDT,M3.2.0,M11.1.0"},
        {"Europe/London", "GMT0BST,M3.5.0/1,M10.5.0"},
        {"Europe/Berlin", "CET-1CEST,M3.5.0,M10.5.0/3"},
        {"UTC", "UTC0"},
        {"Etc/UTC", "UTC0"},
    };
    for (const auto& a : aliases)
      if (a.iana == name) return parse_posix(a.posix, name);
    return parse_posix(name, name);
  }

  const std::string& name() const { return name_; }

  Seconds offset_at(Instant t) const {
    if (!has_dst_) return std_offset_;
    auto local_std = t + std_offset_;
    int year = static_cast<int>(
        std::chrono::year_month_day{std::chrono::floor<std::chrono::days>(local_std)}
            .year());
    Instant start_utc = transition(year, dst_start_) - std_offset_;
    Instant end_utc = transition(year, dst_end_) - dst_offset_;
    bool in_dst = start_utc < end_utc ? (t >= start_utc && t < end_utc)
                                      : (t >= start_utc || t < end_utc);
    return in_dst ? dst_offset_ : std_offset_;
  }

  Date local_date(Instant t) const {
    return std::chrono::floor<std::chrono::days>(t + offset_at(t));
  }

  /// Seconds elapsed since local midnight.
  std::int64_t seconds_of_day(Instant t) const {
    return (t - local_midnight(local_date(t))).count();
  }

  /// UTC instant of local 00:00 on `d`.
  Instant local_midnight(Date d) const {
    Instant local{d};
    Instant guess = local - std_offset_;
    if (offset_at(guess) == std_offset_) return guess;
    return local - dst_offset_;
  }

  /// UTC instant `offset_s` seconds after local midnight of `d`.
  Instant at(Date d, std::int64_t offset_s) const {
    return local_midnight(d) + Seconds{offset_s};
  }

  std::int64_t day_length(Date d) const {
    return (local_midnight(d + std::chrono::days{1}) - local_midnight(d)).count();
  }

 private:
  struct Rule {
    unsigned month = 0, week = 0, weekday = 0;
    std::int64_t time_s = 7200;
  };

  static SiteClock parse_posix(std::string_view spec, std::string_view name) {
    SiteClock c;
    c.name_ = std::string(name);
    std::size_t pos = 0;
    auto fail = [&]() -> SiteClock {
      throw Error("unsupported timezone '" + std::string(name) + "'");
    };
    auto read_name = [&]() {
      std::size_t start = pos;
      if (pos < spec.size() && spec[pos] == '<') {
        while (pos < spec.size() && spec[pos] != '>') ++pos;
        ++pos;
      } else {
        while (pos < spec.size() && std::isalpha(static_cast<unsigned char>(spec[pos]))) ++pos;
      }
      return pos - start >= 3;
    };
    auto read_offset = [&](std::int64_t& out) {
      int sign = 1;
      if (pos < spec.size() && (spec[pos] == '+' || spec[pos] == '-')) {
        sign = spec[pos] == '-' ? -1 : 1;
        ++pos;
      }
      std::int64_t parts[3] = {0, 0, 0};
      int idx = 0;
      std::size_t start = pos;
      while (pos < spec.size() && idx < 3) {
        if (std::isdigit(static_cast<unsigned char>(spec[pos]))) {
          parts[idx] = parts[idx] * 10 + (spec[pos] - '0');
          ++pos;
        } else if (spec[pos] == ':') {
          ++idx;
          ++pos;
        } else {
          break;
        }
      }
      if (pos == start) return false;
      out = sign * (parts[0] * 3600 + parts[1] * 60 + parts[2]);
      return true;
    };
    auto read_rule = [&](Rule& r) {
      if (pos >= spec.size() || spec[pos] != ',') return false;
      ++pos;
      if (pos >= spec.size() || spec[pos] != 'M') return false;
      ++pos;
      unsigned vals[3] = {0, 0, 0};
      for (int i = 0; i < 3; ++i) {
        std::size_t start = pos;
        while (pos < spec.size() && std::isdigit(static_cast<unsigned char>(spec[pos])))
          vals[i] = vals[i] * 10 + static_cast<unsigned>(spec[pos++] - '0');
        if (pos == start) return false;
        if (i < 2) {
          if (pos >= spec.size() || spec[pos] != '.') return false;
          ++pos;
        }
      }
      r.month = vals[0];
      r.week = vals[1];
      r.weekday = vals[2];
      if (pos < spec.size() && spec[pos] == '/') {
        ++pos;
        std::int64_t t = 0;
        if (!read_offset(t)) return false;
        r.time_s = t;
      }
      return r.month >= 1 && r.month <= 12 && r.week >= 1 && r.week <= 5 &&
             r.weekday <= 6;
    };

    if (!read_name()) return fail();
    std::int64_t west = 0;
    if (!read_offset(west)) return fail();
    // POSIX offsets are positive west of Greenwich.
    c.std_offset_ = Seconds{-west};
    if (pos == spec.size()) return c;
    if (!read_name()) return fail();
    c.dst_offset_ = c.std_offset_ + Seconds{3600};
    if (pos < spec.size() && spec[pos] != ',') {
      std::int64_t dwest = 0;
      if (!read_offset(dwest)) return fail();
      c.dst_offset_ = Seconds{-dwest};
    }
    if (!read_rule(c.dst_start_) || !read_rule(c.dst_end_) || pos != spec.size())
      return fail();
    c.has_dst_ = true;
    return c;
  }

  // Local wall-clock instant (expressed as if UTC) of a rule in `year`.
  static Instant transition(int year, const Rule& r) {
    using namespace std::chrono;
    weekday wd{r.weekday};
    sys_days day;
    if (r.week == 5) {
      day = sys_days{year_month_weekday_last{std::chrono::year{year}, month{r.month},
                                             weekday_last{wd}}};
    } else {
      day = sys_days{year_month_weekday{std::chrono::year{year}, month{r.month},
                                        weekday_indexed{wd, r.week}}};
    }
    return Instant{day} + Seconds{r.time_s};
  }

  std::string name_ = "UTC";
  Seconds std_offset_{0};
  Seconds dst_offset_{0};
  bool has_dst_ = false;
  Rule dst_start_{};
  Rule dst_end_{};
};

}  // namespace plugwatt
