#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "plugwatt/error.hpp"
#include "plugwatt/time.hpp"

namespace plugwatt {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double mid() const { return 0.5 * (lo + hi); }
};

enum class Site { Nasa, Cmu };

enum class PhaseKind { Baseline, Incentive, Feedback, FeedbackAndIncentive };

inline std::string_view to_string(Site s) { return s == Site::Nasa ? "NASA" : "CMU"; }

inline std::optional<Site> parse_site(std::string_view s) {
  std::string up;
  for (char c : s) up.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  if (up == "NASA") return Site::Nasa;
  if (up == "CMU") return Site::Cmu;
  return std::nullopt;
}

inline std::string_view to_string(PhaseKind k) {
  switch (k) {
    case PhaseKind::Baseline: return "Baseline";
    case PhaseKind::Incentive: return "Incentive";
    case PhaseKind::Feedback: return "Feedback";
    case PhaseKind::FeedbackAndIncentive: return "FeedbackAndIncentive";
  }
  return "Baseline";
}

inline std::optional<PhaseKind> parse_phase_kind(std::string_view s) {
  std::string low;
  for (char c : s) {
    if (c == '_' || c == '-' || c == ' ' || c == '&') continue;
    low.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (low == "baseline") return PhaseKind::Baseline;
  if (low == "incentive") return PhaseKind::Incentive;
  if (low == "feedback") return PhaseKind::Feedback;
  if (low == "feedbackandincentive" || low == "both" || low == "feedbackincentive")
    return PhaseKind::FeedbackAndIncentive;
  return std::nullopt;
}

inline bool bears_incentive(PhaseKind k) {
  return k == PhaseKind::Incentive || k == PhaseKind::FeedbackAndIncentive;
}

inline bool bears_feedback(PhaseKind k) {
  return k == PhaseKind::Feedback || k == PhaseKind::FeedbackAndIncentive;
}

struct PowerReading {
  Instant timestamp;
  std::string participant_id;
  std::string socket_id;
  double watts = 0.0;

  friend bool operator==(const PowerReading&, const PowerReading&) = default;
};

struct Phase {
  Site site = Site::Nasa;
  PhaseKind kind = PhaseKind::Baseline;
  std::string label;
  Date start_date;
  Date end_date;  // inclusive

  bool contains(Date d) const { return d >= start_date && d <= end_date; }
  std::vector<Date> days() const {
    std::vector<Date> out;
    for (Date d = start_date; d <= end_date; d += std::chrono::days{1}) out.push_back(d);
    return out;
  }
  friend bool operator==(const Phase&, const Phase&) = default;
};

class PhaseCalendar {
 public:
  PhaseCalendar() = default;
  explicit PhaseCalendar(std::vector<Phase> phases) : phases_(std::move(phases)) {}

  /// Phase dates of the two 2016 field deployments.
  static PhaseCalendar field_2016() {
    auto d = [](const char* s) { return require_date(s); };
    return PhaseCalendar{{
        {Site::Nasa, PhaseKind::Baseline, "P1N", d("2016-09-12"), d("2016-10-17")},
        {Site::Nasa, PhaseKind::Feedback, "P3N", d("2016-10-18"), d("2016-11-11")},
        {Site::Cmu, PhaseKind::Baseline, "P1C", d("2016-09-12"), d("2016-10-17")},
        {Site::Cmu, PhaseKind::Incentive, "P2C", d("2016-10-18"), d("2016-10-30")},
        {Site::Cmu, PhaseKind::Feedback, "P3C", d("2016-10-31"), d("2016-11-13")},
        {Site::Cmu, PhaseKind::FeedbackAndIncentive, "P4C", d("2016-11-14"), d("2016-11-25")},
    }};
  }

  const std::vector<Phase>& phases() const { return phases_; }
  bool empty() const { return phases_.empty(); }

  std::vector<Phase> at_site(Site s) const {
    std::vector<Phase> out;
    for (const auto& p : phases_)
      if (p.site == s) out.push_back(p);
    return out;
  }

  const Phase* find(Site s, std::string_view label) const {
    for (const auto& p : phases_)
      if (p.site == s && p.label == label) return &p;
    return nullptr;
  }

  /// Looks a phase up by label or by kind name ("feedback", "incentive", ...).
  const Phase* resolve(Site s, std::string_view label_or_kind) const {
    if (const Phase* p = find(s, label_or_kind)) return p;
    auto kind = parse_phase_kind(label_or_kind);
    if (!kind) return nullptr;
    for (const auto& p : phases_)
      if (p.site == s && p.kind == *kind) return &p;
    return nullptr;
  }

  const Phase* baseline(Site s) const {
    for (const auto& p : phases_)
      if (p.site == s && p.kind == PhaseKind::Baseline) return &p;
    return nullptr;
  }

  const Phase* phase_at(Site s, Date d) const {
    for (const auto& p : phases_)
      if (p.site == s && p.contains(d)) return &p;
    return nullptr;
  }

  std::set<Site> sites() const {
    std::set<Site> out;
    for (const auto& p : phases_) out.insert(p.site);
    return out;
  }

  friend bool operator==(const PhaseCalendar&, const PhaseCalendar&) = default;

 private:
  std::vector<Phase> phases_;
};

struct ScreentimeSession {
  std::string participant_id;
  Instant session_start;
  Instant session_end;

  std::int64_t duration() const { return (session_end - session_start).count(); }
  friend bool operator==(const ScreentimeSession&, const ScreentimeSession&) = default;
};

inline bool valid_incentive_amount(int usd) { return usd >= 5 && usd <= 50 && usd % 5 == 0; }

class IncentiveSchedule {
 public:
  struct Entry {
    Date date;
    int amount_usd = 0;
    friend bool operator==(const Entry&, const Entry&) = default;
  };

  IncentiveSchedule() = default;
  explicit IncentiveSchedule(std::vector<Entry> entries) : entries_(std::move(entries)) {}

  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  std::optional<int> amount_on(Date d) const {
    for (const auto& e : entries_)
      if (e.date == d) return e.amount_usd;
    return std::nullopt;
  }

  void add(Date d, int amount) { entries_.push_back({d, amount}); }

  friend bool operator==(const IncentiveSchedule&, const IncentiveSchedule&) = default;

 private:
  std::vector<Entry> entries_;
};

struct ComfortReport {
  std::string participant_id;
  Instant timestamp;
  int level = 0;  // ASHRAE 7-point, -3 (cold) .. +3 (hot)

  friend bool operator==(const ComfortReport&, const ComfortReport&) = default;
};

inline bool valid_comfort_level(int level) { return level >= -3 && level <= 3; }

struct Dataset {
  PhaseCalendar calendar;
  std::vector<PowerReading> readings;
  std::vector<ScreentimeSession> sessions;
  IncentiveSchedule incentives;
  std::vector<ComfortReport> comfort;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// ---------------------------------------------------------------------------
// Screentime sessions

struct MergeResult {
  std::vector<ScreentimeSession> sessions;
  std::size_t merges = 0;
};

/// Unions overlapping sessions per participant. Touching sessions
/// (end == next start) are kept apart; they do not overlap.
inline MergeResult merge_sessions(std::vector<ScreentimeSession> sessions) {
  std::sort(sessions.begin(), sessions.end(), [](const auto& a, const auto& b) {
    return std::tie(a.participant_id, a.session_start, a.session_end) <
           std::tie(b.participant_id, b.session_start, b.session_end);
  });
  MergeResult out;
  for (auto& s : sessions) {
    if (!out.sessions.empty()) {
      auto& last = out.sessions.back();
      if (last.participant_id == s.participant_id && s.session_start < last.session_end) {
        last.session_end = std::max(last.session_end, s.session_end);
        ++out.merges;
        continue;
      }
    }
    out.sessions.push_back(std::move(s));
  }
  return out;
}

/// Sessions grouped per participant, merged and sorted by start.
class ScreentimeIndex {
 public:
  ScreentimeIndex() = default;
  explicit ScreentimeIndex(std::vector<ScreentimeSession> sessions) {
    for (auto& s : merge_sessions(std::move(sessions)).sessions)
      by_participant_[s.participant_id].push_back({s.session_start, s.session_end});
  }

  bool knows(const std::string& participant) const {
    return by_participant_.count(participant) != 0;
  }

  /// Seconds of the participant's sessions inside [from, to).
  std::int64_t seconds_in(const std::string& participant, Instant from, Instant to,
                          Warnings* warnings = nullptr) const {
    auto it = by_participant_.find(participant);
    if (it == by_participant_.end()) {
      warn(warnings, "screentime: unknown participant '" + participant + "'");
      return 0;
    }
    if (to <= from) return 0;
    const auto& spans = it->second;
    // spans are disjoint and sorted, so a plain sum of clipped lengths is the union
    auto first = std::lower_bound(spans.begin(), spans.end(), from,
                                  [](const auto& s, Instant t) { return s.second <= t; });
    std::int64_t total = 0;
    for (auto s = first; s != spans.end() && s->first < to; ++s) {
      Instant a = std::max(s->first, from);
      Instant b = std::min(s->second, to);
      if (b > a) total += (b - a).count();
    }
    return total;
  }

 private:
  std::map<std::string, std::vector<std::pair<Instant, Instant>>> by_participant_;
};

/// Total screentime of `participant` on local `day` during [t0, tf) seconds.
inline std::int64_t screentime_in_interval(std::span<const ScreentimeSession> sessions,
                                           const std::string& participant, Date day,
                                           std::int64_t t0, std::int64_t tf,
                                           const SiteClock& clock,
                                           Warnings* warnings = nullptr) {
  if (t0 < 0 || tf > kSecondsPerDay || t0 >= tf)
    throw Error("screentime interval must satisfy 0 <= t0 < tf <= 86400");
  Instant from = clock.at(day, t0);
  Instant to = clock.at(day, tf);
  std::vector<std::pair<Instant, Instant>> clipped;
  bool known = false;
  for (const auto& s : sessions) {
    if (s.participant_id != participant) continue;
    known = true;
    Instant a = std::max(s.session_start, from);
    Instant b = std::min(s.session_end, to);
    if (b > a) clipped.emplace_back(a, b);
  }
  if (!known) {
    warn(warnings, "screentime: unknown participant '" + participant + "'");
    return 0;
  }
  std::sort(clipped.begin(), clipped.end());
  std::int64_t total = 0;
  std::optional<std::pair<Instant, Instant>> cur;
  for (const auto& c : clipped) {
    if (cur && c.first <= cur->second) {
      cur->second = std::max(cur->second, c.second);
    } else {
      if (cur) total += (cur->second - cur->first).count();
      cur = c;
    }
  }
  if (cur) total += (cur->second - cur->first).count();
  return total;
}

// ---------------------------------------------------------------------------
// Validation

struct ValidationReport {
  std::map<std::string, std::size_t> violations;
  std::map<std::string, std::size_t> warnings;
  std::vector<ScreentimeSession> merged_sessions;

  std::size_t total_violations() const {
    std::size_t n = 0;
    for (const auto& [_, c] : violations) n += c;
    return n;
  }
  std::size_t total_warnings() const {
    std::size_t n = 0;
    for (const auto& [_, c] : warnings) n += c;
    return n;
  }
  bool accepted() const { return total_violations() == 0; }
};

inline ValidationReport validate_dataset(std::span<const PowerReading> readings,
                                         std::span<const ScreentimeSession> sessions,
                                         const IncentiveSchedule& incentives,
                                         const PhaseCalendar& calendar,
                                         std::span<const ComfortReport> comfort = {}) {
  ValidationReport r;
  auto bump = [](auto& m, const char* key) { ++m[key]; };

  // readings
  std::map<std::pair<std::string_view, std::string_view>, Instant> last_seen;
  for (const auto& rd : readings) {
    if (!std::isfinite(rd.watts)) {
      bump(r.violations, "non-finite watts");
    } else if (rd.watts < 0) {
      bump(r.violations, "negative watts");
    }
    auto key = std::make_pair(std::string_view(rd.participant_id), std::string_view(rd.socket_id));
    auto it = last_seen.find(key);
    if (it != last_seen.end()) {
      if (rd.timestamp <= it->second) bump(r.violations, "non-increasing timestamp");
      else it->second = rd.timestamp;
    } else {
      last_seen.emplace(key, rd.timestamp);
    }
  }

  // sessions
  std::vector<ScreentimeSession> good;
  for (const auto& s : sessions) {
    if (s.session_end <= s.session_start) bump(r.violations, "session end not after start");
    else good.push_back(s);
  }
  auto merged = merge_sessions(std::move(good));
  if (merged.merges) r.warnings["overlapping sessions merged"] += merged.merges;
  r.merged_sessions = std::move(merged.sessions);

  // phases
  const auto& phases = calendar.phases();
  for (std::size_t i = 0; i < phases.size(); ++i) {
    if (phases[i].start_date > phases[i].end_date) bump(r.violations, "phase start after end");
    for (std::size_t j = i + 1; j < phases.size(); ++j) {
      const auto& a = phases[i];
      const auto& b = phases[j];
      if (a.site == b.site && a.start_date <= b.end_date && b.start_date <= a.end_date)
        bump(r.violations, "overlapping phases");
    }
  }
  for (Site s : calendar.sites()) {
    auto n = std::count_if(phases.begin(), phases.end(), [&](const Phase& p) {
      return p.site == s && p.kind == PhaseKind::Baseline;
    });
    if (n != 1) bump(r.violations, "baseline phase count != 1");
  }

  // incentives
  std::set<Date> seen_dates;
  for (const auto& e : incentives.entries()) {
    if (!valid_incentive_amount(e.amount_usd)) bump(r.violations, "invalid incentive amount");
    if (!seen_dates.insert(e.date).second) bump(r.violations, "duplicate incentive date");
    bool in_phase = false;
    for (const auto& p : phases)
      if (p.contains(e.date) && bears_incentive(p.kind)) in_phase = true;
    if (!in_phase) bump(r.violations, "incentive outside incentive phase");
  }

  for (const auto& c : comfort)
    if (!valid_comfort_level(c.level)) bump(r.violations, "comfort level out of range");

  return r;
}

inline ValidationReport validate_dataset(const Dataset& ds) {
  return validate_dataset(ds.readings, ds.sessions, ds.incentives, ds.calendar, ds.comfort);
}

}  // namespace plugwatt
