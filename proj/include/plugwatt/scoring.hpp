#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "plugwatt/aggregation.hpp"
#include "plugwatt/stats.hpp"

namespace plugwatt {

struct ScoringConfig {
  double threshold_w = 5.0;         // per-socket inactivity threshold
  std::int64_t window_s = 3600;     // trailing window for inactivity detection
  double var_threshold_w2 = 0.25;   // per-socket variance ceiling
  double floor_percentile = 5.0;    // always-on floor percentile of baseline total
  double floor_factor = 1.2;
  std::int64_t floor_grid_s = 60;
};

struct BaselineRecord {
  std::string participant_id;
  double active_baseline_watts = 0.0;
  std::string computed_from;
  double always_on_floor_watts = 0.0;
};

struct ScoreEntry {
  std::string participant_id;
  Date date;
  Instant as_of;
  double score = 0.0;
  int rank = 0;
  bool inactive_flag = false;
};

inline double score_from_averages(double baseline_average, double expt_average) {
  return 900.0 + 100.0 * (baseline_average - expt_average) / baseline_average;
}

/// Percentile of the participant's total wattage on a fixed grid over `phase`.
inline std::optional<double> always_on_floor(const ReadingIndex& index,
                                             const std::string& participant, const Phase& phase,
                                             const SiteClock& clock, const ScoringConfig& cfg = {}) {
  const auto* sockets = index.sockets(participant);
  if (!sockets) return std::nullopt;
  Instant from = clock.local_midnight(phase.start_date);
  Instant to = clock.local_midnight(phase.end_date + std::chrono::days{1});
  std::vector<double> totals;
  std::vector<Stream> grids;
  for (const auto& [_, s] : *sockets) {
    HoldPolicy h = index.hold();
    h.cadence_s = cfg.floor_grid_s;
    grids.push_back(resample_locf(*s, from, to, h));
  }
  std::vector<std::size_t> pos(grids.size(), 0);
  for (Instant t = from; t < to; t += Seconds{cfg.floor_grid_s}) {
    double total = 0.0;
    bool any = false;
    for (std::size_t i = 0; i < grids.size(); ++i) {
      auto& g = grids[i];
      while (pos[i] < g.size() && g[pos[i]].t < t) ++pos[i];
      if (pos[i] < g.size() && g[pos[i]].t == t) {
        total += g[pos[i]].watts;
        any = true;
      }
    }
    if (any) totals.push_back(total);
  }
  if (totals.empty()) return std::nullopt;
  return stats::quantile(std::move(totals), cfg.floor_percentile / 100.0);
}

/// One record per participant with above-threshold baseline activity.
inline std::vector<BaselineRecord> compute_baselines(const ReadingIndex& index,
                                                     const Phase& baseline_phase,
                                                     const SiteClock& clock,
                                                     const ScoringConfig& cfg = {},
                                                     Warnings* warnings = nullptr) {
  std::vector<BaselineRecord> out;
  for (const auto& p : index.participants()) {
    double sum = 0.0;
    int days = 0;
    for (Date d : baseline_phase.days()) {
      if (auto m = active_mean_power(index, p, d, clock, cfg.threshold_w)) {
        sum += *m;
        ++days;
      }
    }
    if (days == 0 || sum <= 0) {
      warn(warnings, "baseline: participant '" + p + "' has no active data; not scorable");
      continue;
    }
    BaselineRecord rec{p, sum / days, baseline_phase.label, 0.0};
    rec.always_on_floor_watts = always_on_floor(index, p, baseline_phase, clock, cfg).value_or(0.0);
    out.push_back(std::move(rec));
  }
  return out;
}

/// Score from local midnight of `date` up to `as_of`; absent with no active samples.
inline std::optional<double> live_score(const ReadingIndex& index, const BaselineRecord& baseline,
                                        Date date, Instant as_of, const SiteClock& clock,
                                        const ScoringConfig& cfg = {}) {
  Instant midnight = clock.local_midnight(date);
  Instant next = clock.local_midnight(date + std::chrono::days{1});
  if (as_of <= midnight || as_of > next)
    throw Error("as_of must fall within local date " + format_date(date));
  auto expt = active_mean_power(index, baseline.participant_id, midnight, as_of, cfg.threshold_w);
  if (!expt) return std::nullopt;
  return score_from_averages(baseline.active_baseline_watts, *expt);
}

/// True iff over the trailing window every socket is flat and the total sits
/// near the always-on floor. Not enough data gives the benefit of the doubt.
inline bool detect_inactivity(const ReadingIndex& index, const std::string& participant,
                              Instant as_of, double floor_w, const ScoringConfig& cfg = {}) {
  if (cfg.window_s <= 0) throw Error("window must be positive");
  if (cfg.var_threshold_w2 < 0) throw Error("variance threshold must be non-negative");
  const auto* sockets = index.sockets(participant);
  if (!sockets) return false;
  Instant from = as_of - Seconds{cfg.window_s};
  bool any_socket = false;
  double covered = 0.0;
  for (const auto& [_, s] : *sockets) {
    auto lo = std::lower_bound(s->begin(), s->end(), from,
                               [](const Sample& x, Instant t) { return x.t < t; });
    std::vector<double> w;
    for (auto it = lo; it != s->end() && it->t < as_of; ++it) w.push_back(it->watts);
    covered = std::max(covered, accumulate(*s, from, as_of, index.hold().staleness_cap_s).seconds);
    if (w.size() < 2) continue;
    any_socket = true;
    if (stats::population_variance(w) > cfg.var_threshold_w2) return false;
  }
  if (!any_socket || covered < 0.5 * static_cast<double>(cfg.window_s)) return false;
  auto total = interval_mean_power(index, participant, from, as_of);
  if (!total) return false;
  return *total < cfg.floor_factor * floor_w;
}

struct ScoreCandidate {
  std::string participant_id;
  double score = 0.0;
  bool inactive = false;
};

/// Active entries first, then descending score, then participant id.
inline std::vector<ScoreEntry> rank_leaderboard(std::vector<ScoreCandidate> candidates, Date date,
                                                Instant as_of) {
  std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
    if (a.inactive != b.inactive) return !a.inactive;
    if (a.score != b.score) return a.score > b.score;
    return a.participant_id < b.participant_id;
  });
  std::vector<ScoreEntry> out;
  out.reserve(candidates.size());
  int rank = 1;
  for (auto& c : candidates)
    out.push_back({std::move(c.participant_id), date, as_of, c.score, rank++, c.inactive});
  return out;
}

/// Scores every baselined participant at `as_of` and ranks them.
/// Participants without active samples yet today are left off the board.
inline std::vector<ScoreEntry> build_leaderboard(const ReadingIndex& index,
                                                 std::span<const BaselineRecord> baselines,
                                                 Date date, Instant as_of, const SiteClock& clock,
                                                 const ScoringConfig& cfg = {}) {
  std::vector<ScoreCandidate> candidates;
  for (const auto& b : baselines) {
    auto s = live_score(index, b, date, as_of, clock, cfg);
    if (!s) continue;
    bool inactive = detect_inactivity(index, b.participant_id, as_of, b.always_on_floor_watts, cfg);
    candidates.push_back({b.participant_id, *s, inactive});
  }
  return rank_leaderboard(std::move(candidates), date, as_of);
}

inline std::optional<std::string> winner_of(std::span<const ScoreEntry> leaderboard) {
  if (leaderboard.empty() || leaderboard.front().inactive_flag) return std::nullopt;
  return leaderboard.front().participant_id;
}

/// End-of-day winner for an incentive day, or none.
inline std::optional<std::string> declare_winner(const ReadingIndex& index,
                                                 std::span<const BaselineRecord> baselines,
                                                 const PhaseCalendar& calendar,
                                                 const IncentiveSchedule& incentives, Site site,
                                                 Date date, const SiteClock& clock,
                                                 const ScoringConfig& cfg = {}) {
  const Phase* phase = calendar.phase_at(site, date);
  if (!phase || !bears_incentive(phase->kind) || !incentives.amount_on(date)) return std::nullopt;
  Instant end_of_day = clock.local_midnight(date + std::chrono::days{1});
  auto board = build_leaderboard(index, baselines, date, end_of_day, clock, cfg);
  return winner_of(board);
}

}  // namespace plugwatt
