#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "plugwatt/core.hpp"

namespace plugwatt {

struct Sample {
  Instant t;
  double watts = 0.0;
};

using Stream = std::vector<Sample>;

/// Staleness cap and canonical cadence for step-held power telemetry.
struct HoldPolicy {
  std::int64_t staleness_cap_s = 300;
  std::int64_t cadence_s = 60;
};

// Readings grouped by participant, then socket, each stream sorted by time.
// Streams are shared immutable vectors so that copies of the index (service
// snapshots) only duplicate the streams that change.
class ReadingIndex {
 public:
  using StreamPtr = std::shared_ptr<const Stream>;
  using SocketMap = std::map<std::string, StreamPtr>;

  ReadingIndex() = default;
  explicit ReadingIndex(std::span<const PowerReading> readings, HoldPolicy hold = {})
      : hold_(hold) {
    std::map<std::string, std::map<std::string, Stream>> tmp;
    for (const auto& r : readings) tmp[r.participant_id][r.socket_id].push_back({r.timestamp, r.watts});
    for (auto& [p, sockets] : tmp) {
      for (auto& [s, stream] : sockets) {
        std::stable_sort(stream.begin(), stream.end(),
                         [](const Sample& a, const Sample& b) { return a.t < b.t; });
        streams_[p][s] = std::make_shared<const Stream>(std::move(stream));
      }
    }
  }

  const HoldPolicy& hold() const { return hold_; }

  std::vector<std::string> participants() const {
    std::vector<std::string> out;
    for (const auto& [p, _] : streams_) out.push_back(p);
    return out;
  }

  bool has_participant(const std::string& p) const { return streams_.count(p) != 0; }

  const SocketMap* sockets(const std::string& participant) const {
    auto it = streams_.find(participant);
    return it == streams_.end() ? nullptr : &it->second;
  }

  /// Replaces one stream; used by the service for copy-on-write appends.
  void set_stream(const std::string& participant, const std::string& socket, StreamPtr s) {
    streams_[participant][socket] = std::move(s);
  }

  StreamPtr stream(const std::string& participant, const std::string& socket) const {
    auto it = streams_.find(participant);
    if (it == streams_.end()) return nullptr;
    auto jt = it->second.find(socket);
    return jt == it->second.end() ? nullptr : jt->second;
  }

  std::size_t size() const {
    std::size_t n = 0;
    for (const auto& [_, sockets] : streams_)
      for (const auto& [__, s] : sockets) n += s->size();
    return n;
  }

 private:
  HoldPolicy hold_;
  std::map<std::string, SocketMap> streams_;
};

/// Weighted sum and covered seconds of a step-held stream over [from, to).
/// Each sample holds until the next sample or the staleness cap, whichever
/// comes first. With `above` set, only segments strictly above it count.
struct Coverage {
  double watt_seconds = 0.0;
  double seconds = 0.0;
  std::optional<double> mean() const {
    if (seconds <= 0) return std::nullopt;
    return watt_seconds / seconds;
  }
};

inline Coverage accumulate(const Stream& s, Instant from, Instant to, std::int64_t cap_s,
                           std::optional<double> above = std::nullopt) {
  Coverage c;
  if (to <= from || s.empty()) return c;
  Instant lookback = from - Seconds{cap_s};
  auto it = std::lower_bound(s.begin(), s.end(), lookback,
                             [](const Sample& x, Instant t) { return x.t < t; });
  for (; it != s.end() && it->t < to; ++it) {
    Instant hold_end = it->t + Seconds{cap_s};
    auto next = std::next(it);
    if (next != s.end()) hold_end = std::min(hold_end, next->t);
    Instant a = std::max(it->t, from);
    Instant b = std::min(hold_end, to);
    if (b <= a) continue;
    if (above && !(it->watts > *above)) continue;
    double dt = static_cast<double>((b - a).count());
    c.watt_seconds += it->watts * dt;
    c.seconds += dt;
  }
  return c;
}

/// Resamples a stream onto a fixed grid by last observation carried forward.
/// Grid points whose last observation is older than the cap are skipped.
inline Stream resample_locf(const Stream& s, Instant from, Instant to, HoldPolicy hold = {}) {
  Stream out;
  if (s.empty()) return out;
  auto it = s.begin();
  std::optional<Sample> last;
  for (Instant t = from; t < to; t += Seconds{hold.cadence_s}) {
    while (it != s.end() && it->t <= t) last = *it++;
    if (last && (t - last->t).count() < hold.staleness_cap_s) out.push_back({t, last->watts});
  }
  return out;
}

// Participant power is the sum over sockets of each socket's time-weighted
// mean; sockets with no coverage in the interval are skipped.
inline std::optional<double> interval_mean_power(const ReadingIndex& index,
                                                 const std::string& participant, Instant from,
                                                 Instant to) {
  const auto* sockets = index.sockets(participant);
  if (!sockets) return std::nullopt;
  double total = 0.0;
  bool any = false;
  for (const auto& [_, stream] : *sockets) {
    auto m = accumulate(*stream, from, to, index.hold().staleness_cap_s).mean();
    if (m) {
      total += *m;
      any = true;
    }
  }
  if (!any) return std::nullopt;
  return total;
}

inline std::optional<double> interval_mean_power(const ReadingIndex& index,
                                                 const std::string& participant, Date day,
                                                 std::int64_t t0, std::int64_t tf,
                                                 const SiteClock& clock) {
  if (t0 < 0 || t0 >= tf || tf > kSecondsPerDay)
    throw Error("interval must satisfy 0 <= t0 < tf <= 86400");
  return interval_mean_power(index, participant, clock.at(day, t0), clock.at(day, tf));
}

/// Daily mean over the whole local day, sampled time only.
inline std::optional<double> daily_mean_power(const ReadingIndex& index,
                                              const std::string& participant, Date day,
                                              const SiteClock& clock) {
  return interval_mean_power(index, participant, clock.local_midnight(day),
                             clock.local_midnight(day + std::chrono::days{1}));
}

inline std::optional<double> active_mean_power(const ReadingIndex& index,
                                               const std::string& participant, Instant from,
                                               Instant to, double threshold_w = 5.0) {
  if (!(threshold_w >= 0)) throw Error("threshold must be non-negative");
  const auto* sockets = index.sockets(participant);
  if (!sockets) return std::nullopt;
  double total = 0.0;
  bool any = false;
  for (const auto& [_, stream] : *sockets) {
    auto m = accumulate(*stream, from, to, index.hold().staleness_cap_s, threshold_w).mean();
    if (m) {
      total += *m;
      any = true;
    }
  }
  if (!any) return std::nullopt;
  return total;
}

inline std::optional<double> active_mean_power(const ReadingIndex& index,
                                               const std::string& participant, Date day,
                                               const SiteClock& clock, double threshold_w = 5.0) {
  return active_mean_power(index, participant, clock.local_midnight(day),
                           clock.local_midnight(day + std::chrono::days{1}), threshold_w);
}

/// Unweighted mean over participants of their hourly mean power. Hour is 1..24.
inline std::optional<double> pool_hourly_mean(const ReadingIndex& index,
                                              std::span<const std::string> participants, Date day,
                                              int hour, const SiteClock& clock) {
  if (hour < 1 || hour > 24) throw Error("hour must be in 1..24");
  Instant from = clock.at(day, kSecondsPerHour * (hour - 1));
  Instant to = clock.at(day, kSecondsPerHour * hour);
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& p : participants) {
    if (auto m = interval_mean_power(index, p, from, to)) {
      sum += *m;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

inline std::optional<double> pool_hourly_mean(const ReadingIndex& index, const Phase& phase,
                                              Date day, int hour, const SiteClock& clock) {
  if (!phase.contains(day)) throw Error("day " + format_date(day) + " is outside phase " + phase.label);
  auto participants = index.participants();
  return pool_hourly_mean(index, participants, day, hour, clock);
}

// ---------------------------------------------------------------------------
// Daily aggregates

struct ParticipantDailyMean {
  std::string participant_id;
  std::string phase_label;
  Date day;
  double mean_watts = 0.0;
  std::size_t n_samples = 0;
};

inline std::size_t samples_in(const ReadingIndex& index, const std::string& participant,
                              Instant from, Instant to) {
  std::size_t n = 0;
  if (const auto* sockets = index.sockets(participant)) {
    for (const auto& [_, s] : *sockets) {
      auto lo = std::lower_bound(s->begin(), s->end(), from,
                                 [](const Sample& x, Instant t) { return x.t < t; });
      auto hi = std::lower_bound(lo, s->end(), to,
                                 [](const Sample& x, Instant t) { return x.t < t; });
      n += static_cast<std::size_t>(hi - lo);
    }
  }
  return n;
}

/// Per participant and day of `phase`; days without samples are absent.
inline std::vector<ParticipantDailyMean> daily_means(const ReadingIndex& index, const Phase& phase,
                                                     const SiteClock& clock) {
  std::vector<ParticipantDailyMean> out;
  for (const auto& p : index.participants()) {
    for (Date d : phase.days()) {
      Instant from = clock.local_midnight(d);
      Instant to = clock.local_midnight(d + std::chrono::days{1});
      auto m = interval_mean_power(index, p, from, to);
      if (!m) continue;
      out.push_back({p, phase.label, d, *m, samples_in(index, p, from, to)});
    }
  }
  return out;
}

struct MatchedPair {
  Date expt_day;
  int weekday = 0;  // Monday = 0
  double baseline_mean = 0.0;
  double expt_mean = 0.0;
  double diff() const { return baseline_mean - expt_mean; }
};

/// How an experiment day's baseline side is formed from same-weekday
/// baseline days.
enum class BaselineReference {
  // mean over every baseline occurrence of the weekday
  WeekdayMean,
  // baseline occurrences are dealt out round-robin so that no two experiment
  // days share one; reused cyclically only when baseline days run short
  DisjointOccurrences,
};

/// Pairs each experiment day with the participant's baseline mean for the
/// same weekday. Pairs missing either side are dropped.
inline std::vector<MatchedPair> weekday_matched_pairs(
    const ReadingIndex& index, const Phase& baseline, const Phase& expt,
    const std::string& participant, const SiteClock& clock,
    BaselineReference ref = BaselineReference::DisjointOccurrences) {
  if (baseline.site != expt.site) throw Error("phases belong to different sites");
  std::array<std::vector<double>, 7> base;
  for (Date d : baseline.days())
    if (auto m = daily_mean_power(index, participant, d, clock)) base[weekday_index(d)].push_back(*m);

  std::array<std::vector<std::pair<Date, double>>, 7> days;
  for (Date d : expt.days())
    if (auto m = daily_mean_power(index, participant, d, clock)) days[weekday_index(d)].push_back({d, *m});

  std::vector<MatchedPair> out;
  for (int wd = 0; wd < 7; ++wd) {
    const auto& b = base[wd];
    const auto& e = days[wd];
    if (b.empty()) continue;
    for (std::size_t k = 0; k < e.size(); ++k) {
      double sum = 0.0;
      std::size_t n = 0;
      if (ref == BaselineReference::WeekdayMean) {
        for (double v : b) sum += v;
        n = b.size();
      } else if (b.size() >= e.size()) {
        for (std::size_t j = k; j < b.size(); j += e.size()) {
          sum += b[j];
          ++n;
        }
      } else {
        sum = b[k % b.size()];
        n = 1;
      }
      out.push_back({e[k].first, wd, sum / static_cast<double>(n), e[k].second});
    }
  }
  std::sort(out.begin(), out.end(),
            [](const MatchedPair& x, const MatchedPair& y) { return x.expt_day < y.expt_day; });
  return out;
}

}  // namespace plugwatt
