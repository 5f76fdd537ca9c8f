#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "plugwatt/arx.hpp"
#include "plugwatt/core.hpp"
#include "plugwatt/demand.hpp"

namespace plugwatt {

/// Builds one site's calendar: a baseline of `baseline_weeks` followed by
/// each (kind, weeks) block in order, all starting on `start`.
inline PhaseCalendar consecutive_calendar(Site site, Date start, int baseline_weeks,
                                          std::span<const std::pair<PhaseKind, int>> blocks) {
  std::vector<Phase> phases;
  const char suffix = site == Site::Nasa ? 'N' : 'C';
  Date d = start;
  auto push = [&](PhaseKind k, int weeks, int idx) {
    if (weeks < 1) throw Error("phase length must be at least one week");
    Date end = d + std::chrono::days{7 * weeks - 1};
    phases.push_back({site, k, "P" + std::to_string(idx) + suffix, d, end});
    d = end + std::chrono::days{1};
  };
  push(PhaseKind::Baseline, baseline_weeks, 1);
  int idx = 2;
  for (auto [k, w] : blocks) push(k, w, idx++);
  return PhaseCalendar{std::move(phases)};
}

struct SynthConfig {
  std::size_t n_participants = 16;
  int sockets_per_participant = 2;
  // one site per dataset: the cohort has no site attribute
  PhaseCalendar calendar = PhaseCalendar{PhaseCalendar::field_2016().at_site(Site::Cmu)};
  std::string timezone = "America/Los_Angeles";

  // per-participant load, drawn uniformly from the ranges
  double floor_w_min = 4.0, floor_w_max = 14.0;      // always-on
  double active_w_min = 35.0, active_w_max = 95.0;   // extra load while at the desk
  double workday_start_h = 8.5, workday_end_h = 17.5;
  double window_jitter_h = 0.5;    // per-day shift of arrival and departure
  double presence_prob = 0.8;      // chance of being at the desk during the window
  double presence_stay = 0.9;      // per-sample persistence of the active/idle state

  std::map<PhaseKind, double> reduction;  // multiplicative, per phase kind

  double sessions_per_day = 3.0;
  double session_mean_s = 240.0;

  std::uint64_t incentive_seed = 11;
  double day_noise_frac = 0.15;     // sd of the day-level load factor
  double sample_jitter_frac = 0.05; // sd of per-sample proportional jitter
  std::int64_t sample_period_s = 60;
  std::uint64_t seed = 1;

  // ARX mode: experiment hours are shifted by an hourly pool differential
  // that follows the given recursion, with screentime as the input.
  bool arx_mode = false;
  double arx_alpha = 0.8, arx_beta = 0.55, arx_gamma = 0.01, arx_sigma = 1.0;

  void validate() const {
    auto nonneg = [](double v, const char* name) {
      if (!(v >= 0) || !std::isfinite(v)) throw Error(std::string(name) + " must be >= 0");
    };
    if (n_participants < 1) throw Error("n_participants must be >= 1");
    if (sockets_per_participant < 1) throw Error("sockets_per_participant must be >= 1");
    nonneg(floor_w_min, "floor_w_min");
    nonneg(active_w_min, "active_w_min");
    nonneg(sessions_per_day, "sessions_per_day");
    nonneg(session_mean_s, "session_mean_s");
    nonneg(day_noise_frac, "day_noise_frac");
    nonneg(sample_jitter_frac, "sample_jitter_frac");
    nonneg(window_jitter_h, "window_jitter_h");
    if (floor_w_max < floor_w_min || active_w_max < active_w_min)
      throw Error("load ranges must have max >= min");
    if (!(workday_start_h >= 0 && workday_start_h < workday_end_h && workday_end_h <= 24))
      throw Error("workday window must lie within the day");
    if (presence_prob < 0 || presence_prob > 1 || presence_stay < 0 || presence_stay > 1)
      throw Error("presence probabilities must be in [0, 1]");
    if (sample_period_s < 1 || sample_period_s > 300) throw Error("sample period must be in 1..300 s");
    for (auto [k, r] : reduction)
      if (!(r >= 0 && r < 1)) throw Error("reduction must be in [0, 1)");
    if (calendar.empty()) throw Error("calendar has no phases");
    if (calendar.sites().size() > 1) throw Error("synthetic calendar must cover a single site");
  }

  double reduction_for(PhaseKind k) const {
    auto it = reduction.find(k);
    return it == reduction.end() ? 0.0 : it->second;
  }
};

struct SyntheticDataset {
  Dataset data;
  nlohmann::json truth;
  Warnings warnings;
};

inline std::vector<int> incentive_values() { return {5, 10, 15, 20, 25, 30, 35, 40, 45, 50}; }

/// Ten dates receive a shuffled permutation of the ten amounts; any other
/// count falls back to independent uniform draws.
inline IncentiveSchedule generate_incentive_schedule(std::uint64_t seed, std::span<const Date> dates,
                                                     Warnings* warnings = nullptr) {
  if (dates.empty()) throw Error("incentive schedule needs at least one date");
  std::mt19937_64 rng(seed);
  auto values = incentive_values();
  IncentiveSchedule out;
  if (dates.size() == values.size()) {
    std::shuffle(values.begin(), values.end(), rng);
    for (std::size_t i = 0; i < dates.size(); ++i) out.add(dates[i], values[i]);
    return out;
  }
  warn(warnings, "incentive schedule: " + std::to_string(dates.size()) +
                     " dates (not 10); amounts drawn independently");
  std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
  for (Date d : dates) out.add(d, values[pick(rng)]);
  return out;
}

namespace detail {

inline std::string participant_name(std::size_t i) {
  std::string s = std::to_string(i + 1);
  return "p" + std::string(s.size() < 2 ? 2 - s.size() : 0, '0') + s;
}

struct Occupant {
  std::string id;
  double floor_w = 0;
  double active_w = 0;
  std::vector<double> floor_share;   // per socket, sums to 1
  std::vector<double> active_share;  // per socket, sums to 1
};

}  // namespace detail

// Workday-gated two-state occupant: during the (jittered) desk window the
// occupant flips between present and away with a persistent Markov chain;
// present adds the active load on top of the always-on floor. A day-level
// factor scales the active load and every sample gets proportional jitter.
inline SyntheticDataset generate_synthetic(const SynthConfig& cfg) {
  cfg.validate();
  const SiteClock clock = SiteClock::from_name(cfg.timezone);
  SyntheticDataset out;
  out.data.calendar = cfg.calendar;

  std::mt19937_64 master(cfg.seed);
  std::vector<detail::Occupant> occupants;
  for (std::size_t i = 0; i < cfg.n_participants; ++i) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    detail::Occupant o;
    o.id = detail::participant_name(i);
    o.floor_w = cfg.floor_w_min + (cfg.floor_w_max - cfg.floor_w_min) * u(master);
    o.active_w = cfg.active_w_min + (cfg.active_w_max - cfg.active_w_min) * u(master);
    auto shares = [&] {
      std::vector<double> w(static_cast<std::size_t>(cfg.sockets_per_participant));
      double s = 0;
      for (auto& x : w) s += (x = 0.5 + u(master));
      for (auto& x : w) x /= s;
      return w;
    };
    o.floor_share = shares();
    o.active_share = shares();
    occupants.push_back(std::move(o));
  }

  // incentive schedules per incentive-bearing phase, over its workdays
  for (const auto& p : cfg.calendar.phases()) {
    if (!bears_incentive(p.kind)) continue;
    std::vector<Date> workdays;
    for (Date d : p.days())
      if (is_workday(d)) workdays.push_back(d);
    if (workdays.empty()) continue;
    auto sched = generate_incentive_schedule(draw_seed(cfg.incentive_seed, workdays.size() + 7u * static_cast<unsigned>(p.kind)),
                                             workdays, &out.warnings);
    for (const auto& e : sched.entries()) out.data.incentives.add(e.date, e.amount_usd);
  }

  std::vector<Date> all_days;
  std::vector<const Phase*> phase_of;
  for (const auto& p : cfg.calendar.phases())
    for (Date d : p.days()) {
      all_days.push_back(d);
      phase_of.push_back(&p);
    }

  // screentime sessions on workdays of non-baseline phases
  std::map<Date, std::array<double, 24>> pool_screen;  // mean screentime seconds per hour
  for (std::size_t i = 0; i < occupants.size(); ++i) {
    std::mt19937_64 rng(draw_seed(cfg.seed ^ 0x5c7ee1ULL, i));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::poisson_distribution<int> count(cfg.sessions_per_day);
    std::exponential_distribution<double> dur(cfg.session_mean_s > 0 ? 1.0 / cfg.session_mean_s : 1.0);
    for (std::size_t k = 0; k < all_days.size(); ++k) {
      Date d = all_days[k];
      if (phase_of[k]->kind == PhaseKind::Baseline || !is_workday(d)) continue;
      int n = cfg.session_mean_s > 0 ? count(rng) : 0;
      std::vector<ScreentimeSession> today;
      for (int s = 0; s < n; ++s) {
        double start_h = cfg.workday_start_h + (cfg.workday_end_h - cfg.workday_start_h) * u(rng);
        auto start = static_cast<std::int64_t>(start_h * 3600.0);
        auto len = std::max<std::int64_t>(10, static_cast<std::int64_t>(dur(rng)));
        std::int64_t end = std::min<std::int64_t>(start + len, kSecondsPerDay);
        if (end <= start) continue;
        today.push_back({occupants[i].id, clock.at(d, start), clock.at(d, end)});
      }
      auto merged = merge_sessions(std::move(today)).sessions;
      auto& hours = pool_screen[d];
      for (const auto& s : merged) {
        for (int h = 0; h < 24; ++h) {
          Instant a = std::max(s.session_start, clock.at(d, h * kSecondsPerHour));
          Instant b = std::min(s.session_end, clock.at(d, (h + 1) * kSecondsPerHour));
          if (b > a) hours[h] += static_cast<double>((b - a).count()) / static_cast<double>(occupants.size());
        }
        out.data.sessions.push_back(s);
      }
    }
  }

  // ARX differential per experiment day and hour
  std::map<Date, std::array<double, 24>> arx_shift;
  if (cfg.arx_mode) {
    std::mt19937_64 rng(draw_seed(cfg.seed ^ 0xa5c0ffeeULL, 0));
    std::normal_distribution<double> eps(0.0, cfg.arx_sigma);
    const double stationary = cfg.arx_alpha / (1.0 - cfg.arx_beta);
    for (std::size_t k = 0; k < all_days.size(); ++k) {
      if (phase_of[k]->kind == PhaseKind::Baseline) continue;
      Date d = all_days[k];
      auto screen = pool_screen.count(d) ? pool_screen[d] : std::array<double, 24>{};
      auto& shift = arx_shift[d];
      double prev = stationary + eps(rng);
      shift[0] = prev;
      for (int h = 1; h < 24; ++h) {
        prev = cfg.arx_alpha + cfg.arx_beta * prev + cfg.arx_gamma * screen[h - 1] + eps(rng);
        shift[h] = prev;
      }
    }
  }

  // power readings
  const auto period = cfg.sample_period_s;
  const std::int64_t per_day = kSecondsPerDay / period;
  for (std::size_t i = 0; i < occupants.size(); ++i) {
    const auto& o = occupants[i];
    std::mt19937_64 rng(draw_seed(cfg.seed, 1000 + i));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> z(0.0, 1.0);
    const auto n_sockets = static_cast<std::size_t>(cfg.sockets_per_participant);
    std::vector<std::vector<PowerReading>> streams(n_sockets);
    for (std::size_t k = 0; k < all_days.size(); ++k) {
      Date d = all_days[k];
      const Phase& ph = *phase_of[k];
      const double keep = 1.0 - cfg.reduction_for(ph.kind);
      const bool work = is_workday(d);
      const double day_factor = std::max(0.0, 1.0 + cfg.day_noise_frac * z(rng));
      const double arrive = cfg.workday_start_h + cfg.window_jitter_h * (2 * u(rng) - 1);
      const double leave = cfg.workday_end_h + cfg.window_jitter_h * (2 * u(rng) - 1);
      const std::array<double, 24>* shift = nullptr;
      if (auto it = arx_shift.find(d); it != arx_shift.end()) shift = &it->second;
      const Instant midnight = clock.local_midnight(d);
      const std::int64_t day_len = clock.day_length(d);
      bool present = u(rng) < cfg.presence_prob;
      for (std::int64_t j = 0; j < per_day; ++j) {
        const std::int64_t sod = j * period;
        if (sod >= day_len) break;
        const double hour = static_cast<double>(sod) / 3600.0;
        const bool in_window = work && hour >= arrive && hour < leave;
        if (in_window) {
          if (u(rng) > cfg.presence_stay) present = u(rng) < cfg.presence_prob;
        }
        const double active = in_window && present ? o.active_w * day_factor : 0.0;
        double hour_shift = 0.0;
        if (shift) hour_shift = (*shift)[static_cast<std::size_t>(std::min<std::int64_t>(sod / 3600, 23))];
        for (std::size_t s = 0; s < n_sockets; ++s) {
          double w = (o.floor_w * o.floor_share[s] + active * o.active_share[s]) * keep;
          w -= hour_shift * o.floor_share[s];
          w *= 1.0 + cfg.sample_jitter_frac * z(rng);
          w = std::max(0.0, w);
          // round to milliwatts so CSV output stays compact
          w = std::round(w * 1000.0) / 1000.0;
          streams[s].push_back({midnight + Seconds{sod}, o.id, "s" + std::to_string(s + 1), w});
        }
      }
    }
    for (auto& st : streams)
      out.data.readings.insert(out.data.readings.end(), st.begin(), st.end());
  }

  nlohmann::json reductions = nlohmann::json::object();
  for (const auto& p : cfg.calendar.phases())
    reductions[p.label] = cfg.reduction_for(p.kind);
  out.truth = {{"reduction", reductions}, {"seed", cfg.seed}, {"n_participants", cfg.n_participants}};
  if (cfg.arx_mode)
    out.truth["arx"] = {{"alpha", cfg.arx_alpha},
                        {"beta", cfg.arx_beta},
                        {"gamma", cfg.arx_gamma},
                        {"sigma_eps", cfg.arx_sigma}};
  return out;
}

// ---------------------------------------------------------------------------
// Pool-level series straight from a known recursion, for estimator checks.

struct ArxTruth {
  double alpha = 0.8;
  std::vector<double> beta{0.55};
  double gamma = 0.01;
  std::optional<double> delta;
  double sigma = 1.0;
};

inline HourlySeries synthetic_arx_series(const ArxTruth& truth, std::size_t n_days, std::uint64_t seed,
                                         Date start = require_date("2016-10-18")) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> eps(0.0, truth.sigma);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::exponential_distribution<double> screen(1.0 / 120.0);
  double b_sum = 0;
  for (double b : truth.beta) b_sum += b;
  const double level = truth.alpha / (1.0 - b_sum);
  HourlySeries out;
  for (std::size_t k = 0; k < n_days; ++k) {
    ArxDay day{start + std::chrono::days{static_cast<int>(k)}, {}};
    const double inc = truth.delta ? 5.0 * static_cast<double>(1 + static_cast<int>(u(rng) * 10)) : 0.0;
    std::array<double, 24> y{};
    for (int h = 0; h < 24; ++h) {
      auto& pt = day.hours[h];
      pt.screentime_prev_s = u(rng) < 0.5 ? screen(rng) : 0.0;
      pt.incentive_usd = inc;
      pt.incentive_prev_usd = inc;
      double v = truth.alpha + truth.gamma * pt.screentime_prev_s + eps(rng);
      if (truth.delta) v += *truth.delta * inc;
      for (std::size_t l = 0; l < truth.beta.size(); ++l) {
        const int hl = h - 1 - static_cast<int>(l);
        v += truth.beta[l] * (hl >= 0 ? y[static_cast<std::size_t>(hl)] : level);
      }
      y[static_cast<std::size_t>(h)] = v;
      pt.target = v;
      pt.expt_power = 50.0 - v;
    }
    out.push_back(day);
  }
  return out;
}

}  // namespace plugwatt
