#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "plugwatt/core.hpp"
#include "plugwatt/stats.hpp"

namespace plugwatt {

inline constexpr std::int64_t kLoadPeriodS = 24 * 3600;  // p_l
inline constexpr std::int64_t kEpochS = 3600;            // decision epoch spacing
inline constexpr int kEpochsPerPeriod = static_cast<int>(kLoadPeriodS / kEpochS);

struct HourStats {
  double mean_kw = 0.0;
  double std_kw = 0.0;
};

/// Hour-of-day statistics of the non-plugload building load; index 0 is hour 1.
struct CyclostationaryProfile {
  std::array<HourStats, 24> hours{};
  std::size_t days = 0;

  /// Flat profile, handy for tests and what-if runs.
  static CyclostationaryProfile flat(double kw) {
    CyclostationaryProfile p;
    for (auto& h : p.hours) h = {kw, 0.0};
    p.days = 1;
    return p;
  }

  /// Weekday hourly shape of a medium office building, in kW.
  static CyclostationaryProfile medium_office() {
    static constexpr double kw[24] = {112, 110, 109, 109, 111, 125, 168, 231, 279, 297, 305, 309,
                                      306, 310, 308, 301, 287, 252, 199, 160, 141, 128, 120, 115};
    CyclostationaryProfile p;
    for (int h = 0; h < 24; ++h) p.hours[h] = {kw[h], 0.06 * kw[h]};
    p.days = 1;
    return p;
  }
};

struct HourlyLoad {
  Date date;
  int hour = 0;  // 1..24
  double kw = 0.0;
};

/// Per-hour mean and (n-1) std across complete days; partial days are dropped.
inline CyclostationaryProfile ingest_profile(std::span<const HourlyLoad> loads,
                                             Warnings* warnings = nullptr) {
  std::map<Date, std::map<int, double>> by_day;
  for (const auto& l : loads) {
    if (l.hour < 1 || l.hour > 24) throw Error("profile hour must be in 1..24");
    if (!std::isfinite(l.kw) || l.kw < 0) throw Error("profile load must be finite and >= 0");
    by_day[l.date][l.hour] = l.kw;
  }
  std::array<std::vector<double>, 24> cols;
  std::size_t days = 0;
  for (const auto& [d, hours] : by_day) {
    if (hours.size() != 24) {
      warn(warnings, "profile: dropping partial day " + format_date(d) + " (" +
                         std::to_string(hours.size()) + " hours)");
      continue;
    }
    ++days;
    for (const auto& [h, kw] : hours) cols[h - 1].push_back(kw);
  }
  if (days == 0) throw Error("profile needs at least one complete day of hourly data");
  CyclostationaryProfile p;
  p.days = days;
  for (int h = 0; h < 24; ++h) {
    p.hours[h].mean_kw = stats::mean(cols[h]);
    p.hours[h].std_kw = cols[h].size() > 1 ? stats::sample_sd(cols[h]) : 0.0;
  }
  return p;
}

struct ReductionCoefficients {
  double alpha = -0.06534;
  double beta = 0.8078;
  double gamma = 0.005597;  // per second of screentime
  double delta = 0.07303;   // per USD of incentive
  double sigma_xi = 1.2779;

  bool stable() const { return std::fabs(beta) < 1.0; }
  /// Zero-noise fixed point under constant inputs.
  double fixed_point(double screentime_s = 0.0, double incentive_usd = 0.0) const {
    return (alpha + gamma * screentime_s + delta * incentive_usd) / (1.0 - beta);
  }
};

struct EpochInput {
  double screentime_prev_s = 0.0;  // screentime during the previous epoch
  double incentive_usd = 0.0;      // incentive in force this epoch
};

/// R_k for k = 1..H; `noise_seed` empty means xi == 0.
inline std::vector<double> simulate_reduction(const ReductionCoefficients& c, double r0,
                                              std::span<const EpochInput> inputs,
                                              std::optional<std::uint64_t> noise_seed,
                                              Warnings* warnings = nullptr) {
  if (inputs.empty()) throw Error("horizon must be at least one epoch");
  if (!std::isfinite(r0)) throw Error("R_0 must be finite");
  for (const auto& in : inputs)
    if (!std::isfinite(in.screentime_prev_s) || !std::isfinite(in.incentive_usd))
      throw Error("non-finite simulation input");
  if (!c.stable()) warn(warnings, "reduction recursion is unstable (|beta| >= 1)");
  std::mt19937_64 rng(noise_seed.value_or(0));
  std::normal_distribution<double> xi(0.0, 1.0);
  std::vector<double> path;
  path.reserve(inputs.size());
  double r = r0;
  for (const auto& in : inputs) {
    double noise = noise_seed ? c.sigma_xi * xi(rng) : 0.0;
    r = c.alpha + c.beta * r + c.gamma * in.screentime_prev_s + c.delta * in.incentive_usd + noise;
    path.push_back(r);
  }
  return path;
}

enum class ReductionUnits { Percent, Fraction };

struct DemandEpoch {
  Instant t;
  double nonplug_kw = 0.0;
  double plug_kw = 0.0;
  double total_kw = 0.0;
  double reduction = 0.0;  // R_k
  EpochInput input;
};

struct DemandPath {
  std::vector<DemandEpoch> epochs;
};

struct DemandOptions {
  double plug_fraction = 0.5;  // f_p
  ReductionUnits units = ReductionUnits::Percent;
  Instant start{};             // t_0, taken as local midnight
};

// Base load L(k) is the building load before any plugload reduction. The
// non-plugload part repeats with the 24 h period, so epochs in the first
// period borrow the profile mean for their hour.
inline DemandPath integrate_demand(const CyclostationaryProfile& profile,
                                   std::span<const double> reduction_path,
                                   std::span<const double> base_kw,
                                   std::span<const EpochInput> inputs,
                                   const DemandOptions& opt = {}) {
  const double fp = opt.plug_fraction;
  if (!(fp > 0.0 && fp < 1.0)) throw Error("plug fraction f_p must be in (0, 1)");
  if (base_kw.size() != reduction_path.size())
    throw Error("base load and reduction path differ in length");
  DemandPath out;
  out.epochs.reserve(base_kw.size());
  for (std::size_t k = 0; k < base_kw.size(); ++k) {
    const double lagged = k >= static_cast<std::size_t>(kEpochsPerPeriod)
                              ? base_kw[k - kEpochsPerPeriod]
                              : profile.hours[k % kEpochsPerPeriod].mean_kw;
    double eta = opt.units == ReductionUnits::Percent ? reduction_path[k] / 100.0 : reduction_path[k];
    eta = std::min(eta, 1.0);
    DemandEpoch e;
    e.t = opt.start + Seconds{static_cast<std::int64_t>(k) * kEpochS};
    e.nonplug_kw = (1.0 - fp) * lagged;
    e.plug_kw = (1.0 - eta) * fp * base_kw[k];
    e.total_kw = e.nonplug_kw + e.plug_kw;
    e.reduction = reduction_path[k];
    if (k < inputs.size()) e.input = inputs[k];
    out.epochs.push_back(e);
  }
  return out;
}

/// Base load repeating the profile's hourly means.
inline std::vector<double> profile_base_series(const CyclostationaryProfile& profile,
                                               std::size_t horizon) {
  std::vector<double> out(horizon);
  for (std::size_t k = 0; k < horizon; ++k) out[k] = profile.hours[k % kEpochsPerPeriod].mean_kw;
  return out;
}

struct RolloutConfig {
  CyclostationaryProfile profile = CyclostationaryProfile::medium_office();
  ReductionCoefficients coeffs;
  DemandOptions demand;
  double r0 = 0.0;
  std::size_t horizon = 168;
  std::vector<EpochInput> inputs;  // repeated cyclically to cover the horizon
  std::size_t n_monte_carlo = 200;
  std::uint64_t seed = 1;
  bool stochastic = true;  // false: xi == 0 for every draw
};

struct Band {
  double mean = 0.0;
  double p05 = 0.0;
  double p95 = 0.0;
};

struct RolloutSummary {
  std::vector<Band> total_kw;   // per epoch
  std::vector<Band> plug_kw;    // per epoch
  std::vector<Band> reduction;  // per epoch
  Band daily_kwh;               // across draws
  Band peak_kw;                 // across draws
  DemandPath deterministic;     // zero-noise path
};

inline std::vector<EpochInput> expand_inputs(std::span<const EpochInput> scenario,
                                             std::size_t horizon) {
  std::vector<EpochInput> out(horizon);
  if (scenario.empty()) return out;
  for (std::size_t k = 0; k < horizon; ++k) out[k] = scenario[k % scenario.size()];
  return out;
}

inline Band band_of(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  return {stats::mean(xs), stats::quantile_sorted(xs, 0.05), stats::quantile_sorted(xs, 0.95)};
}

// Draw i seeds its own generator from (seed, i), so results do not depend on
// evaluation order.
inline std::uint64_t draw_seed(std::uint64_t seed, std::uint64_t draw) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (draw + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline RolloutSummary policy_rollout(const RolloutConfig& cfg) {
  if (cfg.n_monte_carlo < 1) throw Error("n_monte_carlo must be >= 1");
  if (cfg.horizon < 1) throw Error("horizon must be >= 1");
  const auto inputs = expand_inputs(cfg.inputs, cfg.horizon);
  const auto base = profile_base_series(cfg.profile, cfg.horizon);
  const std::size_t h = cfg.horizon, m = cfg.n_monte_carlo;

  RolloutSummary out;
  auto det_r = simulate_reduction(cfg.coeffs, cfg.r0, inputs, std::nullopt);
  out.deterministic = integrate_demand(cfg.profile, det_r, base, inputs, cfg.demand);

  std::vector<std::vector<double>> total(h, std::vector<double>(m));
  std::vector<std::vector<double>> plug(h, std::vector<double>(m));
  std::vector<std::vector<double>> red(h, std::vector<double>(m));
  std::vector<double> daily(m), peak(m);
  const double days = static_cast<double>(h) * kEpochS / kLoadPeriodS;
  for (std::size_t i = 0; i < m; ++i) {
    auto r = cfg.stochastic
                 ? simulate_reduction(cfg.coeffs, cfg.r0, inputs, draw_seed(cfg.seed, i))
                 : det_r;
    auto path = integrate_demand(cfg.profile, r, base, inputs, cfg.demand);
    double energy = 0.0, pk = 0.0;
    for (std::size_t k = 0; k < h; ++k) {
      const auto& e = path.epochs[k];
      total[k][i] = e.total_kw;
      plug[k][i] = e.plug_kw;
      red[k][i] = e.reduction;
      energy += e.total_kw * (kEpochS / 3600.0);
      pk = std::max(pk, e.total_kw);
    }
    daily[i] = energy / days;
    peak[i] = pk;
  }
  for (std::size_t k = 0; k < h; ++k) {
    out.total_kw.push_back(band_of(std::move(total[k])));
    out.plug_kw.push_back(band_of(std::move(plug[k])));
    out.reduction.push_back(band_of(std::move(red[k])));
  }
  out.daily_kwh = band_of(std::move(daily));
  out.peak_kw = band_of(std::move(peak));
  return out;
}

}  // namespace plugwatt
