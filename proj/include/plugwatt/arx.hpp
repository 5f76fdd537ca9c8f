#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "plugwatt/aggregation.hpp"
#include "plugwatt/ols.hpp"
#include "plugwatt/stats.hpp"

namespace plugwatt {

enum class IncentiveTiming { SameHour, PreviousHour };

struct ArxSpec {
  int n_lags = 1;
  bool screentime = true;
  bool incentive = false;
  IncentiveTiming incentive_timing = IncentiveTiming::SameHour;
};

/// One hour of the pool-level series the model is fitted on.
struct HourlyPoint {
  std::optional<double> target;      // baseline pool mean - experiment pool mean (W)
  std::optional<double> expt_power;  // experiment pool mean (W)
  double screentime_prev_s = 0.0;    // pool mean screentime over the previous hour
  double incentive_usd = 0.0;        // incentive in force this hour
  double incentive_prev_usd = 0.0;   // incentive in force the previous hour
};

struct ArxDay {
  Date day;
  std::array<HourlyPoint, 24> hours{};  // index 0 is hour 1
};

using HourlySeries = std::vector<ArxDay>;

enum class Split { Train, Test };

struct ArxRow {
  Date day;
  int hour = 0;  // 1..24
  double target = 0.0;
  std::vector<double> lags;  // lags[0] is the previous hour
  double screentime = 0.0;
  double incentive = 0.0;
  double expt_power = 0.0;
  Split split = Split::Train;
};

struct ArxDataset {
  ArxSpec spec;
  std::vector<ArxRow> rows;

  std::size_t count(Split s) const {
    std::size_t n = 0;
    for (const auto& r : rows) n += r.split == s;
    return n;
  }
  std::vector<ArxRow> subset(Split s) const {
    std::vector<ArxRow> out;
    for (const auto& r : rows)
      if (r.split == s) out.push_back(r);
    return out;
  }
};

struct ArxCoefficients {
  double alpha = 0.0;
  std::vector<double> beta;
  std::optional<double> gamma;  // W per second of screentime
  std::optional<double> delta;  // W per USD
  double sigma_eps = 0.0;
  std::vector<std::string> columns;
  std::vector<double> std_err;  // aligned with columns
  std::size_t train_rows = 0;
};

/// Pool-level hourly series for the experiment phases at `site`.
/// Each target compares the experiment hour with the mean of the baseline
/// pool over baseline days sharing the same weekday.
inline HourlySeries build_hourly_series(const ReadingIndex& index,
                                        const ScreentimeIndex& screentime,
                                        const PhaseCalendar& calendar,
                                        const IncentiveSchedule& incentives, Site site,
                                        std::span<const std::string> expt_phases,
                                        const SiteClock& clock) {
  const Phase* baseline = calendar.baseline(site);
  if (!baseline) throw Error("no baseline phase for site " + std::string(to_string(site)));
  auto participants = index.participants();

  std::array<std::array<double, 24>, 7> ref_sum{};
  std::array<std::array<int, 24>, 7> ref_n{};
  for (Date d : baseline->days()) {
    int wd = weekday_index(d);
    for (int h = 1; h <= 24; ++h) {
      if (auto m = pool_hourly_mean(index, participants, d, h, clock)) {
        ref_sum[wd][h - 1] += *m;
        ++ref_n[wd][h - 1];
      }
    }
  }

  std::vector<const Phase*> phases;
  if (expt_phases.empty()) {
    for (const auto& p : calendar.phases())
      if (p.site == site && p.kind != PhaseKind::Baseline) phases.push_back(&p);
  } else {
    for (const auto& label : expt_phases) {
      const Phase* p = calendar.resolve(site, label);
      if (!p) throw Error("unknown phase '" + label + "'");
      phases.push_back(p);
    }
  }
  std::sort(phases.begin(), phases.end(),
            [](const Phase* a, const Phase* b) { return a->start_date < b->start_date; });

  HourlySeries out;
  bool any_overlap = false;
  for (const Phase* phase : phases) {
    const bool paid = bears_incentive(phase->kind);
    for (Date d : phase->days()) {
      int wd = weekday_index(d);
      ArxDay day{d, {}};
      double inc_today = paid ? incentives.amount_on(d).value_or(0) : 0.0;
      double inc_yesterday = 0.0;
      if (const Phase* prev = calendar.phase_at(site, d - std::chrono::days{1});
          prev && bears_incentive(prev->kind))
        inc_yesterday = incentives.amount_on(d - std::chrono::days{1}).value_or(0);
      for (int h = 1; h <= 24; ++h) {
        auto& pt = day.hours[h - 1];
        pt.incentive_usd = inc_today;
        pt.incentive_prev_usd = h == 1 ? inc_yesterday : inc_today;
        Instant prev_from = clock.at(d, kSecondsPerHour * (h - 2));
        Instant prev_to = clock.at(d, kSecondsPerHour * (h - 1));
        if (!participants.empty()) {
          double st = 0.0;
          for (const auto& p : participants)
            if (screentime.knows(p)) st += static_cast<double>(screentime.seconds_in(p, prev_from, prev_to));
          pt.screentime_prev_s = st / static_cast<double>(participants.size());
        }
        auto expt = pool_hourly_mean(index, participants, d, h, clock);
        if (ref_n[wd][h - 1] > 0) any_overlap = true;
        if (!expt || ref_n[wd][h - 1] == 0) continue;
        double ref = ref_sum[wd][h - 1] / ref_n[wd][h - 1];
        pt.expt_power = *expt;
        pt.target = ref - *expt;
      }
      out.push_back(day);
    }
  }
  if (!any_overlap) throw Error("experiment and baseline phases share no weekday coverage");
  return out;
}

/// Regression rows: lags chain only within a day, so the first `n_lags`
/// hours of every contiguous run seed the lags.
inline ArxDataset make_dataset(const HourlySeries& series, const ArxSpec& spec) {
  if (spec.n_lags < 1) throw Error("n_lags must be >= 1");
  ArxDataset ds{spec, {}};
  for (const auto& day : series) {
    for (int h = spec.n_lags + 1; h <= 24; ++h) {
      const auto& pt = day.hours[h - 1];
      if (!pt.target) continue;
      ArxRow row;
      row.day = day.day;
      row.hour = h;
      row.target = *pt.target;
      bool ok = true;
      for (int l = 1; l <= spec.n_lags; ++l) {
        const auto& prev = day.hours[h - 1 - l];
        if (!prev.target) {
          ok = false;
          break;
        }
        row.lags.push_back(*prev.target);
      }
      if (!ok) continue;
      row.screentime = pt.screentime_prev_s;
      row.incentive = spec.incentive_timing == IncentiveTiming::SameHour ? pt.incentive_usd
                                                                          : pt.incentive_prev_usd;
      row.expt_power = pt.expt_power.value_or(0.0);
      ds.rows.push_back(std::move(row));
    }
  }
  return ds;
}

inline ArxDataset build_arx_dataset(const ReadingIndex& index, const ScreentimeIndex& screentime,
                                    const PhaseCalendar& calendar,
                                    const IncentiveSchedule& incentives, Site site,
                                    std::span<const std::string> expt_phases, const ArxSpec& spec,
                                    const SiteClock& clock) {
  return make_dataset(
      build_hourly_series(index, screentime, calendar, incentives, site, expt_phases, clock), spec);
}

/// Chronological split: the earliest `frac` of rows train, the rest test.
inline ArxDataset split_train_test(ArxDataset ds, double frac = 0.7) {
  if (!(frac > 0.0 && frac < 1.0)) throw Error("split fraction must be in (0, 1)");
  const std::size_t n = ds.rows.size();
  const auto n_train = static_cast<std::size_t>(std::floor(frac * static_cast<double>(n) + 1e-9));
  if (n - n_train < 2) throw InsufficientSample("split leaves fewer than 2 test rows");
  for (std::size_t i = 0; i < n; ++i) ds.rows[i].split = i < n_train ? Split::Train : Split::Test;
  return ds;
}

inline std::vector<std::string> design_columns(const ArxSpec& spec) {
  std::vector<std::string> cols{"intercept"};
  for (int l = 1; l <= spec.n_lags; ++l) cols.push_back("lag" + std::to_string(l));
  if (spec.screentime) cols.push_back("screentime");
  if (spec.incentive) cols.push_back("incentive");
  return cols;
}

inline Matrix design_matrix(const ArxSpec& spec, std::span<const ArxRow> rows) {
  Matrix x(rows.size(), design_columns(spec).size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::size_t c = 0;
    x(i, c++) = 1.0;
    for (int l = 0; l < spec.n_lags; ++l) x(i, c++) = rows[i].lags.at(static_cast<std::size_t>(l));
    if (spec.screentime) x(i, c++) = rows[i].screentime;
    if (spec.incentive) x(i, c++) = rows[i].incentive;
  }
  return x;
}

inline ArxCoefficients coefficients_from(const ArxSpec& spec, const OlsFit& fit) {
  ArxCoefficients c;
  c.columns = design_columns(spec);
  std::size_t j = 0;
  c.alpha = fit.coef[j++];
  for (int l = 0; l < spec.n_lags; ++l) c.beta.push_back(fit.coef[j++]);
  if (spec.screentime) c.gamma = fit.coef[j++];
  if (spec.incentive) c.delta = fit.coef[j++];
  c.sigma_eps = fit.sigma;
  c.std_err = fit.std_err;
  c.train_rows = fit.n;
  return c;
}

/// OLS on the training rows (all rows when nothing is tagged test).
inline ArxCoefficients fit_ols(const ArxDataset& ds, OlsFit* fit_out = nullptr) {
  auto train = ds.subset(Split::Train);
  std::vector<double> y;
  y.reserve(train.size());
  for (const auto& r : train) y.push_back(r.target);
  auto cols = design_columns(ds.spec);
  if (train.size() < cols.size() + 1)
    throw InsufficientSample("fit needs at least " + std::to_string(cols.size() + 1) +
                             " training rows, got " + std::to_string(train.size()));
  auto fit = ordinary_least_squares(design_matrix(ds.spec, train), y, cols);
  auto c = coefficients_from(ds.spec, fit);
  if (fit_out) *fit_out = std::move(fit);
  return c;
}

struct Prediction {
  double point = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

inline Prediction predict(const ArxCoefficients& c, std::span<const double> prev_diffs,
                          double screentime_prev, double incentive_now) {
  if (prev_diffs.size() < c.beta.size()) throw Error("predict: not enough lagged values");
  double point = c.alpha;
  for (std::size_t l = 0; l < c.beta.size(); ++l) point += c.beta[l] * prev_diffs[l];
  if (c.gamma) point += *c.gamma * screentime_prev;
  if (c.delta) point += *c.delta * incentive_now;
  const double half = 1.96 * c.sigma_eps;
  return {point, point - half, point + half};
}

inline Prediction predict(const ArxCoefficients& c, double prev_diff, double screentime_prev,
                          double incentive_now) {
  std::vector<double> lags(std::max<std::size_t>(c.beta.size(), 1), 0.0);
  lags[0] = prev_diff;
  return predict(c, lags, screentime_prev, incentive_now);
}

inline Prediction predict(const ArxCoefficients& c, const ArxRow& row) {
  return predict(c, row.lags, row.screentime, row.incentive);
}

struct Evaluation {
  std::size_t n = 0;
  double rmse = 0.0;
  double rms_accuracy_pct = 0.0;
  Interval mean_interval95;  // mean lower and upper prediction bounds
};

// Accuracy is 100 * (1 - rmse / mean |observed experiment power|).
inline Evaluation evaluate(const ArxCoefficients& c, std::span<const ArxRow> test_rows) {
  if (test_rows.empty()) throw InsufficientSample("empty test set");
  Evaluation e;
  e.n = test_rows.size();
  double sq = 0.0, lo = 0.0, hi = 0.0, abs_obs = 0.0;
  for (const auto& r : test_rows) {
    auto p = predict(c, r);
    sq += (r.target - p.point) * (r.target - p.point);
    lo += p.lo;
    hi += p.hi;
    abs_obs += std::fabs(r.expt_power);
  }
  const double n = static_cast<double>(e.n);
  e.rmse = std::sqrt(sq / n);
  e.mean_interval95 = {lo / n, hi / n};
  e.rms_accuracy_pct = abs_obs > 0 ? 100.0 * (1.0 - e.rmse / (abs_obs / n))
                                   : std::numeric_limits<double>::quiet_NaN();
  return e;
}

inline double lag1_autocorrelation(std::span<const double> xs) {
  if (xs.size() < 3) throw InsufficientSample("autocorrelation needs at least 3 values");
  return stats::pearson(xs.subspan(1), xs.first(xs.size() - 1));
}

/// Lag-1 autocorrelation of residuals, pairing only consecutive hours of a day.
inline double residual_autocorrelation(std::span<const ArxRow> rows,
                                       std::span<const double> residuals) {
  std::vector<double> now, prev;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].day == rows[i - 1].day && rows[i].hour == rows[i - 1].hour + 1) {
      now.push_back(residuals[i]);
      prev.push_back(residuals[i - 1]);
    }
  }
  return stats::pearson(now, prev);
}

struct LagDiagnostic {
  int n_lags = 0;
  double lag1_autocorr = 0.0;
  double rmse = 0.0;
  std::size_t train_rows = 0;
};

/// Refits with 1..max_lags lagged targets; reports residual autocorrelation
/// on the training fit and test RMSE for each.
inline std::vector<LagDiagnostic> residual_lag_profile(const HourlySeries& series, ArxSpec spec,
                                                       int max_lags = 6, double frac = 0.7,
                                                       Warnings* warnings = nullptr) {
  if (max_lags < 1) throw Error("max_lags must be >= 1");
  std::vector<LagDiagnostic> out;
  for (int l = 1; l <= max_lags; ++l) {
    spec.n_lags = l;
    try {
      auto ds = split_train_test(make_dataset(series, spec), frac);
      OlsFit fit;
      auto c = fit_ols(ds, &fit);
      auto train = ds.subset(Split::Train);
      auto test = ds.subset(Split::Test);
      out.push_back({l, residual_autocorrelation(train, fit.residuals), evaluate(c, test).rmse,
                     train.size()});
    } catch (const InsufficientSample& e) {
      warn(warnings, "residual lag profile truncated at " + std::to_string(l - 1) +
                         " lags: " + e.what());
      break;
    }
  }
  return out;
}

}  // namespace plugwatt
