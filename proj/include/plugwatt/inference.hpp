#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "plugwatt/aggregation.hpp"
#include "plugwatt/stats.hpp"
#include "plugwatt/student_t.hpp"

namespace plugwatt {

struct Observation {
  std::string participant_id;
  Date day;
  int weekday = 0;
  double baseline_watts = 0.0;
  double expt_watts = 0.0;
  double diff_watts = 0.0;  // baseline - experiment
};

struct DifferentialSample {
  Site site = Site::Nasa;
  std::string phase_label;
  std::vector<Observation> observations;
  double baseline_pool_mean_watts = 0.0;

  std::vector<double> diffs() const {
    std::vector<double> out;
    out.reserve(observations.size());
    for (const auto& o : observations) out.push_back(o.diff_watts);
    return out;
  }
};

struct TestResult {
  std::size_t n = 0;
  std::size_t df = 0;
  double mean_diff_watts = 0.0;
  double sd_diff_watts = 0.0;
  double t_stat = 0.0;
  double p_two_tailed = 1.0;
  Interval ci95_watts;
  Interval ci95_pct;
  double mean_reduction_pct = 0.0;
  double baseline_pool_mean_watts = 0.0;
};

/// Matched pairs across all participants for one experiment phase, sorted
/// by participant then date.
inline DifferentialSample build_differential_sample(const ReadingIndex& index,
                                                    const PhaseCalendar& calendar, Site site,
                                                    const std::string& expt_phase,
                                                    const SiteClock& clock,
                                                    BaselineReference ref = BaselineReference::DisjointOccurrences) {
  const Phase* baseline = calendar.baseline(site);
  const Phase* expt = calendar.resolve(site, expt_phase);
  if (!baseline) throw Error("no baseline phase for site " + std::string(to_string(site)));
  if (!expt) throw Error("unknown phase '" + expt_phase + "' at " + std::string(to_string(site)));
  if (expt->kind == PhaseKind::Baseline) throw Error("experiment phase cannot be the baseline");

  DifferentialSample out;
  out.site = site;
  out.phase_label = expt->label;
  for (const auto& p : index.participants()) {
    for (const auto& pair : weekday_matched_pairs(index, *baseline, *expt, p, clock, ref))
      out.observations.push_back({p, pair.expt_day, pair.weekday, pair.baseline_mean,
                                  pair.expt_mean, pair.diff()});
  }
  if (out.observations.size() < 2)
    throw InsufficientSample("insufficient sample: " + std::to_string(out.observations.size()) +
                             " matched pair(s) for phase " + expt->label);
  double s = 0.0;
  for (const auto& o : out.observations) s += o.baseline_watts;
  out.baseline_pool_mean_watts = s / static_cast<double>(out.observations.size());
  return out;
}

inline double t_critical_975(double df) { return dist::student_t_quantile(0.975, df); }

/// Two-tailed paired t-test on the differences, with 95% intervals.
inline TestResult paired_t_test(std::span<const double> diffs, double baseline_pool_mean_watts) {
  if (diffs.size() < 2) throw InsufficientSample("paired t-test needs n >= 2");
  TestResult r;
  r.n = diffs.size();
  r.df = r.n - 1;
  r.baseline_pool_mean_watts = baseline_pool_mean_watts;
  r.mean_diff_watts = stats::mean(diffs);
  r.sd_diff_watts = stats::sample_sd(diffs);
  const double se = r.sd_diff_watts / std::sqrt(static_cast<double>(r.n));
  if (se == 0.0) {
    r.t_stat = r.mean_diff_watts == 0.0
                   ? 0.0
                   : std::copysign(std::numeric_limits<double>::infinity(), r.mean_diff_watts);
    r.p_two_tailed = r.mean_diff_watts == 0.0 ? 1.0 : 0.0;
    r.ci95_watts = {r.mean_diff_watts, r.mean_diff_watts};
  } else {
    r.t_stat = r.mean_diff_watts / se;
    r.p_two_tailed = dist::student_t_two_tailed(r.t_stat, static_cast<double>(r.df));
    const double half = t_critical_975(static_cast<double>(r.df)) * se;
    r.ci95_watts = {r.mean_diff_watts - half, r.mean_diff_watts + half};
  }
  const double b = baseline_pool_mean_watts;
  r.ci95_pct = {100.0 * r.ci95_watts.lo / b, 100.0 * r.ci95_watts.hi / b};
  r.mean_reduction_pct = 100.0 * r.mean_diff_watts / b;
  return r;
}

inline TestResult paired_t_test(const DifferentialSample& sample) {
  auto d = sample.diffs();
  return paired_t_test(d, sample.baseline_pool_mean_watts);
}

struct SummaryStats {
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0, mean = 0;
  std::size_t n = 0;
};

inline double kwh_per_day(double mean_watts) { return mean_watts * 24.0 / 1000.0; }

/// Box summary of daily kWh over every (participant, day) in the phase.
inline SummaryStats summarize_daily_kwh(std::span<const double> daily_mean_watts) {
  if (daily_mean_watts.empty()) throw InsufficientSample("phase has no daily means");
  std::vector<double> kwh;
  kwh.reserve(daily_mean_watts.size());
  for (double w : daily_mean_watts) kwh.push_back(kwh_per_day(w));
  auto f = stats::five_number(std::move(kwh));
  return {f.min, f.q1, f.median, f.q3, f.max, f.mean, f.n};
}

inline SummaryStats summarize_phase(const ReadingIndex& index, const Phase& phase,
                                    const SiteClock& clock) {
  std::vector<double> watts;
  for (const auto& d : daily_means(index, phase, clock)) watts.push_back(d.mean_watts);
  if (watts.empty()) throw InsufficientSample("phase " + phase.label + " has no data");
  return summarize_daily_kwh(watts);
}

// ---------------------------------------------------------------------------
// Consistency of published summaries

struct PublishedResult {
  std::string label;
  std::size_t df = 0;
  double t = 0.0;
  double p = 0.0;
  double baseline_mean_w = 0.0;
  Interval ci_w;
  Interval ci_pct;
  double mean_reduction_pct = 0.0;
};

/// Summary statistics reported for the 2016 field study.
inline std::vector<PublishedResult> field_study_results() {
  return {
      {"NASA feedback (P3N)", 86, 3.64, 4.61e-4, 51.51, {2.22, 7.57}, {4.32, 14.71}, 9.52},
      {"CMU incentive (P2C)", 74, 1.62, 0.11, 61.09, {-1.84, 17.63}, {-3.01, 28.87}, 12.93},
      {"CMU feedback (P3C)", 75, 2.26, 0.03, 61.09, {1.58, 24.82}, {2.59, 40.63}, 21.61},
      {"CMU feedback+incentive (P4C)", 67, 2.30, 0.02, 61.09, {1.96, 27.63}, {3.21, 45.24}, 24.22},
  };
}

struct ConsistencyRow {
  PublishedResult published;
  std::size_t n = 0;
  double mean_diff_w = 0.0;      // midpoint of the published CI
  double implied_sd_w = 0.0;     // from mean, t and n
  double t_crit = 0.0;
  Interval implied_ci_w;         // mean +- t_crit * sd / sqrt(n)
  double p = 0.0;                // two-tailed p from t and df
  Interval ci_pct;               // published watt CI over baseline mean
  double mean_reduction_pct = 0.0;

  double ci_w_delta() const {
    return std::max(std::fabs(implied_ci_w.lo - published.ci_w.lo),
                    std::fabs(implied_ci_w.hi - published.ci_w.hi));
  }
  double ci_pct_delta() const {
    return std::max(std::fabs(ci_pct.lo - published.ci_pct.lo),
                    std::fabs(ci_pct.hi - published.ci_pct.hi));
  }
  double p_delta() const { return std::fabs(p - published.p); }
  double reduction_delta() const {
    return std::fabs(mean_reduction_pct - published.mean_reduction_pct);
  }
};

inline ConsistencyRow check_published(const PublishedResult& pub) {
  ConsistencyRow r;
  r.published = pub;
  r.n = pub.df + 1;
  r.mean_diff_w = pub.ci_w.mid();
  const double root_n = std::sqrt(static_cast<double>(r.n));
  r.implied_sd_w = r.mean_diff_w * root_n / pub.t;
  r.t_crit = t_critical_975(static_cast<double>(pub.df));
  const double half = r.t_crit * r.implied_sd_w / root_n;
  r.implied_ci_w = {r.mean_diff_w - half, r.mean_diff_w + half};
  r.p = dist::student_t_two_tailed(pub.t, static_cast<double>(pub.df));
  r.ci_pct = {100.0 * pub.ci_w.lo / pub.baseline_mean_w, 100.0 * pub.ci_w.hi / pub.baseline_mean_w};
  r.mean_reduction_pct = 100.0 * r.mean_diff_w / pub.baseline_mean_w;
  return r;
}

inline std::vector<ConsistencyRow> consistency_report(
    std::span<const PublishedResult> published = {}) {
  std::vector<PublishedResult> rows(published.begin(), published.end());
  if (rows.empty()) rows = field_study_results();
  std::vector<ConsistencyRow> out;
  for (const auto& p : rows) out.push_back(check_published(p));
  return out;
}

}  // namespace plugwatt
