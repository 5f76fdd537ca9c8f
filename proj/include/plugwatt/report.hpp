#pragma once

#include <string>

#include "json.hpp"
#include "plugwatt/arx.hpp"
#include "plugwatt/demand.hpp"
#include "plugwatt/inference.hpp"

namespace plugwatt::report {

using nlohmann::json;

inline json interval(const Interval& i) { return json::array({i.lo, i.hi}); }

inline json band(const Band& b) { return {{"mean", b.mean}, {"p05", b.p05}, {"p95", b.p95}}; }

inline json test_result(const TestResult& r) {
  return {{"n", r.n},
          {"df", r.df},
          {"mean_diff_w", r.mean_diff_watts},
          {"sd_w", r.sd_diff_watts},
          {"t", r.t_stat},
          {"p", r.p_two_tailed},
          {"ci95_w", interval(r.ci95_watts)},
          {"ci95_pct", interval(r.ci95_pct)},
          {"mean_reduction_pct", r.mean_reduction_pct},
          {"baseline_pool_mean_w", r.baseline_pool_mean_watts}};
}

inline json summary(const SummaryStats& s) {
  return {{"n", s.n},     {"min", s.min}, {"q1", s.q1},    {"median", s.median},
          {"q3", s.q3},   {"max", s.max}, {"mean", s.mean}};
}

inline json consistency(const ConsistencyRow& r) {
  return {{"label", r.published.label},
          {"df", r.published.df},
          {"t", r.published.t},
          {"mean_diff_w", r.mean_diff_w},
          {"implied_sd_w", r.implied_sd_w},
          {"implied_ci_w", interval(r.implied_ci_w)},
          {"published_ci_w", interval(r.published.ci_w)},
          {"p", r.p},
          {"published_p", r.published.p},
          {"ci_pct", interval(r.ci_pct)},
          {"published_ci_pct", interval(r.published.ci_pct)},
          {"mean_reduction_pct", r.mean_reduction_pct},
          {"published_mean_reduction_pct", r.published.mean_reduction_pct},
          {"deltas",
           {{"ci_w", r.ci_w_delta()},
            {"ci_pct", r.ci_pct_delta()},
            {"p", r.p_delta()},
            {"mean_reduction_pct", r.reduction_delta()}}}};
}

inline json coefficients(const ArxCoefficients& c) {
  json se = json::object();
  for (std::size_t i = 0; i < c.columns.size() && i < c.std_err.size(); ++i) se[c.columns[i]] = c.std_err[i];
  return {{"alpha", c.alpha},
          {"beta", c.beta},
          {"gamma", c.gamma ? json(*c.gamma) : json(nullptr)},
          {"delta", c.delta ? json(*c.delta) : json(nullptr)},
          {"sigma_eps", c.sigma_eps},
          {"std_err", se},
          {"train_rows", c.train_rows}};
}

inline json evaluation(const Evaluation& e) {
  return {{"n", e.n},
          {"rmse_w", e.rmse},
          {"rms_accuracy_pct", e.rms_accuracy_pct},
          {"mean_interval95_w", interval(e.mean_interval95)}};
}

inline json rollout(const RolloutSummary& s) {
  json epochs = json::array();
  for (std::size_t k = 0; k < s.total_kw.size(); ++k) {
    const auto& d = s.deterministic.epochs[k];
    epochs.push_back({{"k", k + 1},
                      {"t", format_instant(d.t)},
                      {"total_kw", band(s.total_kw[k])},
                      {"plug_kw", band(s.plug_kw[k])},
                      {"reduction", band(s.reduction[k])},
                      {"deterministic",
                       {{"total_kw", d.total_kw}, {"nonplug_kw", d.nonplug_kw}, {"plug_kw", d.plug_kw},
                        {"reduction", d.reduction}}}});
  }
  return {{"daily_kwh", band(s.daily_kwh)}, {"peak_kw", band(s.peak_kw)}, {"epochs", epochs}};
}

}  // namespace plugwatt::report
