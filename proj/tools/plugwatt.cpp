#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "plugwatt/arx.hpp"
#include "plugwatt/demand.hpp"
#include "plugwatt/http.hpp"
#include "plugwatt/inference.hpp"
#include "plugwatt/ingest.hpp"
#include "plugwatt/report.hpp"
#include "plugwatt/service.hpp"
#include "plugwatt/synth.hpp"
#include "svg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace plugwatt;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitUsage = 64;

// Raised for inputs that parse but fail domain checks; maps to exit 2.
struct Invalid : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_file(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error("cannot write " + p.string());
  f << text;
}

void print_warnings(const Warnings& w) {
  for (const auto& m : w.messages) std::fprintf(stderr, "warning: %s\n", m.c_str());
}

LoadedDataset load_valid(const fs::path& dir) {
  LoadedDataset ds;
  try {
    ds = load_dataset(dir);
  } catch (const ParseError& e) {
    throw Invalid(e.what());
  }
  if (!ds.report.accepted()) {
    std::string why;
    for (const auto& [k, n] : ds.report.violations) why += " " + k + "=" + std::to_string(n);
    throw Invalid("dataset " + dir.string() + " failed validation:" + why);
  }
  return ds;
}

Site require_site(const std::string& name) {
  auto s = parse_site(name);
  if (!s) throw Invalid("unknown site '" + name + "' (expected nasa or cmu)");
  return *s;
}

SiteClock clock_for(const LoadedDataset& ds, const std::string& tz_flag) {
  const std::string tz = !tz_flag.empty() ? tz_flag : ds.manifest.timezone;
  try {
    return SiteClock::from_name(tz);
  } catch (const Error& e) {
    throw Invalid(e.what());
  }
}

std::vector<std::string> experiment_labels(const PhaseCalendar& cal, Site site) {
  std::vector<std::string> out;
  for (const auto& p : cal.at_site(site))
    if (p.kind != PhaseKind::Baseline) out.push_back(p.label);
  return out;
}

bool site_has_incentives(const PhaseCalendar& cal, Site site) {
  for (const auto& p : cal.at_site(site))
    if (bears_incentive(p.kind)) return true;
  return false;
}

std::string join_labels(const std::vector<std::string>& xs) {
  std::string out;
  for (const auto& x : xs) out += (out.empty() ? "" : ",") + x;
  return out;
}

// ---------------------------------------------------------------------------
// synth

struct SynthOpts {
  std::string out;
  std::size_t participants = 16;
  std::uint64_t seed = 1;
  std::int64_t period_s = 60;
  std::string calendar = "field-2016";
  std::string site = "cmu";
  std::string start = "2016-09-12";
  int baseline_weeks = 4;
  std::vector<std::string> blocks{"feedback:4"};
  std::map<std::string, double> reduction{{"incentive", 0.10}, {"feedback", 0.10}, {"both", 0.20}};
  std::string tz = "America/Los_Angeles";
  bool arx_mode = false;
};

int run_synth(const SynthOpts& o) {
  SynthConfig cfg;
  cfg.n_participants = o.participants;
  cfg.seed = o.seed;
  cfg.sample_period_s = o.period_s;
  cfg.timezone = o.tz;
  cfg.arx_mode = o.arx_mode;
  for (const auto& [k, r] : o.reduction) {
    auto kind = parse_phase_kind(k);
    if (!kind) throw Invalid("unknown phase kind '" + k + "' in --reduction");
    cfg.reduction[*kind] = r;
  }
  if (o.calendar == "field-2016") {
    cfg.calendar = PhaseCalendar{PhaseCalendar::field_2016().at_site(require_site(o.site))};
  } else if (o.calendar == "consecutive") {
    auto start = parse_date(o.start);
    if (!start) throw Invalid("bad --start date '" + o.start + "'");
    std::vector<std::pair<PhaseKind, int>> blocks;
    for (const auto& b : o.blocks) {
      auto colon = b.find(':');
      auto kind = parse_phase_kind(b.substr(0, colon));
      if (colon == std::string::npos || !kind || *kind == PhaseKind::Baseline)
        throw Invalid("--block expects kind:weeks, got '" + b + "'");
      blocks.push_back({*kind, std::stoi(b.substr(colon + 1))});
    }
    try {
      cfg.calendar = consecutive_calendar(require_site(o.site), *start, o.baseline_weeks, blocks);
    } catch (const Error& e) {
      throw Invalid(e.what());
    }
  } else {
    throw Invalid("--calendar must be field-2016 or consecutive");
  }
  try {
    cfg.validate();
    SiteClock::from_name(cfg.timezone);
  } catch (const Error& e) {
    throw Invalid(e.what());
  }

  auto syn = generate_synthetic(cfg);
  print_warnings(syn.warnings);
  Manifest m;
  m.seed = cfg.seed;
  m.timezone = cfg.timezone;
  m.truth = syn.truth;
  save_dataset(syn.data, o.out, m);
  auto loaded = load_dataset(o.out);
  std::printf("wrote %s: %zu participants, %zu readings, %zu sessions, %zu phases\n", o.out.c_str(),
              cfg.n_participants, syn.data.readings.size(), syn.data.sessions.size(),
              syn.data.calendar.phases().size());
  std::printf("manifest hash %s\n", loaded.manifest.hash.c_str());
  return kExitOk;
}

// ---------------------------------------------------------------------------
// validate

int run_validate(const std::string& data) {
  LoadedDataset ds;
  try {
    ds = load_dataset(data);
  } catch (const ParseError& e) {
    std::fprintf(stderr, "invalid: %s\n", e.what());
    return kExitInvalid;
  }
  json out = {{"dataset", data},
              {"manifest_hash", ds.manifest.hash},
              {"accepted", ds.report.accepted()},
              {"readings", ds.data.readings.size()},
              {"sessions", ds.data.sessions.size()},
              {"merged_sessions", ds.report.merged_sessions.size()},
              {"violations", ds.report.violations},
              {"warnings", ds.report.warnings}};
  std::printf("%s\n", out.dump(2).c_str());
  return ds.report.accepted() ? kExitOk : kExitInvalid;
}

// ---------------------------------------------------------------------------
// analyze

struct AnalyzeOpts {
  std::string data, out = ".", site, phase, reference = "disjoint", tz;
};

int run_analyze(const AnalyzeOpts& o) {
  auto ds = load_valid(o.data);
  const Site site = require_site(o.site);
  const auto clock = clock_for(ds, o.tz);
  const Phase* phase = ds.data.calendar.resolve(site, o.phase);
  if (!phase || phase->kind == PhaseKind::Baseline)
    throw Invalid("no experiment phase '" + o.phase + "' at " + std::string(to_string(site)));
  const auto ref =
      o.reference == "mean" ? BaselineReference::WeekdayMean : BaselineReference::DisjointOccurrences;

  ReadingIndex index(ds.data.readings);
  auto sample = build_differential_sample(index, ds.data.calendar, site, phase->label, clock, ref);
  auto result = paired_t_test(sample);
  const Phase* baseline = ds.data.calendar.baseline(site);

  json rows = json::array();
  for (const auto& r : consistency_report()) rows.push_back(report::consistency(r));
  json out = {{"manifest_hash", ds.manifest.hash},
              {"site", to_string(site)},
              {"phase", phase->label},
              {"baseline_reference", o.reference},
              {"result", report::test_result(result)},
              {"daily_kwh",
               {{"baseline", report::summary(summarize_phase(index, *baseline, clock))},
                {"experiment", report::summary(summarize_phase(index, *phase, clock))}}},
              {"published_consistency", rows}};

  std::string obs = "participant_id,date,weekday,baseline_w,experiment_w,diff_w\n";
  for (const auto& ob : sample.observations)
    obs += csv::quote(ob.participant_id) + "," + format_date(ob.day) + "," + std::to_string(ob.weekday) + "," +
           csv::format_double(ob.baseline_watts) + "," + csv::format_double(ob.expt_watts) + "," +
           csv::format_double(ob.diff_watts) + "\n";
  write_file(fs::path(o.out) / "results.json", out.dump(2) + "\n");
  write_file(fs::path(o.out) / "differential.csv", obs);

  std::printf("%s %s vs %s: n=%zu mean diff %.3f W, t(%zu)=%.3f, p=%.4g\n", std::string(to_string(site)).c_str(),
              phase->label.c_str(), baseline->label.c_str(), result.n, result.mean_diff_watts, result.df,
              result.t_stat, result.p_two_tailed);
  std::printf("95%% CI [%.2f, %.2f] W = [%.2f, %.2f]%% of %.2f W baseline pool mean\n", result.ci95_watts.lo,
              result.ci95_watts.hi, result.ci95_pct.lo, result.ci95_pct.hi, result.baseline_pool_mean_watts);
  std::printf("manifest hash %s; wrote %s\n", ds.manifest.hash.c_str(), (fs::path(o.out) / "results.json").c_str());
  return kExitOk;
}

// ---------------------------------------------------------------------------
// fit-arx

struct ArxOpts {
  std::string data, out = ".", site, timing = "h", tz;
  int lags = 1;
  int max_lags = 6;
  std::string incentive = "auto";
  double train_frac = 0.7;
};

struct ArxRun {
  HourlySeries series;
  ArxSpec spec;
  ArxCoefficients coeffs;
  ArxDataset dataset;
  double residual_ac = 0.0;
};

ArxRun fit_site(const LoadedDataset& ds, Site site, const ArxOpts& o, const SiteClock& clock) {
  ArxRun run;
  const auto labels = experiment_labels(ds.data.calendar, site);
  if (labels.empty()) throw Invalid("no experiment phases at " + std::string(to_string(site)));
  ReadingIndex index(ds.data.readings);
  ScreentimeIndex screen(ds.data.sessions);
  run.series = build_hourly_series(index, screen, ds.data.calendar, ds.data.incentives, site, labels, clock);
  run.spec.n_lags = o.lags;
  run.spec.incentive = o.incentive == "auto" ? site_has_incentives(ds.data.calendar, site) : o.incentive == "on";
  run.spec.incentive_timing = o.timing == "h-1" ? IncentiveTiming::PreviousHour : IncentiveTiming::SameHour;
  run.dataset = split_train_test(make_dataset(run.series, run.spec), o.train_frac);
  OlsFit fit;
  run.coeffs = fit_ols(run.dataset, &fit);
  run.residual_ac = residual_autocorrelation(run.dataset.subset(Split::Train), fit.residuals);
  return run;
}

std::string predictions_csv(const ArxRun& run) {
  std::string out = "date,hour,observed_w,predicted_w,lo95_w,hi95_w\n";
  for (const auto& r : run.dataset.subset(Split::Test)) {
    auto p = predict(run.coeffs, r);
    out += format_date(r.day) + "," + std::to_string(r.hour) + "," + csv::format_double(r.target) + "," +
           csv::format_double(p.point) + "," + csv::format_double(p.lo) + "," + csv::format_double(p.hi) + "\n";
  }
  return out;
}

std::string diagnostics_csv(const std::vector<LagDiagnostic>& prof) {
  std::string out = "n_lags,lag1_autocorr,rmse_w,train_rows\n";
  for (const auto& d : prof)
    out += std::to_string(d.n_lags) + "," + csv::format_double(d.lag1_autocorr) + "," +
           csv::format_double(d.rmse) + "," + std::to_string(d.train_rows) + "\n";
  return out;
}

int run_fit_arx(const ArxOpts& o) {
  auto ds = load_valid(o.data);
  const Site site = require_site(o.site);
  if (o.lags < 1 || o.max_lags < 1) throw Invalid("lag counts must be >= 1");
  if (!(o.train_frac > 0 && o.train_frac < 1)) throw Invalid("--train-frac must be in (0, 1)");
  const auto clock = clock_for(ds, o.tz);
  auto run = fit_site(ds, site, o, clock);
  auto eval = evaluate(run.coeffs, run.dataset.subset(Split::Test));
  Warnings w;
  auto prof = residual_lag_profile(run.series, run.spec, o.max_lags, o.train_frac, &w);
  print_warnings(w);

  json model = {{"manifest_hash", ds.manifest.hash},
                {"site", to_string(site)},
                {"phases", experiment_labels(ds.data.calendar, site)},
                {"spec",
                 {{"n_lags", run.spec.n_lags},
                  {"screentime", run.spec.screentime},
                  {"incentive", run.spec.incentive},
                  {"incentive_timing", o.timing},
                  {"train_frac", o.train_frac}}},
                {"coefficients", report::coefficients(run.coeffs)},
                {"test", report::evaluation(eval)},
                {"residual_lag1_autocorr", run.residual_ac},
                {"rows", {{"train", run.dataset.count(Split::Train)}, {"test", run.dataset.count(Split::Test)}}}};
  const fs::path out(o.out);
  write_file(out / "model.json", model.dump(2) + "\n");
  write_file(out / "diagnostics.csv", diagnostics_csv(prof));
  write_file(out / "predictions.csv", predictions_csv(run));

  std::printf("%s ARX(%d) on %s: alpha=%.4f beta1=%.4f", std::string(to_string(site)).c_str(), run.spec.n_lags,
              join_labels(experiment_labels(ds.data.calendar, site)).c_str(), run.coeffs.alpha, run.coeffs.beta[0]);
  if (run.coeffs.gamma) std::printf(" gamma=%.5f", *run.coeffs.gamma);
  if (run.coeffs.delta) std::printf(" delta=%.5f", *run.coeffs.delta);
  std::printf(" sigma=%.3f\n", run.coeffs.sigma_eps);
  std::printf("test rmse %.3f W, accuracy %.1f%%, residual lag-1 autocorrelation %.3f\n", eval.rmse,
              eval.rms_accuracy_pct, run.residual_ac);
  std::printf("manifest hash %s; wrote %s\n", ds.manifest.hash.c_str(), (out / "model.json").c_str());
  return kExitOk;
}

// ---------------------------------------------------------------------------
// simulate-demand

struct DemandOpts {
  std::string out = ".", profile, hourly_load, incentives, units = "percent";
  double fp = 0.5, r0 = 0.0;
  std::size_t horizon = 168, mc = 200;
  std::uint64_t seed = 1;
  bool deterministic = false;
  std::string start = "2016-10-17";
  std::string tz = "America/Los_Angeles";
};

int run_simulate_demand(const DemandOpts& o) {
  RolloutConfig cfg;
  json inputs = json::object();
  try {
    if (!o.profile.empty()) {
      cfg.profile = parse_profile(csv::read_file(o.profile));
      inputs["profile"] = {{"file", o.profile}, {"hash", detail::hex64(detail::fnv1a(detail::slurp(o.profile)))}};
    } else if (!o.hourly_load.empty()) {
      Warnings w;
      cfg.profile = ingest_profile(parse_hourly_load(csv::read_file(o.hourly_load)), &w);
      print_warnings(w);
      inputs["hourly_load"] = {{"file", o.hourly_load},
                               {"hash", detail::hex64(detail::fnv1a(detail::slurp(o.hourly_load)))}};
    } else {
      inputs["profile"] = "medium_office";
    }
    if (!o.incentives.empty()) {
      cfg.inputs = parse_scenario(csv::read_file(o.incentives));
      inputs["scenario"] = {{"file", o.incentives},
                            {"hash", detail::hex64(detail::fnv1a(detail::slurp(o.incentives)))}};
    }
  } catch (const ParseError& e) {
    throw Invalid(e.what());
  }
  if (!(o.fp > 0 && o.fp < 1)) throw Invalid("--fp must be in (0, 1)");
  auto start = parse_date(o.start);
  if (!start) throw Invalid("bad --start date '" + o.start + "'");
  cfg.demand.plug_fraction = o.fp;
  cfg.demand.units = o.units == "fraction" ? ReductionUnits::Fraction : ReductionUnits::Percent;
  cfg.demand.start = SiteClock::from_name(o.tz).local_midnight(*start);
  cfg.r0 = o.r0;
  cfg.horizon = o.horizon;
  cfg.n_monte_carlo = o.mc;
  cfg.seed = o.seed;
  cfg.stochastic = !o.deterministic;
  if (!cfg.coeffs.stable()) std::fprintf(stderr, "warning: reduction recursion is unstable\n");

  auto s = policy_rollout(cfg);
  json out = {{"inputs", inputs},
              {"config",
               {{"fp", o.fp},
                {"horizon", o.horizon},
                {"mc", o.mc},
                {"seed", o.seed},
                {"r0", o.r0},
                {"units", o.units},
                {"stochastic", cfg.stochastic},
                {"coefficients",
                 {{"alpha", cfg.coeffs.alpha},
                  {"beta", cfg.coeffs.beta},
                  {"gamma", cfg.coeffs.gamma},
                  {"delta", cfg.coeffs.delta},
                  {"sigma_xi", cfg.coeffs.sigma_xi}}}}},
              {"rollout", report::rollout(s)}};
  const fs::path dir(o.out);
  write_file(dir / "rollout.json", out.dump(2) + "\n");
  write_file(dir / "profile.csv", profile_csv(cfg.profile));
  std::printf("horizon %zu h, %zu draws, seed %llu: daily energy %.1f kWh [%.1f, %.1f], peak %.1f kW [%.1f, %.1f]\n",
              o.horizon, o.mc, static_cast<unsigned long long>(o.seed), s.daily_kwh.mean, s.daily_kwh.p05,
              s.daily_kwh.p95, s.peak_kw.mean, s.peak_kw.p05, s.peak_kw.p95);
  std::printf("wrote %s\n", (dir / "rollout.json").c_str());
  return kExitOk;
}

// ---------------------------------------------------------------------------
// serve

struct ServeOpts {
  std::string data, bind, tz, site, token;
};

std::string env_or(const char* name, const std::string& flag, const std::string& fallback) {
  if (!flag.empty()) return flag;
  if (const char* v = std::getenv(name); v && *v) return v;
  return fallback;
}

int run_serve(const ServeOpts& o) {
  const std::string data = env_or("PLUGWATT_DATA_DIR", o.data, "");
  if (data.empty()) throw Invalid("--data or PLUGWATT_DATA_DIR is required");
  const std::string bind = env_or("PLUGWATT_BIND_ADDR", o.bind, "127.0.0.1:8080");
  service::Config cfg = service::config_from_env();
  if (!o.tz.empty()) cfg.clock = SiteClock::from_name(o.tz);
  if (!o.token.empty()) cfg.operator_token = o.token;
  std::optional<Site> site;
  if (!o.site.empty()) site = require_site(o.site);

  std::unique_ptr<service::Service> svc;
  try {
    svc = service::Service::open(data, cfg, site);
  } catch (const ParseError& e) {
    throw Invalid(e.what());
  }
  auto [host, port] = service::parse_bind(bind);
  auto health = svc->handle({"GET", "/v1/health", {}, {}, {}}).json_body();
  std::printf("serving %s (site %s, %s readings) on %s:%d\n", data.c_str(), health["site"].get<std::string>().c_str(),
              health["readings"].dump().c_str(), host.c_str(), port);
  std::fflush(stdout);
  if (!service::serve(*svc, host, port)) {
    std::fprintf(stderr, "error: cannot listen on %s:%d\n", host.c_str(), port);
    return kExitInternal;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// export-plots

struct PlotOpts {
  std::string data, out = "plots", tz;
  int max_lags = 6;
};

int run_export_plots(const PlotOpts& o) {
  auto ds = load_valid(o.data);
  const auto clock = clock_for(ds, o.tz);
  const fs::path dir(o.out);
  ReadingIndex index(ds.data.readings);
  std::vector<std::string> written;
  auto emit = [&](const std::string& name, const std::string& text) {
    write_file(dir / name, text);
    written.push_back(name);
  };

  for (Site site : ds.data.calendar.sites()) {
    const std::string tag = std::string(to_string(site)) == "NASA" ? "nasa" : "cmu";

    std::vector<svg::BoxStats> boxes;
    std::string rows = "site,phase,kind,n,min,q1,median,q3,max,mean\n";
    for (const auto& p : ds.data.calendar.at_site(site)) {
      try {
        auto s = summarize_phase(index, p, clock);
        boxes.push_back({p.label, s.min, s.q1, s.median, s.q3, s.max});
        rows += std::string(to_string(site)) + "," + p.label + "," + std::string(to_string(p.kind)) + "," +
                std::to_string(s.n) + "," + csv::format_double(s.min) + "," + csv::format_double(s.q1) + "," +
                csv::format_double(s.median) + "," + csv::format_double(s.q3) + "," + csv::format_double(s.max) +
                "," + csv::format_double(s.mean) + "\n";
      } catch (const InsufficientSample& e) {
        std::fprintf(stderr, "warning: %s\n", e.what());
      }
    }
    emit("phase_summary_" + tag + ".csv", rows);
    emit("phase_summary_" + tag + ".svg",
         svg::box_plot(std::string(to_string(site)) + " daily plug energy by phase", "kWh per participant-day", boxes));

    ArxOpts ao;
    ao.max_lags = o.max_lags;
    ArxRun run;
    try {
      run = fit_site(ds, site, ao, clock);
    } catch (const InsufficientSample& e) {
      std::fprintf(stderr, "warning: %s: skipping model plots (%s)\n", tag.c_str(), e.what());
      continue;
    }
    Warnings w;
    auto prof = residual_lag_profile(run.series, run.spec, o.max_lags, ao.train_frac, &w);
    print_warnings(w);
    std::vector<double> lx, lac, lrmse;
    for (const auto& d : prof) {
      lx.push_back(d.n_lags);
      lac.push_back(d.lag1_autocorr);
      lrmse.push_back(d.rmse);
    }
    emit("lag_profile_" + tag + ".csv", diagnostics_csv(prof));
    emit("lag_profile_" + tag + ".svg",
         svg::line_plot(std::string(to_string(site)) + " residual autocorrelation by lag order", "lags",
                        "lag-1 residual autocorrelation", lx, {{"autocorrelation", lac, "#08519c"}}));

    const auto test = run.dataset.subset(Split::Test);
    std::vector<double> px, obs, pred, lo, hi;
    for (std::size_t i = 0; i < test.size(); ++i) {
      auto p = predict(run.coeffs, test[i]);
      px.push_back(static_cast<double>(i));
      obs.push_back(test[i].target);
      pred.push_back(p.point);
      lo.push_back(p.lo);
      hi.push_back(p.hi);
    }
    emit("predictions_" + tag + ".csv", predictions_csv(run));
    emit("predictions_" + tag + ".svg",
         svg::line_plot(std::string(to_string(site)) + " predicted vs observed reduction (test hours)", "test hour",
                        "baseline minus experiment (W)", px,
                        {{"observed", obs, "#252525"}, {"predicted", pred, "#e6550d"}}, lo, hi));
  }

  json index_json = {{"manifest_hash", ds.manifest.hash}, {"files", written}};
  emit("index.json", index_json.dump(2) + "\n");
  std::printf("wrote %zu files to %s; manifest hash %s\n", written.size(), dir.c_str(), ds.manifest.hash.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Plug-load feedback experiment toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from a key=value file");

  SynthOpts so;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset directory");
  synth->add_option("--out", so.out, "Output dataset directory")->required();
  synth->add_option("--participants", so.participants, "Participants per site");
  synth->add_option("--seed", so.seed, "Generator seed");
  synth->add_option("--period", so.period_s, "Sample period in seconds (1..300)");
  synth->add_option("--calendar", so.calendar, "field-2016 or consecutive")->capture_default_str();
  synth->add_option("--site", so.site, "Site whose phases the dataset covers");
  synth->add_option("--start", so.start, "First baseline day for a consecutive calendar");
  synth->add_option("--baseline-weeks", so.baseline_weeks, "Baseline length for a consecutive calendar");
  synth->add_option("--block", so.blocks, "Experiment block kind:weeks, repeatable");
  synth->add_option("--reduction", so.reduction, "Injected reduction per phase kind, e.g. feedback=0.1");
  synth->add_option("--tz", so.tz, "Site timezone");
  synth->add_flag("--arx-mode", so.arx_mode, "Drive experiment hours from an hourly recursion");

  std::string validate_dir;
  auto* validate = app.add_subcommand("validate", "Check a dataset directory");
  validate->add_option("--data", validate_dir, "Dataset directory")->required();

  AnalyzeOpts ao;
  auto* analyze = app.add_subcommand("analyze", "Paired t-test for one experiment phase");
  analyze->add_option("--data", ao.data, "Dataset directory")->required();
  analyze->add_option("--site", ao.site, "nasa or cmu")->required();
  analyze->add_option("--phase", ao.phase, "Phase label or kind")->required();
  analyze->add_option("--baseline-reference", ao.reference, "disjoint or mean")
      ->check(CLI::IsMember({"disjoint", "mean"}));
  analyze->add_option("--out", ao.out, "Output directory");
  analyze->add_option("--tz", ao.tz, "Override the manifest timezone");

  ArxOpts xo;
  auto* arx = app.add_subcommand("fit-arx", "Fit the hourly reduction model");
  arx->add_option("--data", xo.data, "Dataset directory")->required();
  arx->add_option("--site", xo.site, "nasa or cmu")->required();
  arx->add_option("--lags", xo.lags, "Lag order of the reported model");
  arx->add_option("--max-lags", xo.max_lags, "Largest lag order in diagnostics.csv");
  arx->add_option("--incentive-timing", xo.timing, "h or h-1")->check(CLI::IsMember({"h", "h-1"}));
  arx->add_option("--incentive", xo.incentive, "auto, on or off")->check(CLI::IsMember({"auto", "on", "off"}));
  arx->add_option("--train-frac", xo.train_frac, "Chronological training fraction");
  arx->add_option("--out", xo.out, "Output directory");
  arx->add_option("--tz", xo.tz, "Override the manifest timezone");

  DemandOpts dopt;
  auto* demand = app.add_subcommand("simulate-demand", "Roll out building demand under a scenario");
  demand->add_option("--fp", dopt.fp, "Plug-load fraction of building load");
  demand->add_option("--horizon", dopt.horizon, "Epochs (hours) to simulate");
  demand->add_option("--incentives", dopt.incentives, "Scenario CSV: incentive_usd[,screentime_prev_s]");
  demand->add_option("--mc", dopt.mc, "Monte Carlo draws");
  demand->add_option("--seed", dopt.seed, "Noise seed");
  demand->add_option("--r0", dopt.r0, "Initial reduction");
  demand->add_option("--units", dopt.units, "percent or fraction")->check(CLI::IsMember({"percent", "fraction"}));
  auto* prof_opt = demand->add_option("--profile", dopt.profile, "profile.csv: hour,mean_kw,std_kw");
  demand->add_option("--hourly-load", dopt.hourly_load, "Hourly load CSV: date,hour,kw")->excludes(prof_opt);
  demand->add_flag("--deterministic", dopt.deterministic, "Zero noise in every draw");
  demand->add_option("--start", dopt.start, "Local date of the first epoch");
  demand->add_option("--tz", dopt.tz, "Timezone of the start date");
  demand->add_option("--out", dopt.out, "Output directory");

  ServeOpts sv;
  auto* serve = app.add_subcommand("serve", "Serve the HTTP API over a dataset directory");
  serve->add_option("--data", sv.data, "Dataset directory (PLUGWATT_DATA_DIR)");
  serve->add_option("--bind", sv.bind, "host:port (PLUGWATT_BIND_ADDR)");
  serve->add_option("--tz", sv.tz, "Site timezone (PLUGWATT_SITE_TZ)");
  serve->add_option("--site", sv.site, "Site to score when the dataset holds several");
  serve->add_option("--operator-token", sv.token, "Token for operator writes (PLUGWATT_OPERATOR_TOKEN)");

  PlotOpts po;
  auto* plots = app.add_subcommand("export-plots", "Write figure data as CSV and SVG");
  plots->add_option("--data", po.data, "Dataset directory")->required();
  plots->add_option("--out", po.out, "Output directory");
  plots->add_option("--max-lags", po.max_lags, "Largest lag order in the lag profile");
  plots->add_option("--tz", po.tz, "Override the manifest timezone");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*synth) return run_synth(so);
    if (*validate) return run_validate(validate_dir);
    if (*analyze) return run_analyze(ao);
    if (*arx) return run_fit_arx(xo);
    if (*demand) return run_simulate_demand(dopt);
    if (*serve) return run_serve(sv);
    if (*plots) return run_export_plots(po);
  } catch (const Invalid& e) {
    std::fprintf(stderr, "invalid: %s\n", e.what());
    return kExitInvalid;
  } catch (const InsufficientSample& e) {
    std::fprintf(stderr, "insufficient data: %s\n", e.what());
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInternal;
  }
  return kExitInternal;
}
