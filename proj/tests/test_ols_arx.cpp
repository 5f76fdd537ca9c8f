#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "plugwatt/arx.hpp"
#include "plugwatt/synth.hpp"

using namespace plugwatt;

namespace {

Matrix to_matrix(const Eigen::MatrixXd& m) {
  Matrix out(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out(i, j) = m(i, j);
  return out;
}

ArxRow row(double target, double lag, double screen = 0.0, double expt = 0.0) {
  ArxRow r;
  r.target = target;
  r.lags = {lag};
  r.screentime = screen;
  r.expt_power = expt;
  return r;
}

}  // namespace

// ---------------------------------------------------------------------------
// ordinary_least_squares

TEST(Ols, ExactLine) {
  Matrix x(6, 2);
  std::vector<double> y;
  for (std::size_t i = 0; i < 6; ++i) {
    x(i, 0) = 1;
    x(i, 1) = static_cast<double>(i) * 0.7 - 1;
    y.push_back(2 + 3 * x(i, 1));
  }
  auto f = ordinary_least_squares(x, y);
  EXPECT_NEAR(f.coef[0], 2, 1e-9);
  EXPECT_NEAR(f.coef[1], 3, 1e-9);
  EXPECT_NEAR(f.sigma, 0, 1e-9);
}

TEST(Ols, DuplicateColumnIsNamed) {
  Matrix x(8, 3);
  std::vector<double> y(8);
  for (std::size_t i = 0; i < 8; ++i) {
    x(i, 0) = 1;
    x(i, 1) = double(i * i);
    x(i, 2) = 2 * x(i, 1);
    y[i] = double(i);
  }
  std::vector<std::string> names{"intercept", "screentime", "screentime_copy"};
  try {
    ordinary_least_squares(x, y, names);
    FAIL() << "expected rank deficiency";
  } catch (const RankDeficient& e) {
    EXPECT_EQ(e.columns(), (std::vector<std::string>{"screentime", "screentime_copy"}));
    EXPECT_NE(std::string(e.what()).find("screentime_copy"), std::string::npos);
  }
}

TEST(Ols, TooFewRows) {
  Matrix x(2, 2, 1.0);
  std::vector<double> y{1, 2};
  EXPECT_THROW(ordinary_least_squares(x, y), InsufficientSample);
}

TEST(Ols, AgreesWithPseudoInverse) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> nk(2, 6), extra(1, 40);
  for (int trial = 0; trial < 50; ++trial) {
    const int k = nk(rng), n = k + extra(rng);
    Eigen::MatrixXd xm = Eigen::MatrixXd::Random(n, k);
    Eigen::VectorXd ym = Eigen::VectorXd::Random(n);
    std::vector<double> y(ym.data(), ym.data() + n);
    auto fit = ordinary_least_squares(to_matrix(xm), y);
    auto ref = oracle::pinv_solve(xm, ym);
    for (int j = 0; j < k; ++j) EXPECT_NEAR(fit.coef[j], ref[j], 1e-8);
  }
}

TEST(Ols, ResidualsOrthogonalToColumns) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g;
  Matrix x(200, 4);
  std::vector<double> y(200);
  for (std::size_t i = 0; i < 200; ++i) {
    x(i, 0) = 1;
    for (std::size_t j = 1; j < 4; ++j) x(i, j) = g(rng);
    y[i] = g(rng) + x(i, 1);
  }
  auto f = ordinary_least_squares(x, y);
  for (std::size_t j = 0; j < 4; ++j) {
    double dot = 0;
    for (std::size_t i = 0; i < 200; ++i) dot += x(i, j) * f.residuals[i];
    EXPECT_NEAR(dot, 0.0, 1e-9);
  }
  EXPECT_NEAR(f.sigma * f.sigma * 196, f.ssr, 1e-9);
}

// ---------------------------------------------------------------------------
// dataset construction

TEST(ArxDataset, TwentyThreeRowsPerDayWithOneLag) {
  auto series = synthetic_arx_series({}, 3, 1);
  auto ds = make_dataset(series, {});
  EXPECT_EQ(ds.rows.size(), 69u);
  EXPECT_EQ(ds.rows.front().hour, 2);
  EXPECT_EQ(ds.rows.front().lags[0], *series[0].hours[0].target);
  ArxSpec three;
  three.n_lags = 3;
  EXPECT_EQ(make_dataset(series, three).rows.size(), 63u);
  three.n_lags = 0;
  EXPECT_THROW(make_dataset(series, three), Error);
}

TEST(ArxDataset, GapsBreakTheLagChain) {
  auto series = synthetic_arx_series({}, 1, 2);
  series[0].hours[9].target.reset();
  // rows at hours 10 (missing target) and 11 (missing lag) disappear
  EXPECT_EQ(make_dataset(series, {}).rows.size(), 21u);
}

TEST(ArxDataset, HandBuiltThreeHourFixture) {
  HourlySeries s{{require_date("2016-10-18"), {}}};
  s[0].hours[0].target = 1.0;
  s[0].hours[1].target = 2.5;
  s[0].hours[1].screentime_prev_s = 60;
  s[0].hours[1].expt_power = 40;
  s[0].hours[2].target = -0.5;
  s[0].hours[2].screentime_prev_s = 120;
  s[0].hours[2].incentive_usd = 15;
  s[0].hours[2].incentive_prev_usd = 10;
  ArxSpec spec;
  spec.incentive = true;
  auto ds = make_dataset(s, spec);
  ASSERT_EQ(ds.rows.size(), 2u);
  EXPECT_EQ(ds.rows[0].hour, 2);
  EXPECT_EQ(ds.rows[0].target, 2.5);
  EXPECT_EQ(ds.rows[0].lags, std::vector<double>{1.0});
  EXPECT_EQ(ds.rows[0].screentime, 60);
  EXPECT_EQ(ds.rows[0].expt_power, 40);
  EXPECT_EQ(ds.rows[1].lags, std::vector<double>{2.5});
  EXPECT_EQ(ds.rows[1].incentive, 15);
  spec.incentive_timing = IncentiveTiming::PreviousHour;
  EXPECT_EQ(make_dataset(s, spec).rows[1].incentive, 10);
}

TEST(ArxDataset, HourlySeriesFromReadings) {
  // two participants, a Monday baseline and a Monday experiment day
  const SiteClock clock = SiteClock::from_name("America/Los_Angeles");
  PhaseCalendar cal{{
      {Site::Cmu, PhaseKind::Baseline, "P1C", require_date("2016-10-10"), require_date("2016-10-16")},
      {Site::Cmu, PhaseKind::Incentive, "P2C", require_date("2016-10-17"), require_date("2016-10-17")},
  }};
  std::vector<PowerReading> rs;
  for (std::int64_t t = 0; t < 86400; t += 60) {
    rs.push_back({clock.at(require_date("2016-10-10"), t), "a", "s", 30});
    rs.push_back({clock.at(require_date("2016-10-10"), t), "b", "s", 50});
    rs.push_back({clock.at(require_date("2016-10-17"), t), "a", "s", 20});
    rs.push_back({clock.at(require_date("2016-10-17"), t), "b", "s", 50});
  }
  std::vector<ScreentimeSession> st{{"a", clock.at(require_date("2016-10-17"), 9 * 3600),
                                     clock.at(require_date("2016-10-17"), 9 * 3600 + 600)}};
  IncentiveSchedule inc{{{require_date("2016-10-17"), 25}}};
  std::vector<std::string> phases;
  auto series = build_hourly_series(ReadingIndex(rs), ScreentimeIndex(st), cal, inc, Site::Cmu, phases, clock);
  ASSERT_EQ(series.size(), 1u);
  const auto& h11 = series[0].hours[10];
  EXPECT_NEAR(*h11.target, 5.0, 1e-12);
  EXPECT_NEAR(*h11.expt_power, 35.0, 1e-12);
  EXPECT_NEAR(h11.screentime_prev_s, 300.0, 1e-12);  // 600 s over two participants, hour 10
  EXPECT_EQ(h11.incentive_usd, 25);
  EXPECT_EQ(series[0].hours[11].screentime_prev_s, 0.0);

  PhaseCalendar disjoint{{
      {Site::Cmu, PhaseKind::Baseline, "P1C", require_date("2016-10-11"), require_date("2016-10-11")},
      {Site::Cmu, PhaseKind::Incentive, "P2C", require_date("2016-10-17"), require_date("2016-10-17")},
  }};
  EXPECT_THROW(build_hourly_series(ReadingIndex(rs), ScreentimeIndex(st), disjoint, inc, Site::Cmu, phases, clock),
               Error);
}

TEST(ArxDataset, IdenticalPoolsGiveZeroTargets) {
  const SiteClock clock = SiteClock::utc();
  PhaseCalendar cal{{
      {Site::Nasa, PhaseKind::Baseline, "P1N", require_date("2016-10-10"), require_date("2016-10-10")},
      {Site::Nasa, PhaseKind::Feedback, "P3N", require_date("2016-10-17"), require_date("2016-10-17")},
  }};
  std::vector<PowerReading> rs;
  for (auto d : {"2016-10-10", "2016-10-17"})
    for (std::int64_t t = 0; t < 86400; t += 60)
      rs.push_back({clock.at(require_date(d), t), "a", "s", 10.0 + double(t / 3600)});
  std::vector<std::string> phases{"P3N"};
  auto series = build_hourly_series(ReadingIndex(rs), ScreentimeIndex{}, cal, IncentiveSchedule{}, Site::Nasa,
                                    phases, clock);
  for (const auto& h : series[0].hours) EXPECT_NEAR(h.target.value_or(0), 0.0, 1e-12);
}

TEST(ArxSplit, ChronologicalSeventyThirty) {
  ArxDataset ds;
  for (int i = 0; i < 10; ++i) ds.rows.push_back(row(i, 0));
  auto s = split_train_test(ds);
  EXPECT_EQ(s.count(Split::Train), 7u);
  EXPECT_EQ(s.count(Split::Test), 3u);
  EXPECT_EQ(s.rows[7].split, Split::Test);
  ds.rows.resize(100, row(0, 0));
  auto big = split_train_test(ds);
  for (std::size_t i = 0; i < 100; ++i) EXPECT_EQ(big.rows[i].split == Split::Test, i >= 70);
  ds.rows.resize(3);
  EXPECT_THROW(split_train_test(ds), InsufficientSample);
  EXPECT_THROW(split_train_test(ds, 1.0), Error);
}

// ---------------------------------------------------------------------------
// fitting and prediction

TEST(ArxFit, RecoversTruthWithinThreeStandardErrors) {
  ArxTruth truth{-0.03, {0.80}, 0.002, std::nullopt, 3.5};
  auto series = synthetic_arx_series(truth, 5000 / 23 + 1, 11);
  auto ds = make_dataset(series, {});
  ASSERT_GE(ds.rows.size(), 5000u);
  auto c = fit_ols(ds);
  EXPECT_LT(std::fabs(c.alpha - truth.alpha), 3 * c.std_err[0]);
  EXPECT_LT(std::fabs(c.beta[0] - truth.beta[0]), 3 * c.std_err[1]);
  EXPECT_LT(std::fabs(*c.gamma - truth.gamma), 3 * c.std_err[2]);
  EXPECT_NEAR(c.sigma_eps, 3.5, 0.15);
  EXPECT_EQ(c.columns, (std::vector<std::string>{"intercept", "lag1", "screentime"}));
}

TEST(ArxFit, IncentiveColumnIsFitted) {
  ArxTruth truth{2.5, {0.77}, 0.0046, -0.008, 1.0};
  ArxSpec spec;
  spec.incentive = true;
  auto c = fit_ols(make_dataset(synthetic_arx_series(truth, 400, 3), spec));
  ASSERT_TRUE(c.delta);
  EXPECT_LT(std::fabs(*c.delta - truth.delta.value()), 3 * c.std_err[3]);
}

TEST(ArxPredict, PublishedCoefficients) {
  ArxCoefficients nasa{-0.0298, {0.8042}, 0.0019, std::nullopt, 3.5199, {}, {}, 0};
  auto p = predict(nasa, 0.0, 0.0, 0.0);
  EXPECT_NEAR(p.point, -0.0298, 1e-12);
  EXPECT_NEAR(p.hi - p.point, 6.899, 5e-4);
  ArxCoefficients cmu{2.501, {0.7673}, 0.0046, -0.008, 1.0, {}, {}, 0};
  EXPECT_NEAR(predict(cmu, 10.0, 600.0, 20.0).point, 12.774, 1e-9);
  std::vector<double> none;
  EXPECT_THROW(predict(nasa, none, 0, 0), Error);
}

TEST(ArxEvaluate, RmseAndAccuracy) {
  ArxCoefficients zero{0, {0}, 0.0, std::nullopt, 1.0, {}, {}, 0};
  std::vector<ArxRow> rows{row(3, 0, 0, 50), row(4, 0, 0, 50)};
  auto e = evaluate(zero, rows);
  EXPECT_NEAR(e.rmse, 3.5355339, 1e-6);
  EXPECT_NEAR(e.rms_accuracy_pct, 100 * (1 - 3.5355339 / 50), 1e-5);
  EXPECT_NEAR(e.mean_interval95.lo, -1.96, 1e-12);
  EXPECT_THROW(evaluate(zero, std::vector<ArxRow>{}), InsufficientSample);

  ArxCoefficients perfect{0, {1.0}, 0.0, std::nullopt, 0.0, {}, {}, 0};
  std::vector<ArxRow> exact{row(2, 2, 0, 10), row(5, 5, 0, 10)};
  auto p = evaluate(perfect, exact);
  EXPECT_EQ(p.rmse, 0.0);
  EXPECT_EQ(p.rms_accuracy_pct, 100.0);
}

TEST(ArxEvaluate, ConstantMeanPredictorMatchesSd) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g(4, 2);
  std::vector<ArxRow> rows;
  std::vector<double> ys;
  for (int i = 0; i < 5000; ++i) {
    rows.push_back(row(g(rng), 0, 0, 40));
    ys.push_back(rows.back().target);
  }
  ArxCoefficients c{stats::mean(ys), {0}, std::nullopt, std::nullopt, 0, {}, {}, 0};
  EXPECT_NEAR(evaluate(c, rows).rmse / stats::sample_sd(ys), 1.0, 0.02);
}

TEST(ArxDiagnostics, Autocorrelation) {
  std::vector<double> alt;
  for (int i = 0; i < 50; ++i) alt.push_back(i % 2 ? -1.0 : 1.0);
  EXPECT_NEAR(lag1_autocorrelation(alt), -1.0, 1e-12);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  std::vector<double> iid(10000);
  for (auto& x : iid) x = g(rng);
  EXPECT_LT(std::fabs(lag1_autocorrelation(iid)), 0.05);
}

TEST(ArxDiagnostics, OneLagWhitensFirstOrderData) {
  auto series = synthetic_arx_series({}, 400, 8);
  Warnings w;
  auto prof = residual_lag_profile(series, {}, 6, 0.7, &w);
  ASSERT_EQ(prof.size(), 6u);
  EXPECT_LT(std::fabs(prof[0].lag1_autocorr), 0.05);
  for (std::size_t l = 1; l < prof.size(); ++l)
    EXPECT_LT(std::fabs(prof[l].lag1_autocorr - prof[0].lag1_autocorr), 0.02);
  EXPECT_TRUE(w.empty());
}

TEST(ArxDiagnostics, ShortSeriesTruncatesWithWarning) {
  auto series = synthetic_arx_series({}, 1, 8);
  Warnings w;
  auto prof = residual_lag_profile(series, {}, 30, 0.7, &w);
  EXPECT_LT(prof.size(), 30u);
  EXPECT_EQ(w.size(), 1u);
}
