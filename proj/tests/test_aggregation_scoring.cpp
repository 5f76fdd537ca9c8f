#include <gtest/gtest.h>

#include <functional>
#include <random>

#include "oracles.hpp"
#include "plugwatt/aggregation.hpp"
#include "plugwatt/scoring.hpp"

using namespace plugwatt;

namespace {

const SiteClock kLA = SiteClock::from_name("America/Los_Angeles");

Date day(const char* s) { return require_date(s); }

/// Samples every `period` seconds over [from_s, to_s) of the local day.
void add_series(std::vector<PowerReading>& out, const std::string& pid, const std::string& sid,
                Date d, std::int64_t from_s, std::int64_t to_s, std::int64_t period,
                const std::function<double(std::int64_t)>& watts) {
  for (std::int64_t t = from_s; t < to_s; t += period)
    out.push_back({kLA.at(d, t), pid, sid, watts(t)});
}

void add_constant(std::vector<PowerReading>& out, const std::string& pid, const std::string& sid,
                  Date d, std::int64_t from_s, std::int64_t to_s, double w) {
  add_series(out, pid, sid, d, from_s, to_s, 60, [w](std::int64_t) { return w; });
}

}  // namespace

// ---------------------------------------------------------------------------
// interval_mean_power

TEST(IntervalMean, ConstantAcrossTwoSockets) {
  std::vector<PowerReading> rs;
  add_constant(rs, "p1", "a", day("2016-10-18"), 36000, 39600, 20);
  add_constant(rs, "p1", "b", day("2016-10-18"), 36000, 39600, 20);
  ReadingIndex idx(rs);
  EXPECT_DOUBLE_EQ(*interval_mean_power(idx, "p1", day("2016-10-18"), 36000, 39600, kLA), 40.0);
}

TEST(IntervalMean, HalfAndHalf) {
  std::vector<PowerReading> rs;
  add_series(rs, "p1", "a", day("2016-10-18"), 36000, 39600, 60,
             [](std::int64_t t) { return t < 37800 ? 10.0 : 30.0; });
  ReadingIndex idx(rs);
  EXPECT_DOUBLE_EQ(*interval_mean_power(idx, "p1", day("2016-10-18"), 36000, 39600, kLA), 20.0);
}

TEST(IntervalMean, StepSeriesIsTimeWeighted) {
  std::vector<PowerReading> rs;
  add_series(rs, "p1", "a", day("2016-10-18"), 36000, 39600, 60,
             [](std::int64_t t) { return t < 36000 + 1200 ? 12.0 : 48.0; });
  ReadingIndex idx(rs);
  EXPECT_NEAR(*interval_mean_power(idx, "p1", day("2016-10-18"), 36000, 39600, kLA), 36.0, 1e-12);
}

TEST(IntervalMean, AbsentWithoutSamples) {
  std::vector<PowerReading> rs;
  add_constant(rs, "p1", "a", day("2016-10-18"), 0, 3600, 5);
  ReadingIndex idx(rs);
  EXPECT_FALSE(interval_mean_power(idx, "p1", day("2016-10-18"), 36000, 39600, kLA));
  EXPECT_FALSE(interval_mean_power(idx, "nobody", day("2016-10-18"), 0, 3600, kLA));
  EXPECT_THROW(interval_mean_power(idx, "p1", day("2016-10-18"), 10, 5, kLA), Error);
}

TEST(IntervalMean, StalenessCapLimitsHold) {
  // one sample, then silence: it counts for 300 s only
  std::vector<PowerReading> rs{{kLA.at(day("2016-10-18"), 36000), "p1", "a", 10.0},
                               {kLA.at(day("2016-10-18"), 37800), "p1", "a", 30.0}};
  ReadingIndex idx(rs);
  auto c = accumulate(*idx.stream("p1", "a"), kLA.at(day("2016-10-18"), 36000),
                      kLA.at(day("2016-10-18"), 39600), 300);
  EXPECT_DOUBLE_EQ(c.seconds, 600.0);
  EXPECT_DOUBLE_EQ(*c.mean(), 20.0);
}

TEST(IntervalMean, MatchesSecondBySecondOracle) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<std::int64_t> gap(1, 700);
  std::uniform_real_distribution<double> w(0, 100);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::pair<std::int64_t, double>> samples;
    Stream s;
    std::int64_t t = 0;
    for (int i = 0; i < 40; ++i) {
      t += gap(rng);
      samples.push_back({t, w(rng)});
      s.push_back({from_unix(t), samples.back().second});
    }
    std::int64_t a = gap(rng) * 5, b = a + gap(rng) * 20;
    auto [sum, covered] = oracle::brute_hold_mean(samples, a, b, 300);
    auto c = accumulate(s, from_unix(a), from_unix(b), 300);
    EXPECT_NEAR(c.watt_seconds, sum, 1e-6 * std::max(1.0, sum));
    EXPECT_DOUBLE_EQ(c.seconds, covered);
  }
}

TEST(IntervalMean, InvariantToSplittingASocket) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> w(0, 80), frac(0, 1);
  std::vector<PowerReading> whole, split;
  for (std::int64_t t = 0; t < 7200; t += 45) {
    double v = w(rng), f = frac(rng);
    whole.push_back({kLA.at(day("2016-10-18"), 30000 + t), "p1", "s", v});
    split.push_back({kLA.at(day("2016-10-18"), 30000 + t), "p1", "s.a", v * f});
    split.push_back({kLA.at(day("2016-10-18"), 30000 + t), "p1", "s.b", v * (1 - f)});
  }
  ReadingIndex a(whole), b(split);
  for (std::int64_t h0 : {28800, 30000, 31000, 33000}) {
    auto x = interval_mean_power(a, "p1", day("2016-10-18"), h0, h0 + 2500, kLA);
    auto y = interval_mean_power(b, "p1", day("2016-10-18"), h0, h0 + 2500, kLA);
    ASSERT_TRUE(x && y);
    EXPECT_NEAR(*x, *y, 1e-9);
  }
}

TEST(Resample, LocfOnMinuteGrid) {
  Stream s{{from_unix(0), 1.0}, {from_unix(90), 2.0}, {from_unix(700), 3.0}};
  auto g = resample_locf(s, from_unix(0), from_unix(900));
  std::vector<double> vals;
  for (const auto& x : g) vals.push_back(x.watts);
  // 0:1 60:1 120:2 180:2 240:2 300:2 360:(stale, 270 s < 300 so still 2) ...
  ASSERT_EQ(g.front().t, from_unix(0));
  EXPECT_EQ(vals[0], 1.0);
  EXPECT_EQ(vals[1], 1.0);
  EXPECT_EQ(vals[2], 2.0);
  // 90 + 300 = 390: grid points 420..660 are stale and skipped
  for (const auto& x : g) EXPECT_FALSE(x.t > from_unix(390) && x.t < from_unix(700));
  EXPECT_EQ(g.back().watts, 3.0);
}

// ---------------------------------------------------------------------------
// active_mean_power

TEST(ActiveMean, FilterThenMean) {
  std::vector<PowerReading> rs{{kLA.at(day("2016-10-18"), 36000), "p1", "a", 3},
                               {kLA.at(day("2016-10-18"), 37200), "p1", "a", 10},
                               {kLA.at(day("2016-10-18"), 38400), "p1", "a", 20}};
  ReadingIndex idx(rs);
  EXPECT_DOUBLE_EQ(*active_mean_power(idx, "p1", day("2016-10-18"), kLA, 5.0), 15.0);
}

TEST(ActiveMean, AllBelowThresholdIsAbsent) {
  std::vector<PowerReading> rs;
  add_series(rs, "p1", "a", day("2016-10-18"), 0, 7200, 60, [](std::int64_t t) { return t % 120 ? 5.0 : 2.0; });
  ReadingIndex idx(rs);
  EXPECT_FALSE(active_mean_power(idx, "p1", day("2016-10-18"), kLA, 5.0));
}

TEST(ActiveMean, PerSocketThenSum) {
  std::vector<PowerReading> rs;
  // socket a: 5 (dropped), 6, 9 -> 7.5 ; socket b: 12 constant, one 1 W dip dropped
  add_series(rs, "p1", "a", day("2016-10-18"), 0, 900, 300, [](std::int64_t t) { return t == 0 ? 5.0 : t == 300 ? 6.0 : 9.0; });
  add_series(rs, "p1", "b", day("2016-10-18"), 0, 1200, 300, [](std::int64_t t) { return t == 600 ? 1.0 : 12.0; });
  ReadingIndex idx(rs);
  EXPECT_DOUBLE_EQ(*active_mean_power(idx, "p1", day("2016-10-18"), kLA, 5.0), 19.5);
}

TEST(ActiveMean, ThresholdZeroOnPositiveDataEqualsIntervalMean) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> w(0.1, 90);
  std::vector<PowerReading> rs;
  add_series(rs, "p1", "a", day("2016-10-18"), 0, 86400, 77, [&](std::int64_t) { return w(rng); });
  add_series(rs, "p1", "b", day("2016-10-18"), 300, 80000, 131, [&](std::int64_t) { return w(rng); });
  ReadingIndex idx(rs);
  EXPECT_NEAR(*active_mean_power(idx, "p1", day("2016-10-18"), kLA, 0.0),
              *daily_mean_power(idx, "p1", day("2016-10-18"), kLA), 1e-9);
}

// ---------------------------------------------------------------------------
// pool_hourly_mean

TEST(PoolHourly, SingletonAndTwoPointAndExclusion) {
  const Date d = day("2016-10-18");
  std::vector<PowerReading> rs;
  add_constant(rs, "p1", "a", d, 36000, 39600, 12);
  add_constant(rs, "p2", "a", d, 0, 3600, 99);  // no samples in hour 11
  add_constant(rs, "p3", "a", d, 36000, 39600, 24);
  ReadingIndex idx(rs);
  std::vector<std::string> one{"p1"}, pair{"p1", "p3"}, all{"p1", "p2", "p3"};
  EXPECT_DOUBLE_EQ(*pool_hourly_mean(idx, one, d, 11, kLA), 12.0);
  EXPECT_DOUBLE_EQ(*pool_hourly_mean(idx, pair, d, 11, kLA), 18.0);
  EXPECT_DOUBLE_EQ(*pool_hourly_mean(idx, all, d, 11, kLA), 18.0);
  std::vector<std::string> none{"p2"};
  EXPECT_FALSE(pool_hourly_mean(idx, none, d, 11, kLA));
  EXPECT_THROW(pool_hourly_mean(idx, all, d, 0, kLA), Error);
  EXPECT_THROW(pool_hourly_mean(idx, all, d, 25, kLA), Error);
}

TEST(PoolHourly, WithinContributorRange) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> w(0, 200);
  const Date d = day("2016-10-19");
  std::vector<PowerReading> rs;
  std::vector<std::string> ids;
  for (int p = 0; p < 8; ++p) {
    ids.push_back("p" + std::to_string(p));
    add_series(rs, ids.back(), "a", d, 0, 86400, 97 + p, [&](std::int64_t) { return w(rng); });
  }
  ReadingIndex idx(rs);
  for (int h = 1; h <= 24; ++h) {
    double lo = 1e9, hi = -1e9;
    for (const auto& p : ids) {
      auto m = interval_mean_power(idx, p, d, (h - 1) * 3600, h * 3600, kLA);
      lo = std::min(lo, *m);
      hi = std::max(hi, *m);
    }
    auto pool = pool_hourly_mean(idx, ids, d, h, kLA);
    EXPECT_GE(*pool, lo - 1e-12);
    EXPECT_LE(*pool, hi + 1e-12);
  }
}

// ---------------------------------------------------------------------------
// weekday_matched_pairs

class MatchedPairs : public ::testing::Test {
 protected:
  Phase baseline{Site::Nasa, PhaseKind::Baseline, "P1N", day("2016-09-12"), day("2016-09-25")};
  Phase expt{Site::Nasa, PhaseKind::Feedback, "P3N", day("2016-09-26"), day("2016-10-02")};
};

TEST_F(MatchedPairs, MondaysAreAveraged) {
  std::vector<PowerReading> rs;
  add_constant(rs, "p1", "a", day("2016-09-12"), 0, 86000, 50);
  add_constant(rs, "p1", "a", day("2016-09-19"), 0, 86000, 54);
  add_constant(rs, "p1", "a", day("2016-09-26"), 0, 86000, 47);
  ReadingIndex idx(rs);
  for (auto ref : {BaselineReference::WeekdayMean, BaselineReference::DisjointOccurrences}) {
    auto pairs = weekday_matched_pairs(idx, baseline, expt, "p1", kLA, ref);
    ASSERT_EQ(pairs.size(), 1u);
    EXPECT_EQ(pairs[0].weekday, 0);
    EXPECT_DOUBLE_EQ(pairs[0].baseline_mean, 52.0);
    EXPECT_DOUBLE_EQ(pairs[0].expt_mean, 47.0);
  }
}

TEST_F(MatchedPairs, MissingBaselineWeekdayIsDropped) {
  std::vector<PowerReading> rs;
  add_constant(rs, "p1", "a", day("2016-09-12"), 0, 86000, 50);  // Monday only
  add_constant(rs, "p1", "a", day("2016-09-30"), 0, 86000, 40);  // Friday experiment
  add_constant(rs, "p1", "a", day("2016-09-26"), 0, 86000, 45);
  ReadingIndex idx(rs);
  auto pairs = weekday_matched_pairs(idx, baseline, expt, "p1", kLA);
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0].expt_day, day("2016-09-26"));
}

TEST_F(MatchedPairs, IdenticalSeriesGiveZeroDiffs) {
  std::vector<PowerReading> rs;
  for (Date d = day("2016-09-12"); d <= day("2016-10-02"); d += std::chrono::days{1})
    add_series(rs, "p1", "a", d, 0, 86400, 60,
               [&](std::int64_t t) { return 10.0 + weekday_index(d) + (t / 3600 % 5); });
  ReadingIndex idx(rs);
  auto pairs = weekday_matched_pairs(idx, baseline, expt, "p1", kLA);
  EXPECT_EQ(pairs.size(), 7u);
  for (const auto& p : pairs) EXPECT_NEAR(p.diff(), 0.0, 1e-12);
}

TEST_F(MatchedPairs, DisjointReferencesNeverShareABaselineDay) {
  Phase base4{Site::Nasa, PhaseKind::Baseline, "P1N", day("2016-08-29"), day("2016-09-25")};
  Phase exp2{Site::Nasa, PhaseKind::Feedback, "P3N", day("2016-09-26"), day("2016-10-09")};
  std::vector<PowerReading> rs;
  // four baseline Mondays 10, 20, 30, 40; two experiment Mondays
  double v = 10;
  for (Date d = day("2016-08-29"); d <= day("2016-09-19"); d += std::chrono::days{7}, v += 10)
    add_constant(rs, "p1", "a", d, 0, 86000, v);
  add_constant(rs, "p1", "a", day("2016-09-26"), 0, 86000, 1);
  add_constant(rs, "p1", "a", day("2016-10-03"), 0, 86000, 2);
  ReadingIndex idx(rs);
  auto disjoint = weekday_matched_pairs(idx, base4, exp2, "p1", kLA, BaselineReference::DisjointOccurrences);
  ASSERT_EQ(disjoint.size(), 2u);
  EXPECT_DOUBLE_EQ(disjoint[0].baseline_mean, 20.0);  // {10, 30}
  EXPECT_DOUBLE_EQ(disjoint[1].baseline_mean, 30.0);  // {20, 40}
  auto mean = weekday_matched_pairs(idx, base4, exp2, "p1", kLA, BaselineReference::WeekdayMean);
  EXPECT_DOUBLE_EQ(mean[0].baseline_mean, 25.0);
  EXPECT_DOUBLE_EQ(mean[1].baseline_mean, 25.0);
}

// ---------------------------------------------------------------------------
// scoring

TEST(Score, FormulaAnchors) {
  EXPECT_DOUBLE_EQ(score_from_averages(100, 80), 920.0);
  EXPECT_DOUBLE_EQ(score_from_averages(70, 70), 900.0);
  EXPECT_DOUBLE_EQ(score_from_averages(50, 60), 880.0);
}

TEST(Score, ScaleInvariantAndMonotone) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(1, 500), k(1e-3, 1e3);
  for (int i = 0; i < 1000; ++i) {
    double b = u(rng), e = u(rng), s = k(rng);
    EXPECT_NEAR(score_from_averages(s * b, s * e), score_from_averages(b, e), 1e-9);
    EXPECT_GT(score_from_averages(b, e), score_from_averages(b, e + 0.5));
  }
}

class Baselines : public ::testing::Test {
 protected:
  Phase phase{Site::Cmu, PhaseKind::Baseline, "P1C", day("2016-09-12"), day("2016-09-15")};
};

TEST_F(Baselines, SingleDay) {
  std::vector<PowerReading> rs;
  add_constant(rs, "p1", "a", day("2016-09-12"), 32400, 61200, 50);
  auto b = compute_baselines(ReadingIndex(rs), phase, kLA);
  ASSERT_EQ(b.size(), 1u);
  EXPECT_DOUBLE_EQ(b[0].active_baseline_watts, 50.0);
  EXPECT_EQ(b[0].computed_from, "P1C");
}

TEST_F(Baselines, TwoDaysAverage) {
  std::vector<PowerReading> rs;
  add_constant(rs, "p1", "a", day("2016-09-12"), 32400, 61200, 40);
  add_constant(rs, "p1", "a", day("2016-09-13"), 32400, 61200, 60);
  EXPECT_DOUBLE_EQ(compute_baselines(ReadingIndex(rs), phase, kLA)[0].active_baseline_watts, 50.0);
}

TEST_F(Baselines, AbsentDaySkippedAndInactiveParticipantOmitted) {
  std::vector<PowerReading> rs;
  add_constant(rs, "p1", "a", day("2016-09-12"), 32400, 61200, 40);
  add_constant(rs, "p1", "a", day("2016-09-13"), 32400, 61200, 2);  // below threshold
  add_constant(rs, "p1", "a", day("2016-09-14"), 32400, 61200, 60);
  add_constant(rs, "p1", "a", day("2016-09-15"), 32400, 61200, 50);
  add_constant(rs, "p2", "a", day("2016-09-12"), 0, 86400, 3);
  Warnings w;
  auto b = compute_baselines(ReadingIndex(rs), phase, kLA, {}, &w);
  ASSERT_EQ(b.size(), 1u);
  EXPECT_DOUBLE_EQ(b[0].active_baseline_watts, 50.0);
  EXPECT_EQ(w.size(), 1u);
}

TEST(AlwaysOnFloor, FifthPercentileOfTotal) {
  std::vector<PowerReading> rs;
  const Date d = day("2016-09-12");
  // 100 minutes at 1..100 W on one socket, another socket flat 10 W
  add_series(rs, "p1", "a", d, 0, 6000, 60, [](std::int64_t t) { return 1.0 + static_cast<double>(t / 60); });
  add_constant(rs, "p1", "b", d, 0, 6000, 10);
  Phase ph{Site::Cmu, PhaseKind::Baseline, "P1C", d, d};
  auto floor = always_on_floor(ReadingIndex(rs), "p1", ph, kLA);
  ASSERT_TRUE(floor);
  // totals 11..110, with the final sample held 5 extra minutes at 110
  std::vector<double> totals;
  for (int i = 1; i <= 100; ++i) totals.push_back(10.0 + i);
  for (int i = 0; i < 4; ++i) totals.push_back(110.0);
  EXPECT_NEAR(*floor, stats::quantile(totals, 0.05), 1e-12);
}

TEST(LiveScore, UsesMidnightToAsOf) {
  const Date d = day("2016-10-18");
  std::vector<PowerReading> rs;
  add_constant(rs, "p1", "a", d, 32400, 36000, 80);
  add_constant(rs, "p1", "a", d, 36000, 39600, 40);
  ReadingIndex idx(rs);
  BaselineRecord b{"p1", 100.0, "P1C", 5.0};
  EXPECT_DOUBLE_EQ(*live_score(idx, b, d, kLA.at(d, 36000), kLA), 920.0);
  EXPECT_DOUBLE_EQ(*live_score(idx, b, d, kLA.at(d, 39600), kLA), 940.0);
  EXPECT_FALSE(live_score(idx, b, d, kLA.at(d, 3600), kLA));
  EXPECT_THROW(live_score(idx, b, d, kLA.at(d, 90000), kLA), Error);
}

TEST(Ranking, DescendingScores) {
  auto r = rank_leaderboard({{"A", 910, false}, {"B", 925, false}}, day("2016-10-18"), {});
  EXPECT_EQ(r[0].participant_id, "B");
  EXPECT_EQ(r[0].rank, 1);
  EXPECT_EQ(r[1].rank, 2);
}

TEST(Ranking, TieBrokenById) {
  auto r = rank_leaderboard({{"B", 910, false}, {"A", 910, false}}, day("2016-10-18"), {});
  EXPECT_EQ(r[0].participant_id, "A");
}

TEST(Ranking, InactiveDemoted) {
  auto r = rank_leaderboard({{"B", 990, true}, {"A", 905, false}}, day("2016-10-18"), {});
  EXPECT_EQ(r[0].participant_id, "A");
  EXPECT_TRUE(r[1].inactive_flag);
}

TEST(Ranking, PermutationOfRanksForAnyMultiset) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> s(880, 920), n(1, 30);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<ScoreCandidate> c;
    const int k = n(rng);
    for (int i = 0; i < k; ++i) c.push_back({"p" + std::to_string(i), double(s(rng)), s(rng) > 915});
    auto a = rank_leaderboard(c, day("2016-10-18"), {});
    std::shuffle(c.begin(), c.end(), rng);
    auto b = rank_leaderboard(c, day("2016-10-18"), {});
    ASSERT_EQ(a.size(), static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
      EXPECT_EQ(a[i].rank, i + 1);
      EXPECT_EQ(a[i].participant_id, b[i].participant_id);
      if (i > 0 && a[i].inactive_flag == a[i - 1].inactive_flag) EXPECT_LE(a[i].score, a[i - 1].score);
      if (i > 0) EXPECT_GE(a[i].inactive_flag, a[i - 1].inactive_flag);
    }
  }
}

class Inactivity : public ::testing::Test {
 protected:
  Date d = day("2016-10-18");
  Instant as_of = kLA.at(d, 12 * 3600);
};

TEST_F(Inactivity, ConstantNearFloorIsInactive) {
  std::vector<PowerReading> rs;
  add_constant(rs, "p1", "a", d, 10 * 3600, 12 * 3600, 30);
  EXPECT_TRUE(detect_inactivity(ReadingIndex(rs), "p1", as_of, 28.0));
}

TEST_F(Inactivity, VaryingLoadIsActive) {
  std::vector<PowerReading> rs;
  add_series(rs, "p1", "a", d, 10 * 3600, 12 * 3600, 60, [](std::int64_t t) { return t % 120 ? 55.0 : 35.0; });
  EXPECT_FALSE(detect_inactivity(ReadingIndex(rs), "p1", as_of, 40.0));
}

TEST_F(Inactivity, ConstantFarAboveFloorIsActive) {
  std::vector<PowerReading> rs;
  add_constant(rs, "p1", "a", d, 10 * 3600, 12 * 3600, 30);
  EXPECT_FALSE(detect_inactivity(ReadingIndex(rs), "p1", as_of, 10.0));
}

TEST_F(Inactivity, InsufficientDataGetsBenefitOfDoubt) {
  std::vector<PowerReading> rs;
  add_constant(rs, "p1", "a", d, 11 * 3600 + 3000, 12 * 3600, 30);  // 10 minutes only
  EXPECT_FALSE(detect_inactivity(ReadingIndex(rs), "p1", as_of, 28.0));
  EXPECT_FALSE(detect_inactivity(ReadingIndex(rs), "nobody", as_of, 28.0));
  ScoringConfig bad;
  bad.window_s = 0;
  EXPECT_THROW(detect_inactivity(ReadingIndex(rs), "p1", as_of, 28.0, bad), Error);
}

class Winner : public ::testing::Test {
 protected:
  Date d = day("2016-10-18");
  PhaseCalendar cal = PhaseCalendar::field_2016();
  IncentiveSchedule inc{{{day("2016-10-18"), 25}}};
  std::vector<BaselineRecord> base{{"A", 100, "P1C", 40}, {"B", 100, "P1C", 40}};
};

TEST_F(Winner, HeadOfBoard) {
  std::vector<PowerReading> rs;
  add_series(rs, "A", "a", d, 32400, 86000, 60, [](std::int64_t t) { return t % 120 ? 95.0 : 75.0; });
  add_series(rs, "B", "a", d, 32400, 86000, 60, [](std::int64_t t) { return t % 120 ? 80.0 : 60.0; });
  ReadingIndex idx(rs);
  auto board = build_leaderboard(idx, base, d, kLA.local_midnight(d + std::chrono::days{1}), kLA);
  ASSERT_EQ(board.size(), 2u);
  EXPECT_EQ(board[0].participant_id, "B");
  EXPECT_EQ(declare_winner(idx, base, cal, inc, Site::Cmu, d, kLA), "B");
  // outside the incentive phase or without a posted amount: nobody
  EXPECT_FALSE(declare_winner(idx, base, cal, inc, Site::Nasa, d, kLA));
  EXPECT_FALSE(declare_winner(idx, base, cal, inc, Site::Cmu, day("2016-10-19"), kLA));
}

TEST_F(Winner, EmptyBoardMeansNoWinner) {
  EXPECT_FALSE(winner_of({}));
  EXPECT_FALSE(declare_winner(ReadingIndex{}, base, cal, inc, Site::Cmu, d, kLA));
}

TEST_F(Winner, AllInactiveMeansNoWinner) {
  std::vector<PowerReading> rs;
  add_constant(rs, "A", "a", d, 0, 86400, 41);
  add_constant(rs, "B", "a", d, 0, 86400, 42);
  ReadingIndex idx(rs);
  auto board = build_leaderboard(idx, base, d, kLA.local_midnight(d + std::chrono::days{1}), kLA);
  ASSERT_EQ(board.size(), 2u);
  EXPECT_TRUE(board[0].inactive_flag && board[1].inactive_flag);
  EXPECT_FALSE(declare_winner(idx, base, cal, inc, Site::Cmu, d, kLA));
}
