#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "plugwatt/inference.hpp"

using namespace plugwatt;

namespace {

const SiteClock kLA = SiteClock::from_name("America/Los_Angeles");

Date day(const char* s) { return require_date(s); }

void whole_day(std::vector<PowerReading>& rs, const std::string& pid, Date d, double w) {
  for (std::int64_t t = 0; t < 86000; t += 60) rs.push_back({kLA.at(d, t), pid, "s1", w});
}

PhaseCalendar two_week_calendar() {
  return PhaseCalendar{{
      {Site::Nasa, PhaseKind::Baseline, "P1N", day("2016-09-12"), day("2016-09-18")},
      {Site::Nasa, PhaseKind::Feedback, "P3N", day("2016-09-19"), day("2016-09-25")},
  }};
}

}  // namespace

TEST(PairedT, ThreeDiffs) {
  std::vector<double> d{1, 2, 3};
  auto r = paired_t_test(d, 50.0);
  EXPECT_EQ(r.n, 3u);
  EXPECT_EQ(r.df, 2u);
  EXPECT_DOUBLE_EQ(r.mean_diff_watts, 2.0);
  EXPECT_DOUBLE_EQ(r.sd_diff_watts, 1.0);
  EXPECT_NEAR(r.t_stat, 3.4641016, 1e-6);
  EXPECT_NEAR(r.p_two_tailed, 0.0741799, 1e-6);
  EXPECT_NEAR(r.ci95_watts.lo, -0.4841377, 1e-6);
  EXPECT_NEAR(r.ci95_watts.hi, 4.4841377, 1e-6);
  EXPECT_NEAR(r.mean_reduction_pct, 4.0, 1e-12);
}

TEST(PairedT, FieldStudyTValue) {
  EXPECT_NEAR(dist::student_t_two_tailed(3.64, 86), 4.61e-4, 5e-6);
}

TEST(PairedT, ZeroVarianceIsDegenerate) {
  std::vector<double> c(5, 1.5), z(4, 0.0);
  auto r = paired_t_test(c, 10);
  EXPECT_EQ(r.p_two_tailed, 0.0);
  EXPECT_EQ(r.ci95_watts.lo, 1.5);
  EXPECT_EQ(r.ci95_watts.hi, 1.5);
  EXPECT_EQ(paired_t_test(z, 10).p_two_tailed, 1.0);
}

TEST(PairedT, NeedsTwoObservations) {
  std::vector<double> one{1.0};
  EXPECT_THROW(paired_t_test(one, 1.0), InsufficientSample);
}

TEST(PairedT, PValueFallsAsTGrows) {
  for (double df : {1.0, 2.0, 5.0, 30.0, 86.0, 500.0}) {
    double last = 1.0 + 1e-15;
    for (double t = 0.0; t <= 12.0; t += 0.25) {
      double p = dist::student_t_two_tailed(t, df);
      EXPECT_LT(p, last) << "df=" << df << " t=" << t;
      EXPECT_DOUBLE_EQ(p, dist::student_t_two_tailed(-t, df));
      last = p;
    }
  }
}

TEST(StudentT, CdfAgreesWithQuadrature) {
  for (int df : {1, 2, 3, 7, 20, 75, 200})
    for (double t = -10; t <= 10; t += 0.37)
      EXPECT_NEAR(dist::student_t_cdf(t, df), oracle::t_cdf(t, df), 1e-8) << df << " " << t;
}

TEST(StudentT, QuantileInvertsCdf) {
  for (double df : {1.0, 2.0, 10.0, 86.0})
    for (double p : {0.01, 0.2, 0.5, 0.975, 0.999})
      EXPECT_NEAR(dist::student_t_cdf(dist::student_t_quantile(p, df), df), p, 1e-10);
  EXPECT_NEAR(t_critical_975(2), 4.302653, 1e-6);
}

TEST(StudentT, IncompleteBetaEdges) {
  EXPECT_EQ(dist::incomplete_beta(2, 3, 0), 0.0);
  EXPECT_EQ(dist::incomplete_beta(2, 3, 1), 1.0);
  // I_x(1, 1) = x
  EXPECT_NEAR(dist::incomplete_beta(1, 1, 0.3), 0.3, 1e-14);
}

TEST(DifferentialSample, MatchedMondayGivesOneObservation) {
  std::vector<PowerReading> rs;
  whole_day(rs, "p1", day("2016-09-12"), 52);
  whole_day(rs, "p1", day("2016-09-19"), 47);
  whole_day(rs, "p2", day("2016-09-12"), 60);
  whole_day(rs, "p2", day("2016-09-13"), 40);  // absent all experiment days
  whole_day(rs, "p3", day("2016-09-13"), 30);
  whole_day(rs, "p3", day("2016-09-20"), 33);
  ReadingIndex idx(rs);
  auto s = build_differential_sample(idx, two_week_calendar(), Site::Nasa, "feedback", kLA);
  ASSERT_EQ(s.observations.size(), 2u);
  EXPECT_EQ(s.observations[0].participant_id, "p1");
  EXPECT_DOUBLE_EQ(s.observations[0].diff_watts, 5.0);
  EXPECT_DOUBLE_EQ(s.observations[1].diff_watts, -3.0);
  EXPECT_DOUBLE_EQ(s.baseline_pool_mean_watts, 41.0);
  EXPECT_EQ(s.phase_label, "P3N");
}

TEST(DifferentialSample, IdenticalDataGivesZeroDiffs) {
  std::vector<PowerReading> rs;
  for (const char* p : {"a", "b"})
    for (Date d = day("2016-09-12"); d <= day("2016-09-25"); d += std::chrono::days{1})
      whole_day(rs, p, d, 20.0 + weekday_index(d) + (p[0] == 'b' ? 7 : 0));
  auto s = build_differential_sample(ReadingIndex(rs), two_week_calendar(), Site::Nasa, "P3N", kLA);
  EXPECT_EQ(s.observations.size(), 14u);
  for (double d : s.diffs()) EXPECT_NEAR(d, 0.0, 1e-12);
}

TEST(DifferentialSample, ErrorsAreNamed) {
  std::vector<PowerReading> rs;
  whole_day(rs, "p1", day("2016-09-12"), 52);
  whole_day(rs, "p1", day("2016-09-19"), 47);
  ReadingIndex idx(rs);
  try {
    build_differential_sample(idx, two_week_calendar(), Site::Nasa, "P3N", kLA);
    FAIL();
  } catch (const InsufficientSample& e) {
    EXPECT_NE(std::string(e.what()).find("insufficient sample"), std::string::npos);
  }
  EXPECT_THROW(build_differential_sample(idx, two_week_calendar(), Site::Nasa, "P1N", kLA), Error);
  EXPECT_THROW(build_differential_sample(idx, two_week_calendar(), Site::Cmu, "P3N", kLA), Error);
}

TEST(Summary, ConstantParticipant) {
  std::vector<PowerReading> rs;
  Phase ph{Site::Nasa, PhaseKind::Baseline, "P1N", day("2016-09-12"), day("2016-09-14")};
  for (Date d : ph.days())
    for (std::int64_t t = 0; t < 86400; t += 60) rs.push_back({kLA.at(d, t), "p1", "s1", 50});
  auto s = summarize_phase(ReadingIndex(rs), ph, kLA);
  EXPECT_EQ(s.n, 3u);
  for (double v : {s.min, s.q1, s.median, s.q3, s.max, s.mean}) EXPECT_NEAR(v, 1.2, 1e-12);
}

TEST(Summary, MedianOfThree) {
  std::vector<double> w{72, 24, 48};
  auto s = summarize_daily_kwh(w);
  EXPECT_NEAR(s.median, 1.152, 1e-12);
  EXPECT_NEAR(s.min, 0.576, 1e-12);
  EXPECT_NEAR(s.max, 1.728, 1e-12);
  EXPECT_THROW(summarize_daily_kwh({}), InsufficientSample);
  Phase empty{Site::Nasa, PhaseKind::Baseline, "P1N", day("2016-09-12"), day("2016-09-14")};
  EXPECT_THROW(summarize_phase(ReadingIndex{}, empty, kLA), InsufficientSample);
}

TEST(Consistency, PublishedRowsReproduce) {
  auto rows = consistency_report();
  ASSERT_EQ(rows.size(), 4u);
  const auto& nasa = rows[0];
  EXPECT_NEAR(nasa.mean_diff_w, 4.895, 1e-12);
  EXPECT_LE(nasa.ci_w_delta(), 0.02);
  EXPECT_LE(nasa.p_delta(), 5e-5);
  EXPECT_LE(nasa.ci_pct_delta(), 0.02);
  EXPECT_NEAR(nasa.mean_reduction_pct, 9.52, 0.02);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_LE(rows[i].p_delta(), 0.005) << rows[i].published.label;
    EXPECT_LE(rows[i].ci_pct_delta(), 0.02) << rows[i].published.label;
    EXPECT_LE(rows[i].reduction_delta(), 0.02) << rows[i].published.label;
  }
}

TEST(Consistency, CustomRowsReplaceDefaults) {
  std::vector<PublishedResult> one{{"x", 2, 3.4641016, 0.0742, 50.0, {-0.4841, 4.4841}, {}, 4.0}};
  auto rows = consistency_report(one);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_NEAR(rows[0].implied_sd_w, 1.0, 1e-6);
  EXPECT_LT(rows[0].ci_w_delta(), 1e-4);
}

TEST(Coverage, NinetyFivePercentIntervals) {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> noise(3.0, 7.0);
  int hits = 0;
  const int trials = 4000;
  for (int i = 0; i < trials; ++i) {
    std::vector<double> d(12);
    for (auto& x : d) x = noise(rng);
    auto r = paired_t_test(d, 50);
    hits += r.ci95_watts.lo <= 3.0 && 3.0 <= r.ci95_watts.hi;
  }
  EXPECT_NEAR(hits / double(trials), 0.95, 0.015);
}
