#include <gtest/gtest.h>

#include "helpers.hpp"
#include "hdlda/normal.hpp"
#include "hdlda/theory.hpp"

using namespace hdlda;

namespace {

struct Instance {
  std::shared_ptr<const PopulationModel> truth;
  LabeledSample train;
};

Instance random_setup(std::uint64_t seed, int k, int p, int per_class, double scale = 0.8) {
  RngStream rng = rng_stream(seed, 0);
  Instance s;
  s.truth = testutil::random_population(rng, k, p, scale);
  s.train = sample_dataset(*s.truth, per_class, rng);
  return s;
}

PairTerm term_from(const Vec& a, const Vec& a_hat, double d_hat) {
  PairTerm t;
  t.a = a;
  t.a_hat = a_hat;
  t.d = 0.5 * a.squaredNorm();
  t.d_hat = d_hat;
  return t;
}

}  // namespace

TEST(PairGeometry, OptimalRuleIsPerfect) {
  const Instance s = random_setup(100, 3, 5, 1);
  const PairGeometry g = pair_geometry(*s.truth, fit_optimal(s.truth));
  for (int j = 1; j <= 3; ++j) {
    for (int i = 1; i <= 3; ++i) {
      if (i == j) continue;
      const PairTerm& t = g.at(j, i);
      EXPECT_NEAR(t.t, 1.0, 1e-12);
      EXPECT_NEAR(t.perp_norm_sq, 0.0, 1e-10);
      EXPECT_EQ(t.d_hat, t.d);
    }
  }
  const BoundReport b = theorem1_bound(g);
  EXPECT_EQ(b.bound, 0.0);
}

TEST(PairGeometry, AntisymmetryAndHalfNorm) {
  const Instance s = random_setup(101, 4, 6, 20);
  for (Method m : {Method::Glda, Method::Lpd}) {
    FitParams params;
    params.lambda = 0.2;
    const PairGeometry g = pair_geometry(*s.truth, fit(m, s.train, params));
    for (int j = 1; j <= 4; ++j) {
      for (int i = 1; i <= 4; ++i) {
        if (i == j) continue;
        EXPECT_EQ(g.at(j, i).a, -g.at(i, j).a);
        EXPECT_EQ(g.at(j, i).a_hat, -g.at(i, j).a_hat);
        EXPECT_NEAR(g.at(j, i).d, 0.5 * g.at(j, i).a.squaredNorm(), 1e-10);
        EXPECT_GE(g.at(j, i).perp_norm_sq, 0.0);
      }
    }
  }
}

TEST(PairGeometry, DimensionMismatch) {
  const Instance s = random_setup(102, 3, 5, 10);
  const Instance other = random_setup(103, 3, 6, 10);
  EXPECT_HDLDA_ERROR(pair_geometry(*other.truth, fit(Method::Glda, s.train, FitParams{})),
                     ErrorCode::DimensionMismatch);
}

TEST(PairGeometry, GldaConsistentAtLargeN) {
  const Instance s = random_setup(104, 3, 5, 33334);
  const PairGeometry g = pair_geometry(*s.truth, fit(Method::Glda, s.train, FitParams{}));
  for (int j = 1; j <= 3; ++j) {
    for (int i = 1; i <= 3; ++i) {
      if (i == j) continue;
      EXPECT_NEAR(g.at(j, i).t, 1.0, 0.05);
      EXPECT_LT(std::abs(g.at(j, i).d_hat - g.at(j, i).d), 0.05 * g.at(j, i).d);
    }
  }
}

TEST(PairTerms, PerfectCorrelationBranch) {
  Vec a(3);
  a << 1.0, 0.5, -0.2;
  const double d = 0.5 * a.squaredNorm();
  const double shift = 0.3;
  const PairTerm t = term_from(a, a, d - shift);
  const double na = a.norm();
  EXPECT_NEAR(pair_exceedance(t), std_normal_cdf(d / na) - std_normal_cdf((d - shift) / na), 1e-15);
  EXPECT_EQ(pair_deficit(t), 0.0);
}

TEST(PairTerms, ZeroFittedDirection) {
  Vec a(2);
  a << 1.0, 1.0;
  const Vec zero = Vec::Zero(2);
  EXPECT_EQ(pair_exceedance(term_from(a, zero, 0.5)), 0.0);
  EXPECT_NEAR(pair_exceedance(term_from(a, zero, -0.5)), std_normal_cdf(1.0 / std::sqrt(2.0)), 1e-15);
}

TEST(PairTerms, MatchDirectMonteCarlo) {
  RngStream rng = rng_stream(105, 0);
  const int draws = 1000000;
  for (int pair = 0; pair < 20; ++pair) {
    const int p = 2 + pair % 4;
    const Vec a = testutil::gaussian_matrix(rng, p, 1);
    const Vec a_hat = a + 0.7 * testutil::gaussian_matrix(rng, p, 1);
    const PairTerm t = term_from(a, a_hat, 0.5 * a.squaredNorm() + 0.6 * rng.normal());
    long exceed = 0, deficit = 0;
    Vec z(p);
    for (int i = 0; i < draws; ++i) {
      for (int c = 0; c < p; ++c) z(c) = rng.normal();
      const double u = a_hat.dot(z), v = a.dot(z);
      exceed += u > t.d_hat && v < t.d;
      deficit += u < t.d_hat && v > t.d;
    }
    for (auto [count, value] : {std::pair{exceed, pair_exceedance(t)}, std::pair{deficit, pair_deficit(t)}}) {
      const double est = static_cast<double>(count) / draws;
      const double se = std::sqrt(std::max(est * (1 - est), 1e-12) / draws);
      EXPECT_LE(std::abs(est - value), 3.5 * se + 1e-7) << pair;
    }
  }
}

TEST(GapBound, BoundDominatesGapForGlda) {
  const Instance s = random_setup(106, 3, 6, 15);
  const ClassifierModel m = fit(Method::Glda, s.train, FitParams{});
  BoundReport b = theorem1_bound(pair_geometry(*s.truth, m));
  RngStream rng = rng_stream(106, 1);
  attach_mc_gap(b, *s.truth, m, 200000, rng);
  ASSERT_TRUE(b.gap_est);
  EXPECT_GE(b.bound, *b.gap_est - 3 * *b.gap_std_error);
  EXPECT_GE(b.bound, 0.0);
  for (int j = 0; j < 3; ++j) {
    for (int i = 0; i < 3; ++i) {
      EXPECT_GE(b.per_pair_probability(j, i), 0.0);
      EXPECT_LE(b.per_pair_probability(j, i), 1.0);
    }
  }
}

TEST(K2Equality, GldaAndUnthresholdedSlda) {
  const Instance s = random_setup(107, 2, 5, 250, 0.6);
  FitParams slda;
  slda.m1 = 0.0;
  slda.m2 = 0.0;
  for (const auto& [method, params] : {std::pair{Method::Glda, FitParams{}}, std::pair{Method::Slda1, slda}}) {
    const ClassifierModel m = fit(method, s.train, params);
    const PairGeometry g = pair_geometry(*s.truth, m);
    RngStream rng = rng_stream(107, 1);
    const K2Check c = k2_equality_check(g, *s.truth, m, 200000, rng);
    EXPECT_TRUE(c.within_3se) << method_name(method) << " residual " << c.residual << " se " << c.mc_gap_std_error;
  }
}

TEST(K2Equality, OptimalBothSidesZero) {
  const Instance s = random_setup(108, 2, 4, 1);
  const ClassifierModel m = fit_optimal(s.truth);
  RngStream rng = rng_stream(108, 1);
  const K2Check c = k2_equality_check(pair_geometry(*s.truth, m), *s.truth, m, 20000, rng);
  EXPECT_EQ(c.equality_value, 0.0);
  EXPECT_EQ(c.mc_gap, 0.0);
  EXPECT_TRUE(c.within_3se);
}

TEST(K2Equality, RequiresTwoClasses) {
  const Instance s = random_setup(109, 3, 4, 1);
  const ClassifierModel m = fit_optimal(s.truth);
  RngStream rng = rng_stream(109, 1);
  EXPECT_HDLDA_ERROR(k2_equality_check(pair_geometry(*s.truth, m), *s.truth, m, 2000, rng),
                     ErrorCode::InvalidArgument);
}

TEST(ExampleBounds, DTenEpsOne) {
  const ExampleBounds e = example_bounds(10.0, 1.0);
  EXPECT_NEAR(e.upper_ratio_bound, 1.0 / std_normal_cdf(5.0), 1e-15);
  EXPECT_NEAR(e.upper_ratio_bound - 1.0, 2.87e-7, 0.01e-7);
  EXPECT_NEAR(e.mixing_bound, std::exp(-5.0), 1e-18);
  EXPECT_NEAR(e.strip_prob, std_normal_cdf(10.0) - std_normal_cdf(9.0), 1e-18);
}

TEST(ExampleBounds, MonotoneTowardLimits) {
  double prev_ratio = 1e300, prev_mix = 1e300;
  for (int d = 2; d <= 20; d += 2) {
    const ExampleBounds e = example_bounds(d, 4.0 / std::sqrt(d));
    // 1/Φ(d/2) rounds to exactly 1 once d/2 passes about 8.3
    EXPECT_LE(e.upper_ratio_bound, prev_ratio);
    EXPECT_LT(e.mixing_bound, prev_mix);
    EXPECT_GE(e.upper_ratio_bound, 1.0);
    prev_ratio = e.upper_ratio_bound;
    prev_mix = e.mixing_bound;
  }
  const ExampleBounds small = example_bounds(0.1, 0.1);
  EXPECT_GT(small.upper_ratio_bound, 1.9);
  EXPECT_GT(small.mixing_bound, 0.99);
  EXPECT_HDLDA_ERROR(example_bounds(0.0, 1.0), ErrorCode::InvalidArgument);
}

TEST(LowerBound, PlugInArithmetic) {
  PairGeometry g;
  g.k = 2;
  g.pairs.resize(4);
  Vec a(1);
  a << 1.0;
  g.pairs[1] = term_from(-a, -a, 0.5);
  g.pairs[2] = term_from(a, a, 0.5);
  g.m_min = g.m_max = 1.0;
  const LowerBoundReport r = theorem3_lower_bound(g, 1.0, 4.0, 1.0, 0.1);
  EXPECT_NEAR(r.value, 0.1, 1e-15);
  EXPECT_TRUE(r.ratio_condition);
  EXPECT_FALSE(r.perp_condition);
  EXPECT_HDLDA_ERROR(theorem3_lower_bound(g, 0.5, 1.0, 1.0, 0.1), ErrorCode::InvalidArgument);
}

TEST(LowerBound, OptimalGeometryFailsPerpCondition) {
  const Instance s = random_setup(110, 3, 5, 1);
  const PairGeometry g = pair_geometry(*s.truth, fit_optimal(s.truth));
  for (double c5 : {1e-6, 0.1, 1.0}) {
    EXPECT_FALSE(theorem3_lower_bound(g, 10.0, c5, 1.0, 0.1).perp_condition);
  }
}
