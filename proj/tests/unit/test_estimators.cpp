#include <gtest/gtest.h>

#include <cmath>

#include "helpers.hpp"
#include "hdlda/estimators.hpp"

using namespace hdlda;

namespace {

LabeledSample make_sample(const Mat& x, std::vector<int> labels, int k) {
  LabeledSample s;
  s.x = x;
  s.labels = std::move(labels);
  s.k = k;
  return s;
}

LabeledSample model_sample(int model, int p, int k, int per_class, std::uint64_t seed) {
  const PopulationModel m = make_sim_model(model, p, k);
  RngStream rng = rng_stream(seed, 0);
  return sample_dataset(m, per_class, rng);
}

}  // namespace

TEST(FitStats, OnePointPerClassHasNoSpread) {
  Mat x(2, 3);
  x << 1, 2, 3, -1, 0, 4;
  const FittedStats s = fit_stats(make_sample(x, {1, 2}, 2));
  EXPECT_EQ(max_abs(s.pooled_cov), 0.0);
  EXPECT_EQ(s.class_means.row(1), x.row(1));
}

TEST(FitStats, DivisorIsN) {
  Mat x(2, 2);
  x << 0, 0, 2, 0;
  LabeledSample s = make_sample(x, {1, 1}, 1);
  const FittedStats st = fit_stats(s);
  EXPECT_DOUBLE_EQ(st.class_means(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(st.pooled_cov(0, 0), 1.0);
  EXPECT_EQ(st.pooled_cov(1, 1), 0.0);
  EXPECT_EQ(st.pooled_cov(0, 1), 0.0);
}

TEST(FitStats, MatchesNaiveFormula) {
  const LabeledSample s = model_sample(3, 30, 3, 20, 31);
  const FittedStats st = fit_stats(s);
  Mat naive = Mat::Zero(30, 30);
  for (int r = 0; r < s.n(); ++r) {
    const Vec d = s.x.row(r).transpose() - st.class_means.row(s.labels[static_cast<std::size_t>(r)] - 1).transpose();
    naive += d * d.transpose();
  }
  naive /= s.n();
  EXPECT_LT(max_abs(naive - st.pooled_cov), 1e-12);
  EXPECT_TRUE(is_symmetric(st.pooled_cov, 0.0));
  EXPECT_GE(sym_eigen(st.pooled_cov).values.minCoeff(), -1e-12);
  EXPECT_DOUBLE_EQ(st.shrink_factor, 1.0 - 3.0 / 60.0);
}

TEST(FitStats, ClassShiftInvariance) {
  LabeledSample s = model_sample(1, 20, 3, 15, 32);
  const Mat before = fit_stats(s).pooled_cov;
  for (int r = 0; r < s.n(); ++r) {
    if (s.labels[static_cast<std::size_t>(r)] == 2) s.x.row(r).array() += 3.5;
  }
  EXPECT_LT(max_abs(fit_stats(s).pooled_cov - before), 1e-12);
}

TEST(FitStats, EmptyClass) {
  Mat x = Mat::Zero(2, 2);
  EXPECT_HDLDA_ERROR(fit_stats(make_sample(x, {1, 1}, 2)), ErrorCode::EmptyClass);
}

TEST(CorrectedCov, Factor) {
  const LabeledSample s = model_sample(1, 20, 2, 5, 33);
  const FittedStats st = fit_stats(s);
  EXPECT_LT(max_abs(corrected_cov(st) - st.pooled_cov / (1.0 - 2.0 / 10.0)), 1e-15);
  FittedStats degenerate = st;
  degenerate.n = 2;
  EXPECT_HDLDA_ERROR(corrected_cov(degenerate), ErrorCode::DegenerateDesign);
}

TEST(CorrectedCov, UnbiasedOverReplications) {
  // E[Σ̄] = Σ: average of 200 corrected estimates at n=200, p=10, K=5.
  const PopulationModel m = make_sim_model(3, 50, 5);
  Mat sigma = m.sigma().topLeftCorner(10, 10);
  Mat means = Mat::Zero(5, 10);
  for (int c = 0; c < 5; ++c) means(c, c) = 1;
  const PopulationModel small(means, sigma);
  RngStream rng = rng_stream(34, 0);
  const int reps = 200;
  Mat sum = Mat::Zero(10, 10), sumsq = Mat::Zero(10, 10);
  for (int r = 0; r < reps; ++r) {
    const Mat e = corrected_cov(fit_stats(sample_dataset(small, 40, rng)));
    sum += e;
    sumsq += e.cwiseProduct(e);
  }
  const Mat mean = sum / reps;
  const Mat var = sumsq / reps - mean.cwiseProduct(mean);
  int outside = 0;
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) {
      const double se = std::sqrt(var(i, j) / reps);
      if (std::abs(mean(i, j) - sigma(i, j)) > 3.5 * se) ++outside;
    }
  }
  EXPECT_LE(outside, 2);  // 100 entries at 3.5 SE
}

TEST(ThresholdCov, ZeroThresholdKeepsEverything) {
  const LabeledSample s = model_sample(1, 20, 3, 10, 35);
  const FittedStats st = fit_stats(s);
  const ThresholdedCov tc = threshold_cov(st, 0.0);
  EXPECT_EQ(tc.t_n, 0.0);
  EXPECT_EQ(tc.sigma_tilde, corrected_cov(st));
}

TEST(ThresholdCov, LevelArithmetic) {
  Mat sigma_bar = Mat::Identity(300, 300);
  sigma_bar(0, 1) = sigma_bar(1, 0) = 0.0556;
  sigma_bar(0, 2) = sigma_bar(2, 0) = 0.005;
  const ThresholdedCov tc = threshold_cov(sigma_bar, 450, 0.1);
  EXPECT_NEAR(tc.t_n, 0.1 * std::sqrt(std::log(300.0) / 450.0), 1e-15);
  EXPECT_NEAR(tc.t_n, 0.0113, 1e-4);
  EXPECT_EQ(tc.sigma_tilde(0, 1), 0.0556);
  EXPECT_EQ(tc.sigma_tilde(0, 2), 0.0);
  EXPECT_EQ(tc.sigma_tilde(2, 0), 0.0);
}

TEST(ThresholdCov, EntriesKeptOrZeroedAndIdempotent) {
  const LabeledSample s = model_sample(3, 40, 3, 10, 36);
  const FittedStats st = fit_stats(s);
  const Mat bar = corrected_cov(st);
  const ThresholdedCov tc = threshold_cov(st, 0.5);
  EXPECT_TRUE(is_symmetric(tc.sigma_tilde, 0.0));
  for (int i = 0; i < 40; ++i) {
    for (int j = 0; j < 40; ++j) {
      const double v = tc.sigma_tilde(i, j);
      if (v != 0.0) {
        EXPECT_EQ(v, bar(i, j));
        EXPECT_GE(std::abs(v), tc.t_n);
      } else {
        EXPECT_LT(std::abs(bar(i, j)), tc.t_n);
      }
    }
  }
  EXPECT_EQ(threshold_cov(tc.sigma_tilde, st.n, 0.5).sigma_tilde, tc.sigma_tilde);
}

TEST(ThresholdDeltas, RowOneZeroAndKeepRule) {
  const LabeledSample s = model_sample(1, 30, 3, 20, 37);
  const FittedStats st = fit_stats(s);
  const ThresholdedDeltas td = threshold_deltas(st, 0.5, 0.3);
  EXPECT_NEAR(td.a_n, 0.5 * std::pow(std::log(30.0) / 60.0, 0.3), 1e-15);
  EXPECT_EQ(td.deltas_to_1.row(0).cwiseAbs().maxCoeff(), 0.0);
  for (int j = 1; j < 3; ++j) {
    for (int c = 0; c < 30; ++c) {
      const double raw = st.class_means(j, c) - st.class_means(0, c);
      const double v = td.deltas_to_1(j, c);
      if (v != 0.0) {
        EXPECT_EQ(v, raw);
        EXPECT_GE(std::abs(raw), td.a_n);
      } else {
        EXPECT_LT(std::abs(raw), td.a_n);
      }
    }
  }
  const ThresholdedDeltas none = threshold_deltas(st, 0.0, 0.3);
  for (int j = 1; j < 3; ++j) {
    EXPECT_EQ(none.deltas_to_1.row(j), st.class_means.row(j) - st.class_means.row(0));
  }
}

TEST(ThresholdDeltas, HandExample) {
  // δ̂ = (0.5, 0.01) with a_n = 0.2 keeps only the first coordinate.
  Mat x(2, 2);
  x << 0, 0, 0.5, 0.01;
  const FittedStats st = fit_stats(make_sample(x, {1, 2}, 2));
  const double m2 = 0.2 / std::pow(std::log(2.0) / 2.0, 0.3);
  const ThresholdedDeltas td = threshold_deltas(st, m2, 0.3);
  EXPECT_NEAR(td.a_n, 0.2, 1e-15);
  EXPECT_EQ(td.deltas_to_1(1, 0), 0.5);
  EXPECT_EQ(td.deltas_to_1(1, 1), 0.0);
}

TEST(ThresholdDeltas, Antisymmetry) {
  const LabeledSample s = model_sample(1, 30, 4, 10, 38);
  const ThresholdedDeltas td = threshold_deltas(fit_stats(s), 0.3, 0.3);
  for (int j = 0; j < 4; ++j) {
    for (int i = 0; i < 4; ++i) {
      const Vec ji = td.deltas_to_1.row(j) - td.deltas_to_1.row(i);
      const Vec ij = td.deltas_to_1.row(i) - td.deltas_to_1.row(j);
      EXPECT_EQ(ji, -ij);
    }
  }
}

TEST(ThresholdDeltas, AlphaRange) {
  const FittedStats st = fit_stats(model_sample(1, 30, 3, 5, 39));
  EXPECT_HDLDA_ERROR(threshold_deltas(st, 1.0, 0.5), ErrorCode::InvalidArgument);
  EXPECT_HDLDA_ERROR(threshold_deltas(st, 1.0, 0.0), ErrorCode::InvalidArgument);
}

TEST(LpdDirections, IdentitySoftThreshold) {
  Mat means = Mat::Zero(2, 2);
  means(1, 0) = 1.0;
  const LpdDirections d = lpd_directions(Mat::Identity(2, 2), means, 0.4);
  ASSERT_TRUE(d.all_feasible());
  EXPECT_NEAR(d.betas_to_1(1, 0), 0.6, 1e-10);
  EXPECT_NEAR(d.betas_to_1(1, 1), 0.0, 1e-10);
  EXPECT_EQ(d.betas_to_1.row(0).cwiseAbs().maxCoeff(), 0.0);
  const LpdDirections zero = lpd_directions(Mat::Identity(2, 2), means, 1.0);
  EXPECT_LT(zero.betas_to_1.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(LpdDirections, ZeroRowInfeasible) {
  Mat sigma_bar = Mat::Zero(2, 2);
  sigma_bar(0, 0) = 1.0;
  Mat means = Mat::Zero(2, 2);
  means(1, 1) = 1.0;
  const LpdDirections d = lpd_directions(sigma_bar, means, 0.5);
  EXPECT_FALSE(d.all_feasible());
  EXPECT_FALSE(d.feasible_flags[1]);
}

TEST(LpdDirections, FeasibleRowsAndMinimality) {
  const LabeledSample s = model_sample(3, 30, 3, 20, 40);
  const FittedStats st = fit_stats(s);
  const Mat bar = corrected_cov(st);
  const LpdDirections d = lpd_directions(st, 0.3);
  ASSERT_TRUE(d.all_feasible());
  for (int j = 1; j < 3; ++j) {
    const Vec delta = (st.class_means.row(j) - st.class_means.row(0)).transpose();
    const Vec beta = d.betas_to_1.row(j).transpose();
    EXPECT_LE((bar * beta - delta).cwiseAbs().maxCoeff(), 0.3 + 1e-8);
    // An independently built feasible point: the exact solution Σ̄⁻¹δ̂.
    const Vec exact = bar.ldlt().solve(delta);
    EXPECT_LE(beta.lpNorm<1>(), exact.lpNorm<1>() + 1e-8);
  }
}

TEST(Rates, ModelOneOracle) {
  const PopulationModel m = make_sim_model(1, 300, 3);
  const RateReport r = sparsity_and_rates(m, 450, 3, 0.5, 0.5, 0.3, 2.0, 1.0);
  const double lp = std::log(300.0) / 450.0;
  EXPECT_NEAR(r.m_min, 20.0, 1e-6);
  EXPECT_NEAR(r.m_max, 20.0, 1e-6);
  EXPECT_NEAR(r.d_gp, 10.0, 1e-6);
  const double s_n = 300 * std::sqrt(lp) + 3 / std::sqrt(20.0) * std::sqrt(300.0 / 450.0);
  EXPECT_NEAR(r.s_n, s_n, 1e-6);
  EXPECT_NEAR(r.s_n, 34.3, 0.05);
  // Row sums of |σ|^{1/2}: 1 + 299·√0.5.
  EXPECT_NEAR(r.c_hp, 1 + 299 * std::sqrt(0.5), 1e-9);
  EXPECT_NEAR(r.d_n_rate, r.c_hp * std::pow(lp, 0.25), 1e-9);
  EXPECT_NEAR(r.a_n, std::pow(lp, 0.3), 1e-12);
  EXPECT_EQ(r.q_n, 10);
  EXPECT_LE(r.q_n, 300);
}

TEST(Rates, IdentityCovarianceCountsDiagonal) {
  Mat means = Mat::Zero(2, 5);
  means(1, 0) = 2;
  const PopulationModel m(means, Mat::Identity(5, 5));
  const RateReport r = sparsity_and_rates(m, 100, 2, 0.5, 0.5, 0.3, 2.0, 1.0);
  EXPECT_DOUBLE_EQ(r.c_hp, 1.0);
  EXPECT_NEAR(r.l1_beta_max, 2.0, 1e-12);
  const RateReport zero_h = sparsity_and_rates(m, 100, 2, 0.0, 0.0, 0.3, 2.0, 1.0);
  EXPECT_DOUBLE_EQ(zero_h.c_hp, 1.0);
  EXPECT_DOUBLE_EQ(zero_h.d_gp, 1.0);
}

TEST(Rates, MonotoneInH) {
  // All off-diagonal entries <= 1 in magnitude: C_{h,p} nonincreasing in h.
  const PopulationModel m = make_sim_model(3, 40, 3);
  double prev = 1e300;
  for (double h : {0.0, 0.2, 0.4, 0.6, 0.8}) {
    const double c = sparsity_and_rates(m, 200, 3, h, 0.5, 0.3, 2.0, 1.0).c_hp;
    EXPECT_LE(c, prev + 1e-12);
    prev = c;
  }
  // Entries >= 1: nondecreasing.
  Mat sigma = 3.0 * Mat::Identity(4, 4);
  sigma.array() += 1.5;
  Mat means = Mat::Zero(2, 4);
  means(1, 0) = 1;
  const PopulationModel big(means, sigma);
  prev = -1;
  for (double h : {0.0, 0.2, 0.4, 0.6, 0.8}) {
    const double c = sparsity_and_rates(big, 200, 2, h, 0.5, 0.3, 2.0, 1.0).c_hp;
    EXPECT_GE(c, prev - 1e-12);
    prev = c;
  }
}
