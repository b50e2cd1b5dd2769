#include "hdlda/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hdlda/error.hpp"

namespace hdlda {

FittedStats fit_stats(const LabeledSample& data) {
  data.validate();
  FittedStats out;
  out.k = data.k;
  out.p = data.p();
  out.n = data.n();
  out.class_counts = data.counts();
  for (int c = 0; c < out.k; ++c) {
    if (out.class_counts[static_cast<std::size_t>(c)] == 0) {
      std::ostringstream msg;
      msg << "class " << c + 1 << " has no observations";
      throw Error(ErrorCode::EmptyClass, msg.str());
    }
  }

  out.class_means = Mat::Zero(out.k, out.p);
  for (int r = 0; r < out.n; ++r) {
    out.class_means.row(data.labels[static_cast<std::size_t>(r)] - 1) += data.x.row(r);
  }
  for (int c = 0; c < out.k; ++c) {
    out.class_means.row(c) /= out.class_counts[static_cast<std::size_t>(c)];
  }

  Mat centered = data.x;
  for (int r = 0; r < out.n; ++r) {
    centered.row(r) -= out.class_means.row(data.labels[static_cast<std::size_t>(r)] - 1);
  }
  out.pooled_cov = Mat::Zero(out.p, out.p);
  out.pooled_cov.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose(), 1.0 / out.n);
  symmetrize_from_lower(out.pooled_cov);
  out.shrink_factor = 1.0 - static_cast<double>(out.k) / out.n;
  return out;
}

Mat corrected_cov(const FittedStats& stats) {
  if (stats.k >= stats.n) {
    throw Error(ErrorCode::DegenerateDesign, "shrinkage correction needs K < n");
  }
  return stats.pooled_cov / stats.shrink_factor;
}

ThresholdedCov threshold_cov(const Mat& sigma_bar, int n, double m1) {
  if (m1 < 0.0) throw Error(ErrorCode::InvalidArgument, "threshold_cov: m1 must be >= 0");
  const double p = static_cast<double>(sigma_bar.rows());
  ThresholdedCov out;
  out.m1 = m1;
  out.t_n = m1 * std::sqrt(std::log(p) / n);
  const double t = out.t_n;
  out.sigma_tilde = sigma_bar.unaryExpr([t](double v) { return std::abs(v) >= t ? v : 0.0; });
  return out;
}

ThresholdedCov threshold_cov(const FittedStats& stats, double m1) {
  return threshold_cov(corrected_cov(stats), stats.n, m1);
}

ThresholdedDeltas threshold_deltas(const FittedStats& stats, double m2, double alpha) {
  if (!(alpha > 0.0 && alpha < 0.5)) {
    throw Error(ErrorCode::InvalidArgument, "threshold_deltas: alpha must lie in (0, 1/2)");
  }
  if (m2 < 0.0) throw Error(ErrorCode::InvalidArgument, "threshold_deltas: m2 must be >= 0");
  ThresholdedDeltas out;
  out.m2 = m2;
  out.alpha = alpha;
  out.a_n = m2 * std::pow(std::log(static_cast<double>(stats.p)) / stats.n, alpha);
  out.deltas_to_1 = Mat::Zero(stats.k, stats.p);
  const double a = out.a_n;
  for (int j = 1; j < stats.k; ++j) {
    out.deltas_to_1.row(j) = (stats.class_means.row(j) - stats.class_means.row(0))
                                 .unaryExpr([a](double v) { return std::abs(v) >= a ? v : 0.0; });
  }
  return out;
}

bool LpdDirections::all_feasible() const {
  return std::all_of(feasible_flags.begin(), feasible_flags.end(), [](bool f) { return f; });
}

LpdDirections lpd_directions(const Mat& sigma_bar, const Mat& class_means, double lambda) {
  if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, "lpd_directions: lambda must be > 0");
  const Eigen::Index k = class_means.rows();
  const Eigen::Index p = class_means.cols();
  LpdDirections out;
  out.lambda_n = lambda;
  out.betas_to_1 = Mat::Zero(k, p);
  out.feasible_flags.assign(static_cast<std::size_t>(k), true);
  out.statuses.assign(static_cast<std::size_t>(k), LpStatus::Optimal);
  for (Eigen::Index j = 1; j < k; ++j) {
    const Vec delta = (class_means.row(j) - class_means.row(0)).transpose();
    const L1LinfResult res = solve_l1_linf(sigma_bar, delta, lambda);
    out.statuses[static_cast<std::size_t>(j)] = res.status;
    if (res.status == LpStatus::Optimal) {
      out.betas_to_1.row(j) = res.beta.transpose();
    } else {
      out.feasible_flags[static_cast<std::size_t>(j)] = false;
    }
  }
  return out;
}

LpdDirections lpd_directions(const FittedStats& stats, double lambda) {
  return lpd_directions(corrected_cov(stats), stats.class_means, lambda);
}

namespace {

// |v|^h with 0^h := 0.
double sparse_pow(double v, double h) {
  const double a = std::abs(v);
  return a == 0.0 ? 0.0 : std::pow(a, h);
}

}  // namespace

RateReport sparsity_and_rates(const PopulationModel& model, int n, int k_classes, double h,
                              double g, double alpha, double r, double m2) {
  if (n <= k_classes) throw Error(ErrorCode::InvalidArgument, "sparsity_and_rates: need n > K");
  if (!(h >= 0.0 && h < 1.0) || !(g >= 0.0 && g < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "sparsity_and_rates: h and g must lie in [0, 1)");
  }
  if (!(r > 1.0)) throw Error(ErrorCode::InvalidArgument, "sparsity_and_rates: r must be > 1");

  const int p = model.p();
  const int k = model.k();
  const double log_p_n = std::log(static_cast<double>(p)) / n;
  RateReport out;
  out.h = h;
  out.g = g;
  out.alpha = alpha;
  out.r = r;
  out.m2 = m2;
  out.a_n = m2 * std::pow(log_p_n, alpha);

  const Mat& sigma = model.sigma();
  for (int row = 0; row < p; ++row) {
    double s = 0.0;
    for (int col = 0; col < p; ++col) s += sparse_pow(sigma(row, col), h);
    out.c_hp = std::max(out.c_hp, s);
  }

  const Mat& means = model.means();
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      if (i == j) continue;
      const Vec delta = (means.row(j) - means.row(i)).transpose();
      double s = 0.0;
      for (int c = 0; c < p; ++c) s += sparse_pow(delta(c), 2.0 * g);
      out.d_gp = std::max(out.d_gp, s);
      out.l1_beta_max = std::max(out.l1_beta_max, (model.sigma_inv() * delta).lpNorm<1>());
    }
  }

  for (int j = 1; j < k; ++j) {
    int count = 0;
    for (int c = 0; c < p; ++c) {
      if (std::abs(means(j, c) - means(0, c)) > out.a_n / r) ++count;
    }
    out.q_n = std::max(out.q_n, count);
  }

  const MahalanobisSummary maha = mahalanobis_matrix(model);
  out.m_min = maha.m_min;
  out.m_max = maha.m_max;
  const double kk = k_classes;
  out.s_n = p * std::sqrt(log_p_n) + kk / std::sqrt(out.m_min) * std::sqrt(static_cast<double>(p) / n);
  out.d_n_rate = out.c_hp * std::pow(log_p_n, (1.0 - h) / 2.0);
  const double second = std::sqrt(std::pow(out.a_n, 2.0 * (1.0 - g)) * out.d_gp) / std::sqrt(out.m_min);
  const double third = std::sqrt((out.c_hp + kk) * out.q_n / n) / std::sqrt(out.m_min);
  out.b_n = std::max({out.d_n_rate, second, third});
  const double l1 = out.l1_beta_max;
  out.r_n = (std::sqrt(kk * out.m_max) * l1 + l1 * l1) * std::sqrt(log_p_n);
  out.lambda_n_unit = std::sqrt(out.m_max * log_p_n);
  return out;
}

}  // namespace hdlda
