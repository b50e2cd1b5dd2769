#include "hdlda/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hdlda/error.hpp"
#include "hdlda/normal.hpp"

namespace hdlda {

namespace {

constexpr double kUnitCorrelation = 1.0 - 1e-9;

void fill_scalars(PairTerm& term) {
  const double a2 = term.a.squaredNorm();
  const double h2 = term.a_hat.squaredNorm();
  term.d = 0.5 * a2;
  term.t = h2 > 0.0 ? term.a.dot(term.a_hat) / h2 : 0.0;
  term.perp_norm_sq = std::max(a2 - term.t * term.t * h2, 0.0);
}

}  // namespace

PairGeometry pair_geometry(const PopulationModel& truth, const ClassifierModel& model) {
  if (model.k != truth.k() || model.p != truth.p()) {
    throw Error(ErrorCode::DimensionMismatch, "pair_geometry: model and population disagree on K or p");
  }
  const int k = truth.k();
  PairGeometry geom;
  geom.k = k;
  geom.pairs.resize(static_cast<std::size_t>(k * k));
  const Mat inv_sqrt = truth.sigma_sqrt() * truth.sigma_inv();  // Σ^{-1/2}
  const bool optimal = model.method == Method::Opt;
  const std::vector<PairDiscriminant> pairs = optimal ? std::vector<PairDiscriminant>{}
                                                      : pairwise_discriminants(model);

  for (int j = 0; j < k; ++j) {
    for (int i = 0; i < j; ++i) {
      const Vec delta = (truth.means().row(j) - truth.means().row(i)).transpose();
      PairTerm ji;
      PairTerm ij;
      ji.a = inv_sqrt * delta;
      ij.a = -ji.a;
      if (optimal) {
        ji.a_hat = ji.a;
        ij.a_hat = ij.a;
      } else {
        const PairDiscriminant& pd = pairs[static_cast<std::size_t>(j * k + i)];
        ji.a_hat = truth.sigma_sqrt() * pd.w;
        ij.a_hat = -ji.a_hat;
      }
      fill_scalars(ji);
      fill_scalars(ij);
      if (optimal) {
        ji.d_hat = ji.d;
        ij.d_hat = ij.d;
      } else {
        const PairDiscriminant& pd_ji = pairs[static_cast<std::size_t>(j * k + i)];
        const PairDiscriminant& pd_ij = pairs[static_cast<std::size_t>(i * k + j)];
        ji.d_hat = pd_ji.c - pd_ji.w.dot(truth.means().row(i).transpose());
        ij.d_hat = pd_ij.c - pd_ij.w.dot(truth.means().row(j).transpose());
      }
      geom.pairs[static_cast<std::size_t>(j * k + i)] = std::move(ji);
      geom.pairs[static_cast<std::size_t>(i * k + j)] = std::move(ij);
    }
  }
  const MahalanobisSummary maha = mahalanobis_matrix(truth);
  geom.m_min = maha.m_min;
  geom.m_max = maha.m_max;
  return geom;
}

double pair_exceedance(const PairTerm& term) {
  const double na = term.a.norm();
  const double nh = term.a_hat.norm();
  const double x = term.d / na;
  if (nh == 0.0) return term.d_hat < 0.0 ? std_normal_cdf(x) : 0.0;
  const double y = term.d_hat / nh;
  const double rho = term.a.dot(term.a_hat) / (na * nh);
  double value;
  if (rho >= kUnitCorrelation) {
    value = std_normal_cdf(x) - std_normal_cdf(y);
  } else if (rho <= -kUnitCorrelation) {
    value = std_normal_cdf(std::min(x, -y));
  } else {
    value = std_normal_cdf(x) - bvn_lower_cdf(y, x, rho);
  }
  return std::clamp(value, 0.0, 1.0);
}

double pair_deficit(const PairTerm& term) {
  const double na = term.a.norm();
  const double nh = term.a_hat.norm();
  const double x = term.d / na;
  if (nh == 0.0) return term.d_hat > 0.0 ? std_normal_sf(x) : 0.0;
  const double y = term.d_hat / nh;
  const double rho = term.a.dot(term.a_hat) / (na * nh);
  double value;
  if (rho >= kUnitCorrelation) {
    value = std_normal_cdf(y) - std_normal_cdf(x);
  } else if (rho <= -kUnitCorrelation) {
    // U = -V: P(V < -y, V > x)
    value = std_normal_cdf(-y) - std_normal_cdf(x);
  } else {
    value = std_normal_cdf(y) - bvn_lower_cdf(y, x, rho);
  }
  return std::clamp(value, 0.0, 1.0);
}

BoundReport theorem1_bound(const PairGeometry& geom) {
  BoundReport out;
  const int k = geom.k;
  out.per_pair_probability = Mat::Zero(k, k);
  double total = 0.0;
  for (int i = 1; i <= k; ++i) {
    for (int j = 1; j <= k; ++j) {
      if (i == j) continue;
      const double prob = pair_exceedance(geom.at(j, i));
      out.per_pair_probability(j - 1, i - 1) = prob;
      total += prob;
    }
  }
  out.bound = total / k;
  return out;
}

void attach_mc_gap(BoundReport& report, const PopulationModel& truth, const ClassifierModel& model,
                   int mc_samples, RngStream& rng) {
  const GapEstimate gap = conditional_gap(model, truth, mc_samples, rng);
  report.r_opt_est = gap.r_opt.estimate;
  report.r_t_est = gap.r_t.estimate;
  report.gap_est = gap.gap;
  report.gap_std_error = gap.gap_std_error;
}

K2Check k2_equality_check(const PairGeometry& geom, const PopulationModel& truth,
                          const ClassifierModel& model, int mc_samples, RngStream& rng) {
  if (geom.k != 2) throw Error(ErrorCode::InvalidArgument, "k2_equality_check needs K = 2");
  K2Check out;
  double sum = 0.0;
  for (int i = 1; i <= 2; ++i) {
    const int j = 3 - i;
    sum += pair_exceedance(geom.at(j, i)) - pair_deficit(geom.at(j, i));
  }
  out.equality_value = 0.5 * sum;
  const GapEstimate gap = conditional_gap(model, truth, mc_samples, rng);
  out.mc_gap = gap.gap;
  out.mc_gap_std_error = gap.gap_std_error;
  out.residual = out.mc_gap - out.equality_value;
  // A zero SE means no disagreement was observed; allow one MC quantum.
  const double tol = std::max(3.0 * out.mc_gap_std_error, 1.0 / std::max(gap.r_t.samples, 1));
  out.within_3se = std::abs(out.residual) <= tol;
  return out;
}

ExampleBounds example_bounds(double d, double eps) {
  if (!(d > 0.0) || !(eps > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "example_bounds: d and eps must be positive");
  }
  ExampleBounds out;
  out.upper_ratio_bound = 1.0 / std_normal_cdf(d / 2.0);
  out.mixing_bound = std::exp(-d * eps / 2.0);
  out.strip_prob = std_normal_cdf(d) - std_normal_cdf(d - eps);
  return out;
}

LowerBoundReport theorem3_lower_bound(const PairGeometry& geom, double c4, double c5, double s_n,
                                      double r_opt) {
  if (!(c4 >= 1.0) || !(c5 > 0.0) || !(s_n > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "theorem3_lower_bound: need c4 >= 1, c5 > 0, s_n > 0");
  }
  LowerBoundReport out;
  out.value = c5 / (4.0 * std::sqrt(c4)) * std::sqrt(geom.m_max * s_n) * r_opt;
  double min_ratio = std::numeric_limits<double>::infinity();
  for (int j = 1; j <= geom.k; ++j) {
    for (int i = 1; i <= geom.k; ++i) {
      if (i == j) continue;
      const PairTerm& t = geom.at(j, i);
      min_ratio = std::min(min_ratio, t.perp_norm_sq / t.a.squaredNorm());
    }
  }
  out.min_perp_ratio = min_ratio;
  out.ratio_condition = geom.m_max / geom.m_min <= c4;
  out.perp_condition = min_ratio > c5 * s_n;
  return out;
}

}  // namespace hdlda
