#pragma once

#include <vector>

#include "hdlda/linalg.hpp"
#include "hdlda/lp.hpp"
#include "hdlda/population.hpp"

namespace hdlda {

/// Per-class means, counts and the pooled within-class covariance
/// Σ̂ = (1/n) Σ_i Σ_j (x_ij - x̄_i)(x_ij - x̄_i)ᵀ.
struct FittedStats {
  int k = 0;
  int p = 0;
  int n = 0;
  Mat class_means;  // K × p
  std::vector<int> class_counts;
  Mat pooled_cov;  // divisor n
  double shrink_factor = 0.0;  // 1 - K/n
};

/// Throws Error{EmptyClass} if some class in 1..K has no rows.
FittedStats fit_stats(const LabeledSample& data);

/// Σ̄ = Σ̂ / (1 - K/n). Throws Error{DegenerateDesign} when K >= n.
Mat corrected_cov(const FittedStats& stats);

struct ThresholdedCov {
  Mat sigma_tilde;
  double t_n = 0.0;
  double m1 = 0.0;
};

/// Hard-thresholds Σ̄ entrywise at t_n = m1·√(log p / n).
ThresholdedCov threshold_cov(const FittedStats& stats, double m1);

/// Same operator applied to an already corrected covariance.
ThresholdedCov threshold_cov(const Mat& sigma_bar, int n, double m1);

struct ThresholdedDeltas {
  Mat deltas_to_1;  // K × p, row j-1 holds δ̃_{j1}; row 0 is zero
  double a_n = 0.0;
  double m2 = 0.0;
  double alpha = 0.0;
};

/// Keeps the entries of δ̂_{j1} = x̄_j - x̄₁ with |entry| >= a_n = m2·(log p / n)^alpha.
ThresholdedDeltas threshold_deltas(const FittedStats& stats, double m2, double alpha);

struct LpdDirections {
  Mat betas_to_1;  // K × p, row j-1 holds β̂_{j1}; row 0 is zero
  double lambda_n = 0.0;
  std::vector<bool> feasible_flags;
  std::vector<LpStatus> statuses;

  bool all_feasible() const;
};

/// For j = 2..K solves min ‖β‖₁ s.t. ‖Σ̄β - δ̂_{j1}‖_∞ <= lambda.
LpdDirections lpd_directions(const FittedStats& stats, double lambda);

/// Variant taking Σ̄ directly so callers can reuse it across λ values.
LpdDirections lpd_directions(const Mat& sigma_bar, const Mat& class_means, double lambda);

struct RateReport {
  double c_hp = 0.0;
  double d_gp = 0.0;
  int q_n = 0;
  double h = 0.0;
  double g = 0.0;
  double alpha = 0.0;
  double r = 2.0;
  double m2 = 0.0;
  double a_n = 0.0;
  double m_min = 0.0;
  double m_max = 0.0;
  double s_n = 0.0;
  double d_n_rate = 0.0;
  double b_n = 0.0;
  double r_n = 0.0;
  double l1_beta_max = 0.0;  // max_{i≠j} ‖Σ⁻¹δ_{ji}‖₁
  double lambda_n_unit = 0.0;  // √(M_max log p / n), the LPD level up to its constant
};

/// Sparsity measures and rate quantities of the population at sample size n.
/// Uses 0^h := 0, so h = 0 counts nonzeros.
RateReport sparsity_and_rates(const PopulationModel& model, int n, int k_classes, double h,
                              double g, double alpha, double r, double m2);

}  // namespace hdlda
