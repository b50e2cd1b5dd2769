#pragma once

#include <optional>
#include <vector>

#include "hdlda/classifiers.hpp"
#include "hdlda/population.hpp"
#include "hdlda/rng.hpp"

namespace hdlda {

/// Geometry of one ordered pair (j, i): true direction a = Σ^{-1/2}(μ_j - μ_i),
/// fitted direction â, offsets d = ½‖a‖² and d̂ = âᵀΣ^{-1/2}(b̂ - μ_i),
/// t = aᵀâ/‖â‖² and ‖a⊥‖² = ‖a‖² - t²‖â‖² (clipped at 0).
struct PairTerm {
  Vec a;
  Vec a_hat;
  double d = 0.0;
  double d_hat = 0.0;
  double t = 0.0;
  double perp_norm_sq = 0.0;
};

struct PairGeometry {
  int k = 0;
  std::vector<PairTerm> pairs;  // index (j-1)·K + (i-1); diagonal unused
  double m_min = 0.0;
  double m_max = 0.0;

  const PairTerm& at(int j, int i) const {
    return pairs[static_cast<std::size_t>((j - 1) * k + (i - 1))];
  }
};

/// Throws Error{DimensionMismatch} when the model and population disagree on
/// K or p. The optimal rule yields â = a and d̂ = d exactly.
PairGeometry pair_geometry(const PopulationModel& truth, const ClassifierModel& model);

/// P(âᵀZ > d̂, aᵀZ < d) for Z ~ N(0, I).
double pair_exceedance(const PairTerm& term);

/// P(âᵀZ < d̂, aᵀZ > d) for Z ~ N(0, I).
double pair_deficit(const PairTerm& term);

struct BoundReport {
  Mat per_pair_probability;  // entry (j-1, i-1)
  double bound = 0.0;        // (1/K) Σ_i Σ_{j≠i}
  std::optional<double> r_opt_est;
  std::optional<double> r_t_est;
  std::optional<double> gap_est;
  std::optional<double> gap_std_error;
  std::optional<double> lower_bound;  // filled by callers that supply c4, c5
};

BoundReport theorem1_bound(const PairGeometry& geom);

/// Adds paired Monte Carlo estimates of R_OPT, R_T(X) and the gap.
void attach_mc_gap(BoundReport& report, const PopulationModel& truth, const ClassifierModel& model,
                   int mc_samples, RngStream& rng);

struct K2Check {
  double equality_value = 0.0;  // right-hand side of the K = 2 identity
  double mc_gap = 0.0;
  double mc_gap_std_error = 0.0;
  double residual = 0.0;  // mc_gap - equality_value
  bool within_3se = false;
};

/// Throws Error{InvalidArgument} unless K = 2.
K2Check k2_equality_check(const PairGeometry& geom, const PopulationModel& truth,
                          const ClassifierModel& model, int mc_samples, RngStream& rng);

struct ExampleBounds {
  double upper_ratio_bound = 0.0;  // 1/Φ(d/2)
  double mixing_bound = 0.0;       // exp(-d·eps/2)
  double strip_prob = 0.0;         // Φ(d) - Φ(d - eps)
};

/// Throws Error{InvalidArgument} unless d > 0 and eps > 0.
ExampleBounds example_bounds(double d, double eps);

struct LowerBoundReport {
  double value = 0.0;  // (c₅/(4√c₄))·√(M_max s_n)·R_OPT
  double min_perp_ratio = 0.0;  // min ‖a⊥‖²/‖a‖² over pairs
  bool ratio_condition = false;  // M_max/M_min <= c₄
  bool perp_condition = false;   // min_perp_ratio > c₅ s_n
};

LowerBoundReport theorem3_lower_bound(const PairGeometry& geom, double c4, double c5, double s_n,
                                      double r_opt);

}  // namespace hdlda
