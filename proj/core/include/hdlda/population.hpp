#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "hdlda/linalg.hpp"
#include "hdlda/rng.hpp"

namespace hdlda {

/// K Gaussian classes N_p(μ_i, Σ) with a shared covariance and uniform
/// priors. Classes are numbered 1..K in every public interface; row i-1 of
/// means() holds μ_i.
class PopulationModel {
 public:
  /// Validates and caches chol(Σ), Σ⁻¹ and Σ^{1/2}.
  /// Throws Error{InvalidArgument} for K < 2, mismatched shapes or repeated
  /// means, Error{NotPositiveDefinite} when Σ is not positive definite.
  PopulationModel(Mat means, Mat sigma);

  int k() const { return static_cast<int>(means_.rows()); }
  int p() const { return static_cast<int>(means_.cols()); }

  const Mat& means() const { return means_; }
  Vec mean(int cls) const { return means_.row(cls - 1).transpose(); }
  const Mat& sigma() const { return sigma_; }
  const Mat& chol() const { return chol_; }
  const Mat& sigma_inv() const { return sigma_inv_; }
  const Mat& sigma_sqrt() const { return sigma_sqrt_; }

 private:
  Mat means_;
  Mat sigma_;
  Mat chol_;
  Mat sigma_inv_;
  Mat sigma_sqrt_;
};

/// n × p observations with labels in 1..K.
struct LabeledSample {
  Mat x;
  std::vector<int> labels;
  int k = 0;

  int n() const { return static_cast<int>(x.rows()); }
  int p() const { return static_cast<int>(x.cols()); }
  std::vector<int> counts() const;

  /// Rows whose index appears in `rows`, in that order.
  LabeledSample subset(std::span<const int> rows) const;

  /// Throws Error{InvalidArgument} on labels outside 1..K or a size mismatch.
  void validate() const;
};

struct MahalanobisSummary {
  Mat squared;  // K × K, entry (i,j) = (μ_i-μ_j)ᵀΣ⁻¹(μ_i-μ_j)
  double m_min = 0.0;
  double m_max = 0.0;
};

struct ConditionReport {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double c0_witness = 0.0;  // max(λ_max, 1/λ_min)
  double m_min = 0.0;
  double m_max = 0.0;
  double c1_witness = 0.0;  // M_min
  std::optional<double> min_class_count_ratio;  // n / (K · min n_i)
  bool k_le_p_plus_1 = false;
};

struct ROptEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  int samples = 0;
  std::optional<double> closed_form;  // Φ(-Δ/2), K = 2 only
  bool closed_form_agrees = true;     // |estimate - closed_form| <= 4 SE
};

/// Simulation designs: means with s₀ ones in block k; covariance
/// (1) compound symmetry ρ = 0.5, s₀ = 5; (2) two compound blocks
/// (100 at ρ = 0.7, rest at ρ = 0.5), s₀ = 3; (3) σ_ij = 0.95^|i-j|, s₀ = 10.
/// Throws Error{DimensionTooSmall} if k·s₀ > p or (model 2) p <= 100.
PopulationModel make_sim_model(int model_id, int p, int k);

/// Block length s₀ of the mean vectors for each simulation model.
int sim_model_block(int model_id);

MahalanobisSummary mahalanobis_matrix(const PopulationModel& model);

/// Diagnostics only; never rejects a model.
ConditionReport check_conditions(const PopulationModel& model,
                                 std::optional<std::vector<int>> class_counts = std::nullopt);

/// Nearest class mean in Mahalanobis distance; ties go to the lowest index.
int optimal_classify(const PopulationModel& model, const Vec& x);

/// Stratified Monte Carlo estimate of the Bayes error; for K = 2 the closed
/// form Φ(-Δ/2) is reported next to it.
ROptEstimate r_opt(const PopulationModel& model, int mc_samples, RngStream& rng);

/// Class blocks are contiguous: n_per_class rows of class 1, then class 2...
LabeledSample sample_dataset(const PopulationModel& model, int n_per_class, RngStream& rng);
LabeledSample sample_dataset(const PopulationModel& model, std::span<const int> class_counts,
                             RngStream& rng);

// ---------------------------------------------------------------------------
// Monte Carlo over linear decision rules.
//
// Every rule in this library decides from a handful of linear functionals
// W x of the observation. For x ~ N(μ_c, Σ) the vector W x is Gaussian with
// mean W μ_c and covariance W Σ Wᵀ, so misclassification rates can be
// estimated by sampling that low-dimensional vector directly.

struct ProjectedRule {
  Mat weights;  // r × p
  std::function<int(const Vec&)> decide;  // projected vector -> class 1..K
};

struct RuleErrorEstimates {
  int samples = 0;
  std::vector<double> errors;
  std::vector<double> std_errors;
  // For rule r > 0: paired estimate of errors[r] - errors[0] and its SE
  // (common random numbers). Index 0 holds 0.
  std::vector<double> gaps;
  std::vector<double> gap_std_errors;
};

/// mc_samples / K draws per class; all rules see the same draws.
RuleErrorEstimates projected_error_mc(const PopulationModel& model,
                                      std::span<const ProjectedRule> rules, int mc_samples,
                                      RngStream& rng);

/// T_OPT in projected form: scores -2 μ_iᵀΣ⁻¹x + μ_iᵀΣ⁻¹μ_i, argmin.
ProjectedRule optimal_projected_rule(const PopulationModel& model);

// ---------------------------------------------------------------------------
// Population specification JSON:
// {"k":int, "p":int, "means":[[...]],
//  "cov":{"kind":"identity"|"compound"|"ar1"|"block"|"dense", ...}}
// compound: "rho" (off-diagonal), optional "variance" (diagonal, default 1)
// ar1:      "rho", σ_ij = rho^|i-j|
// block:    "blocks": [{"size":int, "rho":real}, ...] compound blocks
// dense:    "matrix": [[...]]

PopulationModel population_from_json(const nlohmann::json& spec);
PopulationModel load_population(const std::string& path);
nlohmann::json population_to_json(const PopulationModel& model);

}  // namespace hdlda
