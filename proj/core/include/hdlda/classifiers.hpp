#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "hdlda/estimators.hpp"
#include "hdlda/linalg.hpp"
#include "hdlda/population.hpp"
#include "hdlda/rng.hpp"

namespace hdlda {

enum class Method { Opt, Glda, Slda1, Slda2, Lpd, Nsc };

std::string_view method_name(Method method);

/// Accepts the lowercase names used on the command line and in JSON.
/// Throws Error{InvalidArgument} for anything else.
Method parse_method(std::string_view name);

bool is_tunable(Method method);

/// Tuning values. Each method reads only its own fields.
struct FitParams {
  double m1 = 0.0;       // SLDA covariance threshold constant
  double m2 = 0.0;       // SLDA mean-difference threshold constant
  double alpha = 0.3;    // SLDA mean-difference exponent
  double epsilon = 0.0;  // SLDA2 ridge
  double lambda = 0.5;   // LPD constraint level
  double delta = 0.0;    // NSC shrinkage

  friend bool operator==(const FitParams&, const FitParams&) = default;
};

/// Only the fields relevant to `method`; {} for Opt and Glda.
nlohmann::json params_to_json(Method method, const FitParams& params);

// Fitted payloads. Class i is row i-1 throughout.
struct OptPayload {
  std::shared_ptr<const PopulationModel> truth;
};
struct GldaPayload {
  Mat class_means;
  Mat omega;  // pinv(Σ̂)
};
struct SldaPayload {
  Mat centers;  // x̄₁ + δ̃_{i1}
  Mat omega;    // pinv(Σ̃) or (Σ̃ + εI)⁻¹
  double epsilon = 0.0;
};
struct LpdPayload {
  Mat betas_to_1;  // row 0 zero
  Mat class_means;
};
struct NscPayload {
  Mat shrunken_centroids;
  Vec overall_centroid;
  Vec feature_sd;  // s_k, pooled with divisor n - K
  double s0 = 0.0;
  Vec priors;
  double delta = 0.0;
};

using Payload = std::variant<OptPayload, GldaPayload, SldaPayload, LpdPayload, NscPayload>;

/// Every rule decides from y = W x with W of size K × p.
///
/// Argmin rules: score_i = y_i + offsets_i, smallest score wins, ties to the
/// lower index. Tournament (LPD): y_j = β̂_{j1}ᵀx and the pairwise score is
/// s_{ji} = (y_j - y_i) - margins(j,i) with margins antisymmetric.
struct DecisionRule {
  enum class Kind { Argmin, Tournament };
  Kind kind = Kind::Argmin;
  Mat weights;
  Vec offsets;
  Mat margins;

  int decide(const Vec& y) const;
};

struct ClassifierModel {
  Method method = Method::Glda;
  int k = 0;
  int p = 0;
  FitParams params;
  Payload payload;
  DecisionRule rule;
};

/// Wraps the true population as a classifier (the rule T_OPT).
ClassifierModel fit_optimal(std::shared_ptr<const PopulationModel> truth);

/// Fits one method on `data`. Throws Error{EmptyClass} for a class without
/// rows, Error{LpInfeasible} when an LPD direction has no feasible point and
/// Error{InvalidArgument} for Method::Opt (it needs a population, not data).
ClassifierModel fit(Method method, const LabeledSample& data, const FitParams& params);

/// Rebuilds `rule` from the payload. Needed after editing a payload by hand.
void finalize(ClassifierModel& model);

int predict(const ClassifierModel& model, const Vec& x);

/// Predictions for every row of x.
std::vector<int> predict_all(const ClassifierModel& model, const Mat& x);

struct EvalReport {
  double error_rate = 0.0;
  std::vector<double> per_class_errors;
  Eigen::MatrixXi confusion;  // row = true class, column = predicted class
};

EvalReport evaluate(const ClassifierModel& model, const LabeledSample& test);

struct ErrorEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  int samples = 0;
};

/// Stratified Monte Carlo estimate of R_T(X) for the fitted rule under the
/// true population.
ErrorEstimate conditional_error(const ClassifierModel& model, const PopulationModel& truth,
                                int mc_samples, RngStream& rng);

/// Paired estimates of R_OPT, R_T(X) and their difference from the same draws.
struct GapEstimate {
  ErrorEstimate r_opt;
  ErrorEstimate r_t;
  double gap = 0.0;
  double gap_std_error = 0.0;
};

GapEstimate conditional_gap(const ClassifierModel& model, const PopulationModel& truth,
                            int mc_samples, RngStream& rng);

/// The rule as a projected rule for projected_error_mc.
ProjectedRule projected_rule(const ClassifierModel& model);

/// Pairwise form of the rule: class i beats class j when wᵀx - c < 0, where
/// w = Σ^{-1/2}â_{ji} and c = wᵀb̂_{ji}. Entries are stored at index
/// (j-1)·K + (i-1); the diagonal is empty. The (i,j) entry is the exact
/// negation of the (j,i) entry.
struct PairDiscriminant {
  Vec w;
  double c = 0.0;
};

std::vector<PairDiscriminant> pairwise_discriminants(const ClassifierModel& model);

// Building blocks shared with cross-validation.

/// (Σ̃ + εI)⁻¹ from an eigendecomposition of Σ̃. When Σ̃ + εI is not safely
/// positive definite the pseudoinverse is returned instead.
Mat ridge_inverse(const SymEigen& eig, double epsilon);

/// Argmin rule scoring (x - c_i)ᵀ Ω (x - c_i) for the rows c_i of `centers`.
DecisionRule quadratic_rule(const Mat& centers, const Mat& omega);

DecisionRule lpd_rule(const Mat& betas_to_1, const Mat& class_means);

/// Per-feature summaries the shrunken-centroid fit starts from.
struct NscStats {
  Mat class_means;
  Vec overall_centroid;
  Vec feature_sd;
  double s0 = 0.0;
  Vec m_factors;  // √(1/n_i - 1/n)
  Vec priors;
  Mat offsets;  // d_ik
};

/// Throws Error{EmptyClass} or Error{DegenerateDesign} (n <= K).
NscStats nsc_stats(const LabeledSample& data);
NscPayload nsc_fit(const NscStats& stats, double delta);
DecisionRule nsc_rule(const NscPayload& payload);

// Model persistence. Arrays are nested row-major lists; every double is
// written in a form that parses back to the same value.
nlohmann::json model_to_json(const ClassifierModel& model);
ClassifierModel model_from_json(const nlohmann::json& doc);
void save_model(const ClassifierModel& model, const std::string& path);
ClassifierModel load_model(const std::string& path);

}  // namespace hdlda
