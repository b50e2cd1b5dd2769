#include "hdlda/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hdlda/error.hpp"

namespace hdlda {

std::string_view method_name(Method method) {
  switch (method) {
    case Method::Opt: return "opt";
    case Method::Glda: return "glda";
    case Method::Slda1: return "slda1";
    case Method::Slda2: return "slda2";
    case Method::Lpd: return "lpd";
    case Method::Nsc: return "nsc";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (Method m : {Method::Opt, Method::Glda, Method::Slda1, Method::Slda2, Method::Lpd,
                   Method::Nsc}) {
    if (method_name(m) == name) return m;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown method '" + std::string(name) + "'");
}

bool is_tunable(Method method) {
  return method == Method::Slda1 || method == Method::Slda2 || method == Method::Lpd ||
         method == Method::Nsc;
}

nlohmann::json params_to_json(Method method, const FitParams& params) {
  nlohmann::json out = nlohmann::json::object();
  switch (method) {
    case Method::Slda2:
      out["epsilon"] = params.epsilon;
      [[fallthrough]];
    case Method::Slda1:
      out["m1"] = params.m1;
      out["m2"] = params.m2;
      out["alpha"] = params.alpha;
      break;
    case Method::Lpd:
      out["lambda"] = params.lambda;
      break;
    case Method::Nsc:
      out["delta"] = params.delta;
      break;
    case Method::Opt:
    case Method::Glda:
      break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Decision rules

int DecisionRule::decide(const Vec& y) const {
  const Eigen::Index k = y.size();
  if (kind == Kind::Argmin) {
    Eigen::Index best = 0;
    double best_score = y(0) + offsets(0);
    for (Eigen::Index i = 1; i < k; ++i) {
      const double s = y(i) + offsets(i);
      if (s < best_score) {
        best_score = s;
        best = i;
      }
    }
    return static_cast<int>(best) + 1;
  }

  // Tournament: class i beats j when s_ji < 0.
  Eigen::Index best = 0;
  int best_wins = -1;
  double best_sum = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < k; ++i) {
    int wins = 0;
    double sum = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (j == i) continue;
      const double s = (y(j) - y(i)) - margins(j, i);
      if (s < 0.0) ++wins;
      sum += s;
    }
    if (wins == k - 1) return static_cast<int>(i) + 1;
    if (wins > best_wins || (wins == best_wins && sum < best_sum)) {
      best = i;
      best_wins = wins;
      best_sum = sum;
    }
  }
  return static_cast<int>(best) + 1;
}

DecisionRule quadratic_rule(const Mat& centers, const Mat& omega) {
  DecisionRule rule;
  rule.kind = DecisionRule::Kind::Argmin;
  const Mat oc = centers * omega;  // rows (Ω c_i)ᵀ; Ω symmetric
  rule.weights = -2.0 * oc;
  rule.offsets.resize(centers.rows());
  for (Eigen::Index i = 0; i < centers.rows(); ++i) rule.offsets(i) = oc.row(i).dot(centers.row(i));
  return rule;
}

DecisionRule lpd_rule(const Mat& betas_to_1, const Mat& class_means) {
  DecisionRule rule;
  rule.kind = DecisionRule::Kind::Tournament;
  rule.weights = betas_to_1;
  const Eigen::Index k = betas_to_1.rows();
  rule.margins = Mat::Zero(k, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    for (Eigen::Index i = 0; i < j; ++i) {
      const Vec beta = (betas_to_1.row(j) - betas_to_1.row(i)).transpose();
      const Vec mid = 0.5 * (class_means.row(j) + class_means.row(i)).transpose();
      rule.margins(j, i) = beta.dot(mid);
      rule.margins(i, j) = -rule.margins(j, i);
    }
  }
  return rule;
}

DecisionRule nsc_rule(const NscPayload& payload) {
  DecisionRule rule;
  rule.kind = DecisionRule::Kind::Argmin;
  const Vec scale = (payload.feature_sd.array() + payload.s0).square().inverse().matrix();
  const Mat& c = payload.shrunken_centroids;
  const Mat scaled = c * scale.asDiagonal();
  rule.weights = -2.0 * scaled;
  rule.offsets.resize(c.rows());
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    rule.offsets(i) = scaled.row(i).dot(c.row(i)) - 2.0 * std::log(payload.priors(i));
  }
  return rule;
}

Mat ridge_inverse(const SymEigen& eig, double epsilon) {
  const Vec shifted = eig.values.array() + epsilon;
  const Eigen::Index n = shifted.size();
  if (n == 0) return Mat(0, 0);
  const double top = shifted.cwiseAbs().maxCoeff();
  if (top > 0.0 && shifted.minCoeff() > 1e-12 * top) {
    Mat out = eig.vectors * shifted.cwiseInverse().asDiagonal() * eig.vectors.transpose();
    return 0.5 * (out + out.transpose());
  }
  return pinv(SymEigen{shifted, eig.vectors});
}

// ---------------------------------------------------------------------------
// Nearest shrunken centroids

NscStats nsc_stats(const LabeledSample& data) {
  data.validate();
  const int k = data.k;
  const int n = data.n();
  const int p = data.p();
  const std::vector<int> counts = data.counts();
  for (int c = 0; c < k; ++c) {
    if (counts[static_cast<std::size_t>(c)] == 0) {
      std::ostringstream msg;
      msg << "class " << c + 1 << " has no observations";
      throw Error(ErrorCode::EmptyClass, msg.str());
    }
  }
  if (n <= k) throw Error(ErrorCode::DegenerateDesign, "shrunken centroids need n > K");

  NscStats out;
  out.class_means = Mat::Zero(k, p);
  for (int r = 0; r < n; ++r) out.class_means.row(data.labels[static_cast<std::size_t>(r)] - 1) += data.x.row(r);
  for (int c = 0; c < k; ++c) out.class_means.row(c) /= counts[static_cast<std::size_t>(c)];
  out.overall_centroid = data.x.colwise().mean().transpose();

  Vec ss = Vec::Zero(p);
  for (int r = 0; r < n; ++r) {
    ss += (data.x.row(r) - out.class_means.row(data.labels[static_cast<std::size_t>(r)] - 1))
              .cwiseAbs2()
              .transpose();
  }
  out.feature_sd = (ss / static_cast<double>(n - k)).cwiseSqrt();

  std::vector<double> sorted(out.feature_sd.data(), out.feature_sd.data() + p);
  std::sort(sorted.begin(), sorted.end());
  const std::size_t mid = sorted.size() / 2;
  out.s0 = sorted.size() % 2 == 1 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);

  out.m_factors.resize(k);
  out.priors.resize(k);
  for (int c = 0; c < k; ++c) {
    const double nc = counts[static_cast<std::size_t>(c)];
    out.m_factors(c) = std::sqrt(std::max(1.0 / nc - 1.0 / n, 0.0));
    out.priors(c) = nc / n;
  }

  out.offsets.resize(k, p);
  const Vec denom_base = out.feature_sd.array() + out.s0;
  for (int c = 0; c < k; ++c) {
    for (int f = 0; f < p; ++f) {
      const double denom = out.m_factors(c) * denom_base(f);
      const double diff = out.class_means(c, f) - out.overall_centroid(f);
      out.offsets(c, f) = denom > 0.0 ? diff / denom : 0.0;
    }
  }
  return out;
}

NscPayload nsc_fit(const NscStats& stats, double delta) {
  if (delta < 0.0) throw Error(ErrorCode::InvalidArgument, "nsc: delta must be >= 0");
  NscPayload out;
  out.overall_centroid = stats.overall_centroid;
  out.feature_sd = stats.feature_sd;
  out.s0 = stats.s0;
  out.priors = stats.priors;
  out.delta = delta;
  const Eigen::Index k = stats.offsets.rows();
  const Eigen::Index p = stats.offsets.cols();
  out.shrunken_centroids.resize(k, p);
  for (Eigen::Index c = 0; c < k; ++c) {
    for (Eigen::Index f = 0; f < p; ++f) {
      const double d = stats.offsets(c, f);
      const double shrunk = std::copysign(std::max(std::abs(d) - delta, 0.0), d);
      out.shrunken_centroids(c, f) =
          stats.overall_centroid(f) + stats.m_factors(c) * (stats.feature_sd(f) + stats.s0) * shrunk;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fitting

void finalize(ClassifierModel& model) {
  std::visit(
      [&](const auto& payload) {
        using T = std::decay_t<decltype(payload)>;
        if constexpr (std::is_same_v<T, OptPayload>) {
          const PopulationModel& truth = *payload.truth;
          model.rule = quadratic_rule(truth.means(), truth.sigma_inv());
        } else if constexpr (std::is_same_v<T, GldaPayload>) {
          model.rule = quadratic_rule(payload.class_means, payload.omega);
        } else if constexpr (std::is_same_v<T, SldaPayload>) {
          model.rule = quadratic_rule(payload.centers, payload.omega);
        } else if constexpr (std::is_same_v<T, LpdPayload>) {
          model.rule = lpd_rule(payload.betas_to_1, payload.class_means);
        } else {
          model.rule = nsc_rule(payload);
        }
      },
      model.payload);
}

ClassifierModel fit_optimal(std::shared_ptr<const PopulationModel> truth) {
  if (!truth) throw Error(ErrorCode::InvalidArgument, "fit_optimal: null population");
  ClassifierModel model;
  model.method = Method::Opt;
  model.k = truth->k();
  model.p = truth->p();
  model.payload = OptPayload{std::move(truth)};
  finalize(model);
  return model;
}

ClassifierModel fit(Method method, const LabeledSample& data, const FitParams& params) {
  ClassifierModel model;
  model.method = method;
  model.k = data.k;
  model.p = data.p();
  model.params = params;

  switch (method) {
    case Method::Opt:
      throw Error(ErrorCode::InvalidArgument,
                  "the optimal rule needs a population specification, not training data");
    case Method::Glda: {
      const FittedStats stats = fit_stats(data);
      model.payload = GldaPayload{stats.class_means, pinv(stats.pooled_cov)};
      break;
    }
    case Method::Slda1:
    case Method::Slda2: {
      const FittedStats stats = fit_stats(data);
      const ThresholdedCov tc = threshold_cov(stats, params.m1);
      const ThresholdedDeltas td = threshold_deltas(stats, params.m2, params.alpha);
      SldaPayload payload;
      payload.centers = td.deltas_to_1.rowwise() + stats.class_means.row(0);
      payload.centers.row(0) = stats.class_means.row(0);
      const SymEigen eig = sym_eigen(tc.sigma_tilde);
      if (method == Method::Slda1) {
        payload.omega = pinv(eig);
      } else {
        if (params.epsilon < 0.0) throw Error(ErrorCode::InvalidArgument, "slda2: epsilon must be >= 0");
        payload.omega = ridge_inverse(eig, params.epsilon);
        payload.epsilon = params.epsilon;
      }
      model.payload = std::move(payload);
      break;
    }
    case Method::Lpd: {
      const FittedStats stats = fit_stats(data);
      const LpdDirections dirs = lpd_directions(stats, params.lambda);
      if (!dirs.all_feasible()) {
        std::ostringstream msg;
        msg << "LPD direction infeasible at lambda = " << params.lambda;
        throw Error(ErrorCode::LpInfeasible, msg.str());
      }
      model.payload = LpdPayload{dirs.betas_to_1, stats.class_means};
      break;
    }
    case Method::Nsc:
      model.payload = nsc_fit(nsc_stats(data), params.delta);
      break;
  }
  finalize(model);
  return model;
}

// ---------------------------------------------------------------------------
// Prediction and evaluation

int predict(const ClassifierModel& model, const Vec& x) {
  if (x.size() != model.p) throw Error(ErrorCode::DimensionMismatch, "feature count mismatch");
  return model.rule.decide(model.rule.weights * x);
}

std::vector<int> predict_all(const ClassifierModel& model, const Mat& x) {
  if (x.cols() != model.p) throw Error(ErrorCode::DimensionMismatch, "feature count mismatch");
  const Mat y = x * model.rule.weights.transpose();
  std::vector<int> out(static_cast<std::size_t>(x.rows()));
  Vec row(y.cols());
  for (Eigen::Index r = 0; r < y.rows(); ++r) {
    row = y.row(r).transpose();
    out[static_cast<std::size_t>(r)] = model.rule.decide(row);
  }
  return out;
}

EvalReport evaluate(const ClassifierModel& model, const LabeledSample& test) {
  if (test.n() == 0) throw Error(ErrorCode::InvalidArgument, "evaluate: empty test set");
  test.validate();
  const int k = std::max(model.k, test.k);
  const std::vector<int> pred = predict_all(model, test.x);
  EvalReport out;
  out.confusion = Eigen::MatrixXi::Zero(k, k);
  for (std::size_t r = 0; r < pred.size(); ++r) out.confusion(test.labels[r] - 1, pred[r] - 1) += 1;
  long correct = 0;
  out.per_class_errors.assign(static_cast<std::size_t>(k), 0.0);
  for (int c = 0; c < k; ++c) {
    correct += out.confusion(c, c);
    const long row = out.confusion.row(c).sum();
    out.per_class_errors[static_cast<std::size_t>(c)] =
        row > 0 ? 1.0 - static_cast<double>(out.confusion(c, c)) / row : 0.0;
  }
  out.error_rate = 1.0 - static_cast<double>(correct) / test.n();
  return out;
}

ProjectedRule projected_rule(const ClassifierModel& model) {
  ProjectedRule out;
  out.weights = model.rule.weights;
  DecisionRule light = model.rule;
  light.weights.resize(0, 0);
  out.decide = [light = std::move(light)](const Vec& y) { return light.decide(y); };
  return out;
}

ErrorEstimate conditional_error(const ClassifierModel& model, const PopulationModel& truth,
                                int mc_samples, RngStream& rng) {
  if (mc_samples < 1000) throw Error(ErrorCode::InvalidArgument, "conditional_error: mc_samples must be >= 1000");
  if (model.p != truth.p() || model.k != truth.k()) {
    throw Error(ErrorCode::DimensionMismatch, "conditional_error: model and population disagree");
  }
  const ProjectedRule rule = projected_rule(model);
  const RuleErrorEstimates mc = projected_error_mc(truth, std::span(&rule, 1), mc_samples, rng);
  return {mc.errors[0], mc.std_errors[0], mc.samples};
}

GapEstimate conditional_gap(const ClassifierModel& model, const PopulationModel& truth,
                            int mc_samples, RngStream& rng) {
  if (mc_samples < 1000) throw Error(ErrorCode::InvalidArgument, "conditional_gap: mc_samples must be >= 1000");
  if (model.p != truth.p() || model.k != truth.k()) {
    throw Error(ErrorCode::DimensionMismatch, "conditional_gap: model and population disagree");
  }
  const std::vector<ProjectedRule> rules{optimal_projected_rule(truth), projected_rule(model)};
  const RuleErrorEstimates mc = projected_error_mc(truth, rules, mc_samples, rng);
  GapEstimate out;
  out.r_opt = {mc.errors[0], mc.std_errors[0], mc.samples};
  out.r_t = {mc.errors[1], mc.std_errors[1], mc.samples};
  out.gap = mc.gaps[1];
  out.gap_std_error = mc.gap_std_errors[1];
  return out;
}

std::vector<PairDiscriminant> pairwise_discriminants(const ClassifierModel& model) {
  const int k = model.k;
  std::vector<PairDiscriminant> out(static_cast<std::size_t>(k * k));
  const DecisionRule& rule = model.rule;
  for (int j = 0; j < k; ++j) {
    for (int i = 0; i < j; ++i) {
      PairDiscriminant pd;
      if (rule.kind == DecisionRule::Kind::Tournament) {
        pd.w = (rule.weights.row(j) - rule.weights.row(i)).transpose();
        pd.c = rule.margins(j, i);
      } else {
        // score_i - score_j = 2 (wᵀx - c)
        pd.w = 0.5 * (rule.weights.row(i) - rule.weights.row(j)).transpose();
        pd.c = 0.5 * (rule.offsets(j) - rule.offsets(i));
      }
      PairDiscriminant neg{-pd.w, -pd.c};
      out[static_cast<std::size_t>(j * k + i)] = std::move(pd);
      out[static_cast<std::size_t>(i * k + j)] = std::move(neg);
    }
  }
  return out;
}

}  // namespace hdlda
