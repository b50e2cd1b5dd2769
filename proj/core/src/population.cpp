#include "hdlda/population.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hdlda/error.hpp"
#include "hdlda/normal.hpp"

namespace hdlda {

PopulationModel::PopulationModel(Mat means, Mat sigma)
    : means_(std::move(means)), sigma_(std::move(sigma)) {
  if (means_.rows() < 2) {
    throw Error(ErrorCode::InvalidArgument, "need K ≥ 2 classes");
  }
  const Eigen::Index p = means_.cols();
  if (p < 1 || sigma_.rows() != p || sigma_.cols() != p) {
    throw Error(ErrorCode::InvalidArgument, "covariance must be p x p with p = mean length");
  }
  if (!means_.allFinite() || !sigma_.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "population parameters must be finite");
  }
  for (Eigen::Index i = 0; i < means_.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < means_.rows(); ++j) {
      if (means_.row(i) == means_.row(j)) {
        std::ostringstream msg;
        msg << "class means " << i + 1 << " and " << j + 1 << " coincide";
        throw Error(ErrorCode::InvalidArgument, msg.str());
      }
    }
  }
  chol_ = cholesky(sigma_);
  sigma_inv_ = chol_.triangularView<Eigen::Lower>().solve(Mat::Identity(p, p));
  sigma_inv_ = chol_.transpose().triangularView<Eigen::Upper>().solve(sigma_inv_);
  sigma_inv_ = 0.5 * (sigma_inv_ + sigma_inv_.transpose()).eval();
  sigma_sqrt_ = sym_sqrt(sigma_);
}

std::vector<int> LabeledSample::counts() const {
  std::vector<int> out(static_cast<std::size_t>(std::max(k, 0)), 0);
  for (int label : labels) {
    if (label >= 1 && label <= k) ++out[static_cast<std::size_t>(label - 1)];
  }
  return out;
}

LabeledSample LabeledSample::subset(std::span<const int> rows) const {
  LabeledSample out;
  out.k = k;
  out.x.resize(static_cast<Eigen::Index>(rows.size()), x.cols());
  out.labels.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.x.row(static_cast<Eigen::Index>(r)) = x.row(rows[r]);
    out.labels.push_back(labels[static_cast<std::size_t>(rows[r])]);
  }
  return out;
}

void LabeledSample::validate() const {
  if (static_cast<Eigen::Index>(labels.size()) != x.rows()) {
    throw Error(ErrorCode::InvalidArgument, "label count does not match row count");
  }
  for (int label : labels) {
    if (label < 1 || label > k) {
      std::ostringstream msg;
      msg << "label " << label << " outside 1.." << k;
      throw Error(ErrorCode::InvalidArgument, msg.str());
    }
  }
  if (!x.allFinite()) throw Error(ErrorCode::InvalidArgument, "features must be finite");
}

int sim_model_block(int model_id) {
  switch (model_id) {
    case 1: return 5;
    case 2: return 3;
    case 3: return 10;
    default:
      throw Error(ErrorCode::InvalidArgument, "model id must be 1, 2 or 3");
  }
}

namespace {

void fill_compound(Mat& sigma, Eigen::Index start, Eigen::Index size, double rho) {
  sigma.block(start, start, size, size).setConstant(rho);
  sigma.block(start, start, size, size).diagonal().setOnes();
}

}  // namespace

PopulationModel make_sim_model(int model_id, int p, int k) {
  const int s0 = sim_model_block(model_id);
  if (k < 2) throw Error(ErrorCode::InvalidArgument, "need K ≥ 2 classes");
  if (static_cast<long>(k) * s0 > p) {
    std::ostringstream msg;
    msg << "model " << model_id << " needs p >= k*" << s0 << " (got p=" << p << ", k=" << k << ")";
    throw Error(ErrorCode::DimensionTooSmall, msg.str());
  }
  if (model_id == 2 && p <= 100) {
    throw Error(ErrorCode::DimensionTooSmall, "p must exceed 100 for model 2");
  }
  Mat means = Mat::Zero(k, p);
  for (int c = 0; c < k; ++c) means.row(c).segment(c * s0, s0).setOnes();

  Mat sigma = Mat::Zero(p, p);
  switch (model_id) {
    case 1:
      fill_compound(sigma, 0, p, 0.5);
      break;
    case 2:
      fill_compound(sigma, 0, 100, 0.7);
      fill_compound(sigma, 100, p - 100, 0.5);
      break;
    case 3:
      for (int i = 0; i < p; ++i) {
        for (int j = 0; j < p; ++j) sigma(i, j) = std::pow(0.95, std::abs(i - j));
      }
      break;
  }
  return PopulationModel(std::move(means), std::move(sigma));
}

MahalanobisSummary mahalanobis_matrix(const PopulationModel& model) {
  const int k = model.k();
  MahalanobisSummary out;
  out.squared = Mat::Zero(k, k);
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      const Vec delta = (model.means().row(i) - model.means().row(j)).transpose();
      const double m = delta.dot(model.sigma_inv() * delta);
      out.squared(i, j) = m;
      out.squared(j, i) = m;
    }
  }
  out.m_min = std::numeric_limits<double>::infinity();
  out.m_max = 0.0;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      if (i == j) continue;
      out.m_min = std::min(out.m_min, out.squared(i, j));
      out.m_max = std::max(out.m_max, out.squared(i, j));
    }
  }
  return out;
}

ConditionReport check_conditions(const PopulationModel& model,
                                 std::optional<std::vector<int>> class_counts) {
  ConditionReport out;
  const SymEigen eig = sym_eigen(model.sigma());
  out.lambda_max = eig.values(0);
  out.lambda_min = eig.values(eig.values.size() - 1);
  out.c0_witness = std::max(out.lambda_max, 1.0 / out.lambda_min);
  const MahalanobisSummary maha = mahalanobis_matrix(model);
  out.m_min = maha.m_min;
  out.m_max = maha.m_max;
  out.c1_witness = maha.m_min;
  if (class_counts && !class_counts->empty()) {
    long n = 0;
    int smallest = class_counts->front();
    for (int c : *class_counts) {
      n += c;
      smallest = std::min(smallest, c);
    }
    if (smallest >= 1) {
      out.min_class_count_ratio =
          static_cast<double>(n) / (static_cast<double>(class_counts->size()) * smallest);
    }
  }
  out.k_le_p_plus_1 = model.k() <= model.p() + 1;
  return out;
}

int optimal_classify(const PopulationModel& model, const Vec& x) {
  if (x.size() != model.p()) {
    throw Error(ErrorCode::DimensionMismatch, "optimal_classify: feature count mismatch");
  }
  int best = 1;
  double best_dist = std::numeric_limits<double>::infinity();
  for (int c = 1; c <= model.k(); ++c) {
    const Vec diff = x - model.mean(c);
    const double dist = diff.dot(model.sigma_inv() * diff);
    if (dist < best_dist) {
      best_dist = dist;
      best = c;
    }
  }
  return best;
}

LabeledSample sample_dataset(const PopulationModel& model, std::span<const int> class_counts,
                             RngStream& rng) {
  if (static_cast<int>(class_counts.size()) != model.k()) {
    throw Error(ErrorCode::DimensionMismatch, "sample_dataset: one count per class required");
  }
  int n = 0;
  for (int c : class_counts) {
    if (c < 0) throw Error(ErrorCode::InvalidArgument, "sample_dataset: negative class count");
    n += c;
  }
  LabeledSample out;
  out.k = model.k();
  out.x.resize(n, model.p());
  out.labels.reserve(static_cast<std::size_t>(n));
  int row = 0;
  for (int c = 1; c <= model.k(); ++c) {
    const Vec mu = model.mean(c);
    for (int r = 0; r < class_counts[static_cast<std::size_t>(c - 1)]; ++r) {
      out.x.row(row++) = mvn_sample(rng, mu, model.chol()).transpose();
      out.labels.push_back(c);
    }
  }
  return out;
}

LabeledSample sample_dataset(const PopulationModel& model, int n_per_class, RngStream& rng) {
  if (n_per_class < 1) {
    throw Error(ErrorCode::InvalidArgument, "sample_dataset: n_per_class must be >= 1");
  }
  const std::vector<int> counts(static_cast<std::size_t>(model.k()), n_per_class);
  return sample_dataset(model, counts, rng);
}

RuleErrorEstimates projected_error_mc(const PopulationModel& model,
                                      std::span<const ProjectedRule> rules, int mc_samples,
                                      RngStream& rng) {
  if (rules.empty()) throw Error(ErrorCode::InvalidArgument, "projected_error_mc: no rules");
  const int k = model.k();
  const int per_class = mc_samples / k;
  if (per_class < 1) throw Error(ErrorCode::InvalidArgument, "projected_error_mc: too few samples");

  Eigen::Index total_rows = 0;
  for (const auto& rule : rules) {
    if (rule.weights.cols() != model.p()) {
      throw Error(ErrorCode::DimensionMismatch, "projected_error_mc: rule dimension mismatch");
    }
    total_rows += rule.weights.rows();
  }
  Mat stacked(total_rows, model.p());
  std::vector<Eigen::Index> offsets;
  Eigen::Index at = 0;
  for (const auto& rule : rules) {
    offsets.push_back(at);
    stacked.middleRows(at, rule.weights.rows()) = rule.weights;
    at += rule.weights.rows();
  }
  Mat cov = stacked * model.sigma() * stacked.transpose();
  cov = 0.5 * (cov + cov.transpose()).eval();
  const Mat factor = psd_factor(cov);

  const std::size_t nr = rules.size();
  std::vector<long> wrong(nr, 0);
  std::vector<double> diff_sum(nr, 0.0), diff_sq(nr, 0.0);
  Vec u(total_rows), y(total_rows);
  std::vector<int> miss(nr);
  for (int c = 1; c <= k; ++c) {
    const Vec center = stacked * model.mean(c);
    for (int s = 0; s < per_class; ++s) {
      for (Eigen::Index i = 0; i < total_rows; ++i) u(i) = rng.normal();
      y.noalias() = center + factor * u;
      for (std::size_t r = 0; r < nr; ++r) {
        const Vec seg = y.segment(offsets[r], rules[r].weights.rows());
        miss[r] = rules[r].decide(seg) != c ? 1 : 0;
        wrong[r] += miss[r];
      }
      for (std::size_t r = 1; r < nr; ++r) {
        const double d = miss[r] - miss[0];
        diff_sum[r] += d;
        diff_sq[r] += d * d;
      }
    }
  }
  RuleErrorEstimates out;
  out.samples = per_class * k;
  const double n = out.samples;
  for (std::size_t r = 0; r < nr; ++r) {
    const double e = static_cast<double>(wrong[r]) / n;
    out.errors.push_back(e);
    out.std_errors.push_back(std::sqrt(e * (1.0 - e) / n));
    if (r == 0) {
      out.gaps.push_back(0.0);
      out.gap_std_errors.push_back(0.0);
    } else {
      const double mean = diff_sum[r] / n;
      const double var = std::max(diff_sq[r] / n - mean * mean, 0.0);
      out.gaps.push_back(mean);
      out.gap_std_errors.push_back(std::sqrt(var / n));
    }
  }
  return out;
}

ProjectedRule optimal_projected_rule(const PopulationModel& model) {
  const Mat g = model.means() * model.sigma_inv();  // rows Σ⁻¹μ_i
  Vec offsets(model.k());
  for (int i = 0; i < model.k(); ++i) offsets(i) = g.row(i).dot(model.means().row(i));
  ProjectedRule rule;
  rule.weights = -2.0 * g;
  rule.decide = [offsets](const Vec& y) {
    int best = 0;
    double best_score = y(0) + offsets(0);
    for (Eigen::Index i = 1; i < y.size(); ++i) {
      const double s = y(i) + offsets(i);
      if (s < best_score) {
        best_score = s;
        best = static_cast<int>(i);
      }
    }
    return best + 1;
  };
  return rule;
}

ROptEstimate r_opt(const PopulationModel& model, int mc_samples, RngStream& rng) {
  if (mc_samples < 1000) {
    throw Error(ErrorCode::InvalidArgument, "r_opt: mc_samples must be >= 1000");
  }
  const ProjectedRule rule = optimal_projected_rule(model);
  const RuleErrorEstimates mc = projected_error_mc(model, std::span(&rule, 1), mc_samples, rng);
  ROptEstimate out;
  out.estimate = mc.errors[0];
  out.std_error = mc.std_errors[0];
  out.samples = mc.samples;
  if (model.k() == 2) {
    const double delta = std::sqrt(mahalanobis_matrix(model).squared(0, 1));
    out.closed_form = std_normal_cdf(-delta / 2.0);
    // A zero SE (estimate exactly 0 or 1) still has to match to the MC grid.
    const double tol = std::max(4.0 * out.std_error, 1.0 / out.samples);
    out.closed_form_agrees = std::abs(out.estimate - *out.closed_form) <= tol;
  }
  return out;
}

}  // namespace hdlda
