#include "hdlda/tuning.hpp"

#include <cmath>
#include <sstream>

#include "hdlda/error.hpp"
#include "hdlda/estimators.hpp"

namespace hdlda {

std::vector<double> default_lambdas() {
  std::vector<double> out;
  for (int i = 0; i <= 10; ++i) out.push_back((20 + 5 * i) / 100.0);
  return out;
}

namespace {

std::vector<double> powers_of_ten(int lo, int hi) {
  std::vector<double> out;
  for (int e = lo; e <= hi; ++e) out.push_back(std::pow(10.0, e));
  return out;
}

}  // namespace

std::vector<double> default_m1() { return powers_of_ten(-5, 0); }
std::vector<double> default_m2() { return powers_of_ten(-7, 0); }
std::vector<double> default_epsilons() { return powers_of_ten(-5, -1); }

std::vector<double> default_nsc_deltas(const LabeledSample& data, int count) {
  if (count < 2) throw Error(ErrorCode::InvalidArgument, "nsc grid needs at least 2 values");
  const NscStats stats = nsc_stats(data);
  const double top = stats.offsets.cwiseAbs().maxCoeff();
  std::vector<double> out;
  for (int i = 0; i < count; ++i) out.push_back(top * i / (count - 1));
  return out;
}

Grid resolve_grid(Method method, Grid grid, const LabeledSample& data) {
  switch (method) {
    case Method::Lpd:
      if (grid.lambdas.empty()) grid.lambdas = default_lambdas();
      break;
    case Method::Slda2:
      if (grid.epsilons.empty()) grid.epsilons = default_epsilons();
      [[fallthrough]];
    case Method::Slda1:
      if (grid.m1.empty()) grid.m1 = default_m1();
      if (grid.m2.empty()) grid.m2 = default_m2();
      break;
    case Method::Nsc:
      if (grid.deltas.empty()) grid.deltas = default_nsc_deltas(data, grid.nsc_grid_size);
      break;
    case Method::Opt:
    case Method::Glda:
      break;
  }
  return grid;
}

std::vector<FitParams> grid_combos(Method method, const Grid& g) {
  std::vector<FitParams> out;
  FitParams base;
  base.alpha = g.alpha;
  switch (method) {
    case Method::Lpd:
      for (double l : g.lambdas) {
        FitParams p = base;
        p.lambda = l;
        out.push_back(p);
      }
      break;
    case Method::Slda1:
    case Method::Slda2: {
      const std::vector<double> eps = method == Method::Slda2 ? g.epsilons : std::vector<double>{0.0};
      for (double m1 : g.m1) {
        for (double m2 : g.m2) {
          for (double e : eps) {
            FitParams p = base;
            p.m1 = m1;
            p.m2 = m2;
            p.epsilon = e;
            out.push_back(p);
          }
        }
      }
      break;
    }
    case Method::Nsc:
      for (double d : g.deltas) {
        FitParams p = base;
        p.delta = d;
        out.push_back(p);
      }
      break;
    case Method::Opt:
    case Method::Glda:
      out.push_back(base);
      break;
  }
  return out;
}

std::vector<int> stratified_folds(const std::vector<int>& labels, int k, int folds, RngStream& rng) {
  if (folds < 2) throw Error(ErrorCode::InvalidArgument, "need at least 2 folds");
  std::vector<std::vector<int>> members(static_cast<std::size_t>(k));
  for (std::size_t r = 0; r < labels.size(); ++r) {
    const int c = labels[r];
    if (c < 1 || c > k) throw Error(ErrorCode::InvalidArgument, "label outside 1..K");
    members[static_cast<std::size_t>(c - 1)].push_back(static_cast<int>(r));
  }
  std::vector<int> fold_of(labels.size(), -1);
  for (int c = 0; c < k; ++c) {
    auto& idx = members[static_cast<std::size_t>(c)];
    if (static_cast<int>(idx.size()) < folds) {
      std::ostringstream msg;
      msg << "class " << c + 1 << " has " << idx.size() << " observations, fewer than " << folds
          << " folds";
      throw Error(ErrorCode::ClassTooSmall, msg.str());
    }
    shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t t = 0; t < idx.size(); ++t) {
      fold_of[static_cast<std::size_t>(idx[t])] = static_cast<int>(t % static_cast<std::size_t>(folds));
    }
  }
  return fold_of;
}

namespace {

double error_rate(const DecisionRule& rule, const LabeledSample& val) {
  const Mat y = val.x * rule.weights.transpose();
  long wrong = 0;
  Vec row(y.cols());
  for (Eigen::Index r = 0; r < y.rows(); ++r) {
    row = y.row(r).transpose();
    if (rule.decide(row) != val.labels[static_cast<std::size_t>(r)]) ++wrong;
  }
  return static_cast<double>(wrong) / val.n();
}

Mat slda_centers(const FittedStats& stats, double m2, double alpha) {
  const ThresholdedDeltas td = threshold_deltas(stats, m2, alpha);
  Mat centers = td.deltas_to_1.rowwise() + stats.class_means.row(0);
  centers.row(0) = stats.class_means.row(0);
  return centers;
}

// Held-out error for every combo on one split; nullopt marks a failed fit.
std::vector<std::optional<double>> fold_errors(Method method, const LabeledSample& train,
                                               const LabeledSample& val, const Grid& g,
                                               const std::vector<FitParams>& combos) {
  std::vector<std::optional<double>> out(combos.size());
  switch (method) {
    case Method::Opt:
      throw Error(ErrorCode::InvalidArgument, "the optimal rule is not tuned on data");
    case Method::Glda: {
      const ClassifierModel model = fit(Method::Glda, train, combos[0]);
      out[0] = error_rate(model.rule, val);
      break;
    }
    case Method::Lpd: {
      const FittedStats stats = fit_stats(train);
      const Mat sigma_bar = corrected_cov(stats);
      for (std::size_t c = 0; c < combos.size(); ++c) {
        const LpdDirections dirs = lpd_directions(sigma_bar, stats.class_means, combos[c].lambda);
        if (!dirs.all_feasible()) continue;
        out[c] = error_rate(lpd_rule(dirs.betas_to_1, stats.class_means), val);
      }
      break;
    }
    case Method::Slda1:
    case Method::Slda2: {
      const FittedStats stats = fit_stats(train);
      const Mat sigma_bar = corrected_cov(stats);
      std::vector<Mat> centers;
      for (double m2 : g.m2) centers.push_back(slda_centers(stats, m2, g.alpha));
      const std::size_t n2 = g.m2.size();
      const std::size_t ne = method == Method::Slda2 ? g.epsilons.size() : 1;
      for (std::size_t i1 = 0; i1 < g.m1.size(); ++i1) {
        const ThresholdedCov tc = threshold_cov(sigma_bar, stats.n, g.m1[i1]);
        const SymEigen eig = sym_eigen(tc.sigma_tilde);
        for (std::size_t ie = 0; ie < ne; ++ie) {
          const Mat omega = method == Method::Slda1 ? pinv(eig) : ridge_inverse(eig, g.epsilons[ie]);
          for (std::size_t i2 = 0; i2 < n2; ++i2) {
            const std::size_t idx = (i1 * n2 + i2) * ne + ie;
            out[idx] = error_rate(quadratic_rule(centers[i2], omega), val);
          }
        }
      }
      break;
    }
    case Method::Nsc: {
      const NscStats stats = nsc_stats(train);
      for (std::size_t c = 0; c < combos.size(); ++c) {
        out[c] = error_rate(nsc_rule(nsc_fit(stats, combos[c].delta)), val);
      }
      break;
    }
  }
  return out;
}

}  // namespace

CvResult grid_search_with_folds(Method method, const LabeledSample& data, const Grid& grid,
                                int folds, const std::vector<int>& fold_of) {
  data.validate();
  if (static_cast<int>(fold_of.size()) != data.n()) {
    throw Error(ErrorCode::DimensionMismatch, "fold assignment length differs from sample size");
  }
  const Grid g = resolve_grid(method, grid, data);
  CvResult result;
  result.combos = grid_combos(method, g);
  result.fold_assignments = fold_of;
  if (result.combos.empty()) throw Error(ErrorCode::InvalidArgument, "empty tuning grid");

  const std::size_t nc = result.combos.size();
  std::vector<double> sums(nc, 0.0);
  std::vector<bool> valid(nc, true);
  for (int f = 0; f < folds; ++f) {
    std::vector<int> train_rows, val_rows;
    for (int r = 0; r < data.n(); ++r) {
      (fold_of[static_cast<std::size_t>(r)] == f ? val_rows : train_rows).push_back(r);
    }
    if (val_rows.empty() || train_rows.empty()) {
      throw Error(ErrorCode::InvalidArgument, "a fold is empty");
    }
    const LabeledSample train = data.subset(train_rows);
    const LabeledSample val = data.subset(val_rows);
    std::vector<std::optional<double>> errs;
    try {
      errs = fold_errors(method, train, val, g, result.combos);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::InvalidArgument) throw;
      errs.assign(nc, std::nullopt);
    }
    for (std::size_t c = 0; c < nc; ++c) {
      if (errs[c]) {
        sums[c] += *errs[c];
      } else {
        valid[c] = false;
      }
    }
  }

  result.cv_error_table.assign(nc, std::nullopt);
  std::optional<std::size_t> best;
  for (std::size_t c = 0; c < nc; ++c) {
    if (!valid[c]) continue;
    const double mean = sums[c] / folds;
    result.cv_error_table[c] = mean;
    if (!best || mean < *result.cv_error_table[*best]) best = c;
  }
  if (!best) {
    throw Error(ErrorCode::AllCombosInvalid,
                std::string("no valid tuning combination for ") + std::string(method_name(method)));
  }
  result.best_index = *best;
  result.best_params = result.combos[*best];
  return result;
}

CvResult grid_search(Method method, const LabeledSample& data, const Grid& grid, int folds,
                     RngStream& rng) {
  const std::vector<int> fold_of = stratified_folds(data.labels, data.k, folds, rng);
  return grid_search_with_folds(method, data, grid, folds, fold_of);
}

}  // namespace hdlda
