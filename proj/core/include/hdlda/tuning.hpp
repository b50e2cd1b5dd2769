#pragma once

#include <optional>
#include <vector>

#include "hdlda/classifiers.hpp"
#include "hdlda/population.hpp"
#include "hdlda/rng.hpp"

namespace hdlda {

/// Candidate values per tuning parameter. Empty lists mean "use the default".
struct Grid {
  std::vector<double> lambdas;   // LPD
  std::vector<double> m1;        // SLDA covariance threshold
  std::vector<double> m2;        // SLDA mean threshold
  std::vector<double> epsilons;  // SLDA2 ridge
  std::vector<double> deltas;    // NSC; default derived from the data
  double alpha = 0.3;
  int nsc_grid_size = 30;
};

/// λ ∈ {0.2, 0.25, ..., 0.7}.
std::vector<double> default_lambdas();
/// 10⁻⁵ ... 1.
std::vector<double> default_m1();
/// 10⁻⁷ ... 1.
std::vector<double> default_m2();
/// 10⁻⁵ ... 10⁻¹.
std::vector<double> default_epsilons();
/// `count` equally spaced values from 0 to max|d_ik| on `data`.
std::vector<double> default_nsc_deltas(const LabeledSample& data, int count = 30);

/// Fills every empty list that `method` uses with its default.
Grid resolve_grid(Method method, Grid grid, const LabeledSample& data);

/// Parameter combinations in search order: λ ascending for LPD; M₁ outer,
/// M₂ inner, ε innermost for SLDA; Δ ascending for NSC. A single default
/// combination for untuned methods.
std::vector<FitParams> grid_combos(Method method, const Grid& resolved);

/// Within each class the indices are shuffled, then dealt round-robin to
/// folds 0..folds-1. Throws Error{ClassTooSmall} when a class has fewer than
/// `folds` members and Error{InvalidArgument} for folds < 2.
std::vector<int> stratified_folds(const std::vector<int>& labels, int k, int folds, RngStream& rng);

struct CvResult {
  FitParams best_params;
  std::size_t best_index = 0;
  std::vector<FitParams> combos;
  std::vector<std::optional<double>> cv_error_table;  // empty = invalid combo
  std::vector<int> fold_assignments;
};

/// Mean held-out error per combination over the folds; a combination whose
/// fit fails in any fold is excluded. Ties go to the earliest combination.
/// Throws Error{AllCombosInvalid} when nothing survives.
CvResult grid_search(Method method, const LabeledSample& data, const Grid& grid, int folds,
                     RngStream& rng);

/// Same, with fold assignments supplied by the caller.
CvResult grid_search_with_folds(Method method, const LabeledSample& data, const Grid& grid,
                                int folds, const std::vector<int>& fold_of);

}  // namespace hdlda
