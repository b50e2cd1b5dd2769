#pragma once

#include "hdlda/linalg.hpp"

namespace hdlda {

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

const char* to_string(LpStatus status);

/// min cᵀz subject to G z <= g, z >= 0.
struct StandardLp {
  Vec c;
  Mat g;    // m × q
  Vec rhs;  // m
};

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  Vec z;
  double objective_value = 0.0;
  int iterations = 0;
};

/// Dense two-phase primal simplex. Dantzig pricing; Bland's rule takes over
/// after 2(m+q) consecutive degenerate pivots and stays until the objective
/// moves again. Feasibility and optimality tolerances are 1e-9. The pivot
/// sequence is a deterministic function of the input.
///
/// max_iters <= 0 selects the default budget 50·(m+q).
LpSolution solve_standard(const StandardLp& lp, int max_iters = 0);

struct L1LinfResult {
  LpStatus status = LpStatus::Infeasible;
  Vec beta;
  double objective = 0.0;
  int iterations = 0;
};

/// min ‖β‖₁ subject to ‖Aβ - d‖_∞ <= lambda, via the split β = β⁺ - β⁻.
/// On Optimal, ‖Aβ - d‖_∞ <= lambda + 1e-8.
L1LinfResult solve_l1_linf(const Mat& a, const Vec& d, double lambda, int max_iters = 0);

}  // namespace hdlda
