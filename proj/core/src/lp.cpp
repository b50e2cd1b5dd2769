#include "hdlda/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/LU>

#include "hdlda/error.hpp"

namespace hdlda {

const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::Optimal: return "Optimal";
    case LpStatus::Infeasible: return "Infeasible";
    case LpStatus::Unbounded: return "Unbounded";
    case LpStatus::IterationLimit: return "IterationLimit";
  }
  return "Unknown";
}

namespace {

constexpr double kFeasTol = 1e-9;
constexpr double kOptTol = 1e-9;
constexpr double kPivotTol = 1e-9;

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Equality form: rows i of [G | I | art] (sign-flipped when g_i < 0) with a
// basis of slacks or artificials.
class Tableau {
 public:
  Tableau(const StandardLp& lp) : m_(lp.g.rows()), q_(lp.g.cols()) {
    std::vector<Eigen::Index> art_rows;
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (lp.rhs(i) < 0.0) art_rows.push_back(i);
    }
    n_art_ = static_cast<Eigen::Index>(art_rows.size());
    ncol_ = q_ + m_ + n_art_;
    rhs_col_ = ncol_;
    t_ = RowMat::Zero(m_, ncol_ + 1);
    basis_.assign(static_cast<std::size_t>(m_), 0);
    sign_ = Vec::Ones(m_);
    Eigen::Index next_art = q_ + m_;
    for (Eigen::Index i = 0; i < m_; ++i) {
      const double s = lp.rhs(i) < 0.0 ? -1.0 : 1.0;
      sign_(i) = s;
      t_.row(i).head(q_) = s * lp.g.row(i);
      t_(i, q_ + i) = s;
      t_(i, rhs_col_) = s * lp.rhs(i);
      if (s < 0.0) {
        t_(i, next_art) = 1.0;
        basis_[static_cast<std::size_t>(i)] = next_art++;
      } else {
        basis_[static_cast<std::size_t>(i)] = q_ + i;
      }
    }
    z_ = Vec::Zero(ncol_ + 1);
  }

  Eigen::Index rows() const { return m_; }
  Eigen::Index structural() const { return q_; }
  bool is_artificial(Eigen::Index col) const { return col >= q_ + m_; }
  Eigen::Index num_artificial() const { return n_art_; }

  void set_phase_one_costs() {
    z_.setZero();
    for (Eigen::Index j = q_ + m_; j < ncol_; ++j) z_(j) = 1.0;
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (is_artificial(basis_[static_cast<std::size_t>(i)])) z_ -= t_.row(i).transpose();
    }
  }

  void set_phase_two_costs(const Vec& c) {
    z_.setZero();
    z_.head(q_) = c;
    for (Eigen::Index i = 0; i < m_; ++i) {
      const Eigen::Index b = basis_[static_cast<std::size_t>(i)];
      const double cb = b < q_ ? c(b) : 0.0;
      if (cb != 0.0) z_ -= cb * t_.row(i).transpose();
    }
  }

  double objective() const { return -z_(rhs_col_); }

  // Runs simplex pivots until optimal. Columns with index >= allowed_cols
  // never enter.
  LpStatus optimize(Eigen::Index allowed_cols, int& iterations, int max_iters) {
    const long degenerate_limit = 2 * (m_ + q_);
    long degenerate_run = 0;
    while (true) {
      const bool bland = degenerate_run > degenerate_limit;
      Eigen::Index enter = -1;
      double best = -kOptTol;
      for (Eigen::Index j = 0; j < allowed_cols; ++j) {
        if (z_(j) < best) {
          enter = j;
          if (bland) break;
          best = z_(j);
        }
      }
      if (enter < 0) return LpStatus::Optimal;
      if (iterations >= max_iters) return LpStatus::IterationLimit;

      Eigen::Index leave = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < m_; ++i) {
        const double a = t_(i, enter);
        if (a <= kPivotTol) continue;
        const double ratio = std::max(t_(i, rhs_col_), 0.0) / a;
        if (ratio < best_ratio - 1e-12 ||
            (ratio <= best_ratio + 1e-12 &&
             basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)])) {
          best_ratio = std::min(ratio, best_ratio);
          leave = i;
        }
      }
      if (leave < 0) return LpStatus::Unbounded;
      degenerate_run = best_ratio <= 1e-12 ? degenerate_run + 1 : 0;
      pivot(leave, enter);
      ++iterations;
    }
  }

  // After phase one, replace zero-level artificials in the basis by
  // structural or slack columns where the row allows it.
  void drive_out_artificials() {
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (!is_artificial(basis_[static_cast<std::size_t>(i)])) continue;
      Eigen::Index best_col = -1;
      double best_abs = kPivotTol;
      for (Eigen::Index j = 0; j < q_ + m_; ++j) {
        if (std::abs(t_(i, j)) > best_abs) {
          best_abs = std::abs(t_(i, j));
          best_col = j;
        }
      }
      if (best_col >= 0) pivot(i, best_col);
    }
  }

  Vec structural_solution() const {
    Vec z = Vec::Zero(q_);
    for (Eigen::Index i = 0; i < m_; ++i) {
      const Eigen::Index b = basis_[static_cast<std::size_t>(i)];
      if (b < q_) z(b) = std::max(t_(i, rhs_col_), 0.0);
    }
    return z;
  }

  // Recomputes the basic solution from the original data, removing the
  // rounding accumulated over many pivots.
  Vec refined_solution(const StandardLp& lp) const {
    Mat basis_mat = Mat::Zero(m_, m_);
    for (Eigen::Index i = 0; i < m_; ++i) {
      const Eigen::Index b = basis_[static_cast<std::size_t>(i)];
      if (b < q_) {
        basis_mat.col(i) = lp.g.col(b);
      } else if (b < q_ + m_) {
        basis_mat(b - q_, i) = 1.0;
      } else {
        // Artificial at zero level: a unit column on its own row keeps B
        // nonsingular.
        for (Eigen::Index r = 0; r < m_; ++r) {
          if (t_(r, b) == 1.0 && basis_[static_cast<std::size_t>(r)] == b) basis_mat(r, i) = sign_(r);
        }
      }
    }
    Eigen::PartialPivLU<Mat> lu(basis_mat);
    const Vec xb = lu.solve(lp.rhs);
    Vec z = Vec::Zero(q_);
    for (Eigen::Index i = 0; i < m_; ++i) {
      const Eigen::Index b = basis_[static_cast<std::size_t>(i)];
      if (b < q_) z(b) = std::max(xb(i), 0.0);
    }
    return z;
  }

 private:
  void pivot(Eigen::Index r, Eigen::Index c) {
    const double piv = t_(r, c);
    t_.row(r) /= piv;
    t_(r, c) = 1.0;
    nz_.clear();
    for (Eigen::Index j = 0; j <= ncol_; ++j) {
      if (t_(r, j) != 0.0) nz_.push_back(j);
    }
    const bool sparse = static_cast<Eigen::Index>(nz_.size()) * 3 < ncol_;
    auto eliminate = [&](auto&& row, double f) {
      if (sparse) {
        for (Eigen::Index j : nz_) row(j) -= f * t_(r, j);
      } else {
        row.noalias() -= f * t_.row(r);
      }
    };
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (i == r) continue;
      const double f = t_(i, c);
      if (f == 0.0) continue;
      auto row = t_.row(i);
      eliminate(row, f);
      t_(i, c) = 0.0;
    }
    const double f = z_(c);
    if (f != 0.0) {
      auto zrow = z_.transpose();
      eliminate(zrow, f);
      z_(c) = 0.0;
    }
    basis_[static_cast<std::size_t>(r)] = c;
  }

  Eigen::Index m_;
  Eigen::Index q_;
  Eigen::Index n_art_ = 0;
  Eigen::Index ncol_ = 0;
  Eigen::Index rhs_col_ = 0;
  RowMat t_;
  Vec z_;
  Vec sign_;
  std::vector<Eigen::Index> basis_;
  std::vector<Eigen::Index> nz_;
};

bool satisfies(const StandardLp& lp, const Vec& z, double tol) {
  if ((z.array() < -1e-10).any()) return false;
  const Vec lhs = lp.g * z;
  for (Eigen::Index i = 0; i < lhs.size(); ++i) {
    if (lhs(i) > lp.rhs(i) + tol) return false;
  }
  return true;
}

}  // namespace

LpSolution solve_standard(const StandardLp& lp, int max_iters) {
  const Eigen::Index m = lp.g.rows();
  const Eigen::Index q = lp.g.cols();
  if (lp.c.size() != q || lp.rhs.size() != m) {
    throw Error(ErrorCode::DimensionMismatch, "solve_standard: inconsistent LP dimensions");
  }
  if (!lp.c.allFinite() || !lp.g.allFinite() || !lp.rhs.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "solve_standard: non-finite LP data");
  }
  if (max_iters <= 0) max_iters = static_cast<int>(50 * (m + q));

  LpSolution out;
  Tableau tab(lp);
  int iterations = 0;
  if (tab.num_artificial() > 0) {
    tab.set_phase_one_costs();
    const LpStatus st = tab.optimize(q + m + tab.num_artificial(), iterations, max_iters);
    out.iterations = iterations;
    if (st == LpStatus::IterationLimit) {
      out.status = st;
      return out;
    }
    const double scale = std::max(1.0, lp.rhs.cwiseAbs().maxCoeff());
    if (tab.objective() > kFeasTol * scale) {
      out.status = LpStatus::Infeasible;
      return out;
    }
    tab.drive_out_artificials();
  }
  tab.set_phase_two_costs(lp.c);
  const LpStatus st = tab.optimize(q + m, iterations, max_iters);
  out.iterations = iterations;
  out.status = st;
  if (st != LpStatus::Optimal) return out;

  out.z = tab.structural_solution();
  if (!satisfies(lp, out.z, 1e-9)) {
    Vec refined = tab.refined_solution(lp);
    if (refined.allFinite()) out.z = std::move(refined);
  }
  out.objective_value = lp.c.dot(out.z);
  return out;
}

L1LinfResult solve_l1_linf(const Mat& a, const Vec& d, double lambda, int max_iters) {
  const Eigen::Index p = a.rows();
  if (a.cols() != p || d.size() != p) {
    throw Error(ErrorCode::DimensionMismatch, "solve_l1_linf: A must be p x p and d length p");
  }
  if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, "solve_l1_linf: lambda must be > 0");

  StandardLp lp;
  lp.c = Vec::Ones(2 * p);
  lp.g.resize(2 * p, 2 * p);
  lp.g.topLeftCorner(p, p) = a;
  lp.g.topRightCorner(p, p) = -a;
  lp.g.bottomLeftCorner(p, p) = -a;
  lp.g.bottomRightCorner(p, p) = a;
  lp.rhs.resize(2 * p);
  lp.rhs.head(p) = d.array() + lambda;
  lp.rhs.tail(p) = lambda - d.array();

  const LpSolution sol = solve_standard(lp, max_iters);
  L1LinfResult out;
  out.status = sol.status;
  out.iterations = sol.iterations;
  if (sol.status != LpStatus::Optimal) return out;
  out.beta = sol.z.head(p) - sol.z.tail(p);
  out.objective = out.beta.lpNorm<1>();
  return out;
}

}  // namespace hdlda
