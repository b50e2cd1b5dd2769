#include "hdlda/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <vector>

#include <Eigen/Eigenvalues>

#include "hdlda/error.hpp"

namespace hdlda {

double max_abs(const Mat& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

bool is_symmetric(const Mat& a, double rel_tol) {
  if (a.rows() != a.cols()) return false;
  const double scale = std::max(max_abs(a), std::numeric_limits<double>::min());
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = j + 1; i < a.rows(); ++i) {
      if (std::abs(a(i, j) - a(j, i)) > rel_tol * scale) return false;
    }
  }
  return true;
}

void symmetrize_from_lower(Mat& a) {
  a.triangularView<Eigen::StrictlyUpper>() = a.transpose();
}

Mat cholesky(const Mat& a) {
  if (a.rows() != a.cols()) {
    throw Error(ErrorCode::InvalidArgument, "cholesky: matrix is not square");
  }
  if (!is_symmetric(a)) {
    throw Error(ErrorCode::InvalidArgument, "cholesky: matrix is not symmetric");
  }
  const Eigen::Index n = a.rows();
  const double floor = 1e-12 * max_abs(a);
  Mat l = Mat::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double pivot = a(j, j) - l.row(j).head(j).squaredNorm();
    if (!(pivot > floor)) {
      std::ostringstream msg;
      msg << "cholesky: non-positive pivot " << pivot << " at column " << j;
      throw Error(ErrorCode::NotPositiveDefinite, msg.str());
    }
    const double ljj = std::sqrt(pivot);
    l(j, j) = ljj;
    const Eigen::Index rest = n - j - 1;
    if (rest > 0) {
      l.col(j).tail(rest) =
          (a.col(j).tail(rest) - l.block(j + 1, 0, rest, j) * l.row(j).head(j).transpose()) / ljj;
    }
  }
  return l;
}

SymEigen sym_eigen(const Mat& a) {
  if (a.rows() != a.cols()) {
    throw Error(ErrorCode::InvalidArgument, "sym_eigen: matrix is not square");
  }
  const Eigen::Index n = a.rows();
  if (n == 0) return {};
  // Householder tridiagonalization followed by implicit-shift QL/QR; the
  // iteration budget is 30 sweeps per dimension.
  Eigen::SelfAdjointEigenSolver<Mat> solver;
  solver.compute(a, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::NoConvergence, "sym_eigen: QL iteration did not converge");
  }
  // Eigen sorts ascending.
  SymEigen out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

Mat pinv(const SymEigen& eig, std::optional<double> rel_tol) {
  const Eigen::Index n = eig.values.size();
  if (n == 0) return Mat(0, 0);
  const double tol_factor =
      rel_tol.value_or(static_cast<double>(n) * std::numeric_limits<double>::epsilon());
  const double top = eig.values.cwiseAbs().maxCoeff();
  if (top == 0.0) return Mat::Zero(n, n);
  const double cut = tol_factor * top;
  Vec inv(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    inv(i) = std::abs(eig.values(i)) <= cut ? 0.0 : 1.0 / eig.values(i);
  }
  Mat out = eig.vectors * inv.asDiagonal() * eig.vectors.transpose();
  // (X + Xᵀ)/2 keeps the Penrose symmetry conditions exact.
  Mat sym = 0.5 * (out + out.transpose());
  return sym;
}

Mat pinv(const Mat& a, std::optional<double> rel_tol) {
  if (a.rows() == 0) return Mat(0, 0);
  return pinv(sym_eigen(a), rel_tol);
}

Mat sym_sqrt(const Mat& a) {
  const SymEigen eig = sym_eigen(a);
  const Vec root = eig.values.cwiseMax(0.0).cwiseSqrt();
  Mat out = eig.vectors * root.asDiagonal() * eig.vectors.transpose();
  return 0.5 * (out + out.transpose());
}

Mat psd_factor(const Mat& a) {
  if (a.rows() == 0) return Mat(0, 0);
  try {
    return cholesky(a);
  } catch (const Error&) {
    const SymEigen eig = sym_eigen(a);
    return eig.vectors * eig.values.cwiseMax(0.0).cwiseSqrt().asDiagonal();
  }
}

}  // namespace hdlda
