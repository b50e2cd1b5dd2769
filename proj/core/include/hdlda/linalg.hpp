#pragma once

#include <optional>

#include <Eigen/Dense>

namespace hdlda {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Eigendecomposition of a symmetric matrix, eigenvalues in descending order.
struct SymEigen {
  Vec values;
  Mat vectors;  // columns are orthonormal eigenvectors
};

/// Lower Cholesky factor L with L Lᵀ = a.
///
/// Throws Error{NotPositiveDefinite} when a pivot falls to or below
/// 1e-12 * max|a|, and Error{InvalidArgument} for non-square or asymmetric
/// input (relative tolerance 1e-10).
Mat cholesky(const Mat& a);

/// Throws Error{NoConvergence} if the QL iteration exceeds 30·p sweeps.
SymEigen sym_eigen(const Mat& a);

/// Moore-Penrose pseudoinverse of a symmetric matrix. Eigenvalues with
/// |λ| <= rel_tol * max|λ| are treated as zero; rel_tol defaults to p·eps.
Mat pinv(const Mat& a, std::optional<double> rel_tol = std::nullopt);

/// Same, starting from an existing eigendecomposition.
Mat pinv(const SymEigen& eig, std::optional<double> rel_tol = std::nullopt);

/// Symmetric square root of a positive semidefinite matrix (negative
/// eigenvalues clipped to zero).
Mat sym_sqrt(const Mat& a);

/// Any factor F with F Fᵀ = a for symmetric PSD a. Uses Cholesky when it
/// succeeds and the clipped eigen square root otherwise.
Mat psd_factor(const Mat& a);

double max_abs(const Mat& a);

bool is_symmetric(const Mat& a, double rel_tol = 1e-10);

/// Copies the lower triangle onto the upper one so the result is exactly
/// symmetric.
void symmetrize_from_lower(Mat& a);

}  // namespace hdlda
