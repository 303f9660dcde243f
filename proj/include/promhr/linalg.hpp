// Copyright 2026 The promhr Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstddef>
#include <vector>

namespace promhr {

using Matrix = Eigen::MatrixXd;          // column-major
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Index = Eigen::Index;

namespace linalg {

struct TruncatedSvdResult
{
   Matrix U;       ///< left singular vectors, rows(A) x retained_rank
   Vector sigma;   ///< nonincreasing, strictly positive
   Matrix V;       ///< right singular vectors, cols(A) x retained_rank

   Index retained_rank() const { return sigma.size(); }
};

/// Rank-revealing truncated SVD with a relative Frobenius tolerance.
///
/// Keeps the smallest number of modes such that the discarded part E satisfies
/// ||E||_F <= eps ||A||_F. Singular values below max(rows, cols) * machine
/// epsilon * sigma_0 are never kept, which makes eps = 0 return the numerical
/// rank. Each left singular vector is signed so that its largest-magnitude
/// entry is positive. With left = false, U is left empty and each column of V
/// is signed that way instead.
///
/// Throws InvalidInput on empty or non-finite A, or eps outside [0, 1].
TruncatedSvdResult truncated_svd(const Matrix &A, double eps, bool left = true);

/// Frobenius norm of the tail sigma[k:], accumulated from the smallest value up.
double tail_norm(const Vector &sigma, Index k);

/// argmin_x ||W x - r||_2 by Householder QR. Requires rows(W) >= cols(W).
/// Throws SingularSystem (carrying the column) if some |R_ii| falls below
/// 1e-12 max_j |R_jj|.
Vector qr_least_squares(const Matrix &W, const Vector &r);

struct NnlsResult
{
   Vector x;
   Index iterations = 0;
   bool converged = true;
};

/// Lawson-Hanson active-set solution of min ||A x - b|| subject to x >= 0.
/// A non-empty initial_passive warm-starts the iteration from that column set.
NnlsResult nonneg_least_squares_detailed(const Matrix &A, const Vector &b,
                                         const std::vector<Index> &initial_passive = {});

inline Vector nonneg_least_squares(const Matrix &A, const Vector &b,
                                   const std::vector<Index> &initial_passive = {})
{
   return nonneg_least_squares_detailed(A, b, initial_passive).x;
}

bool all_finite(const Matrix &A);

} // namespace linalg
} // namespace promhr
