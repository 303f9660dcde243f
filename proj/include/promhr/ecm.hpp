// Copyright 2026 The promhr Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "promhr/rom.hpp"

#include <map>
#include <string>
#include <vector>

namespace promhr {

/// Snapshots as rows, elements as columns: rows [s m, (s + 1) m) hold the
/// m-vector integrand of every element at training state s. b = X 1.
struct EcmTrainingMatrix
{
   Matrix X;
   Vector b;
   Index block_rows = 0;   ///< m
   Index snapshots = 0;

   Index num_elements() const { return X.cols(); }
};

/// Columns Psi^{eT} R^e (Galerkin with Psi = Phi, or a fixed left basis).
EcmTrainingMatrix build_ecm_training_matrix(const Problem &problem, const Matrix &Psi,
                                            const std::vector<TrainingState> &states);

/// Columns (J^e Phi^e)^T R^{Le}: the Jacobian-weighted residual summed by LSPG.
/// R^{Le} is the assembled residual gathered at element e's DOFs.
EcmTrainingMatrix build_lspg_ecm_training_matrix(const Problem &problem, const Matrix &Phi,
                                                 const std::vector<TrainingState> &states);

struct CompressedTraining
{
   Matrix Theta;        ///< orthonormal rows, p x L
   Vector b_theta;      ///< Theta g
   Vector weighting;    ///< g (all ones unless volume weighted)
   Index svd_rank = 0;  ///< rows coming from the SVD
   bool augmented = false;
};

/// Truncated SVD X diag(g)^{-1} = U S Theta + E with ||E||_F <= eps ||X||_F.
///
/// When augment is set, the normalized component of g orthogonal to the rows of
/// Theta is appended as an extra row, so the element weights are also asked to
/// reproduce sum_e g_e. Converged training states make X 1 vanish, and without
/// this row the fit would admit the trivial empty quadrature.
CompressedTraining compress_training_matrix(const Matrix &X, double eps_ecm,
                                            const Vector *weighting = nullptr,
                                            bool augment = true);

struct EcmQuadrature
{
   std::vector<Index> z;              ///< ascending element ids
   Vector omega;                      ///< strictly positive
   double fit_residual = 0.0;         ///< ||Theta_z w - b|| / ||b||
   bool converged = true;
   std::vector<double> fit_history;   ///< after each greedy weight re-solve
};

/// Greedy selection: add the column with the largest cosine to the current
/// residual, re-solve all weights by NNLS, prune weights below 1e-12 of the
/// largest, stop once the relative fit reaches max(eps_fit, 1e-13), no
/// candidate is left or 10 p + 10 rounds have passed. Candidates keep being
/// offered after |z| reaches the row count p of Theta; the re-solve never keeps
/// more than p weights. A converged support then goes through exchange passes:
/// each element in turn is dropped, forbidden and the greedy regrows for at most
/// three rounds; a regrown support that converges with fewer elements replaces
/// the current one.
EcmQuadrature select_elements(const Matrix &Theta, const Vector &b_theta, double eps_fit);

struct EcmOptions
{
   bool augment = true;
   bool volume_weighting = false;
   bool normalize_blocks = true;   ///< scale each state's rows of X to unit Frobenius norm
};

/// compress_training_matrix + select_elements, mapping weights back through g.
EcmQuadrature train_quadrature(const Problem &problem, const EcmTrainingMatrix &training,
                               double eps_ecm, double eps_fit, const EcmOptions &options = {});

/// Union of the patches of the selected elements, ascending.
std::vector<Index> build_complementary_mesh(const std::vector<Index> &z, const Mesh &mesh);

/// Largest, over training states, of ||sum_z w_e X_se - sum_e X_se|| divided by
/// the Frobenius norm of that state's block of element contributions.
double quadrature_exactness(const EcmTrainingMatrix &training, const EcmQuadrature &q);

std::string quadrature_to_json(const EcmQuadrature &q,
                               const std::map<std::string, std::string> &provenance = {});
EcmQuadrature quadrature_from_json(const std::string &text);

} // namespace promhr
