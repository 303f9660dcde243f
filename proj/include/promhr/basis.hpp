// Copyright 2026 The promhr Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "promhr/rom.hpp"

#include <string>
#include <vector>

namespace promhr {

enum class BasisRole
{
   RightPhi,
   LeftJacobian,
   LeftResidual
};

std::string to_string(BasisRole role);
BasisRole basis_role_from_string(const std::string &name);

/// Orthonormal columns obtained by truncated SVD of a snapshot matrix.
struct ReducedBasis
{
   Matrix matrix;
   double tolerance = 0.0;
   BasisRole role = BasisRole::RightPhi;
   Vector spectrum;          ///< all singular values of the training matrix kept by the SVD floor
   Index snapshot_count = 0;

   Index cols() const { return matrix.cols(); }
};

ReducedBasis build_right_basis(const Matrix &A_u, double eps_u);
ReducedBasis build_left_basis_jacobian(const Matrix &S_J, double eps_psi_j);
ReducedBasis build_left_basis_residual(const Matrix &S_R, double eps_r);

/// ||(I - Psi_J Psi_J^T) Psi_R||_F.
double containment_defect(const Matrix &Psi_J, const Matrix &Psi_R);

/// Which solver generates the left-basis training snapshots.
enum class LeftTrainingSource
{
   Lspg,
   Fom
};

struct LeftTrainingOptions
{
   LeftTrainingSource source = LeftTrainingSource::Lspg;
   bool include_converged_residuals = false;
};

/// Snapshot matrices of the second training pass.
struct LeftTrainingData
{
   Matrix S_J;                          ///< J(u_i) Phi at every converged state, n columns each
   Matrix S_R;                          ///< non-converged residuals R(u^(k))
   std::vector<Index> residual_counts;  ///< columns of S_R contributed per timestep
   RomCampaign campaign;                ///< the generating trajectories
};

LeftTrainingData collect_left_training(const Problem &problem, const Matrix &Phi,
                                       const std::vector<Parameter> &parameters,
                                       const NewtonSettings &settings,
                                       const LeftTrainingOptions &options = {});

Matrix collect_jacobian_snapshots(const Problem &problem, const Matrix &Phi,
                                  const std::vector<Parameter> &parameters,
                                  const NewtonSettings &settings);

Matrix collect_residual_snapshots(const Problem &problem, const Matrix &Phi,
                                  const std::vector<Parameter> &parameters,
                                  const NewtonSettings &settings);

/// Snapshot counts, retained ranks and spectra of one training run.
struct TrainingLog
{
   struct Entry
   {
      std::string name;
      Index snapshots = 0;
      Index rank = 0;
      double tolerance = 0.0;
      Vector spectrum;
   };
   std::vector<Entry> entries;

   void add(const std::string &name, const ReducedBasis &basis);
   std::string to_json() const;
};

} // namespace promhr
