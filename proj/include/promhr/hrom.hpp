// Copyright 2026 The promhr Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "promhr/ecm.hpp"

#include <vector>

namespace promhr {

/// Quadrature plus, for LSPG, the complementary element set that supplies R^{Le}.
struct HyperReducedOperatorSet
{
   EcmQuadrature quadrature;
   std::vector<Index> complementary;   ///< empty unless built for LSPG
};

/// Sum_z w_e Phi^{eT} R^e and sum_z w_e Phi^{eT} J^e Phi^e; |z| element
/// evaluations per iteration. Full residual norms are not available and are
/// recorded as NaN.
RomStepResult solve_timestep_hrom_galerkin(const Problem &problem, const Matrix &Phi,
                                           const EcmQuadrature &quadrature,
                                           const Vector &u_ref, const StepContext &ctx,
                                           const NewtonSettings &settings);

/// W = sum_z w_e Psi^{eT} J^e Phi^e against sum_z w_e Psi^{eT} R^e, solved as the
/// full-projection PG step; |z| element evaluations per iteration.
RomStepResult solve_timestep_hrom_pg(const Problem &problem, const Matrix &Phi, const Matrix &Psi,
                                     const EcmQuadrature &quadrature, const Vector &u_ref,
                                     const StepContext &ctx, const NewtonSettings &settings);

/// Gauss-Newton on sum_z w_e (J^e Phi^e)^T R^{Le} with left side
/// sum_z w_e (J^e Phi^e)^T (J Phi)^{Le}. R and J Phi are assembled over the
/// complementary elements only, in ascending order, which reproduces the full
/// assembly at every DOF of a selected element. |complementary| element
/// evaluations per iteration.
RomStepResult solve_timestep_hrom_lspg(const Problem &problem, const Matrix &Phi,
                                       const EcmQuadrature &quadrature,
                                       const std::vector<Index> &complementary,
                                       const Vector &u_ref, const StepContext &ctx,
                                       const NewtonSettings &settings);

/// Residual assembled over `elements` (ascending) and gathered at element e.
Vector patch_assembled_residual(const Problem &problem, const std::vector<Index> &elements,
                                Index e, const Vector &u, const Vector &u_ref,
                                const StepContext &ctx);

} // namespace promhr
