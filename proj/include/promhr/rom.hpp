// Copyright 2026 The promhr Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "promhr/fom.hpp"

#include <functional>
#include <string>
#include <vector>

namespace promhr {

/// Reduced coordinates and the reconstructed state u_tilde = u_ref + Phi q_hat.
struct RomState
{
   Vector q_hat;
   Vector u_tilde;
};

struct RomStepResult
{
   RomState state;
   IterationTrace trace;   ///< steps hold the reduced search directions
};

/// Galerkin: Phi^T J Phi p = -Phi^T R, converged on ||Phi^T R||.
RomStepResult solve_timestep_galerkin(const Problem &problem, const Matrix &Phi,
                                      const Vector &u_ref, const StepContext &ctx,
                                      const NewtonSettings &settings);

/// Least-squares Petrov-Galerkin (Gauss-Newton): (J Phi)^T (J Phi) p = -(J Phi)^T R,
/// converged on ||(J Phi)^T R||. With use_qr the step is the QR least-squares
/// solution of J Phi p = -R instead of the normal equations.
RomStepResult solve_timestep_lspg(const Problem &problem, const Matrix &Phi,
                                  const Vector &u_ref, const StepContext &ctx,
                                  const NewtonSettings &settings, bool use_qr = false);

/// Petrov-Galerkin with a fixed left basis Psi (m >= n columns). W = Psi^T J Phi
/// is solved directly when square and by QR least squares otherwise. Converged
/// on ||Psi^T R|| when m = n and on ||W^T Psi^T R|| when m > n.
RomStepResult solve_timestep_pg(const Problem &problem, const Matrix &Phi, const Matrix &Psi,
                                const Vector &u_ref, const StepContext &ctx,
                                const NewtonSettings &settings);

/// Throws ConfigurationError unless Phi (and Psi, if given) fit the problem.
void check_bases(const Problem &problem, const Matrix &Phi, const Matrix *Psi);

using RomStepFunction =
   std::function<RomStepResult(const Vector &u_ref, const StepContext &ctx)>;

/// Reduced trajectories for a list of parameters, laid out like a FOM campaign.
struct RomCampaign
{
   Matrix states;                    ///< u_tilde per (parameter, step)
   Matrix reduced;                   ///< q_hat per (parameter, step)
   std::vector<SnapshotTag> tags;
   std::vector<IterationTrace> traces;
};

RomCampaign run_rom_campaign(const Problem &problem, const std::vector<Parameter> &parameters,
                             const RomStepFunction &step, const std::string &label);

/// Converged state of one campaign column together with the data needed to
/// re-evaluate its residual.
struct TrainingState
{
   Vector u;
   Vector u_ref;
   StepContext ctx;
};

std::vector<TrainingState> training_states(const Problem &problem,
                                           const std::vector<Parameter> &parameters,
                                           const Matrix &states,
                                           const std::vector<SnapshotTag> &tags);

/// As training_states, preceded per column by the non-converged iterates kept
/// in the campaign traces (run with NewtonSettings::record_iterates).
std::vector<TrainingState> training_states_with_iterates(const Problem &problem,
                                                         const std::vector<Parameter> &parameters,
                                                         const RomCampaign &campaign);

/// Per-timestep iterations, final norms, wall times and element counters.
std::string solver_report_json(const std::string &strategy, const RomCampaign &campaign);

} // namespace promhr
