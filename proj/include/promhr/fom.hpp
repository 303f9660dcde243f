// Copyright 2026 The promhr Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "promhr/errors.hpp"
#include "promhr/problem.hpp"

#include <string>
#include <vector>

namespace promhr {

struct NewtonSettings
{
   int max_iterations = 25;
   double rel_tolerance = 1e-9;
   double abs_tolerance = 1e-12;
   double step_length = 1.0;     ///< alpha in (0, 1]
   bool line_search = false;     ///< halve alpha until the residual decreases
   int max_halvings = 8;
   bool record_iterates = false;

   void validate() const;
};

/// Per-timestep history of a Newton-type solve. Entry k of the norm vectors
/// belongs to the k-th residual evaluation; a converged solve with K
/// evaluations performed K - 1 corrective steps.
struct IterationTrace
{
   std::vector<double> convergence_norms;   ///< the quantity the solver tests
   std::vector<double> residual_norms;      ///< ||R||_2 (full order, when available)
   std::vector<double> step_norms;
   std::vector<Vector> steps;               ///< search directions (reduced solvers)
   std::vector<Vector> iterates;            ///< states, if requested
   std::vector<Index> elements_touched;     ///< element evaluations per iteration
   double wall_time = 0.0;                  ///< seconds
   bool converged = false;

   int iterations() const { return static_cast<int>(step_norms.size()); }
   int evaluations() const { return static_cast<int>(convergence_norms.size()); }
};

class DivergenceError : public Error
{
public:
   DivergenceError(const std::string &what, IterationTrace trace)
      : Error(what), trace_(std::move(trace)) {}

   const IterationTrace &trace() const noexcept { return trace_; }

private:
   IterationTrace trace_;
};

struct FomStepResult
{
   Vector u;         ///< u_t = u_ref + delta_u
   Vector delta_u;
   IterationTrace trace;
};

/// Newton-Raphson for one timestep: J p = -R, du += alpha p, u = u_ref + du.
/// Converged when ||R|| <= rel ||R(u_ref)|| + abs.
FomStepResult solve_timestep_fom(const Problem &problem, const Vector &u_ref,
                                 const StepContext &ctx, const NewtonSettings &settings);

/// Column provenance of a snapshot matrix.
struct SnapshotTag
{
   std::size_t parameter = 0;
   std::size_t step = 0;
   int iterations = 0;
};

struct SnapshotSet
{
   Matrix data;
   std::vector<SnapshotTag> tags;

   Index size() const { return data.cols(); }
};

/// Solves every parameter through the whole time grid; columns are ordered
/// parameter-major, timestep-minor (u_1(mu_1) ... u_T(mu_1), u_1(mu_2) ...).
SnapshotSet run_fom_campaign(const Problem &problem, const std::vector<Parameter> &parameters,
                             const NewtonSettings &settings);

std::string snapshot_manifest_json(const SnapshotSet &set);
std::vector<SnapshotTag> snapshot_tags_from_json(const std::string &text);

/// "mu=(..), t=.." prefix used in propagated solver errors.
std::string describe_step(const StepContext &ctx);

} // namespace promhr
