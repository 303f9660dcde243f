// Copyright 2026 The promhr Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "promhr/linalg.hpp"
#include "promhr/mesh.hpp"

#include <memory>
#include <string>
#include <vector>

namespace promhr {

using Parameter = std::vector<double>;

/// Everything an element routine needs besides the state: the parameter
/// vector, the time (or load factor) of the step and the step length.
struct StepContext
{
   Parameter mu;
   double time = 0.0;
   double dt = 1.0;
};

/// A parametric finite-element residual R(u; u_ref, t, mu) over the free DOFs.
///
/// Concrete problems implement the local (per-element) residual and Jacobian on
/// element-local DOF values; the base class handles gather/scatter. Instances
/// are immutable after construction and safe to share read-only.
class Problem
{
public:
   virtual ~Problem() = default;

   virtual std::string name() const = 0;

   /// Strictly increasing step times; the initial state lives at time 0.
   virtual std::vector<double> time_grid() const = 0;

   /// Number of entries every parameter vector must have.
   virtual std::size_t parameter_length() const = 0;

   /// True when every Jacobian is symmetric (energy-based formulation).
   virtual bool spd() const = 0;

   /// Element volume (length/area) used by optional ECM weighting.
   virtual double element_measure(Index e) const;

   const Mesh &mesh() const { return mesh_; }
   const AssemblyMap &assembly() const { return assembly_; }
   Index num_dofs() const { return assembly_.num_free; }
   Index num_elements() const { return mesh_.num_elements(); }

   Vector initial_state() const { return Vector::Zero(num_dofs()); }

   /// Context for step `step` (0-based index into time_grid()).
   StepContext step_context(const Parameter &mu, std::size_t step) const;

   /// R^e for global state vectors u, u_ref.
   Vector element_residual(Index e, const Vector &u, const Vector &u_ref,
                           const StepContext &ctx) const;
   /// J^e = dR^e/du^e.
   Matrix element_jacobian(Index e, const Vector &u, const Vector &u_ref,
                           const StepContext &ctx) const;

   /// Local variants taking element-local DOF values directly.
   virtual Vector local_residual(Index e, const Vector &ue, const Vector &ue_ref,
                                 const StepContext &ctx) const = 0;
   virtual Matrix local_jacobian(Index e, const Vector &ue, const Vector &ue_ref,
                                 const StepContext &ctx) const = 0;

   void check_parameter(const Parameter &mu) const;

protected:
   explicit Problem(Mesh mesh);

private:
   Mesh mesh_;
   AssemblyMap assembly_;
};

/// R = sum_e L^{eT} R^e, summed in ascending element order.
Vector assemble_residual(const Problem &problem, const Vector &u, const Vector &u_ref,
                         const StepContext &ctx);

SparseMatrix assemble_jacobian(const Problem &problem, const Vector &u, const Vector &u_ref,
                               const StepContext &ctx);

/// Residual and Jacobian in one element sweep.
void assemble_system(const Problem &problem, const Vector &u, const Vector &u_ref,
                     const StepContext &ctx, Vector &residual, SparseMatrix &jacobian);

} // namespace promhr
