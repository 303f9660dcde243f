// Copyright 2026 The promhr Authors
// SPDX-License-Identifier: Apache-2.0
#include "promhr/problem.hpp"

#include "promhr/errors.hpp"

#include <cmath>

namespace promhr {

Problem::Problem(Mesh mesh)
   : mesh_(std::move(mesh)), assembly_(AssemblyMap::from_mesh(mesh_))
{
}

double Problem::element_measure(Index) const
{
   return 1.0;
}

StepContext Problem::step_context(const Parameter &mu, std::size_t step) const
{
   const auto grid = time_grid();
   if (step >= grid.size())
   {
      throw InvalidInput("step index " + std::to_string(step) + " beyond the time grid");
   }
   StepContext ctx;
   ctx.mu = mu;
   ctx.time = grid[step];
   ctx.dt = grid[step] - (step == 0 ? 0.0 : grid[step - 1]);
   return ctx;
}

void Problem::check_parameter(const Parameter &mu) const
{
   if (mu.size() != parameter_length())
   {
      throw InvalidInput(name() + ": parameter vector has " + std::to_string(mu.size()) +
                         " entries, expected " + std::to_string(parameter_length()));
   }
   for (double v : mu)
   {
      if (!std::isfinite(v))
      {
         throw InvalidInput(name() + ": parameter values must be finite");
      }
   }
}

Vector Problem::element_residual(Index e, const Vector &u, const Vector &u_ref,
                                 const StepContext &ctx) const
{
   return local_residual(e, gather_dofs(assembly_, e, u), gather_dofs(assembly_, e, u_ref), ctx);
}

Matrix Problem::element_jacobian(Index e, const Vector &u, const Vector &u_ref,
                                 const StepContext &ctx) const
{
   return local_jacobian(e, gather_dofs(assembly_, e, u), gather_dofs(assembly_, e, u_ref), ctx);
}

Vector assemble_residual(const Problem &problem, const Vector &u, const Vector &u_ref,
                         const StepContext &ctx)
{
   Vector R = Vector::Zero(problem.num_dofs());
   for (Index e = 0; e < problem.num_elements(); ++e)
   {
      scatter_add(problem.assembly(), e, problem.element_residual(e, u, u_ref, ctx), R);
   }
   return R;
}

namespace {

void add_triplets(const AssemblyMap &assembly, Index e, const Matrix &Je,
                  std::vector<Eigen::Triplet<double>> &trip)
{
   const auto &dofs = assembly.dofs(e);
   for (std::size_t i = 0; i < dofs.size(); ++i)
   {
      if (dofs[i] < 0)
      {
         continue;
      }
      for (std::size_t j = 0; j < dofs.size(); ++j)
      {
         if (dofs[j] >= 0)
         {
            trip.emplace_back(dofs[i], dofs[j], Je(static_cast<Index>(i), static_cast<Index>(j)));
         }
      }
   }
}

} // namespace

SparseMatrix assemble_jacobian(const Problem &problem, const Vector &u, const Vector &u_ref,
                               const StepContext &ctx)
{
   std::vector<Eigen::Triplet<double>> trip;
   for (Index e = 0; e < problem.num_elements(); ++e)
   {
      add_triplets(problem.assembly(), e, problem.element_jacobian(e, u, u_ref, ctx), trip);
   }
   SparseMatrix J(problem.num_dofs(), problem.num_dofs());
   J.setFromTriplets(trip.begin(), trip.end());
   return J;
}

void assemble_system(const Problem &problem, const Vector &u, const Vector &u_ref,
                     const StepContext &ctx, Vector &residual, SparseMatrix &jacobian)
{
   const auto &assembly = problem.assembly();
   residual = Vector::Zero(problem.num_dofs());
   std::vector<Eigen::Triplet<double>> trip;
   for (Index e = 0; e < problem.num_elements(); ++e)
   {
      const Vector ue = gather_dofs(assembly, e, u);
      const Vector ue_ref = gather_dofs(assembly, e, u_ref);
      scatter_add(assembly, e, problem.local_residual(e, ue, ue_ref, ctx), residual);
      add_triplets(assembly, e, problem.local_jacobian(e, ue, ue_ref, ctx), trip);
   }
   jacobian.resize(problem.num_dofs(), problem.num_dofs());
   jacobian.setFromTriplets(trip.begin(), trip.end());
}

} // namespace promhr
