// Copyright 2026 The promhr Authors
// SPDX-License-Identifier: Apache-2.0
#include "promhr/basis.hpp"

#include "json.hpp"

namespace promhr {

std::string to_string(BasisRole role)
{
   switch (role)
   {
   case BasisRole::RightPhi: return "right-phi";
   case BasisRole::LeftJacobian: return "left-psi-jacobian";
   case BasisRole::LeftResidual: return "left-psi-residual";
   }
   return "unknown";
}

BasisRole basis_role_from_string(const std::string &name)
{
   for (BasisRole r : {BasisRole::RightPhi, BasisRole::LeftJacobian, BasisRole::LeftResidual})
   {
      if (to_string(r) == name)
      {
         return r;
      }
   }
   throw InvalidInput("unknown basis role '" + name + "'");
}

namespace {

ReducedBasis build_basis(const Matrix &S, double eps, BasisRole role)
{
   if (S.cols() == 0 || S.rows() == 0)
   {
      throw InvalidInput(to_string(role) + ": empty snapshot matrix");
   }
   // the eps = 0 pass only feeds the training log
   const auto full = linalg::truncated_svd(S, 0.0);
   const auto svd = linalg::truncated_svd(S, eps);
   ReducedBasis basis;
   basis.matrix = svd.U;
   basis.tolerance = eps;
   basis.role = role;
   basis.spectrum = full.sigma;
   basis.snapshot_count = S.cols();
   return basis;
}

} // namespace

ReducedBasis build_right_basis(const Matrix &A_u, double eps_u)
{
   return build_basis(A_u, eps_u, BasisRole::RightPhi);
}

ReducedBasis build_left_basis_jacobian(const Matrix &S_J, double eps_psi_j)
{
   return build_basis(S_J, eps_psi_j, BasisRole::LeftJacobian);
}

ReducedBasis build_left_basis_residual(const Matrix &S_R, double eps_r)
{
   return build_basis(S_R, eps_r, BasisRole::LeftResidual);
}

double containment_defect(const Matrix &Psi_J, const Matrix &Psi_R)
{
   if (Psi_J.rows() != Psi_R.rows())
   {
      throw InvalidInput("containment_defect: bases of different length");
   }
   return (Psi_R - Psi_J * (Psi_J.transpose() * Psi_R)).norm();
}

LeftTrainingData collect_left_training(const Problem &problem, const Matrix &Phi,
                                       const std::vector<Parameter> &parameters,
                                       const NewtonSettings &settings,
                                       const LeftTrainingOptions &options)
{
   check_bases(problem, Phi, nullptr);
   NewtonSettings recording = settings;
   recording.record_iterates = true;

   RomStepFunction step;
   if (options.source == LeftTrainingSource::Lspg)
   {
      step = [&](const Vector &u_ref, const StepContext &ctx) {
         return solve_timestep_lspg(problem, Phi, u_ref, ctx, recording);
      };
   }
   else
   {
      step = [&](const Vector &u_ref, const StepContext &ctx) {
         auto fom = solve_timestep_fom(problem, u_ref, ctx, recording);
         RomStepResult r;
         r.state.u_tilde = fom.u;
         r.state.q_hat = Phi.transpose() * fom.delta_u;
         r.trace = std::move(fom.trace);
         return r;
      };
   }

   LeftTrainingData data;
   data.campaign = run_rom_campaign(problem, parameters, step, "left-basis training");

   const auto states = training_states(problem, parameters, data.campaign.states,
                                       data.campaign.tags);
   const Index n = Phi.cols();
   data.S_J.resize(problem.num_dofs(), n * static_cast<Index>(states.size()));
   std::vector<Vector> residuals;
   for (std::size_t c = 0; c < states.size(); ++c)
   {
      const auto &s = states[c];
      const SparseMatrix J = assemble_jacobian(problem, s.u, s.u_ref, s.ctx);
      data.S_J.middleCols(static_cast<Index>(c) * n, n) = J * Phi;

      const auto &iterates = data.campaign.traces[c].iterates;
      const std::size_t kept = options.include_converged_residuals ? iterates.size()
                                                                   : iterates.size() - 1;
      for (std::size_t k = 0; k < kept; ++k)
      {
         residuals.push_back(assemble_residual(problem, iterates[k], s.u_ref, s.ctx));
      }
      data.residual_counts.push_back(static_cast<Index>(kept));
   }
   data.S_R.resize(problem.num_dofs(), static_cast<Index>(residuals.size()));
   for (std::size_t k = 0; k < residuals.size(); ++k)
   {
      data.S_R.col(static_cast<Index>(k)) = residuals[k];
   }
   return data;
}

Matrix collect_jacobian_snapshots(const Problem &problem, const Matrix &Phi,
                                  const std::vector<Parameter> &parameters,
                                  const NewtonSettings &settings)
{
   return collect_left_training(problem, Phi, parameters, settings).S_J;
}

Matrix collect_residual_snapshots(const Problem &problem, const Matrix &Phi,
                                  const std::vector<Parameter> &parameters,
                                  const NewtonSettings &settings)
{
   return collect_left_training(problem, Phi, parameters, settings).S_R;
}

void TrainingLog::add(const std::string &name, const ReducedBasis &basis)
{
   entries.push_back({name, basis.snapshot_count, basis.cols(), basis.tolerance, basis.spectrum});
}

std::string TrainingLog::to_json() const
{
   nlohmann::ordered_json doc = nlohmann::ordered_json::array();
   for (const auto &e : entries)
   {
      std::vector<double> spectrum(e.spectrum.data(), e.spectrum.data() + e.spectrum.size());
      doc.push_back({{"name", e.name},
                     {"snapshots", e.snapshots},
                     {"rank", e.rank},
                     {"tolerance", e.tolerance},
                     {"spectrum", spectrum}});
   }
   return doc.dump(1) + "\n";
}

} // namespace promhr
