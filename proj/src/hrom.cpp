// Copyright 2026 The promhr Authors
// SPDX-License-Identifier: Apache-2.0
#include "promhr/hrom.hpp"

#include "newton_driver.hpp"

#include <algorithm>

namespace promhr {

namespace {

void check_quadrature(const Problem &problem, const EcmQuadrature &q)
{
   if (q.z.empty() || q.z.size() != static_cast<std::size_t>(q.omega.size()))
   {
      throw ConfigurationError("hyper-reduction needs a non-empty quadrature");
   }
   for (std::size_t k = 0; k < q.z.size(); ++k)
   {
      if (q.z[k] < 0 || q.z[k] >= problem.num_elements() || (k && q.z[k] <= q.z[k - 1]))
      {
         throw ConfigurationError("quadrature elements must be ascending, unique and in range");
      }
   }
}

// Weighted element sums of Psi^{eT} R^e and Psi^{eT} J^e Phi^e over z.
class WeightedModel final : public detail::NewtonModel
{
public:
   WeightedModel(const Problem &problem, const Matrix &Phi, const Matrix &Psi,
                 const EcmQuadrature &q, const Vector &u_ref, const StepContext &ctx)
      : problem_(problem), Phi_(Phi), u_ref_(u_ref), ctx_(ctx), q_(q)
   {
      const auto &assembly = problem.assembly();
      for (Index e : q.z)
      {
         Phi_e_.push_back(gather_rows(assembly, e, Phi));
         Psi_e_.push_back(gather_rows(assembly, e, Psi));
      }
      square_ = Psi.cols() == Phi.cols();
   }

   void evaluate(const Vector &x) override
   {
      const auto &assembly = problem_.assembly();
      const Index m = Psi_e_.front().cols();
      const Index n = Phi_.cols();
      r_ = Vector::Zero(m);
      W_ = Matrix::Zero(m, n);
      const Vector u = state(x);
      for (std::size_t k = 0; k < q_.z.size(); ++k)
      {
         const Index e = q_.z[k];
         const double w = q_.omega(static_cast<Index>(k));
         const Vector ue = gather_dofs(assembly, e, u);
         const Vector ue_ref = gather_dofs(assembly, e, u_ref_);
         const Vector Re = problem_.local_residual(e, ue, ue_ref, ctx_);
         const Matrix Je = problem_.local_jacobian(e, ue, ue_ref, ctx_);
         r_.noalias() += w * (Psi_e_[k].transpose() * Re);
         W_.noalias() += w * (Psi_e_[k].transpose() * (Je * Phi_e_[k]));
      }
      conv_ = square_ ? r_.norm() : (W_.transpose() * r_).norm();
   }
   double convergence_norm() const override { return conv_; }
   Index elements_touched() const override { return static_cast<Index>(q_.z.size()); }
   Vector direction() override { return linalg::qr_least_squares(W_, -r_); }
   Vector state(const Vector &x) const override { return u_ref_ + Phi_ * x; }

private:
   const Problem &problem_;
   const Matrix &Phi_;
   const Vector &u_ref_;
   const StepContext &ctx_;
   const EcmQuadrature &q_;
   std::vector<Matrix> Phi_e_;
   std::vector<Matrix> Psi_e_;
   bool square_ = true;
   Vector r_;
   Matrix W_;
   double conv_ = 0.0;
};

class PatchLspgModel final : public detail::NewtonModel
{
public:
   PatchLspgModel(const Problem &problem, const Matrix &Phi, const EcmQuadrature &q,
                  const std::vector<Index> &complementary, const Vector &u_ref,
                  const StepContext &ctx)
      : problem_(problem), Phi_(Phi), u_ref_(u_ref), ctx_(ctx), q_(q),
        complementary_(complementary)
   {
      const auto &assembly = problem.assembly();
      for (Index e : complementary)
      {
         Phi_e_.push_back(gather_rows(assembly, e, Phi));
      }
      for (Index e : q.z)
      {
         slot_.push_back(static_cast<std::size_t>(
            std::lower_bound(complementary.begin(), complementary.end(), e) - complementary.begin()));
      }
   }

   void evaluate(const Vector &x) override
   {
      const auto &assembly = problem_.assembly();
      const Index n = Phi_.cols();
      const Vector u = state(x);
      R_.setZero(problem_.num_dofs());
      JPhi_.setZero(problem_.num_dofs(), n);
      JePhie_.resize(complementary_.size());
      for (std::size_t c = 0; c < complementary_.size(); ++c)
      {
         const Index e = complementary_[c];
         const Vector ue = gather_dofs(assembly, e, u);
         const Vector ue_ref = gather_dofs(assembly, e, u_ref_);
         scatter_add(assembly, e, problem_.local_residual(e, ue, ue_ref, ctx_), R_);
         JePhie_[c] = problem_.local_jacobian(e, ue, ue_ref, ctx_) * Phi_e_[c];
         const auto &dofs = assembly.dofs(e);
         for (std::size_t a = 0; a < dofs.size(); ++a)
         {
            if (dofs[a] >= 0)
            {
               JPhi_.row(dofs[a]) += JePhie_[c].row(static_cast<Index>(a));
            }
         }
      }
      r_ = Vector::Zero(n);
      G_ = Matrix::Zero(n, n);
      for (std::size_t k = 0; k < q_.z.size(); ++k)
      {
         const Index e = q_.z[k];
         const double w = q_.omega(static_cast<Index>(k));
         const Matrix &A = JePhie_[slot_[k]];
         r_.noalias() += w * (A.transpose() * gather_dofs(assembly, e, R_));
         G_.noalias() += w * (A.transpose() * gather_rows(assembly, e, JPhi_));
      }
      conv_ = r_.norm();
   }
   double convergence_norm() const override { return conv_; }
   Index elements_touched() const override { return static_cast<Index>(complementary_.size()); }
   Vector direction() override { return linalg::qr_least_squares(G_, -r_); }
   Vector state(const Vector &x) const override { return u_ref_ + Phi_ * x; }

private:
   const Problem &problem_;
   const Matrix &Phi_;
   const Vector &u_ref_;
   const StepContext &ctx_;
   const EcmQuadrature &q_;
   const std::vector<Index> &complementary_;
   std::vector<Matrix> Phi_e_;
   std::vector<std::size_t> slot_;
   std::vector<Matrix> JePhie_;
   Vector R_;
   Matrix JPhi_;
   Vector r_;
   Matrix G_;
   double conv_ = 0.0;
};

RomStepResult finish(detail::NewtonModel &model, const Matrix &Phi, const Vector &u_ref,
                     const NewtonSettings &settings)
{
   auto outcome = detail::run_newton(model, Phi.cols(), settings, true);
   RomStepResult result;
   result.state.u_tilde = u_ref + Phi * outcome.x;
   result.state.q_hat = std::move(outcome.x);
   result.trace = std::move(outcome.trace);
   return result;
}

void check_state(const Problem &problem, const Vector &u_ref, const StepContext &ctx)
{
   if (u_ref.size() != problem.num_dofs() || !linalg::all_finite(u_ref))
   {
      throw InvalidInput("u_ref must be a finite vector over the free DOFs");
   }
   problem.check_parameter(ctx.mu);
}

void check_complementary(const Problem &problem, const EcmQuadrature &q,
                         const std::vector<Index> &complementary)
{
   if (!std::is_sorted(complementary.begin(), complementary.end()) ||
       std::adjacent_find(complementary.begin(), complementary.end()) != complementary.end())
   {
      throw ConfigurationError("complementary mesh must be ascending and duplicate-free");
   }
   const auto patches = element_patches(problem.mesh());
   for (Index e : q.z)
   {
      for (Index f : patches[static_cast<std::size_t>(e)].patch)
      {
         if (!std::binary_search(complementary.begin(), complementary.end(), f))
         {
            throw ConfigurationError("complementary mesh lacks element " + std::to_string(f) +
                                     " from the patch of selected element " + std::to_string(e));
         }
      }
   }
}

} // namespace

RomStepResult solve_timestep_hrom_galerkin(const Problem &problem, const Matrix &Phi,
                                           const EcmQuadrature &quadrature,
                                           const Vector &u_ref, const StepContext &ctx,
                                           const NewtonSettings &settings)
{
   check_bases(problem, Phi, nullptr);
   check_quadrature(problem, quadrature);
   check_state(problem, u_ref, ctx);
   WeightedModel model(problem, Phi, Phi, quadrature, u_ref, ctx);
   return finish(model, Phi, u_ref, settings);
}

RomStepResult solve_timestep_hrom_pg(const Problem &problem, const Matrix &Phi, const Matrix &Psi,
                                     const EcmQuadrature &quadrature, const Vector &u_ref,
                                     const StepContext &ctx, const NewtonSettings &settings)
{
   check_bases(problem, Phi, &Psi);
   check_quadrature(problem, quadrature);
   check_state(problem, u_ref, ctx);
   WeightedModel model(problem, Phi, Psi, quadrature, u_ref, ctx);
   return finish(model, Phi, u_ref, settings);
}

RomStepResult solve_timestep_hrom_lspg(const Problem &problem, const Matrix &Phi,
                                       const EcmQuadrature &quadrature,
                                       const std::vector<Index> &complementary,
                                       const Vector &u_ref, const StepContext &ctx,
                                       const NewtonSettings &settings)
{
   check_bases(problem, Phi, nullptr);
   check_quadrature(problem, quadrature);
   check_complementary(problem, quadrature, complementary);
   check_state(problem, u_ref, ctx);
   PatchLspgModel model(problem, Phi, quadrature, complementary, u_ref, ctx);
   return finish(model, Phi, u_ref, settings);
}

Vector patch_assembled_residual(const Problem &problem, const std::vector<Index> &elements,
                                Index e, const Vector &u, const Vector &u_ref,
                                const StepContext &ctx)
{
   Vector R = Vector::Zero(problem.num_dofs());
   for (Index f : elements)
   {
      scatter_add(problem.assembly(), f, problem.element_residual(f, u, u_ref, ctx), R);
   }
   return gather_dofs(problem.assembly(), e, R);
}

} // namespace promhr
