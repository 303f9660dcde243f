// Copyright 2026 The promhr Authors
// SPDX-License-Identifier: Apache-2.0
#include "promhr/rom.hpp"

#include "newton_driver.hpp"
#include "promhr/io.hpp"

#include "json.hpp"

namespace promhr {

void check_bases(const Problem &problem, const Matrix &Phi, const Matrix *Psi)
{
   if (Phi.rows() != problem.num_dofs() || Phi.cols() < 1)
   {
      throw ConfigurationError("right basis has shape " + std::to_string(Phi.rows()) + "x" +
                               std::to_string(Phi.cols()) + ", expected " +
                               std::to_string(problem.num_dofs()) + " rows");
   }
   if (Psi != nullptr)
   {
      if (Psi->rows() != problem.num_dofs())
      {
         throw ConfigurationError("left basis row count does not match the problem");
      }
      if (Psi->cols() < Phi.cols())
      {
         throw ConfigurationError("left basis has " + std::to_string(Psi->cols()) +
                                  " columns, fewer than the " + std::to_string(Phi.cols()) +
                                  " of the right basis");
      }
   }
}

namespace {

Vector solve_normal_equations(const Matrix &A, const Vector &rhs)
{
   const Matrix G = A.transpose() * A;
   Eigen::LLT<Matrix> llt(G);
   const Matrix L = llt.matrixL();
   const double top = L.diagonal().cwiseAbs().maxCoeff();
   for (Index i = 0; i < L.rows(); ++i)
   {
      if (llt.info() != Eigen::Success || !(std::abs(L(i, i)) >= 1e-12 * top))
      {
         throw SingularSystem("Gauss-Newton matrix is rank deficient at column " +
                                 std::to_string(i),
                              static_cast<std::size_t>(i));
      }
   }
   return llt.solve(rhs);
}

class RomModel : public detail::NewtonModel
{
public:
   RomModel(const Problem &problem, const Matrix &Phi, const Vector &u_ref, const StepContext &ctx)
      : problem_(problem), Phi_(Phi), u_ref_(u_ref), ctx_(ctx) {}

   void evaluate(const Vector &x) override
   {
      assemble_system(problem_, state(x), u_ref_, ctx_, R_, J_);
      JPhi_ = J_ * Phi_;
      project();
   }
   double convergence_norm() const override { return conv_; }
   double residual_norm() const override { return R_.norm(); }
   Index elements_touched() const override { return problem_.num_elements(); }
   Vector state(const Vector &x) const override { return u_ref_ + Phi_ * x; }

protected:
   virtual void project() = 0;

   const Problem &problem_;
   const Matrix &Phi_;
   const Vector &u_ref_;
   const StepContext &ctx_;
   Vector R_;
   SparseMatrix J_;
   Matrix JPhi_;
   double conv_ = 0.0;
};

class GalerkinModel final : public RomModel
{
public:
   using RomModel::RomModel;
   Vector direction() override
   {
      return linalg::qr_least_squares(Phi_.transpose() * JPhi_, -r_);
   }

private:
   void project() override
   {
      r_ = Phi_.transpose() * R_;
      conv_ = r_.norm();
   }
   Vector r_;
};

class LspgModel final : public RomModel
{
public:
   LspgModel(const Problem &problem, const Matrix &Phi, const Vector &u_ref,
             const StepContext &ctx, bool use_qr)
      : RomModel(problem, Phi, u_ref, ctx), use_qr_(use_qr) {}

   Vector direction() override
   {
      if (use_qr_)
      {
         return linalg::qr_least_squares(JPhi_, -R_);
      }
      return solve_normal_equations(JPhi_, -r_);
   }

private:
   void project() override
   {
      r_ = JPhi_.transpose() * R_;
      conv_ = r_.norm();
   }
   bool use_qr_;
   Vector r_;
};

class PgModel final : public RomModel
{
public:
   PgModel(const Problem &problem, const Matrix &Phi, const Matrix &Psi, const Vector &u_ref,
           const StepContext &ctx)
      : RomModel(problem, Phi, u_ref, ctx), Psi_(Psi) {}

   Vector direction() override { return linalg::qr_least_squares(W_, -r_); }

private:
   void project() override
   {
      r_ = Psi_.transpose() * R_;
      W_ = Psi_.transpose() * JPhi_;
      conv_ = Psi_.cols() == Phi_.cols() ? r_.norm() : (W_.transpose() * r_).norm();
   }
   const Matrix &Psi_;
   Vector r_;
   Matrix W_;
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

} // namespace

RomStepResult solve_timestep_galerkin(const Problem &problem, const Matrix &Phi,
                                      const Vector &u_ref, const StepContext &ctx,
                                      const NewtonSettings &settings)
{
   check_bases(problem, Phi, nullptr);
   check_state(problem, u_ref, ctx);
   GalerkinModel model(problem, Phi, u_ref, ctx);
   return finish(model, Phi, u_ref, settings);
}

RomStepResult solve_timestep_lspg(const Problem &problem, const Matrix &Phi,
                                  const Vector &u_ref, const StepContext &ctx,
                                  const NewtonSettings &settings, bool use_qr)
{
   check_bases(problem, Phi, nullptr);
   check_state(problem, u_ref, ctx);
   LspgModel model(problem, Phi, u_ref, ctx, use_qr);
   return finish(model, Phi, u_ref, settings);
}

RomStepResult solve_timestep_pg(const Problem &problem, const Matrix &Phi, const Matrix &Psi,
                                const Vector &u_ref, const StepContext &ctx,
                                const NewtonSettings &settings)
{
   check_bases(problem, Phi, &Psi);
   check_state(problem, u_ref, ctx);
   PgModel model(problem, Phi, Psi, u_ref, ctx);
   return finish(model, Phi, u_ref, settings);
}

RomCampaign run_rom_campaign(const Problem &problem, const std::vector<Parameter> &parameters,
                             const RomStepFunction &step, const std::string &label)
{
   if (parameters.empty())
   {
      throw InvalidInput(label + " campaign needs at least one parameter");
   }
   const std::size_t steps = problem.time_grid().size();
   const auto columns = static_cast<Index>(steps * parameters.size());
   RomCampaign campaign;
   campaign.states.resize(problem.num_dofs(), columns);
   Index col = 0;
   for (std::size_t j = 0; j < parameters.size(); ++j)
   {
      problem.check_parameter(parameters[j]);
      Vector u = problem.initial_state();
      for (std::size_t i = 0; i < steps; ++i)
      {
         const StepContext ctx = problem.step_context(parameters[j], i);
         RomStepResult r;
         try
         {
            r = step(u, ctx);
         }
         catch (const DivergenceError &err)
         {
            throw DivergenceError(label + " " + describe_step(ctx) + ": " + err.what(), err.trace());
         }
         catch (const SingularSystem &err)
         {
            throw SingularSystem(label + " " + describe_step(ctx) + ": " + err.what(), err.column());
         }
         if (campaign.reduced.size() == 0)
         {
            campaign.reduced.resize(r.state.q_hat.size(), columns);
         }
         u = r.state.u_tilde;
         campaign.states.col(col) = u;
         campaign.reduced.col(col) = r.state.q_hat;
         ++col;
         campaign.tags.push_back({j, i, r.trace.iterations()});
         campaign.traces.push_back(std::move(r.trace));
      }
   }
   return campaign;
}

std::vector<TrainingState> training_states(const Problem &problem,
                                           const std::vector<Parameter> &parameters,
                                           const Matrix &states,
                                           const std::vector<SnapshotTag> &tags)
{
   if (static_cast<Index>(tags.size()) != states.cols() || states.rows() != problem.num_dofs())
   {
      throw InvalidInput("trajectory matrix does not match its provenance tags");
   }
   std::vector<TrainingState> out;
   out.reserve(tags.size());
   for (std::size_t c = 0; c < tags.size(); ++c)
   {
      const SnapshotTag &tag = tags[c];
      if (tag.parameter >= parameters.size())
      {
         throw InvalidInput("trajectory references an unknown parameter");
      }
      TrainingState s;
      s.u = states.col(static_cast<Index>(c));
      if (tag.step == 0)
      {
         s.u_ref = problem.initial_state();
      }
      else
      {
         if (c == 0 || tags[c - 1].parameter != tag.parameter || tags[c - 1].step + 1 != tag.step)
         {
            throw InvalidInput("trajectory columns are not in timestep order");
         }
         s.u_ref = states.col(static_cast<Index>(c - 1));
      }
      s.ctx = problem.step_context(parameters[tag.parameter], tag.step);
      out.push_back(std::move(s));
   }
   return out;
}

std::vector<TrainingState> training_states_with_iterates(const Problem &problem,
                                                         const std::vector<Parameter> &parameters,
                                                         const RomCampaign &campaign)
{
   const auto converged = training_states(problem, parameters, campaign.states, campaign.tags);
   std::vector<TrainingState> out;
   for (std::size_t c = 0; c < converged.size(); ++c)
   {
      const auto &iterates = campaign.traces[c].iterates;
      if (iterates.empty())
      {
         throw InvalidInput("campaign was run without recorded iterates");
      }
      for (std::size_t k = 0; k + 1 < iterates.size(); ++k)
      {
         out.push_back({iterates[k], converged[c].u_ref, converged[c].ctx});
      }
      out.push_back(converged[c]);
   }
   return out;
}

std::string solver_report_json(const std::string &strategy, const RomCampaign &campaign)
{
   using nlohmann::ordered_json;
   ordered_json steps = ordered_json::array();
   double total_time = 0.0;
   for (std::size_t c = 0; c < campaign.tags.size(); ++c)
   {
      const auto &t = campaign.traces[c];
      total_time += t.wall_time;
      ordered_json touched = ordered_json::array();
      for (Index n : t.elements_touched)
      {
         touched.push_back(n);
      }
      const double full = t.residual_norms.back();
      steps.push_back({{"parameter", campaign.tags[c].parameter},
                       {"step", campaign.tags[c].step},
                       {"iterations", t.iterations()},
                       {"reduced_residual", t.convergence_norms.back()},
                       {"full_residual", std::isfinite(full) ? ordered_json(full) : ordered_json()},
                       {"wall_time", t.wall_time},
                       {"elements_touched_per_iteration", touched}});
   }
   ordered_json doc;
   doc["strategy"] = strategy;
   doc["total_wall_time"] = total_time;
   doc["timesteps"] = steps;
   return doc.dump(1) + "\n";
}

} // namespace promhr
