// Copyright 2026 The promhr Authors
// SPDX-License-Identifier: Apache-2.0
#include "promhr/fom.hpp"

#include "newton_driver.hpp"
#include "promhr/io.hpp"

#include "json.hpp"

#include <Eigen/SparseLU>
#include <cctype>

namespace promhr {

void NewtonSettings::validate() const
{
   if (max_iterations < 1)
   {
      throw InvalidInput("max_iterations must be at least 1");
   }
   if (!(rel_tolerance > 0.0) || !(abs_tolerance > 0.0))
   {
      throw InvalidInput("Newton tolerances must be positive");
   }
   if (!(step_length > 0.0 && step_length <= 1.0))
   {
      throw InvalidInput("step length must lie in (0, 1]");
   }
   if (max_halvings < 0)
   {
      throw InvalidInput("max_halvings must be non-negative");
   }
}

std::string describe_step(const StepContext &ctx)
{
   std::string s = "mu=(";
   for (std::size_t i = 0; i < ctx.mu.size(); ++i)
   {
      s += (i ? "," : "") + io::format_double(ctx.mu[i]);
   }
   return s + "), t=" + io::format_double(ctx.time);
}

namespace {

class FomModel final : public detail::NewtonModel
{
public:
   FomModel(const Problem &problem, const Vector &u_ref, const StepContext &ctx)
      : problem_(problem), u_ref_(u_ref), ctx_(ctx) {}

   void evaluate(const Vector &x) override
   {
      assemble_system(problem_, u_ref_ + x, u_ref_, ctx_, R_, J_);
   }
   double convergence_norm() const override { return R_.norm(); }
   double residual_norm() const override { return R_.norm(); }
   Index elements_touched() const override { return problem_.num_elements(); }

   Vector direction() override
   {
      Eigen::SparseLU<SparseMatrix> lu;
      J_.makeCompressed();
      lu.compute(J_);
      if (lu.info() != Eigen::Success)
      {
         const std::string msg = lu.lastErrorMessage();
         // Eigen reports "... ZERO COLUMN AT <n>" with a 1-based column
         std::size_t column = 0;
         const auto pos = msg.find_last_of(' ');
         if (pos != std::string::npos && pos + 1 < msg.size() &&
             std::isdigit(static_cast<unsigned char>(msg[pos + 1])))
         {
            column = std::stoul(msg.substr(pos + 1)) - 1;
         }
         throw SingularSystem("singular Jacobian: " + msg, column);
      }
      Vector p = lu.solve(-R_);
      if (!linalg::all_finite(p))
      {
         throw SingularSystem("Jacobian solve produced non-finite values", 0);
      }
      return p;
   }

   Vector state(const Vector &x) const override { return u_ref_ + x; }

private:
   const Problem &problem_;
   const Vector &u_ref_;
   const StepContext &ctx_;
   Vector R_;
   SparseMatrix J_;
};

} // namespace

FomStepResult solve_timestep_fom(const Problem &problem, const Vector &u_ref,
                                 const StepContext &ctx, const NewtonSettings &settings)
{
   if (u_ref.size() != problem.num_dofs() || !linalg::all_finite(u_ref))
   {
      throw InvalidInput("u_ref must be a finite vector over the free DOFs");
   }
   problem.check_parameter(ctx.mu);
   FomModel model(problem, u_ref, ctx);
   auto outcome = detail::run_newton(model, problem.num_dofs(), settings, false);
   FomStepResult result;
   result.u = u_ref + outcome.x;
   result.delta_u = std::move(outcome.x);
   result.trace = std::move(outcome.trace);
   return result;
}

SnapshotSet run_fom_campaign(const Problem &problem, const std::vector<Parameter> &parameters,
                             const NewtonSettings &settings)
{
   if (parameters.empty())
   {
      throw InvalidInput("FOM campaign needs at least one parameter");
   }
   const std::size_t steps = problem.time_grid().size();
   SnapshotSet set;
   set.data.resize(problem.num_dofs(), static_cast<Index>(steps * parameters.size()));
   Index col = 0;
   for (std::size_t j = 0; j < parameters.size(); ++j)
   {
      problem.check_parameter(parameters[j]);
      Vector u = problem.initial_state();
      for (std::size_t i = 0; i < steps; ++i)
      {
         const StepContext ctx = problem.step_context(parameters[j], i);
         FomStepResult step;
         try
         {
            step = solve_timestep_fom(problem, u, ctx, settings);
         }
         catch (const DivergenceError &err)
         {
            throw DivergenceError("FOM " + describe_step(ctx) + ": " + err.what(), err.trace());
         }
         catch (const SingularSystem &err)
         {
            throw SingularSystem("FOM " + describe_step(ctx) + ": " + err.what(), err.column());
         }
         u = step.u;
         set.data.col(col++) = u;
         set.tags.push_back({j, i, step.trace.iterations()});
      }
   }
   return set;
}

std::string snapshot_manifest_json(const SnapshotSet &set)
{
   nlohmann::ordered_json columns = nlohmann::ordered_json::array();
   for (const auto &t : set.tags)
   {
      columns.push_back({{"parameter", t.parameter}, {"step", t.step}, {"iterations", t.iterations}});
   }
   nlohmann::ordered_json doc;
   doc["rows"] = set.data.rows();
   doc["columns"] = columns;
   return doc.dump(1) + "\n";
}

std::vector<SnapshotTag> snapshot_tags_from_json(const std::string &text)
{
   std::vector<SnapshotTag> tags;
   try
   {
      const auto doc = nlohmann::json::parse(text);
      for (const auto &c : doc.at("columns"))
      {
         tags.push_back({c.at("parameter").get<std::size_t>(), c.at("step").get<std::size_t>(),
                         c.at("iterations").get<int>()});
      }
   }
   catch (const nlohmann::json::exception &e)
   {
      throw InvalidInput(std::string("snapshot manifest: ") + e.what());
   }
   return tags;
}

} // namespace promhr
