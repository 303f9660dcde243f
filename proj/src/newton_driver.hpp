// Copyright 2026 The promhr Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "promhr/fom.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace promhr::detail {

// One linearization point of a Newton-type iteration on the unknown x
// (delta_u for the full model, reduced coordinates for projections).
class NewtonModel
{
public:
   virtual ~NewtonModel() = default;

   virtual void evaluate(const Vector &x) = 0;
   virtual double convergence_norm() const = 0;
   virtual double residual_norm() const { return std::numeric_limits<double>::quiet_NaN(); }
   virtual Index elements_touched() const { return 0; }
   virtual Vector direction() = 0;
   virtual Vector state(const Vector &x) const = 0;
};

struct NewtonOutcome
{
   Vector x;
   IterationTrace trace;
};

inline NewtonOutcome run_newton(NewtonModel &model, Index unknowns,
                                const NewtonSettings &settings, bool keep_steps)
{
   settings.validate();
   const auto start = std::chrono::steady_clock::now();
   NewtonOutcome out;
   IterationTrace &trace = out.trace;
   const auto record = [&](const Vector &x) {
      trace.convergence_norms.push_back(model.convergence_norm());
      trace.residual_norms.push_back(model.residual_norm());
      trace.elements_touched.push_back(model.elements_touched());
      if (settings.record_iterates)
      {
         trace.iterates.push_back(model.state(x));
      }
   };
   const auto elapsed = [&] {
      return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
   };

   Vector x = Vector::Zero(unknowns);
   model.evaluate(x);
   record(x);
   const double conv0 = model.convergence_norm();
   if (!std::isfinite(conv0))
   {
      trace.wall_time = elapsed();
      throw DivergenceError("non-finite initial residual", trace);
   }
   const double target = settings.rel_tolerance * conv0 + settings.abs_tolerance;

   for (int k = 0;; ++k)
   {
      double conv = model.convergence_norm();
      if (conv <= target)
      {
         trace.converged = true;
         break;
      }
      if (k == settings.max_iterations)
      {
         trace.wall_time = elapsed();
         throw DivergenceError("no convergence after " + std::to_string(k) +
                                  " iterations (residual " + std::to_string(conv) + ")",
                               trace);
      }
      const Vector p = model.direction();
      double alpha = settings.step_length;
      Vector trial = x + alpha * p;
      model.evaluate(trial);
      if (settings.line_search)
      {
         for (int h = 0; h < settings.max_halvings && !(model.convergence_norm() < conv); ++h)
         {
            alpha *= 0.5;
            trial = x + alpha * p;
            model.evaluate(trial);
         }
      }
      x = std::move(trial);
      trace.step_norms.push_back(alpha * p.norm());
      if (keep_steps)
      {
         trace.steps.push_back(p);
      }
      record(x);
      if (!std::isfinite(model.convergence_norm()))
      {
         trace.wall_time = elapsed();
         throw DivergenceError("residual became non-finite", trace);
      }
   }
   trace.wall_time = elapsed();
   out.x = std::move(x);
   return out;
}

} // namespace promhr::detail
