// Copyright 2026 The promhr Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "promhr/problem.hpp"

#include <memory>

namespace promhr {

/// P = c sqrt(alpha).
double load_scaling(double alpha, double c);

/// Source of the rotating-pulse problem:
/// 10 exp(-50 (x^2 + y^2 - 1/2)^2) inside the unit circle, 0 outside.
double source_term_pulse(double x, double y, double amplitude = 10.0);

struct BarOptions
{
   Index elements = 64;
   double length = 1.0;          // m
   double young = 206.9e9;       // Pa
   double area = 5.0e-3;         // m^2
   double end_load = 1.0e8;      // N, scaled by sqrt(alpha)
   double body_load = 1.0e7;     // N/m, scaled by sqrt(alpha)
   int load_steps = 10;
};

/// Total-Lagrangian Saint-Venant bar on [0, L], clamped at x = 0.
///
/// Green strain E = u' + u'^2/2, second Piola stress S = Y E; the axial force
/// N = Y A E (1 + u') follows from the stored energy, so element Jacobians are
/// symmetric. Loads are an end traction and a uniform body load, both scaled by
/// sqrt(alpha) and ramped linearly over the load steps (pseudo-time t = i/T).
/// Parameter vector: (alpha).
class SaintVenantBar final : public Problem
{
public:
   explicit SaintVenantBar(BarOptions options = {});

   std::string name() const override { return "bar"; }
   std::vector<double> time_grid() const override;
   std::size_t parameter_length() const override { return 1; }
   bool spd() const override { return true; }
   double element_measure(Index e) const override;

   Vector local_residual(Index e, const Vector &ue, const Vector &ue_ref,
                         const StepContext &ctx) const override;
   Matrix local_jacobian(Index e, const Vector &ue, const Vector &ue_ref,
                         const StepContext &ctx) const override;

   const BarOptions &options() const { return options_; }

private:
   double element_length(Index e) const;

   BarOptions options_;
};

struct ConvectionDiffusionOptions
{
   Index cells_per_side = 24;   // 2 * cells^2 triangles
   double dt = 0.1;             // s
   double t_final = 5.0;        // s
   double source_amplitude = 10.0;
   bool supg = true;
};

/// Transient rotating pulse u_t + a.grad u - div(eps grad u) = s on the unit
/// square with a = (-y, x), u = 0 on the boundary and at t = 0.
///
/// Linear P1 triangles, backward Euler, SUPG stabilization with
/// tau = ((2/dt)^2 + (2|a|/h)^2 + (4 eps/h^2)^2)^(-1/2). The element integrals
/// use the three-point edge-midpoint rule, exact for the Galerkin mass,
/// convection and diffusion terms.
/// Parameter vector: (eps).
class ConvectionDiffusion final : public Problem
{
public:
   explicit ConvectionDiffusion(ConvectionDiffusionOptions options = {});

   std::string name() const override { return "convection-diffusion"; }
   std::vector<double> time_grid() const override;
   std::size_t parameter_length() const override { return 1; }
   bool spd() const override { return false; }
   double element_measure(Index e) const override;

   Vector local_residual(Index e, const Vector &ue, const Vector &ue_ref,
                         const StepContext &ctx) const override;
   Matrix local_jacobian(Index e, const Vector &ue, const Vector &ue_ref,
                         const StepContext &ctx) const override;

   const ConvectionDiffusionOptions &options() const { return options_; }

   /// Effective diffusivity conductivity / (density * specific heat), scaled
   /// so the desk mesh runs at element Peclet numbers of order one.
   static double effective_diffusivity(double density, double conductivity,
                                       double specific_heat);

private:
   struct Geometry
   {
      double area = 0.0;
      double h = 0.0;
      Eigen::Matrix<double, 3, 2> grad;   // row i = grad N_i
      Eigen::Matrix<double, 3, 2> qp;     // quadrature points
   };

   // Assembles J^e and the constant part f^e with R^e = J^e u^e - f^e.
   void linear_system(Index e, const Vector &ue_ref, const StepContext &ctx,
                      Eigen::Matrix3d &J, Eigen::Vector3d &f) const;

   ConvectionDiffusionOptions options_;
   std::vector<Geometry> geometry_;
};

/// One node, one element, R(u) = u^2 - c. Exercises the Newton drivers.
class ScalarQuadratic final : public Problem
{
public:
   explicit ScalarQuadratic(double c = 4.0);

   std::string name() const override { return "scalar-quadratic"; }
   std::vector<double> time_grid() const override { return {1.0}; }
   std::size_t parameter_length() const override { return 0; }
   bool spd() const override { return true; }

   Vector local_residual(Index e, const Vector &ue, const Vector &ue_ref,
                         const StepContext &ctx) const override;
   Matrix local_jacobian(Index e, const Vector &ue, const Vector &ue_ref,
                         const StepContext &ctx) const override;

private:
   double c_;
};

} // namespace promhr
