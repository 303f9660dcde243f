// Copyright 2026 The promhr Authors
// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"
#include "support.hpp"

#include "promhr/errors.hpp"
#include "promhr/pipeline.hpp"
#include "promhr/problems.hpp"

#include <cmath>

using namespace promhr;
using promhr::testing::small_bar;
using promhr::testing::small_cd;

TEST_CASE("load scaling")
{
   CHECK(load_scaling(1.0, 3.0) == 3.0);
   CHECK(load_scaling(4.0, 3.0) == 6.0);
   CHECK(load_scaling(0.0, 3.0) == 0.0);
   CHECK_THROWS_AS(load_scaling(-1.0, 3.0), InvalidInput);
}

TEST_CASE("pulse source term")
{
   CHECK(source_term_pulse(0.5, 0.5) == doctest::Approx(10.0));
   CHECK(source_term_pulse(0.0, 0.0) == doctest::Approx(3.7266531720786709e-5).epsilon(1e-12));
   CHECK(source_term_pulse(1.0, 0.0) == 0.0);
   CHECK(source_term_pulse(0.8, 0.8) == 0.0);
}

TEST_CASE("toy quadratic element")
{
   const ScalarQuadratic toy;
   StepContext ctx;
   Vector u(1);
   u << 3.0;
   CHECK(toy.element_residual(0, u, u, ctx)(0) == 5.0);
   CHECK(toy.element_jacobian(0, u, u, ctx)(0, 0) == 6.0);
}

TEST_CASE("unloaded bar is in equilibrium")
{
   BarOptions o = small_bar(4, 2);
   o.body_load = 0.0;
   o.end_load = 0.0;
   const SaintVenantBar bar(o);
   const auto ctx = bar.step_context({1.0}, 1);
   const Vector u = bar.initial_state();
   for (Index e = 0; e < bar.num_elements(); ++e)
   {
      CHECK(bar.element_residual(e, u, u, ctx).norm() == 0.0);
   }
   CHECK(assemble_residual(bar, u, u, ctx).norm() == 0.0);
}

TEST_CASE("bar assembly by hand on two elements")
{
   const SaintVenantBar bar(small_bar(2, 1));
   const auto ctx = bar.step_context({1.5}, 0);
   Vector u(2);
   u << 1e-3, 3e-3;
   const Vector zero = Vector::Zero(2);
   const Vector r0 = bar.local_residual(0, Vector((Vector(2) << 0.0, u(0)).finished()), zero, ctx);
   const Vector r1 = bar.local_residual(1, u, zero, ctx);
   const Vector R = assemble_residual(bar, u, zero, ctx);
   CHECK(R(0) == r0(1) + r1(0));
   CHECK(R(1) == r1(1));

   // the shared node of element 0 carries both contributions
   const Vector gathered = gather_dofs(bar.assembly(), 0, R);
   CHECK(gathered(1) != r0(1));

   const Matrix K = Matrix(assemble_jacobian(bar, zero, zero, ctx));
   const double k = bar.options().young * bar.options().area / 0.5;
   Matrix expected(2, 2);
   expected << 2 * k, -k, -k, k;
   CHECK((K - expected).norm() <= 1e-12 * k);
}

TEST_CASE("bar element Jacobian reduces to linear stiffness and stays symmetric")
{
   const SaintVenantBar bar(small_bar(5, 1));
   const auto ctx = bar.step_context({1.0}, 0);
   const double h = 1.0 / 5.0;
   const double k = bar.options().young * bar.options().area / h;
   Matrix lin(2, 2);
   lin << k, -k, -k, k;
   const Vector ue = Vector::Zero(2);
   CHECK((bar.local_jacobian(2, ue, ue, ctx) - lin).norm() <= 1e-14 * k);

   Vector big(2);
   big << 0.01, 0.05;
   const Matrix J = bar.local_jacobian(2, big, ue, ctx);
   CHECK(J(0, 1) == J(1, 0));
   CHECK(J(0, 0) > k);

   Vector u = Vector::LinSpaced(bar.num_dofs(), 0.01, 0.05);
   const Matrix A = Matrix(assemble_jacobian(bar, u, u, ctx));
   CHECK((A - A.transpose()).norm() == 0.0);
}

TEST_CASE("single-element mesh assembles to the element residual")
{
   const SaintVenantBar bar(small_bar(1, 1));
   const auto ctx = bar.step_context({2.0}, 0);
   Vector u(1);
   u << 2e-3;
   const Vector R = assemble_residual(bar, u, u, ctx);
   const Vector re = bar.element_residual(0, u, u, ctx);
   CHECK(R(0) == re(1));
   CHECK(gather_dofs(bar.assembly(), 0, R)(1) == re(1));
}

TEST_CASE("convection-diffusion Jacobian does not depend on the state")
{
   const ConvectionDiffusion cd(small_cd(6));
   const auto ctx = cd.step_context({0.05}, 2);
   const Vector a = promhr::testing::random_matrix(cd.num_dofs(), 1, 4);
   const Vector b = promhr::testing::random_matrix(cd.num_dofs(), 1, 5);
   const Vector ref = promhr::testing::random_matrix(cd.num_dofs(), 1, 6);
   const Matrix Ja = Matrix(assemble_jacobian(cd, a, ref, ctx));
   const Matrix Jb = Matrix(assemble_jacobian(cd, b, ref, ctx));
   CHECK((Ja - Jb).norm() == 0.0);
   CHECK((Ja - Ja.transpose()).norm() > 1e-8 * Ja.norm());
   CHECK_FALSE(cd.spd());

   // R is affine in u with slope J
   const Vector Ra = assemble_residual(cd, a, ref, ctx);
   const Vector Rb = assemble_residual(cd, b, ref, ctx);
   CHECK((Ra - Rb - Ja * (a - b)).norm() < 1e-12 * Ra.norm());
}

TEST_CASE("constant field has no diffusive or convective flux on interior elements")
{
   ConvectionDiffusionOptions o = small_cd(6);
   o.source_amplitude = 0.0;
   const ConvectionDiffusion cd(o);
   const auto ctx = cd.step_context({0.2}, 0);
   const Vector ones = Vector::Ones(3);
   for (Index e = 0; e < cd.num_elements(); ++e)
   {
      // u = u_ref = const leaves only terms proportional to grad u
      const Vector r = cd.local_residual(e, ones, ones, ctx);
      CHECK(r.norm() < 1e-12);
   }
}

TEST_CASE("degenerate geometry is rejected")
{
   BarOptions o = small_bar(2, 1);
   o.length = 0.0;
   CHECK_THROWS_AS(
      {
         const SaintVenantBar bar(o);
         const Vector u = bar.initial_state();
         bar.element_residual(0, u, u, bar.step_context({1.0}, 0));
      },
      AssemblyError);
   CHECK_THROWS_AS(ConvectionDiffusion(small_cd(0)), InvalidInput);
}

TEST_CASE("finite-difference Jacobian check")
{
   const SaintVenantBar bar(small_bar(16, 4));
   CHECK(finite_difference_jacobian_check(bar, {1.3}, 7, 20) <= 1e-4);
   const ConvectionDiffusion cd(small_cd(8));
   CHECK(finite_difference_jacobian_check(cd, {0.05}, 7, 20) <= 1e-4);
}

TEST_CASE("parameter validation")
{
   const SaintVenantBar bar(small_bar(4, 2));
   CHECK_THROWS_AS(bar.check_parameter({}), InvalidInput);
   CHECK_THROWS_AS(bar.check_parameter({1.0, 2.0}), InvalidInput);
   CHECK_THROWS_AS(bar.check_parameter({std::nan("")}), InvalidInput);
   CHECK(bar.time_grid().size() == 2);
   CHECK(bar.time_grid().back() == 1.0);
}
