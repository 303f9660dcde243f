// Copyright 2026 The promhr Authors
// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"
#include "support.hpp"

#include "promhr/basis.hpp"
#include "promhr/fom.hpp"
#include "promhr/metrics.hpp"
#include "promhr/problems.hpp"
#include "promhr/rom.hpp"

#include <cmath>
#include <cstring>

using namespace promhr;
using promhr::testing::alphas;
using promhr::testing::small_bar;
using promhr::testing::small_cd;

TEST_CASE("Newton on the toy quadratic")
{
   const ScalarQuadratic toy(4.0);
   NewtonSettings s;
   s.record_iterates = true;
   s.rel_tolerance = 1e-14;
   Vector u_ref(1);
   u_ref << 3.0;
   const auto r = solve_timestep_fom(toy, u_ref, StepContext{}, s);
   REQUIRE(r.trace.iterates.size() >= 3);
   CHECK(r.trace.iterates[0](0) == 3.0);
   CHECK(r.trace.iterates[1](0) == doctest::Approx(13.0 / 6.0).epsilon(1e-15));
   CHECK(r.trace.iterates[2](0) == doctest::Approx(313.0 / 156.0).epsilon(1e-15));
   CHECK(r.u(0) == doctest::Approx(2.0).epsilon(1e-14));
   CHECK((r.u - u_ref - r.delta_u).norm() == 0.0);
   CHECK(r.trace.converged);
   CHECK(r.trace.evaluations() == r.trace.iterations() + 1);
}

TEST_CASE("Newton divergence and singular Jacobians are reported")
{
   const ScalarQuadratic toy(4.0);
   NewtonSettings s;
   s.max_iterations = 1;
   Vector u_ref(1);
   u_ref << 30.0;
   try
   {
      solve_timestep_fom(toy, u_ref, StepContext{}, s);
      FAIL("expected DivergenceError");
   }
   catch (const DivergenceError &e)
   {
      CHECK_FALSE(e.trace().converged);
      CHECK(e.trace().iterations() == 1);
   }

   u_ref << 0.0;
   CHECK_THROWS_AS(solve_timestep_fom(toy, u_ref, StepContext{}, NewtonSettings{}), SingularSystem);

   NewtonSettings bad;
   bad.step_length = 0.0;
   CHECK_THROWS_AS(bad.validate(), InvalidInput);
}

TEST_CASE("line search damps an overshooting step")
{
   const ScalarQuadratic toy(4.0);
   NewtonSettings s;
   s.line_search = true;
   Vector u_ref(1);
   u_ref << 0.05;
   const auto r = solve_timestep_fom(toy, u_ref, StepContext{}, s);
   CHECK(r.u(0) == doctest::Approx(2.0));
   for (std::size_t k = 1; k < r.trace.convergence_norms.size(); ++k)
   {
      CHECK(r.trace.convergence_norms[k] < r.trace.convergence_norms[k - 1]);
   }
}

TEST_CASE("linear convection-diffusion converges in one iteration")
{
   const ConvectionDiffusion cd(small_cd(6));
   const auto ctx = cd.step_context({0.05}, 0);
   const auto r = solve_timestep_fom(cd, cd.initial_state(), ctx, NewtonSettings{});
   CHECK(r.trace.iterations() == 1);
   CHECK(assemble_residual(cd, r.u, cd.initial_state(), ctx).norm() <= 1e-9 * r.trace.residual_norms[0]);
}

TEST_CASE("unloaded bar needs no corrective iteration")
{
   BarOptions o = small_bar(4, 2);
   o.body_load = 0.0;
   o.end_load = 0.0;
   const SaintVenantBar bar(o);
   const auto r = solve_timestep_fom(bar, bar.initial_state(), bar.step_context({1.0}, 0),
                                     NewtonSettings{});
   CHECK(r.trace.iterations() == 0);
   CHECK(r.u.norm() == 0.0);
}

TEST_CASE("Newton converges quadratically on the bar")
{
   const SaintVenantBar bar(small_bar(16, 2));
   NewtonSettings s;
   s.rel_tolerance = 1e-14;
   const auto r = solve_timestep_fom(bar, bar.initial_state(), bar.step_context({2.0}, 0), s);
   const auto &n = r.trace.convergence_norms;
   REQUIRE(n.size() >= 4);
   // normalized ratio r_{k+1} / r_k^2 with r scaled by r_0 stays bounded
   bool checked = false;
   for (std::size_t k = 1; k + 1 < n.size(); ++k)
   {
      const double a = n[k] / n[0];
      const double b = n[k + 1] / n[0];
      if (b > 1e-13 && a < 1e-1)
      {
         CHECK(b / (a * a) <= 1e3);
         checked = true;
      }
   }
   CHECK(checked);
}

TEST_CASE("FOM campaign layout and determinism")
{
   const SaintVenantBar bar(small_bar(8, 3));
   const auto params = alphas({0.5, 1.5});
   const auto a = run_fom_campaign(bar, params, NewtonSettings{});
   const auto b = run_fom_campaign(bar, params, NewtonSettings{});
   REQUIRE(a.size() == 6);
   CHECK(std::memcmp(a.data.data(), b.data.data(), sizeof(double) * a.data.size()) == 0);
   CHECK(a.tags[0].parameter == 0);
   CHECK(a.tags[2].step == 2);
   CHECK(a.tags[3].parameter == 1);
   CHECK(a.tags[3].step == 0);
   const auto first = solve_timestep_fom(bar, bar.initial_state(), bar.step_context({0.5}, 0),
                                         NewtonSettings{});
   CHECK(a.data.col(0) == first.u);

   const auto tags = snapshot_tags_from_json(snapshot_manifest_json(a));
   REQUIRE(tags.size() == a.tags.size());
   CHECK(tags[4].step == a.tags[4].step);
   CHECK(tags[4].iterations == a.tags[4].iterations);

   CHECK_THROWS_AS(run_fom_campaign(bar, alphas({-1.0}), NewtonSettings{}), InvalidInput);
}

namespace {

struct BarFixture
{
   SaintVenantBar bar{small_bar(12, 4)};
   std::vector<Parameter> params = alphas({0.4, 1.2, 2.0});
   SnapshotSet fom = run_fom_campaign(bar, params, NewtonSettings{});
};

} // namespace

TEST_CASE("full basis reproduces the FOM for every projection")
{
   // four dofs and enough load levels for the snapshots to span the space
   BarFixture f;
   f.bar = SaintVenantBar(small_bar(4, 10));
   f.params = alphas({0.25, 1.0, 2.0, 3.0});
   NewtonSettings s;
   s.rel_tolerance = 1e-12;
   f.fom = run_fom_campaign(f.bar, f.params, s);
   const auto basis = build_right_basis(f.fom.data, 0.0);
   REQUIRE(basis.cols() == f.bar.num_dofs());
   const Matrix &Phi = basis.matrix;
   const auto gal = run_rom_campaign(f.bar, f.params, [&](const Vector &u, const StepContext &c) {
      return solve_timestep_galerkin(f.bar, Phi, u, c, s);
   }, "galerkin");
   const auto lspg = run_rom_campaign(f.bar, f.params, [&](const Vector &u, const StepContext &c) {
      return solve_timestep_lspg(f.bar, Phi, u, c, s);
   }, "lspg");
   const auto pg = run_rom_campaign(f.bar, f.params, [&](const Vector &u, const StepContext &c) {
      return solve_timestep_pg(f.bar, Phi, Phi, u, c, s);
   }, "pg");
   CHECK(overall_error(gal.states, f.fom.data) <= 1e-10);
   CHECK(overall_error(lspg.states, f.fom.data) <= 1e-10);
   CHECK(overall_error(pg.states, f.fom.data) <= 1e-10);
}

TEST_CASE("PG with Psi = Phi follows the Galerkin iterates")
{
   BarFixture f;
   const Matrix Phi = build_right_basis(f.fom.data, 1e-4).matrix;
   const auto ctx = f.bar.step_context({1.0}, 2);
   const Vector u_ref = f.fom.data.col(1);
   const auto g = solve_timestep_galerkin(f.bar, Phi, u_ref, ctx, NewtonSettings{});
   const auto p = solve_timestep_pg(f.bar, Phi, Phi, u_ref, ctx, NewtonSettings{});
   REQUIRE(g.trace.steps.size() == p.trace.steps.size());
   for (std::size_t k = 0; k < g.trace.steps.size(); ++k)
   {
      CHECK((g.trace.steps[k] - p.trace.steps[k]).norm() <= 1e-12 * g.trace.steps[k].norm());
   }
}

TEST_CASE("Galerkin and LSPG stationarity at convergence")
{
   BarFixture f;
   const Matrix Phi = build_right_basis(f.fom.data, 1e-3).matrix;
   const auto ctx = f.bar.step_context({1.7}, 3);
   const Vector u_ref = f.fom.data.col(2);
   NewtonSettings s;
   const auto g = solve_timestep_galerkin(f.bar, Phi, u_ref, ctx, s);
   const Vector Rg = assemble_residual(f.bar, g.state.u_tilde, u_ref, ctx);
   const double tol = s.rel_tolerance * g.trace.convergence_norms[0] + s.abs_tolerance;
   CHECK((Phi.transpose() * Rg).norm() <= tol);

   const auto l = solve_timestep_lspg(f.bar, Phi, u_ref, ctx, s);
   const Vector Rl = assemble_residual(f.bar, l.state.u_tilde, u_ref, ctx);
   const Matrix JPhi = assemble_jacobian(f.bar, l.state.u_tilde, u_ref, ctx) * Phi;
   CHECK((JPhi.transpose() * Rl).norm() <=
         s.rel_tolerance * l.trace.convergence_norms[0] + s.abs_tolerance);

   // reconstruction: u_tilde - u_ref lies in col(Phi)
   for (const auto *r : {&g, &l})
   {
      const Vector d = r->state.u_tilde - u_ref;
      CHECK((d - Phi * (Phi.transpose() * d)).norm() <= 1e-12 * d.norm());
      CHECK((Phi * r->state.q_hat - d).norm() <= 1e-12 * d.norm());
   }
}

TEST_CASE("linear LSPG step is the QR least-squares minimizer")
{
   const ConvectionDiffusion cd(small_cd(6));
   const std::vector<Parameter> params{{0.05}};
   const auto fom = run_fom_campaign(cd, params, NewtonSettings{});
   const Matrix Phi = build_right_basis(fom.data, 1e-2).matrix;
   const auto ctx = cd.step_context({0.05}, 1);
   const Vector u_ref = fom.data.col(0);
   const auto r = solve_timestep_lspg(cd, Phi, u_ref, ctx, NewtonSettings{});
   REQUIRE(r.trace.iterations() == 1);
   const Matrix JPhi = assemble_jacobian(cd, u_ref, u_ref, ctx) * Phi;
   const Vector R0 = assemble_residual(cd, u_ref, u_ref, ctx);
   const Vector oracle = linalg::qr_least_squares(JPhi, -R0);
   CHECK((r.trace.steps[0] - oracle).norm() <= 1e-10 * oracle.norm());
   const auto q = solve_timestep_lspg(cd, Phi, u_ref, ctx, NewtonSettings{}, true);
   CHECK((q.state.q_hat - r.state.q_hat).norm() <= 1e-10 * r.state.q_hat.norm());
}

TEST_CASE("linear Galerkin solves the reduced system in one step")
{
   const ConvectionDiffusion cd(small_cd(6));
   const auto fom = run_fom_campaign(cd, {{0.05}}, NewtonSettings{});
   const Matrix Phi = build_right_basis(fom.data, 1e-2).matrix;
   const auto ctx = cd.step_context({0.05}, 2);
   const Vector u_ref = fom.data.col(1);
   const auto r = solve_timestep_galerkin(cd, Phi, u_ref, ctx, NewtonSettings{});
   CHECK(r.trace.iterations() == 1);
   const Matrix J = Matrix(assemble_jacobian(cd, u_ref, u_ref, ctx));
   const Vector R = assemble_residual(cd, u_ref, u_ref, ctx);
   const Vector q = -(Phi.transpose() * J * Phi).lu().solve(Phi.transpose() * R);
   CHECK((r.state.q_hat - q).norm() <= 1e-10 * q.norm());
}

TEST_CASE("one-mode Galerkin on a two-dof bar by hand")
{
   BarOptions o = small_bar(2, 1);
   o.young = 1.0;
   o.area = 1.0;
   o.body_load = 0.0;
   o.end_load = 1e-6;   // deep in the linear regime
   const SaintVenantBar bar(o);
   Matrix Phi(2, 1);
   Phi << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
   const auto ctx = bar.step_context({1.0}, 0);
   NewtonSettings s;
   s.rel_tolerance = 1e-13;
   const auto r = solve_timestep_galerkin(bar, Phi, bar.initial_state(), ctx, s);
   // K = [[4,-2],[-2,2]], f = (0, 1e-6): phi^T K phi = 1, phi^T f = 1e-6 / sqrt 2
   CHECK(r.state.q_hat(0) == doctest::Approx(1e-6 / std::sqrt(2.0)).epsilon(1e-5));
}

TEST_CASE("PG checks basis shapes")
{
   BarFixture f;
   const Matrix Phi = build_right_basis(f.fom.data, 0.0).matrix;
   const Matrix Psi = Phi.leftCols(Phi.cols() - 1);
   const auto ctx = f.bar.step_context({1.0}, 0);
   CHECK_THROWS_AS(solve_timestep_pg(f.bar, Phi, Psi, f.bar.initial_state(), ctx, NewtonSettings{}),
                   ConfigurationError);
   CHECK_THROWS_AS(solve_timestep_galerkin(f.bar, Matrix::Ones(3, 1), f.bar.initial_state(), ctx,
                                           NewtonSettings{}),
                   ConfigurationError);
   Matrix dup(Phi.rows(), 2);
   dup.col(0) = Phi.col(0);
   dup.col(1) = Phi.col(0);
   CHECK_THROWS_AS(solve_timestep_lspg(f.bar, dup, f.bar.initial_state(), ctx, NewtonSettings{}),
                   SingularSystem);
}

TEST_CASE("PG with Psi_J matches LSPG directions on a linear problem")
{
   const ConvectionDiffusion cd(small_cd(6, 1.0));
   const std::vector<Parameter> params{{0.05}};
   const auto fom = run_fom_campaign(cd, params, NewtonSettings{});
   const Matrix Phi = build_right_basis(fom.data, 1e-3).matrix;
   const auto left = collect_left_training(cd, Phi, params, NewtonSettings{});
   const auto psi = build_left_basis_jacobian(left.S_J, 0.0);
   CHECK(psi.cols() == Phi.cols());
   for (std::size_t j = 0; j < cd.time_grid().size(); ++j)
   {
      const auto ctx = cd.step_context(params[0], j);
      const Vector u_ref = j == 0 ? cd.initial_state() : Vector(fom.data.col(Index(j) - 1));
      const auto l = solve_timestep_lspg(cd, Phi, u_ref, ctx, NewtonSettings{});
      const auto p = solve_timestep_pg(cd, Phi, psi.matrix, u_ref, ctx, NewtonSettings{});
      REQUIRE(l.trace.steps.size() == p.trace.steps.size());
      for (std::size_t k = 0; k < l.trace.steps.size(); ++k)
      {
         CHECK((l.trace.steps[k] - p.trace.steps[k]).norm() <= 1e-10 * l.trace.steps[k].norm());
      }
   }
}

TEST_CASE("dropped Gauss-Newton term is negligible at a converged PG state")
{
   BarFixture f;
   const Matrix Phi = build_right_basis(f.fom.data, 1e-6).matrix;
   const auto left = collect_left_training(f.bar, Phi, f.params, NewtonSettings{});
   const Matrix Psi = build_left_basis_jacobian(left.S_J, 1e-6).matrix;
   const auto ctx = f.bar.step_context({1.2}, 3);
   const Vector u_ref = left.campaign.states.col(6);
   NewtonSettings s;
   s.rel_tolerance = 1e-12;
   const auto r = solve_timestep_pg(f.bar, Phi, Psi, u_ref, ctx, s);
   const Vector u = r.state.u_tilde;
   const Vector v = Psi * (Psi.transpose() * assemble_residual(f.bar, u, u_ref, ctx));

   const Index n = Phi.cols();
   Matrix dropped(n, n);
   const double h = 1e-7 * (1.0 + u.norm());
   for (Index i = 0; i < n; ++i)
   {
      const Vector up = u + h * Phi.col(i);
      const Vector um = u - h * Phi.col(i);
      const Vector gp = Phi.transpose() * (assemble_jacobian(f.bar, up, u_ref, ctx).transpose() * v);
      const Vector gm = Phi.transpose() * (assemble_jacobian(f.bar, um, u_ref, ctx).transpose() * v);
      dropped.col(i) = (gp - gm) / (2.0 * h);
   }
   const Matrix PJ = Psi.transpose() * (assemble_jacobian(f.bar, u, u_ref, ctx) * Phi);
   CHECK(dropped.norm() <= 1e-6 * (PJ.transpose() * PJ).norm());
}

TEST_CASE("left training snapshot counts")
{
   const ConvectionDiffusion cd(small_cd(5, 0.3));
   const std::vector<Parameter> params{{0.05}, {0.1}};
   const auto fom = run_fom_campaign(cd, params, NewtonSettings{});
   const Matrix Phi = build_right_basis(fom.data, 1e-4).matrix;
   const auto left = collect_left_training(cd, Phi, params, NewtonSettings{});
   const Index T = static_cast<Index>(cd.time_grid().size());
   CHECK(left.S_J.cols() == Phi.cols() * T * 2);
   // linear: one non-converged residual per timestep
   CHECK(left.S_R.cols() == T * 2);
   for (Index c : left.residual_counts)
   {
      CHECK(c == 1);
   }
   // J differs between diffusivities; one parameter gives identical blocks
   const auto single = collect_left_training(cd, Phi, {params[0]}, NewtonSettings{});
   CHECK(build_left_basis_jacobian(single.S_J, 0.0).cols() == Phi.cols());
   CHECK(build_left_basis_jacobian(left.S_J, 0.0).cols() >= Phi.cols());
}

TEST_CASE("bar left basis is at least as wide as the right basis")
{
   BarFixture f;
   const Matrix Phi = build_right_basis(f.fom.data, 1e-6).matrix;
   const auto left = collect_left_training(f.bar, Phi, f.params, NewtonSettings{});
   CHECK(build_left_basis_jacobian(left.S_J, 1e-6).cols() >= Phi.cols());
   Index expected = 0;
   for (const auto &t : left.campaign.traces)
   {
      expected += t.evaluations() - 1;
   }
   CHECK(left.S_R.cols() == expected);
   const auto psi_r = build_left_basis_residual(left.S_R, 1e-6);
   CHECK(psi_r.role == BasisRole::LeftResidual);
   CHECK(containment_defect(psi_r.matrix, psi_r.matrix) < 1e-10);
   // the last residual of every step is never collected
   CHECK(left.S_R.colwise().norm().minCoeff() > 0.0);
}

TEST_CASE("basis builder contracts")
{
   Matrix c(4, 1);
   c << 1, 2, 2, 4;
   const auto b = build_right_basis(c, 0.0);
   REQUIRE(b.cols() == 1);
   CHECK((b.matrix - c / c.norm()).norm() < 1e-15);
   const auto r = build_left_basis_residual(c, 0.0);
   CHECK((r.matrix - c / c.norm()).norm() < 1e-15);

   Matrix rep(4, 3);
   rep << c, c, c;
   CHECK(build_left_basis_jacobian(rep, 0.0).cols() == 1);
   CHECK(basis_role_from_string(to_string(BasisRole::LeftJacobian)) == BasisRole::LeftJacobian);
   CHECK_THROWS_AS(basis_role_from_string("sideways"), InvalidInput);

   const Matrix low = promhr::testing::random_matrix(20, 3, 1) *
                      promhr::testing::random_matrix(3, 9, 2);
   const auto lossless = build_right_basis(low, 0.0);
   CHECK(lossless.cols() == 3);
   CHECK((lossless.matrix * (lossless.matrix.transpose() * low) - low).norm() <= 1e-10 * low.norm());

   TrainingLog log;
   log.add("phi", lossless);
   CHECK(log.to_json().find("\"phi\"") != std::string::npos);
}
