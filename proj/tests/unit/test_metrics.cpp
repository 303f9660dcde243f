// Copyright 2026 The promhr Authors
// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"
#include "support.hpp"

#include "promhr/errors.hpp"
#include "promhr/metrics.hpp"

#include <cmath>

using namespace promhr;
using promhr::testing::random_matrix;

TEST_CASE("snapshot error examples")
{
   Vector u(2), v(2);
   u << 3, 4;
   v << 3, 0;
   CHECK(relative_error_snapshot(v, u) == doctest::Approx(0.64));
   CHECK(relative_error_snapshot_unsquared(v, u) == doctest::Approx(0.8));
   CHECK(relative_error_snapshot(u, u) == 0.0);
   CHECK(relative_error_snapshot(2.0 * u, u) == doctest::Approx(1.0));
   CHECK_THROWS_AS(relative_error_snapshot(u, Vector::Zero(2)), UndefinedMetric);
}

TEST_CASE("overall error")
{
   Matrix S(2, 2), A(2, 2);
   S << 1, 0, 0, 1;
   A << 1, 1, 0, 1;
   CHECK(overall_error(A, S) == doctest::Approx(std::sqrt(0.5)));
   CHECK(overall_error(S, S) == 0.0);

   const Vector u = random_matrix(6, 1, 1);
   const Vector v = random_matrix(6, 1, 2);
   CHECK(overall_error(v, u) == doctest::Approx(std::sqrt(relative_error_snapshot(v, u))));
   CHECK_THROWS_AS(overall_error(Matrix::Ones(2, 2), Matrix::Ones(2, 3)), InvalidInput);
   CHECK_THROWS_AS(overall_error(Matrix::Ones(2, 2), Matrix::Zero(2, 2)), UndefinedMetric);
}

TEST_CASE("overall error is invariant to joint column permutations")
{
   const Matrix S = random_matrix(8, 5, 3);
   const Matrix A = S + 1e-3 * random_matrix(8, 5, 4);
   Eigen::PermutationMatrix<Eigen::Dynamic> P(5);
   P.indices() << 3, 0, 4, 1, 2;
   CHECK(overall_error(A * P, S * P) == doctest::Approx(overall_error(A, S)).epsilon(1e-14));
   const auto e = snapshot_errors(A, S);
   REQUIRE(e.size() == 5);
   CHECK(e[2] == doctest::Approx(relative_error_snapshot(A.col(2), S.col(2))));
}

TEST_CASE("triangle inequality on the numerators")
{
   const Matrix A = random_matrix(7, 4, 10);
   const Matrix B = A + 1e-2 * random_matrix(7, 4, 11);
   const Matrix C = B + 1e-2 * random_matrix(7, 4, 12);
   CHECK((A - C).norm() <= (A - B).norm() + (B - C).norm());
}

TEST_CASE("run cost and speedup")
{
   IterationTrace full;
   full.elements_touched = {100, 100, 100};
   full.wall_time = 2.0;
   IterationTrace hyper;
   hyper.elements_touched = {10, 10, 10};
   hyper.wall_time = 0.5;
   const auto a = run_cost({full});
   const auto b = run_cost({hyper});
   CHECK(a.element_evaluations == 300.0);
   const auto s = measure_speedup(a, b);
   CHECK(s.work_ratio == 10.0);
   CHECK(s.wall_ratio == 4.0);
   const auto same = measure_speedup(a, a);
   CHECK(same.work_ratio == 1.0);
   CHECK(same.wall_ratio == 1.0);
}

TEST_CASE("comparison tables round-trip")
{
   std::vector<ComparisonRow> rows{{"train", "galerkin", "u", 0.0, 0.0, 0.0, 1.0},
                                   {"test", "lspg", "u", 1.0 / 3.0, 2e-12, 0.1, 7.25}};
   const std::string csv = render_comparison_tables(rows);
   CHECK(csv.rfind("phase,strategy,variable,fom_vs_rom,rom_vs_hrom,fom_vs_hrom,work_ratio\n", 0) ==
         0);
   CHECK(csv.find("train,galerkin,u,0,0,0,1\n") != std::string::npos);
   CHECK(csv.find('\r') == std::string::npos);
   const auto back = parse_comparison_tables(csv);
   REQUIRE(back.size() == 2);
   CHECK(back[1].fom_vs_rom == rows[1].fom_vs_rom);
   CHECK(back[1].strategy == "lspg");
   CHECK(render_comparison_tables(back) == csv);
   CHECK_THROWS_AS(parse_comparison_tables("a,b\n1,2\n"), InvalidInput);
}
