// Copyright 2026 The promhr Authors
// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"
#include "support.hpp"

#include "promhr/errors.hpp"
#include "promhr/linalg.hpp"

#include <cmath>
#include <cstring>
#include <limits>

using namespace promhr;
using promhr::testing::random_matrix;

TEST_CASE("truncated_svd of the identity keeps every mode")
{
   const auto r = linalg::truncated_svd(Matrix::Identity(3, 3), 0.0);
   REQUIRE(r.retained_rank() == 3);
   CHECK((r.sigma - Vector::Ones(3)).norm() < 1e-14);
   CHECK((r.U * r.U.transpose() - Matrix::Identity(3, 3)).norm() < 1e-13);
}

TEST_CASE("truncated_svd of a rank-one 2x2 matrix")
{
   Matrix A(2, 2);
   A << 1, 2, 2, 4;
   const auto r = linalg::truncated_svd(A, 0.0);
   REQUIRE(r.retained_rank() == 1);
   CHECK(r.sigma(0) == doctest::Approx(5.0).epsilon(1e-14));
   // signed so the largest entry is positive
   CHECK(r.U(1, 0) > 0.0);
   CHECK((r.U * r.sigma.asDiagonal() * r.V.transpose() - A).norm() < 1e-13);
}

TEST_CASE("truncated_svd drops modes within the Frobenius budget")
{
   Matrix A = Matrix::Zero(2, 2);
   A(0, 0) = 10.0;
   A(1, 1) = 1.0;
   auto r = linalg::truncated_svd(A, 0.2);
   REQUIRE(r.retained_rank() == 1);
   CHECK(r.sigma(0) == doctest::Approx(10.0));

   // 1 / sqrt(101) is the threshold for dropping sigma = 1
   r = linalg::truncated_svd(A, 0.99 / std::sqrt(101.0));
   CHECK(r.retained_rank() == 2);
   r = linalg::truncated_svd(A, 1.01 / std::sqrt(101.0));
   CHECK(r.retained_rank() == 1);
}

TEST_CASE("truncated_svd with eps = 0 returns the numerical rank")
{
   const Matrix B = random_matrix(30, 4, 11);
   const Matrix C = random_matrix(4, 12, 12);
   const auto r = linalg::truncated_svd(B * C, 0.0);
   CHECK(r.retained_rank() == 4);
   CHECK((r.U * r.sigma.asDiagonal() * r.V.transpose() - B * C).norm() < 1e-10 * (B * C).norm());
}

TEST_CASE("truncated_svd tail bound and monotone spectrum on random data")
{
   const Matrix A = random_matrix(25, 15, 3);
   for (double eps : {0.0, 1e-3, 0.1, 0.5, 0.9})
   {
      const auto r = linalg::truncated_svd(A, eps);
      const Matrix E = A - r.U * r.sigma.asDiagonal() * r.V.transpose();
      CHECK(E.norm() <= eps * A.norm() + 1e-12 * A.norm());
      for (Index i = 1; i < r.retained_rank(); ++i)
      {
         CHECK(r.sigma(i) <= r.sigma(i - 1));
      }
      CHECK((r.U.transpose() * r.U - Matrix::Identity(r.retained_rank(), r.retained_rank())).norm() <
            1e-12);
   }
}

TEST_CASE("truncated_svd is bit-deterministic")
{
   const Matrix A = random_matrix(40, 9, 5);
   const auto a = linalg::truncated_svd(A, 1e-3);
   const auto b = linalg::truncated_svd(A, 1e-3);
   REQUIRE(a.U.size() == b.U.size());
   CHECK(std::memcmp(a.U.data(), b.U.data(), sizeof(double) * a.U.size()) == 0);
   CHECK(std::memcmp(a.sigma.data(), b.sigma.data(), sizeof(double) * a.sigma.size()) == 0);
}

TEST_CASE("truncated_svd edge cases")
{
   const auto zero = linalg::truncated_svd(Matrix::Zero(4, 3), 0.1);
   CHECK(zero.retained_rank() == 0);
   CHECK(zero.U.rows() == 4);

   Matrix bad = Matrix::Ones(2, 2);
   bad(0, 1) = std::numeric_limits<double>::quiet_NaN();
   CHECK_THROWS_AS(linalg::truncated_svd(bad, 0.0), InvalidInput);
   CHECK_THROWS_AS(linalg::truncated_svd(Matrix::Ones(2, 2), -0.1), InvalidInput);
   CHECK_THROWS_AS(linalg::truncated_svd(Matrix::Ones(2, 2), 1.5), InvalidInput);
   CHECK_THROWS_AS(linalg::truncated_svd(Matrix(0, 0), 0.0), InvalidInput);
}

TEST_CASE("tail_norm")
{
   Vector s(3);
   s << 3.0, 4.0, 12.0;
   CHECK(linalg::tail_norm(s, 0) == doctest::Approx(13.0));
   CHECK(linalg::tail_norm(s, 1) == doctest::Approx(std::sqrt(160.0)));
   CHECK(linalg::tail_norm(s, 3) == 0.0);
}

TEST_CASE("qr_least_squares examples")
{
   const Vector r = Vector::LinSpaced(4, -1.0, 2.0);
   CHECK((linalg::qr_least_squares(Matrix::Identity(4, 4), r) - r).norm() < 1e-15);

   Matrix W(2, 1);
   W << 1, 1;
   Vector rhs(2);
   rhs << 1, 3;
   const Vector x = linalg::qr_least_squares(W, rhs);
   REQUIRE(x.size() == 1);
   CHECK(x(0) == doctest::Approx(2.0).epsilon(1e-15));

   const Matrix S = random_matrix(6, 6, 9) + 4.0 * Matrix::Identity(6, 6);
   const Vector x0 = random_matrix(6, 1, 10);
   CHECK((linalg::qr_least_squares(S, S * x0) - x0).norm() < 1e-12);
}

TEST_CASE("qr_least_squares matches the normal equations on tall systems")
{
   const Matrix W = random_matrix(20, 5, 21);
   const Vector r = random_matrix(20, 1, 22);
   const Vector x = linalg::qr_least_squares(W, r);
   const Vector normal = (W.transpose() * W).ldlt().solve(W.transpose() * r);
   CHECK((x - normal).norm() < 1e-10 * normal.norm());
   // first-order optimality
   CHECK((W.transpose() * (W * x - r)).norm() < 1e-12 * W.norm() * r.norm());
}

TEST_CASE("qr_least_squares reports the rank-deficient column")
{
   Matrix W = random_matrix(8, 3, 31);
   W.col(2) = 2.0 * W.col(0);
   try
   {
      linalg::qr_least_squares(W, Vector::Ones(8));
      FAIL("expected SingularSystem");
   }
   catch (const SingularSystem &e)
   {
      CHECK(e.column() == 2);
   }
   CHECK_THROWS_AS(linalg::qr_least_squares(Matrix::Ones(2, 3), Vector::Ones(2)), InvalidInput);
}

TEST_CASE("nnls examples")
{
   Vector b(2);
   b << 1, 2;
   CHECK((linalg::nonneg_least_squares(Matrix::Identity(2, 2), b) - b).norm() < 1e-15);

   b << -1, 2;
   const Vector x = linalg::nonneg_least_squares(Matrix::Identity(2, 2), b);
   CHECK(x(0) == 0.0);
   CHECK(x(1) == doctest::Approx(2.0));

   Matrix A(1, 2);
   A << 1, 1;
   Vector c(1);
   c << 3;
   const Vector y = linalg::nonneg_least_squares(A, c);
   CHECK(y.minCoeff() >= 0.0);
   CHECK((A * y - c).norm() < 1e-14);
}

namespace {

// Exhaustive active-set oracle: the best nonnegative unconstrained LS solution
// over every support.
double brute_force_nnls_residual(const Matrix &A, const Vector &b)
{
   const Index n = A.cols();
   double best = b.norm();
   for (unsigned mask = 1; mask < (1u << n); ++mask)
   {
      std::vector<Index> cols;
      for (Index j = 0; j < n; ++j)
      {
         if (mask & (1u << j))
         {
            cols.push_back(j);
         }
      }
      Matrix As(A.rows(), static_cast<Index>(cols.size()));
      for (std::size_t k = 0; k < cols.size(); ++k)
      {
         As.col(static_cast<Index>(k)) = A.col(cols[k]);
      }
      const Vector xs = As.colPivHouseholderQr().solve(b);
      if (xs.minCoeff() < 0.0)
      {
         continue;
      }
      best = std::min(best, (As * xs - b).norm());
   }
   return best;
}

} // namespace

TEST_CASE("nnls agrees with exhaustive support enumeration")
{
   for (unsigned seed = 0; seed < 25; ++seed)
   {
      const Matrix A = random_matrix(7, 5, 100 + seed);
      const Vector b = random_matrix(7, 1, 200 + seed);
      const auto r = linalg::nonneg_least_squares_detailed(A, b);
      CHECK(r.converged);
      CHECK(r.x.minCoeff() >= 0.0);
      CHECK((A * r.x - b).norm() == doctest::Approx(brute_force_nnls_residual(A, b)).epsilon(1e-9));
      // KKT: gradient is nonnegative and vanishes on the support
      const Vector grad = A.transpose() * (A * r.x - b);
      for (Index j = 0; j < 5; ++j)
      {
         CHECK(grad(j) >= -1e-10);
         if (r.x(j) > 0.0)
         {
            CHECK(std::abs(grad(j)) < 1e-10);
         }
      }
   }
}
