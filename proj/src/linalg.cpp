// Copyright 2026 The promhr Authors
// SPDX-License-Identifier: Apache-2.0
#include "promhr/linalg.hpp"

#include "promhr/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace promhr::linalg {

bool all_finite(const Matrix &A)
{
   return A.allFinite();
}

double tail_norm(const Vector &sigma, Index k)
{
   double acc = 0.0;
   for (Index i = sigma.size() - 1; i >= k; --i)
   {
      acc += sigma(i) * sigma(i);
   }
   return std::sqrt(acc);
}

TruncatedSvdResult truncated_svd(const Matrix &A, double eps, bool left)
{
   if (A.rows() == 0 || A.cols() == 0)
   {
      throw InvalidInput("truncated_svd: empty matrix");
   }
   if (!(eps >= 0.0 && eps <= 1.0))
   {
      throw InvalidInput("truncated_svd: tolerance must lie in [0, 1], got " +
                         std::to_string(eps));
   }
   if (!A.allFinite())
   {
      throw InvalidInput("truncated_svd: matrix has non-finite entries");
   }

   Eigen::BDCSVD<Matrix> svd(A, left ? Eigen::ComputeThinU | Eigen::ComputeThinV
                                     : Eigen::ComputeThinV);
   const Vector &s = svd.singularValues();

   TruncatedSvdResult out;
   if (s.size() == 0 || s(0) == 0.0)
   {
      out.U.resize(A.rows(), 0);
      out.V.resize(A.cols(), 0);
      out.sigma.resize(0);
      return out;
   }

   const double floor = static_cast<double>(std::max(A.rows(), A.cols())) *
                        std::numeric_limits<double>::epsilon() * s(0);
   Index numerical_rank = 0;
   while (numerical_rank < s.size() && s(numerical_rank) > floor)
   {
      ++numerical_rank;
   }

   // The Frobenius norm of A equals the 2-norm of its spectrum.
   const double bound = eps * tail_norm(s, 0);
   Index k = 0;
   while (k < numerical_rank && tail_norm(s, k) > bound)
   {
      ++k;
   }

   out.V = svd.matrixV().leftCols(k);
   out.sigma = s.head(k);
   if (!left)
   {
      out.U.resize(A.rows(), 0);
      for (Index j = 0; j < k; ++j)
      {
         Index imax = 0;
         out.V.col(j).cwiseAbs().maxCoeff(&imax);
         if (out.V(imax, j) < 0.0)
         {
            out.V.col(j) *= -1.0;
         }
      }
      return out;
   }

   out.U = svd.matrixU().leftCols(k);
   for (Index j = 0; j < k; ++j)
   {
      Index imax = 0;
      out.U.col(j).cwiseAbs().maxCoeff(&imax);
      if (out.U(imax, j) < 0.0)
      {
         out.U.col(j) *= -1.0;
         out.V.col(j) *= -1.0;
      }
   }
   return out;
}

Vector qr_least_squares(const Matrix &W, const Vector &r)
{
   if (W.rows() < W.cols())
   {
      throw InvalidInput("qr_least_squares: system is under-determined (" +
                         std::to_string(W.rows()) + " x " + std::to_string(W.cols()) + ")");
   }
   if (r.size() != W.rows())
   {
      throw InvalidInput("qr_least_squares: right-hand side length mismatch");
   }
   if (!W.allFinite() || !r.allFinite())
   {
      throw InvalidInput("qr_least_squares: non-finite input");
   }
   const Index n = W.cols();
   if (n == 0)
   {
      return Vector(0);
   }

   Eigen::HouseholderQR<Matrix> qr(W);
   const Matrix &packed = qr.matrixQR();
   const double rmax = packed.diagonal().head(n).cwiseAbs().maxCoeff();
   for (Index i = 0; i < n; ++i)
   {
      if (std::abs(packed(i, i)) < 1e-12 * rmax || rmax == 0.0)
      {
         throw SingularSystem("qr_least_squares: rank-deficient matrix at column " +
                                 std::to_string(i),
                              static_cast<std::size_t>(i));
      }
   }
   Vector qtr = qr.householderQ().transpose() * r;
   return packed.topLeftCorner(n, n).triangularView<Eigen::Upper>().solve(qtr.head(n));
}

namespace {

// Unconstrained least squares restricted to the passive columns.
Vector passive_solve(const Matrix &A, const Vector &b, const std::vector<Index> &passive)
{
   Matrix Ap(A.rows(), static_cast<Index>(passive.size()));
   for (std::size_t j = 0; j < passive.size(); ++j)
   {
      Ap.col(static_cast<Index>(j)) = A.col(passive[j]);
   }
   return Ap.colPivHouseholderQr().solve(b);
}

} // namespace

NnlsResult nonneg_least_squares_detailed(const Matrix &A, const Vector &b,
                                         const std::vector<Index> &initial_passive)
{
   if (A.rows() == 0 || A.cols() == 0)
   {
      throw InvalidInput("nonneg_least_squares: empty matrix");
   }
   if (b.size() != A.rows())
   {
      throw InvalidInput("nonneg_least_squares: right-hand side length mismatch");
   }
   if (!A.allFinite() || !b.allFinite())
   {
      throw InvalidInput("nonneg_least_squares: non-finite input");
   }

   const Index n = A.cols();
   NnlsResult out;
   out.x = Vector::Zero(n);

   const double scale = (A.transpose() * b).cwiseAbs().maxCoeff();
   if (scale == 0.0)
   {
      return out;
   }
   const double dual_tol = 1e-10 * scale;
   const Index max_outer = 10 * n;

   std::vector<bool> in_passive(static_cast<std::size_t>(n), false);
   Vector &x = out.x;

   std::vector<Index> warm;
   for (const Index j : initial_passive)
   {
      if (j < 0 || j >= n)
      {
         throw InvalidInput("nonneg_least_squares: initial passive index out of range");
      }
      warm.push_back(j);
   }
   std::sort(warm.begin(), warm.end());
   warm.erase(std::unique(warm.begin(), warm.end()), warm.end());
   while (!warm.empty())
   {
      const Vector z = passive_solve(A, b, warm);
      std::vector<Index> positive;
      for (std::size_t i = 0; i < warm.size(); ++i)
      {
         if (z(static_cast<Index>(i)) > 0.0)
         {
            positive.push_back(warm[i]);
         }
      }
      if (positive.size() == warm.size())
      {
         for (std::size_t i = 0; i < warm.size(); ++i)
         {
            x(warm[i]) = z(static_cast<Index>(i));
            in_passive[static_cast<std::size_t>(warm[i])] = true;
         }
         break;
      }
      warm = std::move(positive);
   }

   for (Index outer = 0;; ++outer)
   {
      const Vector w = A.transpose() * (b - A * x);

      Index t = -1;
      double wmax = dual_tol;
      for (Index j = 0; j < n; ++j)
      {
         if (!in_passive[j] && w(j) > wmax)
         {
            wmax = w(j);
            t = j;
         }
      }
      if (t < 0)
      {
         break;
      }
      if (outer >= max_outer)
      {
         out.converged = false;
         break;
      }
      out.iterations = outer + 1;
      in_passive[t] = true;

      // Inner loop: keep the passive-set solution feasible.
      for (Index inner = 0; inner < 3 * n + 3; ++inner)
      {
         std::vector<Index> passive;
         for (Index j = 0; j < n; ++j)
         {
            if (in_passive[j])
            {
               passive.push_back(j);
            }
         }
         const Vector z = passive_solve(A, b, passive);

         bool feasible = true;
         for (Index i = 0; i < z.size(); ++i)
         {
            if (z(i) <= 0.0)
            {
               feasible = false;
               break;
            }
         }
         if (feasible)
         {
            x.setZero();
            for (std::size_t i = 0; i < passive.size(); ++i)
            {
               x(passive[i]) = z(static_cast<Index>(i));
            }
            break;
         }

         double alpha = std::numeric_limits<double>::infinity();
         for (std::size_t i = 0; i < passive.size(); ++i)
         {
            const double zi = z(static_cast<Index>(i));
            if (zi <= 0.0)
            {
               const double xi = x(passive[i]);
               alpha = std::min(alpha, xi / (xi - zi));
            }
         }
         for (std::size_t i = 0; i < passive.size(); ++i)
         {
            const Index j = passive[i];
            x(j) += alpha * (z(static_cast<Index>(i)) - x(j));
         }
         const double drop = 1e-14 * x.cwiseAbs().maxCoeff();
         for (const Index j : passive)
         {
            if (x(j) <= drop)
            {
               x(j) = 0.0;
               in_passive[j] = false;
            }
         }
      }
   }
   for (Index j = 0; j < n; ++j)
   {
      if (x(j) < 0.0)
      {
         x(j) = 0.0;
      }
   }
   return out;
}

} // namespace promhr::linalg
