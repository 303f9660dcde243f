// Copyright 2026 The promhr Authors
// SPDX-License-Identifier: Apache-2.0
#include "promhr/problems.hpp"

#include "promhr/errors.hpp"

#include <cmath>

namespace promhr {

double load_scaling(double alpha, double c)
{
   if (!(alpha >= 0.0))
   {
      throw InvalidInput("load_scaling: alpha must be non-negative");
   }
   return c * std::sqrt(alpha);
}

double source_term_pulse(double x, double y, double amplitude)
{
   const double r2 = x * x + y * y;
   if (r2 >= 1.0)
   {
      return 0.0;
   }
   const double d = r2 - 0.5;
   return amplitude * std::exp(-50.0 * d * d);
}

// ---------------------------------------------------------------------------
// Saint-Venant bar

namespace {

Mesh bar_mesh(const BarOptions &o)
{
   if (o.elements < 1)
   {
      throw InvalidInput("bar needs at least one element");
   }
   Mesh mesh;
   mesh.dimension = 1;
   for (Index i = 0; i <= o.elements; ++i)
   {
      mesh.node_coords.push_back({o.length * static_cast<double>(i) / static_cast<double>(o.elements), 0.0});
   }
   for (Index e = 0; e < o.elements; ++e)
   {
      mesh.elements.push_back({e, e + 1});
   }
   mesh.dirichlet_dofs = {0};
   return mesh;
}

} // namespace

SaintVenantBar::SaintVenantBar(BarOptions options)
   : Problem(bar_mesh(options)), options_(options)
{
   if (options_.load_steps < 1)
   {
      throw InvalidInput("bar needs at least one load step");
   }
}

std::vector<double> SaintVenantBar::time_grid() const
{
   std::vector<double> t;
   for (int i = 1; i <= options_.load_steps; ++i)
   {
      t.push_back(static_cast<double>(i) / options_.load_steps);
   }
   return t;
}

double SaintVenantBar::element_length(Index e) const
{
   const auto &conn = mesh().elements[static_cast<std::size_t>(e)];
   const double h = mesh().node_coords[static_cast<std::size_t>(conn[1])][0] -
                    mesh().node_coords[static_cast<std::size_t>(conn[0])][0];
   if (!(h > 0.0))
   {
      throw AssemblyError("bar element " + std::to_string(e) + " has non-positive length");
   }
   return h;
}

double SaintVenantBar::element_measure(Index e) const
{
   return element_length(e);
}

Vector SaintVenantBar::local_residual(Index e, const Vector &ue, const Vector &,
                                      const StepContext &ctx) const
{
   check_parameter(ctx.mu);
   const double h = element_length(e);
   const double grad = (ue(1) - ue(0)) / h;
   const double strain = grad + 0.5 * grad * grad;
   const double axial = options_.young * options_.area * strain * (1.0 + grad);

   const double body = 0.5 * h * ctx.time * load_scaling(ctx.mu[0], options_.body_load);

   Vector R(2);
   R(0) = -axial - body;
   R(1) = axial - body;
   if (e == num_elements() - 1)
   {
      R(1) -= ctx.time * load_scaling(ctx.mu[0], options_.end_load);
   }
   return R;
}

Matrix SaintVenantBar::local_jacobian(Index e, const Vector &ue, const Vector &,
                                      const StepContext &ctx) const
{
   check_parameter(ctx.mu);
   const double h = element_length(e);
   const double grad = (ue(1) - ue(0)) / h;
   const double strain = grad + 0.5 * grad * grad;
   const double k = options_.young * options_.area / h *
                    ((1.0 + grad) * (1.0 + grad) + strain);
   Matrix J(2, 2);
   J << k, -k, -k, k;
   return J;
}

// ---------------------------------------------------------------------------
// Convection-diffusion

namespace {

Mesh unit_square_mesh(Index n)
{
   if (n < 1)
   {
      throw InvalidInput("convection-diffusion mesh needs at least one cell per side");
   }
   Mesh mesh;
   mesh.dimension = 2;
   const auto id = [n](Index i, Index j) { return j * (n + 1) + i; };
   for (Index j = 0; j <= n; ++j)
   {
      for (Index i = 0; i <= n; ++i)
      {
         mesh.node_coords.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n});
         if (i == 0 || j == 0 || i == n || j == n)
         {
            mesh.dirichlet_dofs.push_back(id(i, j));
         }
      }
   }
   for (Index j = 0; j < n; ++j)
   {
      for (Index i = 0; i < n; ++i)
      {
         mesh.elements.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
         mesh.elements.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
      }
   }
   return mesh;
}

} // namespace

ConvectionDiffusion::ConvectionDiffusion(ConvectionDiffusionOptions options)
   : Problem(unit_square_mesh(options.cells_per_side)), options_(options)
{
   if (!(options_.dt > 0.0) || !(options_.t_final >= options_.dt))
   {
      throw InvalidInput("convection-diffusion needs 0 < dt <= t_final");
   }
   geometry_.reserve(static_cast<std::size_t>(num_elements()));
   for (Index e = 0; e < num_elements(); ++e)
   {
      const auto &conn = mesh().elements[static_cast<std::size_t>(e)];
      Eigen::Matrix<double, 3, 2> X;
      for (int a = 0; a < 3; ++a)
      {
         const auto &c = mesh().node_coords[static_cast<std::size_t>(conn[static_cast<std::size_t>(a)])];
         X(a, 0) = c[0];
         X(a, 1) = c[1];
      }
      const double det = (X(1, 0) - X(0, 0)) * (X(2, 1) - X(0, 1)) -
                         (X(2, 0) - X(0, 0)) * (X(1, 1) - X(0, 1));
      if (!(det > 0.0))
      {
         throw AssemblyError("triangle " + std::to_string(e) + " is degenerate or inverted");
      }
      Geometry g;
      g.area = 0.5 * det;
      g.h = std::sqrt(2.0 * g.area);
      // grad N_a = (y_b - y_c, x_c - x_b) / det for cyclic (a, b, c)
      for (int a = 0; a < 3; ++a)
      {
         const int b = (a + 1) % 3;
         const int c = (a + 2) % 3;
         g.grad(a, 0) = (X(b, 1) - X(c, 1)) / det;
         g.grad(a, 1) = (X(c, 0) - X(b, 0)) / det;
      }
      for (int q = 0; q < 3; ++q)
      {
         g.qp.row(q) = 0.5 * (X.row(q) + X.row((q + 1) % 3));
      }
      geometry_.push_back(g);
   }
}

std::vector<double> ConvectionDiffusion::time_grid() const
{
   const auto steps = static_cast<int>(std::llround(options_.t_final / options_.dt));
   std::vector<double> t;
   for (int i = 1; i <= steps; ++i)
   {
      t.push_back(options_.dt * i);
   }
   return t;
}

double ConvectionDiffusion::element_measure(Index e) const
{
   return geometry_[static_cast<std::size_t>(e)].area;
}

double ConvectionDiffusion::effective_diffusivity(double density, double conductivity,
                                                  double specific_heat)
{
   return 1.0e5 * conductivity / (density * specific_heat);
}

void ConvectionDiffusion::linear_system(Index e, const Vector &ue_ref, const StepContext &ctx,
                                        Eigen::Matrix3d &J, Eigen::Vector3d &f) const
{
   check_parameter(ctx.mu);
   const double eps = ctx.mu[0];
   if (!(eps > 0.0))
   {
      throw InvalidInput("diffusivity must be positive");
   }
   const Geometry &g = geometry_[static_cast<std::size_t>(e)];
   const double dt = ctx.dt;
   const double w = g.area / 3.0;

   J = (eps * g.area) * (g.grad * g.grad.transpose());
   f.setZero();
   for (int q = 0; q < 3; ++q)
   {
      // edge midpoint q lies between local nodes q and q+1
      Eigen::Vector3d N = Eigen::Vector3d::Zero();
      N(q) = 0.5;
      N((q + 1) % 3) = 0.5;
      const double x = g.qp(q, 0);
      const double y = g.qp(q, 1);
      const Eigen::Vector2d a(-y, x);
      const Eigen::Vector3d a_grad = g.grad * a;   // a . grad N_i
      const double s = source_term_pulse(x, y, options_.source_amplitude);
      const double uref_q = N.dot(ue_ref);

      Eigen::Vector3d test = N;
      if (options_.supg)
      {
         const double anorm = a.norm();
         const double tau = 1.0 / std::sqrt(std::pow(2.0 / dt, 2) +
                                            std::pow(2.0 * anorm / g.h, 2) +
                                            std::pow(4.0 * eps / (g.h * g.h), 2));
         test += tau * a_grad;
      }
      // strong-form operator applied to N_j: N_j/dt + a.grad N_j
      J += w * test * (N / dt + a_grad).transpose();
      f += w * test * (uref_q / dt + s);
   }
}

Vector ConvectionDiffusion::local_residual(Index e, const Vector &ue, const Vector &ue_ref,
                                           const StepContext &ctx) const
{
   Eigen::Matrix3d J;
   Eigen::Vector3d f;
   linear_system(e, ue_ref, ctx, J, f);
   return J * ue - f;
}

Matrix ConvectionDiffusion::local_jacobian(Index e, const Vector &, const Vector &ue_ref,
                                           const StepContext &ctx) const
{
   Eigen::Matrix3d J;
   Eigen::Vector3d f;
   linear_system(e, ue_ref, ctx, J, f);
   return J;
}

// ---------------------------------------------------------------------------
// Scalar toy

namespace {

Mesh single_node_mesh()
{
   Mesh mesh;
   mesh.dimension = 1;
   mesh.node_coords = {{0.0, 0.0}};
   mesh.elements = {{0}};
   return mesh;
}

} // namespace

ScalarQuadratic::ScalarQuadratic(double c) : Problem(single_node_mesh()), c_(c) {}

Vector ScalarQuadratic::local_residual(Index, const Vector &ue, const Vector &,
                                       const StepContext &) const
{
   Vector R(1);
   R(0) = ue(0) * ue(0) - c_;
   return R;
}

Matrix ScalarQuadratic::local_jacobian(Index, const Vector &ue, const Vector &,
                                       const StepContext &) const
{
   Matrix J(1, 1);
   J(0, 0) = 2.0 * ue(0);
   return J;
}

} // namespace promhr
