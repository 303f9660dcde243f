// Copyright 2026 The promhr Authors
// SPDX-License-Identifier: Apache-2.0
#include "promhr/ecm.hpp"

#include "json.hpp"

#include <algorithm>
#include <set>

namespace promhr {

namespace {

void check_states(const Problem &problem, const std::vector<TrainingState> &states)
{
   if (states.empty())
   {
      throw InvalidInput("ECM training needs at least one state");
   }
   for (const auto &s : states)
   {
      if (s.u.size() != problem.num_dofs() || s.u_ref.size() != problem.num_dofs())
      {
         throw InvalidInput("ECM training state does not match the problem size");
      }
   }
}

void finish(EcmTrainingMatrix &t)
{
   t.b = t.X * Vector::Ones(t.X.cols());
   if (!linalg::all_finite(t.b))
   {
      throw InvalidInput("ECM training matrix has non-finite entries");
   }
}

} // namespace

EcmTrainingMatrix build_ecm_training_matrix(const Problem &problem, const Matrix &Psi,
                                            const std::vector<TrainingState> &states)
{
   check_states(problem, states);
   if (Psi.rows() != problem.num_dofs() || Psi.cols() < 1)
   {
      throw InvalidInput("ECM basis does not match the problem size");
   }
   const auto &assembly = problem.assembly();
   const Index m = Psi.cols();
   const Index L = problem.num_elements();
   std::vector<Matrix> Psi_e(static_cast<std::size_t>(L));
   for (Index e = 0; e < L; ++e)
   {
      Psi_e[static_cast<std::size_t>(e)] = gather_rows(assembly, e, Psi);
   }

   EcmTrainingMatrix t;
   t.block_rows = m;
   t.snapshots = static_cast<Index>(states.size());
   t.X.resize(m * t.snapshots, L);
   for (Index s = 0; s < t.snapshots; ++s)
   {
      const auto &st = states[static_cast<std::size_t>(s)];
      for (Index e = 0; e < L; ++e)
      {
         t.X.block(s * m, e, m, 1) = Psi_e[static_cast<std::size_t>(e)].transpose() *
                                     problem.element_residual(e, st.u, st.u_ref, st.ctx);
      }
   }
   finish(t);
   return t;
}

EcmTrainingMatrix build_lspg_ecm_training_matrix(const Problem &problem, const Matrix &Phi,
                                                 const std::vector<TrainingState> &states)
{
   check_states(problem, states);
   if (Phi.rows() != problem.num_dofs() || Phi.cols() < 1)
   {
      throw InvalidInput("ECM basis does not match the problem size");
   }
   const auto &assembly = problem.assembly();
   const Index n = Phi.cols();
   const Index L = problem.num_elements();

   EcmTrainingMatrix t;
   t.block_rows = n;
   t.snapshots = static_cast<Index>(states.size());
   t.X.resize(n * t.snapshots, L);
   for (Index s = 0; s < t.snapshots; ++s)
   {
      const auto &st = states[static_cast<std::size_t>(s)];
      const Vector R = assemble_residual(problem, st.u, st.u_ref, st.ctx);
      for (Index e = 0; e < L; ++e)
      {
         const Matrix JePhie = problem.element_jacobian(e, st.u, st.u_ref, st.ctx) *
                               gather_rows(assembly, e, Phi);
         t.X.block(s * n, e, n, 1) = JePhie.transpose() * gather_dofs(assembly, e, R);
      }
   }
   finish(t);
   return t;
}

CompressedTraining compress_training_matrix(const Matrix &X, double eps_ecm,
                                            const Vector *weighting, bool augment)
{
   if (X.rows() == 0 || X.cols() == 0)
   {
      throw InvalidInput("ECM: empty training matrix");
   }
   CompressedTraining c;
   c.weighting = weighting ? *weighting : Vector::Ones(X.cols());
   if (c.weighting.size() != X.cols() || !(c.weighting.minCoeff() > 0.0))
   {
      throw InvalidInput("ECM weighting vector must be positive with one entry per element");
   }
   const Matrix scaled = X * c.weighting.cwiseInverse().asDiagonal();
   const auto svd = linalg::truncated_svd(scaled, eps_ecm, false);
   c.svd_rank = svd.retained_rank();
   c.Theta = svd.V.transpose();

   if (augment)
   {
      Vector g = c.weighting;
      if (c.svd_rank > 0)
      {
         g -= c.Theta.transpose() * (c.Theta * g);
         g -= c.Theta.transpose() * (c.Theta * g);
      }
      const double norm = g.norm();
      if (norm > 1e-10 * c.weighting.norm())
      {
         c.Theta.conservativeResize(c.svd_rank + 1, Eigen::NoChange);
         c.Theta.row(c.svd_rank) = (g / norm).transpose();
         c.augmented = true;
      }
   }
   c.b_theta = c.Theta * c.weighting;
   return c;
}

namespace {

struct Support
{
   std::vector<Index> z;
   Vector w;
   double fit = 1.0;
};

// NNLS on the columns z, warm-started from the first `known` of them.
Support refit(const Matrix &Theta, const Vector &b, std::vector<Index> z, std::size_t known)
{
   Support s;
   if (z.empty())
   {
      s.w.resize(0);
      return s;
   }
   Matrix Tz(Theta.rows(), static_cast<Index>(z.size()));
   for (std::size_t k = 0; k < z.size(); ++k)
   {
      Tz.col(static_cast<Index>(k)) = Theta.col(z[k]);
   }
   std::vector<Index> warm(std::min(known, z.size()));
   for (std::size_t k = 0; k < warm.size(); ++k)
   {
      warm[k] = static_cast<Index>(k);
   }
   const Vector x = linalg::nonneg_least_squares(Tz, b, warm);
   const double top = x.maxCoeff();
   std::vector<double> kept_w;
   for (std::size_t k = 0; k < z.size(); ++k)
   {
      if (x(static_cast<Index>(k)) > 1e-12 * top)
      {
         s.z.push_back(z[k]);
         kept_w.push_back(x(static_cast<Index>(k)));
      }
   }
   s.w = Eigen::Map<Vector>(kept_w.data(), static_cast<Index>(kept_w.size()));
   Vector r = b;
   for (std::size_t k = 0; k < s.z.size(); ++k)
   {
      r -= s.w(static_cast<Index>(k)) * Theta.col(s.z[k]);
   }
   s.fit = r.norm() / b.norm();
   return s;
}

// Greedy growth from s until the fit reaches target. Elements in excluded are
// never offered; a non-zero size_cap stops growth once |z| reaches it.
void grow(const Matrix &Theta, const Vector &col_norms, const Vector &b, double target,
          const std::set<Index> &excluded, std::size_t size_cap, Index max_rounds, Support &s,
          std::vector<double> *history)
{
   const Index p = Theta.rows();
   std::set<Index> banned;
   for (Index round = 0; round < max_rounds && s.fit > target; ++round)
   {
      if (size_cap != 0 && s.z.size() >= size_cap)
      {
         break;
      }
      Vector r = b;
      for (std::size_t k = 0; k < s.z.size(); ++k)
      {
         r -= s.w(static_cast<Index>(k)) * Theta.col(s.z[k]);
      }
      Index best = -1;
      double best_cos = 0.0;
      for (Index e = 0; e < Theta.cols(); ++e)
      {
         if (col_norms(e) == 0.0 || banned.count(e) || excluded.count(e) ||
             std::find(s.z.begin(), s.z.end(), e) != s.z.end())
         {
            continue;
         }
         const double cosine = Theta.col(e).dot(r) / col_norms(e);
         if (cosine > best_cos)
         {
            best_cos = cosine;
            best = e;
         }
      }
      if (best < 0)
      {
         break;
      }
      auto z = s.z;
      z.push_back(best);
      Support next = refit(Theta, b, std::move(z), s.z.size());
      const bool dropped = std::find(next.z.begin(), next.z.end(), best) == next.z.end();
      if (dropped || static_cast<Index>(next.z.size()) > p)
      {
         banned.insert(best);
         if (!dropped)
         {
            continue;
         }
      }
      if (next.fit < s.fit)
      {
         banned.clear();
      }
      s = std::move(next);
      if (history)
      {
         history->push_back(s.fit);
      }
   }
}

} // namespace

EcmQuadrature select_elements(const Matrix &Theta, const Vector &b_theta, double eps_fit)
{
   if (Theta.rows() == 0 || Theta.cols() == 0)
   {
      throw InvalidInput("select_elements: empty Theta");
   }
   if (b_theta.size() != Theta.rows())
   {
      throw InvalidInput("select_elements: b has the wrong length");
   }
   if (!(eps_fit >= 0.0))
   {
      throw InvalidInput("select_elements: fit tolerance must be non-negative");
   }
   const double target = std::max(eps_fit, 1e-13);
   const Vector col_norms = Theta.colwise().norm().transpose();

   EcmQuadrature q;
   if (b_theta.norm() == 0.0)
   {
      q.omega.resize(0);
      return q;
   }

   Support s;
   grow(Theta, col_norms, b_theta, target, {}, 0, 10 * Theta.rows() + 10, s, &q.fit_history);

   // exchange pass: drop one element, forbid it, regrow for up to three rounds,
   // keep strictly smaller supports
   bool improved = s.fit <= target;
   while (improved)
   {
      improved = false;
      for (std::size_t i = 0; i < s.z.size() && !improved; ++i)
      {
         Support t = s;
         const Index removed = t.z[i];
         t.z.erase(t.z.begin() + static_cast<std::ptrdiff_t>(i));
         const std::size_t remaining = t.z.size();
         t = refit(Theta, b_theta, std::move(t.z), remaining);
         grow(Theta, col_norms, b_theta, target, {removed}, s.z.size(), 3, t, nullptr);
         if (t.fit <= target && t.z.size() < s.z.size())
         {
            s = std::move(t);
            improved = true;
         }
      }
   }
   q.converged = s.fit <= target;

   std::vector<std::size_t> order(s.z.size());
   for (std::size_t k = 0; k < order.size(); ++k)
   {
      order[k] = k;
   }
   std::sort(order.begin(), order.end(),
             [&](std::size_t a, std::size_t b) { return s.z[a] < s.z[b]; });
   q.z.resize(s.z.size());
   q.omega.resize(static_cast<Index>(s.z.size()));
   for (std::size_t k = 0; k < order.size(); ++k)
   {
      q.z[k] = s.z[order[k]];
      q.omega(static_cast<Index>(k)) = s.w(static_cast<Index>(order[k]));
   }
   q.fit_residual = s.fit;
   return q;
}

EcmQuadrature train_quadrature(const Problem &problem, const EcmTrainingMatrix &training,
                               double eps_ecm, double eps_fit, const EcmOptions &options)
{
   if (training.num_elements() != problem.num_elements())
   {
      throw InvalidInput("ECM training matrix does not match the mesh");
   }
   Vector g = Vector::Ones(problem.num_elements());
   if (options.volume_weighting)
   {
      for (Index e = 0; e < problem.num_elements(); ++e)
      {
         g(e) = problem.element_measure(e);
      }
   }
   // elements whose integrand vanishes on every training state cannot help the
   // fit but would still match the appended volume row
   std::vector<Index> active;
   for (Index e = 0; e < training.num_elements(); ++e)
   {
      if (training.X.col(e).cwiseAbs().maxCoeff() > 0.0)
      {
         active.push_back(e);
      }
   }
   if (active.empty())
   {
      throw InvalidInput("ECM: training matrix is identically zero");
   }
   Matrix X(training.X.rows(), static_cast<Index>(active.size()));
   Vector ga(static_cast<Index>(active.size()));
   for (std::size_t k = 0; k < active.size(); ++k)
   {
      X.col(static_cast<Index>(k)) = training.X.col(active[k]);
      ga(static_cast<Index>(k)) = g(active[k]);
   }
   if (options.normalize_blocks && training.block_rows > 0)
   {
      for (Index r0 = 0; r0 + training.block_rows <= X.rows(); r0 += training.block_rows)
      {
         auto block = X.middleRows(r0, training.block_rows);
         const double norm = block.norm();
         if (norm > 0.0)
         {
            block /= norm;
         }
      }
   }
   const auto c = compress_training_matrix(X, eps_ecm, &ga, options.augment);
   if (c.Theta.rows() == 0)
   {
      throw InvalidInput("ECM: training matrix has rank zero");
   }
   EcmQuadrature q = select_elements(c.Theta, c.b_theta, eps_fit);
   for (std::size_t k = 0; k < q.z.size(); ++k)
   {
      q.omega(static_cast<Index>(k)) /= ga(q.z[k]);
      q.z[k] = active[static_cast<std::size_t>(q.z[k])];
   }
   return q;
}

std::vector<Index> build_complementary_mesh(const std::vector<Index> &z, const Mesh &mesh)
{
   const auto patches = element_patches(mesh);
   std::set<Index> out;
   for (Index e : z)
   {
      if (e < 0 || e >= mesh.num_elements())
      {
         throw InvalidInput("complementary mesh: element " + std::to_string(e) + " out of range");
      }
      const auto &p = patches[static_cast<std::size_t>(e)].patch;
      out.insert(p.begin(), p.end());
   }
   return {out.begin(), out.end()};
}

double quadrature_exactness(const EcmTrainingMatrix &training, const EcmQuadrature &q)
{
   double worst = 0.0;
   const Index m = training.block_rows;
   for (Index s = 0; s < training.snapshots; ++s)
   {
      const auto block = training.X.middleRows(s * m, m);
      Vector approx = Vector::Zero(m);
      for (std::size_t k = 0; k < q.z.size(); ++k)
      {
         approx += q.omega(static_cast<Index>(k)) * block.col(q.z[k]);
      }
      const double scale = block.norm();
      const double err = (approx - training.b.segment(s * m, m)).norm();
      if (scale > 0.0)
      {
         worst = std::max(worst, err / scale);
      }
      else if (err > 0.0)
      {
         worst = std::numeric_limits<double>::infinity();
      }
   }
   return worst;
}

std::string quadrature_to_json(const EcmQuadrature &q,
                               const std::map<std::string, std::string> &provenance)
{
   nlohmann::ordered_json doc;
   doc["elements"] = q.z;
   doc["weights"] = std::vector<double>(q.omega.data(), q.omega.data() + q.omega.size());
   doc["fit_residual"] = q.fit_residual;
   doc["converged"] = q.converged;
   doc["fit_history"] = q.fit_history;
   nlohmann::ordered_json prov = nlohmann::ordered_json::object();
   for (const auto &[k, v] : provenance)
   {
      prov[k] = v;
   }
   doc["provenance"] = prov;
   return doc.dump(1) + "\n";
}

EcmQuadrature quadrature_from_json(const std::string &text)
{
   EcmQuadrature q;
   try
   {
      const auto doc = nlohmann::json::parse(text);
      q.z = doc.at("elements").get<std::vector<Index>>();
      const auto w = doc.at("weights").get<std::vector<double>>();
      q.omega = Eigen::Map<const Vector>(w.data(), static_cast<Index>(w.size()));
      q.fit_residual = doc.at("fit_residual").get<double>();
      q.converged = doc.at("converged").get<bool>();
      q.fit_history = doc.value("fit_history", std::vector<double>{});
   }
   catch (const nlohmann::json::exception &e)
   {
      throw ArtifactError(std::string("quadrature file: ") + e.what());
   }
   if (q.z.size() != static_cast<std::size_t>(q.omega.size()))
   {
      throw ArtifactError("quadrature file: element and weight counts differ");
   }
   for (std::size_t k = 1; k < q.z.size(); ++k)
   {
      if (!(q.z[k - 1] < q.z[k]))
      {
         throw ArtifactError("quadrature file: element ids must be strictly ascending");
      }
   }
   for (Index k = 0; k < q.omega.size(); ++k)
   {
      if (!(q.omega(k) > 0.0))
      {
         throw ArtifactError("quadrature file: weights must be positive");
      }
   }
   return q;
}

} // namespace promhr
