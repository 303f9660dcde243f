// Copyright 2026 The promhr Authors
// SPDX-License-Identifier: Apache-2.0
#include "promhr/pipeline.hpp"

#include "promhr/hrom.hpp"
#include "promhr/io.hpp"

#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <functional>
#include <random>
#include <set>

namespace promhr {

using nlohmann::json;
using nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// strategies and problems

const std::vector<std::string> &strategy_names()
{
   static const std::vector<std::string> names = {"galerkin", "lspg", "pg-jacobian", "pg-residual"};
   return names;
}

std::string to_string(Strategy s)
{
   return strategy_names()[static_cast<std::size_t>(s)];
}

Strategy strategy_from_string(const std::string &name)
{
   const auto &names = strategy_names();
   const auto it = std::find(names.begin(), names.end(), name);
   if (it == names.end())
   {
      std::string valid;
      for (const auto &n : names)
      {
         valid += (valid.empty() ? "" : ", ") + n;
      }
      throw ValidationError("unknown strategy '" + name + "' (valid: " + valid + ")");
   }
   return static_cast<Strategy>(it - names.begin());
}

std::unique_ptr<Problem> make_problem(const ProblemConfig &config)
{
   if (config.kind == "bar")
   {
      return std::make_unique<SaintVenantBar>(config.bar);
   }
   if (config.kind == "convection-diffusion")
   {
      return std::make_unique<ConvectionDiffusion>(config.convection_diffusion);
   }
   throw ValidationError("unknown problem kind '" + config.kind + "'");
}

const std::vector<std::string> &stage_names()
{
   static const std::vector<std::string> names = {"fom", "pod", "rom-train", "left-basis",
                                                  "ecm", "hrom", "compare"};
   return names;
}

// ---------------------------------------------------------------------------
// config parsing

namespace {

class ConfigReader
{
public:
   std::vector<std::string> errors;

   void fail(const std::string &path, const std::string &msg) { errors.push_back(path + ": " + msg); }

   bool object(const json &j, const std::string &path)
   {
      if (!j.is_object())
      {
         fail(path, "must be an object");
         return false;
      }
      return true;
   }

   void allowed(const json &obj, const std::string &path, std::initializer_list<const char *> keys)
   {
      for (const auto &item : obj.items())
      {
         if (std::none_of(keys.begin(), keys.end(), [&](const char *k) { return item.key() == k; }))
         {
            fail(join(path, item.key()), "unknown key");
         }
      }
   }

   static std::string join(const std::string &path, const std::string &key)
   {
      return path.empty() ? key : path + "." + key;
   }

   void number(const json &obj, const std::string &path, const char *key, double &out,
               double lo, double hi, bool lo_open = false)
   {
      if (!obj.contains(key))
      {
         return;
      }
      const auto &v = obj.at(key);
      const std::string p = join(path, key);
      if (!v.is_number())
      {
         fail(p, "must be a number");
         return;
      }
      const double x = v.get<double>();
      if (!(lo_open ? x > lo : x >= lo) || !(x <= hi))
      {
         fail(p, "must lie in " + std::string(lo_open ? "(" : "[") + io::format_double(lo) + ", " +
                    io::format_double(hi) + "]");
         return;
      }
      out = x;
   }

   template <class Int>
   void integer(const json &obj, const std::string &path, const char *key, Int &out, long long lo,
                long long hi)
   {
      if (!obj.contains(key))
      {
         return;
      }
      const auto &v = obj.at(key);
      const std::string p = join(path, key);
      if (!v.is_number_integer())
      {
         fail(p, "must be an integer");
         return;
      }
      const long long x = v.get<long long>();
      if (x < lo || x > hi)
      {
         fail(p, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
         return;
      }
      out = static_cast<Int>(x);
   }

   void boolean(const json &obj, const std::string &path, const char *key, bool &out)
   {
      if (!obj.contains(key))
      {
         return;
      }
      if (!obj.at(key).is_boolean())
      {
         fail(join(path, key), "must be true or false");
         return;
      }
      out = obj.at(key).get<bool>();
   }
};

constexpr double kHuge = 1e300;

void read_problem(ConfigReader &r, const json &j, ProblemConfig &p)
{
   if (!r.object(j, "problem"))
   {
      return;
   }
   if (!j.contains("kind") || !j.at("kind").is_string())
   {
      r.fail("problem.kind", "required string (\"bar\" or \"convection-diffusion\")");
      return;
   }
   p.kind = j.at("kind").get<std::string>();
   if (p.kind == "bar")
   {
      r.allowed(j, "problem", {"kind", "elements", "length", "young", "area", "end_load",
                               "body_load", "load_steps"});
      r.integer(j, "problem", "elements", p.bar.elements, 1, 100000);
      r.number(j, "problem", "length", p.bar.length, 0.0, kHuge, true);
      r.number(j, "problem", "young", p.bar.young, 0.0, kHuge, true);
      r.number(j, "problem", "area", p.bar.area, 0.0, kHuge, true);
      r.number(j, "problem", "end_load", p.bar.end_load, -kHuge, kHuge);
      r.number(j, "problem", "body_load", p.bar.body_load, -kHuge, kHuge);
      r.integer(j, "problem", "load_steps", p.bar.load_steps, 1, 100000);
   }
   else if (p.kind == "convection-diffusion")
   {
      auto &c = p.convection_diffusion;
      r.allowed(j, "problem", {"kind", "cells_per_side", "dt", "t_final", "source_amplitude", "supg"});
      r.integer(j, "problem", "cells_per_side", c.cells_per_side, 1, 1000);
      r.number(j, "problem", "dt", c.dt, 0.0, kHuge, true);
      r.number(j, "problem", "t_final", c.t_final, 0.0, kHuge, true);
      r.number(j, "problem", "source_amplitude", c.source_amplitude, -kHuge, kHuge);
      r.boolean(j, "problem", "supg", c.supg);
      if (c.t_final < c.dt)
      {
         r.fail("problem.t_final", "must be at least dt");
      }
   }
   else
   {
      r.fail("problem.kind", "unknown problem '" + p.kind + "' (valid: bar, convection-diffusion)");
   }
}

void read_parameters(ConfigReader &r, const json &root, const char *key, const std::string &kind,
                     std::vector<Parameter> &out, bool required)
{
   if (!root.contains(key))
   {
      if (required)
      {
         r.fail(key, "required non-empty list");
      }
      return;
   }
   const auto &list = root.at(key);
   if (!list.is_array() || (required && list.empty()))
   {
      r.fail(key, required ? "must be a non-empty list" : "must be a list");
      return;
   }
   for (std::size_t i = 0; i < list.size(); ++i)
   {
      const std::string path = std::string(key) + "[" + std::to_string(i) + "]";
      const auto &item = list[i];
      Parameter mu;
      if (item.is_array())
      {
         for (const auto &v : item)
         {
            if (!v.is_number())
            {
               r.fail(path, "entries must be numbers");
               break;
            }
            mu.push_back(v.get<double>());
         }
      }
      else if (item.is_number())
      {
         mu.push_back(item.get<double>());
      }
      else if (item.is_object() && kind == "bar")
      {
         r.allowed(item, path, {"alpha"});
         double alpha = -1.0;
         r.number(item, path, "alpha", alpha, 0.0, kHuge);
         mu.push_back(alpha);
      }
      else if (item.is_object() && kind == "convection-diffusion")
      {
         r.allowed(item, path, {"density", "conductivity", "specific_heat"});
         double rho = -1.0, k = -1.0, cp = -1.0;
         r.number(item, path, "density", rho, 0.0, kHuge, true);
         r.number(item, path, "conductivity", k, 0.0, kHuge, true);
         r.number(item, path, "specific_heat", cp, 0.0, kHuge, true);
         if (rho > 0.0 && k > 0.0 && cp > 0.0)
         {
            mu.push_back(ConvectionDiffusion::effective_diffusivity(rho, k, cp));
         }
         else
         {
            continue;
         }
      }
      else
      {
         r.fail(path, "must be a number, a list of numbers or a material object");
         continue;
      }
      if (mu.size() != 1)
      {
         r.fail(path, "expected exactly one parameter value");
         continue;
      }
      if (kind == "bar" && !(mu[0] >= 0.0))
      {
         r.fail(path, "alpha must be non-negative");
      }
      if (kind == "convection-diffusion" && !(mu[0] > 0.0))
      {
         r.fail(path, "diffusivity must be positive");
      }
      out.push_back(mu);
   }
}

} // namespace

PipelineConfig parse_config(const std::string &text)
{
   json root;
   try
   {
      root = json::parse(text);
   }
   catch (const json::exception &e)
   {
      throw ValidationError(std::string("config is not valid JSON: ") + e.what());
   }
   ConfigReader r;
   PipelineConfig cfg;
   if (!r.object(root, "config"))
   {
      throw ValidationError(r.errors.front());
   }
   r.allowed(root, "", {"schema_version", "problem", "training_parameters", "test_parameters",
                        "tolerances", "solver", "left_basis", "ecm", "strategies", "output_dir",
                        "seed"});
   if (!root.contains("schema_version") || !root.at("schema_version").is_number_integer() ||
       root.at("schema_version").get<long long>() != 1)
   {
      r.fail("schema_version", "required and must equal 1");
   }
   if (root.contains("problem"))
   {
      read_problem(r, root.at("problem"), cfg.problem);
   }
   else
   {
      r.fail("problem", "required");
   }
   const std::string kind = cfg.problem.kind;
   if (kind == "convection-diffusion")
   {
      cfg.tolerances = {1e-3, 1e-3, 1e-3, 1e-6, 1e-6};
   }
   read_parameters(r, root, "training_parameters", kind, cfg.training_parameters, true);
   read_parameters(r, root, "test_parameters", kind, cfg.test_parameters, false);

   if (root.contains("tolerances") && r.object(root.at("tolerances"), "tolerances"))
   {
      const auto &t = root.at("tolerances");
      r.allowed(t, "tolerances", {"pod", "left_jacobian", "left_residual", "ecm", "ecm_fit"});
      r.number(t, "tolerances", "pod", cfg.tolerances.pod, 0.0, 1.0);
      r.number(t, "tolerances", "left_jacobian", cfg.tolerances.left_jacobian, 0.0, 1.0);
      r.number(t, "tolerances", "left_residual", cfg.tolerances.left_residual, 0.0, 1.0);
      r.number(t, "tolerances", "ecm", cfg.tolerances.ecm, 0.0, 1.0);
      r.number(t, "tolerances", "ecm_fit", cfg.tolerances.ecm_fit, 0.0, 1.0);
   }
   if (root.contains("solver") && r.object(root.at("solver"), "solver"))
   {
      const auto &s = root.at("solver");
      r.allowed(s, "solver", {"max_iterations", "rel_tolerance", "abs_tolerance", "step_length",
                              "line_search", "max_halvings"});
      r.integer(s, "solver", "max_iterations", cfg.solver.max_iterations, 1, 100000);
      r.number(s, "solver", "rel_tolerance", cfg.solver.rel_tolerance, 0.0, 1.0, true);
      r.number(s, "solver", "abs_tolerance", cfg.solver.abs_tolerance, 0.0, kHuge, true);
      r.number(s, "solver", "step_length", cfg.solver.step_length, 0.0, 1.0, true);
      r.boolean(s, "solver", "line_search", cfg.solver.line_search);
      r.integer(s, "solver", "max_halvings", cfg.solver.max_halvings, 0, 60);
   }
   if (root.contains("left_basis") && r.object(root.at("left_basis"), "left_basis"))
   {
      const auto &l = root.at("left_basis");
      r.allowed(l, "left_basis", {"source", "include_converged_residuals"});
      if (l.contains("source"))
      {
         const auto &src = l.at("source");
         if (src == "lspg")
         {
            cfg.left_basis.source = LeftTrainingSource::Lspg;
         }
         else if (src == "fom")
         {
            cfg.left_basis.source = LeftTrainingSource::Fom;
         }
         else
         {
            r.fail("left_basis.source", "must be \"lspg\" or \"fom\"");
         }
      }
      r.boolean(l, "left_basis", "include_converged_residuals",
                cfg.left_basis.include_converged_residuals);
   }
   if (root.contains("ecm") && r.object(root.at("ecm"), "ecm"))
   {
      const auto &e = root.at("ecm");
      r.allowed(e, "ecm", {"include_iterates", "volume_weighting", "augment", "normalize_blocks"});
      r.boolean(e, "ecm", "include_iterates", cfg.ecm_include_iterates);
      r.boolean(e, "ecm", "volume_weighting", cfg.ecm.volume_weighting);
      r.boolean(e, "ecm", "augment", cfg.ecm.augment);
      r.boolean(e, "ecm", "normalize_blocks", cfg.ecm.normalize_blocks);
   }
   if (root.contains("strategies"))
   {
      const auto &s = root.at("strategies");
      if (!s.is_array() || s.empty())
      {
         r.fail("strategies", "must be a non-empty list");
      }
      else
      {
         for (const auto &name : s)
         {
            try
            {
               const Strategy st = strategy_from_string(name.is_string() ? name.get<std::string>()
                                                                         : name.dump());
               if (std::find(cfg.strategies.begin(), cfg.strategies.end(), st) == cfg.strategies.end())
               {
                  cfg.strategies.push_back(st);
               }
            }
            catch (const ValidationError &e)
            {
               r.fail("strategies", e.what());
            }
         }
      }
   }
   else
   {
      cfg.strategies = {Strategy::Galerkin, Strategy::Lspg, Strategy::PgJacobian,
                        Strategy::PgResidual};
   }
   if (root.contains("output_dir"))
   {
      if (root.at("output_dir").is_string())
      {
         cfg.output_dir = root.at("output_dir").get<std::string>();
      }
      else
      {
         r.fail("output_dir", "must be a string");
      }
   }
   r.integer(root, "", "seed", cfg.seed, 0, std::numeric_limits<long long>::max());

   if (!r.errors.empty())
   {
      std::string msg = "invalid config:";
      for (const auto &e : r.errors)
      {
         msg += "\n  " + e;
      }
      throw ValidationError(msg);
   }
   return cfg;
}

std::string stage_config_json(const PipelineConfig &cfg, const std::string &stage)
{
   const auto &names = stage_names();
   const auto it = std::find(names.begin(), names.end(), stage);
   if (it == names.end())
   {
      throw ValidationError("unknown stage '" + stage + "'");
   }
   const auto level = it - names.begin();
   ordered_json j;
   j["schema_version"] = cfg.schema_version;
   const auto &p = cfg.problem;
   ordered_json problem;
   problem["kind"] = p.kind;
   if (p.kind == "bar")
   {
      problem["elements"] = p.bar.elements;
      problem["length"] = p.bar.length;
      problem["young"] = p.bar.young;
      problem["area"] = p.bar.area;
      problem["end_load"] = p.bar.end_load;
      problem["body_load"] = p.bar.body_load;
      problem["load_steps"] = p.bar.load_steps;
   }
   else
   {
      const auto &c = p.convection_diffusion;
      problem["cells_per_side"] = c.cells_per_side;
      problem["dt"] = c.dt;
      problem["t_final"] = c.t_final;
      problem["source_amplitude"] = c.source_amplitude;
      problem["supg"] = c.supg;
   }
   j["problem"] = problem;
   j["training_parameters"] = cfg.training_parameters;
   const auto &s = cfg.solver;
   j["solver"] = {{"max_iterations", s.max_iterations}, {"rel_tolerance", s.rel_tolerance},
                  {"abs_tolerance", s.abs_tolerance}, {"step_length", s.step_length},
                  {"line_search", s.line_search}, {"max_halvings", s.max_halvings}};
   if (level >= 1)
   {
      j["tolerances"]["pod"] = cfg.tolerances.pod;
   }
   if (level >= 2)
   {
      j["left_basis"] = {{"source", cfg.left_basis.source == LeftTrainingSource::Lspg ? "lspg" : "fom"},
                         {"include_converged_residuals", cfg.left_basis.include_converged_residuals}};
   }
   if (level >= 3)
   {
      j["tolerances"]["left_jacobian"] = cfg.tolerances.left_jacobian;
      j["tolerances"]["left_residual"] = cfg.tolerances.left_residual;
   }
   if (level >= 4)
   {
      j["tolerances"]["ecm"] = cfg.tolerances.ecm;
      j["tolerances"]["ecm_fit"] = cfg.tolerances.ecm_fit;
      j["ecm"] = {{"include_iterates", cfg.ecm_include_iterates},
                  {"volume_weighting", cfg.ecm.volume_weighting},
                  {"augment", cfg.ecm.augment},
                  {"normalize_blocks", cfg.ecm.normalize_blocks}};
      std::vector<std::string> strategies;
      for (Strategy st : cfg.strategies)
      {
         strategies.push_back(to_string(st));
      }
      j["strategies"] = strategies;
   }
   if (level >= 6)
   {
      j["test_parameters"] = cfg.test_parameters;
   }
   return j.dump();
}

// ---------------------------------------------------------------------------
// manifest

std::string ArtifactManifest::to_json() const
{
   ordered_json doc;
   doc["format"] = "promhr-manifest";
   doc["version"] = 1;
   ordered_json st = ordered_json::object();
   for (const auto &name : stage_names())
   {
      const auto it = stages.find(name);
      if (it == stages.end())
      {
         continue;
      }
      const auto &r = it->second;
      st[name] = {{"config_hash", r.config_hash},
                  {"inputs", r.inputs},
                  {"outputs", r.outputs},
                  {"started", r.started},
                  {"finished", r.finished}};
   }
   doc["stages"] = st;
   return doc.dump(1) + "\n";
}

ArtifactManifest ArtifactManifest::from_json(const std::string &text)
{
   ArtifactManifest m;
   try
   {
      const auto doc = json::parse(text);
      if (doc.at("format") != "promhr-manifest" || doc.at("version") != 1)
      {
         throw ArtifactError("manifest.json: unsupported format");
      }
      for (const auto &item : doc.at("stages").items())
      {
         StageRecord r;
         const auto &v = item.value();
         r.config_hash = v.at("config_hash").get<std::string>();
         r.inputs = v.at("inputs").get<std::map<std::string, std::string>>();
         r.outputs = v.at("outputs").get<std::map<std::string, std::string>>();
         r.started = v.value("started", "");
         r.finished = v.value("finished", "");
         m.stages[item.key()] = std::move(r);
      }
   }
   catch (const json::exception &e)
   {
      throw ArtifactError(std::string("manifest.json is malformed: ") + e.what());
   }
   return m;
}

namespace {

std::string utc_now()
{
   const auto now = std::chrono::system_clock::now();
   const std::time_t t = std::chrono::system_clock::to_time_t(now);
   std::tm tm{};
   gmtime_r(&t, &tm);
   char buf[32];
   std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
   return buf;
}

std::string config_hash(const PipelineConfig &cfg, const std::string &stage)
{
   return io::sha256_hex(stage_config_json(cfg, stage));
}

} // namespace

// ---------------------------------------------------------------------------
// stage execution

class Pipeline::Context
{
public:
   Context(Pipeline &p, StageRecord &record) : p_(p), record_(record) {}

   std::filesystem::path path(const std::string &rel) const { return p_.dir_ / rel; }

   std::string input_bytes(const std::string &rel)
   {
      const auto full = path(rel);
      std::string expected;
      for (const auto &[stage, rec] : p_.manifest_.stages)
      {
         const auto it = rec.outputs.find(rel);
         if (it != rec.outputs.end())
         {
            expected = it->second;
         }
      }
      if (!std::filesystem::exists(full))
      {
         throw ArtifactError("missing upstream artifact " + full.string());
      }
      if (expected.empty())
      {
         throw ArtifactError("artifact " + full.string() + " has no manifest record");
      }
      std::string bytes = io::read_file(full);
      const std::string sha = io::sha256_hex(bytes);
      if (sha != expected)
      {
         throw ArtifactError("hash mismatch for " + full.string() +
                             " (stale or corrupted; expected " + expected + ", found " + sha + ")");
      }
      record_.inputs[rel] = sha;
      return bytes;
   }

   Matrix input_matrix(const std::string &rel)
   {
      try
      {
         return io::decode_matrix(input_bytes(rel));
      }
      catch (const InvalidInput &e)
      {
         throw ArtifactError(path(rel).string() + ": " + e.what());
      }
   }

   std::string input_sha(const std::string &rel) const
   {
      const auto it = record_.inputs.find(rel);
      return it == record_.inputs.end() ? std::string() : it->second;
   }

   void output_bytes(const std::string &rel, const std::string &bytes)
   {
      const auto full = path(rel);
      std::filesystem::create_directories(full.parent_path());
      io::write_file_atomic(full, bytes);
      record_.outputs[rel] = io::sha256_hex(bytes);
   }

   void output_matrix(const std::string &rel, const Matrix &M) { output_bytes(rel, io::encode_matrix(M)); }

   const PipelineConfig &cfg() const { return p_.config_; }
   const Problem &problem() const { return *p_.problem_; }

private:
   Pipeline &p_;
   StageRecord &record_;
};

namespace {

struct Bases
{
   Matrix Phi;
   Matrix PsiJ;
   Matrix PsiR;

   const Matrix *left(Strategy s) const
   {
      switch (s)
      {
      case Strategy::PgJacobian: return &PsiJ;
      case Strategy::PgResidual: return &PsiR;
      default: return nullptr;
      }
   }
};

bool needs_left(const std::vector<Strategy> &strategies, Strategy s)
{
   return std::find(strategies.begin(), strategies.end(), s) != strategies.end();
}

Bases load_bases(Pipeline::Context &ctx, const std::vector<Strategy> &strategies);

RomStepFunction rom_step(Strategy s, const Problem &problem, const Bases &b,
                         const NewtonSettings &settings)
{
   switch (s)
   {
   case Strategy::Galerkin:
      return [&problem, &b, settings](const Vector &u, const StepContext &c) {
         return solve_timestep_galerkin(problem, b.Phi, u, c, settings);
      };
   case Strategy::Lspg:
      return [&problem, &b, settings](const Vector &u, const StepContext &c) {
         return solve_timestep_lspg(problem, b.Phi, u, c, settings);
      };
   default:
   {
      const Matrix *Psi = b.left(s);
      return [&problem, &b, Psi, settings](const Vector &u, const StepContext &c) {
         return solve_timestep_pg(problem, b.Phi, *Psi, u, c, settings);
      };
   }
   }
}

RomStepFunction hrom_step(Strategy s, const Problem &problem, const Bases &b,
                          const HyperReducedOperatorSet &ops, const NewtonSettings &settings)
{
   switch (s)
   {
   case Strategy::Galerkin:
      return [&problem, &b, &ops, settings](const Vector &u, const StepContext &c) {
         return solve_timestep_hrom_galerkin(problem, b.Phi, ops.quadrature, u, c, settings);
      };
   case Strategy::Lspg:
      return [&problem, &b, &ops, settings](const Vector &u, const StepContext &c) {
         return solve_timestep_hrom_lspg(problem, b.Phi, ops.quadrature, ops.complementary, u, c,
                                         settings);
      };
   default:
   {
      const Matrix *Psi = b.left(s);
      return [&problem, &b, &ops, Psi, settings](const Vector &u, const StepContext &c) {
         return solve_timestep_hrom_pg(problem, b.Phi, *Psi, ops.quadrature, u, c, settings);
      };
   }
   }
}

Bases load_bases(Pipeline::Context &ctx, const std::vector<Strategy> &strategies)
{
   Bases b;
   b.Phi = ctx.input_matrix("basis/phi.prmf");
   if (needs_left(strategies, Strategy::PgJacobian))
   {
      b.PsiJ = ctx.input_matrix("basis/psi_jacobian.prmf");
   }
   if (needs_left(strategies, Strategy::PgResidual))
   {
      b.PsiR = ctx.input_matrix("basis/psi_residual.prmf");
   }
   return b;
}

std::string basis_json(const ReducedBasis &basis, const std::string &source_sha)
{
   ordered_json j;
   j["role"] = to_string(basis.role);
   j["tolerance"] = basis.tolerance;
   j["rows"] = basis.matrix.rows();
   j["rank"] = basis.cols();
   j["snapshots"] = basis.snapshot_count;
   j["spectrum"] = std::vector<double>(basis.spectrum.data(),
                                       basis.spectrum.data() + basis.spectrum.size());
   j["source_sha256"] = source_sha;
   return j.dump(1) + "\n";
}

HyperReducedOperatorSet load_operators(Pipeline::Context &ctx, Strategy s)
{
   HyperReducedOperatorSet ops;
   ops.quadrature = quadrature_from_json(ctx.input_bytes("ecm/" + to_string(s) + "_quadrature.json"));
   if (s == Strategy::Lspg)
   {
      try
      {
         ops.complementary = json::parse(ctx.input_bytes("ecm/lspg_complementary.json"))
                                .at("elements")
                                .get<std::vector<Index>>();
      }
      catch (const json::exception &e)
      {
         throw ArtifactError(std::string("ecm/lspg_complementary.json: ") + e.what());
      }
   }
   return ops;
}

double fom_element_evaluations(const std::vector<SnapshotTag> &tags, Index elements)
{
   double total = 0.0;
   for (const auto &t : tags)
   {
      total += static_cast<double>(t.iterations + 1) * static_cast<double>(elements);
   }
   return total;
}

RunCost report_cost(const std::string &report)
{
   RunCost c;
   try
   {
      const auto doc = json::parse(report);
      for (const auto &step : doc.at("timesteps"))
      {
         c.wall_time += step.at("wall_time").get<double>();
         for (const auto &n : step.at("elements_touched_per_iteration"))
         {
            c.element_evaluations += n.get<double>();
         }
      }
   }
   catch (const json::exception &e)
   {
      throw ArtifactError(std::string("solver report: ") + e.what());
   }
   return c;
}

void stage_fom(Pipeline::Context &ctx)
{
   const auto set = run_fom_campaign(ctx.problem(), ctx.cfg().training_parameters, ctx.cfg().solver);
   ctx.output_matrix("fom/train_states.prmf", set.data);
   ctx.output_bytes("fom/train_states.json", snapshot_manifest_json(set));
}

void stage_pod(Pipeline::Context &ctx)
{
   const Matrix A = ctx.input_matrix("fom/train_states.prmf");
   const auto phi = build_right_basis(A, ctx.cfg().tolerances.pod);
   if (phi.cols() == 0)
   {
      throw ConfigurationError("POD produced an empty basis (zero snapshot matrix?)");
   }
   ctx.output_matrix("basis/phi.prmf", phi.matrix);
   ctx.output_bytes("basis/phi.json", basis_json(phi, ctx.input_sha("fom/train_states.prmf")));
}

void stage_rom_train(Pipeline::Context &ctx)
{
   const Matrix Phi = ctx.input_matrix("basis/phi.prmf");
   auto data = collect_left_training(ctx.problem(), Phi, ctx.cfg().training_parameters,
                                     ctx.cfg().solver, ctx.cfg().left_basis);
   ctx.output_matrix("rom/S_J.prmf", data.S_J);
   ctx.output_matrix("rom/S_R.prmf", data.S_R);
   ordered_json j;
   j["source"] = ctx.cfg().left_basis.source == LeftTrainingSource::Lspg ? "lspg" : "fom";
   j["S_J_columns"] = data.S_J.cols();
   j["S_R_columns"] = data.S_R.cols();
   j["residual_counts"] = data.residual_counts;
   ctx.output_bytes("rom/left_training.json", j.dump(1) + "\n");
}

void stage_left_basis(Pipeline::Context &ctx)
{
   const Matrix Phi = ctx.input_matrix("basis/phi.prmf");
   const Matrix S_J = ctx.input_matrix("rom/S_J.prmf");
   const Matrix S_R = ctx.input_matrix("rom/S_R.prmf");
   const auto psi_j = build_left_basis_jacobian(S_J, ctx.cfg().tolerances.left_jacobian);
   ReducedBasis psi_r;
   psi_r.role = BasisRole::LeftResidual;
   psi_r.tolerance = ctx.cfg().tolerances.left_residual;
   psi_r.matrix.resize(Phi.rows(), 0);
   if (S_R.cols() > 0)
   {
      psi_r = build_left_basis_residual(S_R, ctx.cfg().tolerances.left_residual);
   }
   ctx.output_matrix("basis/psi_jacobian.prmf", psi_j.matrix);
   ctx.output_matrix("basis/psi_residual.prmf", psi_r.matrix);

   TrainingLog log;
   log.add("psi_jacobian", psi_j);
   log.add("psi_residual", psi_r);
   ordered_json j;
   j["n"] = Phi.cols();
   j["m_jacobian"] = psi_j.cols();
   j["m_residual"] = psi_r.cols();
   j["S_J_columns"] = S_J.cols();
   j["S_R_columns"] = S_R.cols();
   j["containment_defect"] = psi_r.cols() > 0 ? containment_defect(psi_j.matrix, psi_r.matrix) : 0.0;
   j["training_log"] = ordered_json::parse(log.to_json());
   ctx.output_bytes("basis/left.json", j.dump(1) + "\n");
}

void stage_ecm(Pipeline::Context &ctx)
{
   const auto &cfg = ctx.cfg();
   const Problem &problem = ctx.problem();
   const Bases b = load_bases(ctx, cfg.strategies);
   NewtonSettings recording = cfg.solver;
   recording.record_iterates = cfg.ecm_include_iterates;
   for (Strategy s : cfg.strategies)
   {
      const std::string name = to_string(s);
      const auto campaign = run_rom_campaign(problem, cfg.training_parameters,
                                             rom_step(s, problem, b, recording), name + " ROM");
      const auto states = cfg.ecm_include_iterates
                             ? training_states_with_iterates(problem, cfg.training_parameters, campaign)
                             : training_states(problem, cfg.training_parameters, campaign.states,
                                               campaign.tags);
      const auto training = s == Strategy::Lspg
                               ? build_lspg_ecm_training_matrix(problem, b.Phi, states)
                               : build_ecm_training_matrix(problem, s == Strategy::Galerkin ? b.Phi
                                                                                            : *b.left(s),
                                                           states);
      const auto q = train_quadrature(problem, training, cfg.tolerances.ecm, cfg.tolerances.ecm_fit,
                                      cfg.ecm);
      const std::string traj = "rom/" + name + "_train_states.prmf";
      ctx.output_matrix(traj, campaign.states);
      ctx.output_bytes("rom/" + name + "_train_report.json", solver_report_json(name, campaign));
      std::map<std::string, std::string> prov = {
         {"basis_sha256", ctx.input_sha(s == Strategy::PgJacobian   ? "basis/psi_jacobian.prmf"
                                        : s == Strategy::PgResidual ? "basis/psi_residual.prmf"
                                                                    : "basis/phi.prmf")},
         {"trajectories_sha256", io::sha256_hex(io::encode_matrix(campaign.states))},
         {"training_rows", std::to_string(training.X.rows())},
         {"exactness", io::format_double(quadrature_exactness(training, q))}};
      ctx.output_bytes("ecm/" + name + "_quadrature.json", quadrature_to_json(q, prov));
      if (s == Strategy::Lspg)
      {
         ordered_json j;
         j["elements"] = build_complementary_mesh(q.z, problem.mesh());
         ctx.output_bytes("ecm/lspg_complementary.json", j.dump() + "\n");
      }
   }
}

void stage_hrom(Pipeline::Context &ctx)
{
   const auto &cfg = ctx.cfg();
   const Problem &problem = ctx.problem();
   const Bases b = load_bases(ctx, cfg.strategies);
   for (Strategy s : cfg.strategies)
   {
      const std::string name = to_string(s);
      const auto ops = load_operators(ctx, s);
      const auto campaign = run_rom_campaign(problem, cfg.training_parameters,
                                             hrom_step(s, problem, b, ops, cfg.solver),
                                             name + " HROM");
      ctx.output_matrix("hrom/" + name + "_train_states.prmf", campaign.states);
      ctx.output_bytes("hrom/" + name + "_train_report.json", solver_report_json(name, campaign));
   }
}

void stage_compare(Pipeline::Context &ctx)
{
   const auto &cfg = ctx.cfg();
   const Problem &problem = ctx.problem();
   const Bases b = load_bases(ctx, cfg.strategies);
   const Matrix fom_train = ctx.input_matrix("fom/train_states.prmf");
   const auto fom_train_tags = snapshot_tags_from_json(ctx.input_bytes("fom/train_states.json"));
   const double L = static_cast<double>(problem.num_elements());

   SnapshotSet fom_test;
   if (!cfg.test_parameters.empty())
   {
      fom_test = run_fom_campaign(problem, cfg.test_parameters, cfg.solver);
      ctx.output_matrix("fom/test_states.prmf", fom_test.data);
      ctx.output_bytes("fom/test_states.json", snapshot_manifest_json(fom_test));
   }

   std::vector<ComparisonRow> rows;
   ordered_json summary = ordered_json::array();
   for (Strategy s : cfg.strategies)
   {
      const std::string name = to_string(s);
      const auto ops = load_operators(ctx, s);
      const Matrix rom_train = ctx.input_matrix("rom/" + name + "_train_states.prmf");
      const Matrix hrom_train = ctx.input_matrix("hrom/" + name + "_train_states.prmf");
      const RunCost hrom_train_cost = report_cost(ctx.input_bytes("hrom/" + name + "_train_report.json"));
      const double fom_train_work = fom_element_evaluations(fom_train_tags, static_cast<Index>(L));

      ComparisonRow train{"train", name, "u", overall_error(rom_train, fom_train),
                          overall_error(hrom_train, rom_train), overall_error(hrom_train, fom_train),
                          fom_train_work / hrom_train_cost.element_evaluations};
      rows.push_back(train);

      ordered_json entry;
      entry["strategy"] = name;
      entry["selected_elements"] = ops.quadrature.z.size();
      entry["complementary_elements"] = ops.complementary.size();
      entry["train_work_ratio"] = train.work_ratio;

      if (!cfg.test_parameters.empty())
      {
         const auto rom = run_rom_campaign(problem, cfg.test_parameters,
                                           rom_step(s, problem, b, cfg.solver), name + " ROM");
         const auto hrom = run_rom_campaign(problem, cfg.test_parameters,
                                            hrom_step(s, problem, b, ops, cfg.solver), name + " HROM");
         ctx.output_matrix("rom/" + name + "_test_states.prmf", rom.states);
         ctx.output_matrix("hrom/" + name + "_test_states.prmf", hrom.states);
         const RunCost hrom_cost = run_cost(hrom.traces);
         const RunCost rom_cost = run_cost(rom.traces);
         ComparisonRow test{"test", name, "u", overall_error(rom.states, fom_test.data),
                            overall_error(hrom.states, rom.states),
                            overall_error(hrom.states, fom_test.data),
                            fom_element_evaluations(fom_test.tags, static_cast<Index>(L)) /
                               hrom_cost.element_evaluations};
         rows.push_back(test);
         const auto speed = measure_speedup(rom_cost, hrom_cost);
         entry["test_work_ratio"] = test.work_ratio;
         entry["test_rom_over_hrom_wall_ratio"] = speed.wall_ratio;
      }
      summary.push_back(entry);
   }
   std::stable_sort(rows.begin(), rows.end(), [](const ComparisonRow &a, const ComparisonRow &b) {
      return a.phase == "train" && b.phase == "test";
   });
   ctx.output_bytes("compare/tables.csv", render_comparison_tables(rows));
   ctx.output_bytes("compare/summary.json", summary.dump(1) + "\n");
}

} // namespace

Pipeline::Pipeline(PipelineConfig config, std::filesystem::path output_dir)
   : config_(std::move(config)), dir_(std::move(output_dir))
{
   if (dir_.empty())
   {
      throw ValidationError("output_dir: no output directory given");
   }
   problem_ = make_problem(config_.problem);
   for (const auto &mu : config_.training_parameters)
   {
      problem_->check_parameter(mu);
   }
   const auto manifest_path = dir_ / "manifest.json";
   if (std::filesystem::exists(manifest_path))
   {
      manifest_ = ArtifactManifest::from_json(io::read_file(manifest_path));
   }
}

Pipeline::~Pipeline() = default;

bool Pipeline::fresh(const std::string &stage) const
{
   const auto it = manifest_.stages.find(stage);
   if (it == manifest_.stages.end() || it->second.config_hash != config_hash(config_, stage))
   {
      return false;
   }
   const auto &rec = it->second;
   for (const auto &[rel, sha] : rec.outputs)
   {
      if (!std::filesystem::exists(dir_ / rel))
      {
         return false;
      }
   }
   for (const auto &[rel, sha] : rec.outputs)
   {
      if (io::sha256_file(dir_ / rel) != sha)
      {
         throw ArtifactError("hash mismatch for " + (dir_ / rel).string() +
                             " (modified since stage '" + stage + "' wrote it)");
      }
   }
   for (const auto &[rel, sha] : rec.inputs)
   {
      if (!std::filesystem::exists(dir_ / rel) || io::sha256_file(dir_ / rel) != sha)
      {
         return false;
      }
   }
   return true;
}

void Pipeline::execute(const std::string &stage)
{
   StageRecord record;
   record.config_hash = config_hash(config_, stage);
   record.started = utc_now();
   Context ctx(*this, record);
   static const std::map<std::string, std::function<void(Context &)>> table = {
      {"fom", stage_fom},   {"pod", stage_pod},   {"rom-train", stage_rom_train},
      {"left-basis", stage_left_basis}, {"ecm", stage_ecm}, {"hrom", stage_hrom},
      {"compare", stage_compare}};
   std::filesystem::create_directories(dir_);
   try
   {
      table.at(stage)(ctx);
   }
   catch (const DivergenceError &e)
   {
      throw DivergenceError("stage " + stage + ": " + e.what(), e.trace());
   }
   catch (const SingularSystem &e)
   {
      throw SingularSystem("stage " + stage + ": " + e.what(), e.column());
   }
   record.finished = utc_now();
   manifest_.stages[stage] = std::move(record);
   executed_.push_back(stage);
   save_manifest();
}

void Pipeline::save_manifest() const
{
   io::write_file_atomic(dir_ / "manifest.json", manifest_.to_json());
}

void Pipeline::run()
{
   bool upstream_ran = false;
   for (const auto &stage : stage_names())
   {
      if (!upstream_ran && fresh(stage))
      {
         continue;
      }
      execute(stage);
      upstream_ran = true;
   }
}

void Pipeline::run_stage(const std::string &stage)
{
   const auto &names = stage_names();
   if (std::find(names.begin(), names.end(), stage) == names.end())
   {
      throw ValidationError("unknown stage '" + stage + "'");
   }
   if (!fresh(stage))
   {
      execute(stage);
   }
}

double finite_difference_jacobian_check(const Problem &problem, const Parameter &mu,
                                        std::uint64_t seed, int samples)
{
   problem.check_parameter(mu);
   std::mt19937_64 rng(seed);
   std::uniform_real_distribution<double> unif(-1e-2, 1e-2);
   const auto grid = problem.time_grid();
   const auto &assembly = problem.assembly();
   double worst = 0.0;
   for (int s = 0; s < samples; ++s)
   {
      Vector u(problem.num_dofs()), u_ref(problem.num_dofs()), v(problem.num_dofs());
      for (Index i = 0; i < u.size(); ++i)
      {
         u(i) = unif(rng);
         u_ref(i) = unif(rng);
         v(i) = unif(rng);
      }
      const StepContext ctx = problem.step_context(mu, static_cast<std::size_t>(rng() % grid.size()));

      for (Index e = 0; e < problem.num_elements(); ++e)
      {
         const Vector ue = gather_dofs(assembly, e, u);
         const Vector ue_ref = gather_dofs(assembly, e, u_ref);
         const Matrix J = problem.local_jacobian(e, ue, ue_ref, ctx);
         Matrix fd(J.rows(), J.cols());
         for (Index j = 0; j < ue.size(); ++j)
         {
            const double h = 1e-6 * (1.0 + std::abs(ue(j)));
            Vector up = ue, um = ue;
            up(j) += h;
            um(j) -= h;
            fd.col(j) = (problem.local_residual(e, up, ue_ref, ctx) -
                         problem.local_residual(e, um, ue_ref, ctx)) / (2.0 * h);
         }
         const double scale = J.norm();
         if (scale > 0.0)
         {
            worst = std::max(worst, (fd - J).norm() / scale);
         }
      }

      const SparseMatrix J = assemble_jacobian(problem, u, u_ref, ctx);
      const double h = 1e-6 * (1.0 + u.cwiseAbs().maxCoeff()) / std::max(v.norm(), 1e-300);
      const Vector fd = (assemble_residual(problem, u + h * v, u_ref, ctx) -
                         assemble_residual(problem, u - h * v, u_ref, ctx)) / (2.0 * h);
      const Vector Jv = J * v;
      if (Jv.norm() > 0.0)
      {
         worst = std::max(worst, (fd - Jv).norm() / Jv.norm());
      }
   }
   return worst;
}

} // namespace promhr
