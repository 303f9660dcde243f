// Copyright 2026 The promhr Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "promhr/basis.hpp"
#include "promhr/ecm.hpp"
#include "promhr/metrics.hpp"
#include "promhr/problems.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace promhr {

enum class Strategy
{
   Galerkin,
   Lspg,
   PgJacobian,
   PgResidual
};

std::string to_string(Strategy s);
/// Throws ValidationError listing the valid names.
Strategy strategy_from_string(const std::string &name);
const std::vector<std::string> &strategy_names();

struct ProblemConfig
{
   std::string kind = "bar";   ///< "bar" | "convection-diffusion"
   BarOptions bar;
   ConvectionDiffusionOptions convection_diffusion;
};

std::unique_ptr<Problem> make_problem(const ProblemConfig &config);

struct Tolerances
{
   double pod = 1e-6;
   double left_jacobian = 1e-6;
   double left_residual = 1e-6;
   double ecm = 0.0;        ///< SVD truncation of the ECM training matrix
   double ecm_fit = 2.220446049250313e-16;
};

struct PipelineConfig
{
   int schema_version = 1;
   ProblemConfig problem;
   std::vector<Parameter> training_parameters;
   std::vector<Parameter> test_parameters;
   Tolerances tolerances;
   NewtonSettings solver;
   LeftTrainingOptions left_basis;
   EcmOptions ecm;
   bool ecm_include_iterates = true;
   std::vector<Strategy> strategies;
   std::string output_dir;
   std::uint64_t seed = 0;
};

/// Parses and validates a schema-version-1 JSON config. Every problem found is
/// reported in one ValidationError, each prefixed with its field path.
PipelineConfig parse_config(const std::string &text);

/// Canonical JSON of the fields a stage depends on (cumulative along the stage order).
std::string stage_config_json(const PipelineConfig &config, const std::string &stage);

const std::vector<std::string> &stage_names();

struct StageRecord
{
   std::string config_hash;
   std::map<std::string, std::string> inputs;    ///< relative path -> sha256
   std::map<std::string, std::string> outputs;
   std::string started;
   std::string finished;
};

struct ArtifactManifest
{
   std::map<std::string, StageRecord> stages;

   std::string to_json() const;
   static ArtifactManifest from_json(const std::string &text);
};

/// Staged offline/online driver over an artifact directory.
///
/// A stage is skipped when its manifest record carries the current config hash,
/// every recorded output is present with the recorded hash, every recorded
/// input still matches, and no upstream stage ran in this invocation. Missing
/// outputs trigger recomputation; outputs that are present but differ from the
/// record raise ArtifactError naming the file.
class Pipeline
{
public:
   Pipeline(PipelineConfig config, std::filesystem::path output_dir);
   ~Pipeline();
   Pipeline(const Pipeline &) = delete;
   Pipeline &operator=(const Pipeline &) = delete;

   void run();
   /// Runs one stage; upstream artifacts must already be present and consistent.
   void run_stage(const std::string &stage);

   const std::vector<std::string> &executed_stages() const { return executed_; }
   const ArtifactManifest &manifest() const { return manifest_; }
   const PipelineConfig &config() const { return config_; }
   const std::filesystem::path &output_dir() const { return dir_; }

   class Context;   ///< stage-side view of the artifact store

private:
   bool fresh(const std::string &stage) const;
   void execute(const std::string &stage);
   void save_manifest() const;

   PipelineConfig config_;
   std::filesystem::path dir_;
   std::unique_ptr<Problem> problem_;
   ArtifactManifest manifest_;
   std::vector<std::string> executed_;
};

/// Worst relative Frobenius mismatch between assembled and central-difference
/// Jacobians at `samples` random states drawn with the given seed.
double finite_difference_jacobian_check(const Problem &problem, const Parameter &mu,
                                        std::uint64_t seed, int samples);

} // namespace promhr
