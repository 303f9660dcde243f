// Copyright 2026 The promhr Authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line driver for the reduced-order-model pipeline. Talks to the
// library exclusively through its C interface.
#include "promhr/promhr.h"

#include "CLI11.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

constexpr int kExitArtifact = PROMHR_ERR_ARTIFACT;

bool read_text(const std::string &path, std::string &out)
{
   std::ifstream in(path, std::ios::binary);
   if (!in)
   {
      return false;
   }
   std::ostringstream ss;
   ss << in.rdbuf();
   out = ss.str();
   return true;
}

int report(int rc)
{
   if (rc != PROMHR_OK)
   {
      std::cerr << "promhr: error: " << promhr_last_error() << "\n";
   }
   return rc;
}

struct Options
{
   std::string config;
   std::string out;
   std::vector<std::string> strategies;
   std::uint64_t seed = 0;
   std::string stage;
};

class Session
{
public:
   ~Session() { promhr_pipeline_close(handle_); }

   int open(const Options &opt, const std::string &config_text)
   {
      std::vector<const char *> names;
      for (const auto &s : opt.strategies)
      {
         names.push_back(s.c_str());
      }
      return report(promhr_pipeline_open(config_text.c_str(), opt.out.empty() ? nullptr : opt.out.c_str(),
                                         names.data(), names.size(), &handle_));
   }

   promhr_pipeline *get() const { return handle_; }

   void print_executed() const
   {
      size_t n = 0;
      promhr_pipeline_executed_count(handle_, &n);
      if (n == 0)
      {
         std::cout << "all stages up to date\n";
      }
      for (size_t i = 0; i < n; ++i)
      {
         const char *stage = nullptr;
         promhr_pipeline_executed_stage(handle_, i, &stage);
         std::cout << "ran " << stage << "\n";
      }
   }

private:
   promhr_pipeline *handle_ = nullptr;
};

} // namespace

int main(int argc, char **argv)
{
   CLI::App app{"Projection-based reduced order models with empirical cubature hyper-reduction"};
   app.require_subcommand(1);
   Options opt;

   const auto add_common = [&](CLI::App *cmd) {
      cmd->add_option("--config", opt.config, "Pipeline configuration (JSON)")->required();
      cmd->add_option("--out", opt.out, "Artifact directory (overrides output_dir)");
      cmd->add_option("--strategy", opt.strategies,
                      "Projection to run: galerkin, lspg, pg-jacobian, pg-residual (repeatable)");
      cmd->add_option("--seed", opt.seed, "Seed for randomized consistency checks");
   };

   auto *run = app.add_subcommand("run", "Run every stage that is not up to date");
   add_common(run);
   auto *stage = app.add_subcommand("stage", "Run a single stage");
   stage->add_option("name", opt.stage, "fom, pod, rom-train, left-basis, ecm, hrom or compare")
      ->required();
   add_common(stage);
   auto *validate = app.add_subcommand("validate", "Check a configuration and the problem Jacobians");
   add_common(validate);
   auto *list = app.add_subcommand("list-artifacts", "Print the artifact manifest");
   add_common(list);

   try
   {
      app.parse(argc, argv);
   }
   catch (const CLI::ParseError &e)
   {
      const int rc = app.exit(e);
      return rc == 0 ? 0 : PROMHR_ERR_VALIDATION;
   }

   std::string config_text;
   if (!read_text(opt.config, config_text))
   {
      std::cerr << "promhr: error: cannot read config " << opt.config << "\n";
      return kExitArtifact;
   }

   if (*validate)
   {
      if (const int rc = report(promhr_validate_config(config_text.c_str())))
      {
         return rc;
      }
      Session s;
      if (const int rc = s.open(opt, config_text))
      {
         return rc;
      }
      double worst = 0.0;
      if (const int rc = report(promhr_pipeline_check_jacobians(s.get(), opt.seed, 5, &worst)))
      {
         return rc;
      }
      std::cout << "config ok; Jacobian finite-difference mismatch " << worst << "\n";
      return worst <= 1e-4 ? PROMHR_OK : PROMHR_ERR_NUMERICAL;
   }

   Session s;
   if (const int rc = s.open(opt, config_text))
   {
      return rc;
   }
   const char *dir = nullptr;
   promhr_pipeline_output_dir(s.get(), &dir);

   if (*list)
   {
      size_t need = 0;
      promhr_pipeline_artifacts(s.get(), nullptr, 0, &need);
      std::string buf(need, '\0');
      promhr_pipeline_artifacts(s.get(), buf.data(), buf.size(), &need);
      std::cout << buf.c_str();
      return PROMHR_OK;
   }
   if (*run)
   {
      if (const int rc = report(promhr_pipeline_run(s.get())))
      {
         return rc;
      }
      s.print_executed();
      std::cout << "tables: " << dir << "/compare/tables.csv\n";
      return PROMHR_OK;
   }
   if (const int rc = report(promhr_pipeline_run_stage(s.get(), opt.stage.c_str())))
   {
      return rc;
   }
   s.print_executed();
   return PROMHR_OK;
}
