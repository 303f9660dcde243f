// Copyright 2026 The promhr Authors
// SPDX-License-Identifier: Apache-2.0
#include "promhr/promhr.h"

#include "promhr/io.hpp"
#include "promhr/pipeline.hpp"

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <memory>
#include <string>

struct promhr_pipeline
{
   std::unique_ptr<promhr::Pipeline> impl;
   std::string dir;
};

namespace {

thread_local std::string last_error;

int fail(int code, const std::string &what)
{
   last_error = what;
   return code;
}

template <class F>
int guarded(F &&f)
{
   using namespace promhr;
   try
   {
      last_error.clear();
      f();
      return PROMHR_OK;
   }
   catch (const ValidationError &e)
   {
      return fail(PROMHR_ERR_VALIDATION, e.what());
   }
   catch (const InvalidInput &e)
   {
      return fail(PROMHR_ERR_VALIDATION, e.what());
   }
   catch (const ArtifactError &e)
   {
      return fail(PROMHR_ERR_ARTIFACT, e.what());
   }
   catch (const DivergenceError &e)
   {
      return fail(PROMHR_ERR_NUMERICAL, e.what());
   }
   catch (const SingularSystem &e)
   {
      return fail(PROMHR_ERR_NUMERICAL, e.what());
   }
   catch (const ConfigurationError &e)
   {
      return fail(PROMHR_ERR_NUMERICAL, e.what());
   }
   catch (const AssemblyError &e)
   {
      return fail(PROMHR_ERR_NUMERICAL, e.what());
   }
   catch (const UndefinedMetric &e)
   {
      return fail(PROMHR_ERR_NUMERICAL, e.what());
   }
   catch (const std::filesystem::filesystem_error &e)
   {
      return fail(PROMHR_ERR_ARTIFACT, e.what());
   }
   catch (const std::exception &e)
   {
      return fail(PROMHR_ERR_INTERNAL, e.what());
   }
   catch (...)
   {
      return fail(PROMHR_ERR_INTERNAL, "unknown error");
   }
}

int null_argument(const char *name)
{
   return fail(PROMHR_ERR_VALIDATION, std::string(name) + " must not be NULL");
}

} // namespace

extern "C" {

const char *promhr_version(void)
{
   return "1.0.0";
}

const char *promhr_last_error(void)
{
   return last_error.c_str();
}

int promhr_validate_config(const char *config_json)
{
   if (config_json == nullptr)
   {
      return null_argument("config_json");
   }
   return guarded([&] {
      const auto cfg = promhr::parse_config(config_json);
      promhr::make_problem(cfg.problem);
   });
}

int promhr_pipeline_open(const char *config_json, const char *output_dir,
                         const char *const *strategies, size_t strategy_count,
                         promhr_pipeline **out)
{
   if (config_json == nullptr)
   {
      return null_argument("config_json");
   }
   if (out == nullptr)
   {
      return null_argument("out");
   }
   if (strategy_count > 0 && strategies == nullptr)
   {
      return null_argument("strategies");
   }
   *out = nullptr;
   return guarded([&] {
      auto cfg = promhr::parse_config(config_json);
      if (output_dir != nullptr)
      {
         cfg.output_dir = output_dir;
      }
      if (strategy_count > 0)
      {
         cfg.strategies.clear();
         for (size_t i = 0; i < strategy_count; ++i)
         {
            const auto s = promhr::strategy_from_string(strategies[i] ? strategies[i] : "");
            if (std::find(cfg.strategies.begin(), cfg.strategies.end(), s) == cfg.strategies.end())
            {
               cfg.strategies.push_back(s);
            }
         }
      }
      auto handle = std::make_unique<promhr_pipeline>();
      handle->dir = cfg.output_dir;
      handle->impl = std::make_unique<promhr::Pipeline>(std::move(cfg), handle->dir);
      *out = handle.release();
   });
}

void promhr_pipeline_close(promhr_pipeline *pipeline)
{
   delete pipeline;
}

int promhr_pipeline_run(promhr_pipeline *pipeline)
{
   if (pipeline == nullptr)
   {
      return null_argument("pipeline");
   }
   return guarded([&] { pipeline->impl->run(); });
}

int promhr_pipeline_run_stage(promhr_pipeline *pipeline, const char *stage)
{
   if (pipeline == nullptr)
   {
      return null_argument("pipeline");
   }
   if (stage == nullptr)
   {
      return null_argument("stage");
   }
   return guarded([&] { pipeline->impl->run_stage(stage); });
}

int promhr_pipeline_executed_count(const promhr_pipeline *pipeline, size_t *count)
{
   if (pipeline == nullptr || count == nullptr)
   {
      return null_argument(pipeline ? "count" : "pipeline");
   }
   *count = pipeline->impl->executed_stages().size();
   return PROMHR_OK;
}

int promhr_pipeline_executed_stage(const promhr_pipeline *pipeline, size_t index, const char **stage)
{
   if (pipeline == nullptr || stage == nullptr)
   {
      return null_argument(pipeline ? "stage" : "pipeline");
   }
   const auto &done = pipeline->impl->executed_stages();
   if (index >= done.size())
   {
      return fail(PROMHR_ERR_VALIDATION, "executed stage index out of range");
   }
   *stage = done[index].c_str();
   return PROMHR_OK;
}

int promhr_pipeline_artifacts(const promhr_pipeline *pipeline, char *buffer, size_t capacity,
                              size_t *required)
{
   if (pipeline == nullptr || required == nullptr)
   {
      return null_argument(pipeline ? "required" : "pipeline");
   }
   std::string text;
   const auto &stages = pipeline->impl->manifest().stages;
   for (const auto &name : promhr::stage_names())
   {
      const auto it = stages.find(name);
      if (it == stages.end())
      {
         continue;
      }
      for (const auto &[path, sha] : it->second.outputs)
      {
         text += name + "\t" + path + "\t" + sha + "\n";
      }
   }
   *required = text.size() + 1;
   if (buffer != nullptr && capacity > 0)
   {
      const size_t n = std::min(capacity - 1, text.size());
      std::memcpy(buffer, text.data(), n);
      buffer[n] = '\0';
   }
   return PROMHR_OK;
}

int promhr_pipeline_output_dir(const promhr_pipeline *pipeline, const char **dir)
{
   if (pipeline == nullptr || dir == nullptr)
   {
      return null_argument(pipeline ? "dir" : "pipeline");
   }
   *dir = pipeline->dir.c_str();
   return PROMHR_OK;
}

int promhr_pipeline_check_jacobians(const promhr_pipeline *pipeline, uint64_t seed, int samples,
                                    double *worst_relative_error)
{
   if (pipeline == nullptr || worst_relative_error == nullptr)
   {
      return null_argument(pipeline ? "worst_relative_error" : "pipeline");
   }
   if (samples < 1)
   {
      return fail(PROMHR_ERR_VALIDATION, "samples must be positive");
   }
   return guarded([&] {
      const auto &cfg = pipeline->impl->config();
      const auto problem = promhr::make_problem(cfg.problem);
      *worst_relative_error = promhr::finite_difference_jacobian_check(
         *problem, cfg.training_parameters.front(), seed, samples);
   });
}

int promhr_matrix_read(const char *path, size_t *rows, size_t *cols, double *data, size_t capacity)
{
   if (path == nullptr || rows == nullptr || cols == nullptr)
   {
      return null_argument(path ? "rows/cols" : "path");
   }
   return guarded([&] {
      promhr::Matrix M;
      try
      {
         M = promhr::io::read_matrix(path);
      }
      catch (const promhr::InvalidInput &e)
      {
         throw promhr::ArtifactError(std::string(path) + ": " + e.what());
      }
      *rows = static_cast<size_t>(M.rows());
      *cols = static_cast<size_t>(M.cols());
      if (data != nullptr)
      {
         if (capacity < static_cast<size_t>(M.size()))
         {
            throw promhr::ValidationError("matrix buffer too small");
         }
         std::memcpy(data, M.data(), sizeof(double) * static_cast<size_t>(M.size()));
      }
   });
}

} // extern "C"
