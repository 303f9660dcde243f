// Copyright 2026 The promhr Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "promhr/problems.hpp"

#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace promhr::testing {

inline BarOptions small_bar(Index elements = 8, int steps = 4)
{
   BarOptions o;
   o.elements = elements;
   o.load_steps = steps;
   return o;
}

inline ConvectionDiffusionOptions small_cd(Index cells = 6, double t_final = 0.5)
{
   ConvectionDiffusionOptions o;
   o.cells_per_side = cells;
   o.t_final = t_final;
   return o;
}

inline std::vector<Parameter> alphas(std::initializer_list<double> values)
{
   std::vector<Parameter> out;
   for (double a : values)
   {
      out.push_back({a});
   }
   return out;
}

inline Matrix random_matrix(Index rows, Index cols, unsigned seed)
{
   std::mt19937_64 rng(seed);
   std::uniform_real_distribution<double> dist(-1.0, 1.0);
   Matrix M(rows, cols);
   for (Index j = 0; j < cols; ++j)
   {
      for (Index i = 0; i < rows; ++i)
      {
         M(i, j) = dist(rng);
      }
   }
   return M;
}

// Fresh directory under the system temp path, removed on destruction.
class ScratchDir
{
public:
   explicit ScratchDir(const std::string &tag)
   {
      std::random_device rd;
      path_ = std::filesystem::temp_directory_path() /
              ("promhr-" + tag + "-" + std::to_string(rd()));
      std::filesystem::create_directories(path_);
   }
   ~ScratchDir()
   {
      std::error_code ec;
      std::filesystem::remove_all(path_, ec);
   }
   ScratchDir(const ScratchDir &) = delete;
   ScratchDir &operator=(const ScratchDir &) = delete;
   const std::filesystem::path &path() const { return path_; }

private:
   std::filesystem::path path_;
};

} // namespace promhr::testing
