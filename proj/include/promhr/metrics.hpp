// Copyright 2026 The promhr Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "promhr/fom.hpp"

#include <string>
#include <vector>

namespace promhr {

/// ||u_approx - u||^2 / ||u||^2. Throws UndefinedMetric when ||u|| = 0.
double relative_error_snapshot(const Vector &u_approx, const Vector &u);

/// ||u_approx - u|| / ||u||, the square root of the above.
double relative_error_snapshot_unsquared(const Vector &u_approx, const Vector &u);

/// ||S_approx - S||_F / ||S||_F over identically laid-out snapshot matrices.
double overall_error(const Matrix &S_approx, const Matrix &S);

/// Per-column squared relative errors.
std::vector<double> snapshot_errors(const Matrix &S_approx, const Matrix &S);

struct RunCost
{
   double wall_time = 0.0;
   double element_evaluations = 0.0;   ///< summed over all iterations
};

RunCost run_cost(const std::vector<IterationTrace> &traces);

struct Speedup
{
   double wall_ratio = 1.0;   ///< a.wall_time / b.wall_time
   double work_ratio = 1.0;   ///< a.element_evaluations / b.element_evaluations
};

Speedup measure_speedup(const RunCost &a, const RunCost &b);

/// One table row: a strategy evaluated on one phase ("train" or "test").
struct ComparisonRow
{
   std::string phase;
   std::string strategy;
   std::string variable;
   double fom_vs_rom = 0.0;
   double rom_vs_hrom = 0.0;
   double fom_vs_hrom = 0.0;
   double work_ratio = 1.0;   ///< FOM element evaluations / HROM element evaluations
};

/// CSV with a fixed header, shortest round-trip decimals and LF line ends.
std::string render_comparison_tables(const std::vector<ComparisonRow> &rows);
std::vector<ComparisonRow> parse_comparison_tables(const std::string &csv);

} // namespace promhr
