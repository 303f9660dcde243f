// Copyright 2026 The promhr Authors
// SPDX-License-Identifier: Apache-2.0
#include "promhr/metrics.hpp"

#include "promhr/io.hpp"

#include <charconv>
#include <sstream>

namespace promhr {

double relative_error_snapshot(const Vector &u_approx, const Vector &u)
{
   if (u_approx.size() != u.size())
   {
      throw InvalidInput("relative error of vectors with different lengths");
   }
   const double ref = u.squaredNorm();
   if (ref == 0.0)
   {
      throw UndefinedMetric("relative error against a zero reference");
   }
   return (u_approx - u).squaredNorm() / ref;
}

double relative_error_snapshot_unsquared(const Vector &u_approx, const Vector &u)
{
   return std::sqrt(relative_error_snapshot(u_approx, u));
}

double overall_error(const Matrix &S_approx, const Matrix &S)
{
   if (S_approx.rows() != S.rows() || S_approx.cols() != S.cols())
   {
      throw InvalidInput("overall error of snapshot sets with different layouts");
   }
   const double ref = S.norm();
   if (ref == 0.0)
   {
      throw UndefinedMetric("overall error against a zero snapshot set");
   }
   return (S_approx - S).norm() / ref;
}

std::vector<double> snapshot_errors(const Matrix &S_approx, const Matrix &S)
{
   if (S_approx.rows() != S.rows() || S_approx.cols() != S.cols())
   {
      throw InvalidInput("snapshot errors of sets with different layouts");
   }
   std::vector<double> out;
   for (Index c = 0; c < S.cols(); ++c)
   {
      out.push_back(relative_error_snapshot(S_approx.col(c), S.col(c)));
   }
   return out;
}

RunCost run_cost(const std::vector<IterationTrace> &traces)
{
   RunCost c;
   for (const auto &t : traces)
   {
      c.wall_time += t.wall_time;
      for (Index n : t.elements_touched)
      {
         c.element_evaluations += static_cast<double>(n);
      }
   }
   return c;
}

Speedup measure_speedup(const RunCost &a, const RunCost &b)
{
   Speedup s;
   s.wall_ratio = b.wall_time > 0.0 ? a.wall_time / b.wall_time : 1.0;
   s.work_ratio = b.element_evaluations > 0.0 ? a.element_evaluations / b.element_evaluations : 1.0;
   return s;
}

namespace {

constexpr const char *kHeader =
   "phase,strategy,variable,fom_vs_rom,rom_vs_hrom,fom_vs_hrom,work_ratio";

double parse_number(const std::string &field)
{
   double v = 0.0;
   const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
   if (ec != std::errc() || ptr != field.data() + field.size())
   {
      throw InvalidInput("comparison table: bad number '" + field + "'");
   }
   return v;
}

} // namespace

std::string render_comparison_tables(const std::vector<ComparisonRow> &rows)
{
   std::string out = std::string(kHeader) + "\n";
   for (const auto &r : rows)
   {
      out += r.phase + "," + r.strategy + "," + r.variable + "," + io::format_double(r.fom_vs_rom) +
             "," + io::format_double(r.rom_vs_hrom) + "," + io::format_double(r.fom_vs_hrom) +
             "," + io::format_double(r.work_ratio) + "\n";
   }
   return out;
}

std::vector<ComparisonRow> parse_comparison_tables(const std::string &csv)
{
   std::istringstream in(csv);
   std::string line;
   if (!std::getline(in, line) || line != kHeader)
   {
      throw InvalidInput("comparison table: unexpected header");
   }
   std::vector<ComparisonRow> rows;
   while (std::getline(in, line))
   {
      if (line.empty())
      {
         continue;
      }
      std::vector<std::string> f;
      std::istringstream ls(line);
      std::string cell;
      while (std::getline(ls, cell, ','))
      {
         f.push_back(cell);
      }
      if (f.size() != 7)
      {
         throw InvalidInput("comparison table: expected 7 fields, got " + std::to_string(f.size()));
      }
      rows.push_back({f[0], f[1], f[2], parse_number(f[3]), parse_number(f[4]),
                      parse_number(f[5]), parse_number(f[6])});
   }
   return rows;
}

} // namespace promhr
