#pragma once

#include <string>
#include <vector>

#include "goalex/coverage.hpp"
#include "goalex/env.hpp"
#include "goalex/replay.hpp"

namespace goalex {

void write_coverage_csv(const std::string& path, const CoverageStats& stats);

// Diversity accounting for cube-world data: distinct (cx,cy,top_face)
// triples and per-color transition counts over next-states.
struct DiversitySummary {
  int64_t distinct_triples = 0;
  std::vector<int64_t> color_counts;  // 6 entries
  double imbalance() const;           // max/min over nonzero-support classes
};
DiversitySummary cube_diversity(const ReplayBuffer& buffer, const Env& env);

// Coverage tables, per-slice visitation heatmaps (PGM), and for cube data
// the position/top-face scatter and color-count tables.
void emit_report(const CoverageStats& stats, const ReplayBuffer& buffer, const Env& env,
                 const std::string& out_dir);

float median(std::vector<float> values);
float quartile(std::vector<float> values, int which);  // 1 or 3, Tukey hinges

struct MethodSummary {
  std::string method;
  int runs = 0;
  float median_total_unique = 0.0f;
  float q1 = 0.0f;
  float q3 = 0.0f;
};

// Aggregates collection runs (manifest + coverage.csv per directory) into
// one row per method; rows sorted by method name.
std::vector<MethodSummary> aggregate_runs(const std::vector<std::string>& run_dirs);
void write_comparison_csv(const std::string& path, const std::vector<MethodSummary>& rows);

}  // namespace goalex
