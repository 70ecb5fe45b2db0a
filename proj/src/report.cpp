#include "goalex/report.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <tuple>

#include "goalex/env_cube.hpp"
#include "goalex/env_grid.hpp"
#include "goalex/image_io.hpp"
#include "goalex/manifest.hpp"
#include "goalex/tensor.hpp"

namespace goalex {

namespace fs = std::filesystem;

void write_coverage_csv(const std::string& path, const CoverageStats& stats) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path);
  f << "episode,unique,novel,total_unique\n";
  int64_t running = 0;
  for (size_t i = 0; i < stats.per_episode_unique.size(); ++i) {
    running += stats.per_episode_novel[i];
    f << i << "," << stats.per_episode_unique[i] << "," << stats.per_episode_novel[i] << ","
      << running << "\n";
  }
}

double DiversitySummary::imbalance() const {
  int64_t mx = 0;
  int64_t mn = std::numeric_limits<int64_t>::max();
  for (int64_t c : color_counts) {
    mx = std::max(mx, c);
    mn = std::min(mn, c);
  }
  if (mx == 0) return 0.0;
  // An unvisited class counts as 1 to keep the ratio finite.
  return static_cast<double>(mx) / static_cast<double>(std::max<int64_t>(mn, 1));
}

DiversitySummary cube_diversity(const ReplayBuffer& buffer, const Env& env) {
  const auto* cube = dynamic_cast<const CubeEnv*>(&env);
  if (cube == nullptr) throw ConfigError("cube_diversity needs a cube environment");
  DiversitySummary out;
  out.color_counts.assign(6, 0);
  std::unordered_set<int64_t> triples;
  for (size_t e = 0; e < buffer.episode_count(); ++e) {
    const Episode& ep = buffer.episode(e);
    for (int t = 1; t <= ep.horizon; ++t) {  // next-states of the T transitions
      const CubeState s = CubeEnv::from_sidecar(ep.sidecar_at(t));
      const int top = cube->top_face(s.orient);
      out.color_counts[static_cast<size_t>(top)] += 1;
      triples.insert((static_cast<int64_t>(s.cx) * cube->params().cells + s.cy) * 6 + top);
    }
  }
  out.distinct_triples = static_cast<int64_t>(triples.size());
  return out;
}

namespace {

void emit_grid_heatmaps(const ReplayBuffer& buffer, const GridEnv& grid,
                        const std::string& out_dir) {
  const int side = grid.side();
  for (int rot = 0; rot < GridEnv::kRotations; ++rot) {
    std::vector<uint16_t> counts(static_cast<size_t>(side) * side, 0);
    for (size_t e = 0; e < buffer.episode_count(); ++e) {
      const Episode& ep = buffer.episode(e);
      for (int t = 1; t <= ep.horizon; ++t) {
        const GridState s = GridEnv::from_sidecar(ep.sidecar_at(t));
        if (s.rot != rot) continue;
        auto& c = counts[static_cast<size_t>(s.y) * side + s.x];
        if (c < 65535) ++c;
      }
    }
    write_pgm((fs::path(out_dir) / ("heatmap_rot" + std::to_string(rot) + ".pgm")).string(),
              side, side, counts, 65535);
  }
}

void emit_cube_reports(const ReplayBuffer& buffer, const CubeEnv& cube,
                       const std::string& out_dir) {
  const int cells = cube.params().cells;
  std::map<std::tuple<int, int, int>, int64_t> scatter;
  std::vector<std::vector<uint16_t>> heat(
      6, std::vector<uint16_t>(static_cast<size_t>(cells) * cells, 0));
  for (size_t e = 0; e < buffer.episode_count(); ++e) {
    const Episode& ep = buffer.episode(e);
    for (int t = 1; t <= ep.horizon; ++t) {
      const CubeState s = CubeEnv::from_sidecar(ep.sidecar_at(t));
      const int top = cube.top_face(s.orient);
      scatter[{s.cx, s.cy, top}] += 1;
      auto& c = heat[static_cast<size_t>(top)][static_cast<size_t>(s.cx) * cells + s.cy];
      if (c < 65535) ++c;
    }
  }

  std::ofstream sf((fs::path(out_dir) / "scatter.csv").string());
  sf << "cx_cm,cy_cm,top_face,count\n";
  for (const auto& [key, count] : scatter) {
    const auto [cx, cy, top] = key;
    sf << cube.cell_to_cm(cx) << "," << cube.cell_to_cm(cy) << "," << kCubeFaceNames[top]
       << "," << count << "\n";
  }

  const DiversitySummary div = cube_diversity(buffer, cube);
  std::ofstream cf((fs::path(out_dir) / "color_counts.csv").string());
  cf << "top_face,count\n";
  for (int i = 0; i < 6; ++i) {
    cf << kCubeFaceNames[i] << "," << div.color_counts[static_cast<size_t>(i)] << "\n";
  }
  std::ofstream df((fs::path(out_dir) / "diversity.txt").string());
  df << "distinct_triples = " << div.distinct_triples << "\n"
     << "imbalance = " << div.imbalance() << "\n";

  for (int face = 0; face < 6; ++face) {
    write_pgm((fs::path(out_dir) / ("heatmap_face" + std::to_string(face) + ".pgm")).string(),
              cells, cells, heat[static_cast<size_t>(face)], 65535);
  }
}

}  // namespace

void emit_report(const CoverageStats& stats, const ReplayBuffer& buffer, const Env& env,
                 const std::string& out_dir) {
  fs::create_directories(out_dir);
  write_coverage_csv((fs::path(out_dir) / "coverage.csv").string(), stats);
  if (const auto* grid = dynamic_cast<const GridEnv*>(&env)) {
    emit_grid_heatmaps(buffer, *grid, out_dir);
  } else if (const auto* cube = dynamic_cast<const CubeEnv*>(&env)) {
    emit_cube_reports(buffer, *cube, out_dir);
  }
}

float median(std::vector<float> values) {
  if (values.empty()) throw ConfigError("median of empty set");
  const size_t n = values.size();
  const size_t mid = n / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<long>(mid), values.end());
  float hi = values[mid];
  if (n % 2 == 1) return hi;
  std::nth_element(values.begin(), values.begin() + static_cast<long>(mid - 1),
                   values.begin() + static_cast<long>(mid));
  return 0.5f * (hi + values[mid - 1]);
}

float quartile(std::vector<float> values, int which) {
  if (values.empty()) throw ConfigError("quartile of empty set");
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  const size_t half = (n + 1) / 2;  // lower half includes the median when odd
  std::vector<float> part;
  if (which == 1) {
    part.assign(values.begin(), values.begin() + static_cast<long>(half));
  } else if (which == 3) {
    part.assign(values.end() - static_cast<long>(half), values.end());
  } else {
    throw ConfigError("quartile must be 1 or 3");
  }
  return median(std::move(part));
}

std::vector<MethodSummary> aggregate_runs(const std::vector<std::string>& run_dirs) {
  std::map<std::string, std::vector<float>> by_method;
  for (const auto& dir : run_dirs) {
    const std::string man_path = (fs::path(dir) / "manifest.txt").string();
    const std::string cov_path = (fs::path(dir) / "coverage.csv").string();
    if (!fs::exists(man_path) || !fs::exists(cov_path)) continue;
    const RunManifest man = RunManifest::read(man_path);
    std::ifstream cf(cov_path);
    std::string line, last;
    std::getline(cf, line);  // header
    while (std::getline(cf, line)) {
      if (!line.empty()) last = line;
    }
    if (last.empty()) continue;
    const size_t comma = last.rfind(',');
    by_method[man.method].push_back(std::stof(last.substr(comma + 1)));
  }
  if (by_method.empty()) throw ConfigError("no runs found");
  std::vector<MethodSummary> rows;
  for (const auto& [method, values] : by_method) {
    MethodSummary row;
    row.method = method;
    row.runs = static_cast<int>(values.size());
    row.median_total_unique = median(values);
    row.q1 = quartile(values, 1);
    row.q3 = quartile(values, 3);
    rows.push_back(row);
  }
  return rows;
}

void write_comparison_csv(const std::string& path, const std::vector<MethodSummary>& rows) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path);
  f << "method,runs,median_total_unique,q1,q3\n";
  for (const auto& r : rows) {
    f << r.method << "," << r.runs << "," << r.median_total_unique << "," << r.q1 << ","
      << r.q3 << "\n";
  }
}

}  // namespace goalex
