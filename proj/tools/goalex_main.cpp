// goalex - self-supervised dataset collection with goal-conditioned
// exploration, plus downstream evaluation and run reporting.

#include <glob.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "goalex/collector.hpp"
#include "goalex/config.hpp"
#include "goalex/dataset.hpp"
#include "goalex/downstream.hpp"
#include "goalex/manifest.hpp"
#include "goalex/report.hpp"

namespace fs = std::filesystem;
using namespace goalex;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

Config base_config(const std::string& config_path,
                   const std::vector<std::string>& overrides) {
  Config cfg;
  if (!config_path.empty()) cfg = Config::load_file(config_path);
  for (const auto& kv : overrides) {
    const size_t eq = kv.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("--set expects key=value, got '" + kv + "'");
    }
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return cfg;
}

std::vector<std::string> expand_globs(const std::vector<std::string>& patterns) {
  std::vector<std::string> out;
  for (const auto& pat : patterns) {
    glob_t g{};
    const int rc = glob(pat.c_str(), 0, nullptr, &g);
    if (rc == 0) {
      for (size_t i = 0; i < g.gl_pathc; ++i) out.emplace_back(g.gl_pathv[i]);
    } else if (rc != GLOB_NOMATCH) {
      globfree(&g);
      throw ConfigError("glob failed for pattern '" + pat + "'");
    }
    globfree(&g);
  }
  return out;
}

// ------------------------------------------------------------------ collect

struct CollectJob {
  std::string method;
  uint64_t seed;
  std::string out_dir;
};

void run_collect_job(Config cfg, const CollectJob& job) {
  cfg.set("method", job.method);
  cfg.set("seed", std::to_string(job.seed));
  const CollectionConfig cc = collection_config_from(cfg);
  run_and_export(cc, job.out_dir);
}

int cmd_collect(const Config& cfg_in, const std::string& out_dir,
                const std::string& methods_flag, const std::string& seeds_flag, int jobs) {
  Config cfg = cfg_in;
  const std::vector<std::string> methods =
      split_list(methods_flag.empty() ? cfg.str("method", "gc-max") : methods_flag);
  std::vector<uint64_t> seeds;
  for (const auto& s : split_list(seeds_flag.empty() ? cfg.str("seed", "1") : seeds_flag)) {
    seeds.push_back(std::stoull(s));
  }
  for (const auto& m : methods) method_from_string(m);  // validate early

  std::vector<CollectJob> queue;
  if (methods.size() == 1 && seeds.size() == 1) {
    queue.push_back({methods[0], seeds[0], out_dir});
  } else {
    for (const auto& m : methods) {
      for (uint64_t s : seeds) {
        queue.push_back({m, s, (fs::path(out_dir) / (m + "-s" + std::to_string(s))).string()});
      }
    }
  }

  if (queue.size() == 1 || jobs <= 1) {
    for (const auto& job : queue) {
      run_collect_job(cfg, job);
      std::cout << "collected " << job.out_dir << "\n";
    }
    return kExitOk;
  }

  // Fan independent (method, seed) runs out across child processes.
  size_t next = 0;
  int running = 0;
  bool failed = false;
  std::vector<pid_t> pids;
  while (next < queue.size() || running > 0) {
    while (next < queue.size() && running < jobs) {
      const CollectJob& job = queue[next];
      const pid_t pid = fork();
      if (pid < 0) throw std::runtime_error("fork failed");
      if (pid == 0) {
        try {
          run_collect_job(cfg, job);
        } catch (const std::exception& e) {
          std::fprintf(stderr, "[%s seed %llu] %s\n", job.method.c_str(),
                       static_cast<unsigned long long>(job.seed), e.what());
          _exit(kExitRuntime);
        }
        _exit(kExitOk);
      }
      pids.push_back(pid);
      ++next;
      ++running;
    }
    int status = 0;
    const pid_t done = wait(&status);
    if (done > 0) {
      --running;
      if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) failed = true;
    }
  }
  for (const auto& job : queue) std::cout << "collected " << job.out_dir << "\n";
  return failed ? kExitRuntime : kExitOk;
}

// --------------------------------------------------------------- downstream

struct DatasetEntry {
  std::string path;
  std::string method = "unknown";
  uint64_t seed = 0;
  std::string name;
};

std::vector<DatasetEntry> resolve_datasets(const std::vector<std::string>& patterns) {
  std::vector<DatasetEntry> out;
  for (const auto& path : expand_globs(patterns)) {
    DatasetEntry e;
    e.path = path;
    const fs::path man = fs::path(path).parent_path() / "manifest.txt";
    if (fs::exists(man)) {
      const RunManifest m = RunManifest::read(man.string());
      e.method = m.method;
      e.seed = m.seed;
    }
    e.name = fs::path(path).parent_path().filename().string();
    if (e.name.empty()) e.name = fs::path(path).filename().string();
    out.push_back(std::move(e));
  }
  if (out.empty()) throw ConfigError("no datasets matched --data");
  return out;
}

CubeEnv cube_env_from(const Config& cfg) {
  CubeParams p;
  p.cells = static_cast<int>(cfg.integer("cube_cells", 12));
  p.cell_cm = static_cast<float>(cfg.number("cube_cell_cm", 3.0));
  p.image_side = static_cast<int>(cfg.integer("image_side", 84));
  p.reset_cx = static_cast<int>(cfg.integer("cube_reset_cx", 5));
  p.reset_cy = static_cast<int>(cfg.integer("cube_reset_cy", 2));
  p.contact = static_cast<float>(cfg.number("cube_contact", 0.9));
  return CubeEnv(p);
}

SupervisedConfig supervised_config_from(const Config& cfg) {
  SupervisedConfig sc;
  sc.net_side = static_cast<int>(cfg.integer("net_image_side", sc.net_side));
  sc.net = cfg.str("sup_net", sc.net);
  sc.epochs = static_cast<int>(cfg.integer("sup_epochs", sc.epochs));
  sc.batch = static_cast<int>(cfg.integer("sup_batch", sc.batch));
  sc.lr = static_cast<float>(cfg.number("sup_lr", sc.lr));
  sc.max_train = cfg.integer("sup_max_train", sc.max_train);
  return sc;
}

OfflineConfig offline_config_from(const Config& cfg) {
  OfflineConfig oc;
  oc.net_side = static_cast<int>(cfg.integer("net_image_side", oc.net_side));
  oc.net = cfg.str("offline_net", oc.net);
  oc.bc_steps = static_cast<int>(cfg.integer("offline_bc_steps", oc.bc_steps));
  oc.q_steps = static_cast<int>(cfg.integer("offline_q_steps", oc.q_steps));
  oc.batch = static_cast<int>(cfg.integer("offline_batch", oc.batch));
  oc.lr = static_cast<float>(cfg.number("offline_lr", oc.lr));
  oc.gamma = static_cast<float>(cfg.number("offline_gamma", oc.gamma));
  oc.polyak = static_cast<float>(cfg.number("offline_polyak", oc.polyak));
  oc.bc_threshold = static_cast<float>(cfg.number("bc_threshold", oc.bc_threshold));
  return oc;
}

int cmd_downstream(const std::string& mode, const Config& cfg,
                   const std::vector<std::string>& data_patterns, const std::string& task_str,
                   int seeds, const std::string& out_dir) {
  const auto entries = resolve_datasets(data_patterns);
  fs::create_directories(out_dir);
  const uint64_t base_seed = static_cast<uint64_t>(cfg.integer("seed", 1));
  const CubeEnv env = cube_env_from(cfg);
  RngPool pool(base_seed);

  if (mode == "classify" || mode == "regress") {
    const SupervisedConfig sup = supervised_config_from(cfg);
    const double frac = cfg.number("test_fraction", 0.05);
    const float max_cm = env.cell_to_cm(env.params().cells - 1);

    // Pass 1: pooled test extraction, one dataset in memory at a time.
    PooledTestSet test;
    std::vector<std::vector<int64_t>> train_splits;
    for (size_t i = 0; i < entries.size(); ++i) {
      const Dataset ds = import_dataset(entries[i].path);
      if (ds.env_id != "cube") {
        throw ConfigError("dataset " + entries[i].path + " is from env '" + ds.env_id +
                          "'; supervised tasks need cube data");
      }
      const SupervisedData data = SupervisedData::from(ds.buffer, env);
      Rng split_rng = pool.stream("split/" + entries[i].name);
      DatasetSplit split = split_dataset(data.size(), frac, split_rng);
      extract_test(data, split.test, static_cast<int>(i), ds.buffer.dims(), test);
      train_splits.push_back(std::move(split.train));
    }

    const std::string table = (fs::path(out_dir) / (mode + "_results.csv")).string();
    std::ofstream f(table);
    f << "method,dataset,train_seed," << (mode == "classify" ? "accuracy" : "mse_cm2")
      << "\n";
    // Pass 2: train per dataset x seed against the shared pooled test set.
    for (size_t i = 0; i < entries.size(); ++i) {
      const Dataset ds = import_dataset(entries[i].path);
      const SupervisedData data = SupervisedData::from(ds.buffer, env);
      for (int s = 0; s < seeds; ++s) {
        Rng rng = pool.stream("train/" + entries[i].name + "/" + std::to_string(s));
        const float metric =
            mode == "classify"
                ? train_classifier(data, train_splits[i], test, ds.buffer.dims(), sup, rng)
                : train_regressor(data, train_splits[i], test, ds.buffer.dims(), sup, rng,
                                  max_cm);
        f << entries[i].method << "," << entries[i].name << "," << s << "," << metric
          << "\n";
        f.flush();
        std::cout << mode << " " << entries[i].name << " seed " << s << " -> " << metric
                  << "\n";
      }
    }
    std::cout << "wrote " << table << "\n";
    return kExitOk;
  }

  if (mode == "offline") {
    if (task_str.empty()) throw ConfigError("offline mode needs --task");
    const TaskReward task =
        TaskReward::parse(task_str, static_cast<float>(cfg.number("task_rho", 10.0)),
                          static_cast<float>(cfg.number("task_ty_cm", 18.0)));
    const OfflineConfig oc = offline_config_from(cfg);
    const int eval_episodes = static_cast<int>(cfg.integer("eval_episodes", 50));
    const int eval_horizon = static_cast<int>(cfg.integer("eval_horizon", 50));
    const double eval_epsilon = cfg.number("eval_epsilon", 0.05);

    const std::string table = (fs::path(out_dir) / "offline_results.csv").string();
    std::ofstream f(table);
    f << "method,dataset,train_seed,task,success_rate\n";
    for (const auto& entry : entries) {
      const Dataset ds = import_dataset(entry.path);
      for (int s = 0; s < seeds; ++s) {
        Rng rng = pool.stream("offline/" + entry.name + "/" + std::to_string(s));
        const OfflinePolicy policy = offline_learn(ds, env, task, oc, rng);
        CubeEnv eval_env = env;
        Rng eval_rng = pool.stream("eval/" + entry.name + "/" + std::to_string(s));
        const float rate = evaluate_policy(
            [&policy](const Observation& o) { return policy.select(o); }, eval_env, task,
            eval_episodes, eval_horizon, eval_epsilon, eval_rng);
        f << entry.method << "," << entry.name << "," << s << "," << task.to_string() << ","
          << rate << "\n";
        f.flush();
        std::cout << "offline " << entry.name << " seed " << s << " -> " << rate << "\n";
      }
    }
    std::cout << "wrote " << table << "\n";
    return kExitOk;
  }

  throw ConfigError("unknown downstream mode '" + mode + "'");
}

// ------------------------------------------------------------------- report

int cmd_report(const std::vector<std::string>& run_patterns, const std::string& out_dir) {
  std::vector<std::string> dirs;
  for (const auto& p : expand_globs(run_patterns)) {
    if (fs::is_directory(p)) dirs.push_back(p);
  }
  const auto rows = aggregate_runs(dirs);  // throws "no runs found" when empty
  std::cout << "method,runs,median_total_unique,q1,q3\n";
  for (const auto& r : rows) {
    std::cout << r.method << "," << r.runs << "," << r.median_total_unique << "," << r.q1
              << "," << r.q3 << "\n";
  }
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_comparison_csv((fs::path(out_dir) / "comparison.csv").string(), rows);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"self-supervised dataset collection via goal-directed exploration"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;

  auto* collect = app.add_subcommand("collect", "run a data-collection experiment");
  std::string env_flag, method_flag, seed_flag, out_dir;
  int cycles = -1, episodes = -1, horizon = -1, jobs = 1;
  collect->add_option("--env", env_flag, "grid|cube");
  collect->add_option("--method", method_flag,
                      "gc-max|gc-random|gc-min|intrinsic|random (comma list fans out)");
  collect->add_option("--cycles", cycles, "training cycles N");
  collect->add_option("--episodes-per-cycle", episodes, "episodes per cycle M");
  collect->add_option("--horizon", horizon, "episode length T");
  collect->add_option("--seed", seed_flag, "run seed (comma list fans out)");
  collect->add_option("--out", out_dir, "output directory")->required();
  collect->add_option("--config", config_path, "key=value config file");
  collect->add_option("--set", overrides, "override a config key (key=value)");
  collect->add_option("--jobs", jobs, "parallel processes for fanned-out runs");

  auto* down = app.add_subcommand("downstream", "evaluate datasets on downstream tasks");
  std::string mode, task_str, down_out;
  std::vector<std::string> data_patterns;
  int seeds = 3;
  down->add_option("mode", mode, "classify|regress|offline")->required();
  down->add_option("--data", data_patterns, "dataset file globs")->required();
  down->add_option("--task", task_str, "push|flip:COLOR|pushflip:COLOR (offline only)");
  down->add_option("--seeds", seeds, "training seeds per dataset");
  down->add_option("--out", down_out, "output directory")->required();
  down->add_option("--config", config_path, "key=value config file");
  down->add_option("--set", overrides, "override a config key (key=value)");

  auto* report = app.add_subcommand("report", "aggregate run directories");
  std::vector<std::string> run_patterns;
  std::string report_out;
  report->add_option("--runs", run_patterns, "run directories (globs)")->required();
  report->add_option("--out", report_out, "where to write comparison.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (collect->parsed()) {
      Config cfg = base_config(config_path, overrides);
      if (!env_flag.empty()) cfg.set("env", env_flag);
      if (cycles > 0) cfg.set("cycles", std::to_string(cycles));
      if (episodes > 0) cfg.set("episodes_per_cycle", std::to_string(episodes));
      if (horizon > 0) cfg.set("horizon", std::to_string(horizon));
      return cmd_collect(cfg, out_dir, method_flag, seed_flag, jobs);
    }
    if (down->parsed()) {
      return cmd_downstream(mode, base_config(config_path, overrides), data_patterns,
                            task_str, seeds, down_out);
    }
    if (report->parsed()) {
      return cmd_report(run_patterns, report_out);
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
