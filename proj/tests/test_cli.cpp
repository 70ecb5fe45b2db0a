#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "goalex/dataset.hpp"
#include "goalex/manifest.hpp"

using namespace goalex;
namespace fs = std::filesystem;

namespace {

const std::string kCli = GOALEX_CLI_PATH;

struct CmdResult {
  int exit_code;
};

CmdResult run_cli(const std::string& args) {
  const std::string cmd = kCli + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return CmdResult{WEXITSTATUS(status)};
}

fs::path work_dir() {
  const fs::path dir = fs::temp_directory_path() / "gx_cli";
  fs::create_directories(dir);
  return dir;
}

// Fast tiny-run arguments shared by the CLI tests.
std::string tiny_args() {
  return "--set net_image_side=21 --set batch_size=4 --set rnd_embed=8 "
         "--set actor_net=conv:2:4:4:relu,dense:8:relu,dense:3:tanh "
         "--set critic_net=conv:2:4:4:relu,dense:8:relu,dense:1:none "
         "--set rnd_net=conv:2:4:4:relu,dense:8:none ";
}

std::vector<char> read_bytes(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("missing required --out is a usage error with exit code 2") {
  CHECK(run_cli("collect --env grid --method random").exit_code == 2);
  CHECK(run_cli("downstream classify --data x.bin").exit_code == 2);
  CHECK(run_cli("report").exit_code == 2);
  CHECK(run_cli("").exit_code == 2);
  CHECK(run_cli("--help").exit_code == 0);
}

TEST_CASE("tiny collect run writes dataset, coverage, and manifest") {
  const fs::path out = work_dir() / "tiny";
  fs::remove_all(out);
  const CmdResult r = run_cli("collect --env grid --method gc-max --cycles 1 "
                              "--episodes-per-cycle 1 --horizon 10 --seed 3 " +
                              tiny_args() + "--out " + out.string());
  CHECK(r.exit_code == 0);
  const Dataset ds = import_dataset((out / "dataset.bin").string());
  CHECK(ds.env_id == "grid");
  CHECK(ds.buffer.transition_count() == 10);
  const RunManifest man = RunManifest::read((out / "manifest.txt").string());
  CHECK(man.status == "complete");
  CHECK(man.method == "gc-max");
  CHECK(man.seed == 3);
  CHECK(fs::exists(out / "coverage.csv"));
  CHECK(fs::exists(out / "policy.ckpt"));
  CHECK(fs::exists(out / "rnd.ckpt"));
}

TEST_CASE("same config and seed produce byte-identical datasets") {
  const fs::path a = work_dir() / "det_a";
  const fs::path b = work_dir() / "det_b";
  fs::remove_all(a);
  fs::remove_all(b);
  const std::string base = "collect --env grid --method gc-max --cycles 1 "
                           "--episodes-per-cycle 2 --horizon 8 --seed 7 " +
                           tiny_args();
  CHECK(run_cli(base + "--out " + a.string()).exit_code == 0);
  CHECK(run_cli(base + "--out " + b.string()).exit_code == 0);
  CHECK(read_bytes(a / "dataset.bin") == read_bytes(b / "dataset.bin"));
  CHECK(read_bytes(a / "coverage.csv") == read_bytes(b / "coverage.csv"));
}

TEST_CASE("method/seed lists fan out into per-run subdirectories") {
  const fs::path out = work_dir() / "fan";
  fs::remove_all(out);
  const CmdResult r = run_cli("collect --env grid --method random --cycles 1 "
                              "--episodes-per-cycle 1 --horizon 6 --seed 1,2 --jobs 2 " +
                              tiny_args() + "--out " + out.string());
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(out / "random-s1" / "dataset.bin"));
  CHECK(fs::exists(out / "random-s2" / "dataset.bin"));
}

TEST_CASE("downstream offline on a grid dataset is an env-mismatch runtime error") {
  const fs::path out = work_dir() / "gridset";
  fs::remove_all(out);
  REQUIRE(run_cli("collect --env grid --method random --cycles 1 --episodes-per-cycle 1 "
                  "--horizon 6 --seed 1 " +
                  tiny_args() + "--out " + out.string())
              .exit_code == 0);
  const fs::path dout = work_dir() / "down_bad";
  const CmdResult r =
      run_cli("downstream offline --task push --data " + (out / "dataset.bin").string() +
              " --seeds 1 --out " + dout.string());
  CHECK(r.exit_code == 1);
}

TEST_CASE("downstream classify produces one row per dataset and seed") {
  const fs::path runs = work_dir() / "cube_runs";
  fs::remove_all(runs);
  REQUIRE(run_cli("collect --env cube --method random --cycles 1 --episodes-per-cycle 2 "
                  "--horizon 25 --seed 1,2 " +
                  tiny_args() + "--out " + runs.string())
              .exit_code == 0);
  const fs::path dout = work_dir() / "down_cls";
  fs::remove_all(dout);
  const CmdResult r = run_cli(
      "downstream classify --data '" + (runs / "*" / "dataset.bin").string() +
      "' --seeds 2 --out " + dout.string() +
      " --set sup_epochs=2 --set sup_batch=16 --set sup_max_train=64 "
      "--set sup_net=conv:2:4:4:relu,dense:8:relu --set net_image_side=21");
  CHECK(r.exit_code == 0);
  std::ifstream f(dout / "classify_results.csv");
  REQUIRE(f.good());
  std::string line;
  std::getline(f, line);
  CHECK(line == "method,dataset,train_seed,accuracy");
  int rows = 0;
  while (std::getline(f, line)) {
    if (!line.empty()) ++rows;
  }
  CHECK(rows == 2 * 2);  // 2 datasets x 2 seeds
}

TEST_CASE("report aggregates runs per method and fails cleanly on empty input") {
  const fs::path runs = work_dir() / "rep_runs";
  fs::remove_all(runs);
  REQUIRE(run_cli("collect --env grid --method random,gc-max --cycles 1 "
                  "--episodes-per-cycle 1 --horizon 6 --seed 1,2,3 --jobs 2 " +
                  tiny_args() + "--out " + runs.string())
              .exit_code == 0);
  const fs::path rout = work_dir() / "rep_out";
  const CmdResult ok = run_cli("report --runs '" + (runs / "*").string() + "' --out " +
                               rout.string());
  CHECK(ok.exit_code == 0);
  std::ifstream f(rout / "comparison.csv");
  REQUIRE(f.good());
  std::string line;
  std::getline(f, line);
  int rows = 0;
  while (std::getline(f, line)) {
    if (!line.empty()) ++rows;
  }
  CHECK(rows == 2);  // one row per method

  const fs::path empty = work_dir() / "empty";
  fs::create_directories(empty);
  CHECK(run_cli("report --runs '" + (empty / "*").string() + "'").exit_code == 1);
}
