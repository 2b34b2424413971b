// Copyright 2026 The qdyn developers.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// End-to-end checks of the command-line binary: exit codes, CSV/JSON
// artifacts, determinism, and error aggregation. Each case runs the real
// executable in a scratch directory via std::system.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "qdyn_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Runs the binary with `args`, capturing stdout/stderr into files inside
// `dir`. `env_prefix` may hold VAR=value assignments for the child shell.
CliResult run_cli(const std::string& args, const fs::path& dir,
                  const std::string& env_prefix = "") {
  CliResult r;
  std::string cmd = env_prefix + (env_prefix.empty() ? "" : " ") +
                    std::string(QDYN_CLI_PATH) + " " + args + " >" +
                    (dir / "stdout.txt").string() + " 2>" +
                    (dir / "stderr.txt").string();
  int rc = std::system(cmd.c_str());
  r.code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  r.out = slurp(dir / "stdout.txt");
  r.err = slurp(dir / "stderr.txt");
  return r;
}

std::vector<std::vector<std::string>> parse_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("cli dump-circuit emits the op list and census for one map step") {
  fs::path dir = scratch_dir("dump_map");
  CliResult r = run_cli("dump-circuit --n 4 --map-step --out-dir " +
                            dir.string(),
                        dir);
  REQUIRE(r.code == 0);
  CHECK(r.out.find("QUBITS 4") != std::string::npos);

  std::string text = slurp(dir / "dump-circuit.txt");
  int ops = 0;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (line.rfind("H ", 0) == 0 || line.rfind("P ", 0) == 0 ||
        line.rfind("CNOT ", 0) == 0 || line.rfind("D2 ", 0) == 0 ||
        line.rfind("CP ", 0) == 0 || line.rfind("MCX ", 0) == 0)
      ++ops;
  }
  CHECK(ops == 52);

  // The census CSV totals must agree with the serialized listing.
  auto rows = parse_csv(dir / "dump-circuit.csv");
  REQUIRE(rows.size() >= 2);
  long long total = 0;
  for (std::size_t i = 1; i < rows.size(); ++i)
    total += std::stoll(rows[i][1]);
  CHECK(total == 52);
}

TEST_CASE("cli dump-circuit transform mode lists the expected gate count") {
  fs::path dir = scratch_dir("dump_qft");
  CliResult r =
      run_cli("dump-circuit --n 4 --qft --out-dir " + dir.string(), dir);
  REQUIRE(r.code == 0);
  std::string text = slurp(dir / "dump-circuit.txt");
  CHECK(text.find("BITREV") != std::string::npos);
  auto rows = parse_csv(dir / "dump-circuit.csv");
  long long total = 0;
  for (std::size_t i = 1; i < rows.size(); ++i)
    total += std::stoll(rows[i][1]);
  CHECK(total == 10);  // 4*5/2 gates
}

TEST_CASE("cli evolve run keeps the packet sharply peaked at its start") {
  fs::path dir = scratch_dir("evolve_peak");
  CliResult r = run_cli(
      "sawtooth-evolve --n 3 --kT 1.5 --k 0.273 --t 1 --m0 0 --out-dir " +
          dir.string(),
      dir);
  REQUIRE(r.code == 0);
  auto rows = parse_csv(dir / "sawtooth-evolve.csv");
  REQUIRE(rows.size() == 9);  // header + 8 actions
  double best_w = -1;
  long long best_m = 99;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    double w = std::stod(rows[i][1]);
    if (w > best_w) {
      best_w = w;
      best_m = std::stoll(rows[i][0]);
    }
  }
  CHECK(best_m == 0);
  CHECK(best_w > 0.5);

  nlohmann::json side =
      nlohmann::json::parse(slurp(dir / "sawtooth-evolve.json"));
  CHECK(side["summary"]["peak_m"].get<long long>() == 0);
  CHECK(side["gate_counts"]["ops_per_map_step"].get<long long>() == 30);
}

TEST_CASE("cli runs are byte-identical for a fixed config and seed") {
  fs::path a = scratch_dir("det_a");
  fs::path b = scratch_dir("det_b");
  fs::path c = scratch_dir("det_c");
  std::string args =
      "localization --n 3 --kT 1.5 --k 0.273 --t 2 --shots 100 "
      "--reps 2 --p-dephase 0.01 ";
  CliResult ra = run_cli(args + "--seed 7 --out-dir " + a.string(), a);
  CliResult rb = run_cli(args + "--seed 7 --out-dir " + b.string(), b);
  CliResult rc = run_cli(args + "--seed 8 --out-dir " + c.string(), c);
  REQUIRE(ra.code == 0);
  REQUIRE(rb.code == 0);
  REQUIRE(rc.code == 0);
  std::string csv_a = slurp(a / "localization.csv");
  CHECK(csv_a == slurp(b / "localization.csv"));
  CHECK(csv_a != slurp(c / "localization.csv"));
  CHECK(!csv_a.empty());
}

TEST_CASE("cli warns but proceeds inside the non-chaotic parameter band") {
  fs::path dir = scratch_dir("regime_warn");
  CliResult r = run_cli(
      "sawtooth-evolve --n 3 --kT -0.1 --k 0.1 --t 1 --out-dir " +
          dir.string(),
      dir);
  CHECK(r.code == 0);
  CHECK(r.err.find("integrable/quasi-integrable") != std::string::npos);
  nlohmann::json side =
      nlohmann::json::parse(slurp(dir / "sawtooth-evolve.json"));
  REQUIRE(side["warnings"].size() == 1);
}

TEST_CASE("cli reports all config errors at once and exits with code 2") {
  fs::path dir = scratch_dir("errors");
  CliResult r = run_cli(
      "localization --n 3 --k 0.273 --T 2.0 --kT 1.5 --t 1 --shots -5", dir);
  CHECK(r.code == 2);
  CHECK(r.err.find("--shots must be positive") != std::string::npos);
  CHECK(r.err.find("exactly two of --k, --T, --kT") != std::string::npos);

  CliResult miss = run_cli("sawtooth-evolve --kT 1.5 --k 0.273 --t 1", dir);
  CHECK(miss.code == 2);  // --n is required
}

TEST_CASE("cli requires exactly one mode flag where one is expected") {
  fs::path dir = scratch_dir("modes");
  CliResult both =
      run_cli("dump-circuit --n 3 --map-step --qft --out-dir " + dir.string(),
              dir);
  CHECK(both.code == 2);
  CliResult neither =
      run_cli("dump-circuit --n 3 --out-dir " + dir.string(), dir);
  CHECK(neither.code == 2);
  CliResult qv = run_cli("qvolume --n 4 --out-dir " + dir.string(), dir);
  CHECK(qv.code == 2);
}

TEST_CASE("cli sidecar records the full configuration and defaults") {
  fs::path dir = scratch_dir("sidecar");
  CliResult r = run_cli(
      "sawtooth-evolve --n 3 --kT 1.5 --k 0.273 --t 1 --out-dir " +
          dir.string(),
      dir);
  REQUIRE(r.code == 0);
  nlohmann::json side =
      nlohmann::json::parse(slurp(dir / "sawtooth-evolve.json"));
  for (const char* key :
       {"schema_version", "subcommand", "config", "seed", "gate_counts",
        "summary", "warnings", "outputs", "wall_time_seconds"})
    CHECK(side.contains(key));
  CHECK(side["schema_version"].get<int>() == 1);
  CHECK(side["seed"].get<std::uint64_t>() == 0);  // default when omitted
  CHECK(side["subcommand"].get<std::string>() == "sawtooth-evolve");
  for (const char* key : {"n", "k", "T", "kT", "m0", "t", "seed", "threads"})
    CHECK(side["config"].contains(key));
  CHECK(side["outputs"][0].get<std::string>() == "sawtooth-evolve.csv");
}

TEST_CASE("cli honors the output directory environment variable") {
  fs::path dir = scratch_dir("envdir");
  fs::path sub = dir / "from_env";
  CliResult r = run_cli("sawtooth-evolve --n 3 --kT 1.5 --k 0.273 --t 1", dir,
                        "QDYN_OUT_DIR=" + sub.string());
  REQUIRE(r.code == 0);
  CHECK(fs::exists(sub / "sawtooth-evolve.csv"));
  CHECK(fs::exists(sub / "sawtooth-evolve.json"));
}

TEST_CASE("cli volume table reproduces the analytic result") {
  fs::path dir = scratch_dir("volume");
  CliResult r =
      run_cli("qvolume --n 8 --eps 0.015625 --out-dir " + dir.string(), dir);
  REQUIRE(r.code == 0);
  nlohmann::json side = nlohmann::json::parse(slurp(dir / "qvolume.json"));
  CHECK(side["summary"]["vq"].get<std::uint64_t>() == 256);
  CHECK(side["summary"]["log2_vq"].get<int>() == 8);
  auto rows = parse_csv(dir / "qvolume.csv");
  CHECK(rows.size() == 9);  // header + kappa = 1..8
}
