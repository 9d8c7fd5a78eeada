// End-to-end tests of the aqsim driver: exit-code contract, output files,
// config precedence, and bit-exact reproducibility of a seeded run.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "aqs/io.hpp"
#include "doctest.h"

namespace fs = std::filesystem;
using namespace aqs;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir() {
  static const fs::path root = [] {
    fs::path p = fs::temp_directory_path() / "aqsim_cli_tests";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return root;
}

CliResult run_cli(const std::string& args, const std::string& tag) {
  const fs::path out_file = scratch_dir() / (tag + ".out");
  const fs::path err_file = scratch_dir() / (tag + ".err");
  const std::string cmd = std::string(AQSIM_BINARY) + " " + args + " > " + out_file.string() +
                          " 2> " + err_file.string();
  const int raw = std::system(cmd.c_str());
  CliResult res;
  res.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  res.out = slurp(out_file);
  res.err = slurp(err_file);
  return res;
}

// Parses a numeric CSV produced by write_csv back into rows of doubles.
std::vector<std::vector<double>> read_csv(const fs::path& p, std::vector<std::string>* header) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::string line;
  REQUIRE(std::getline(in, line));
  if (header) {
    header->clear();
    std::istringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) header->push_back(cell);
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

TEST_CASE("gap run: exit 0, correct two-site gap, manifest round-trips") {
  const fs::path dir = scratch_dir() / "gap_basic";
  const auto res =
      run_cli("gap --n 2 --J 1 --grid 5 --out " + dir.string(), "gap_basic");
  CAPTURE(res.err);
  CHECK(res.exit_code == 0);

  std::vector<std::string> header;
  const auto rows = read_csv(dir / "gap.csv", &header);
  REQUIRE(header == std::vector<std::string>{"J", "s", "gap", "degenerate"});
  REQUIRE(rows.size() == 5);
  // At s = 0 the chain is h * sum sigma_x: single flips cost exactly 2h.
  CHECK(rows[0][1] == 0.0);
  CHECK(rows[0][2] == doctest::Approx(2.0).epsilon(1e-12));
  for (const auto& row : rows) {
    CHECK(row[0] == 1.0);
    CHECK(row[2] > 0.0);
    CHECK(row[3] == 0.0);
  }

  const RunManifest m = load_manifest((dir / "gap_manifest.json").string());
  CHECK(m.backend == Backend::dense_oracle);
  CHECK(m.evaluations == 5);
  CHECK(m.outputs == std::vector<std::string>{(dir / "gap.csv").string()});
  CHECK(m.config.at("J") == "1");
  CHECK(m.config.at("n") == "2");
  CHECK(m.wall_seconds > 0.0);

  // Writing the loaded manifest back and re-loading must be a fixed point.
  const fs::path copy = dir / "manifest_copy.json";
  write_manifest(m, copy.string());
  CHECK(load_manifest(copy.string()) == m);
}

TEST_CASE("malformed numeric option fails with exit 2 naming the key") {
  const auto res = run_cli("gap --n 2 --J abc --out " + (scratch_dir() / "bad").string(),
                           "gap_bad_j");
  CHECK(res.exit_code == 2);
  CHECK(res.err.find("'J'") != std::string::npos);

  const auto res2 = run_cli("gap --n two --J 1 --out " + (scratch_dir() / "bad2").string(),
                            "gap_bad_n");
  CHECK(res2.exit_code == 2);
  CHECK(res2.err.find("'n'") != std::string::npos);
}

TEST_CASE("missing subcommand and missing config file fail with exit 2") {
  CHECK(run_cli("", "no_subcommand").exit_code == 2);
  const auto res = run_cli("gap --config /nonexistent/file.cfg --out " +
                               (scratch_dir() / "noconf").string(),
                           "missing_config");
  CHECK(res.exit_code == 2);
  CHECK(!res.err.empty());
}

TEST_CASE("--help exits cleanly") {
  const auto res = run_cli("--help", "help");
  CHECK(res.exit_code == 0);
  CHECK(res.out.find("gap") != std::string::npos);
  CHECK(res.out.find("vqaa") != std::string::npos);
}

TEST_CASE("config file is overridden by explicit flags and by --set") {
  const fs::path cfg_file = scratch_dir() / "run.cfg";
  {
    std::ofstream out(cfg_file);
    out << "# chain setup\n";
    out << "n = 2\n";
    out << "J = 5\n";
    out << "grid = 4\n";
  }
  const fs::path dir = scratch_dir() / "gap_precedence";
  const auto res = run_cli("gap --config " + cfg_file.string() + " --set J=1 --out " +
                               dir.string(),
                           "gap_precedence");
  CAPTURE(res.err);
  REQUIRE(res.exit_code == 0);

  const auto rows = read_csv(dir / "gap.csv", nullptr);
  REQUIRE(rows.size() == 4);  // grid from the file survives
  for (const auto& row : rows) CHECK(row[0] == 1.0);  // J from --set wins

  const RunManifest m = load_manifest((dir / "gap_manifest.json").string());
  CHECK(m.config.at("J") == "1");
  CHECK(m.config.at("grid") == "4");
}

TEST_CASE("seeded vqaa run is bit-identical across invocations") {
  const std::string args = "vqaa --n 4 --J 3 --algo blackbox --T 2 --L 3 --budget 12 --seed 7";
  const fs::path a = scratch_dir() / "vqaa_a";
  const fs::path b = scratch_dir() / "vqaa_b";
  const auto ra = run_cli(args + " --out " + a.string(), "vqaa_a");
  const auto rb = run_cli(args + " --out " + b.string(), "vqaa_b");
  CAPTURE(ra.err);
  REQUIRE(ra.exit_code == rb.exit_code);
  CHECK(slurp(a / "vqaa_trace.csv") == slurp(b / "vqaa_trace.csv"));
  CHECK(slurp(a / "vqaa_best.json") == slurp(b / "vqaa_best.json"));

  // The optimum schedule re-loads as a valid normalized path decomposition.
  const Schedule best = load_schedule_json((a / "vqaa_best.json").string());
  REQUIRE(best.chunk_lengths.size() == 3);
  REQUIRE(best.chunk_times.size() == 3);
  double total_len = 0.0;
  for (double v : best.chunk_lengths) {
    CHECK(v >= 0.0);
    total_len += v;
  }
  CHECK(total_len == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(best.chunk_times[0] == doctest::Approx(2.0 / 3));
}

TEST_CASE("exhausted optimizer budget degrades the run to exit 1") {
  const fs::path dir = scratch_dir() / "vqaa_degraded";
  const auto res = run_cli(
      "vqaa --n 4 --J 3 --algo blackbox --T 2 --L 3 --budget 9 --out " + dir.string(),
      "vqaa_degraded");
  CAPTURE(res.err);
  CHECK(res.exit_code == 1);
  // Degraded runs still retain their outputs.
  CHECK(fs::exists(dir / "vqaa_trace.csv"));
  CHECK(fs::exists(dir / "vqaa_best.json"));
  CHECK(fs::exists(dir / "vqaa_manifest.json"));
}

TEST_CASE("noise run emits ensemble aggregate, trajectories, and flip row") {
  const fs::path dir = scratch_dir() / "noise_run";
  const auto res = run_cli(
      "noise --n 4 --J 1 --T 2 --L 2 --p 0.0 --trajectories 3 --seed 5 "
      "--flip-site 1 --flip-layer 0 --out " +
          dir.string(),
      "noise_run");
  CAPTURE(res.err);
  REQUIRE(res.exit_code == 0);

  const auto agg = read_csv(dir / "noise_aggregate.csv", nullptr);
  REQUIRE(agg.size() == 1);
  CHECK(agg[0][0] == 0.0);          // p
  CHECK(agg[0][1] > 0.9);           // clean overlap with the target ground state
  CHECK(agg[0][2] == 0.0);          // p = 0: no spread across trajectories
  CHECK(agg[0][3] == 3.0);          // ensemble size

  std::vector<std::string> header;
  std::ifstream traj(dir / "noise_trajectories.csv");
  std::string line;
  int data_rows = 0;
  REQUIRE(std::getline(traj, line));
  CHECK(line == "trajectory,events,observable");
  while (std::getline(traj, line))
    if (!line.empty()) ++data_rows;
  CHECK(data_rows == 3);

  // An injected flip in the pre-ramp exposure window is healed by the sweep.
  const auto flip = read_csv(dir / "noise_flip.csv", nullptr);
  REQUIRE(flip.size() == 1);
  CHECK(flip[0][2] == doctest::Approx(flip[0][3]).epsilon(1e-12));
}

TEST_CASE("spectroscopy run writes curve, derivative, and summary") {
  const fs::path dir = scratch_dir() / "spect_run";
  const auto res = run_cli(
      "spectroscopy --n 4 --J 3 --grid 6 --target 0.7 --out " + dir.string(), "spect_run");
  CAPTURE(res.err);
  REQUIRE(res.exit_code == 0);

  std::vector<std::string> header;
  const auto rows = read_csv(dir / "spectroscopy_curve.csv", &header);
  REQUIRE(header ==
          std::vector<std::string>{"s", "time", "overlap", "iters", "bracket_failed"});
  REQUIRE(rows.size() == 6);
  for (const auto& row : rows) {
    CHECK(row[1] > 0.0);
    CHECK(row[4] == 0.0);
  }

  const auto deriv = read_csv(dir / "spectroscopy_deriv.csv", nullptr);
  CHECK(deriv.size() == 401);

  const std::string summary = slurp(dir / "spectroscopy_summary.json");
  CHECK(summary.find("s_star") != std::string::npos);

  const RunManifest m = load_manifest((dir / "spectroscopy_manifest.json").string());
  CHECK(m.outputs.size() == 3);
  CHECK(m.evaluations > 0);
}
