#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "canlearn/cli.hpp"
#include "canlearn/report.hpp"

using namespace canlearn;
namespace fs = std::filesystem;

namespace {

fs::path sandbox() {
  static const fs::path root = [] {
    const fs::path p = fs::temp_directory_path() / "canlearn_cli_tests";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return root;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run(std::initializer_list<std::string> args) {
  return cli::run_cli(std::vector<std::string>(args));
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
  CHECK(run({}) == 2);
  CHECK(run({"frobnicate"}) == 2);
  CHECK(run({"gen-local", "--l", "6"}) == 2);  // missing required --out-dir
  const std::string dir = (sandbox() / "bad").string();
  CHECK(run({"gen-local", "--l", "2", "--h", "2", "--out-dir", dir}) == 2);
  CHECK(run({"gen-can", "--topology", "ring", "--out-dir", dir}) == 2);
}

TEST_CASE("--help exits cleanly") {
  CHECK(run({"--help"}) == 0);
  CHECK(run({"solve-local", "--help"}) == 0);
}

TEST_CASE("missing input files exit with 3") {
  const std::string report = (sandbox() / "nofile" / "report.csv").string();
  fs::create_directories(sandbox() / "nofile");
  CHECK(run({"solve-local", "--input", (sandbox() / "ghost.json").string(),
             "--report", report}) == 3);
}

TEST_CASE("gen-local writes instances and a manifest, reproducibly") {
  const fs::path a = sandbox() / "gen_a";
  const fs::path b = sandbox() / "gen_b";
  CHECK(run({"gen-local", "--l", "6", "--h", "3", "--seed", "7", "--count", "2",
             "--out-dir", a.string()}) == 0);
  CHECK(run({"gen-local", "--l", "6", "--h", "3", "--seed", "7", "--count", "2",
             "--out-dir", b.string()}) == 0);
  REQUIRE(fs::exists(a / "instance_000.json"));
  REQUIRE(fs::exists(a / "instance_001.json"));
  REQUIRE(fs::exists(a / "manifest.json"));
  CHECK(slurp(a / "instance_000.json") == slurp(b / "instance_000.json"));
  CHECK(slurp(a / "instance_001.json") == slurp(b / "instance_001.json"));
  CHECK(slurp(a / "instance_000.json") != slurp(a / "instance_001.json"));

  nlohmann::json manifest = nlohmann::json::parse(slurp(a / "manifest.json"));
  CHECK(manifest["command"] == "gen-local");
  CHECK(manifest["seed"] == 7);
  CHECK(manifest["params"]["l"] == 6);
  CHECK(manifest["outputs"].size() == 2);
}

TEST_CASE("solve-local appends a report row and repeats byte-identically") {
  const fs::path dir = sandbox() / "solve";
  REQUIRE(run({"gen-local", "--l", "6", "--h", "3", "--seed", "7", "--count", "1",
               "--out-dir", dir.string()}) == 0);
  const std::string input = (dir / "instance_000.json").string();
  const std::string report = (dir / "report.csv").string();
  const int rc = run({"solve-local", "--input", input, "--seed", "7",
                      "--ntrials", "10", "--report", report});
  CHECK(rc == 0);
  const std::string once = slurp(report);
  REQUIRE(once.rfind(std::string(report::kLocalHeader) + "\n", 0) == 0);
  std::istringstream in(once);
  std::string header, row1;
  std::getline(in, header);
  REQUIRE(std::getline(in, row1));
  CHECK(row1.rfind("instance_000,6,3,7,10,1,", 0) == 0);  // converged=1

  REQUIRE(run({"solve-local", "--input", input, "--seed", "7", "--ntrials", "10",
               "--report", report}) == 0);
  std::istringstream twice(slurp(report));
  std::string line, row2;
  std::getline(twice, line);
  std::getline(twice, line);
  REQUIRE(std::getline(twice, row2));
  CHECK(row2 == row1);
  CHECK(fs::exists(dir / "manifest.json"));
}

TEST_CASE("solve-local reports non-convergence with exit 4") {
  const fs::path dir = sandbox() / "hard";
  REQUIRE(run({"gen-local", "--l", "6", "--h", "3", "--seed", "7", "--count", "1",
               "--out-dir", dir.string()}) == 0);
  const std::string report = (dir / "report.csv").string();
  CHECK(run({"solve-local", "--input", (dir / "instance_000.json").string(),
             "--max-iter", "1", "--ntrials", "2", "--report", report}) == 4);
  std::istringstream in(slurp(report));
  std::string header, row;
  std::getline(in, header);
  REQUIRE(std::getline(in, row));
  CHECK(row.rfind("instance_000,6,3,0,2,0,", 0) == 0);  // converged=0
}

TEST_CASE("gen-can plus learn-can produce a CAN report and trace") {
  const fs::path dir = sandbox() / "can";
  REQUIRE(run({"gen-can", "--topology", "chain", "--n", "3", "--sections", "1",
               "--seed", "11", "--out-dir", dir.string()}) == 0);
  REQUIRE(fs::exists(dir / "truth.json"));
  REQUIRE(fs::exists(dir / "section_000.json"));

  const std::string report = (dir / "report.csv").string();
  const std::string trace = (dir / "trace.json").string();
  CHECK(run({"learn-can", "--truth", (dir / "truth.json").string(),
             "--section", (dir / "section_000.json").string(),
             "--ntrials", "10", "--seed", "11",
             "--report", report, "--trace", trace}) == 0);

  std::istringstream in(slurp(report));
  std::string header, row;
  std::getline(in, header);
  CHECK(header == report::kCanHeader);
  REQUIRE(std::getline(in, row));
  CHECK(row.rfind("chain,3,0,10,", 0) == 0);  // section_seed parsed from filename

  std::vector<std::string> cells;
  std::istringstream cs(row);
  std::string cell;
  while (std::getline(cs, cell, ',')) cells.push_back(cell);
  REQUIRE(cells.size() == 9);
  CHECK(std::stoi(cells[4]) + std::stoi(cells[5]) == 3);  // launched + skipped

  nlohmann::json t = nlohmann::json::parse(slurp(trace));
  CHECK(t["version"] == 1);
  CHECK(t["p_history"].size() == 2);
  CHECK(t["solved"].is_array());
  CHECK(t["skipped"].is_array());
}

TEST_CASE("learn-can honours --section-seed override") {
  const fs::path dir = sandbox() / "can_ss";
  REQUIRE(run({"gen-can", "--topology", "star", "--n", "3", "--sections", "1",
               "--seed", "12", "--out-dir", dir.string()}) == 0);
  const std::string report = (dir / "report.csv").string();
  CHECK(run({"learn-can", "--truth", (dir / "truth.json").string(),
             "--section", (dir / "section_000.json").string(),
             "--ntrials", "5", "--seed", "12", "--section-seed", "99",
             "--report", report}) == 0);
  std::istringstream in(slurp(report));
  std::string header, row;
  std::getline(in, header);
  REQUIRE(std::getline(in, row));
  CHECK(row.rfind("star,3,99,5,", 0) == 0);
}

TEST_CASE("report aggregates CSVs into a summary") {
  const fs::path dir = sandbox() / "agg";
  fs::create_directories(dir);
  const fs::path csv = dir / "local.csv";
  {
    std::ofstream f(csv);
    f << report::kLocalHeader << "\n";
    f << "i0,12,4,1,10,1,0,5,0.1,0.1,0.1,0.1,0.001,0.5,1,1\n";
    f << "i1,12,4,2,10,1,1,6,0.1,0.1,0.1,0.1,0.003,0.6,1,1\n";
  }
  const std::string out = (dir / "summary.csv").string();
  CHECK(run({"report", "--reports", csv.string(), "--out", out}) == 0);
  const std::string text = slurp(out);
  CHECK(text.rfind("group,metric,count,q25,median,q75\n", 0) == 0);
  CHECK(text.find("l12_h4_t10,kl,2,") != std::string::npos);

  const fs::path bad = dir / "bad.csv";
  std::ofstream(bad) << "nope\n";
  CHECK(run({"report", "--reports", bad.string(), "--out", out}) == 3);
}

TEST_CASE("config file fills unset flags and flags win") {
  const fs::path dir = sandbox() / "cfg";
  fs::create_directories(dir);
  const fs::path cfg = dir / "config.json";
  std::ofstream(cfg) << R"({"l": 6, "h": 3, "seed": 21, "count": 1})";

  const fs::path a = dir / "from_config";
  REQUIRE(run({"--config", cfg.string(), "gen-local", "--out-dir", a.string()}) == 0);
  nlohmann::json ma = nlohmann::json::parse(slurp(a / "manifest.json"));
  CHECK(ma["seed"] == 21);
  CHECK(ma["params"]["l"] == 6);

  const fs::path b = dir / "flag_wins";
  REQUIRE(run({"--config", cfg.string(), "gen-local", "--seed", "22",
               "--out-dir", b.string()}) == 0);
  nlohmann::json mb = nlohmann::json::parse(slurp(b / "manifest.json"));
  CHECK(mb["seed"] == 22);
}

TEST_CASE("CANLEARN_SEED applies only when flag and config are silent") {
  const fs::path dir = sandbox() / "env";
  setenv("CANLEARN_SEED", "33", 1);
  const fs::path a = dir / "env_used";
  REQUIRE(run({"gen-local", "--l", "6", "--h", "3", "--out-dir", a.string()}) == 0);
  nlohmann::json ma = nlohmann::json::parse(slurp(a / "manifest.json"));
  CHECK(ma["seed"] == 33);

  const fs::path b = dir / "flag_beats_env";
  REQUIRE(run({"gen-local", "--l", "6", "--h", "3", "--seed", "34",
               "--out-dir", b.string()}) == 0);
  nlohmann::json mb = nlohmann::json::parse(slurp(b / "manifest.json"));
  CHECK(mb["seed"] == 34);

  setenv("CANLEARN_SEED", "not-a-number", 1);
  CHECK(run({"gen-local", "--l", "6", "--h", "3",
             "--out-dir", (dir / "bad_env").string()}) == 2);
  unsetenv("CANLEARN_SEED");
}
