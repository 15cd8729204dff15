#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "bdm/errors.hpp"
#include "bdm/experiments.hpp"
#include "bdm/report.hpp"
#include "test_support.hpp"

using namespace bdm;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.n = 150;
  c.t_end = 10.0;
  c.n_output = 11;
  c.stretched_orders = {{1.0, 0.5}};
  c.write_states = true;
  return c;
}

}  // namespace

TEST_CASE("numbers round-trip through their shortest form") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.0, -2.5}) {
    const std::string s = format_number(v);
    double back = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), back);
    CHECK(back == v);
  }
  CHECK(format_number(2.0) == "2");
  CHECK(state_file_name(12.5) == "state_t12.5.csv");
}

TEST_CASE("small writers") {
  std::ostringstream kv;
  write_key_values(kv, {{"a", "1"}, {"b", "x"}});
  CHECK(kv.str() == "a = 1\nb = x\n");

  std::ostringstream st;
  write_state_csv(st, std::vector<double>{0.5, 0.25});
  CHECK(st.str() == "i,c_i\n1,0.5\n2,0.25\n");

  std::ostringstream tl;
  write_tail_csv(tl, std::vector<double>{0.75, 0.25});
  CHECK(tl.str() == "j,G_j\n1,0.75\n2,0.25\n");
}

TEST_CASE("output directories must exist") {
  CHECK_THROWS_AS(require_directory("/nonexistent/bdm"), IoError);
  CHECK_THROWS_AS((void)open_output("/nonexistent/bdm/file.txt"), IoError);
}

TEST_CASE("report files") {
  const auto rep = run_uniform_moment_experiment(small_config());
  REQUIRE(rep.verdict);

  std::ostringstream csv;
  write_trajectory_csv(csv, rep.trajectory, {{"model", "test"}});
  std::istringstream lines(csv.str());
  std::string line;
  std::getline(lines, line);
  CHECK(line == "#model=test");
  while (std::getline(lines, line) && line.front() == '#') {
    CHECK(line.find('=') != std::string::npos);
  }
  CHECK(line == "t,c1,rho,H,M_2,E_1_0.5");
  std::size_t rows = 0;
  while (std::getline(lines, line)) ++rows;
  CHECK(rows == 11);

  const auto dir = bdm_test::scratch_dir("report");
  CHECK(emit_report(rep, dir) == ExitCode::kPass);
  for (const char* name : {"summary.json", "trajectory.csv", "moments.dat", "supersolution.csv",
                           "supersolution.json", "state_t0.csv", "state_t10.csv",
                           "tail_t0.csv", "tail_t10.csv"}) {
    CHECK_MESSAGE(std::filesystem::exists(dir / name), name);
  }
  const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
  CHECK(summary["verdict"] == true);
  CHECK(summary["failed_stage"].is_null());
  CHECK(summary["stages"].size() == 6);
  CHECK(summary.contains("short_time_bound"));
  CHECK(summary.contains("domination"));

  const auto witness = nlohmann::json::parse(slurp(dir / "supersolution.json"));
  CHECK(witness["lambda"].get<double>() == rep.supersolution->params.lambda);

  const std::string sup_csv = slurp(dir / "supersolution.csv");
  CHECK(sup_csv.rfind("j,r_j,s_j\n", 0) == 0);

  const auto again = bdm_test::scratch_dir("report_again");
  (void)emit_report(run_uniform_moment_experiment(small_config()), again);
  for (const char* name : {"summary.json", "trajectory.csv", "supersolution.csv",
                           "supersolution.json", "state_t10.csv"}) {
    CHECK_MESSAGE(slurp(dir / name) == slurp(again / name), name);
  }

  CHECK_THROWS_AS((void)emit_report(rep, dir / "missing"), IoError);
}

TEST_CASE("failed verdicts name their stage") {
  auto c = small_config();
  c.omega_strategy = OmegaStrategy::kExplicit;
  c.omega_value = 0.05;
  const auto rep = run_uniform_moment_experiment(c);
  const auto j = to_json(rep);
  CHECK(j["verdict"] == false);
  CHECK(j["failed_stage"] == "threshold");
  const auto dir = bdm_test::scratch_dir("report_fail");
  CHECK(emit_report(rep, dir) == ExitCode::kVerdictFail);
}
