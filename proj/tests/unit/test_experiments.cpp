#include <cmath>
#include <fstream>

#include <doctest.h>

#include "bdm/config.hpp"
#include "bdm/equilibrium.hpp"
#include "bdm/errors.hpp"
#include "bdm/experiments.hpp"
#include "bdm/solver.hpp"
#include "test_support.hpp"

using namespace bdm;

namespace {

Trajectory monomer_trace(const std::vector<double>& c1) {
  Trajectory t;
  for (std::size_t k = 0; k < c1.size(); ++k) {
    Snapshot s;
    s.t = static_cast<double>(k);
    s.c1 = c1[k];
    t.snapshots.push_back(s);
  }
  return t;
}

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.n = 200;
  c.t_end = 20.0;
  c.n_output = 201;
  return c;
}

}  // namespace

TEST_CASE("short-time constant for the linear weight") {
  const auto m = make_power_law_model(0.5, 1.0, 1.0, 0.5);
  const auto c = short_time_constant(m, power_weight(1.0), 1.0, 10000);
  CHECK(c.epsilon == doctest::Approx(1.0));
  CHECK(c.a_phi == doctest::Approx(1.0));
  CHECK(c.b_bar == doctest::Approx(2.0));
  CHECK(c.c_phi == doctest::Approx(3.0));
}

TEST_CASE("short-time constant for the square weight is attained at small sizes") {
  const auto m = make_power_law_model(0.5, 1.0, 1.0, 0.5);
  const auto c = short_time_constant(m, power_weight(2.0), 1.0, 10000);
  double sup = 0.0;
  for (std::size_t i = 1; i <= 10000; ++i) {
    const double x = static_cast<double>(i);
    sup = std::max(sup, std::sqrt(x) * (2.0 * x + 1.0) / (x * x));
  }
  CHECK(c.a_phi == doctest::Approx(sup).epsilon(1e-14));
  CHECK(c.a_phi == doctest::Approx(3.0));
  CHECK(c.epsilon == doctest::Approx(3.0));
}

TEST_CASE("exponential weights have no short-time constant") {
  const auto m = make_power_law_model(0.5, 1.0, 1.0, 0.5);
  CHECK_THROWS_AS((void)short_time_constant(m, exp_weight(1.0), 1.0, 500), ParameterError);
  const auto constant = [](std::size_t) { return 1.0; };
  CHECK_THROWS_AS((void)short_time_constant(m, constant, 1.0, 100), ParameterError);
}

TEST_CASE("threshold detection") {
  const auto below = detect_threshold(monomer_trace({0.3, 0.3, 0.3}), 0.5);
  REQUIRE(below.t0.has_value());
  CHECK(*below.t0 == 0.0);
  CHECK_FALSE(below.never_below);

  const auto later = detect_threshold(monomer_trace({1.0, 0.4, 0.6, 0.45, 0.4, 0.4}), 0.5);
  REQUIRE(later.t0.has_value());
  CHECK(*later.t0 == 3.0);
  CHECK(later.index == 3);
  CHECK_FALSE(later.inconclusive);

  const auto never = detect_threshold(monomer_trace({1.0, 0.8, 0.7}), 0.5);
  CHECK(never.never_below);
  CHECK_FALSE(never.t0.has_value());

  const auto last = detect_threshold(monomer_trace({1.0, 0.8, 0.4}), 0.5);
  CHECK(last.inconclusive);
}

TEST_CASE("threshold on simulated trajectories") {
  const auto m = make_power_law_model(0.5, 1.0, 1.0, 0.5);
  const auto eq = compute_equilibrium(m, 1.0, 200);
  IntegrateOptions opts;
  opts.output_times = uniform_grid(20.0, 41);
  const auto still = integrate(ClusterState{eq.profile, 0.0}, m, 20.0, opts);
  CHECK(*detect_threshold(still, eq.z_bar + 0.01).t0 == 0.0);
  CHECK(detect_threshold(still, eq.z_bar - 0.01).never_below);

  const auto dense = compute_equilibrium(m, 3.0, 400);
  ClusterState mono;
  mono.c.assign(400, 0.0);
  mono.c[0] = 3.0;
  const auto run = integrate(mono, m, 20.0, opts);
  const auto th = detect_threshold(run, dense.z_bar + 0.05 * (1.0 - dense.z_bar));
  REQUIRE(th.t0.has_value());
  CHECK(*th.t0 > 0.0);
  CHECK(*th.t0 < 20.0);
}

TEST_CASE("moment requests are validated") {
  const auto m = make_power_law_model(0.5, 1.0, 1.0, 0.5);
  ExperimentConfig c;
  c.moment_orders = {1.4};
  CHECK_THROWS_AS(validate_moment_requests(c, m), ConfigError);
  c.moment_orders = {1.5, 3.0};
  CHECK_NOTHROW(validate_moment_requests(c, m));
  c.stretched_orders = {{1.0, 0.5}};
  CHECK_NOTHROW(validate_moment_requests(c, m));
  c.stretched_orders = {{1.0, 0.6}};
  CHECK_THROWS_AS(validate_moment_requests(c, m), ConfigError);
  const auto lin = make_power_law_model(1.0, 2.0, 1.0, 0.5);
  c.moment_orders = {2.0};
  c.stretched_orders = {{1.0, 0.1}};
  CHECK_THROWS_AS(validate_moment_requests(c, lin), ConfigError);
}

TEST_CASE("initial states carry the configured density") {
  const auto m = make_power_law_model(0.5, 1.0, 1.0, 0.5);
  const auto eq = compute_equilibrium(m, 1.0, 100);
  ExperimentConfig c;
  c.n = 100;
  c.initial.rho = 1.0;
  for (const char* shape : {"monodisperse", "geometric", "equilibrium", "random"}) {
    c.initial.shape = shape;
    const auto s = build_initial_state(c, eq);
    CHECK(s.size() == 100);
    CHECK(density(s.c) == doctest::Approx(1.0).epsilon(1e-14));
  }
  c.initial.shape = "random";
  c.initial.seed = 3;
  const auto a = build_initial_state(c, eq);
  const auto b = build_initial_state(c, eq);
  CHECK(a.c == b.c);
  c.initial.seed = 4;
  CHECK(build_initial_state(c, eq).c != a.c);

  const auto dir = bdm_test::scratch_dir("initial");
  {
    std::ofstream out(dir / "c.txt");
    out << "# i c\n1 0.5\n3 0.25\n";
  }
  c.initial.shape = "file";
  c.initial.file = dir / "c.txt";
  const auto f = build_initial_state(c, eq);
  CHECK(f.c[1] == 0.0);
  CHECK(f.c[2] / f.c[0] == doctest::Approx(0.5));
  c.initial.file = dir / "missing.txt";
  CHECK_THROWS_AS((void)build_initial_state(c, eq), IoError);
  c.initial.shape = "blob";
  CHECK_THROWS_AS((void)build_initial_state(c, eq), ConfigError);
}

TEST_CASE("omega choice") {
  ExperimentConfig c;
  CHECK(choose_omega(c, 0.5, 1.0) == doctest::Approx(0.55));
  c.omega_strategy = OmegaStrategy::kExplicit;
  c.omega_value = 0.8;
  CHECK(choose_omega(c, 0.5, 1.0) == 0.8);
}

TEST_CASE("equilibrium data passes every stage") {
  auto c = small_config();
  c.initial.shape = "equilibrium";
  const auto rep = run_uniform_moment_experiment(c);
  CHECK(rep.verdict);
  CHECK_FALSE(rep.failed_stage.has_value());
  REQUIRE(rep.threshold.t0.has_value());
  CHECK(*rep.threshold.t0 == 0.0);
  REQUIRE(rep.certificates.size() == 1);
  const auto& cert = rep.certificates.front();
  CHECK(cert.certified >= cert.observed_all);
  CHECK(rep.max_mass_drift <= 1e-10);
  CHECK(rep.stages.size() == 6);
}

TEST_CASE("small monodisperse replay") {
  auto c = small_config();
  c.t_end = 60.0;
  c.n_output = 601;
  c.moment_orders = {2.0, 3.0};
  const auto rep = run_uniform_moment_experiment(c);
  CHECK(rep.verdict);
  REQUIRE(rep.threshold.t0.has_value());
  CHECK(*rep.threshold.t0 > 0.0);
  for (const auto& cert : rep.certificates) {
    CHECK(cert.holds);
    CHECK(cert.certified >= cert.observed_after);
  }
  REQUIRE(rep.short_time.size() == 2);
  for (const auto& st : rep.short_time) CHECK(st.holds);
  CHECK(rep.domination.holds());
  CHECK(rep.distance_to_equilibrium.size() == 601);
  CHECK(rep.distance_to_equilibrium.back() < rep.distance_to_equilibrium.front());
}

TEST_CASE("supercritical densities and bad thresholds are refused") {
  auto c = small_config();
  c.model.family = "exponential_tail";
  c.initial.rho = 100.0;
  CHECK_THROWS_AS((void)run_uniform_moment_experiment(c), SupercriticalError);
  auto d = small_config();
  d.omega_strategy = OmegaStrategy::kExplicit;
  d.omega_value = 1.5;
  CHECK_THROWS_AS((void)run_uniform_moment_experiment(d), ConfigError);
}

TEST_CASE("threshold above the monomer level fails the threshold stage") {
  auto c = small_config();
  c.omega_strategy = OmegaStrategy::kExplicit;
  c.omega_value = 0.05;
  const auto rep = run_uniform_moment_experiment(c);
  CHECK_FALSE(rep.verdict);
  REQUIRE(rep.failed_stage.has_value());
  CHECK(*rep.failed_stage == "threshold");
}

TEST_CASE("runs are deterministic and sweeps match sequential runs") {
  auto c = small_config();
  const auto a = run_uniform_moment_experiment(c);
  const auto b = run_uniform_moment_experiment(c);
  REQUIRE(a.trajectory.size() == b.trajectory.size());
  for (std::size_t k = 0; k < a.trajectory.size(); ++k) {
    CHECK(a.trajectory.snapshots[k].c == b.trajectory.snapshots[k].c);
  }
  CHECK(a.certificates.front().certified == b.certificates.front().certified);

  const auto base = KeyValueFile::parse(
      "[truncation]\nN = 200\n[time]\nt_end = 20\nn_output = 201\n"
      "[sweep]\nparameter = initial.rho\nvalues = 0.5, 1.0, 1.5\n");
  const auto parallel = sweep(base, 3);
  const auto serial = sweep(base, 1);
  REQUIRE(parallel.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(parallel[k].value == serial[k].value);
    REQUIRE(parallel[k].report.has_value());
    REQUIRE(serial[k].report.has_value());
    CHECK(parallel[k].report->rho == serial[k].report->rho);
    CHECK(parallel[k].report->trajectory.snapshots.back().c ==
          serial[k].report->trajectory.snapshots.back().c);
  }
  CHECK(parallel[2].report->rho == 1.5);
  CHECK_THROWS_AS((void)sweep(KeyValueFile::parse(""), 2), ConfigError);
}
