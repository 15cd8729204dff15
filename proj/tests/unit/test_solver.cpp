#include <cmath>
#include <memory>
#include <random>

#include <doctest.h>

#include "bdm/coefficients.hpp"
#include "bdm/equilibrium.hpp"
#include "bdm/solver.hpp"
#include "test_support.hpp"

using namespace bdm;

namespace {

CoefficientModel constant_model(double a, double b) {
  return make_custom_model([a](std::size_t) { return a; }, [b](std::size_t) { return b; });
}

ClusterState monodisperse(std::size_t n, double rho) {
  ClusterState s;
  s.c.assign(n, 0.0);
  s.c[0] = rho;
  return s;
}

}  // namespace

TEST_CASE("net rates small cases") {
  const auto m = constant_model(1, 2);
  const std::vector<double> c{0.5, 0.25, 0.0};
  const auto w = net_rates(c, m);
  REQUIRE(w.size() == 3);
  CHECK(w[0] == doctest::Approx(-0.25));
  CHECK(w[1] == doctest::Approx(0.125));
  CHECK(w[2] == 0.0);

  const auto ones = constant_model(1, 1);
  const std::vector<double> delta{1.0, 0.0, 0.0, 0.0};
  const auto w1 = net_rates(delta, ones);
  CHECK(w1[0] == 1.0);
  for (std::size_t i = 1; i < w1.size(); ++i) CHECK(w1[i] == 0.0);
}

TEST_CASE("right-hand side small case") {
  const auto m = constant_model(1, 2);
  const std::vector<double> c{0.5, 0.25, 0.0};
  const auto f = rhs(c, m);
  CHECK(f[0] == doctest::Approx(0.375));
  CHECK(f[1] == doctest::Approx(-0.375));
  CHECK(f[2] == doctest::Approx(0.125));
}

TEST_CASE("right-hand side conserves density on random states") {
  const auto m = make_power_law_model(0.5, 1.0, 1.0, 0.5);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const auto c = bdm_test::random_state(rng, 300, 20.0);
    const auto f = rhs(c, m);
    double sum = 0.0;
    double scale = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      sum += static_cast<double>(i + 1) * f[i];
      scale += std::abs(static_cast<double>(i + 1) * f[i]);
    }
    CHECK(std::abs(sum) <= 1e-13 * scale);
  }
}

TEST_CASE("right-hand side vanishes at equilibrium") {
  const auto m = make_power_law_model(0.5, 1.0, 1.0, 0.5);
  const auto eq = compute_equilibrium(m, 1.0, 400);
  const auto f = rhs(eq.profile, m);
  double worst = 0.0;
  for (double v : f) worst = std::max(worst, std::abs(v));
  CHECK(worst <= 1e-15);
}

TEST_CASE("density and moments") {
  const std::vector<double> c{1.0, 0.5, 0.25};
  CHECK(density(c) == doctest::Approx(2.75).epsilon(1e-15));
  CHECK(moment(c, 0.0) == doctest::Approx(1.75).epsilon(1e-15));
  CHECK(moment(c, 2.0) == doctest::Approx(1.0 + 2.0 + 2.25).epsilon(1e-15));
  const double e = std::exp(1.0) + 0.5 * std::exp(std::sqrt(2.0)) + 0.25 * std::exp(std::sqrt(3.0));
  CHECK(stretched_moment(c, 1.0, 0.5) == doctest::Approx(e).epsilon(1e-15));
  CHECK(stretched_moment(c, 1.0, 0.5) == doctest::Approx(6.1879654364).epsilon(1e-10));
  const std::vector<double> phi{1.0, 10.0, 100.0};
  CHECK(weighted_sum(c, phi) == doctest::Approx(31.0).epsilon(1e-15));
}

TEST_CASE("uniform grid") {
  const auto g = uniform_grid(2.0, 5);
  REQUIRE(g.size() == 5);
  CHECK(g.front() == 0.0);
  CHECK(g.back() == 2.0);
  CHECK(g[2] == 1.0);
}

TEST_CASE("equilibrium is a fixed point of the integration") {
  const auto m = make_power_law_model(0.5, 1.0, 1.0, 0.5);
  const auto eq = compute_equilibrium(m, 1.0, 500);
  ClusterState s{eq.profile, 0.0};
  IntegrateOptions opts;
  opts.output_times = uniform_grid(10.0, 11);
  const auto traj = integrate(s, m, 10.0, opts);
  double qmax = 0.0;
  for (double v : eq.profile) qmax = std::max(qmax, v);
  double worst = 0.0;
  for (const auto& snap : traj.snapshots) {
    for (std::size_t i = 0; i < snap.c.size(); ++i) {
      worst = std::max(worst, std::abs(snap.c[i] - eq.profile[i]));
    }
  }
  CHECK(worst <= 10 * opts.rel_tol * qmax);
}

TEST_CASE("mass, positivity and free-energy decay along a run") {
  const auto m = make_power_law_model(0.5, 1.0, 1.0, 0.5);
  const auto eq = std::make_shared<EquilibriumData>(compute_equilibrium(m, 1.0, 400));
  IntegrateOptions opts;
  opts.output_times = uniform_grid(40.0, 81);
  opts.moment_orders = {2.0};
  opts.stretched_orders = {{1.0, 0.5}};
  opts.equilibrium = eq;
  const auto traj = integrate(monodisperse(400, 1.0), m, 40.0, opts);
  REQUIRE(traj.size() == 81);
  double prev_h = traj.snapshots.front().free_energy;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const auto& snap = traj.snapshots[k];
    CHECK(std::abs(snap.rho - 1.0) <= 1e-10);
    for (double v : snap.c) CHECK(v >= 0.0);
    CHECK(snap.moments.size() == 1);
    CHECK(snap.stretched.size() == 1);
    CHECK(snap.moments[0] == doctest::Approx(moment(snap.c, 2.0)).epsilon(1e-14));
    if (k > 0) {
      CHECK(snap.t > traj.snapshots[k - 1].t);
      CHECK(snap.free_energy <= prev_h + 10 * opts.rel_tol);
    }
    prev_h = snap.free_energy;
  }
  CHECK(traj.snapshots[1].c1 < 1.0);
}

TEST_CASE("monomer density decreases initially and approaches the activity") {
  const auto m = make_power_law_model(0.5, 1.0, 1.0, 0.5);
  const auto eq = compute_equilibrium(m, 1.0, 400);
  IntegrateOptions opts;
  opts.output_times = uniform_grid(200.0, 201);
  const auto traj = integrate(monodisperse(400, 1.0), m, 200.0, opts);
  CHECK(traj.snapshots[1].c1 < traj.snapshots[0].c1);
  CHECK(traj.snapshots.back().c1 == doctest::Approx(eq.z_bar).epsilon(1e-4));
}

TEST_CASE("self-convergence against a tight reference") {
  const auto m = make_power_law_model(0.5, 1.0, 1.0, 0.5);
  IntegrateOptions opts;
  opts.output_times = {0.0, 5.0};
  const auto coarse = integrate(monodisperse(300, 1.0), m, 5.0, opts);
  opts.rel_tol = 1e-10;
  const auto fine = integrate(monodisperse(300, 1.0), m, 5.0, opts);
  const auto& a = coarse.snapshots.back().c;
  const auto& b = fine.snapshots.back().c;
  double cmax = 0.0;
  double err = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cmax = std::max(cmax, std::abs(b[i]));
    err = std::max(err, std::abs(a[i] - b[i]));
  }
  CHECK(err <= 100 * 1e-8 * cmax);
}

TEST_CASE("weak form residuals") {
  const auto m = make_power_law_model(0.5, 1.0, 1.0, 0.5);
  const std::size_t n = 200;
  IntegrateOptions opts;
  opts.output_times = uniform_grid(2.0, 201);
  opts.rel_tol = 1e-10;
  const auto traj = integrate(monodisperse(n, 1.0), m, 2.0, opts);
  std::vector<double> linear(n), ones(n, 1.0), square(n);
  for (std::size_t i = 0; i < n; ++i) {
    linear[i] = static_cast<double>(i + 1);
    square[i] = linear[i] * linear[i];
  }
  for (std::size_t k : {1u, 50u, 100u, 199u}) {
    CHECK(weak_form_residual(traj, linear, k) <= 1e-8);
    // Second-order difference on dt = 0.01.
    CHECK(weak_form_residual(traj, ones, k) <= 1e-3);
  }

  const auto eq = compute_equilibrium(m, 1.0, n);
  IntegrateOptions eopts;
  eopts.output_times = uniform_grid(1.0, 11);
  const auto still = integrate(ClusterState{eq.profile, 0.0}, m, 1.0, eopts);
  CHECK(weak_form_residual(still, square, 5) <= 1e-10);
}

TEST_CASE("integration is deterministic") {
  const auto m = make_exponential_tail_model(0.5, 1.0, 1.0, 0.5);
  IntegrateOptions opts;
  opts.output_times = uniform_grid(5.0, 6);
  const auto a = integrate(monodisperse(200, 0.5), m, 5.0, opts);
  const auto b = integrate(monodisperse(200, 0.5), m, 5.0, opts);
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(a.snapshots[k].c == b.snapshots[k].c);
}

TEST_CASE("states can be dropped from snapshots") {
  const auto m = make_power_law_model(0.5, 1.0, 1.0, 0.5);
  IntegrateOptions opts;
  opts.keep_states = false;
  opts.moment_orders = {2.0};
  const auto traj = integrate(monodisperse(100, 1.0), m, 1.0, opts);
  REQUIRE(traj.size() == 2);
  CHECK(traj.snapshots.back().c.empty());
  CHECK(std::isnan(traj.snapshots.back().free_energy));
  CHECK(traj.snapshots.back().moments.size() == 1);
}
