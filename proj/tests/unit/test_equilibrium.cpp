#include <cmath>
#include <random>

#include <doctest.h>

#include "bdm/coefficients.hpp"
#include "bdm/equilibrium.hpp"
#include "bdm/errors.hpp"
#include "bdm/solver.hpp"
#include "test_support.hpp"

using namespace bdm;

namespace {

CoefficientModel constant_model(double a, double b) {
  return make_custom_model([a](std::size_t) { return a; }, [b](std::size_t) { return b; });
}

// Independent long-double oracle for F(z) = sum i Q_i z^i and F'(z).
struct SeriesOracle {
  const CoefficientModel& m;
  std::size_t n;
  std::pair<long double, long double> operator()(long double z) const {
    long double q = 1.0L;
    long double f = 0.0L;
    long double df = 0.0L;
    for (std::size_t i = 1; i <= n; ++i) {
      const long double x = static_cast<long double>(i);
      const long double zi = std::pow(z, x);
      f += x * q * zi;
      df += x * x * q * zi / z;
      q *= static_cast<long double>(m.a(i)) / static_cast<long double>(m.b(i + 1));
    }
    return {f, df};
  }
};

}  // namespace

TEST_CASE("critical values of constant rates") {
  const auto ones = constant_model(1, 1);
  const auto cv = critical_values(ones, 1000);
  CHECK(cv.z_s == doctest::Approx(1.0));
  CHECK(cv.rho_s_infinite);

  const auto halves = constant_model(1, 2);
  const auto cv2 = critical_values(halves, 1000);
  CHECK(cv2.z_s == doctest::Approx(2.0));
  CHECK(cv2.rho_s_infinite);
}

TEST_CASE("critical density of the exponential-tail family is finite") {
  const auto m = make_exponential_tail_model(0.5, 1.0, 1.0, 0.5);
  const auto cv = critical_values(m, 2000);
  CHECK_FALSE(cv.rho_s_infinite);
  CHECK_FALSE(cv.inconclusive);
  CHECK(cv.z_s_est == doctest::Approx(1.0).epsilon(2e-2));
  // Partial-sum oracle at N = 10^6 in long double.
  long double log_q = 0.0L;
  long double sum = 0.0L;
  for (std::size_t i = 1; i <= 1000000; ++i) {
    sum += static_cast<long double>(i) * std::exp(log_q);
    log_q += std::log(static_cast<long double>(m.a(i))) -
             std::log(static_cast<long double>(m.b(i + 1)));
  }
  CHECK(cv.rho_s == doctest::Approx(static_cast<double>(sum)).epsilon(1e-9));
}

TEST_CASE("monomer activity for constant rates matches the quadratic root") {
  const auto m = constant_model(1, 1);
  const auto cv = critical_values(m, 1000);
  const double z = solve_monomer_activity(m, 2.0, cv);
  CHECK(std::abs(z - 0.5) <= 1e-12);
  CHECK(solve_monomer_activity(m, 1e-12, cv) == doctest::Approx(1e-12).epsilon(1e-6));
}

TEST_CASE("bisection agrees with an independent Newton iteration") {
  const auto m = make_exponential_tail_model(0.5, 1.0, 1.0, 0.5);
  const auto cv = critical_values(m, 2000);
  const double rho = 0.5 * cv.rho_s;
  const double z = solve_monomer_activity(m, rho, cv);
  const SeriesOracle oracle{m, 20000};
  long double zn = 0.99L;
  for (int it = 0; it < 100; ++it) {
    const auto [f, df] = oracle(zn);
    const long double step = (f - rho) / df;
    zn -= step;
    if (std::abs(step) < 1e-18L) break;
  }
  CHECK(std::abs(z - static_cast<double>(zn)) <= 1e-10);
}

TEST_CASE("supercritical densities are refused") {
  const auto m = make_exponential_tail_model(0.5, 1.0, 1.0, 0.5);
  const auto cv = critical_values(m, 2000);
  CHECK_THROWS_AS((void)solve_monomer_activity(m, 1.01 * cv.rho_s, cv), SupercriticalError);
}

TEST_CASE("equilibrium profiles") {
  const auto ones = constant_model(1, 1);
  const auto cv = critical_values(ones, 100);
  const auto zero = equilibrium_profile(ones, 0.0, 50, cv);
  for (double v : zero.profile) CHECK(v == 0.0);

  const auto half = equilibrium_profile(ones, 0.5, 50, cv);
  for (std::size_t i = 1; i <= 50; ++i) {
    CHECK(half.profile[i - 1] == doctest::Approx(std::ldexp(1.0, -static_cast<int>(i))).epsilon(1e-15));
  }

  const auto pl = make_power_law_model(0.5, 1.0, 1.0, 0.5);
  const auto eq = equilibrium_profile(pl, 0.3, 10, critical_values(pl, 1000));
  CHECK(eq.profile[1] == doctest::Approx((std::sqrt(2.0) - 1.0) * 0.09).epsilon(1e-14));
  CHECK(eq.profile[1] == doctest::Approx(0.037279220613578565).epsilon(1e-14));
}

TEST_CASE("equilibrium carries the requested density") {
  const auto m = make_power_law_model(0.5, 1.0, 1.0, 0.5);
  const auto eq = compute_equilibrium(m, 1.0, 2000);
  const SeriesOracle oracle{m, 200000};
  CHECK(static_cast<double>(oracle(eq.z_bar).first) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(eq.mass() + eq.tail_remainder - 1.0) <= 1e-10);
  CHECK(eq.z_bar < eq.z_s);
  CHECK(eq.size() == 2000);

  const auto kv = eq.key_values();
  bool has_zbar = false;
  for (const auto& [k, v] : kv) has_zbar = has_zbar || k == "z_bar";
  CHECK(has_zbar);
}

TEST_CASE("net rates vanish at equilibrium") {
  for (const auto& m : {make_power_law_model(0.5, 1.0, 1.0, 0.5),
                        make_exponential_tail_model(0.5, 1.0, 1.0, 0.5)}) {
    const auto eq = compute_equilibrium(m, 0.8, 500);
    const auto w = net_rates(eq.profile, m);
    double scale = 0.0;
    double worst = 0.0;
    for (std::size_t i = 1; i < eq.size(); ++i) {
      scale = std::max(scale, m.a(i) * eq.z_bar * eq.profile[i - 1]);
      worst = std::max(worst, std::abs(w[i - 1]));
    }
    CHECK(worst <= 1e-12 * scale);
  }
}

TEST_CASE("F is strictly increasing and inverted by the solver") {
  const auto m = make_power_law_model(0.5, 1.0, 1.0, 0.5);
  const auto cv = critical_values(m, 2000);
  const EquilibriumDensity f(m, cv.z_s);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 0.999 * cv.z_s);
  for (int k = 0; k < 50; ++k) {
    double z1 = u(rng);
    double z2 = u(rng);
    if (z1 == z2) continue;
    if (z1 > z2) std::swap(z1, z2);
    CHECK(f(z1, 1e-14).value < f(z2, 1e-14).value);
  }
  std::uniform_real_distribution<double> v(0.0, 0.9 * cv.z_s);
  for (int k = 0; k < 30; ++k) {
    const double z = v(rng);
    const double rho = f(z, 1e-15).value;
    CHECK(std::abs(solve_monomer_activity(m, rho, cv) - z) <= 1e-10);
  }
}

TEST_CASE("relative free energy") {
  const auto m = make_power_law_model(0.5, 1.0, 1.0, 0.5);
  const auto eq = compute_equilibrium(m, 1.0, 300);
  double total = 0.0;
  for (double q : eq.profile) total += q;

  CHECK(relative_free_energy(eq.profile, eq) == doctest::Approx(0.0));
  CHECK(std::abs(relative_free_energy(eq.profile, eq)) <= 1e-15);
  const std::vector<double> zero(eq.size(), 0.0);
  CHECK(relative_free_energy(zero, eq) == doctest::Approx(total).epsilon(1e-14));
  std::vector<double> twice = eq.profile;
  for (double& v : twice) v *= 2.0;
  CHECK(relative_free_energy(twice, eq) ==
        doctest::Approx(total * (2.0 * std::log(2.0) - 1.0)).epsilon(1e-13));

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  for (int k = 0; k < 50; ++k) {
    std::vector<double> c = eq.profile;
    for (double& v : c) v *= u(rng);
    CHECK(relative_free_energy(c, eq) > 0.0);
  }
  std::vector<double> negative = eq.profile;
  negative[3] = -1.0;
  CHECK_THROWS_AS((void)relative_free_energy(negative, eq), ParameterError);
}

TEST_CASE("free energy against an empty reference raises with the index") {
  const auto ones = constant_model(1, 1);
  const auto eq = equilibrium_profile(ones, 0.0, 5, critical_values(ones, 100));
  const std::vector<double> c = {0.0, 0.0, 1.0, 0.0, 0.0};
  try {
    (void)relative_free_energy(c, eq);
    FAIL("expected DomainError");
  } catch (const DomainError& e) {
    CHECK(e.index() == 3);
  }
}
