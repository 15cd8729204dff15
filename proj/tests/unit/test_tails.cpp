#include <cmath>
#include <random>

#include <doctest.h>

#include "bdm/coefficients.hpp"
#include "bdm/equilibrium.hpp"
#include "bdm/errors.hpp"
#include "bdm/solver.hpp"
#include "bdm/tails.hpp"
#include "test_support.hpp"

using namespace bdm;

TEST_CASE("tail density small cases") {
  const std::vector<double> c{1.0, 0.5, 0.25};
  const auto g = tail_density(c);
  CHECK(g == std::vector<double>{1.75, 0.75, 0.25});
  CHECK(tail_density(std::vector<double>{1.0, 0.0, 0.0}) == std::vector<double>{1.0, 0.0, 0.0});
  CHECK(tail_differences(g) == c);
}

TEST_CASE("reconstruction is exact on representable sums") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const auto c = bdm_test::dyadic_state(rng, 100);
    CHECK(tail_differences(tail_density(c)) == c);
  }
}

TEST_CASE("reconstruction of arbitrary doubles is accurate and G is monotone") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const auto c = bdm_test::random_state(rng, 100, 30.0);
    const auto g = tail_density(c);
    const auto back = tail_differences(g);
    for (std::size_t j = 0; j < c.size(); ++j) {
      CHECK(std::abs(back[j] - c[j]) <= 4 * std::numeric_limits<double>::epsilon() * g[j]);
      if (j + 1 < c.size()) CHECK(g[j] >= g[j + 1]);
    }
  }
}

TEST_CASE("moment sandwich") {
  const std::vector<double> delta{1.0, 0.0, 0.0};
  for (double k : {0.0, 1.0, 2.0, 3.0, 5.0}) {
    const auto s = moment_sandwich(delta, k);
    CHECK(s.middle == 1.0);
    CHECK(s.upper == 1.0);
    CHECK(s.lower == doctest::Approx(1.0 / (k + 1.0)));
    CHECK(s.holds());
  }
  const auto tight = moment_sandwich(std::vector<double>{1.0, 0.5, 0.25}, 0.0);
  CHECK(tight.middle == doctest::Approx(2.75));
  CHECK(tight.upper == doctest::Approx(2.75));

  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const auto c = bdm_test::random_state(rng, 200, 25.0);
    const auto g = tail_density(c);
    for (double k : {0.0, 1.0, 2.0, 3.0, 5.0}) {
      const auto s = moment_sandwich(c, k);
      CHECK(s.holds());
      CHECK(s.middle == doctest::Approx(tail_moment(g, k)).epsilon(1e-14));
      CHECK(s.upper == doctest::Approx(moment(c, k + 1.0)).epsilon(1e-14));
    }
  }
}

TEST_CASE("stretched weights") {
  const auto w = stretched_weights(1.0, 0.5);
  CHECK(w.psi(1) == doctest::Approx(std::exp(1.0)).epsilon(1e-15));
  CHECK(w.psi(4) == doctest::Approx(std::exp(2.0) / 2.0).epsilon(1e-15));
  CHECK(w.eta2 == 1.0);
  CHECK(w.eta1 == doctest::Approx(0.5 * std::exp(1.0 - std::sqrt(2.0))).epsilon(1e-14));
  CHECK(w.eta1 == doctest::Approx(0.3304299007).epsilon(1e-9));
  CHECK(w.argmin == 2);
  const auto seq = w.psi_sequence(5);
  REQUIRE(seq.size() == 5);
  CHECK(seq[3] == w.psi(4));

  const auto steep = stretched_weights(8.0, 0.5);
  CHECK(steep.eta2 == doctest::Approx(std::max(1.0, std::sqrt(2.0) * 4.0)));
  CHECK(steep.eta1 <= steep.eta2);

  CHECK_THROWS_AS((void)stretched_weights(0.0, 0.5), ParameterError);
  CHECK_THROWS_AS((void)stretched_weights(1.0, 1.0), ParameterError);
}

TEST_CASE("stretched sandwich") {
  const auto w = stretched_weights(1.0, 0.5);
  const auto d = stretched_sandwich_check(std::vector<double>{1.0, 0.0, 0.0}, w);
  CHECK(d.middle == doctest::Approx(std::exp(1.0)));
  CHECK(d.holds());

  std::vector<double> geometric(200);
  for (std::size_t i = 0; i < geometric.size(); ++i) geometric[i] = std::ldexp(1.0, -static_cast<int>(i + 1));
  CHECK(stretched_sandwich_check(geometric, w).holds());

  std::mt19937_64 rng(4);
  const auto big = bdm_test::random_state(rng, 1000, 100.0);
  const auto r = stretched_sandwich_check(big, w);
  CHECK(r.lower_margin() >= 0.0);
  CHECK(r.upper_margin() >= 0.0);

  for (auto [alpha, mu] : {std::pair{1.0, 0.5}, std::pair{0.5, 0.3}, std::pair{2.0, 0.25}}) {
    const auto ww = stretched_weights(alpha, mu);
    for (int trial = 0; trial < 100; ++trial) {
      const auto c = bdm_test::random_state(rng, 200, 15.0);
      CHECK(stretched_sandwich_check(c, ww).holds());
    }
  }
}

TEST_CASE("tail dynamics equal the shifted net rates") {
  const auto m = make_power_law_model(0.5, 1.0, 1.0, 0.5);
  std::mt19937_64 rng(6);
  const auto c = bdm_test::random_state(rng, 60, 10.0);
  const auto g = tail_density(c);
  const auto f = tail_rhs(g, c[0], m);
  const auto w = net_rates(c, m);
  REQUIRE(f.size() == c.size() - 2);
  for (std::size_t k = 0; k < f.size(); ++k) {
    CHECK(f[k] == doctest::Approx(w[k]).epsilon(1e-12).scale(std::abs(w[0])));
  }
}

TEST_CASE("tail dynamics vanish at equilibrium") {
  const auto m = make_exponential_tail_model(0.5, 1.0, 1.0, 0.5);
  const auto eq = compute_equilibrium(m, 0.5, 300);
  const auto f = tail_rhs(tail_density(eq.profile), eq.z_bar, m);
  for (double v : f) CHECK(std::abs(v) <= 1e-15);
}
