#include "bdm/tails.hpp"

#include <algorithm>
#include <cmath>

#include "bdm/errors.hpp"
#include "bdm/summation.hpp"

namespace bdm {

std::vector<double> tail_density(std::span<const double> c) {
  std::vector<double> g(c.size());
  double acc = 0.0;
  for (std::size_t k = c.size(); k-- > 0;) {
    acc += c[k];
    g[k] = acc;
  }
  return g;
}

std::vector<double> tail_differences(std::span<const double> g) {
  std::vector<double> c(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    c[k] = g[k] - (k + 1 < g.size() ? g[k + 1] : 0.0);
  }
  return c;
}

double tail_moment(std::span<const double> g, double k) { return moment(g, k); }

double StretchedWeights::psi(std::size_t j) const {
  const double x = static_cast<double>(j);
  return std::pow(x, mu - 1.0) * std::exp(alpha * std::pow(x, mu));
}

std::vector<double> StretchedWeights::psi_sequence(std::size_t n) const {
  std::vector<double> out(n);
  for (std::size_t j = 1; j <= n; ++j) out[j - 1] = psi(j);
  return out;
}

StretchedWeights stretched_weights(double alpha, double mu, std::size_t scan) {
  if (!(alpha > 0.0) || !(mu > 0.0 && mu < 1.0)) {
    throw ParameterError("stretched_weights: need alpha > 0 and 0 < mu < 1");
  }
  StretchedWeights w;
  w.alpha = alpha;
  w.mu = mu;
  w.eta2 = std::max(1.0, std::pow(2.0, 1.0 - mu) * alpha * mu);
  // inf_{j>=2} exp(alpha (j-1)^mu - alpha j^mu); the exponent tends to 0 from below.
  double best = 0.0;
  std::size_t arg = 2;
  double best_exponent = 0.0;
  for (std::size_t j = 2; j <= std::max<std::size_t>(scan, 2); ++j) {
    const double x = static_cast<double>(j);
    const double e = alpha * (std::pow(x - 1.0, mu) - std::pow(x, mu));
    if (j == 2 || e < best_exponent) {
      best_exponent = e;
      arg = j;
    }
  }
  best = std::min(std::exp(best_exponent), 1.0);
  w.argmin = arg;
  w.eta1 = std::min(1.0, alpha * mu * best);
  return w;
}

bool SandwichReport::holds(double rel_slack) const noexcept {
  const double slack = rel_slack * std::abs(upper);
  return lower_margin() >= -slack && upper_margin() >= -slack;
}

SandwichReport moment_sandwich(std::span<const double> c, double k) {
  if (!(k >= 0.0)) {
    throw ParameterError("moment_sandwich: k must be non-negative");
  }
  const std::vector<double> g = tail_density(c);
  const double upper = moment(c, k + 1.0);
  return {upper / (k + 1.0), tail_moment(g, k), upper};
}

SandwichReport stretched_sandwich_check(std::span<const double> c,
                                        const StretchedWeights& weights) {
  const std::vector<double> g = tail_density(c);
  CompensatedSum s;
  for (std::size_t j = 1; j <= g.size(); ++j) {
    if (g[j - 1] != 0.0) s += weights.psi(j) * g[j - 1];
  }
  const double psi_sum = s.value();
  return {weights.eta1 * psi_sum, stretched_moment(c, weights.alpha, weights.mu),
          weights.eta2 * psi_sum};
}

std::vector<double> tail_rhs(std::span<const double> g, double c1, const RateTable& rates) {
  const std::size_t n = g.size();
  if (n < 3) return {};
  std::vector<double> out(n - 2);
  for (std::size_t j = 2; j + 1 <= n; ++j) {
    out[j - 2] = rates.a[j - 1] * c1 * (g[j - 2] - g[j - 1]) + rates.b[j] * (g[j] - g[j - 1]);
  }
  return out;
}

std::vector<double> tail_rhs(std::span<const double> g, double c1,
                             const CoefficientModel& model) {
  return tail_rhs(g, c1, tabulate_rates(model, std::max<std::size_t>(g.size(), 2)));
}

}  // namespace bdm
