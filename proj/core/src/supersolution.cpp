#include "bdm/supersolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "bdm/errors.hpp"
#include "bdm/summation.hpp"

namespace bdm {

LambdaChoice choose_lambda(const CoefficientModel& model, double omega, double delta,
                           std::size_t n_max, double z_s) {
  if (!(z_s > 0.0) || !std::isfinite(z_s)) {
    throw ParameterError("choose_lambda: critical monomer density unavailable");
  }
  if (!(omega > 0.0) || !(omega < z_s)) {
    throw ParameterError("choose_lambda: need 0 < omega < z_s");
  }
  if (!(delta >= 1.0) || !(delta < z_s / omega)) {
    throw ParameterError("choose_lambda: need 1 <= delta < z_s / omega");
  }
  if (n_max < 2) {
    throw ParameterError("choose_lambda: n_max must be at least 2");
  }
  LambdaChoice out;
  out.lambda = std::sqrt(delta * z_s / omega);
  const double factor = out.lambda * omega;
  std::size_t last_fail = 0;
  for (std::size_t j = 2; j <= n_max; ++j) {
    if (model.b(j) < factor * model.a(j - 1)) last_fail = j;
  }
  if (last_fail == n_max) {
    std::ostringstream os;
    os << "choose_lambda: b_j >= lambda omega a_{j-1} fails up to j = " << n_max
       << " (omega = " << omega << " too close to z_s for this truncation)";
    throw ParameterError(os.str());
  }
  out.n_switch = last_fail == 0 ? 1 : last_fail + 1;
  return out;
}

LambdaChoice choose_lambda(const CoefficientModel& model, double omega, double delta,
                           std::size_t n_max) {
  return choose_lambda(model, omega, delta, n_max, model.z_s());
}

SupersolutionParams make_supersolution_params(const CoefficientModel& model, double omega,
                                              double rho, double delta, std::size_t n_max) {
  if (!(rho > 0.0)) {
    throw ParameterError("supersolution: rho must be positive");
  }
  const LambdaChoice lc = choose_lambda(model, omega, delta, n_max);
  return {omega, rho, delta, lc.lambda, lc.n_switch};
}

double Supersolution::r_at(std::size_t j) const {
  if (j == 0) {
    throw ParameterError("Supersolution::r_at: indices start at 1");
  }
  if (j <= r.size()) return r[j - 1];
  return tail_closure * std::pow(params.lambda, -static_cast<double>(j - r.size() - 1));
}

Supersolution build_supersolution(const CoefficientModel& model,
                                  const SupersolutionParams& params, std::span<const double> g,
                                  double tol_tail) {
  (void)model;
  const std::size_t n = g.size();
  const double rho = params.rho;
  const double lambda = params.lambda;
  const double omega = params.omega;
  if (n < 3) {
    throw ParameterError("build_supersolution: profile must have length >= 3");
  }
  if (!(lambda > 1.0) || !(omega > 0.0) || !(rho > 0.0)) {
    throw ParameterError("build_supersolution: need lambda > 1, omega > 0, rho > 0");
  }
  if (params.n_switch < 1 || params.n_switch + 1 > n) {
    throw ParameterError("build_supersolution: switch index beyond the truncation");
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (!(g[j] >= 0.0)) {
      throw ParameterError("build_supersolution: profile negative at j = " +
                           std::to_string(j + 1));
    }
    if (j + 1 < n && g[j + 1] > g[j]) {
      throw ParameterError("build_supersolution: profile increases at j = " +
                           std::to_string(j + 1));
    }
  }
  if (g[0] > rho * (1.0 + 1e-12)) {
    throw ParameterError("build_supersolution: g_1 exceeds rho");
  }
  if (g[n - 1] > tol_tail * rho) {
    std::ostringstream os;
    os << "build_supersolution: g_N = " << g[n - 1] << " exceeds tol_tail * rho; the profile"
       << " has not decayed within the truncation";
    throw ParameterError(os.str());
  }

  Supersolution out;
  out.params = params;
  // The a-term at the switch index carries omega; the second entry keeps
  // r_{n_switch} >= rho when omega (lambda - 1) > 1.
  out.base = rho * std::max(1.0 / (lambda * omega), (lambda - 1.0) / lambda);
  out.uniform_bound = lambda * (out.base + rho) / (lambda - 1.0);

  const std::size_t ns = params.n_switch;
  auto h = [&](std::size_t j) { return g[j - 1] - (j < n ? g[j] : 0.0); };
  out.s.resize(n - ns + 1);
  out.s[0] = out.base + h(ns);
  for (std::size_t j = ns + 1; j <= n; ++j) {
    out.s[j - ns] = std::max(out.s[j - ns - 1] / lambda, h(j));
  }
  out.tail_closure = out.s.back() / (lambda - 1.0);

  out.r.assign(n, 0.0);
  double acc = out.tail_closure;
  for (std::size_t j = n; j >= ns; --j) {
    acc += out.s[j - ns];
    out.r[j - 1] = acc;
    if (j == 1) break;
  }
  const double prefix = std::max(rho, out.r[ns - 1]);
  for (std::size_t j = 1; j < ns; ++j) out.r[j - 1] = prefix;
  return out;
}

SupersolutionCheck verify_supersolution(std::span<const double> r, const CoefficientModel& model,
                                        double omega, double rho, double tol) {
  if (r.size() < 3) {
    throw ParameterError("verify_supersolution: sequence must have length >= 3");
  }
  SupersolutionCheck out;
  out.first_margin = r[0] - rho;
  out.first_condition = r[0] >= rho - tol;
  out.second_condition = true;
  out.worst_residual = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 2; j + 1 <= r.size(); ++j) {
    const double up = model.a(j - 1) * omega;
    const double down = model.b(j);
    const double lhs = up * (r[j - 2] - r[j - 1]) + down * (r[j] - r[j - 1]);
    const double scale = up * r[j - 2] + down * r[j - 1];
    const double residual = scale > 0.0 ? lhs / scale : (lhs > 0.0 ? lhs : 0.0);
    if (residual > out.worst_residual) {
      out.worst_residual = residual;
      out.worst_index = j;
    }
    if (lhs > tol * scale && !out.first_failure) {
      out.first_failure = j;
      out.second_condition = false;
    }
  }
  return out;
}

Weight power_weight(double k) {
  return [k](std::size_t j) { return std::pow(static_cast<double>(j), k); };
}

Weight stretched_exp_weight(double alpha, double mu) {
  return [alpha, mu](std::size_t j) {
    return std::exp(alpha * std::pow(static_cast<double>(j), mu));
  };
}

Weight exp_weight(double eta) {
  return [eta](std::size_t j) { return std::exp(eta * static_cast<double>(j)); };
}

WeightedSumBound weighted_sum_bound(const Supersolution& sup, std::span<const double> g,
                                    const Weight& phi) {
  const std::size_t n = sup.size();
  if (g.size() != n) {
    throw ParameterError("weighted_sum_bound: profile and supersolution lengths differ");
  }
  const double lambda = sup.params.lambda;
  WeightedSumBound out;
  out.delta_star = 0.5 * (sup.params.delta + lambda);

  // The ratio condition must hold on the second half of the scanned range;
  // the range doubles until it does.
  constexpr std::size_t kScanCap = std::size_t{1} << 24;
  std::size_t scan = std::max<std::size_t>(4 * n, n + 1000);
  std::size_t last_fail = 1;
  std::size_t scanned = 1;
  double prev = phi(1);
  for (;;) {
    for (std::size_t j = scanned + 1; j <= scan; ++j) {
      const double cur = phi(j);
      if (!std::isfinite(cur)) {
        throw ParameterError("weighted_sum_bound: weight overflows at j = " + std::to_string(j));
      }
      if (!(cur >= prev) || !((cur - prev) / cur <= 1.0 - 1.0 / out.delta_star)) last_fail = j;
      prev = cur;
    }
    scanned = scan;
    if (2 * last_fail <= scan) break;
    if (scan >= kScanCap) {
      std::ostringstream os;
      os << "weighted_sum_bound: weight grows faster than delta_star = " << out.delta_star
         << " per index up to j = " << last_fail;
      throw ParameterError(os.str());
    }
    scan *= 2;
  }
  out.m = std::max({last_fail + 1, sup.params.n_switch, std::size_t{2}});

  CompensatedSum lhs;
  CompensatedSum weighted_g;
  for (std::size_t j = 1; j <= n; ++j) {
    const double p = phi(j);
    lhs += p * sup.r[j - 1];
    weighted_g += p * g[j - 1];
  }
  // Geometric continuation of r beyond the truncation.
  double term_r = sup.tail_closure;
  for (std::size_t j = n + 1; j < n + 100'000'000; ++j) {
    const double term = phi(j) * term_r;
    if (!std::isfinite(term)) {
      throw ParameterError("weighted_sum_bound: continuation sum overflows");
    }
    lhs += term;
    if (term <= 1e-18 * lhs.value() && j > out.m) break;
    term_r /= lambda;
  }
  out.lhs = lhs.value();

  const double bound = sup.uniform_bound;
  CompensatedSum head;
  for (std::size_t j = 1; j < out.m; ++j) head += phi(j);
  const double ratio = lambda * out.delta_star / (lambda - out.delta_star);
  out.constant = 2.0 * std::max(bound * head.value(),
                                ratio * std::max(1.0, bound * phi(out.m - 1)));
  out.rhs = out.constant * (1.0 + weighted_g.value());
  return out;
}

}  // namespace bdm
