#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bdm/coefficients.hpp"

namespace bdm {

struct LambdaChoice {
  double lambda = 0.0;
  /// Smallest index with b_j >= lambda omega a_{j-1} for every sampled j beyond it.
  std::size_t n_switch = 1;
};

/// lambda = sqrt(delta z_s / omega) and the matching switch index, scanning
/// j = 2..n_max. Throws ParameterError when the switch index is not found.
[[nodiscard]] LambdaChoice choose_lambda(const CoefficientModel& model, double omega,
                                         double delta, std::size_t n_max, double z_s);
[[nodiscard]] LambdaChoice choose_lambda(const CoefficientModel& model, double omega,
                                         double delta, std::size_t n_max);

struct SupersolutionParams {
  double omega = 0.0;
  double rho = 0.0;
  double delta = 1.0;
  double lambda = 0.0;
  std::size_t n_switch = 1;
};

[[nodiscard]] SupersolutionParams make_supersolution_params(const CoefficientModel& model,
                                                            double omega, double rho,
                                                            double delta, std::size_t n_max);

/// Sequence r with r_1 >= rho and
/// a_{j-1} omega (r_{j-1} - r_j) + b_j (r_{j+1} - r_j) <= 0, dominating a tail
/// profile g. Beyond the truncation r continues geometrically with ratio 1/lambda.
struct Supersolution {
  std::vector<double> r;
  /// s_j for j = n_switch..N; s[0] belongs to n_switch.
  std::vector<double> s;
  SupersolutionParams params;
  /// Value added to s_{n_switch} on top of h_{n_switch}.
  double base = 0.0;
  /// sum_{l>N} s_l = s_N / (lambda - 1).
  double tail_closure = 0.0;
  /// Analytic bound on max_j r_j.
  double uniform_bound = 0.0;

  [[nodiscard]] std::size_t size() const noexcept { return r.size(); }
  /// r_j for any j >= 1, using the geometric continuation past N.
  [[nodiscard]] double r_at(std::size_t j) const;
};

inline constexpr double kDefaultTailTolerance = 1e-10;

/// Builds r from g (non-negative, non-increasing, g_1 <= rho and
/// g_N <= tol_tail rho). Throws ParameterError on violated preconditions.
[[nodiscard]] Supersolution build_supersolution(const CoefficientModel& model,
                                                const SupersolutionParams& params,
                                                std::span<const double> g,
                                                double tol_tail = kDefaultTailTolerance);

struct SupersolutionCheck {
  bool first_condition = false;
  double first_margin = 0.0;
  bool second_condition = false;
  /// max_j of the left side divided by a_{j-1} omega r_{j-1} + b_j r_j.
  double worst_residual = 0.0;
  std::size_t worst_index = 0;
  std::optional<std::size_t> first_failure;

  [[nodiscard]] bool holds() const noexcept { return first_condition && second_condition; }
};

/// Checks r_1 >= rho - tol and the difference inequality <= tol * scale_j for
/// 2 <= j <= N-1.
[[nodiscard]] SupersolutionCheck verify_supersolution(std::span<const double> r,
                                                      const CoefficientModel& model,
                                                      double omega, double rho, double tol);

using Weight = std::function<double(std::size_t)>;

[[nodiscard]] Weight power_weight(double k);
[[nodiscard]] Weight stretched_exp_weight(double alpha, double mu);
[[nodiscard]] Weight exp_weight(double eta);

struct WeightedSumBound {
  /// sum_j phi_j r_j including the geometric continuation past N.
  double lhs = 0.0;
  /// C (1 + sum_j phi_j g_j).
  double rhs = 0.0;
  double constant = 0.0;
  double delta_star = 0.0;
  std::size_t m = 0;

  [[nodiscard]] bool holds() const noexcept { return lhs <= rhs; }
};

/// Weighted-sum estimate for a constructed supersolution. The weight must be
/// eventually non-decreasing with phi_j / phi_{j-1} <= delta_star from some M on;
/// throws ParameterError if that fails up to the scan limit.
[[nodiscard]] WeightedSumBound weighted_sum_bound(const Supersolution& sup,
                                                  std::span<const double> g, const Weight& phi);

}  // namespace bdm
