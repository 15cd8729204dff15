#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bdm/coefficients.hpp"
#include "bdm/solver.hpp"

namespace bdm {

/// G_j = sum_{i>=j} c_i, accumulated right to left.
[[nodiscard]] std::vector<double> tail_density(std::span<const double> c);

/// c_j = G_j - G_{j+1} with G_{N+1} = 0.
[[nodiscard]] std::vector<double> tail_differences(std::span<const double> g);

/// sum_j j^k G_j
[[nodiscard]] double tail_moment(std::span<const double> g, double k);

/// Weights psi_j = j^(mu-1) exp(alpha j^mu) and the constants eta1 <= eta2 with
/// eta1 sum psi_j G_j <= E_{alpha,mu}(c) <= eta2 sum psi_j G_j.
struct StretchedWeights {
  double alpha = 1.0;
  double mu = 0.5;
  double eta1 = 0.0;
  double eta2 = 0.0;
  /// Index at which the infimum defining eta1 was found.
  std::size_t argmin = 2;

  [[nodiscard]] double psi(std::size_t j) const;
  [[nodiscard]] std::vector<double> psi_sequence(std::size_t n) const;
};

inline constexpr std::size_t kDefaultEtaScan = 10000;

/// Throws ParameterError unless alpha > 0 and 0 < mu < 1.
[[nodiscard]] StretchedWeights stretched_weights(double alpha, double mu,
                                                 std::size_t scan = kDefaultEtaScan);

/// lower <= middle <= upper with margins middle - lower and upper - middle.
struct SandwichReport {
  double lower = 0.0;
  double middle = 0.0;
  double upper = 0.0;

  [[nodiscard]] double lower_margin() const noexcept { return middle - lower; }
  [[nodiscard]] double upper_margin() const noexcept { return upper - middle; }
  /// Both margins non-negative up to rel_slack * upper.
  [[nodiscard]] bool holds(double rel_slack = 1e-12) const noexcept;
};

/// M_{k+1}(c)/(k+1) <= M_k(G) <= M_{k+1}(c).
[[nodiscard]] SandwichReport moment_sandwich(std::span<const double> c, double k);

/// eta1 sum psi_j G_j <= E_{alpha,mu}(c) <= eta2 sum psi_j G_j.
[[nodiscard]] SandwichReport stretched_sandwich_check(std::span<const double> c,
                                                      const StretchedWeights& weights);

/// a_{j-1} c1 (G_{j-1} - G_j) + b_j (G_{j+1} - G_j) for j = 2..N-1; element
/// k of the result belongs to j = k + 2.
[[nodiscard]] std::vector<double> tail_rhs(std::span<const double> g, double c1,
                                           const RateTable& rates);
[[nodiscard]] std::vector<double> tail_rhs(std::span<const double> g, double c1,
                                           const CoefficientModel& model);

}  // namespace bdm
