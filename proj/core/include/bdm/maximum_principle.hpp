#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "bdm/coefficients.hpp"
#include "bdm/integrator.hpp"
#include "bdm/solver.hpp"

namespace bdm {

/// Square matrix with non-negative off-diagonal entries, stored densely or as
/// three diagonals. Construction rejects negative off-diagonal entries.
class MetzlerSystem {
 public:
  /// Row-major n x n entries.
  static MetzlerSystem dense(std::size_t n, std::vector<double> entries);
  /// sub[k] = A(k+1, k), diag[k] = A(k, k), super[k] = A(k, k+1).
  static MetzlerSystem tridiagonal(std::vector<double> sub, std::vector<double> diag,
                                   std::vector<double> super);

  [[nodiscard]] std::size_t size() const noexcept { return n_; }
  [[nodiscard]] bool is_tridiagonal() const noexcept { return tridiagonal_; }
  [[nodiscard]] double entry(std::size_t i, std::size_t j) const;
  /// max_i sum_j |A_ij|
  [[nodiscard]] double max_row_sum() const noexcept { return max_row_sum_; }
  void apply(std::span<const double> x, std::span<double> y) const;
  [[nodiscard]] std::vector<double> to_dense() const;

 private:
  MetzlerSystem() = default;
  void finish();

  std::size_t n_ = 0;
  bool tridiagonal_ = false;
  std::vector<double> dense_;
  std::vector<double> sub_;
  std::vector<double> diag_;
  std::vector<double> super_;
  double max_row_sum_ = 0.0;
};

/// Rows j = j_lo..j_hi of the frozen tail operator:
/// (a_{j-1} omega, -(a_{j-1} omega + b_j), b_j).
[[nodiscard]] MetzlerSystem build_tail_comparison_matrix(const CoefficientModel& model,
                                                         double omega, std::size_t j_lo,
                                                         std::size_t j_hi);

/// Forcing s(t) added to u' = A u + s(t).
using Forcing = std::function<void(double t, std::span<double> s)>;

struct LinearTrace {
  std::vector<double> times;
  std::vector<std::vector<double>> states;
  /// max_j u_j(t) at each output time.
  std::vector<double> max_component;
  IntegrationStats stats;
};

/// Integrates u' = A u + s(t) with the Dormand-Prince integrator.
[[nodiscard]] LinearTrace integrate_linear(const MetzlerSystem& system,
                                           std::span<const double> u0,
                                           std::span<const double> times,
                                           const Forcing& forcing = {},
                                           IntegratorOptions options = {1e-12, 1e-15});

struct SignPreservation {
  bool preserved = true;
  /// Threshold used for u_j(t) <= tol_pos.
  double tol_pos = 0.0;
  double worst = 0.0;
  LinearTrace trace;
};

/// Checks that u(t) <= 1e-9 |u0|_inf on a uniform grid of n_out points in
/// [0, t_end] for u0 <= 0 and non-positive forcing.
[[nodiscard]] SignPreservation verify_sign_preservation(const MetzlerSystem& system,
                                                        std::span<const double> u0,
                                                        double t_end,
                                                        const Forcing& slack = {},
                                                        std::size_t n_out = 65);

struct DominationViolation {
  double t = 0.0;
  std::size_t j = 0;
  double gap = 0.0;
};

struct DominationReport {
  std::optional<DominationViolation> first_violation;
  /// max over checked snapshots and j of G_j(t) - r_j.
  double max_gap = 0.0;
  /// Tolerance allowed on the gap.
  double epsilon_used = 0.0;
  std::size_t snapshots_checked = 0;
  double t_start = 0.0;

  [[nodiscard]] bool holds() const noexcept { return !first_violation.has_value(); }
};

/// G_j(t) <= r_j + tol for every snapshot with t >= t_start.
[[nodiscard]] DominationReport check_domination(const Trajectory& trajectory,
                                                std::span<const double> r, double t_start,
                                                double tol);

}  // namespace bdm
