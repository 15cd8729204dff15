#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bdm/coefficients.hpp"
#include "bdm/equilibrium.hpp"
#include "bdm/integrator.hpp"

namespace bdm {

/// Concentrations c_1..c_N (stored 0-based) at time t.
struct ClusterState {
  std::vector<double> c;
  double t = 0.0;

  [[nodiscard]] std::size_t size() const noexcept { return c.size(); }
};

/// a_i and b_i for i = 1..N+1, indexed directly by i (slot 0 unused).
struct RateTable {
  std::vector<double> a;
  std::vector<double> b;

  [[nodiscard]] std::size_t size() const noexcept { return a.empty() ? 0 : a.size() - 2; }
};

[[nodiscard]] RateTable tabulate_rates(const CoefficientModel& model, std::size_t n);

/// W_i = a_i c_1 c_i - b_{i+1} c_{i+1} for i < N, W_N = 0.
[[nodiscard]] std::vector<double> net_rates(std::span<const double> c,
                                            const CoefficientModel& model);
void net_rates(std::span<const double> c, const RateTable& rates, std::span<double> w);

/// Time derivative of the truncated system.
[[nodiscard]] std::vector<double> rhs(std::span<const double> c, const CoefficientModel& model);
void rhs(std::span<const double> c, const RateTable& rates, std::span<double> dcdt,
         std::span<double> w);

/// sum_i i c_i
[[nodiscard]] double density(std::span<const double> c);
/// sum_i i^k c_i
[[nodiscard]] double moment(std::span<const double> c, double k);
/// sum_i exp(alpha i^mu) c_i
[[nodiscard]] double stretched_moment(std::span<const double> c, double alpha, double mu);
/// sum_i phi_i c_i for phi given as a sequence (phi[0] = phi_1).
[[nodiscard]] double weighted_sum(std::span<const double> c, std::span<const double> phi);

struct StretchedOrder {
  double alpha = 1.0;
  double mu = 0.5;
};

enum class PositivityStrategy {
  /// Reject steps with c_i < -abs_tol; clamp small negatives into c_1.
  kClampReinject,
  kNone,
};

struct IntegrateOptions {
  double rel_tol = 1e-8;
  /// Absolute tolerance; 0 selects 1e-14 * rho.
  double abs_tol = 0.0;
  double initial_step = 0.0;
  double max_step = 0.0;
  std::size_t max_steps = 50'000'000;
  /// Snapshot times; empty means {0, t_end}.
  std::vector<double> output_times;
  std::vector<double> moment_orders;
  std::vector<StretchedOrder> stretched_orders;
  /// Reference equilibrium for the free energy column.
  std::shared_ptr<const EquilibriumData> equilibrium;
  double tail_threshold = 1e-3;
  PositivityStrategy positivity = PositivityStrategy::kClampReinject;
  bool keep_states = true;
};

struct Snapshot {
  double t = 0.0;
  /// Empty unless IntegrateOptions::keep_states.
  std::vector<double> c;
  double rho = 0.0;
  double c1 = 0.0;
  /// NaN when no equilibrium was supplied.
  double free_energy = 0.0;
  std::vector<double> moments;
  std::vector<double> stretched;
};

struct Trajectory {
  std::vector<Snapshot> snapshots;
  std::vector<double> moment_orders;
  std::vector<StretchedOrder> stretched_orders;
  std::shared_ptr<const RateTable> rates;
  IntegrationStats stats;
  double rel_tol = 0.0;
  double abs_tol = 0.0;
  /// Total sum_i i |c_i| moved into c_1 by the positivity clamp.
  double clamped_mass = 0.0;
  std::vector<std::string> warnings;

  [[nodiscard]] std::size_t size() const noexcept { return snapshots.size(); }
};

/// Adaptive Dormand-Prince integration of the truncated system on [t0, t_end].
[[nodiscard]] Trajectory integrate(const ClusterState& state0, const CoefficientModel& model,
                                   double t_end, const IntegrateOptions& options = {});

/// |d/dt sum phi_i c_i - sum_i W_i (phi_{i+1} - phi_i - phi_1)| at an interior
/// snapshot, with the derivative taken by a three-point difference on the
/// (possibly non-uniform) snapshot grid. phi must have length >= N.
[[nodiscard]] double weak_form_residual(const Trajectory& trajectory,
                                        std::span<const double> phi, std::size_t snapshot);

/// Uniform grid of count points on [0, t_end].
[[nodiscard]] std::vector<double> uniform_grid(double t_end, std::size_t count);

}  // namespace bdm
