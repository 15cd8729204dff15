#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace bdm {

struct IntegratorOptions {
  double rel_tol = 1e-8;
  double abs_tol = 1e-14;
  /// 0 selects the step automatically.
  double initial_step = 0.0;
  /// 0 means unbounded.
  double max_step = 0.0;
  std::size_t max_steps = 50'000'000;
};

struct IntegrationStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  /// Steps rejected by the step filter (e.g. negative concentrations).
  std::size_t filtered = 0;
  std::size_t rhs_evaluations = 0;
  double last_step = 0.0;
};

enum class StepAction {
  kAccept,
  /// The filter changed the state in place; derivative must be re-evaluated.
  kAcceptModified,
  /// Retry with half the step.
  kReject,
};

/// Explicit Dormand-Prince 5(4) pair with FSAL, PI step-size control and the
/// classical fourth-order continuous extension for dense output.
class DormandPrince54 {
 public:
  using System = std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;
  using Filter = std::function<StepAction(std::span<double> y)>;
  using Projection = std::function<void(std::span<double> y)>;
  using Observer = std::function<void(std::size_t index, double t, std::span<const double> y)>;

  explicit DormandPrince54(IntegratorOptions options = {}) : options_(options) {}

  /// Advances y from t0 to t1. Each entry of output_times (sorted, inside
  /// [t0, t1]) is reported once through observer, interpolated from the
  /// accepted step that covers it and passed through project first.
  ///
  /// Throws NumericalError on step-size underflow or when max_steps is hit.
  IntegrationStats integrate(const System& system, std::span<double> y, double t0, double t1,
                             std::span<const double> output_times, const Observer& observer,
                             const Filter& filter = {}, const Projection& project = {}) const;

  /// Fixed-step integration with the fifth-order weights, no error control.
  static void integrate_fixed(const System& system, std::span<double> y, double t0, double t1,
                              std::size_t steps);

  [[nodiscard]] const IntegratorOptions& options() const noexcept { return options_; }

 private:
  IntegratorOptions options_;
};

}  // namespace bdm
