#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "bdm/coefficients.hpp"
#include "bdm/config.hpp"
#include "bdm/equilibrium.hpp"
#include "bdm/maximum_principle.hpp"
#include "bdm/solver.hpp"
#include "bdm/supersolution.hpp"

namespace bdm {

struct ShortTimeConstant {
  /// Largest eps with phi_{i+1} - phi_i >= eps phi_1.
  double epsilon = 0.0;
  /// sup_i a_i (phi_{i+1} - phi_i) / phi_i
  double a_phi = 0.0;
  double b_bar = 0.0;
  /// (rho + b_bar / eps) a_phi
  double c_phi = 0.0;
  /// log2 growth of a_i (phi_{i+1} - phi_i) / phi_i between n/2 and n.
  double growth_exponent = 0.0;
};

/// Scans i = 1..n. Throws ParameterError when eps <= 0 or when the ratio
/// defining A_phi is still growing at the end of the scan.
[[nodiscard]] ShortTimeConstant short_time_constant(const CoefficientModel& model,
                                                    const Weight& phi, double rho,
                                                    std::size_t n);

struct ThresholdResult {
  std::optional<double> t0;
  std::size_t index = 0;
  /// c_1 is not below omega at the last snapshot.
  bool never_below = false;
  /// c_1 only dropped below omega at the last snapshot.
  bool inconclusive = false;
};

/// Smallest snapshot time after which c_1 < omega at every later snapshot.
[[nodiscard]] ThresholdResult detect_threshold(const Trajectory& trajectory, double omega);

struct StageResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ShortTimeCheck {
  std::string label;
  ShortTimeConstant constant;
  /// min over t <= T0 of exp(C t) M(0) (1 + 1e-8) - M(t), relative to M(0).
  double margin = 0.0;
  bool holds = false;
};

struct MomentCertificate {
  std::string label;
  /// Observed sup over snapshots with t >= T0.
  double observed_after = 0.0;
  /// Observed sup over every snapshot.
  double observed_all = 0.0;
  double certified = 0.0;
  WeightedSumBound weighted;
  bool holds = false;
  bool holds_all_times = false;
};

struct UniformBoundReport {
  ExperimentConfig config;
  std::string model_description;
  double rho = 0.0;
  double z_s = 0.0;
  double rho_s = 0.0;
  double z_bar = 0.0;
  double omega = 0.0;
  ThresholdResult threshold;
  std::vector<ShortTimeCheck> short_time;
  std::optional<Supersolution> supersolution;
  SupersolutionCheck supersolution_check;
  DominationReport domination;
  std::vector<MomentCertificate> certificates;
  /// sum_i i |c_i - Q_i| at each snapshot.
  std::vector<double> distance_to_equilibrium;
  double max_mass_drift = 0.0;
  std::vector<StageResult> stages;
  std::optional<std::string> failed_stage;
  bool verdict = false;
  double runtime_seconds = 0.0;
  Trajectory trajectory;
  std::shared_ptr<const EquilibriumData> equilibrium;
};

/// Initial data from the config, rescaled to the configured density.
[[nodiscard]] ClusterState build_initial_state(const ExperimentConfig& config,
                                               const EquilibriumData& equilibrium);

/// Monomer threshold from the config strategy.
[[nodiscard]] double choose_omega(const ExperimentConfig& config, double z_bar, double z_s);

/// Rejects moment requests outside the hypotheses of the propagation results.
void validate_moment_requests(const ExperimentConfig& config, const CoefficientModel& model);

/// Integrate, detect T0, short-time bound, build and verify the supersolution,
/// check domination after T0, certify the moment bounds. Stage failures are
/// recorded in the report; configuration problems throw.
[[nodiscard]] UniformBoundReport run_uniform_moment_experiment(const ExperimentConfig& config);

struct SweepEntry {
  std::string value;
  std::optional<UniformBoundReport> report;
  std::string error;
  int exit_code = 0;
};

/// Runs the experiment once per sweep value with `workers` threads. Entries
/// are returned in the order of the values.
[[nodiscard]] std::vector<SweepEntry> sweep(const KeyValueFile& base, std::size_t workers);

}  // namespace bdm
