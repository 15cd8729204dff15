#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bdm/coefficients.hpp"

namespace bdm {

/// Critical monomer density and critical density of a rate model.
struct CriticalValues {
  /// Root-test estimate 1 / mean(Q_{i+1}/Q_i) over the last N/10 indices.
  double z_s_est = 0.0;
  /// Value used downstream: the closed-form z_s when the family has one,
  /// z_s_est otherwise.
  double z_s = 0.0;
  /// sum_i i Q_i z_s^i; +inf when the partial sums diverge.
  double rho_s = 0.0;
  bool rho_s_infinite = false;
  /// Partial sums neither settled nor kept growing at the largest N tried.
  bool inconclusive = false;
  std::size_t n_used = 0;
};

inline constexpr double kDefaultCauchyTolerance = 1e-8;

[[nodiscard]] CriticalValues critical_values(const CoefficientModel& model, std::size_t n,
                                             double tol = kDefaultCauchyTolerance);

struct SeriesValue {
  double value = 0.0;
  double remainder_bound = 0.0;
  std::size_t terms = 0;
};

/// F(z) = sum_{i>=1} i Q_i z^i, truncated adaptively: the number of terms is
/// doubled until a geometric bound on the remainder drops below abs_tol.
///
/// Holds a growing cache of the detailed-balance prefix; not thread-safe.
class EquilibriumDensity {
 public:
  EquilibriumDensity(const CoefficientModel& model, double z_s);

  [[nodiscard]] SeriesValue operator()(double z, double abs_tol) const;
  /// F'(z) = sum_i i^2 Q_i z^(i-1), same truncation rule.
  [[nodiscard]] SeriesValue derivative(double z, double abs_tol) const;

 private:
  template <typename Term>
  SeriesValue sum(double z, double abs_tol, Term term) const;
  void ensure(std::size_t n) const;

  const CoefficientModel* model_;
  double z_s_;
  mutable DetailedBalance db_;
};

inline constexpr double kDefaultActivityTolerance = 1e-12;

/// Monomer activity z_bar in [0, z_s) with F(z_bar) = rho, by bisection.
/// Throws SupercriticalError when rho >= rho_s.
[[nodiscard]] double solve_monomer_activity(const CoefficientModel& model, double rho,
                                            const CriticalValues& critical,
                                            double tol = kDefaultActivityTolerance);

/// Detailed-balance equilibrium Q_i z_bar^i on a truncation of length N.
struct EquilibriumData {
  double z_s = 0.0;
  double rho_s = 0.0;
  bool rho_s_infinite = false;
  double z_bar = 0.0;
  /// Density carried by the full (untruncated) equilibrium.
  double rho = 0.0;
  std::vector<double> profile;
  /// log Q_i z_bar^i; -inf when z_bar = 0.
  std::vector<double> log_profile;
  /// First index whose exponentiated value underflows to 0 (N + 1 if none).
  std::size_t n_cut = 0;
  double truncated_density = 0.0;
  /// Bound on sum_{i>N} i Q_i z_bar^i.
  double tail_remainder = 0.0;

  [[nodiscard]] std::size_t size() const noexcept { return profile.size(); }
  [[nodiscard]] double mass() const;
  [[nodiscard]] std::vector<std::pair<std::string, std::string>> key_values() const;
};

[[nodiscard]] EquilibriumData equilibrium_profile(const CoefficientModel& model, double z_bar,
                                                  std::size_t n, const CriticalValues& critical);

/// critical_values + solve_monomer_activity + equilibrium_profile.
[[nodiscard]] EquilibriumData compute_equilibrium(const CoefficientModel& model, double rho,
                                                  std::size_t n,
                                                  double tol = kDefaultActivityTolerance);

/// H(c | Q) = sum_i c_i log(c_i / Q_i) - c_i + Q_i with 0 log 0 = 0.
/// Evaluated against the log profile, so underflowed equilibrium entries do
/// not raise; throws DomainError only where the equilibrium is exactly zero.
[[nodiscard]] double relative_free_energy(std::span<const double> c,
                                          const EquilibriumData& equilibrium);

}  // namespace bdm
