#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bdm/summation.hpp"

namespace bdm {

enum class CoefficientFamily {
  kPowerLawFragment,        // a_i = i^gamma, b_i = a_i (z_s + q i^(mu-1))
  kExponentialTailFragment, // a_i = i^gamma, b_i = z_s (i-1)^gamma exp(sigma i^mu - sigma (i-1)^mu)
  kCustom,
};

[[nodiscard]] std::string to_string(CoefficientFamily family);

/// Default number of indices scanned when a sup/inf over an unbounded rate
/// sequence has to be estimated numerically.
inline constexpr std::size_t kDefaultScanRange = 100000;

/// Coagulation rates a_i and fragmentation rates b_i, i >= 1.
///
/// Rates are evaluated on demand from their closed form (or from a table /
/// callable for the custom family); a model is immutable once built, so a
/// single instance may be shared between threads.
class CoefficientModel {
 public:
  using RateFn = std::function<double(std::size_t)>;

  [[nodiscard]] double a(std::size_t i) const;
  [[nodiscard]] double b(std::size_t i) const;

  [[nodiscard]] CoefficientFamily family() const noexcept { return family_; }
  /// Growth exponent; 1 selects the linear branch C1 i <= a_i <= C2 i.
  [[nodiscard]] double gamma() const noexcept { return gamma_; }
  [[nodiscard]] double a_bar() const noexcept { return a_bar_; }
  [[nodiscard]] double c1_lin() const noexcept { return c1_lin_; }
  [[nodiscard]] double c2_lin() const noexcept { return c2_lin_; }
  /// Critical monomer density. Exact for the closed-form families, estimated
  /// from the rates for custom models (NaN if the ratio Q_{i+1}/Q_i diverges).
  [[nodiscard]] double z_s() const noexcept { return z_s_; }
  [[nodiscard]] double q() const noexcept { return q_; }
  [[nodiscard]] double mu_c() const noexcept { return mu_c_; }
  [[nodiscard]] double sigma() const noexcept { return sigma_; }
  /// sup_i b_i / a_i over the evaluated range.
  [[nodiscard]] double b_bar() const noexcept { return b_bar_; }
  [[nodiscard]] bool linear_branch() const noexcept { return gamma_ >= 1.0; }
  /// Largest index with a defined rate, 0 when unbounded.
  [[nodiscard]] std::size_t max_index() const noexcept { return max_index_; }
  [[nodiscard]] bool exact_critical_density() const noexcept {
    return family_ != CoefficientFamily::kCustom;
  }
  /// First index from which b_i is meaningful (2 for the exponential-tail family).
  [[nodiscard]] std::size_t first_fragmentation_index() const noexcept {
    return family_ == CoefficientFamily::kExponentialTailFragment ? 2 : 1;
  }
  [[nodiscard]] const std::string& label() const noexcept { return label_; }
  [[nodiscard]] std::string describe() const;

  friend CoefficientModel make_power_law_model(double gamma, double z_s, double q, double mu_c);
  friend CoefficientModel make_exponential_tail_model(double gamma, double z_s, double sigma,
                                                      double mu_c);
  friend CoefficientModel make_custom_model(RateFn a, RateFn b, std::size_t max_index,
                                            std::string label);

 private:
  CoefficientModel() = default;
  void check_index(std::size_t i) const;

  CoefficientFamily family_ = CoefficientFamily::kCustom;
  double gamma_ = 0.0;
  double a_bar_ = 1.0;
  double c1_lin_ = 1.0;
  double c2_lin_ = 1.0;
  double z_s_ = 1.0;
  double q_ = 0.0;
  double mu_c_ = 0.0;
  double sigma_ = 0.0;
  double b_bar_ = 0.0;
  std::size_t max_index_ = 0;
  RateFn a_fn_;
  RateFn b_fn_;
  std::string label_;
};

CoefficientModel make_power_law_model(double gamma, double z_s, double q, double mu_c);
CoefficientModel make_exponential_tail_model(double gamma, double z_s, double sigma, double mu_c);

/// Custom rates from callables. With max_index == 0 the callables must accept
/// every i >= 1; growth data and z_s are then estimated over kDefaultScanRange.
CoefficientModel make_custom_model(CoefficientModel::RateFn a, CoefficientModel::RateFn b,
                                   std::size_t max_index = 0, std::string label = "custom");

/// Custom rates from tables, a[i-1] = a_i and b[i-1] = b_i.
CoefficientModel make_tabulated_model(std::vector<double> a, std::vector<double> b,
                                      std::string label = "tabulated");

/// Reads whitespace-separated "i a_i b_i" rows with contiguous 1-based i.
/// Blank lines and lines starting with '#' are skipped.
CoefficientModel load_rates_file(const std::filesystem::path& path);

/// Detailed-balance coefficients Q_1 = 1, Q_{i+1} = (a_i / b_{i+1}) Q_i.
///
/// The prefix is kept in log space as a double-double so that exponentiated
/// values satisfy the recursion to a few ulps even when log Q_i is large.
class DetailedBalance {
 public:
  DetailedBalance() = default;
  DetailedBalance(std::vector<DoubleDouble> log_q, double ratio_tail)
      : log_q_(std::move(log_q)), ratio_tail_(ratio_tail) {}

  [[nodiscard]] std::size_t size() const noexcept { return log_q_.size(); }
  [[nodiscard]] double log_q(std::size_t i) const { return log_q_.at(i - 1).value(); }
  [[nodiscard]] DoubleDouble log_q_dd(std::size_t i) const { return log_q_.at(i - 1); }
  [[nodiscard]] double q(std::size_t i) const { return exp(log_q_.at(i - 1)); }
  /// log(Q_i z^i) in double-double.
  [[nodiscard]] DoubleDouble log_scaled(std::size_t i, double log_z) const;
  /// Q_i z^i.
  [[nodiscard]] double scaled(std::size_t i, double z) const;
  [[nodiscard]] std::vector<double> q_sequence() const;
  /// Q_{N}/Q_{N-1}; empirical proxy for lim Q_{i+1}/Q_i = 1/z_s.
  [[nodiscard]] double ratio_tail() const noexcept { return ratio_tail_; }

 private:
  std::vector<DoubleDouble> log_q_;
  double ratio_tail_ = 0.0;
};

[[nodiscard]] DetailedBalance detailed_balance(const CoefficientModel& model, std::size_t n);

/// Limit of a slowly converging sequence sampled at n/4, n/2, n, by
/// geometric (Aitken-type) extrapolation of successive differences. Returns
/// nullopt when the differences do not shrink.
[[nodiscard]] std::optional<double> extrapolate_limit(double at_quarter, double at_half,
                                                      double at_end);

struct AssumptionVerdict {
  bool holds = true;
  std::optional<std::size_t> first_violation;
  std::string detail;
};

/// Numerical check of the structural hypotheses on the rates:
/// growth bound, b_i <= b_bar a_i, convergence of Q_{i+1}/Q_i to 1/z_s, and
/// eventual non-increase of Q_i z_s^i.
struct AssumptionReport {
  std::size_t n = 0;
  AssumptionVerdict growth;
  AssumptionVerdict fragmentation_bound;
  AssumptionVerdict ratio_limit;
  AssumptionVerdict critical_monotone;
  double b_bar = 0.0;
  double ratio_tail_average = 0.0;
  double ratio_limit_estimate = 0.0;
  /// First index from which Q_i z_s^i is non-increasing.
  std::size_t i0 = 1;

  [[nodiscard]] bool all() const noexcept {
    return growth.holds && fragmentation_bound.holds && ratio_limit.holds &&
           critical_monotone.holds;
  }
};

inline constexpr double kDefaultRatioTolerance = 1e-2;

[[nodiscard]] AssumptionReport check_assumptions(const CoefficientModel& model, std::size_t n,
                                                 double tol = kDefaultRatioTolerance);

}  // namespace bdm
