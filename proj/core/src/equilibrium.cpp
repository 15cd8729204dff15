#include "bdm/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "bdm/errors.hpp"
#include "bdm/summation.hpp"

namespace bdm {

namespace {

constexpr std::size_t kMinCauchyN = 100000;
constexpr std::size_t kSeriesCap = std::size_t{1} << 22;
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string format_double(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

/// x log x - x + 1 for x >= 0, accurate near x = 1.
double entropy_kernel(double x) {
  const double d = x - 1.0;
  if (std::abs(d) < 1e-3) {
    // sum_{k>=2} (-1)^k d^k / (k (k - 1))
    double term = d * d;
    double acc = 0.0;
    for (int k = 2; k <= 8; ++k) {
      acc += term / static_cast<double>(k * (k - 1));
      term *= -d;
    }
    return acc;
  }
  if (x == 0.0) return 1.0;
  return x * std::log(x) - x + 1.0;
}

}  // namespace

CriticalValues critical_values(const CoefficientModel& model, std::size_t n, double tol) {
  if (n < 10) {
    throw ParameterError("critical_values needs N >= 10");
  }
  CriticalValues out;
  std::size_t top = 4 * std::max(n, kMinCauchyN);
  if (model.max_index() != 0) {
    top = std::min(top, model.max_index());
  }
  if (top < 8) {
    throw ParameterError("critical_values: rate table too short");
  }
  const std::size_t tail_n = std::min(n, top - 1);
  const std::size_t tail_begin = tail_n - tail_n / 10;
  double ratio_sum = 0.0;
  for (std::size_t i = tail_begin; i < tail_n; ++i) {
    ratio_sum += model.a(i) / model.b(i + 1);
  }
  out.z_s_est = static_cast<double>(tail_n - tail_begin) / ratio_sum;
  out.z_s = std::isfinite(model.z_s()) ? model.z_s() : out.z_s_est;

  const DetailedBalance db = detailed_balance(model, top);
  const double log_z = std::log(out.z_s);
  const std::size_t n1 = top / 4;
  const std::size_t n2 = top / 2;
  CompensatedSum sum;
  double s1 = 0.0;
  double s2 = 0.0;
  for (std::size_t i = 1; i <= top; ++i) {
    sum += static_cast<double>(i) * exp(db.log_scaled(i, log_z));
    if (i == n1) {
      s1 = sum.value();
    }
    if (i == n2) {
      s2 = sum.value();
    }
  }
  const double s4 = sum.value();
  out.n_used = top;
  if (!std::isfinite(s4)) {
    out.rho_s = kInf;
    out.rho_s_infinite = true;
    return out;
  }
  const double g1 = s2 / s1 - 1.0;
  const double g2 = s4 / s2 - 1.0;
  if (g2 <= tol) {
    out.rho_s = s4;
  } else if (g2 >= 0.9 * g1) {
    out.rho_s = kInf;
    out.rho_s_infinite = true;
  } else {
    out.rho_s = s4;
    out.inconclusive = true;
  }
  return out;
}

EquilibriumDensity::EquilibriumDensity(const CoefficientModel& model, double z_s)
    : model_(&model), z_s_(z_s) {}

void EquilibriumDensity::ensure(std::size_t n) const {
  if (db_.size() >= n) {
    return;
  }
  std::size_t target = std::max(n, 2 * db_.size());
  if (model_->max_index() != 0) {
    target = std::min(target, model_->max_index());
  }
  db_ = detailed_balance(*model_, target);
}

template <typename Term>
SeriesValue EquilibriumDensity::sum(double z, double abs_tol, Term term) const {
  SeriesValue out;
  if (z == 0.0) {
    return out;
  }
  const double log_z = std::log(z);
  std::size_t cap = kSeriesCap;
  if (model_->max_index() != 0) {
    cap = std::min(cap, model_->max_index());
  }
  std::size_t n = std::min<std::size_t>(64, cap);
  std::size_t done = 0;
  CompensatedSum acc;
  for (;;) {
    ensure(n);
    for (std::size_t i = done + 1; i <= n; ++i) {
      acc += term(i, db_.log_scaled(i, log_z));
    }
    done = n;
    const double last = term(n, db_.log_scaled(n, log_z));
    const double prev = term(n - 1, db_.log_scaled(n - 1, log_z));
    double remainder = kInf;
    if (last == 0.0) {
      remainder = 0.0;
    } else {
      double q = prev > 0.0 ? last / prev : 0.0;
      if (std::isfinite(z_s_)) {
        q = std::max(q, z / z_s_);
      }
      if (q < 1.0) {
        remainder = last * q / (1.0 - q);
      }
    }
    if (remainder <= abs_tol) {
      out.value = acc.value();
      out.remainder_bound = remainder;
      out.terms = n;
      return out;
    }
    if (n >= cap) {
      std::ostringstream os;
      os << "series sum_i i Q_i z^i at z=" << format_double(z) << " not converged after " << n
         << " terms (remainder bound " << remainder << ")";
      throw NumericalError(os.str());
    }
    n = std::min(2 * n, cap);
  }
}

SeriesValue EquilibriumDensity::operator()(double z, double abs_tol) const {
  return sum(z, abs_tol, [](std::size_t i, DoubleDouble log_t) {
    return static_cast<double>(i) * exp(log_t);
  });
}

SeriesValue EquilibriumDensity::derivative(double z, double abs_tol) const {
  const double log_z = z > 0.0 ? std::log(z) : 0.0;
  return sum(z, abs_tol, [log_z](std::size_t i, DoubleDouble log_t) {
    const auto x = static_cast<double>(i);
    return x * x * exp(log_t + (-log_z));
  });
}

double solve_monomer_activity(const CoefficientModel& model, double rho,
                              const CriticalValues& critical, double tol) {
  if (!(rho > 0.0) || !std::isfinite(rho)) {
    throw ParameterError("solve_monomer_activity needs rho > 0");
  }
  if (!critical.rho_s_infinite && !critical.inconclusive && rho >= critical.rho_s) {
    std::ostringstream os;
    os << "density " << format_double(rho) << " is not subcritical (rho_s = "
       << format_double(critical.rho_s) << ")";
    throw SupercriticalError(os.str());
  }
  const EquilibriumDensity density(model, critical.z_s);
  const double abs_tol = tol * rho / 10.0;
  // Grow the bracket towards z_s so the series is only evaluated close to z_s
  // when rho demands it.
  double lo = 0.0;
  double hi = 0.5 * critical.z_s;
  double f_hi = density(hi, abs_tol).value;
  for (int expand = 0; f_hi < rho && expand < 40; ++expand) {
    lo = hi;
    hi = critical.z_s - (critical.z_s - hi) / 2.0;
    f_hi = density(hi, abs_tol).value;
  }
  if (f_hi < rho) {
    std::ostringstream os;
    os << "density " << format_double(rho) << " not reached below z_s (F = " << f_hi
       << " at z = " << format_double(hi) << ")";
    throw SupercriticalError(os.str());
  }
  for (int iter = 0; iter < 400 && hi - lo > 2.0 * std::numeric_limits<double>::epsilon() * hi;
       ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) {
      break;
    }
    if (density(mid, abs_tol).value < rho) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double z_bar = 0.5 * (lo + hi);
  const double residual = std::abs(density(z_bar, abs_tol).value - rho);
  if (residual > tol * rho) {
    std::ostringstream os;
    os << "monomer activity solve stalled: |F(z) - rho| = " << residual;
    throw NumericalError(os.str());
  }
  return z_bar;
}

double EquilibriumData::mass() const {
  CompensatedSum s;
  for (std::size_t i = 0; i < profile.size(); ++i) {
    s += static_cast<double>(i + 1) * profile[i];
  }
  return s.value();
}

std::vector<std::pair<std::string, std::string>> EquilibriumData::key_values() const {
  CompensatedSum total;
  for (double q : profile) {
    total += q;
  }
  return {
      {"z_s", format_double(z_s)},
      {"rho_s", rho_s_infinite ? std::string("inf") : format_double(rho_s)},
      {"z_bar", format_double(z_bar)},
      {"rho", format_double(rho)},
      {"N", std::to_string(profile.size())},
      {"N_cut", std::to_string(n_cut)},
      {"truncated_density", format_double(truncated_density)},
      {"tail_remainder", format_double(tail_remainder)},
      {"sum_Q", format_double(total.value())},
  };
}

EquilibriumData equilibrium_profile(const CoefficientModel& model, double z_bar, std::size_t n,
                                    const CriticalValues& critical) {
  if (!(z_bar >= 0.0) || !(z_bar < critical.z_s)) {
    throw ParameterError("equilibrium_profile needs 0 <= z_bar < z_s");
  }
  if (n < 2) {
    throw ParameterError("equilibrium_profile needs N >= 2");
  }
  EquilibriumData eq;
  eq.z_s = critical.z_s;
  eq.rho_s = critical.rho_s;
  eq.rho_s_infinite = critical.rho_s_infinite;
  eq.z_bar = z_bar;
  eq.profile.assign(n, 0.0);
  eq.log_profile.assign(n, -kInf);
  eq.n_cut = n + 1;
  if (z_bar > 0.0) {
    const DetailedBalance db = detailed_balance(model, n);
    const double log_z = std::log(z_bar);
    for (std::size_t i = 1; i <= n; ++i) {
      const DoubleDouble l = db.log_scaled(i, log_z);
      eq.log_profile[i - 1] = l.value();
      eq.profile[i - 1] = exp(l);
      if (eq.profile[i - 1] == 0.0 && eq.n_cut == n + 1) {
        eq.n_cut = i;
      }
    }
    const EquilibriumDensity density(model, critical.z_s);
    eq.rho = density(z_bar, 1e-16 * std::max(1.0, eq.mass())).value;
  }
  eq.truncated_density = eq.mass();
  eq.tail_remainder = std::max(0.0, eq.rho - eq.truncated_density);
  return eq;
}

EquilibriumData compute_equilibrium(const CoefficientModel& model, double rho, std::size_t n,
                                    double tol) {
  const CriticalValues critical = critical_values(model, std::max<std::size_t>(n, 10));
  const double z_bar = solve_monomer_activity(model, rho, critical, tol);
  return equilibrium_profile(model, z_bar, n, critical);
}

double relative_free_energy(std::span<const double> c, const EquilibriumData& equilibrium) {
  if (c.size() != equilibrium.size()) {
    throw ParameterError("relative_free_energy: state and equilibrium lengths differ");
  }
  constexpr double kRatioFloor = 1e-290;
  CompensatedSum h;
  for (std::size_t k = 0; k < c.size(); ++k) {
    const double ci = c[k];
    const double qi = equilibrium.profile[k];
    if (ci < 0.0) {
      throw ParameterError("relative_free_energy: negative concentration at i = " +
                           std::to_string(k + 1));
    }
    if (ci == 0.0) {
      h += qi;
      continue;
    }
    const double log_q = equilibrium.log_profile[k];
    if (log_q == -kInf) {
      throw DomainError("relative_free_energy: c_i > 0 where the equilibrium vanishes at i = " +
                            std::to_string(k + 1),
                        k + 1);
    }
    if (qi > kRatioFloor) {
      h += qi * entropy_kernel(ci / qi);
    } else {
      h += ci * (std::log(ci) - log_q) - ci + qi;
    }
  }
  return h.value();
}

}  // namespace bdm
