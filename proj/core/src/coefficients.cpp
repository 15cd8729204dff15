#include "bdm/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>

#include "bdm/errors.hpp"

namespace bdm {

namespace {

/// Limit of Q_{i+1}/Q_i, extrapolated on log(b_{i+1}/a_i) whose approach to
/// log z_s is close to a single power of i for the standard families.
std::optional<double> extrapolated_ratio_limit(const CoefficientModel& m, std::size_t n) {
  auto log_inverse = [&m](std::size_t i) { return std::log(m.b(i + 1)) - std::log(m.a(i)); };
  const auto limit = extrapolate_limit(log_inverse(n / 4), log_inverse(n / 2), log_inverse(n - 1));
  if (!limit || !std::isfinite(*limit)) return std::nullopt;
  return std::exp(-*limit);
}

void require(bool condition, const std::string& message) {
  if (!condition) {
    throw ParameterError(message);
  }
}

std::size_t scan_range(const CoefficientModel& model) {
  return model.max_index() == 0 ? kDefaultScanRange : model.max_index();
}

}  // namespace

std::string to_string(CoefficientFamily family) {
  switch (family) {
    case CoefficientFamily::kPowerLawFragment:
      return "power_law";
    case CoefficientFamily::kExponentialTailFragment:
      return "exponential_tail";
    case CoefficientFamily::kCustom:
      return "custom";
  }
  return "unknown";
}

void CoefficientModel::check_index(std::size_t i) const {
  if (i == 0 || (max_index_ != 0 && i > max_index_)) {
    std::ostringstream os;
    os << "rate index " << i << " outside the defined range [1, "
       << (max_index_ == 0 ? std::string("inf") : std::to_string(max_index_)) << "] of model "
       << label_;
    throw ParameterError(os.str());
  }
}

double CoefficientModel::a(std::size_t i) const {
  check_index(i);
  switch (family_) {
    case CoefficientFamily::kPowerLawFragment:
    case CoefficientFamily::kExponentialTailFragment:
      return std::pow(static_cast<double>(i), gamma_);
    case CoefficientFamily::kCustom:
      return a_fn_(i);
  }
  return 0.0;
}

double CoefficientModel::b(std::size_t i) const {
  check_index(i);
  const auto x = static_cast<double>(i);
  switch (family_) {
    case CoefficientFamily::kPowerLawFragment:
      return std::pow(x, gamma_) * (z_s_ + q_ * std::pow(x, mu_c_ - 1.0));
    case CoefficientFamily::kExponentialTailFragment: {
      // The closed form vanishes at i = 1; b_1 never enters the dynamics.
      if (i == 1) {
        return 0.0;
      }
      const double xm = x - 1.0;
      return z_s_ * std::pow(xm, gamma_) *
             std::exp(sigma_ * (std::pow(x, mu_c_) - std::pow(xm, mu_c_)));
    }
    case CoefficientFamily::kCustom:
      return b_fn_(i);
  }
  return 0.0;
}

std::string CoefficientModel::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << "family=" << to_string(family_);
  switch (family_) {
    case CoefficientFamily::kPowerLawFragment:
      os << " gamma=" << gamma_ << " z_s=" << z_s_ << " q=" << q_ << " mu_c=" << mu_c_;
      break;
    case CoefficientFamily::kExponentialTailFragment:
      os << " gamma=" << gamma_ << " z_s=" << z_s_ << " sigma=" << sigma_ << " mu_c=" << mu_c_;
      break;
    case CoefficientFamily::kCustom:
      os << " label=" << label_ << " gamma_est=" << gamma_ << " z_s_est=" << z_s_;
      break;
  }
  return os.str();
}

CoefficientModel make_power_law_model(double gamma, double z_s, double q, double mu_c) {
  require(gamma > 0.0 && gamma <= 1.0, "power-law family needs 0 < gamma <= 1");
  require(z_s > 0.0 && std::isfinite(z_s), "power-law family needs z_s > 0");
  require(q > 0.0 && std::isfinite(q), "power-law family needs q > 0");
  require(mu_c > 0.0 && mu_c < 1.0, "power-law family needs 0 < mu_c < 1");
  CoefficientModel m;
  m.family_ = CoefficientFamily::kPowerLawFragment;
  m.gamma_ = gamma;
  m.a_bar_ = 1.0;
  m.c1_lin_ = 1.0;
  m.c2_lin_ = 1.0;
  m.z_s_ = z_s;
  m.q_ = q;
  m.mu_c_ = mu_c;
  // b_i / a_i = z_s + q i^(mu - 1) decreases in i: the sup sits at i = 1.
  m.b_bar_ = z_s + q;
  m.label_ = "power_law";
  return m;
}

CoefficientModel make_exponential_tail_model(double gamma, double z_s, double sigma,
                                             double mu_c) {
  require(gamma > 0.0 && gamma < 1.0, "exponential-tail family needs 0 < gamma < 1");
  require(z_s > 0.0 && std::isfinite(z_s), "exponential-tail family needs z_s > 0");
  require(sigma > 0.0 && std::isfinite(sigma), "exponential-tail family needs sigma > 0");
  require(mu_c > 0.0 && mu_c < 1.0, "exponential-tail family needs 0 < mu_c < 1");
  CoefficientModel m;
  m.family_ = CoefficientFamily::kExponentialTailFragment;
  m.gamma_ = gamma;
  m.a_bar_ = 1.0;
  m.z_s_ = z_s;
  m.sigma_ = sigma;
  m.mu_c_ = mu_c;
  m.label_ = "exponential_tail";
  double sup = 0.0;
  for (std::size_t i = 2; i <= kDefaultScanRange; ++i) {
    sup = std::max(sup, m.b(i) / m.a(i));
  }
  m.b_bar_ = sup;
  return m;
}

CoefficientModel make_custom_model(CoefficientModel::RateFn a, CoefficientModel::RateFn b,
                                   std::size_t max_index, std::string label) {
  require(static_cast<bool>(a) && static_cast<bool>(b), "custom model needs both rate functions");
  require(max_index == 0 || max_index >= 4, "custom model needs at least 4 tabulated rates");
  CoefficientModel m;
  m.family_ = CoefficientFamily::kCustom;
  m.a_fn_ = std::move(a);
  m.b_fn_ = std::move(b);
  m.max_index_ = max_index;
  m.label_ = std::move(label);

  const std::size_t n = scan_range(m);
  const std::size_t half = n / 2;
  const double slope = std::log(m.a(n) / m.a(half)) /
                       std::log(static_cast<double>(n) / static_cast<double>(half));
  double sup_power = 0.0;
  double min_lin = std::numeric_limits<double>::infinity();
  double max_lin = 0.0;
  double sup_frag = 0.0;
  const bool near_linear = std::abs(slope - 1.0) <= 1e-2;
  const double gamma = near_linear ? 1.0 : std::max(slope, 0.0);
  for (std::size_t i = 1; i <= n; ++i) {
    const double ai = m.a(i);
    const double bi = m.b(i);
    const auto x = static_cast<double>(i);
    sup_power = std::max(sup_power, ai / std::pow(x, gamma));
    min_lin = std::min(min_lin, ai / x);
    max_lin = std::max(max_lin, ai / x);
    if (!(i == 1 && bi == 0.0)) {
      sup_frag = std::max(sup_frag, bi / ai);
    }
  }
  m.gamma_ = gamma;
  m.a_bar_ = sup_power;
  m.c1_lin_ = min_lin;
  m.c2_lin_ = max_lin;
  m.b_bar_ = sup_frag;

  const auto limit = extrapolated_ratio_limit(m, n);
  m.z_s_ = (limit && *limit > 0.0 && std::isfinite(*limit))
               ? 1.0 / *limit
               : std::numeric_limits<double>::quiet_NaN();
  return m;
}

CoefficientModel make_tabulated_model(std::vector<double> a, std::vector<double> b,
                                      std::string label) {
  require(a.size() == b.size(), "rate tables must have equal length");
  const std::size_t n = a.size();
  auto at = std::make_shared<const std::vector<double>>(std::move(a));
  auto bt = std::make_shared<const std::vector<double>>(std::move(b));
  return make_custom_model([at](std::size_t i) { return (*at)[i - 1]; },
                           [bt](std::size_t i) { return (*bt)[i - 1]; }, n, std::move(label));
}

CoefficientModel load_rates_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open rates file " + path.string());
  }
  std::vector<double> a;
  std::vector<double> b;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') {
      continue;
    }
    std::istringstream row(line);
    std::size_t i = 0;
    double ai = 0.0;
    double bi = 0.0;
    if (!(row >> i >> ai >> bi)) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                        ": expected 'i a_i b_i'");
    }
    if (i != a.size() + 1) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                        ": indices must be contiguous starting at 1");
    }
    a.push_back(ai);
    b.push_back(bi);
  }
  return make_tabulated_model(std::move(a), std::move(b), path.filename().string());
}

DoubleDouble DetailedBalance::log_scaled(std::size_t i, double log_z) const {
  return log_q_.at(i - 1) + two_prod(static_cast<double>(i), log_z);
}

double DetailedBalance::scaled(std::size_t i, double z) const {
  if (z == 0.0) {
    return 0.0;
  }
  return exp(log_scaled(i, std::log(z)));
}

std::vector<double> DetailedBalance::q_sequence() const {
  std::vector<double> out(log_q_.size());
  std::transform(log_q_.begin(), log_q_.end(), out.begin(),
                 [](const DoubleDouble& x) { return exp(x); });
  return out;
}

DetailedBalance detailed_balance(const CoefficientModel& model, std::size_t n) {
  if (n < 2) {
    throw ParameterError("detailed balance needs N >= 2");
  }
  std::vector<DoubleDouble> log_q(n);
  log_q[0] = {0.0, 0.0};
  double last_step = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    last_step = std::log(model.a(i)) - std::log(model.b(i + 1));
    log_q[i] = log_q[i - 1] + last_step;
    if (!std::isfinite(log_q[i].hi)) {
      throw NumericalError("log Q_" + std::to_string(i + 1) + " is not finite");
    }
  }
  return DetailedBalance(std::move(log_q), std::exp(last_step));
}

std::optional<double> extrapolate_limit(double at_quarter, double at_half, double at_end) {
  const double d1 = at_half - at_quarter;
  const double d2 = at_end - at_half;
  const double scale = std::max(std::abs(at_end), std::numeric_limits<double>::min());
  if (std::abs(d2) <= 1e-14 * scale) {
    return at_end;
  }
  if (d1 == 0.0) {
    return std::nullopt;
  }
  const double r = d2 / d1;
  if (!(r > 0.0 && r < 1.0)) {
    return std::nullopt;
  }
  return at_end + d2 * r / (1.0 - r);
}

AssumptionReport check_assumptions(const CoefficientModel& model, std::size_t n, double tol) {
  if (n < 10) {
    throw ParameterError("check_assumptions needs N >= 10");
  }
  if (model.max_index() != 0 && n > model.max_index()) {
    throw ParameterError("check_assumptions: N exceeds the tabulated range");
  }
  AssumptionReport rep;
  rep.n = n;
  rep.b_bar = model.b_bar();
  constexpr double kSlack = 1e-12;

  // Growth bound.
  for (std::size_t i = 1; i <= n; ++i) {
    const double ai = model.a(i);
    const auto x = static_cast<double>(i);
    bool ok = ai > 0.0 && std::isfinite(ai);
    if (ok && model.linear_branch()) {
      ok = ai >= model.c1_lin() * x * (1.0 - kSlack) && ai <= model.c2_lin() * x * (1.0 + kSlack);
    } else if (ok) {
      ok = ai <= model.a_bar() * std::pow(x, model.gamma()) * (1.0 + kSlack);
    }
    if (!ok) {
      rep.growth.holds = false;
      rep.growth.first_violation = i;
      rep.growth.detail = "a_i violates the growth bound";
      break;
    }
  }
  if (rep.growth.holds && model.gamma() > 1.0) {
    rep.growth.holds = false;
    rep.growth.detail = "superlinear growth exponent";
  }

  // 0 < b_i <= b_bar a_i.
  for (std::size_t i = model.first_fragmentation_index(); i <= n; ++i) {
    const double bi = model.b(i);
    if (!(bi > 0.0) || bi > model.b_bar() * model.a(i) * (1.0 + kSlack)) {
      rep.fragmentation_bound.holds = false;
      rep.fragmentation_bound.first_violation = i;
      rep.fragmentation_bound.detail = bi > 0.0 ? "b_i exceeds b_bar a_i" : "b_i not positive";
      break;
    }
  }

  // Q_{i+1}/Q_i -> 1/z_s, judged on the last n/10 indices.
  auto ratio = [&model](std::size_t i) { return model.a(i) / model.b(i + 1); };
  const std::size_t tail_begin = n - n / 10;
  double sum = 0.0;
  int trend = 0;
  for (std::size_t i = tail_begin; i < n; ++i) {
    const double r = ratio(i);
    sum += r;
    if (i + 1 < n) {
      const double diff = ratio(i + 1) - r;
      const int sign = std::abs(diff) <= 1e-15 * std::abs(r) ? 0 : (diff > 0 ? 1 : -1);
      if (sign != 0 && trend != 0 && sign != trend && rep.ratio_limit.holds) {
        rep.ratio_limit.holds = false;
        rep.ratio_limit.first_violation = i + 1;
        rep.ratio_limit.detail = "ratio Q_{i+1}/Q_i is not monotone in the tail";
      }
      if (sign != 0) {
        trend = sign;
      }
    }
  }
  rep.ratio_tail_average = sum / static_cast<double>(n - tail_begin);
  const auto limit = extrapolated_ratio_limit(model, n);
  rep.ratio_limit_estimate = limit.value_or(std::numeric_limits<double>::infinity());
  if (rep.ratio_limit.holds) {
    if (!limit || !(*limit > 0.0) || !std::isfinite(*limit)) {
      rep.ratio_limit.holds = false;
      rep.ratio_limit.first_violation = n;
      rep.ratio_limit.detail = "ratio Q_{i+1}/Q_i has no positive finite limit";
    } else if (std::isfinite(model.z_s()) && std::abs(*limit * model.z_s() - 1.0) > tol) {
      rep.ratio_limit.holds = false;
      rep.ratio_limit.first_violation = n;
      rep.ratio_limit.detail =
          "extrapolated limit differs from 1/z_s beyond tolerance (may be pre-asymptotic when "
          "the ratio converges slowly; try a larger N)";
    }
  }

  // Q_i z_s^i non-increasing from some i0 on.
  if (!std::isfinite(model.z_s())) {
    rep.critical_monotone.holds = false;
    rep.critical_monotone.detail = "z_s undefined";
    rep.i0 = n;
  } else {
    const double log_zs = std::log(model.z_s());
    std::size_t last_increase = 0;
    for (std::size_t i = 1; i < n; ++i) {
      const double step = std::log(model.a(i)) - std::log(model.b(i + 1)) + log_zs;
      if (step > 1e-13) {
        if (!rep.critical_monotone.first_violation) {
          rep.critical_monotone.first_violation = i + 1;
        }
        last_increase = i;
      }
    }
    rep.i0 = last_increase + 1;
    if (rep.i0 > n / 2) {
      rep.critical_monotone.holds = false;
      rep.critical_monotone.detail = "Q_i z_s^i is not eventually non-increasing";
    } else if (rep.i0 > 1) {
      rep.critical_monotone.detail = "non-increasing from i0 = " + std::to_string(rep.i0);
    }
  }
  return rep;
}

}  // namespace bdm
