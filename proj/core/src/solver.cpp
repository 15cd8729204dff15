#include "bdm/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "bdm/errors.hpp"
#include "bdm/summation.hpp"

namespace bdm {

RateTable tabulate_rates(const CoefficientModel& model, std::size_t n) {
  if (n < 2) {
    throw ParameterError("tabulate_rates: N must be at least 2");
  }
  RateTable t;
  t.a.assign(n + 2, 0.0);
  t.b.assign(n + 2, 0.0);
  const std::size_t top = model.max_index() == 0 ? n + 1 : std::min(n + 1, model.max_index());
  for (std::size_t i = 1; i <= top; ++i) {
    t.a[i] = model.a(i);
    t.b[i] = model.b(i);
  }
  return t;
}

void net_rates(std::span<const double> c, const RateTable& rates, std::span<double> w) {
  const std::size_t n = c.size();
  const double c1 = c[0];
  for (std::size_t i = 1; i < n; ++i) {
    w[i - 1] = rates.a[i] * c1 * c[i - 1] - rates.b[i + 1] * c[i];
  }
  w[n - 1] = 0.0;
}

std::vector<double> net_rates(std::span<const double> c, const CoefficientModel& model) {
  if (c.size() < 2) {
    throw ParameterError("net_rates: state must have length >= 2");
  }
  const RateTable rates = tabulate_rates(model, c.size());
  std::vector<double> w(c.size());
  net_rates(c, rates, w);
  return w;
}

void rhs(std::span<const double> c, const RateTable& rates, std::span<double> dcdt,
         std::span<double> w) {
  const std::size_t n = c.size();
  net_rates(c, rates, w);
  CompensatedSum total;
  for (std::size_t i = 0; i + 1 < n; ++i) total += w[i];
  dcdt[0] = -w[0] - total.value();
  for (std::size_t i = 1; i < n; ++i) {
    dcdt[i] = w[i - 1] - w[i];
  }
}

std::vector<double> rhs(std::span<const double> c, const CoefficientModel& model) {
  if (c.size() < 2) {
    throw ParameterError("rhs: state must have length >= 2");
  }
  const RateTable rates = tabulate_rates(model, c.size());
  std::vector<double> w(c.size());
  std::vector<double> out(c.size());
  rhs(c, rates, out, w);
  return out;
}

double density(std::span<const double> c) {
  CompensatedSum s;
  for (std::size_t i = 0; i < c.size(); ++i) s += static_cast<double>(i + 1) * c[i];
  return s.value();
}

double moment(std::span<const double> c, double k) {
  if (k == 0.0) {
    CompensatedSum s;
    for (double x : c) s += x;
    return s.value();
  }
  if (k == 1.0) return density(c);
  CompensatedSum s;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c[i] != 0.0) s += std::pow(static_cast<double>(i + 1), k) * c[i];
  }
  return s.value();
}

double stretched_moment(std::span<const double> c, double alpha, double mu) {
  CompensatedSum s;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c[i] != 0.0) s += std::exp(alpha * std::pow(static_cast<double>(i + 1), mu)) * c[i];
  }
  return s.value();
}

double weighted_sum(std::span<const double> c, std::span<const double> phi) {
  if (phi.size() < c.size()) {
    throw ParameterError("weighted_sum: weight shorter than state");
  }
  CompensatedSum s;
  for (std::size_t i = 0; i < c.size(); ++i) s += phi[i] * c[i];
  return s.value();
}

std::vector<double> uniform_grid(double t_end, std::size_t count) {
  if (count < 2) {
    return {0.0, t_end};
  }
  std::vector<double> t(count);
  for (std::size_t k = 0; k < count; ++k) {
    t[k] = t_end * static_cast<double>(k) / static_cast<double>(count - 1);
  }
  t.back() = t_end;
  return t;
}

namespace {

// Moves negative entries of c_2..c_N into c_1 with their mass.
// Returns the mass moved; leaves c_1 possibly negative.
double reinject(std::span<double> c) {
  double moved = 0.0;
  for (std::size_t i = 1; i < c.size(); ++i) {
    if (c[i] < 0.0) {
      const double m = static_cast<double>(i + 1) * c[i];
      c[0] += m;
      moved -= m;
      c[i] = 0.0;
    }
  }
  return moved;
}

}  // namespace

Trajectory integrate(const ClusterState& state0, const CoefficientModel& model, double t_end,
                     const IntegrateOptions& options) {
  const std::size_t n = state0.c.size();
  if (n < 2) {
    throw ParameterError("integrate: state must have length >= 2");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(state0.c[i] >= 0.0) || !std::isfinite(state0.c[i])) {
      throw ParameterError("integrate: initial state must be finite and non-negative (index " +
                           std::to_string(i + 1) + ")");
    }
  }
  if (!(t_end >= state0.t)) {
    throw ParameterError("integrate: t_end before initial time");
  }
  if (options.equilibrium && options.equilibrium->size() != n) {
    throw ParameterError("integrate: equilibrium length differs from state length");
  }

  Trajectory traj;
  traj.moment_orders = options.moment_orders;
  traj.stretched_orders = options.stretched_orders;
  traj.rates = std::make_shared<const RateTable>(tabulate_rates(model, n));
  const RateTable& rates = *traj.rates;

  const double rho0 = density(state0.c);
  traj.rel_tol = options.rel_tol;
  traj.abs_tol = options.abs_tol > 0.0 ? options.abs_tol : 1e-14 * std::max(rho0, 1e-300);

  std::vector<double> times = options.output_times;
  if (times.empty()) {
    times = {state0.t, t_end};
  }
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (!(times[k] > times[k - 1])) {
      throw ParameterError("integrate: output times must be strictly increasing");
    }
  }
  if (times.front() < state0.t || times.back() > t_end) {
    throw ParameterError("integrate: output times outside [t0, t_end]");
  }

  IntegratorOptions iopt;
  iopt.rel_tol = options.rel_tol;
  iopt.abs_tol = traj.abs_tol;
  iopt.initial_step = options.initial_step;
  iopt.max_step = options.max_step;
  iopt.max_steps = options.max_steps;
  const DormandPrince54 stepper(iopt);

  std::vector<double> w(n);
  const DormandPrince54::System system = [&rates, &w](double, std::span<const double> y,
                                                      std::span<double> dydt) {
    rhs(y, rates, dydt, w);
  };

  const double abs_tol = traj.abs_tol;
  const bool clamp = options.positivity == PositivityStrategy::kClampReinject;
  DormandPrince54::Filter filter;
  DormandPrince54::Projection project;
  if (clamp) {
    filter = [&traj, abs_tol](std::span<double> y) {
      bool modified = false;
      for (double v : y) {
        if (v < -abs_tol) return StepAction::kReject;
        if (v < 0.0) modified = true;
      }
      if (!modified) return StepAction::kAccept;
      if (y[0] < 0.0) return StepAction::kReject;
      std::vector<double> trial(y.begin(), y.end());
      const double moved = reinject(trial);
      if (trial[0] < 0.0) return StepAction::kReject;
      std::copy(trial.begin(), trial.end(), y.begin());
      traj.clamped_mass += moved;
      return StepAction::kAcceptModified;
    };
    project = [](std::span<double> y) {
      reinject(y);
      if (y[0] < 0.0) y[0] = 0.0;
    };
  }

  const EquilibriumData* eq = options.equilibrium.get();
  bool tail_warned = false;
  traj.snapshots.reserve(times.size());
  const DormandPrince54::Observer observer = [&](std::size_t, double t,
                                                 std::span<const double> y) {
    Snapshot s;
    s.t = t;
    s.rho = density(y);
    s.c1 = y[0];
    s.free_energy = eq ? relative_free_energy(y, *eq) : std::numeric_limits<double>::quiet_NaN();
    s.moments.reserve(options.moment_orders.size());
    for (double k : options.moment_orders) s.moments.push_back(moment(y, k));
    s.stretched.reserve(options.stretched_orders.size());
    for (const auto& o : options.stretched_orders) {
      s.stretched.push_back(stretched_moment(y, o.alpha, o.mu));
    }
    if (options.keep_states) s.c.assign(y.begin(), y.end());
    if (!tail_warned && y[n - 1] > options.tail_threshold * rho0 / static_cast<double>(n)) {
      std::ostringstream os;
      os << "tail overflow at t = " << t << ": c_N = " << y[n - 1]
         << " exceeds tail_threshold * rho / N; the truncation is no longer faithful";
      traj.warnings.push_back(os.str());
      tail_warned = true;
    }
    traj.snapshots.push_back(std::move(s));
  };

  std::vector<double> y = state0.c;
  traj.stats = stepper.integrate(system, y, state0.t, t_end, times, observer, filter, project);
  if (traj.clamped_mass > 0.0) {
    std::ostringstream os;
    os << "positivity clamp moved " << traj.clamped_mass << " mass units into c_1";
    traj.warnings.push_back(os.str());
  }
  return traj;
}

double weak_form_residual(const Trajectory& trajectory, std::span<const double> phi,
                          std::size_t snapshot) {
  const auto& snaps = trajectory.snapshots;
  if (snapshot == 0 || snapshot + 1 >= snaps.size()) {
    throw ParameterError("weak_form_residual: snapshot must have neighbours on both sides");
  }
  const Snapshot& prev = snaps[snapshot - 1];
  const Snapshot& mid = snaps[snapshot];
  const Snapshot& next = snaps[snapshot + 1];
  if (mid.c.empty() || prev.c.empty() || next.c.empty()) {
    throw ParameterError("weak_form_residual: trajectory was recorded without states");
  }
  const std::size_t n = mid.c.size();
  if (phi.size() < n) {
    throw ParameterError("weak_form_residual: weight shorter than state");
  }
  const double h1 = mid.t - prev.t;
  const double h2 = next.t - mid.t;
  const double f0 = weighted_sum(prev.c, phi);
  const double f1 = weighted_sum(mid.c, phi);
  const double f2 = weighted_sum(next.c, phi);
  const double derivative = -h2 / (h1 * (h1 + h2)) * f0 + (h2 - h1) / (h1 * h2) * f1 +
                            h1 / (h2 * (h1 + h2)) * f2;

  std::vector<double> w(n);
  net_rates(mid.c, *trajectory.rates, w);
  CompensatedSum flux;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    flux += w[i] * (phi[i + 1] - phi[i] - phi[0]);
  }
  return std::abs(derivative - flux.value());
}

}  // namespace bdm
