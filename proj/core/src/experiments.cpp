#include "bdm/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

#include "bdm/errors.hpp"
#include "bdm/summation.hpp"
#include "bdm/tails.hpp"

namespace bdm {

ShortTimeConstant short_time_constant(const CoefficientModel& model, const Weight& phi,
                                      double rho, std::size_t n) {
  if (n < 4) {
    throw ParameterError("short_time_constant: scan length must be at least 4");
  }
  ShortTimeConstant out;
  out.b_bar = model.b_bar();
  const double phi1 = phi(1);
  if (!(phi1 > 0.0)) {
    throw ParameterError("short_time_constant: phi_1 must be positive");
  }
  double eps = std::numeric_limits<double>::infinity();
  double sup = 0.0;
  std::vector<double> ratio(n + 1, 0.0);
  double prev = phi1;
  for (std::size_t i = 1; i <= n; ++i) {
    const double next = phi(i + 1);
    if (!std::isfinite(next)) {
      throw ParameterError("short_time_constant: weight overflows at i = " +
                           std::to_string(i + 1));
    }
    eps = std::min(eps, (next - prev) / phi1);
    ratio[i] = model.a(i) * (next - prev) / prev;
    sup = std::max(sup, ratio[i]);
    prev = next;
  }
  if (!(eps > 0.0)) {
    throw ParameterError("short_time_constant: weight increments are not bounded below");
  }
  out.epsilon = eps;
  out.a_phi = sup;
  out.growth_exponent = std::log(ratio[n] / ratio[n / 2]) / std::log(2.0);
  if (out.growth_exponent > 0.05) {
    std::ostringstream os;
    os << "short_time_constant: a_i (phi_{i+1} - phi_i) / phi_i still grows like i^"
       << out.growth_exponent << " at i = " << n
       << "; A_phi is unbounded (exponential weights are not admissible)";
    throw ParameterError(os.str());
  }
  out.c_phi = (rho + out.b_bar / out.epsilon) * out.a_phi;
  return out;
}

ThresholdResult detect_threshold(const Trajectory& trajectory, double omega) {
  ThresholdResult out;
  const auto& snaps = trajectory.snapshots;
  if (snaps.empty() || !(snaps.back().c1 < omega)) {
    out.never_below = true;
    return out;
  }
  std::size_t k = snaps.size();
  while (k > 0 && snaps[k - 1].c1 < omega) --k;
  out.index = k;
  out.t0 = snaps[k].t;
  out.inconclusive = k + 1 == snaps.size();
  return out;
}

double choose_omega(const ExperimentConfig& config, double z_bar, double z_s) {
  if (config.omega_strategy == OmegaStrategy::kExplicit) return config.omega_value;
  return z_bar + config.omega_margin * (z_s - z_bar);
}

void validate_moment_requests(const ExperimentConfig& config, const CoefficientModel& model) {
  const double gamma = model.gamma();
  const double k_min = std::max(2.0 - gamma, 1.0 + gamma);
  for (double k : config.moment_orders) {
    if (k < k_min) {
      std::ostringstream os;
      os << "moment order k = " << k << " is below max(2 - gamma, 1 + gamma) = " << k_min
         << "; uniform propagation of algebraic moments is only available for such k";
      throw ConfigError(os.str());
    }
  }
  for (const auto& o : config.stretched_orders) {
    if (model.linear_branch() || !(gamma < 1.0)) {
      throw ConfigError(
          "stretched-exponential moments need the power-law growth branch (gamma < 1)");
    }
    if (!(o.alpha > 0.0) || !(o.mu > 0.0) || o.mu > 1.0 - gamma + 1e-15) {
      std::ostringstream os;
      os << "stretched moment (alpha = " << o.alpha << ", mu = " << o.mu
         << ") needs alpha > 0 and 0 < mu <= 1 - gamma = " << 1.0 - gamma;
      throw ConfigError(os.str());
    }
  }
}

ClusterState build_initial_state(const ExperimentConfig& config,
                                 const EquilibriumData& equilibrium) {
  const std::size_t n = config.n;
  const InitialSpec& init = config.initial;
  if (!(init.rho > 0.0)) {
    throw ConfigError("initial.rho must be positive");
  }
  ClusterState state;
  state.c.assign(n, 0.0);
  if (init.shape == "monodisperse") {
    state.c[0] = 1.0;
  } else if (init.shape == "geometric") {
    if (!(init.ratio > 0.0 && init.ratio < 1.0)) {
      throw ConfigError("initial.ratio must lie in (0, 1)");
    }
    double v = init.ratio;
    for (std::size_t i = 0; i < n; ++i) {
      state.c[i] = v;
      v *= init.ratio;
    }
  } else if (init.shape == "equilibrium") {
    state.c = equilibrium.profile;
  } else if (init.shape == "random") {
    if (!(init.decay > 0.0)) {
      throw ConfigError("initial.decay must be positive");
    }
    std::mt19937_64 rng(init.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
      state.c[i] = u(rng) * std::exp(-static_cast<double>(i + 1) / init.decay);
    }
  } else if (init.shape == "file") {
    std::ifstream in(init.file);
    if (!in) {
      throw IoError("cannot open initial data file " + init.file.string());
    }
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty() || line[0] == '#') continue;
      std::istringstream row(line);
      std::size_t i = 0;
      double v = 0.0;
      if (!(row >> i >> v) || i == 0 || i > n || !(v >= 0.0)) {
        throw ConfigError(init.file.string() + ":" + std::to_string(lineno) +
                          ": expected 'i c_i' with 1 <= i <= N and c_i >= 0");
      }
      state.c[i - 1] = v;
    }
  } else {
    throw ConfigError("unknown initial.shape '" + init.shape + "'");
  }
  const double rho = density(state.c);
  if (!(rho > 0.0)) {
    throw ConfigError("initial data carries no mass");
  }
  const double scale = init.rho / rho;
  if (scale != 1.0) {
    for (double& v : state.c) v *= scale;
  }
  return state;
}

namespace {

double max_relative_drift(const Trajectory& traj, double rho0) {
  double worst = 0.0;
  for (const auto& s : traj.snapshots) worst = std::max(worst, std::abs(s.rho - rho0) / rho0);
  return worst;
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

void record(UniformBoundReport& rep, const std::string& name, bool passed,
            const std::string& detail) {
  rep.stages.push_back({name, passed, detail});
  if (!passed && !rep.failed_stage) rep.failed_stage = name;
}

std::string moment_label(double k) {
  std::ostringstream os;
  os << "M_" << k;
  return os.str();
}

std::string stretched_label(const StretchedOrder& o) {
  std::ostringstream os;
  os << "E_" << o.alpha << "_" << o.mu;
  return os.str();
}

}  // namespace

UniformBoundReport run_uniform_moment_experiment(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  UniformBoundReport rep;
  rep.config = config;
  const CoefficientModel model = build_model(config.model);
  rep.model_description = model.describe();
  validate_moment_requests(config, model);

  const double rho = config.initial.rho;
  rep.rho = rho;
  auto eq = std::make_shared<EquilibriumData>(compute_equilibrium(model, rho, config.n));
  rep.equilibrium = eq;
  rep.z_s = eq->z_s;
  rep.rho_s = eq->rho_s;
  rep.z_bar = eq->z_bar;
  rep.omega = choose_omega(config, eq->z_bar, eq->z_s);
  if (!(rep.omega < eq->z_s)) {
    throw ConfigError("omega must lie below z_s = " + format_double(eq->z_s));
  }

  const ClusterState state0 = build_initial_state(config, *eq);

  // (1) integrate
  IntegrateOptions opts;
  opts.rel_tol = config.rel_tol;
  opts.abs_tol = config.abs_tol * rho;
  opts.output_times = uniform_grid(config.t_end, config.n_output);
  opts.moment_orders = config.moment_orders;
  opts.stretched_orders = config.stretched_orders;
  opts.equilibrium = eq;
  opts.tail_threshold = config.tail_threshold;
  try {
    rep.trajectory = integrate(state0, model, config.t_end, opts);
  } catch (const NumericalError& e) {
    record(rep, "integrate", false, e.what());
    rep.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
  }
  const Trajectory& traj = rep.trajectory;
  rep.max_mass_drift = max_relative_drift(traj, density(state0.c));
  for (const auto& s : traj.snapshots) {
    CompensatedSum d;
    for (std::size_t i = 0; i < s.c.size(); ++i) {
      d += static_cast<double>(i + 1) * std::abs(s.c[i] - eq->profile[i]);
    }
    rep.distance_to_equilibrium.push_back(d.value());
  }
  {
    std::ostringstream os;
    os << traj.stats.accepted << " steps, max relative mass drift " << rep.max_mass_drift;
    for (const auto& w : traj.warnings) os << "; " << w;
    for (std::size_t m = 0; m < config.stretched_orders.size(); ++m) {
      const auto& o = config.stretched_orders[m];
      const double amplification =
          std::exp(o.alpha * std::pow(static_cast<double>(config.n), o.mu));
      if (traj.abs_tol * amplification > 1e-3 * traj.snapshots.front().stretched[m]) {
        os << "; abs_tol times exp(alpha N^mu) is not small against E(0): tolerance noise in"
           << " the tail may dominate the stretched moment, lower tolerances.abs_tol";
        break;
      }
    }
    record(rep, "integrate", true, os.str());
  }

  // (2) threshold
  rep.threshold = detect_threshold(traj, rep.omega);
  if (!rep.threshold.t0) {
    record(rep, "threshold", false,
           "c_1 never stays below omega = " + format_double(rep.omega) + " on the horizon");
  } else {
    record(rep, "threshold", !rep.threshold.inconclusive,
           "T0 = " + format_double(*rep.threshold.t0) +
               (rep.threshold.inconclusive ? " (only at the final snapshot)" : ""));
  }
  const double t0 = rep.threshold.t0.value_or(config.t_end);
  const std::size_t i0 = rep.threshold.t0 ? rep.threshold.index : traj.size() - 1;

  // (3) short-time growth on [0, T0]
  {
    bool ok = true;
    std::ostringstream detail;
    auto check = [&](const std::string& label, const Weight& phi,
                     const std::vector<double>& series) {
      ShortTimeCheck sc;
      sc.label = label;
      try {
        sc.constant = short_time_constant(model, phi, rho, config.n);
      } catch (const ParameterError& e) {
        sc.holds = false;
        ok = false;
        detail << label << ": " << e.what() << "; ";
        rep.short_time.push_back(sc);
        return;
      }
      const double m0 = series.front();
      double margin = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k <= i0 && k < series.size(); ++k) {
        const double bound = std::exp(sc.constant.c_phi * traj.snapshots[k].t) * m0 * (1.0 + 1e-8);
        margin = std::min(margin, (bound - series[k]) / m0);
      }
      sc.margin = margin;
      sc.holds = margin >= 0.0;
      ok = ok && sc.holds;
      detail << label << ": C_phi = " << sc.constant.c_phi << ", margin " << margin << "; ";
      rep.short_time.push_back(sc);
    };
    for (std::size_t m = 0; m < config.moment_orders.size(); ++m) {
      std::vector<double> series;
      for (const auto& s : traj.snapshots) series.push_back(s.moments[m]);
      check(moment_label(config.moment_orders[m]), power_weight(config.moment_orders[m]), series);
    }
    for (std::size_t m = 0; m < config.stretched_orders.size(); ++m) {
      std::vector<double> series;
      for (const auto& s : traj.snapshots) series.push_back(s.stretched[m]);
      const auto& o = config.stretched_orders[m];
      check(stretched_label(o), stretched_exp_weight(o.alpha, o.mu), series);
    }
    record(rep, "short_time_bound", ok, detail.str());
  }

  // (4) supersolution from G(T0)
  const std::vector<double> g0 = tail_density(traj.snapshots[i0].c);
  try {
    const SupersolutionParams params =
        make_supersolution_params(model, rep.omega, rho, config.delta, config.n);
    rep.supersolution = build_supersolution(model, params, g0, config.tol_tail);
    rep.supersolution_check =
        verify_supersolution(rep.supersolution->r, model, rep.omega, rho, 1e-12 * rho);
    std::ostringstream os;
    os << "lambda = " << params.lambda << ", N_switch = " << params.n_switch
       << ", max r = " << rep.supersolution->r_at(1) << ", worst residual "
       << rep.supersolution_check.worst_residual;
    record(rep, "supersolution", rep.supersolution_check.holds(), os.str());
  } catch (const ParameterError& e) {
    record(rep, "supersolution", false, e.what());
  }

  // (5) domination after T0, (6) certification
  if (rep.supersolution) {
    const auto& sup = *rep.supersolution;
    rep.domination = check_domination(traj, sup.r, t0, config.domination_tol * rho);
    {
      std::ostringstream os;
      os << "max gap " << rep.domination.max_gap << " over " << rep.domination.snapshots_checked
         << " snapshots";
      if (rep.domination.first_violation) {
        os << "; first violation at t = " << rep.domination.first_violation->t
           << ", j = " << rep.domination.first_violation->j;
      }
      record(rep, "domination", rep.domination.holds(), os.str());
    }

    bool ok = true;
    std::ostringstream detail;
    auto certify = [&](const std::string& label, const Weight& bound_weight, double factor,
                       const Weight& moment_weight, std::size_t column, bool stretched) {
      MomentCertificate mc;
      mc.label = label;
      CompensatedSum s;
      for (std::size_t j = 1; j <= sup.size(); ++j) s += bound_weight(j) * sup.r[j - 1];
      mc.certified = factor * s.value();
      for (std::size_t k = 0; k < traj.size(); ++k) {
        const auto& snap = traj.snapshots[k];
        const double v = stretched ? snap.stretched[column] : snap.moments[column];
        mc.observed_all = std::max(mc.observed_all, v);
        if (k >= i0) mc.observed_after = std::max(mc.observed_after, v);
      }
      try {
        mc.weighted = weighted_sum_bound(sup, g0, moment_weight);
      } catch (const ParameterError& e) {
        detail << label << ": " << e.what() << "; ";
      }
      mc.holds = mc.observed_after <= mc.certified && mc.weighted.holds();
      mc.holds_all_times = mc.observed_all <= mc.certified;
      ok = ok && mc.holds;
      detail << label << ": observed " << mc.observed_after << " <= certified " << mc.certified
             << "; ";
      rep.certificates.push_back(mc);
    };
    for (std::size_t m = 0; m < config.moment_orders.size(); ++m) {
      const double k = config.moment_orders[m];
      certify(moment_label(k), power_weight(k - 1.0), k + 1.0, power_weight(k - 1.0), m, false);
    }
    for (std::size_t m = 0; m < config.stretched_orders.size(); ++m) {
      const auto& o = config.stretched_orders[m];
      const StretchedWeights sw = stretched_weights(o.alpha, o.mu);
      const Weight psi = [sw](std::size_t j) { return sw.psi(j); };
      certify(stretched_label(o), psi, sw.eta2, psi, m, true);
    }
    record(rep, "certify", ok, detail.str());
  }

  rep.verdict = !rep.failed_stage.has_value();
  rep.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

std::vector<SweepEntry> sweep(const KeyValueFile& base, std::size_t workers) {
  const ExperimentConfig proto = parse_config(base);
  if (proto.sweep_parameter.empty() || proto.sweep_values.empty()) {
    throw ConfigError("sweep needs sweep.parameter and sweep.values");
  }
  if (proto.sweep_parameter.rfind("sweep.", 0) == 0) {
    throw ConfigError("sweep.parameter cannot name a sweep key");
  }
  std::vector<ExperimentConfig> configs;
  for (const auto& value : proto.sweep_values) {
    KeyValueFile file = base;
    file.set(proto.sweep_parameter, value);
    configs.push_back(parse_config(file));
  }
  std::vector<SweepEntry> out(configs.size());
  for (std::size_t k = 0; k < configs.size(); ++k) out[k].value = proto.sweep_values[k];

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k = next++; k < configs.size(); k = next++) {
      try {
        out[k].report = run_uniform_moment_experiment(configs[k]);
        out[k].exit_code = out[k].report->verdict ? 0 : static_cast<int>(ExitCode::kVerdictFail);
      } catch (const Error& e) {
        out[k].error = e.what();
        out[k].exit_code = static_cast<int>(e.exit_code());
      }
    }
  };
  const std::size_t n_threads = std::max<std::size_t>(1, std::min(workers, configs.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  return out;
}

}  // namespace bdm
