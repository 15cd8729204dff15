#include "bdm/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "bdm/tails.hpp"

namespace bdm {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_key_values(std::ostream& out, const KeyValues& kv) {
  for (const auto& [k, v] : kv) out << k << " = " << v << '\n';
}

namespace {

std::string moment_column(double k) { return "M_" + format_number(k); }

std::string stretched_column(const StretchedOrder& o) {
  return "E_" + format_number(o.alpha) + "_" + format_number(o.mu);
}

nlohmann::json number(double v) {
  if (std::isfinite(v)) return v;
  return format_number(v);
}

}  // namespace

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory,
                          const KeyValues& header) {
  for (const auto& [k, v] : header) out << '#' << k << '=' << v << '\n';
  out << "#rel_tol=" << format_number(trajectory.rel_tol) << '\n';
  out << "#abs_tol=" << format_number(trajectory.abs_tol) << '\n';
  out << "t,c1,rho,H";
  for (double k : trajectory.moment_orders) out << ',' << moment_column(k);
  for (const auto& o : trajectory.stretched_orders) out << ',' << stretched_column(o);
  out << '\n';
  for (const auto& s : trajectory.snapshots) {
    out << format_number(s.t) << ',' << format_number(s.c1) << ',' << format_number(s.rho) << ','
        << format_number(s.free_energy);
    for (double m : s.moments) out << ',' << format_number(m);
    for (double e : s.stretched) out << ',' << format_number(e);
    out << '\n';
  }
}

void write_plot_data(std::ostream& out, const Trajectory& trajectory) {
  out << "# t c1 rho H";
  for (double k : trajectory.moment_orders) out << ' ' << moment_column(k);
  for (const auto& o : trajectory.stretched_orders) out << ' ' << stretched_column(o);
  out << '\n';
  for (const auto& s : trajectory.snapshots) {
    out << format_number(s.t) << ' ' << format_number(s.c1) << ' ' << format_number(s.rho) << ' '
        << format_number(s.free_energy);
    for (double m : s.moments) out << ' ' << format_number(m);
    for (double e : s.stretched) out << ' ' << format_number(e);
    out << '\n';
  }
}

void write_state_csv(std::ostream& out, std::span<const double> c) {
  out << "i,c_i\n";
  for (std::size_t i = 0; i < c.size(); ++i) out << i + 1 << ',' << format_number(c[i]) << '\n';
}

void write_tail_csv(std::ostream& out, std::span<const double> g) {
  out << "j,G_j\n";
  for (std::size_t j = 0; j < g.size(); ++j) out << j + 1 << ',' << format_number(g[j]) << '\n';
}

void write_supersolution_csv(std::ostream& out, const Supersolution& sup) {
  out << "j,r_j,s_j\n";
  const std::size_t ns = sup.params.n_switch;
  for (std::size_t j = 1; j <= sup.size(); ++j) {
    out << j << ',' << format_number(sup.r[j - 1]) << ',';
    if (j >= ns) out << format_number(sup.s[j - ns]);
    out << '\n';
  }
}

nlohmann::json to_json(const DominationReport& report) {
  nlohmann::json j;
  j["holds"] = report.holds();
  j["max_gap"] = number(report.max_gap);
  j["epsilon_used"] = report.epsilon_used;
  j["t_start"] = report.t_start;
  j["snapshots_checked"] = report.snapshots_checked;
  if (report.first_violation) {
    j["first_violation"] = {{"t", report.first_violation->t},
                            {"j", report.first_violation->j},
                            {"gap", report.first_violation->gap}};
  } else {
    j["first_violation"] = nullptr;
  }
  return j;
}

nlohmann::json to_json(const SupersolutionCheck& check) {
  nlohmann::json j;
  j["holds"] = check.holds();
  j["first_condition"] = check.first_condition;
  j["first_margin"] = number(check.first_margin);
  j["second_condition"] = check.second_condition;
  j["worst_residual"] = number(check.worst_residual);
  j["worst_index"] = check.worst_index;
  j["first_failure"] = check.first_failure ? nlohmann::json(*check.first_failure) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json supersolution_witness(const Supersolution& sup, const SupersolutionCheck& check) {
  nlohmann::json j;
  j["lambda"] = sup.params.lambda;
  j["N_switch"] = sup.params.n_switch;
  j["omega"] = sup.params.omega;
  j["rho"] = sup.params.rho;
  j["delta"] = sup.params.delta;
  j["base"] = sup.base;
  j["tail_closure"] = sup.tail_closure;
  j["uniform_bound"] = sup.uniform_bound;
  j["max_r"] = sup.r.empty() ? 0.0 : sup.r.front();
  j["length"] = sup.size();
  j["verification"] = to_json(check);
  return j;
}

nlohmann::json to_json(const AssumptionReport& report) {
  auto verdict = [](const AssumptionVerdict& v) {
    nlohmann::json j;
    j["holds"] = v.holds;
    j["first_violation"] = v.first_violation ? nlohmann::json(*v.first_violation) : nlohmann::json(nullptr);
    j["detail"] = v.detail;
    return j;
  };
  nlohmann::json j;
  j["N"] = report.n;
  j["growth"] = verdict(report.growth);
  j["fragmentation_bound"] = verdict(report.fragmentation_bound);
  j["ratio_limit"] = verdict(report.ratio_limit);
  j["critical_monotone"] = verdict(report.critical_monotone);
  j["b_bar"] = number(report.b_bar);
  j["ratio_tail_average"] = number(report.ratio_tail_average);
  j["ratio_limit_estimate"] = number(report.ratio_limit_estimate);
  j["i0"] = report.i0;
  j["all"] = report.all();
  return j;
}

nlohmann::json to_json(const UniformBoundReport& report) {
  nlohmann::json j;
  j["verdict"] = report.verdict;
  j["failed_stage"] = report.failed_stage ? nlohmann::json(*report.failed_stage) : nlohmann::json(nullptr);
  j["model"] = report.model_description;
  j["rho"] = report.rho;
  j["z_s"] = number(report.z_s);
  j["rho_s"] = number(report.rho_s);
  j["z_bar"] = report.z_bar;
  j["omega"] = report.omega;
  j["N"] = report.config.n;
  j["t_end"] = report.config.t_end;
  j["max_mass_drift"] = report.max_mass_drift;

  nlohmann::json stages = nlohmann::json::array();
  for (const auto& s : report.stages) {
    stages.push_back({{"name", s.name}, {"passed", s.passed}, {"detail", s.detail}});
  }
  j["stages"] = stages;

  nlohmann::json th;
  th["T0"] = report.threshold.t0 ? nlohmann::json(*report.threshold.t0) : nlohmann::json(nullptr);
  th["index"] = report.threshold.index;
  th["never_below"] = report.threshold.never_below;
  th["inconclusive"] = report.threshold.inconclusive;
  j["threshold"] = th;

  nlohmann::json st = nlohmann::json::array();
  for (const auto& s : report.short_time) {
    st.push_back({{"weight", s.label},
                  {"C_phi", s.constant.c_phi},
                  {"epsilon", s.constant.epsilon},
                  {"A_phi", s.constant.a_phi},
                  {"b_bar", s.constant.b_bar},
                  {"margin", number(s.margin)},
                  {"holds", s.holds}});
  }
  j["short_time_bound"] = st;

  if (report.supersolution) {
    j["supersolution"] = supersolution_witness(*report.supersolution, report.supersolution_check);
    j["domination"] = to_json(report.domination);
  } else {
    j["supersolution"] = nullptr;
    j["domination"] = nullptr;
  }

  nlohmann::json certs = nlohmann::json::array();
  for (const auto& c : report.certificates) {
    certs.push_back({{"moment", c.label},
                     {"observed_after_T0", c.observed_after},
                     {"observed_all_times", c.observed_all},
                     {"certified", c.certified},
                     {"margin", c.certified - c.observed_after},
                     {"holds", c.holds},
                     {"holds_all_times", c.holds_all_times},
                     {"weighted_sum",
                      {{"lhs", number(c.weighted.lhs)},
                       {"rhs", number(c.weighted.rhs)},
                       {"constant", number(c.weighted.constant)},
                       {"delta_star", c.weighted.delta_star},
                       {"M", c.weighted.m},
                       {"holds", c.weighted.holds()}}}});
  }
  j["certificates"] = certs;

  nlohmann::json conv;
  if (!report.distance_to_equilibrium.empty()) {
    conv["initial"] = report.distance_to_equilibrium.front();
    conv["final"] = report.distance_to_equilibrium.back();
    conv["final_relative"] = report.distance_to_equilibrium.back() / report.rho;
  }
  j["distance_to_equilibrium"] = conv;

  nlohmann::json integ;
  integ["accepted_steps"] = report.trajectory.stats.accepted;
  integ["rejected_steps"] = report.trajectory.stats.rejected;
  integ["filtered_steps"] = report.trajectory.stats.filtered;
  integ["rhs_evaluations"] = report.trajectory.stats.rhs_evaluations;
  integ["rel_tol"] = report.trajectory.rel_tol;
  integ["abs_tol"] = report.trajectory.abs_tol;
  integ["clamped_mass"] = report.trajectory.clamped_mass;
  integ["warnings"] = report.trajectory.warnings;
  j["integration"] = integ;
  return j;
}

std::string state_file_name(double t) { return "state_t" + format_number(t) + ".csv"; }

void require_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    throw IoError("output directory " + dir.string() + " does not exist");
  }
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  return out;
}

namespace {

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) {
    throw IoError("error while writing " + path.string());
  }
}

}  // namespace

ExitCode emit_report(const UniformBoundReport& report, const std::filesystem::path& dir) {
  require_directory(dir);
  {
    const auto path = dir / "summary.json";
    auto out = open_output(path);
    out << to_json(report).dump(2) << '\n';
    finish(out, path);
  }
  KeyValues header = {{"model", report.model_description},
                      {"rho", format_number(report.rho)},
                      {"z_s", format_number(report.z_s)},
                      {"rho_s", format_number(report.rho_s)},
                      {"z_bar", format_number(report.z_bar)},
                      {"omega", format_number(report.omega)},
                      {"N", std::to_string(report.config.n)}};
  {
    const auto path = dir / "trajectory.csv";
    auto out = open_output(path);
    write_trajectory_csv(out, report.trajectory, header);
    finish(out, path);
  }
  {
    const auto path = dir / "moments.dat";
    auto out = open_output(path);
    write_plot_data(out, report.trajectory);
    finish(out, path);
  }
  if (report.supersolution) {
    const auto csv = dir / "supersolution.csv";
    auto out = open_output(csv);
    write_supersolution_csv(out, *report.supersolution);
    finish(out, csv);
    const auto js = dir / "supersolution.json";
    auto wout = open_output(js);
    wout << supersolution_witness(*report.supersolution, report.supersolution_check).dump(2)
         << '\n';
    finish(wout, js);
  }
  if (report.config.write_states) {
    const auto& snaps = report.trajectory.snapshots;
    for (std::size_t k = 0; k < snaps.size(); ++k) {
      const bool edge = k == 0 || k + 1 == snaps.size();
      const std::size_t stride = report.config.state_stride;
      if (!edge && (stride == 0 || k % stride != 0)) continue;
      const auto spath = dir / state_file_name(snaps[k].t);
      auto sout = open_output(spath);
      write_state_csv(sout, snaps[k].c);
      finish(sout, spath);
      const auto tpath = dir / ("tail_t" + format_number(snaps[k].t) + ".csv");
      auto tout = open_output(tpath);
      write_tail_csv(tout, tail_density(snaps[k].c));
      finish(tout, tpath);
    }
  }
  return report.verdict ? ExitCode::kPass : ExitCode::kVerdictFail;
}

}  // namespace bdm
