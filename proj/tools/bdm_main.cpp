// Command line front end: equilibrium, simulate, supersolution, verify,
// experiment, sweep, config-template.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "bdm/bdm.hpp"

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config;
  std::string out;
  std::size_t workers = 1;
  std::optional<std::uint64_t> seed;
};

bdm::KeyValueFile load_file(const Options& opt) {
  bdm::KeyValueFile file =
      opt.config.empty() ? bdm::KeyValueFile::parse("", "<defaults>") : bdm::KeyValueFile::load(opt.config);
  if (opt.seed) file.set("initial.seed", std::to_string(*opt.seed));
  return file;
}

std::optional<fs::path> out_dir(const Options& opt) {
  if (opt.out.empty()) return std::nullopt;
  bdm::require_directory(opt.out);
  return fs::path(opt.out);
}

int code(bdm::ExitCode c) { return static_cast<int>(c); }

int cmd_equilibrium(const Options& opt) {
  const auto dir = out_dir(opt);
  const bdm::ExperimentConfig cfg = bdm::parse_config(load_file(opt));
  const bdm::CoefficientModel model = bdm::build_model(cfg.model);
  const bdm::EquilibriumData eq = bdm::compute_equilibrium(model, cfg.initial.rho, cfg.n);
  bdm::KeyValues kv = {{"model", model.describe()}};
  for (const auto& item : eq.key_values()) kv.push_back(item);
  bdm::write_key_values(std::cout, kv);
  if (dir) {
    auto out = bdm::open_output(*dir / "equilibrium.txt");
    bdm::write_key_values(out, kv);
    auto prof = bdm::open_output(*dir / "equilibrium_profile.csv");
    bdm::write_state_csv(prof, eq.profile);
  }
  return code(bdm::ExitCode::kPass);
}

int cmd_simulate(const Options& opt) {
  const auto dir = out_dir(opt);
  const bdm::ExperimentConfig cfg = bdm::parse_config(load_file(opt));
  const bdm::CoefficientModel model = bdm::build_model(cfg.model);
  const double rho = cfg.initial.rho;
  auto eq = std::make_shared<bdm::EquilibriumData>(bdm::compute_equilibrium(model, rho, cfg.n));
  const bdm::ClusterState state0 = bdm::build_initial_state(cfg, *eq);

  bdm::IntegrateOptions io;
  io.rel_tol = cfg.rel_tol;
  io.abs_tol = cfg.abs_tol * rho;
  io.output_times = bdm::uniform_grid(cfg.t_end, cfg.n_output);
  io.moment_orders = cfg.moment_orders;
  io.stretched_orders = cfg.stretched_orders;
  io.equilibrium = eq;
  io.tail_threshold = cfg.tail_threshold;
  io.keep_states = cfg.write_states;
  const bdm::Trajectory traj = bdm::integrate(state0, model, cfg.t_end, io);
  for (const auto& w : traj.warnings) std::cerr << "warning: " << w << '\n';

  const bdm::KeyValues header = {{"model", model.describe()},
                                 {"rho", bdm::format_number(rho)},
                                 {"z_s", bdm::format_number(eq->z_s)},
                                 {"z_bar", bdm::format_number(eq->z_bar)},
                                 {"N", std::to_string(cfg.n)}};
  if (!dir) {
    bdm::write_trajectory_csv(std::cout, traj, header);
    return code(bdm::ExitCode::kPass);
  }
  auto out = bdm::open_output(*dir / "trajectory.csv");
  bdm::write_trajectory_csv(out, traj, header);
  auto plot = bdm::open_output(*dir / "moments.dat");
  bdm::write_plot_data(plot, traj);
  if (cfg.write_states) {
    for (std::size_t k = 0; k < traj.size(); ++k) {
      const bool edge = k == 0 || k + 1 == traj.size();
      if (!edge && (cfg.state_stride == 0 || k % cfg.state_stride != 0)) continue;
      const auto& s = traj.snapshots[k];
      auto so = bdm::open_output(*dir / bdm::state_file_name(s.t));
      bdm::write_state_csv(so, s.c);
      auto to = bdm::open_output(*dir / ("tail_t" + bdm::format_number(s.t) + ".csv"));
      bdm::write_tail_csv(to, bdm::tail_density(s.c));
    }
  }
  return code(bdm::ExitCode::kPass);
}

int cmd_supersolution(const Options& opt) {
  const auto dir = out_dir(opt);
  const bdm::ExperimentConfig cfg = bdm::parse_config(load_file(opt));
  const bdm::CoefficientModel model = bdm::build_model(cfg.model);
  const double rho = cfg.initial.rho;
  const bdm::EquilibriumData eq = bdm::compute_equilibrium(model, rho, cfg.n);
  const bdm::ClusterState state0 = bdm::build_initial_state(cfg, eq);
  const double omega = bdm::choose_omega(cfg, eq.z_bar, eq.z_s);
  const auto params = bdm::make_supersolution_params(model, omega, rho, cfg.delta, cfg.n);
  const auto g = bdm::tail_density(state0.c);
  const bdm::Supersolution sup = bdm::build_supersolution(model, params, g, cfg.tol_tail);
  const bdm::SupersolutionCheck check =
      bdm::verify_supersolution(sup.r, model, omega, rho, 1e-12 * rho);
  const nlohmann::json witness = bdm::supersolution_witness(sup, check);
  std::cout << witness.dump(2) << '\n';
  if (dir) {
    auto csv = bdm::open_output(*dir / "supersolution.csv");
    bdm::write_supersolution_csv(csv, sup);
    auto js = bdm::open_output(*dir / "supersolution.json");
    js << witness.dump(2) << '\n';
  }
  return code(check.holds() ? bdm::ExitCode::kPass : bdm::ExitCode::kVerdictFail);
}

int cmd_verify(const Options& opt) {
  const auto dir = out_dir(opt);
  const bdm::ExperimentConfig cfg = bdm::parse_config(load_file(opt));
  const bdm::CoefficientModel model = bdm::build_model(cfg.model);
  const bdm::AssumptionReport rep = bdm::check_assumptions(model, cfg.n);
  const nlohmann::json j = bdm::to_json(rep);
  std::cout << j.dump(2) << '\n';
  if (dir) {
    auto out = bdm::open_output(*dir / "assumptions.json");
    out << j.dump(2) << '\n';
  }
  return code(rep.all() ? bdm::ExitCode::kPass : bdm::ExitCode::kVerdictFail);
}

int cmd_experiment(const Options& opt) {
  const auto dir = out_dir(opt);
  const bdm::ExperimentConfig cfg = bdm::parse_config(load_file(opt));
  const bdm::UniformBoundReport rep = bdm::run_uniform_moment_experiment(cfg);
  for (const auto& s : rep.stages) {
    std::cerr << (s.passed ? "[pass] " : "[FAIL] ") << s.name << ": " << s.detail << '\n';
  }
  if (!dir) {
    std::cout << bdm::to_json(rep).dump(2) << '\n';
    return code(rep.verdict ? bdm::ExitCode::kPass : bdm::ExitCode::kVerdictFail);
  }
  return code(bdm::emit_report(rep, *dir));
}

int cmd_sweep(const Options& opt) {
  const auto dir = out_dir(opt);
  const auto entries = bdm::sweep(load_file(opt), opt.workers);
  nlohmann::json summary = nlohmann::json::array();
  int worst = 0;
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const auto& e = entries[k];
    nlohmann::json j;
    j["value"] = e.value;
    j["exit_code"] = e.exit_code;
    if (e.report) {
      j["verdict"] = e.report->verdict;
      j["failed_stage"] =
          e.report->failed_stage ? nlohmann::json(*e.report->failed_stage) : nlohmann::json(nullptr);
      if (dir) {
        const fs::path sub = *dir / ("run_" + std::to_string(k));
        std::error_code ec;
        fs::create_directory(sub, ec);
        if (ec) throw bdm::IoError("cannot create " + sub.string());
        bdm::emit_report(*e.report, sub);
      }
    } else {
      j["error"] = e.error;
    }
    if (e.exit_code != 0) worst = code(bdm::ExitCode::kVerdictFail);
    summary.push_back(j);
  }
  std::cout << summary.dump(2) << '\n';
  if (dir) {
    auto out = bdm::open_output(*dir / "sweep.json");
    out << summary.dump(2) << '\n';
  }
  return worst;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Becker-Doring moment propagation toolkit"};
  app.require_subcommand(1);
  Options opt;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* sub, bool with_workers) {
    sub->add_option("--config", opt.config, "experiment configuration file");
    sub->add_option("--out", opt.out, "existing output directory");
    sub->add_option("--seed", seed, "seed for randomized initial data");
    if (with_workers) sub->add_option("--workers", opt.workers, "worker threads")->check(CLI::PositiveNumber);
  };
  auto* eq = app.add_subcommand("equilibrium", "critical values and equilibrium profile");
  auto* sim = app.add_subcommand("simulate", "integrate and write the trajectory CSV");
  auto* sup = app.add_subcommand("supersolution", "build, verify and export a supersolution");
  auto* ver = app.add_subcommand("verify", "check the structural assumptions on the rates");
  auto* exp = app.add_subcommand("experiment", "full uniform moment bound pipeline");
  auto* swp = app.add_subcommand("sweep", "run the experiment over sweep.values");
  auto* tpl = app.add_subcommand("config-template", "print a configuration with all defaults");
  for (auto* s : {eq, sim, sup, ver, exp}) add_common(s, false);
  add_common(swp, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : code(bdm::ExitCode::kConfig);
  }
  for (auto* s : {eq, sim, sup, ver, exp, swp}) {
    if (s->count("--seed") > 0) opt.seed = seed;
  }

  try {
    if (*tpl) {
      std::cout << bdm::config_template();
      return 0;
    }
    if (*eq) return cmd_equilibrium(opt);
    if (*sim) return cmd_simulate(opt);
    if (*sup) return cmd_supersolution(opt);
    if (*ver) return cmd_verify(opt);
    if (*exp) return cmd_experiment(opt);
    if (*swp) return cmd_sweep(opt);
  } catch (const bdm::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return code(e.exit_code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return code(bdm::ExitCode::kNumerical);
  }
  return 0;
}
