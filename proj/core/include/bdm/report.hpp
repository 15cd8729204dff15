#pragma once

#include <filesystem>
#include <fstream>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "bdm/coefficients.hpp"
#include "bdm/errors.hpp"
#include "bdm/experiments.hpp"
#include "bdm/maximum_principle.hpp"
#include "bdm/solver.hpp"
#include "bdm/supersolution.hpp"

namespace bdm {

using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// Shortest decimal representation that round-trips.
[[nodiscard]] std::string format_number(double v);

/// "key = value" lines.
void write_key_values(std::ostream& out, const KeyValues& kv);

/// "#key=value" header lines, then t,c1,rho,H,M_k...,E_alpha_mu... rows.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory,
                          const KeyValues& header = {});
/// Whitespace-separated copy of the trajectory columns for gnuplot.
void write_plot_data(std::ostream& out, const Trajectory& trajectory);
/// i,c_i
void write_state_csv(std::ostream& out, std::span<const double> c);
/// j,G_j
void write_tail_csv(std::ostream& out, std::span<const double> g);
/// j,r_j,s_j (s empty before the switch index).
void write_supersolution_csv(std::ostream& out, const Supersolution& sup);

[[nodiscard]] nlohmann::json to_json(const DominationReport& report);
[[nodiscard]] nlohmann::json to_json(const SupersolutionCheck& check);
[[nodiscard]] nlohmann::json supersolution_witness(const Supersolution& sup,
                                                   const SupersolutionCheck& check);
[[nodiscard]] nlohmann::json to_json(const AssumptionReport& report);
[[nodiscard]] nlohmann::json to_json(const UniformBoundReport& report);

/// File name of a state sidecar, "state_t<t>.csv".
[[nodiscard]] std::string state_file_name(double t);

/// Writes summary.json, trajectory.csv, moments.dat, supersolution.csv,
/// supersolution.json and the configured state sidecars into dir.
/// Throws IoError if dir does not exist or a file cannot be written.
/// Returns kPass iff the verdict is true.
ExitCode emit_report(const UniformBoundReport& report, const std::filesystem::path& dir);

/// Opens path for writing or throws IoError.
[[nodiscard]] std::ofstream open_output(const std::filesystem::path& path);

/// Throws IoError unless dir is an existing directory.
void require_directory(const std::filesystem::path& dir);

}  // namespace bdm
