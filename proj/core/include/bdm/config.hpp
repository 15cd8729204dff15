#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "bdm/coefficients.hpp"
#include "bdm/solver.hpp"

namespace bdm {

/// Flat "section.key" -> value map read from a TOML-style file:
/// [section] headers, key = value lines, '#' comments.
class KeyValueFile {
 public:
  static KeyValueFile parse(const std::string& text, const std::string& origin = "<string>");
  static KeyValueFile load(const std::filesystem::path& path);

  [[nodiscard]] bool has(const std::string& key) const { return values_.count(key) != 0; }
  [[nodiscard]] std::string get(const std::string& key, const std::string& fallback) const;
  [[nodiscard]] double get_double(const std::string& key, double fallback) const;
  [[nodiscard]] std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  [[nodiscard]] bool get_bool(const std::string& key, bool fallback) const;
  [[nodiscard]] std::vector<std::string> get_list(const std::string& key) const;
  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  [[nodiscard]] const std::map<std::string, std::string>& values() const noexcept {
    return values_;
  }
  [[nodiscard]] const std::string& origin() const noexcept { return origin_; }

 private:
  std::map<std::string, std::string> values_;
  std::string origin_;
};

struct ModelSpec {
  std::string family = "power_law";
  double gamma = 0.5;
  double z_s = 1.0;
  double q = 1.0;
  double sigma = 1.0;
  double mu = 0.5;
  std::filesystem::path rates_file;
};

[[nodiscard]] CoefficientModel build_model(const ModelSpec& spec);

struct InitialSpec {
  std::string shape = "monodisperse";
  double rho = 1.0;
  double ratio = 0.5;
  double decay = 10.0;
  std::uint64_t seed = 0;
  std::filesystem::path file;
};

enum class OmegaStrategy { kAuto, kExplicit };

struct ExperimentConfig {
  ModelSpec model;
  InitialSpec initial;
  std::size_t n = 2000;
  double t_end = 200.0;
  std::size_t n_output = 2001;
  std::vector<double> moment_orders{2.0};
  std::vector<StretchedOrder> stretched_orders;
  OmegaStrategy omega_strategy = OmegaStrategy::kAuto;
  double omega_margin = 0.1;
  double omega_value = 0.0;
  double delta = 1.0;
  /// Relative to rho.
  double tol_tail = 1e-10;
  double rel_tol = 1e-8;
  /// Relative to rho.
  double abs_tol = 1e-14;
  double tail_threshold = 1e-3;
  /// Relative to rho.
  double domination_tol = 1e-10;
  bool write_states = false;
  std::size_t state_stride = 0;
  /// Sweep definition; ignored outside the sweep command.
  std::string sweep_parameter;
  std::vector<std::string> sweep_values;
};

/// Throws ConfigError on unknown keys or malformed values.
[[nodiscard]] ExperimentConfig parse_config(const KeyValueFile& file);
[[nodiscard]] ExperimentConfig load_config(const std::filesystem::path& path);

/// Commented template listing every key with its default.
[[nodiscard]] std::string config_template();

}  // namespace bdm
