#include "bdm/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "bdm/errors.hpp"

namespace bdm {

namespace {

std::string trim(const std::string& s) {
  const auto begin = std::find_if_not(s.begin(), s.end(), [](unsigned char ch) {
    return std::isspace(ch);
  });
  const auto end = std::find_if_not(s.rbegin(), s.rend(), [](unsigned char ch) {
                     return std::isspace(ch);
                   }).base();
  return begin < end ? std::string(begin, end) : std::string();
}

std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    if (line[k] == '"') quoted = !quoted;
    if (line[k] == '#' && !quoted) return line.substr(0, k);
  }
  return line;
}

std::string unquote(std::string v) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
  return v;
}

double to_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const std::string t = trim(text);
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw ConfigError("config: " + key + " = '" + text + "' is not a number");
  }
  return v;
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "model.family",       "model.gamma",          "model.z_s",
      "model.q",            "model.sigma",          "model.mu",
      "model.rates_file",   "initial.shape",        "initial.rho",
      "initial.ratio",      "initial.decay",        "initial.seed",
      "initial.file",       "truncation.N",         "time.t_end",
      "time.n_output",      "moments.k",            "moments.stretched",
      "omega.strategy",     "omega.margin",         "omega.value",
      "supersolution.delta", "supersolution.tol_tail", "tolerances.rel_tol",
      "tolerances.abs_tol", "tolerances.tail_threshold", "tolerances.domination",
      "output.states",      "output.state_stride",  "sweep.parameter",
      "sweep.values",
  };
  return keys;
}

}  // namespace

KeyValueFile KeyValueFile::parse(const std::string& text, const std::string& origin) {
  KeyValueFile out;
  out.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  std::string section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string body = trim(strip_comment(line));
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']') {
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": unterminated section header");
      }
      section = trim(body.substr(1, body.size() - 2));
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(body.substr(0, eq));
    if (key.empty()) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    }
    const std::string full = section.empty() ? key : section + "." + key;
    out.values_[full] = unquote(trim(body.substr(eq + 1)));
  }
  return out;
}

KeyValueFile KeyValueFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open config file " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.string());
}

std::string KeyValueFile::get(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double KeyValueFile::get_double(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end() || it->second.empty()) return fallback;
  return to_double(key, it->second);
}

std::int64_t KeyValueFile::get_int(const std::string& key, std::int64_t fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end() || it->second.empty()) return fallback;
  std::int64_t v = 0;
  const std::string& t = it->second;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw ConfigError("config: " + key + " = '" + t + "' is not an integer");
  }
  return v;
}

bool KeyValueFile::get_bool(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end() || it->second.empty()) return fallback;
  if (it->second == "true" || it->second == "1" || it->second == "yes") return true;
  if (it->second == "false" || it->second == "0" || it->second == "no") return false;
  throw ConfigError("config: " + key + " = '" + it->second + "' is not a boolean");
}

std::vector<std::string> KeyValueFile::get_list(const std::string& key) const {
  std::vector<std::string> out;
  std::string v = trim(get(key, ""));
  if (!v.empty() && v.front() == '[' && v.back() == ']') v = v.substr(1, v.size() - 2);
  std::istringstream in(v);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = unquote(trim(item));
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

CoefficientModel build_model(const ModelSpec& spec) {
  if (spec.family == "power_law") {
    return make_power_law_model(spec.gamma, spec.z_s, spec.q, spec.mu);
  }
  if (spec.family == "exponential_tail") {
    return make_exponential_tail_model(spec.gamma, spec.z_s, spec.sigma, spec.mu);
  }
  if (spec.family == "file") {
    if (spec.rates_file.empty()) {
      throw ConfigError("config: model.family = file requires model.rates_file");
    }
    return load_rates_file(spec.rates_file);
  }
  throw ConfigError("config: unknown model.family '" + spec.family +
                    "' (expected power_law, exponential_tail or file)");
}

ExperimentConfig parse_config(const KeyValueFile& file) {
  for (const auto& [key, value] : file.values()) {
    if (known_keys().count(key) == 0) {
      throw ConfigError("config: unknown key '" + key + "' in " + file.origin());
    }
  }
  ExperimentConfig c;
  c.model.family = file.get("model.family", c.model.family);
  c.model.gamma = file.get_double("model.gamma", c.model.gamma);
  c.model.z_s = file.get_double("model.z_s", c.model.z_s);
  c.model.q = file.get_double("model.q", c.model.q);
  c.model.sigma = file.get_double("model.sigma", c.model.sigma);
  c.model.mu = file.get_double("model.mu", c.model.mu);
  c.model.rates_file = file.get("model.rates_file", "");

  c.initial.shape = file.get("initial.shape", c.initial.shape);
  c.initial.rho = file.get_double("initial.rho", c.initial.rho);
  c.initial.ratio = file.get_double("initial.ratio", c.initial.ratio);
  c.initial.decay = file.get_double("initial.decay", c.initial.decay);
  const std::int64_t seed = file.get_int("initial.seed", 0);
  if (seed < 0) throw ConfigError("config: initial.seed must be non-negative");
  c.initial.seed = static_cast<std::uint64_t>(seed);
  c.initial.file = file.get("initial.file", "");

  const std::int64_t n = file.get_int("truncation.N", static_cast<std::int64_t>(c.n));
  if (n < 10) throw ConfigError("config: truncation.N must be at least 10");
  c.n = static_cast<std::size_t>(n);
  c.t_end = file.get_double("time.t_end", c.t_end);
  if (!(c.t_end > 0.0)) throw ConfigError("config: time.t_end must be positive");
  const std::int64_t n_out = file.get_int("time.n_output", static_cast<std::int64_t>(c.n_output));
  if (n_out < 3) throw ConfigError("config: time.n_output must be at least 3");
  c.n_output = static_cast<std::size_t>(n_out);

  if (file.has("moments.k")) {
    c.moment_orders.clear();
    for (const auto& item : file.get_list("moments.k")) {
      c.moment_orders.push_back(to_double("moments.k", item));
    }
  }
  for (const auto& item : file.get_list("moments.stretched")) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      throw ConfigError("config: moments.stretched entries must read alpha:mu, got '" + item +
                        "'");
    }
    c.stretched_orders.push_back({to_double("moments.stretched", item.substr(0, colon)),
                                  to_double("moments.stretched", item.substr(colon + 1))});
  }

  const std::string strategy = file.get("omega.strategy", "auto");
  if (strategy == "auto") {
    c.omega_strategy = OmegaStrategy::kAuto;
  } else if (strategy == "explicit") {
    c.omega_strategy = OmegaStrategy::kExplicit;
  } else {
    throw ConfigError("config: omega.strategy must be auto or explicit");
  }
  c.omega_margin = file.get_double("omega.margin", c.omega_margin);
  c.omega_value = file.get_double("omega.value", c.omega_value);
  if (c.omega_strategy == OmegaStrategy::kAuto && !(c.omega_margin > 0.0 && c.omega_margin < 1.0)) {
    throw ConfigError("config: omega.margin must lie in (0, 1)");
  }
  if (c.omega_strategy == OmegaStrategy::kExplicit && !(c.omega_value > 0.0)) {
    throw ConfigError("config: omega.value must be positive");
  }

  c.delta = file.get_double("supersolution.delta", c.delta);
  if (!(c.delta >= 1.0)) throw ConfigError("config: supersolution.delta must be >= 1");
  c.tol_tail = file.get_double("supersolution.tol_tail", c.tol_tail);
  c.rel_tol = file.get_double("tolerances.rel_tol", c.rel_tol);
  c.abs_tol = file.get_double("tolerances.abs_tol", c.abs_tol);
  c.tail_threshold = file.get_double("tolerances.tail_threshold", c.tail_threshold);
  c.domination_tol = file.get_double("tolerances.domination", c.domination_tol);
  if (!(c.rel_tol > 0.0) || !(c.abs_tol > 0.0) || !(c.tail_threshold > 0.0) ||
      !(c.domination_tol >= 0.0) || !(c.tol_tail > 0.0)) {
    throw ConfigError("config: tolerances must be positive");
  }
  c.write_states = file.get_bool("output.states", c.write_states);
  const std::int64_t stride = file.get_int("output.state_stride", 0);
  if (stride < 0) throw ConfigError("config: output.state_stride must be non-negative");
  c.state_stride = static_cast<std::size_t>(stride);

  c.sweep_parameter = file.get("sweep.parameter", "");
  c.sweep_values = file.get_list("sweep.values");
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  return parse_config(KeyValueFile::load(path));
}

std::string config_template() {
  return R"(# bdm experiment configuration; every key is optional.

[model]
family = power_law        # power_law | exponential_tail | file
gamma = 0.5               # a_i = i^gamma
z_s = 1.0
q = 1.0                   # power_law: b_i = a_i (z_s + q i^(mu-1))
sigma = 1.0               # exponential_tail: b_i = z_s (i-1)^gamma exp(sigma i^mu - sigma (i-1)^mu)
mu = 0.5
rates_file =              # file: rows "i a_i b_i"

[initial]
shape = monodisperse      # monodisperse | geometric | equilibrium | random | file
rho = 1.0                 # the shape is rescaled to this density
ratio = 0.5               # geometric: c_i ~ ratio^i
decay = 10.0              # random: c_i = u_i exp(-i / decay)
seed = 0                  # random; overridden by --seed
file =                    # file: rows "i c_i"

[truncation]
N = 2000

[time]
t_end = 200.0
n_output = 2001           # snapshots on a uniform grid including 0 and t_end

[moments]
k = 2                     # comma-separated; k >= max(2 - gamma, 1 + gamma)
stretched =               # comma-separated alpha:mu pairs, mu <= 1 - gamma

[omega]
strategy = auto           # auto: z_bar + margin (z_s - z_bar) | explicit
margin = 0.1
value = 0.0

[supersolution]
delta = 1.0
tol_tail = 1e-10          # largest admissible G_N / rho

[tolerances]
rel_tol = 1e-8
abs_tol = 1e-14           # times rho
tail_threshold = 1e-3     # warn when c_N > tail_threshold rho / N
domination = 1e-10        # times rho

[output]
states = false            # write state_t<t>.csv and tail_t<t>.csv sidecars
state_stride = 0          # every k-th snapshot; 0 writes first and last only

[sweep]
parameter =               # any key above, e.g. model.gamma
values =                  # comma-separated
)";
}

}  // namespace bdm
