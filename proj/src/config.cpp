#include "iontrap/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

namespace iontrap {

namespace pt = boost::property_tree;
using std::numbers::pi;

std::vector<double> PhaseGrid::values() const {
  std::vector<double> out;
  if (!(step > 0.0)) return out;
  const auto count = static_cast<long>(std::ceil((stop - start) / step - 1e-9));
  for (long k = 0; k < count; ++k) out.push_back(start + static_cast<double>(k) * step);
  return out;
}

PhaseGrid ExperimentConfig::effective_sweep() const {
  if (sweep.step > 0.0) return sweep;
  const double period = 2.0 * pi / n_ions;
  return PhaseGrid{0.0, period, period / 16.0};
}

ReadoutConfig ExperimentConfig::effective_readout() const {
  ReadoutConfig r = readout;
  r.flip_eps = noise.detection_flip_eps;
  return r;
}

void ExperimentConfig::validate() const {
  try {
    noise.validate();
    effective_readout().validate(n_ions);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (shots_per_setting < 1) throw ConfigError("shots_per_setting must be >= 1");
  if (runs < 1) throw ConfigError("runs must be >= 1");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  switch (kind) {
    case ExperimentKind::kEntangle:
      if (n_ions != 2 && n_ions != 4) {
        throw ConfigError(fmt::format("entangle needs 2 or 4 ions, got {}", n_ions));
      }
      if (effective_sweep().values().size() < 4) {
        throw ConfigError("parity sweep needs at least 4 points");
      }
      break;
    case ExperimentKind::kBell:
      if (n_ions != 2) throw ConfigError("bell requires 2 ions");
      for (double a : {bell.alpha1, bell.delta1, bell.beta2, bell.gamma2}) {
        if (!std::isfinite(a)) throw ConfigError("bell settings must be finite");
      }
      break;
    case ExperimentKind::kDfs:
      if (n_ions != 2) throw ConfigError("dfs requires 2 ions");
      if (dfs.alpha_prime.values().size() < 4) {
        throw ConfigError("alpha' sweep needs at least 4 points");
      }
      if (dfs.delay_us.empty()) throw ConfigError("dfs delay grid is empty");
      for (double t : dfs.delay_us) {
        if (!(t >= 0.0)) throw ConfigError("dfs delays must be >= 0");
      }
      break;
  }
}

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kEntangle: return "entangle";
    case ExperimentKind::kBell: return "bell";
    case ExperimentKind::kDfs: return "dfs";
  }
  return "unknown";
}

ExperimentKind parse_experiment_kind(const std::string& text) {
  if (text == "entangle") return ExperimentKind::kEntangle;
  if (text == "bell") return ExperimentKind::kBell;
  if (text == "dfs") return ExperimentKind::kDfs;
  throw ConfigError(fmt::format("unknown experiment '{}'", text));
}

ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig cfg;
  cfg.kind = kind;
  cfg.runs = kind == ExperimentKind::kBell ? 5 : 1;
  return cfg;
}

namespace {

double parse_number(const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ConfigError(fmt::format("'{}' is not a number", text));
  }
  if (used != text.size()) throw ConfigError(fmt::format("'{}' is not a number", text));
  return v;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> parts;
  boost::split(parts, text, boost::is_any_of(","));
  for (auto& p : parts) boost::trim(p);
  std::erase_if(parts, [](const std::string& p) { return p.empty(); });
  return parts;
}

}  // namespace

double parse_angle(const std::string& raw) {
  std::string text = boost::trim_copy(raw);
  if (text.empty()) throw ConfigError("empty angle");
  const auto pos = text.find("pi");
  if (pos == std::string::npos) return parse_number(text);

  std::string coeff = text.substr(0, pos);
  std::string tail = text.substr(pos + 2);
  if (!coeff.empty() && coeff.back() == '*') coeff.pop_back();
  double factor = 1.0;
  if (coeff == "-") {
    factor = -1.0;
  } else if (!coeff.empty() && coeff != "+") {
    factor = parse_number(coeff);
  }
  double divisor = 1.0;
  if (!tail.empty()) {
    if (tail.front() != '/') throw ConfigError(fmt::format("cannot parse angle '{}'", raw));
    divisor = parse_number(tail.substr(1));
    if (divisor == 0.0) throw ConfigError(fmt::format("division by zero in angle '{}'", raw));
  }
  return factor * pi / divisor;
}

namespace {

template <typename T>
T get_or(const pt::ptree& tree, const std::string& key, T fallback) {
  const auto node = tree.get_optional<std::string>(key);
  if (!node) return fallback;
  const std::string v = boost::trim_copy(*node);
  if constexpr (std::is_same_v<T, bool>) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(fmt::format("{}: expected a boolean, got '{}'", key, v));
  } else if constexpr (std::is_integral_v<T>) {
    try {
      std::size_t used = 0;
      const long long parsed = std::stoll(v, &used);
      if (used != v.size() || parsed < 0) throw std::invalid_argument(v);
      return static_cast<T>(parsed);
    } catch (const std::exception&) {
      throw ConfigError(fmt::format("{}: expected a non-negative integer, got '{}'", key, v));
    }
  } else {
    return static_cast<T>(parse_angle(v));
  }
}

std::vector<AmbientHarmonic> parse_harmonics(const std::string& text) {
  std::vector<AmbientHarmonic> out;
  for (const auto& item : split_list(text)) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      throw ConfigError(fmt::format("harmonic '{}' must be <freq_hz>:<weight>", item));
    }
    out.push_back({parse_number(item.substr(0, colon)), parse_number(item.substr(colon + 1))});
  }
  return out;
}

void reject_unknown_keys(const pt::ptree& tree) {
  static const std::map<std::string, std::set<std::string>> kKnown = {
      {"experiment", {"type", "n_ions", "shots", "seed", "runs", "analytic", "workers"}},
      {"noise",
       {"dephasing", "dephasing_rate", "dephasing_duration_us", "ambient_t0_us",
        "ambient_harmonics", "detection_flip_eps", "gate_depolarize_p", "phase_jitter_sigma"}},
      {"readout",
       {"model", "eps_bright_to_dark", "eps_dark_to_bright", "lambda_bright", "lambda_dark",
        "thresholds"}},
      {"sweep", {"start", "stop", "step"}},
      {"bell", {"alpha1", "delta1", "beta2", "gamma2"}},
      {"dfs", {"beta", "alpha", "alpha_prime_start", "alpha_prime_stop", "alpha_prime_step",
               "delay_us", "mode"}},
  };
  for (const auto& [section, body] : tree) {
    const auto it = kKnown.find(section);
    if (it == kKnown.end()) throw ConfigError(fmt::format("unknown config section [{}]", section));
    for (const auto& [key, value] : body) {
      if (!it->second.contains(key)) {
        throw ConfigError(fmt::format("unknown key '{}' in [{}]", key, section));
      }
    }
  }
}

ExperimentConfig from_tree(const pt::ptree& tree) {
  reject_unknown_keys(tree);
  const auto kind_text = tree.get_optional<std::string>("experiment.type");
  if (!kind_text) throw ConfigError("config is missing [experiment] type");
  ExperimentConfig cfg = default_config(parse_experiment_kind(boost::trim_copy(*kind_text)));

  cfg.n_ions = get_or(tree, "experiment.n_ions", cfg.n_ions);
  cfg.shots_per_setting = get_or(tree, "experiment.shots", cfg.shots_per_setting);
  cfg.seed = get_or(tree, "experiment.seed", cfg.seed);
  cfg.runs = get_or(tree, "experiment.runs", cfg.runs);
  cfg.analytic = get_or(tree, "experiment.analytic", cfg.analytic);
  cfg.workers = get_or(tree, "experiment.workers", cfg.workers);

  const std::string dephasing = boost::trim_copy(tree.get("noise.dephasing", std::string("none")));
  if (dephasing != "none") {
    DephasingProcess proc;
    if (dephasing == "white") {
      proc.kind = DephasingKind::kEngineeredWhite;
    } else if (dephasing == "ambient") {
      proc.kind = DephasingKind::kAmbient;
    } else {
      throw ConfigError(fmt::format("noise.dephasing must be none, white or ambient, got '{}'",
                                    dephasing));
    }
    proc.rate_gamma = get_or(tree, "noise.dephasing_rate", 0.0);
    proc.duration_us = get_or(tree, "noise.dephasing_duration_us", 0.0);
    proc.start_time_us = get_or(tree, "noise.ambient_t0_us", 0.0);
    if (const auto h = tree.get_optional<std::string>("noise.ambient_harmonics")) {
      proc.harmonics = parse_harmonics(*h);
    }
    cfg.noise.dephasing = proc;
  }
  cfg.noise.detection_flip_eps = get_or(tree, "noise.detection_flip_eps", 0.0);
  cfg.noise.gate_depolarize_p = get_or(tree, "noise.gate_depolarize_p", 0.0);
  cfg.noise.phase_jitter_sigma = get_or(tree, "noise.phase_jitter_sigma", 0.0);

  const std::string model = boost::trim_copy(tree.get("readout.model", std::string("flip")));
  if (model == "flip") {
    cfg.readout.model = ReadoutModel::kIdealFlip;
  } else if (model == "photon") {
    cfg.readout.model = ReadoutModel::kPhotonCount;
  } else {
    throw ConfigError(fmt::format("readout.model must be flip or photon, got '{}'", model));
  }
  if (tree.get_optional<std::string>("readout.eps_bright_to_dark")) {
    cfg.readout.eps_bright_to_dark = get_or(tree, "readout.eps_bright_to_dark", 0.0);
  }
  if (tree.get_optional<std::string>("readout.eps_dark_to_bright")) {
    cfg.readout.eps_dark_to_bright = get_or(tree, "readout.eps_dark_to_bright", 0.0);
  }
  cfg.readout.lambda_bright = get_or(tree, "readout.lambda_bright", cfg.readout.lambda_bright);
  cfg.readout.lambda_dark = get_or(tree, "readout.lambda_dark", cfg.readout.lambda_dark);
  if (const auto t = tree.get_optional<std::string>("readout.thresholds")) {
    for (const auto& item : split_list(*t)) {
      cfg.readout.thresholds.push_back(static_cast<int>(parse_number(item)));
    }
  }

  cfg.sweep.start = get_or(tree, "sweep.start", cfg.sweep.start);
  cfg.sweep.stop = get_or(tree, "sweep.stop", cfg.sweep.stop);
  cfg.sweep.step = get_or(tree, "sweep.step", cfg.sweep.step);

  cfg.bell.alpha1 = get_or(tree, "bell.alpha1", cfg.bell.alpha1);
  cfg.bell.delta1 = get_or(tree, "bell.delta1", cfg.bell.delta1);
  cfg.bell.beta2 = get_or(tree, "bell.beta2", cfg.bell.beta2);
  cfg.bell.gamma2 = get_or(tree, "bell.gamma2", cfg.bell.gamma2);

  cfg.dfs.beta = get_or(tree, "dfs.beta", cfg.dfs.beta);
  cfg.dfs.alpha = get_or(tree, "dfs.alpha", cfg.dfs.alpha);
  cfg.dfs.alpha_prime.start = get_or(tree, "dfs.alpha_prime_start", cfg.dfs.alpha_prime.start);
  cfg.dfs.alpha_prime.stop = get_or(tree, "dfs.alpha_prime_stop", cfg.dfs.alpha_prime.stop);
  cfg.dfs.alpha_prime.step = get_or(tree, "dfs.alpha_prime_step", cfg.dfs.alpha_prime.step);
  if (const auto d = tree.get_optional<std::string>("dfs.delay_us")) {
    cfg.dfs.delay_us.clear();
    for (const auto& item : split_list(*d)) cfg.dfs.delay_us.push_back(parse_number(item));
  }
  const std::string mode = boost::trim_copy(tree.get("dfs.mode", std::string("both")));
  if (mode == "encoded") {
    cfg.dfs.mode = DfsMode::kEncoded;
  } else if (mode == "test") {
    cfg.dfs.mode = DfsMode::kTest;
  } else if (mode == "both") {
    cfg.dfs.mode = DfsMode::kBoth;
  } else {
    throw ConfigError(fmt::format("dfs.mode must be encoded, test or both, got '{}'", mode));
  }
  return cfg;
}

}  // namespace

namespace {

// The INI reader only understands whole-line comments; drop trailing ones.
std::string strip_inline_comments(const std::string& text) {
  std::istringstream in(text);
  std::string out;
  std::string line;
  while (std::getline(in, line)) {
    const auto pos = line.find_first_of(";#");
    if (pos != std::string::npos && pos > 0) line.erase(pos);
    out += line;
    out += '\n';
  }
  return out;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(strip_inline_comments(text));
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(fmt::format("config parse error: {}", e.what()));
  }
  try {
    return from_tree(tree);
  } catch (const pt::ptree_error& e) {
    throw ConfigError(fmt::format("config error: {}", e.what()));
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::string canonical_config_text(const ExperimentConfig& cfg) {
  std::string out;
  auto line = [&out](std::string_view key, const auto& value) {
    out += fmt::format("{}={}\n", key, value);
  };
  const auto readout = cfg.effective_readout();
  const auto sweep = cfg.effective_sweep();
  line("schema", kReportSchemaVersion);
  line("experiment.type", to_string(cfg.kind));
  line("experiment.n_ions", cfg.n_ions);
  line("experiment.shots", cfg.shots_per_setting);
  line("experiment.seed", cfg.seed);
  line("experiment.runs", cfg.runs);
  line("experiment.analytic", cfg.analytic);
  // Worker count is deliberately absent: it must not change results.
  if (cfg.noise.dephasing) {
    const auto& d = *cfg.noise.dephasing;
    line("noise.dephasing", d.kind == DephasingKind::kAmbient ? "ambient" : "white");
    line("noise.dephasing_rate", d.rate_gamma);
    line("noise.dephasing_duration_us", d.duration_us);
    line("noise.ambient_t0_us", d.start_time_us);
    for (const auto& h : d.harmonics) line("noise.ambient_harmonic", fmt::format("{}:{}", h.frequency_hz, h.weight));
  } else {
    line("noise.dephasing", "none");
  }
  line("noise.detection_flip_eps", cfg.noise.detection_flip_eps);
  line("noise.gate_depolarize_p", cfg.noise.gate_depolarize_p);
  line("noise.phase_jitter_sigma", cfg.noise.phase_jitter_sigma);
  line("readout.model", readout.model == ReadoutModel::kPhotonCount ? "photon" : "flip");
  line("readout.eps_bright_to_dark", readout.bright_to_dark());
  line("readout.eps_dark_to_bright", readout.dark_to_bright());
  line("readout.lambda_bright", readout.lambda_bright);
  line("readout.lambda_dark", readout.lambda_dark);
  line("readout.thresholds", fmt::format("{}", fmt::join(readout.thresholds, ",")));
  line("sweep.start", sweep.start);
  line("sweep.stop", sweep.stop);
  line("sweep.step", sweep.step);
  line("bell.alpha1", cfg.bell.alpha1);
  line("bell.delta1", cfg.bell.delta1);
  line("bell.beta2", cfg.bell.beta2);
  line("bell.gamma2", cfg.bell.gamma2);
  line("dfs.beta", cfg.dfs.beta);
  line("dfs.alpha", cfg.dfs.alpha);
  line("dfs.alpha_prime_start", cfg.dfs.alpha_prime.start);
  line("dfs.alpha_prime_stop", cfg.dfs.alpha_prime.stop);
  line("dfs.alpha_prime_step", cfg.dfs.alpha_prime.step);
  line("dfs.delay_us", fmt::format("{}", fmt::join(cfg.dfs.delay_us, ",")));
  line("dfs.mode", cfg.dfs.mode == DfsMode::kEncoded ? "encoded"
                   : cfg.dfs.mode == DfsMode::kTest  ? "test"
                                                     : "both");
  return out;
}

std::string config_digest(const ExperimentConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical_config_text(cfg)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace iontrap
