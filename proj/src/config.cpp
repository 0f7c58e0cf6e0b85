#include "gtsim/config.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace gtsim {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

[[noreturn]] void fail(const std::string& path, int line,
                       const std::string& message) {
  throw config_error(path + ":" + std::to_string(line) + ": " + message);
}

double parse_double(const std::string& path, int line, const std::string& key,
                    const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    fail(path, line, "key '" + key + "' expects a number, got '" + value + "'");
  }
}

int parse_int(const std::string& path, int line, const std::string& key,
              const std::string& value) {
  try {
    std::size_t used = 0;
    const long v = std::stol(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return static_cast<int>(v);
  } catch (const std::exception&) {
    fail(path, line,
         "key '" + key + "' expects an integer, got '" + value + "'");
  }
}

std::uint64_t parse_u64(const std::string& path, int line,
                        const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return static_cast<std::uint64_t>(v);
  } catch (const std::exception&) {
    fail(path, line,
         "key '" + key + "' expects a nonnegative integer, got '" + value +
             "'");
  }
}

bool parse_bool(const std::string& path, int line, const std::string& key,
                const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  fail(path, line, "key '" + key + "' expects true/false, got '" + value + "'");
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> parts;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

}  // namespace

HyperParams<double> to_hyperparams(const AlgorithmConfig& algorithm) {
  HyperParams<double> hp;
  hp.variant = parse_variant(algorithm.variant);
  hp.local_steps = algorithm.local_steps;
  hp.eta_c = algorithm.eta_c;
  hp.eta_s = algorithm.eta_s;
  hp.rounds = algorithm.rounds;
  if (algorithm.correction_init) {
    if (*algorithm.correction_init == "exact") {
      hp.correction_init = CorrectionInit::exact;
    } else if (*algorithm.correction_init == "zero") {
      hp.correction_init = CorrectionInit::zero;
    } else {
      throw config_error("correction_init must be exact or zero, got '" +
                         *algorithm.correction_init + "'");
    }
  }
  if (algorithm.tracking_init) {
    if (*algorithm.tracking_init == "mean") {
      hp.tracking_init = TrackingInit::mean;
    } else if (*algorithm.tracking_init == "local") {
      hp.tracking_init = TrackingInit::local;
    } else {
      throw config_error("tracking_init must be mean or local, got '" +
                         *algorithm.tracking_init + "'");
    }
  }
  return hp;
}

Problem<double> build_problem(const ProblemConfig& problem) {
  if (problem.kind == "quadratic") {
    return make_quadratic<double>(problem.n, problem.d, problem.zeta_bar,
                                  problem.data_seed);
  }
  if (problem.kind == "nonconvex") {
    return make_nonconvex<double>(problem.n, problem.d, problem.zeta_bar,
                                  problem.c, problem.data_seed);
  }
  throw config_error("problem kind must be quadratic or nonconvex, got '" +
                     problem.kind + "'");
}

MixingMatrix<double> build_topology(const TopologyConfig& topology, int n) {
  return make_topology<double>(topology.name, n);
}

void validate_run_config(const RunConfig& config) {
  if (config.problem.n < 1) throw config_error("problem n must be >= 1");
  if (config.problem.d < 1) throw config_error("problem d must be >= 1");
  if (config.problem.zeta_bar < 0) {
    throw config_error("zeta_bar must be >= 0");
  }
  if (config.problem.kind != "quadratic" && config.problem.kind != "nonconvex") {
    throw config_error("problem kind must be quadratic or nonconvex, got '" +
                       config.problem.kind + "'");
  }
  if (config.problem.c != 0.0 && config.problem.kind != "nonconvex") {
    throw config_error("key 'c' only applies to the nonconvex kind");
  }
  if (config.problem.c < 0) throw config_error("c must be >= 0");
  if (config.algorithm.variant.empty()) {
    throw config_error("missing required key 'variant' in [algorithm]");
  }
  if (config.algorithm.rounds < 0) {
    throw config_error("missing required key 'T' in [algorithm]");
  }
  if (config.algorithm.local_steps < 1) {
    throw config_error("K must be >= 1");
  }
  if (!(config.algorithm.eta_c > 0) || !(config.algorithm.eta_s > 0)) {
    throw config_error("stepsizes eta_c and eta_s must be > 0");
  }
  if (config.noise.sigma < 0) throw config_error("sigma must be >= 0");
  if (config.runner.repetitions < 1) {
    throw config_error("repetitions must be >= 1");
  }
  for (double threshold : config.runner.thresholds) {
    if (!(threshold > 0)) {
      throw config_error("thresholds must be > 0");
    }
  }
  // Checks variant / init-mode compatibility.
  const HyperParams<double> hp = to_hyperparams(config.algorithm);
  const bool has_correction = hp.variant == Variant::kgt ||
                              hp.variant == Variant::periodical_gt_fullgrad;
  const bool has_tracking = hp.variant == Variant::gt ||
                            hp.variant == Variant::periodical_gt ||
                            hp.variant == Variant::large_batch_gt;
  if (hp.correction_init && !has_correction) {
    throw config_error(std::string("correction_init does not apply to ") +
                       config.algorithm.variant);
  }
  if (hp.tracking_init && !has_tracking) {
    throw config_error(std::string("tracking_init does not apply to ") +
                       config.algorithm.variant);
  }
  const std::string& topo = config.topology.name;
  if (topo != "ring" && topo != "complete" && topo != "disconnected") {
    if (topo.rfind("file:", 0) == 0) {
      const std::string file = topo.substr(5);
      if (!std::filesystem::exists(file)) {
        throw config_error("topology file does not exist: " + file);
      }
    } else {
      throw config_error("unknown topology name: " + topo);
    }
  }
}

ParsedConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file: " + path);

  RunConfig config;
  config.name = std::filesystem::path(path).stem().string();
  SweepAxes axes;
  bool has_sweep_section = false;
  bool c_was_set = false;

  std::string section;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') fail(path, line_no, "malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      static const std::set<std::string> known = {
          "problem", "topology", "algorithm", "noise", "runner", "sweep"};
      if (!known.count(section)) {
        fail(path, line_no, "unknown section [" + section + "]");
      }
      if (section == "sweep") has_sweep_section = true;
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail(path, line_no, "expected key = value, got '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(path, line_no, "empty key");
    if (value.empty()) fail(path, line_no, "key '" + key + "' has no value");
    if (section.empty()) {
      fail(path, line_no, "key '" + key + "' appears before any [section]");
    }

    if (section == "problem") {
      if (key == "kind") {
        config.problem.kind = value;
      } else if (key == "n") {
        config.problem.n = parse_int(path, line_no, key, value);
      } else if (key == "d") {
        config.problem.d = parse_int(path, line_no, key, value);
      } else if (key == "zeta_bar") {
        config.problem.zeta_bar = parse_double(path, line_no, key, value);
      } else if (key == "c") {
        config.problem.c = parse_double(path, line_no, key, value);
        c_was_set = true;
      } else if (key == "data_seed") {
        config.problem.data_seed = parse_u64(path, line_no, key, value);
      } else {
        fail(path, line_no, "unknown key '" + key + "' in section [problem]");
      }
    } else if (section == "topology") {
      if (key == "name") {
        config.topology.name = value;
      } else {
        fail(path, line_no, "unknown key '" + key + "' in section [topology]");
      }
    } else if (section == "algorithm") {
      if (key == "variant") {
        config.algorithm.variant = value;
      } else if (key == "K") {
        config.algorithm.local_steps = parse_int(path, line_no, key, value);
      } else if (key == "eta_c") {
        config.algorithm.eta_c = parse_double(path, line_no, key, value);
      } else if (key == "eta_s") {
        config.algorithm.eta_s = parse_double(path, line_no, key, value);
      } else if (key == "T") {
        config.algorithm.rounds = parse_int(path, line_no, key, value);
      } else if (key == "correction_init") {
        config.algorithm.correction_init = value;
      } else if (key == "tracking_init") {
        config.algorithm.tracking_init = value;
      } else {
        fail(path, line_no, "unknown key '" + key + "' in section [algorithm]");
      }
    } else if (section == "noise") {
      if (key == "sigma") {
        config.noise.sigma = parse_double(path, line_no, key, value);
      } else if (key == "noise_seed") {
        config.noise.noise_seed = parse_u64(path, line_no, key, value);
      } else {
        fail(path, line_no, "unknown key '" + key + "' in section [noise]");
      }
    } else if (section == "runner") {
      if (key == "repetitions") {
        config.runner.repetitions = parse_int(path, line_no, key, value);
      } else if (key == "collect_local_metrics") {
        config.runner.collect_local_metrics =
            parse_bool(path, line_no, key, value);
      } else if (key == "output") {
        config.runner.output = value;
      } else if (key == "thresholds") {
        config.runner.thresholds.clear();
        for (const auto& item : split_list(value)) {
          config.runner.thresholds.push_back(
              parse_double(path, line_no, key, item));
        }
      } else if (key == "x0") {
        config.runner.x0 = parse_double(path, line_no, key, value);
      } else {
        fail(path, line_no, "unknown key '" + key + "' in section [runner]");
      }
    } else if (section == "sweep") {
      if (key == "variant") {
        axes.variants = split_list(value);
      } else if (key == "K") {
        for (const auto& item : split_list(value)) {
          axes.local_steps.push_back(parse_int(path, line_no, key, item));
        }
      } else if (key == "zeta_bar") {
        for (const auto& item : split_list(value)) {
          axes.zeta_bar.push_back(parse_double(path, line_no, key, item));
        }
      } else if (key == "sigma") {
        for (const auto& item : split_list(value)) {
          axes.sigma.push_back(parse_double(path, line_no, key, item));
        }
      } else if (key == "eta_c") {
        for (const auto& item : split_list(value)) {
          axes.eta_c.push_back(parse_double(path, line_no, key, item));
        }
      } else {
        fail(path, line_no, "unknown key '" + key + "' in section [sweep]");
      }
    }
  }

  if (c_was_set && config.problem.kind != "nonconvex") {
    throw config_error(path + ": key 'c' only applies to kind = nonconvex");
  }
  validate_run_config(config);

  if (!has_sweep_section) return config;

  SweepConfig sweep;
  sweep.base = config;
  sweep.axes = axes;
  for (const auto& variant : axes.variants) {
    parse_variant(variant);  // throws on unknown names
  }
  for (int k : axes.local_steps) {
    if (k < 1) throw config_error(path + ": sweep K values must be >= 1");
  }
  for (double z : axes.zeta_bar) {
    if (z < 0) throw config_error(path + ": sweep zeta_bar values must be >= 0");
  }
  for (double s : axes.sigma) {
    if (s < 0) throw config_error(path + ": sweep sigma values must be >= 0");
  }
  for (double e : axes.eta_c) {
    if (!(e > 0)) throw config_error(path + ": sweep eta_c values must be > 0");
  }
  const std::size_t grid =
      std::max<std::size_t>(axes.variants.size(), 1) *
      std::max<std::size_t>(axes.local_steps.size(), 1) *
      std::max<std::size_t>(axes.zeta_bar.size(), 1) *
      std::max<std::size_t>(axes.sigma.size(), 1) *
      std::max<std::size_t>(axes.eta_c.size(), 1);
  if (grid > sweep.grid_limit) {
    throw config_error(path + ": sweep grid has " + std::to_string(grid) +
                       " points, limit is " +
                       std::to_string(sweep.grid_limit));
  }
  return sweep;
}

}  // namespace gtsim
