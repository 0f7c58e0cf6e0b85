#ifndef GTSIM_CONFIG_HPP
#define GTSIM_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gtsim/algorithms.hpp"

namespace gtsim {

// Experiment configuration, read from a flat INI-style file with
// [section] headers and key = value lines. Unknown keys are errors.

struct ProblemConfig {
  std::string kind = "quadratic";  // quadratic | nonconvex
  int n = 10;
  int d = 10;
  double zeta_bar = 0.0;
  double c = 0.0;  // nonconvex only
  std::uint64_t data_seed = 1;
};

struct TopologyConfig {
  std::string name = "ring";  // ring | complete | disconnected | file:<path>
};

struct AlgorithmConfig {
  std::string variant;  // required
  int local_steps = 1;  // key K
  double eta_c = 1e-3;
  double eta_s = 1.0;
  int rounds = -1;  // key T, required
  std::optional<std::string> correction_init;  // exact | zero
  std::optional<std::string> tracking_init;    // mean | local
};

struct NoiseConfig {
  double sigma = 0.0;
  std::uint64_t noise_seed = 1;
};

struct RunnerConfig {
  int repetitions = 3;
  bool collect_local_metrics = false;
  std::string output = "out";
  std::vector<double> thresholds;  // grad_norm_sq targets for the summary
  double x0 = 0.0;                 // initial model, replicated over coordinates
};

struct RunConfig {
  ProblemConfig problem;
  TopologyConfig topology;
  AlgorithmConfig algorithm;
  NoiseConfig noise;
  RunnerConfig runner;
  std::string name = "run";  // output file stem
};

struct SweepAxes {
  std::vector<std::string> variants;
  std::vector<int> local_steps;  // key K
  std::vector<double> zeta_bar;
  std::vector<double> sigma;
  std::vector<double> eta_c;
};

struct SweepConfig {
  RunConfig base;
  SweepAxes axes;
  std::size_t grid_limit = 10000;
};

using ParsedConfig = std::variant<RunConfig, SweepConfig>;

/// Parses and fully validates a config file; defaults applied, unknown
/// keys rejected with their line number. A [sweep] section makes the
/// result a SweepConfig.
ParsedConfig parse_config(const std::string& path);

/// Validation shared by parse_config and programmatic construction.
void validate_run_config(const RunConfig& config);

// Translation helpers between config strings and engine enums.
HyperParams<double> to_hyperparams(const AlgorithmConfig& algorithm);
Problem<double> build_problem(const ProblemConfig& problem);
MixingMatrix<double> build_topology(const TopologyConfig& topology, int n);

}  // namespace gtsim

#endif  // GTSIM_CONFIG_HPP
