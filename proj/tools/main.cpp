#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "gtsim/config.hpp"
#include "gtsim/runner.hpp"
#include "gtsim/theory.hpp"

namespace {

int cmd_validate(const std::string& path) {
  const gtsim::ParsedConfig parsed = gtsim::parse_config(path);
  if (std::holds_alternative<gtsim::SweepConfig>(parsed)) {
    const auto& sweep = std::get<gtsim::SweepConfig>(parsed);
    std::cout << "ok: sweep config '" << sweep.base.name << "'\n";
  } else {
    const auto& config = std::get<gtsim::RunConfig>(parsed);
    std::cout << "ok: run config '" << config.name << "' (variant "
              << config.algorithm.variant << ", n " << config.problem.n
              << ", K " << config.algorithm.local_steps << ", T "
              << config.algorithm.rounds << ")\n";
  }
  return 0;
}

int cmd_run(const std::string& path) {
  const gtsim::ParsedConfig parsed = gtsim::parse_config(path);
  if (!std::holds_alternative<gtsim::RunConfig>(parsed)) {
    throw gtsim::config_error(path +
                              ": has a [sweep] section, use the sweep command");
  }
  const auto result = gtsim::execute(std::get<gtsim::RunConfig>(parsed));
  std::cout << gtsim::summary_csv({result.summary});
  for (const auto& file : result.files_written) {
    std::cout << "wrote " << file << "\n";
  }
  if (result.summary.status != "ok") {
    std::cerr << "run " << result.summary.name << " " << result.summary.status
              << "\n";
    return 2;
  }
  return 0;
}

int cmd_sweep(const std::string& path) {
  const gtsim::ParsedConfig parsed = gtsim::parse_config(path);
  if (!std::holds_alternative<gtsim::SweepConfig>(parsed)) {
    throw gtsim::config_error(path + ": no [sweep] section, use run instead");
  }
  const auto& sweep = std::get<gtsim::SweepConfig>(parsed);
  const auto summaries = gtsim::execute_sweep(sweep);
  std::cout << "executed " << summaries.size() << " grid points\n"
            << "wrote " << sweep.base.runner.output << "/summary.csv\n";
  if (summaries.size() >= 2) {
    std::cout << "wrote " << sweep.base.runner.output << "/compare.csv\n";
  }
  return 0;
}

int cmd_rate_bound(double sigma, double n, double k, double p, double eps,
                   double smoothness, double f0, double zeta_bar) {
  gtsim::RateInputs<double> in;
  in.sigma = sigma;
  in.nodes = n;
  in.local_steps = k;
  in.contraction = p;
  in.accuracy = eps;
  in.smoothness = smoothness;
  in.initial_gap = f0;
  std::cout << "sigma,n,K,p,eps,L,F0,zeta_bar,kgt,gt,periodical_gt,"
               "periodical_gt_fullgrad,dsgd\n";
  std::cout << gtsim::format_shortest(sigma) << "," << gtsim::format_shortest(n)
            << "," << gtsim::format_shortest(k) << ","
            << gtsim::format_shortest(p) << "," << gtsim::format_shortest(eps)
            << "," << gtsim::format_shortest(smoothness) << ","
            << gtsim::format_shortest(f0) << ","
            << gtsim::format_shortest(zeta_bar) << ","
            << gtsim::format_float(gtsim::rate_kgt(in).total()) << ","
            << gtsim::format_float(gtsim::rate_gt(in).total()) << ","
            << gtsim::format_float(gtsim::rate_periodical_gt(in, false).total())
            << ","
            << gtsim::format_float(gtsim::rate_periodical_gt(in, true).total())
            << ","
            << gtsim::format_float(gtsim::rate_dsgd(in, zeta_bar).total())
            << "\n";
  return 0;
}

int cmd_partition(const std::string& labels_path, int n,
                  const std::string& mode, std::uint64_t seed,
                  const std::string& output) {
  std::ifstream in(labels_path);
  if (!in) {
    throw gtsim::config_error("cannot open label file: " + labels_path);
  }
  std::vector<int> labels;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    try {
      std::size_t used = 0;
      labels.push_back(std::stoi(line, &used));
    } catch (const std::exception&) {
      throw gtsim::config_error(labels_path + ":" + std::to_string(line_no) +
                                ": expected an integer label, got '" + line +
                                "'");
    }
  }
  const gtsim::PartitionMode partition_mode =
      mode == "random" ? gtsim::PartitionMode::random
      : mode == "sorted"
          ? gtsim::PartitionMode::sorted
          : throw gtsim::config_error("mode must be random or sorted");
  const auto parts = gtsim::partition_labels(
      labels, static_cast<std::size_t>(n), partition_mode, seed);

  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!output.empty()) {
    file.open(output, std::ios::binary);
    if (!file) throw gtsim::config_error("cannot write: " + output);
    out = &file;
  }
  *out << "node,index\n";
  for (std::size_t node = 0; node < parts.size(); ++node) {
    for (std::size_t index : parts[node]) {
      *out << node << "," << index << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decentralized gradient-tracking simulation toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Execute a single-run config");
  run->add_option("config", config_path, "config file")->required();

  auto* sweep = app.add_subcommand("sweep", "Execute a sweep config");
  sweep->add_option("config", config_path, "config file")->required();

  auto* validate = app.add_subcommand("validate", "Parse and check a config");
  validate->add_option("config", config_path, "config file")->required();

  double sigma = 1.0, nodes = 1.0, local_steps = 1.0, p = 1.0, eps = 1e-2;
  double smoothness = 1.0, f0 = 1.0, zeta_bar = 0.0;
  auto* rate = app.add_subcommand(
      "rate-bound", "Print predicted communication rounds for all variants");
  rate->add_option("--sigma", sigma, "noise level")->required();
  rate->add_option("--n", nodes, "number of nodes")->required();
  rate->add_option("--K", local_steps, "local steps")->required();
  rate->add_option("--p", p, "topology contraction parameter")->required();
  rate->add_option("--eps", eps, "target accuracy")->required();
  rate->add_option("--L", smoothness, "smoothness constant")->required();
  rate->add_option("--F0", f0, "initial suboptimality")->required();
  rate->add_option("--zeta-bar", zeta_bar, "heterogeneity (dsgd only)");

  std::string labels_path, mode = "random", output;
  int part_nodes = 1;
  std::uint64_t seed = 1;
  auto* partition = app.add_subcommand(
      "partition", "Split a label CSV into per-node index lists");
  partition->add_option("labels", labels_path, "label file, one class id per line")
      ->required();
  partition->add_option("--n", part_nodes, "number of nodes")->required();
  partition->add_option("--mode", mode, "random | sorted");
  partition->add_option("--seed", seed, "shuffle seed");
  partition->add_option("--output", output, "output file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path);
    if (sweep->parsed()) return cmd_sweep(config_path);
    if (validate->parsed()) return cmd_validate(config_path);
    if (rate->parsed()) {
      return cmd_rate_bound(sigma, nodes, local_steps, p, eps, smoothness, f0,
                            zeta_bar);
    }
    if (partition->parsed()) {
      return cmd_partition(labels_path, part_nodes, mode, seed, output);
    }
  } catch (const gtsim::divergence_error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
