#include "gtsim/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace gtsim {

namespace {

constexpr const char* kTraceHeader =
    "round,comm_rounds,grad_evals,grad_norm_sq,f_gap,consensus,client_drift,"
    "gamma,potential";

std::string format_optional(const std::optional<double>& value) {
  return value ? format_float(*value) : "nan";
}

std::string sanitize_token(std::string token) {
  for (char& ch : token) {
    if (ch == '+' || ch == '.') continue;
    if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '-' &&
        ch != '_') {
      ch = '_';
    }
  }
  return token;
}

std::string grid_point_name(const RunConfig& config) {
  std::ostringstream os;
  os << config.algorithm.variant << "_K" << config.algorithm.local_steps
     << "_zeta" << sanitize_token(format_shortest(config.problem.zeta_bar))
     << "_sigma" << sanitize_token(format_shortest(config.noise.sigma))
     << "_etac" << sanitize_token(format_shortest(config.algorithm.eta_c));
  return os.str();
}

Trace mean_of_traces(const std::vector<Trace>& traces) {
  const Trace& first = traces.front();
  Trace mean = first;
  for (std::size_t rep = 1; rep < traces.size(); ++rep) {
    const Trace& trace = traces[rep];
    if (trace.size() != first.size()) {
      throw std::logic_error("repetition traces have different lengths");
    }
    for (std::size_t t = 0; t < trace.size(); ++t) {
      mean[t].grad_norm_sq += trace[t].grad_norm_sq;
      mean[t].consensus += trace[t].consensus;
      mean[t].client_drift += trace[t].client_drift;
      mean[t].gamma += trace[t].gamma;
      if (mean[t].f_gap) *mean[t].f_gap += trace[t].f_gap.value();
      if (mean[t].potential) *mean[t].potential += trace[t].potential.value();
      for (std::size_t k = 0; k < mean[t].drift_steps.size(); ++k) {
        mean[t].drift_steps[k] += trace[t].drift_steps[k];
      }
    }
  }
  const double scale = 1.0 / static_cast<double>(traces.size());
  for (auto& rec : mean) {
    rec.grad_norm_sq *= scale;
    rec.consensus *= scale;
    rec.client_drift *= scale;
    rec.gamma *= scale;
    if (rec.f_gap) *rec.f_gap *= scale;
    if (rec.potential) *rec.potential *= scale;
    for (double& e : rec.drift_steps) e *= scale;
  }
  return mean;
}

void write_local_drift_csv(const std::string& path, const Trace& trace) {
  std::ofstream out(path, std::ios::binary);
  out << "round,step,drift\n";
  for (const auto& rec : trace) {
    for (std::size_t k = 0; k < rec.drift_steps.size(); ++k) {
      out << rec.round << "," << k << "," << format_float(rec.drift_steps[k])
          << "\n";
    }
  }
}

}  // namespace

std::string format_float(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

std::string format_shortest(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%g", value);
  return buffer;
}

void write_trace_csv(const std::string& path, const Trace& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write trace file: " + path);
  out << kTraceHeader << "\n";
  for (const auto& rec : trace) {
    out << rec.round << "," << rec.comm_rounds << "," << rec.grad_evals << ","
        << format_float(rec.grad_norm_sq) << "," << format_optional(rec.f_gap)
        << "," << format_float(rec.consensus) << ","
        << format_float(rec.client_drift) << "," << format_float(rec.gamma)
        << "," << format_optional(rec.potential) << "\n";
  }
}

std::optional<int> rounds_to_threshold(const Trace& trace,
                                       const std::string& metric,
                                       double threshold) {
  const auto pick = [&](const MetricsRecord<double>& rec)
      -> std::optional<double> {
    if (metric == "grad_norm_sq") return rec.grad_norm_sq;
    if (metric == "consensus") return rec.consensus;
    if (metric == "client_drift") return rec.client_drift;
    if (metric == "gamma") return rec.gamma;
    if (metric == "f_gap") return rec.f_gap;
    if (metric == "potential") return rec.potential;
    throw std::invalid_argument("rounds_to_threshold: unknown metric '" +
                                metric + "'");
  };
  for (const auto& rec : trace) {
    const auto value = pick(rec);
    if (value && *value <= threshold) return rec.round;
  }
  return std::nullopt;
}

ExecuteResult execute(const RunConfig& config) {
  validate_run_config(config);
  const Problem<double> problem = build_problem(config.problem);
  const MixingMatrix<double> mix =
      build_topology(config.topology, config.problem.n);
  const HyperParams<double> hp = to_hyperparams(config.algorithm);

  RunOptions<double> opts;
  opts.collect_step_drift = config.runner.collect_local_metrics;
  if (problem.kind == ProblemKind::quadratic) {
    opts.f_star = quadratic_optimum(problem).second;
  }
  const Vector x0 = Vector::Constant(config.problem.d, config.runner.x0);

  ExecuteResult result;
  RunSummary& summary = result.summary;
  summary.name = config.name;
  summary.variant = config.algorithm.variant;
  summary.local_steps = config.algorithm.local_steps;
  summary.zeta_bar = config.problem.zeta_bar;
  summary.sigma = config.noise.sigma;
  summary.eta_c = config.algorithm.eta_c;
  summary.eta_s = config.algorithm.eta_s;
  summary.rounds = config.algorithm.rounds;
  summary.repetitions = config.runner.repetitions;
  summary.thresholds = config.runner.thresholds;
  summary.problem_kind = config.problem.kind;
  summary.problem_n = config.problem.n;
  summary.problem_d = config.problem.d;
  summary.problem_c = config.problem.c;
  summary.data_seed = config.problem.data_seed;

  std::filesystem::create_directories(config.runner.output);
  const auto out_path = [&](const std::string& file) {
    return (std::filesystem::path(config.runner.output) / file).string();
  };

  std::vector<Trace> traces;
  std::optional<int> diverged_round;
  for (int rep = 0; rep < config.runner.repetitions; ++rep) {
    NoiseModel<double> noise{config.noise.sigma,
                             config.noise.noise_seed +
                                 static_cast<std::uint64_t>(rep)};
    try {
      Trace trace = run(problem, noise, hp, mix, x0, opts);
      const std::string path =
          out_path(config.name + "_rep" + std::to_string(rep) + ".csv");
      write_trace_csv(path, trace);
      result.files_written.push_back(path);
      if (config.runner.collect_local_metrics) {
        const std::string local_path = out_path(
            config.name + "_rep" + std::to_string(rep) + "_local.csv");
        write_local_drift_csv(local_path, trace);
        result.files_written.push_back(local_path);
      }
      traces.push_back(std::move(trace));
    } catch (const divergence_error& err) {
      if (!diverged_round || err.round() < *diverged_round) {
        diverged_round = err.round();
      }
    }
  }

  if (diverged_round) {
    summary.status = "diverged@" + std::to_string(*diverged_round);
  }
  if (!traces.empty() && !diverged_round) {
    result.mean_trace = mean_of_traces(traces);
    const std::string mean_path = out_path(config.name + "_mean.csv");
    write_trace_csv(mean_path, result.mean_trace);
    result.files_written.push_back(mean_path);

    const auto& mean = result.mean_trace;
    summary.final_grad_norm_sq = mean.back().grad_norm_sq;
    summary.best_grad_norm_sq = mean.front().grad_norm_sq;
    summary.final_f_gap = mean.back().f_gap;
    summary.best_f_gap = mean.front().f_gap;
    for (const auto& rec : mean) {
      summary.best_grad_norm_sq =
          std::min(summary.best_grad_norm_sq, rec.grad_norm_sq);
      if (rec.f_gap && summary.best_f_gap) {
        summary.best_f_gap = std::min(*summary.best_f_gap, *rec.f_gap);
      }
    }
    for (double threshold : summary.thresholds) {
      summary.rounds_to_thresholds.push_back(
          rounds_to_threshold(mean, "grad_norm_sq", threshold));
    }
  } else {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    summary.final_grad_norm_sq = nan;
    summary.best_grad_norm_sq = nan;
    for ([[maybe_unused]] double threshold : summary.thresholds) {
      summary.rounds_to_thresholds.push_back(std::nullopt);
    }
  }
  {
    const std::string summary_path = out_path(config.name + "_summary.csv");
    std::ofstream out(summary_path, std::ios::binary);
    out << summary_csv({summary});
    result.files_written.push_back(summary_path);
  }
  return result;
}

std::string summary_csv(const std::vector<RunSummary>& summaries) {
  std::ostringstream out;
  out << "name,variant,K,zeta_bar,sigma,eta_c,eta_s,T,repetitions,status,"
         "final_grad_norm_sq,best_grad_norm_sq,final_f_gap,best_f_gap";
  const std::vector<double>* thresholds =
      summaries.empty() ? nullptr : &summaries.front().thresholds;
  bool shared_thresholds = thresholds != nullptr;
  for (const auto& s : summaries) {
    if (s.thresholds != *thresholds) shared_thresholds = false;
  }
  if (shared_thresholds) {
    for (double threshold : *thresholds) {
      out << ",rounds_to_" << format_shortest(threshold);
    }
  }
  out << "\n";
  for (const auto& s : summaries) {
    out << s.name << "," << s.variant << "," << s.local_steps << ","
        << format_shortest(s.zeta_bar) << "," << format_shortest(s.sigma)
        << "," << format_shortest(s.eta_c) << "," << format_shortest(s.eta_s)
        << "," << s.rounds << "," << s.repetitions << "," << s.status << ","
        << format_float(s.final_grad_norm_sq) << ","
        << format_float(s.best_grad_norm_sq) << ","
        << format_optional(s.final_f_gap) << ","
        << format_optional(s.best_f_gap);
    if (shared_thresholds) {
      for (const auto& hit : s.rounds_to_thresholds) {
        out << "," << (hit ? std::to_string(*hit) : std::string("none"));
      }
    }
    out << "\n";
  }
  return out.str();
}

std::string compare_report(const std::vector<RunSummary>& summaries) {
  if (summaries.size() < 2) {
    throw std::invalid_argument("compare_report: need at least 2 summaries");
  }
  const RunSummary& first = summaries.front();
  for (const auto& s : summaries) {
    if (s.problem_kind != first.problem_kind || s.problem_n != first.problem_n ||
        s.problem_d != first.problem_d || s.problem_c != first.problem_c ||
        s.data_seed != first.data_seed) {
      throw std::invalid_argument(
          "compare_report: summaries do not share a problem block");
    }
  }

  // Robustness ratio per (variant, K): final f_gap at the largest zeta_bar
  // over final f_gap at the smallest.
  std::map<std::pair<std::string, int>, double> ratio;
  std::map<std::pair<std::string, int>, std::map<double, double>> gaps;
  for (const auto& s : summaries) {
    if (s.final_f_gap) {
      gaps[{s.variant, s.local_steps}][s.zeta_bar] = *s.final_f_gap;
    }
  }
  for (const auto& [key, by_zeta] : gaps) {
    const double low = by_zeta.begin()->second;
    const double high = by_zeta.rbegin()->second;
    ratio[key] = (low == high) ? 1.0
                 : (low != 0.0 ? high / low
                               : std::numeric_limits<double>::infinity());
  }

  std::ostringstream out;
  out << "variant,K,zeta_bar,sigma,eta_c,status,final_grad_norm_sq,"
         "final_f_gap,robustness_ratio\n";
  for (const auto& s : summaries) {
    const auto it = ratio.find({s.variant, s.local_steps});
    out << s.variant << "," << s.local_steps << ","
        << format_shortest(s.zeta_bar) << "," << format_shortest(s.sigma)
        << "," << format_shortest(s.eta_c) << "," << s.status << ","
        << format_float(s.final_grad_norm_sq) << ","
        << format_optional(s.final_f_gap) << ","
        << (it != ratio.end() ? format_float(it->second) : "nan") << "\n";
  }
  return out.str();
}

std::vector<RunSummary> execute_sweep(const SweepConfig& sweep) {
  validate_run_config(sweep.base);
  const auto& axes = sweep.axes;
  const std::vector<std::string> variants =
      axes.variants.empty() ? std::vector<std::string>{
                                  sweep.base.algorithm.variant}
                            : axes.variants;
  const std::vector<int> steps =
      axes.local_steps.empty()
          ? std::vector<int>{sweep.base.algorithm.local_steps}
          : axes.local_steps;
  const std::vector<double> zetas =
      axes.zeta_bar.empty() ? std::vector<double>{sweep.base.problem.zeta_bar}
                            : axes.zeta_bar;
  const std::vector<double> sigmas =
      axes.sigma.empty() ? std::vector<double>{sweep.base.noise.sigma}
                         : axes.sigma;
  const std::vector<double> etas =
      axes.eta_c.empty() ? std::vector<double>{sweep.base.algorithm.eta_c}
                         : axes.eta_c;

  std::vector<RunSummary> summaries;
  for (const auto& variant : variants) {
    for (int k : steps) {
      for (double zeta : zetas) {
        for (double sigma : sigmas) {
          for (double eta : etas) {
            RunConfig point = sweep.base;
            point.algorithm.variant = variant;
            point.algorithm.local_steps = k;
            point.problem.zeta_bar = zeta;
            point.noise.sigma = sigma;
            point.algorithm.eta_c = eta;
            // Init modes stay valid across the variant axis only if unset.
            if (!axes.variants.empty()) {
              const Variant v = parse_variant(variant);
              const bool has_corr = v == Variant::kgt ||
                                    v == Variant::periodical_gt_fullgrad;
              if (!has_corr) point.algorithm.correction_init.reset();
              const bool has_track = v == Variant::gt ||
                                     v == Variant::periodical_gt ||
                                     v == Variant::large_batch_gt;
              if (!has_track) point.algorithm.tracking_init.reset();
            }
            point.name = grid_point_name(point);
            summaries.push_back(execute(point).summary);
          }
        }
      }
    }
  }

  std::filesystem::create_directories(sweep.base.runner.output);
  const auto path = [&](const std::string& file) {
    return (std::filesystem::path(sweep.base.runner.output) / file).string();
  };
  {
    std::ofstream out(path("summary.csv"), std::ios::binary);
    out << summary_csv(summaries);
  }
  if (summaries.size() >= 2 && zetas.size() >= 1) {
    std::ofstream out(path("compare.csv"), std::ios::binary);
    out << compare_report(summaries);
  }
  return summaries;
}

}  // namespace gtsim
