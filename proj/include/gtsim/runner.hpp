#ifndef GTSIM_RUNNER_HPP
#define GTSIM_RUNNER_HPP

#include <optional>
#include <string>
#include <vector>

#include "gtsim/config.hpp"
#include "gtsim/metrics.hpp"

namespace gtsim {

using Trace = std::vector<MetricsRecord<double>>;

/// One executed grid point: identifying keys, final/best metrics of the
/// repetition-mean trace, and rounds-to-threshold for each configured
/// threshold (empty optional when never reached).
struct RunSummary {
  std::string name;
  std::string variant;
  int local_steps = 0;
  double zeta_bar = 0.0;
  double sigma = 0.0;
  double eta_c = 0.0;
  double eta_s = 0.0;
  int rounds = 0;
  int repetitions = 0;
  std::string status = "ok";  // ok | diverged@<round>
  double final_grad_norm_sq = 0.0;
  double best_grad_norm_sq = 0.0;
  std::optional<double> final_f_gap;
  std::optional<double> best_f_gap;
  std::vector<double> thresholds;
  std::vector<std::optional<int>> rounds_to_thresholds;
  // problem block echo, for compare_report consistency checks
  std::string problem_kind;
  int problem_n = 0;
  int problem_d = 0;
  double problem_c = 0.0;
  std::uint64_t data_seed = 0;
};

struct ExecuteResult {
  RunSummary summary;
  Trace mean_trace;
  std::vector<std::string> files_written;
};

/// Runs every repetition (noise_seed offset by the repetition index, data
/// seed shared), writes one trace CSV per repetition plus the pointwise
/// mean trace, and returns the summary. Divergence is reported in the
/// summary status, not thrown.
ExecuteResult execute(const RunConfig& config);

/// Cartesian product of the sweep axes over the base config; writes all
/// traces, summary.csv and compare.csv under the configured output
/// directory.
std::vector<RunSummary> execute_sweep(const SweepConfig& config);

/// First round whose metric value is <= threshold on the given trace.
/// Metric is one of: grad_norm_sq, f_gap, consensus, client_drift, gamma,
/// potential.
std::optional<int> rounds_to_threshold(const Trace& trace,
                                       const std::string& metric,
                                       double threshold);

/// Comparison table keyed by (variant, K, zeta_bar) with final metrics and
/// the per-(variant, K) heterogeneity-robustness ratio: final f_gap at the
/// largest zeta_bar over final f_gap at the smallest. All summaries must
/// share the problem block apart from zeta_bar.
std::string compare_report(const std::vector<RunSummary>& summaries);

// CSV helpers (fixed column order, floats with 17 significant digits).
std::string format_float(double value);
std::string format_shortest(double value);  // %g, for keys and file names
void write_trace_csv(const std::string& path, const Trace& trace);
std::string summary_csv(const std::vector<RunSummary>& summaries);

}  // namespace gtsim

#endif  // GTSIM_RUNNER_HPP
