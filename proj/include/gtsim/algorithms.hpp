#ifndef GTSIM_ALGORITHMS_HPP
#define GTSIM_ALGORITHMS_HPP

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gtsim/metrics.hpp"
#include "gtsim/problems.hpp"
#include "gtsim/topology.hpp"
#include "gtsim/types.hpp"

namespace gtsim {

enum class Variant {
  kgt,
  gt,
  periodical_gt,
  periodical_gt_fullgrad,
  large_batch_gt,
  dsgd,
};

enum class CorrectionInit { exact, zero };
enum class TrackingInit { mean, local };

inline const char* variant_name(Variant v) {
  switch (v) {
    case Variant::kgt: return "kgt";
    case Variant::gt: return "gt";
    case Variant::periodical_gt: return "periodical_gt";
    case Variant::periodical_gt_fullgrad: return "periodical_gt_fullgrad";
    case Variant::large_batch_gt: return "large_batch_gt";
    case Variant::dsgd: return "dsgd";
  }
  return "?";
}

inline Variant parse_variant(const std::string& name) {
  if (name == "kgt") return Variant::kgt;
  if (name == "gt") return Variant::gt;
  if (name == "periodical_gt") return Variant::periodical_gt;
  if (name == "periodical_gt_fullgrad") return Variant::periodical_gt_fullgrad;
  if (name == "large_batch_gt") return Variant::large_batch_gt;
  if (name == "dsgd") return Variant::dsgd;
  throw config_error("unknown algorithm variant: " + name);
}

/// Hyperparameters of one run. `local_steps` is K: the number of local
/// updates per communication round, or the batch multiplier for
/// large_batch_gt. The init modes apply only to the matching variants:
/// correction_init to kgt / periodical_gt_fullgrad (default zero),
/// tracking_init to gt / periodical_gt / large_batch_gt (default mean).
template <typename Scalar>
struct HyperParams {
  Variant variant = Variant::kgt;
  int local_steps = 1;  // K
  Scalar eta_c = Scalar(1e-3);
  Scalar eta_s = Scalar(1);
  int rounds = 1;  // T
  std::optional<CorrectionInit> correction_init;
  std::optional<TrackingInit> tracking_init;
};

template <typename Scalar>
void validate_hyperparams(const HyperParams<Scalar>& hp) {
  if (hp.local_steps < 1) {
    throw std::invalid_argument("hyperparams: K must be >= 1");
  }
  if (!(hp.eta_c > Scalar(0)) || !(hp.eta_s > Scalar(0))) {
    throw std::invalid_argument("hyperparams: stepsizes must be > 0");
  }
  if (hp.rounds < 0) {
    throw std::invalid_argument("hyperparams: T must be >= 0");
  }
}

enum class RoundPhase { start, local_done };

/// Per-node optimizer state, one column per node. `correction` is the
/// drift correction C of the corrected-SGD variants; `tracking` and
/// `last_gradient` belong to the gradient-tracking recursions.
/// `round_start_model` keeps X^{(t)} while a local phase is in flight.
/// A state is exclusively owned by one run.
template <typename Scalar>
struct AlgorithmState {
  DenseMatrix<Scalar> model;
  DenseMatrix<Scalar> correction;
  DenseMatrix<Scalar> tracking;
  DenseMatrix<Scalar> last_gradient;
  DenseMatrix<Scalar> round_start_model;
  int round = 0;
  long grad_evals = 0;  // stochastic draws per node, cumulative
  RoundPhase phase = RoundPhase::start;
};

/// Everything a diagnostics hook may want from one executed round.
/// snapshots[k] is the local iterate X^{(t)+k} (k = 0..K where recorded);
/// gradients[k] the realized stochastic gradient used at step k.
template <typename Scalar>
struct RoundLog {
  std::vector<DenseMatrix<Scalar>> snapshots;
  std::vector<DenseMatrix<Scalar>> gradients;
  std::vector<DenseMatrix<Scalar>> trackings;  // per-step z (periodical_gt)
  DenseMatrix<Scalar> tracking;            // Z exchanged at communication
  DenseMatrix<Scalar> correction_before;   // C^{(t)} (implied for tracking variants)
  DenseMatrix<Scalar> correction_after;    // C^{(t+1)}
  DenseMatrix<Scalar> comm_gradient;       // gradient paired with the fresh model,
                                           // or the full-batch tracking gradient
  DenseMatrix<Scalar> mean_local_gradient; // within-round mean gradient
};

template <typename Scalar>
struct DriftStats {
  Scalar total = Scalar(0);
  std::vector<Scalar> per_step;
};

namespace detail {

template <typename Scalar>
Scalar mean_sq_deviation(const DenseMatrix<Scalar>& m,
                         const DenseVector<Scalar>& center) {
  return (m.colwise() - center).squaredNorm() /
         static_cast<Scalar>(m.cols());
}

template <typename Scalar>
DenseMatrix<Scalar> replicate_columns(const DenseVector<Scalar>& v,
                                      Eigen::Index n) {
  return v.replicate(1, n);
}

inline void require_variant(Variant got, Variant want, const char* op) {
  if (got != want) {
    throw config_error(std::string(op) + ": wrong variant " +
                       variant_name(got));
  }
}

}  // namespace detail

/// Correction each variant effectively applies on top of the raw
/// stochastic gradient: C itself for the corrected-SGD variants,
/// Z - (last gradient) for the tracking recursions, zero for dsgd.
template <typename Scalar>
DenseMatrix<Scalar> implied_correction(const AlgorithmState<Scalar>& state,
                                       const HyperParams<Scalar>& hp) {
  switch (hp.variant) {
    case Variant::kgt:
    case Variant::periodical_gt_fullgrad:
      return state.correction;
    case Variant::gt:
    case Variant::periodical_gt:
    case Variant::large_batch_gt:
      return state.tracking - state.last_gradient;
    case Variant::dsgd:
      return DenseMatrix<Scalar>::Zero(state.model.rows(),
                                       state.model.cols());
  }
  return {};
}

/// All nodes start from the same x0. Draws consumed here use stream key
/// (round 0, step 0..): the correction / tracking initialisation sample
/// coincides with the first local draw at X^(0), which is what makes the
/// K = 1 trajectory equivalences with plain gradient tracking exact.
template <typename Scalar, typename Derived>
AlgorithmState<Scalar> init_state(const Problem<Scalar>& prob,
                                  const NoiseModel<Scalar>& noise,
                                  const HyperParams<Scalar>& hp,
                                  const Eigen::MatrixBase<Derived>& x0_expr) {
  validate_hyperparams(hp);
  const DenseVector<Scalar> x0 = x0_expr;
  if (x0.size() != prob.d) {
    throw std::invalid_argument("init_state: x0 must have dimension d");
  }
  const bool has_correction = hp.variant == Variant::kgt ||
                              hp.variant == Variant::periodical_gt_fullgrad;
  const bool has_tracking = hp.variant == Variant::gt ||
                            hp.variant == Variant::periodical_gt ||
                            hp.variant == Variant::large_batch_gt;
  if (hp.correction_init && !has_correction) {
    throw config_error(std::string("correction_init does not apply to ") +
                       variant_name(hp.variant));
  }
  if (hp.tracking_init && !has_tracking) {
    throw config_error(std::string("tracking_init does not apply to ") +
                       variant_name(hp.variant));
  }

  AlgorithmState<Scalar> state;
  state.model = detail::replicate_columns(x0, prob.n);

  if (has_correction) {
    const auto mode = hp.correction_init.value_or(CorrectionInit::zero);
    if (mode == CorrectionInit::exact) {
      const DenseMatrix<Scalar> g0 =
          stochastic_gradient(prob, noise, state.model, 0, 0);
      state.grad_evals += 1;
      const DenseVector<Scalar> mean = g0.rowwise().mean();
      state.correction = detail::replicate_columns(mean, prob.n) - g0;
    } else {
      state.correction = DenseMatrix<Scalar>::Zero(prob.d, prob.n);
    }
  }
  if (has_tracking) {
    DenseMatrix<Scalar> g0;
    if (hp.variant == Variant::large_batch_gt) {
      g0 = DenseMatrix<Scalar>::Zero(prob.d, prob.n);
      for (int s = 0; s < hp.local_steps; ++s) {
        g0 += stochastic_gradient(prob, noise, state.model, 0, s);
      }
      g0 /= static_cast<Scalar>(hp.local_steps);
      state.grad_evals += hp.local_steps;
    } else {
      g0 = stochastic_gradient(prob, noise, state.model, 0, 0);
      state.grad_evals += 1;
    }
    const auto mode = hp.tracking_init.value_or(TrackingInit::mean);
    state.tracking =
        mode == TrackingInit::mean
            ? detail::replicate_columns<Scalar>(g0.rowwise().mean(), prob.n)
            : g0;
    state.last_gradient = std::move(g0);
  }
  return state;
}

/// K corrected local steps x <- x - eta_c (grad + c). Leaves the state
/// with phase = local_done; `model` then holds X^{(t)+K}.
template <typename Scalar>
DriftStats<Scalar> kgt_local_phase(AlgorithmState<Scalar>& state,
                                   const Problem<Scalar>& prob,
                                   const NoiseModel<Scalar>& noise,
                                   const HyperParams<Scalar>& hp,
                                   bool collect_steps = false,
                                   RoundLog<Scalar>* log = nullptr) {
  detail::require_variant(hp.variant, Variant::kgt, "kgt_local_phase");
  if (state.phase != RoundPhase::start) {
    throw state_error("kgt_local_phase: round already in local phase");
  }
  state.round_start_model = state.model;
  const DenseVector<Scalar> start_mean = state.model.rowwise().mean();
  DriftStats<Scalar> drift;
  if (log) log->correction_before = state.correction;
  DenseMatrix<Scalar> grad_sum =
      DenseMatrix<Scalar>::Zero(prob.d, prob.n);
  for (int k = 0; k < hp.local_steps; ++k) {
    const Scalar e = detail::mean_sq_deviation(state.model, start_mean);
    drift.total += e;
    if (collect_steps) drift.per_step.push_back(e);
    if (log) log->snapshots.push_back(state.model);
    const DenseMatrix<Scalar> grad =
        stochastic_gradient(prob, noise, state.model, state.round, k);
    state.grad_evals += 1;
    if (log) log->gradients.push_back(grad);
    grad_sum += grad;
    state.model -= hp.eta_c * (grad + state.correction);
  }
  if (log) {
    log->snapshots.push_back(state.model);
    log->mean_local_gradient = grad_sum / static_cast<Scalar>(hp.local_steps);
  }
  state.phase = RoundPhase::local_done;
  return drift;
}

/// Normalized local displacement Z = (X^{(t)} - X^{(t)+K}) / (K eta_c);
/// equals the within-round mean stochastic gradient plus the correction.
/// Only valid between the local phase and communication.
template <typename Scalar>
DenseMatrix<Scalar> tracking_variable(const AlgorithmState<Scalar>& state,
                                      const HyperParams<Scalar>& hp) {
  detail::require_variant(hp.variant, Variant::kgt, "tracking_variable");
  if (state.phase != RoundPhase::local_done) {
    throw state_error(
        "tracking_variable: defined after the local phase, before "
        "communication");
  }
  return (state.round_start_model - state.model) /
         (static_cast<Scalar>(hp.local_steps) * hp.eta_c);
}

/// Gossip exchange of {x, c}:
///   X <- (X^{(t)} - eta_s (X^{(t)} - X^{(t)+K})) W,  C <- C + Z (W - I).
template <typename Scalar>
void kgt_comm_phase(AlgorithmState<Scalar>& state,
                    const HyperParams<Scalar>& hp,
                    const MixingMatrix<Scalar>& mix,
                    RoundLog<Scalar>* log = nullptr) {
  detail::require_variant(hp.variant, Variant::kgt, "kgt_comm_phase");
  if (state.phase != RoundPhase::local_done) {
    throw state_error("kgt_comm_phase: local phase has not run");
  }
  const DenseMatrix<Scalar> z = tracking_variable(state, hp);
  if (log) {
    log->tracking = z;
    log->correction_before = state.correction;
  }
  state.model =
      (state.round_start_model -
       hp.eta_s * (state.round_start_model - state.model)) *
      mix.weights;
  state.correction += z * mix.weights - z;
  if (log) log->correction_after = state.correction;
  state.phase = RoundPhase::start;
  state.round += 1;
}

template <typename Scalar>
DriftStats<Scalar> round_kgt(AlgorithmState<Scalar>& state,
                             const Problem<Scalar>& prob,
                             const NoiseModel<Scalar>& noise,
                             const HyperParams<Scalar>& hp,
                             const MixingMatrix<Scalar>& mix,
                             bool collect_steps = false,
                             RoundLog<Scalar>* log = nullptr) {
  DriftStats<Scalar> drift =
      kgt_local_phase(state, prob, noise, hp, collect_steps, log);
  kgt_comm_phase(state, hp, mix, log);
  return drift;
}

/// Plain gradient tracking with effective stepsize eta = eta_s * eta_c:
///   X <- (X - eta Z) W,  Z <- Z W + G_new - G_old.
/// The fresh gradient is drawn at stream key (round t+1, step 0).
template <typename Scalar>
DriftStats<Scalar> round_gt(AlgorithmState<Scalar>& state,
                            const Problem<Scalar>& prob,
                            const NoiseModel<Scalar>& noise,
                            const HyperParams<Scalar>& hp,
                            const MixingMatrix<Scalar>& mix,
                            bool collect_steps = false,
                            RoundLog<Scalar>* log = nullptr) {
  detail::require_variant(hp.variant, Variant::gt, "round_gt");
  DriftStats<Scalar> drift;
  drift.total = consensus_distance(state.model);
  if (collect_steps) drift.per_step.push_back(drift.total);
  if (log) {
    log->snapshots.push_back(state.model);
    log->gradients.push_back(state.last_gradient);
    log->tracking = state.tracking;
    log->correction_before = state.tracking - state.last_gradient;
  }
  const Scalar eta = hp.eta_c * hp.eta_s;
  state.model = (state.model - eta * state.tracking) * mix.weights;
  const DenseMatrix<Scalar> fresh =
      stochastic_gradient(prob, noise, state.model, state.round + 1, 0);
  state.grad_evals += 1;
  state.tracking =
      state.tracking * mix.weights + fresh - state.last_gradient;
  state.last_gradient = fresh;
  if (log) {
    log->comm_gradient = fresh;
    log->correction_after = state.tracking - state.last_gradient;
  }
  state.round += 1;
  return drift;
}

/// Tracking with skipped communication: K - 1 tracked local steps, one
/// plain step, then a gossip exchange of x and z. The gradient paired with
/// the round-start iterate is the one drawn when that iterate was produced
/// (communication time of the previous round, or initialisation), so the
/// K = 1 case reproduces round_gt exactly on shared streams.
template <typename Scalar>
DriftStats<Scalar> round_periodical_gt(AlgorithmState<Scalar>& state,
                                       const Problem<Scalar>& prob,
                                       const NoiseModel<Scalar>& noise,
                                       const HyperParams<Scalar>& hp,
                                       const MixingMatrix<Scalar>& mix,
                                       bool collect_steps = false,
                                       RoundLog<Scalar>* log = nullptr) {
  detail::require_variant(hp.variant, Variant::periodical_gt,
                          "round_periodical_gt");
  const DenseMatrix<Scalar> round_start = state.model;
  const DenseVector<Scalar> start_mean = round_start.rowwise().mean();
  DriftStats<Scalar> drift;
  const auto record_step = [&](const DenseMatrix<Scalar>& m) {
    const Scalar e = detail::mean_sq_deviation(m, start_mean);
    drift.total += e;
    if (collect_steps) drift.per_step.push_back(e);
  };

  for (int k = 0; k + 1 < hp.local_steps; ++k) {
    record_step(state.model);
    if (log) {
      log->snapshots.push_back(state.model);
      log->gradients.push_back(state.last_gradient);
      log->trackings.push_back(state.tracking);
    }
    state.model -= hp.eta_c * state.tracking;
    const DenseMatrix<Scalar> fresh =
        stochastic_gradient(prob, noise, state.model, state.round, k + 1);
    state.grad_evals += 1;
    state.tracking += fresh - state.last_gradient;
    state.last_gradient = fresh;
  }
  record_step(state.model);
  if (log) {
    log->snapshots.push_back(state.model);
    log->gradients.push_back(state.last_gradient);
    log->trackings.push_back(state.tracking);
    log->tracking = state.tracking;
    log->correction_before = state.tracking - state.last_gradient;
  }
  const DenseMatrix<Scalar> local_end =
      state.model - hp.eta_c * state.tracking;
  if (log) log->snapshots.push_back(local_end);

  state.model =
      (round_start - hp.eta_s * (round_start - local_end)) * mix.weights;
  const DenseMatrix<Scalar> mixed_tracking = state.tracking * mix.weights;
  const DenseMatrix<Scalar> fresh =
      stochastic_gradient(prob, noise, state.model, state.round + 1, 0);
  state.grad_evals += 1;
  state.tracking = mixed_tracking + fresh - state.last_gradient;
  state.last_gradient = fresh;
  if (log) {
    log->comm_gradient = fresh;
    log->correction_after = state.tracking - state.last_gradient;
  }
  state.round += 1;
  return drift;
}

/// Corrected-SGD form of periodical tracking with a full-batch gradient in
/// the tracking update: K - 1 stochastic corrected steps, one corrected
/// step on the exact gradient g, then
///   X <- (X^{(t)} - eta_s (X^{(t)} - X^{(t)+K})) W,  C <- C W + g (W - I).
template <typename Scalar>
DriftStats<Scalar> round_periodical_gt_fullgrad(
    AlgorithmState<Scalar>& state, const Problem<Scalar>& prob,
    const NoiseModel<Scalar>& noise, const HyperParams<Scalar>& hp,
    const MixingMatrix<Scalar>& mix, bool collect_steps = false,
    RoundLog<Scalar>* log = nullptr) {
  detail::require_variant(hp.variant, Variant::periodical_gt_fullgrad,
                          "round_periodical_gt_fullgrad");
  const DenseMatrix<Scalar> round_start = state.model;
  const DenseVector<Scalar> start_mean = round_start.rowwise().mean();
  DriftStats<Scalar> drift;
  const auto record_step = [&](const DenseMatrix<Scalar>& m) {
    const Scalar e = detail::mean_sq_deviation(m, start_mean);
    drift.total += e;
    if (collect_steps) drift.per_step.push_back(e);
  };

  for (int k = 0; k + 1 < hp.local_steps; ++k) {
    record_step(state.model);
    if (log) log->snapshots.push_back(state.model);
    const DenseMatrix<Scalar> grad =
        stochastic_gradient(prob, noise, state.model, state.round, k);
    state.grad_evals += 1;
    if (log) log->gradients.push_back(grad);
    state.model -= hp.eta_c * (grad + state.correction);
  }
  record_step(state.model);
  if (log) log->snapshots.push_back(state.model);
  const DenseMatrix<Scalar> exact = full_gradient(prob, state.model);
  const DenseMatrix<Scalar> local_end =
      state.model - hp.eta_c * (exact + state.correction);
  if (log) {
    log->snapshots.push_back(local_end);
    log->comm_gradient = exact;
    log->correction_before = state.correction;
  }
  state.model =
      (round_start - hp.eta_s * (round_start - local_end)) * mix.weights;
  state.correction =
      state.correction * mix.weights + exact * mix.weights - exact;
  if (log) log->correction_after = state.correction;
  state.round += 1;
  return drift;
}

/// round_gt with the gradient estimate averaged over K independent samples
/// at the same iterate (effective noise variance sigma^2 / K); still one
/// gossip exchange per update.
template <typename Scalar>
DriftStats<Scalar> round_large_batch_gt(AlgorithmState<Scalar>& state,
                                        const Problem<Scalar>& prob,
                                        const NoiseModel<Scalar>& noise,
                                        const HyperParams<Scalar>& hp,
                                        const MixingMatrix<Scalar>& mix,
                                        bool collect_steps = false,
                                        RoundLog<Scalar>* log = nullptr) {
  detail::require_variant(hp.variant, Variant::large_batch_gt,
                          "round_large_batch_gt");
  DriftStats<Scalar> drift;
  drift.total = consensus_distance(state.model);
  if (collect_steps) drift.per_step.push_back(drift.total);
  if (log) {
    log->snapshots.push_back(state.model);
    log->gradients.push_back(state.last_gradient);
    log->tracking = state.tracking;
    log->correction_before = state.tracking - state.last_gradient;
  }
  const Scalar eta = hp.eta_c * hp.eta_s;
  state.model = (state.model - eta * state.tracking) * mix.weights;
  DenseMatrix<Scalar> fresh = DenseMatrix<Scalar>::Zero(prob.d, prob.n);
  for (int s = 0; s < hp.local_steps; ++s) {
    fresh += stochastic_gradient(prob, noise, state.model, state.round + 1, s);
  }
  fresh /= static_cast<Scalar>(hp.local_steps);
  state.grad_evals += hp.local_steps;
  state.tracking =
      state.tracking * mix.weights + fresh - state.last_gradient;
  state.last_gradient = fresh;
  if (log) {
    log->comm_gradient = fresh;
    log->correction_after = state.tracking - state.last_gradient;
  }
  state.round += 1;
  return drift;
}

/// Baseline without any correction: K plain SGD steps, then gossip.
template <typename Scalar>
DriftStats<Scalar> round_dsgd(AlgorithmState<Scalar>& state,
                              const Problem<Scalar>& prob,
                              const NoiseModel<Scalar>& noise,
                              const HyperParams<Scalar>& hp,
                              const MixingMatrix<Scalar>& mix,
                              bool collect_steps = false,
                              RoundLog<Scalar>* log = nullptr) {
  detail::require_variant(hp.variant, Variant::dsgd, "round_dsgd");
  const DenseVector<Scalar> start_mean = state.model.rowwise().mean();
  DriftStats<Scalar> drift;
  for (int k = 0; k < hp.local_steps; ++k) {
    const Scalar e = detail::mean_sq_deviation(state.model, start_mean);
    drift.total += e;
    if (collect_steps) drift.per_step.push_back(e);
    if (log) log->snapshots.push_back(state.model);
    const DenseMatrix<Scalar> grad =
        stochastic_gradient(prob, noise, state.model, state.round, k);
    state.grad_evals += 1;
    if (log) log->gradients.push_back(grad);
    state.model -= hp.eta_c * grad;
  }
  if (log) log->snapshots.push_back(state.model);
  state.model = state.model * mix.weights;
  state.round += 1;
  return drift;
}

template <typename Scalar>
DriftStats<Scalar> advance_round(AlgorithmState<Scalar>& state,
                                 const Problem<Scalar>& prob,
                                 const NoiseModel<Scalar>& noise,
                                 const HyperParams<Scalar>& hp,
                                 const MixingMatrix<Scalar>& mix,
                                 bool collect_steps = false,
                                 RoundLog<Scalar>* log = nullptr) {
  switch (hp.variant) {
    case Variant::kgt:
      return round_kgt(state, prob, noise, hp, mix, collect_steps, log);
    case Variant::gt:
      return round_gt(state, prob, noise, hp, mix, collect_steps, log);
    case Variant::periodical_gt:
      return round_periodical_gt(state, prob, noise, hp, mix, collect_steps,
                                 log);
    case Variant::periodical_gt_fullgrad:
      return round_periodical_gt_fullgrad(state, prob, noise, hp, mix,
                                          collect_steps, log);
    case Variant::large_batch_gt:
      return round_large_batch_gt(state, prob, noise, hp, mix, collect_steps,
                                  log);
    case Variant::dsgd:
      return round_dsgd(state, prob, noise, hp, mix, collect_steps, log);
  }
  throw config_error("advance_round: unhandled variant");
}

template <typename Scalar>
struct RunOptions {
  bool collect_step_drift = false;
  std::optional<Scalar> f_star;       // enables f_gap and the potential
  Scalar potential_v = Scalar(2);
  std::function<void(const AlgorithmState<Scalar>&, const RoundLog<Scalar>&)>
      observer;  // invoked after every round with a fully populated log
};

/// Executes T rounds and returns T + 1 metric records (row t describes the
/// state at round t; its client_drift column holds the drift of the local
/// phase executed from that state, 0 on the last row). Aborts with
/// divergence_error when the model leaves the finite range.
template <typename Scalar, typename Derived>
std::vector<MetricsRecord<Scalar>> run(const Problem<Scalar>& prob,
                                       const NoiseModel<Scalar>& noise,
                                       const HyperParams<Scalar>& hp,
                                       const MixingMatrix<Scalar>& mix,
                                       const Eigen::MatrixBase<Derived>& x0,
                                       const RunOptions<Scalar>& opts = {}) {
  if (mix.n != prob.n) {
    throw std::invalid_argument("run: topology size differs from problem");
  }
  AlgorithmState<Scalar> state = init_state(prob, noise, hp, x0);
  std::vector<MetricsRecord<Scalar>> records;
  records.reserve(static_cast<std::size_t>(hp.rounds) + 1);

  const auto snapshot = [&]() {
    MetricsRecord<Scalar> rec;
    rec.round = state.round;
    rec.comm_rounds = state.round;
    rec.grad_evals = state.grad_evals;
    const DenseVector<Scalar> xbar = state.model.rowwise().mean();
    rec.grad_norm_sq = global_grad_norm(prob, xbar);
    rec.consensus = consensus_distance(state.model);
    rec.gamma = correction_quality(implied_correction(state, hp), prob, xbar);
    if (opts.f_star) {
      rec.f_gap = global_value(prob, xbar) - *opts.f_star;
      if (mix.p > Scalar(0)) {
        rec.potential = potential(*rec.f_gap, rec.gamma, rec.consensus, mix.p,
                                  hp.local_steps, hp.eta_c, hp.eta_s,
                                  prob.smoothness, opts.potential_v);
      }
    }
    records.push_back(std::move(rec));
  };

  snapshot();
  for (int t = 0; t < hp.rounds; ++t) {
    RoundLog<Scalar> log;
    RoundLog<Scalar>* logp = opts.observer ? &log : nullptr;
    const DriftStats<Scalar> drift = advance_round(
        state, prob, noise, hp, mix, opts.collect_step_drift, logp);
    records.back().client_drift = drift.total;
    records.back().drift_steps = drift.per_step;
    if (!state.model.allFinite() ||
        state.model.squaredNorm() > Scalar(1e24)) {
      throw divergence_error(
          "model diverged at round " + std::to_string(state.round), state.round);
    }
    if (opts.observer) opts.observer(state, log);
    snapshot();
  }
  return records;
}

}  // namespace gtsim

#endif  // GTSIM_ALGORITHMS_HPP
