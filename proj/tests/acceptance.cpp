// Acceptance suite: one check per shipped claim, one PASS/FAIL line each.
// Exit status is the number of failed criteria.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "gtsim/algorithms.hpp"
#include "gtsim/runner.hpp"
#include "gtsim/theory.hpp"
#include "test_support.hpp"

using namespace gtsim;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool pass,
            const std::string& detail) {
  std::printf("[%s] %2d. %-34s %s\n", pass ? "PASS" : "FAIL", id, name.c_str(),
              detail.c_str());
  if (!pass) ++g_failures;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

double final_mean_f_gap(Variant variant, double zeta, int local_steps,
                        double eta_c, double eta_s, int rounds, int reps,
                        double sigma) {
  const auto prob = make_quadratic(10, 10, zeta, 1);
  const auto mix = build_ring(10);
  HyperParams<double> hp;
  hp.variant = variant;
  hp.local_steps = local_steps;
  hp.eta_c = eta_c;
  hp.eta_s = eta_s;
  hp.rounds = rounds;
  RunOptions<double> opts;
  opts.f_star = quadratic_optimum(prob).second;
  double sum = 0.0;
  for (int rep = 0; rep < reps; ++rep) {
    NoiseModel<double> noise{sigma, 1 + static_cast<std::uint64_t>(rep)};
    sum += *run(prob, noise, hp, mix, Vector::Zero(10), opts).back().f_gap;
  }
  return sum / reps;
}

// 1. Tracking variants end at the same quality regardless of heterogeneity
//    (factor 2), plain dsgd degrades by at least 10x. Ring, n = 10, d = 10,
//    sigma^2 = 1, K = 20, T = 250, 3 repetitions, zeta_bar in {0, 10}.
//    large_batch_gt averages its K samples, so its equivalent stepsize is
//    K times the per-sample stepsize of the local-step variants.
void criterion_heterogeneity_robustness() {
  struct Entry {
    Variant variant;
    const char* name;
    double eta_c;
    bool tracking_side;
  };
  const std::vector<Entry> entries = {
      {Variant::kgt, "kgt", 1e-3, true},
      {Variant::periodical_gt, "periodical_gt", 1e-3, true},
      {Variant::periodical_gt_fullgrad, "periodical_gt_fullgrad", 1e-3, true},
      {Variant::large_batch_gt, "large_batch_gt", 20 * 1e-3, true},
      {Variant::dsgd, "dsgd", 1e-3, false},
  };
  bool pass = true;
  std::ostringstream detail;
  for (const auto& entry : entries) {
    const double gap0 =
        final_mean_f_gap(entry.variant, 0.0, 20, entry.eta_c, 1.0, 250, 3, 1.0);
    const double gap10 = final_mean_f_gap(entry.variant, 10.0, 20, entry.eta_c,
                                          1.0, 250, 3, 1.0);
    const double ratio = gap10 / gap0;
    const bool ok = entry.tracking_side ? ratio <= 2.0 : ratio >= 10.0;
    pass = pass && ok;
    detail << entry.name << " " << fmt(ratio)
           << (entry.tracking_side ? "<=2 " : ">=10 ");
  }
  report(1, "heterogeneity robustness", pass, detail.str());
}

// 2. Noise-free runs eliminate heterogeneity exactly for kgt while dsgd
//    stalls: zeta_bar = 10, ring, K = 20, stepsizes at the theoretical
//    orders eta_c = p/(K L), eta_s = p, T = 5000.
void criterion_exact_elimination() {
  const auto prob = make_quadratic(10, 10, 10.0, 1);
  const auto mix = build_ring(10);
  const double eta_c = mix.p / (20 * prob.smoothness);
  const double eta_s = mix.p;
  NoiseModel<double> silent{0.0, 1};
  RunOptions<double> opts;
  opts.f_star = quadratic_optimum(prob).second;

  const auto run_variant = [&](Variant variant) {
    HyperParams<double> hp;
    hp.variant = variant;
    hp.local_steps = 20;
    hp.eta_c = eta_c;
    hp.eta_s = eta_s;
    hp.rounds = 5000;
    return run(prob, silent, hp, mix, Vector::Zero(10), opts).back();
  };
  const auto kgt = run_variant(Variant::kgt);
  const auto dsgd = run_variant(Variant::dsgd);
  const bool pass = kgt.grad_norm_sq <= 1e-12 && *kgt.f_gap <= 1e-10 &&
                    dsgd.grad_norm_sq >= 1e-4;
  report(2, "noise-free heterogeneity removal", pass,
         "kgt grad " + fmt(kgt.grad_norm_sq) + " f_gap " + fmt(*kgt.f_gap) +
             ", dsgd grad " + fmt(dsgd.grad_norm_sq));
}

// 3. With one local step and shared noise streams, kgt follows plain
//    gradient tracking exactly (eta = eta_s * eta_c), on ring and complete.
void criterion_single_step_equivalence() {
  const auto prob = make_quadratic(10, 10, 10.0, 1);
  NoiseModel<double> noise{1.0, 5};
  double worst = 0.0;
  for (const auto& mix : {build_ring(10), build_complete(10)}) {
    HyperParams<double> gt_hp;
    gt_hp.variant = Variant::gt;
    gt_hp.local_steps = 1;
    gt_hp.eta_c = 2e-3;
    gt_hp.eta_s = 0.8;
    gt_hp.tracking_init = TrackingInit::mean;
    auto gt_state = init_state(prob, noise, gt_hp, Vector::Constant(10, 0.2));

    HyperParams<double> kgt_hp = gt_hp;
    kgt_hp.variant = Variant::kgt;
    kgt_hp.tracking_init.reset();
    kgt_hp.correction_init = CorrectionInit::exact;
    auto kgt_state =
        init_state(prob, noise, kgt_hp, Vector::Constant(10, 0.2));

    for (int t = 0; t < 50; ++t) {
      round_gt(gt_state, prob, noise, gt_hp, mix);
      round_kgt(kgt_state, prob, noise, kgt_hp, mix);
      worst = std::max(
          worst, (gt_state.model - kgt_state.model).cwiseAbs().maxCoeff());
    }
  }
  report(3, "single-local-step equivalence", worst <= 1e-10,
         "max column deviation " + fmt(worst));
}

// 4. The exchanged tracking variable equals the normalized displacement,
//    the within-round mean gradient plus correction, and obeys
//    Z_{t+1} = Z_t W + Gbar_{t+1} - Gbar_t. K = 5, sigma = 1, 20 rounds.
void criterion_tracking_identity() {
  const auto prob = make_quadratic(10, 10, 10.0, 1);
  const auto mix = build_ring(10);
  NoiseModel<double> noise{1.0, 9};
  HyperParams<double> hp;
  hp.variant = Variant::kgt;
  hp.local_steps = 5;
  hp.eta_c = 2e-3;
  hp.eta_s = 1.0;
  hp.correction_init = CorrectionInit::exact;
  auto state = init_state(prob, noise, hp, Vector::Zero(10));

  double worst_identity = 0.0, worst_recursion = 0.0;
  Matrix prev_tracking, prev_mean_grad;
  for (int t = 0; t < 20; ++t) {
    RoundLog<double> log;
    kgt_local_phase(state, prob, noise, hp, false, &log);
    const Matrix z = tracking_variable(state, hp);
    worst_identity =
        std::max(worst_identity,
                 (z - (log.mean_local_gradient + log.correction_before))
                     .cwiseAbs()
                     .maxCoeff());
    if (t > 0) {
      const Matrix expected = prev_tracking * mix.weights +
                              log.mean_local_gradient - prev_mean_grad;
      worst_recursion =
          std::max(worst_recursion, (z - expected).cwiseAbs().maxCoeff());
    }
    prev_tracking = z;
    prev_mean_grad = log.mean_local_gradient;
    kgt_comm_phase(state, hp, mix, &log);
  }
  report(4, "tracking identity and recursion",
         worst_identity <= 1e-10 && worst_recursion <= 1e-10,
         "identity " + fmt(worst_identity) + ", recursion " +
             fmt(worst_recursion));
}

// 5. The correction keeps a zero column mean at every one of 1000 rounds,
//    for both init modes and both corrected variants.
void criterion_zero_mean_correction() {
  const auto prob = make_quadratic(10, 10, 10.0, 1);
  const auto mix = build_ring(10);
  NoiseModel<double> noise{1.0, 13};
  double worst = 0.0;
  for (Variant variant : {Variant::kgt, Variant::periodical_gt_fullgrad}) {
    for (CorrectionInit init : {CorrectionInit::exact, CorrectionInit::zero}) {
      HyperParams<double> hp;
      hp.variant = variant;
      hp.local_steps = 5;
      hp.eta_c = 1e-3;
      hp.eta_s = 1.0;
      hp.correction_init = init;
      auto state = init_state(prob, noise, hp, Vector::Zero(10));
      for (int t = 0; t < 1000; ++t) {
        advance_round(state, prob, noise, hp, mix);
        worst = std::max(worst, state.correction.rowwise().mean().norm());
      }
    }
  }
  report(5, "zero-mean correction", worst <= 1e-8,
         "max ||mean c|| over runs " + fmt(worst));
}

// 6. Within every local step the averaged model moves by exactly eta_c
//    times the mean stochastic gradient of that step.
void criterion_averaged_iterate() {
  const auto prob = make_quadratic(10, 10, 10.0, 1);
  const auto mix = build_ring(10);
  NoiseModel<double> noise{1.0, 17};
  HyperParams<double> hp;
  hp.variant = Variant::kgt;
  hp.local_steps = 7;
  hp.eta_c = 2e-3;
  hp.eta_s = 1.0;
  hp.correction_init = CorrectionInit::exact;
  auto state = init_state(prob, noise, hp, Vector::Zero(10));
  double worst = 0.0;
  for (int t = 0; t < 25; ++t) {
    RoundLog<double> log;
    kgt_local_phase(state, prob, noise, hp, false, &log);
    for (std::size_t k = 0; k + 1 < log.snapshots.size(); ++k) {
      const Vector step = log.snapshots[k + 1].rowwise().mean() -
                          log.snapshots[k].rowwise().mean();
      worst = std::max(
          worst,
          (step + hp.eta_c * log.gradients[k].rowwise().mean()).norm());
    }
    kgt_comm_phase(state, hp, mix, &log);
  }
  report(6, "averaged-iterate step", worst <= 1e-10,
         "max deviation " + fmt(worst));
}

// 7. Noise-dominated speedup with local steps: rounds to a fixed accuracy
//    shrink by ~K. Complete graph, zeta_bar = 0, sigma^2 = 1, kgt with
//    K = 4 vs 16, each tuned on the same 6-point stepsize grid; the target
//    is 1.5x the best K = 16 value after 2000 rounds (a plateau value, so
//    the noise term dominates). Accepted band [2, 8], ideal 4.
void criterion_speedup_scaling() {
  const auto prob = make_quadratic(10, 10, 0.0, 1);
  const auto mix = build_complete(10);
  const std::vector<double> grid = {1e-3, 5e-4, 2.5e-4, 1.25e-4, 6.25e-5,
                                    3.125e-5};
  const int reps = 12;

  const auto mean_grad_trace = [&](int local_steps, double eta_c, int rounds) {
    HyperParams<double> hp;
    hp.variant = Variant::kgt;
    hp.local_steps = local_steps;
    hp.eta_c = eta_c;
    hp.eta_s = 1.0;
    hp.rounds = rounds;
    std::vector<double> mean(rounds + 1, 0.0);
    for (int rep = 0; rep < reps; ++rep) {
      NoiseModel<double> noise{1.0, 100 + static_cast<std::uint64_t>(rep)};
      const auto trace = run(prob, noise, hp, mix, Vector::Ones(10));
      for (int t = 0; t <= rounds; ++t) mean[t] += trace[t].grad_norm_sq;
    }
    for (double& g : mean) g /= reps;
    return mean;
  };

  std::vector<std::vector<double>> traces16;
  double best16 = std::numeric_limits<double>::infinity();
  for (double eta : grid) {
    traces16.push_back(mean_grad_trace(16, eta, 2000));
    best16 = std::min(best16, traces16.back().back());
  }
  const double target = 1.5 * best16;
  const auto first_hit = [&](const std::vector<double>& trace) {
    for (std::size_t t = 0; t < trace.size(); ++t) {
      if (trace[t] <= target) return static_cast<long>(t);
    }
    return static_cast<long>(-1);
  };
  long t16 = -1;
  for (const auto& trace : traces16) {
    const long hit = first_hit(trace);
    if (hit >= 0 && (t16 < 0 || hit < t16)) t16 = hit;
  }
  long t4 = -1;
  for (double eta : grid) {
    const long hit = first_hit(mean_grad_trace(4, eta, 20000));
    if (hit >= 0 && (t4 < 0 || hit < t4)) t4 = hit;
  }
  const double ratio =
      (t16 > 0 && t4 > 0) ? static_cast<double>(t4) / t16 : -1.0;
  report(7, "local-step speedup scaling", ratio >= 2.0 && ratio <= 8.0,
         "T(K=4)/T(K=16) = " + fmt(ratio) + " (T16 " + std::to_string(t16) +
             ", T4 " + std::to_string(t4) + ")");
}

// 8. Averaging K samples cuts the estimator variance to sigma^2/K, and the
//    correction updates are structurally single-sample for periodical
//    tracking vs K-sample-mean for kgt.
void criterion_variance_reduction() {
  const auto prob = make_quadratic(10, 10, 1.0, 1);
  const Matrix x = test_support::random_gaussian_matrix(10, 10, 3);
  const Matrix exact = full_gradient(prob, x);
  NoiseModel<double> noise{1.0, 21};
  const int batch = 8, draws = 10000;
  double sq_sum = 0.0;
  for (int r = 0; r < draws; ++r) {
    Matrix mean_grad = Matrix::Zero(10, 10);
    for (int s = 0; s < batch; ++s) {
      mean_grad += stochastic_gradient(prob, noise, x, r, s);
    }
    mean_grad /= batch;
    sq_sum += (mean_grad.col(2) - exact.col(2)).squaredNorm();
  }
  const double measured = sq_sum / draws;
  const bool variance_ok = std::abs(measured - 1.0 / batch) <= 0.05 / batch;

  const auto mix = build_ring(10);
  const Matrix identity = Matrix::Identity(10, 10);
  double worst_pgt = 0.0, worst_kgt = 0.0;
  {
    HyperParams<double> hp;
    hp.variant = Variant::periodical_gt;
    hp.local_steps = 6;
    hp.eta_c = 2e-3;
    hp.eta_s = 1.0;
    auto state = init_state(prob, noise, hp, Vector::Zero(10));
    for (int t = 0; t < 15; ++t) {
      RoundLog<double> log;
      round_periodical_gt(state, prob, noise, hp, mix, false, &log);
      // single-sample gradient carries the correction across the exchange
      const Matrix expected = log.correction_before * mix.weights +
                              log.gradients.back() * (mix.weights - identity);
      worst_pgt = std::max(
          worst_pgt, (log.correction_after - expected).cwiseAbs().maxCoeff());
    }
  }
  {
    HyperParams<double> hp;
    hp.variant = Variant::kgt;
    hp.local_steps = 6;
    hp.eta_c = 2e-3;
    hp.eta_s = 1.0;
    auto state = init_state(prob, noise, hp, Vector::Zero(10));
    for (int t = 0; t < 15; ++t) {
      RoundLog<double> log;
      round_kgt(state, prob, noise, hp, mix, false, &log);
      // the K-sample mean carries the correction instead
      const Matrix expected =
          log.correction_before * mix.weights +
          log.mean_local_gradient * (mix.weights - identity);
      worst_kgt = std::max(
          worst_kgt, (log.correction_after - expected).cwiseAbs().maxCoeff());
    }
  }
  report(8, "noise-variance reduction",
         variance_ok && worst_pgt <= 1e-12 && worst_kgt <= 1e-12,
         "batch variance " + fmt(measured) + " vs " + fmt(1.0 / batch) +
             ", reconstruction " + fmt(std::max(worst_pgt, worst_kgt)));
}

// 9. One gossip step contracts the consensus distance by at least (1 - p)
//    with the computed p, on the named and on random valid topologies.
void criterion_gossip_contraction() {
  std::vector<MixingMatrix<double>> mixes;
  mixes.push_back(build_ring(10));
  mixes.push_back(build_complete(10));
  mixes.push_back(build_disconnected(10));
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    mixes.push_back(from_weights(
        test_support::sinkhorn_random_mixing(6 + 3 * seed, seed), "random"));
  }
  double worst_slack = -std::numeric_limits<double>::infinity();
  for (const auto& mix : mixes) {
    for (int trial = 0; trial < 1000; ++trial) {
      const Matrix x = test_support::random_gaussian_matrix(
          6, mix.n, 7000 + static_cast<std::uint64_t>(trial));
      const Vector mean = x.rowwise().mean();
      const double before = (x.colwise() - mean).squaredNorm();
      const double after = ((x * mix.weights).colwise() - mean).squaredNorm();
      worst_slack = std::max(worst_slack, after - (1.0 - mix.p) * before);
    }
  }
  report(9, "gossip contraction", worst_slack <= 1e-12,
         "worst violation " + fmt(worst_slack));
}

// 10. Rate-predictor and stepsize algebra: the leading noise term improves
//     by exactly K, the tuned stepsize never beats its guarantee, and the
//     cap product identity is exact.
void criterion_theory_algebra() {
  bool leading_exact = true;
  for (double k : {1.0, 2.0, 4.0, 16.0, 64.0, 256.0}) {
    RateInputs<double> in;
    in.sigma = 1.3;
    in.nodes = 10.0;
    in.local_steps = k;
    in.contraction = 0.3;
    in.accuracy = 1e-3;
    in.smoothness = 10.0;
    in.initial_gap = 2.0;
    leading_exact =
        leading_exact && rate_kgt(in).noise_term == rate_gt(in).noise_term / k;
  }

  rng::CounterStream stream(rng::stream_key({0xACCEULL}));
  bool tuned_ok = true;
  for (int trial = 0; trial < 1000; ++trial) {
    const double r0 = 1e-6 * std::pow(1e10, stream.uniform());
    const double b =
        (trial % 4 == 0) ? 0.0 : 1e-6 * std::pow(1e12, stream.uniform());
    const double e =
        (trial % 5 == 0) ? 0.0 : 1e-6 * std::pow(1e15, stream.uniform());
    const double u =
        (trial % 3 == 0) ? 0.0 : 1e-3 * std::pow(1e9, stream.uniform());
    const long horizon = static_cast<long>(stream.bounded(1000000));
    const auto tuned = tune_stepsize(r0, b, e, u, horizon);
    tuned_ok = tuned_ok && tuned.psi <= tuned.bound * (1.0 + 1e-12);
  }

  bool caps_ok = true;
  for (double p : {0.1, 0.24, 0.9}) {
    for (double k : {1.0, 20.0}) {
      const auto caps = stepsize_caps(p, k, 10.0, 2.0);
      caps_ok = caps_ok && caps.eta_max == caps.eta_c_max * caps.eta_s;
      caps_ok = caps_ok &&
                std::abs(caps.eta_max - p * p / (96.0 * k * 10.0)) <=
                    4e-16 * caps.eta_max;
    }
  }
  report(10, "rate and stepsize algebra", leading_exact && tuned_ok && caps_ok,
         std::string("leading-term 1/K ") + (leading_exact ? "exact" : "off") +
             ", tuned<=bound " + (tuned_ok ? "yes" : "no") + ", caps " +
             (caps_ok ? "exact" : "off"));
}

// 11. Running the same configuration twice produces byte-identical CSVs.
void criterion_deterministic_replay() {
  RunConfig config;
  config.name = "replay";
  config.algorithm.variant = "kgt";
  config.algorithm.local_steps = 10;
  config.algorithm.rounds = 40;
  config.problem.zeta_bar = 10.0;
  config.noise.sigma = 1.0;
  config.runner.repetitions = 3;
  config.runner.collect_local_metrics = true;
  config.runner.thresholds = {1e-2};

  const auto slurp = [](const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
  };

  config.runner.output = test_support::fresh_dir("acceptance_replay_a");
  const auto first = execute(config);
  config.runner.output = test_support::fresh_dir("acceptance_replay_b");
  const auto second = execute(config);

  bool pass = first.files_written.size() == second.files_written.size();
  std::size_t bytes = 0;
  for (std::size_t i = 0; pass && i < first.files_written.size(); ++i) {
    const std::string a = slurp(first.files_written[i]);
    const std::string b = slurp(second.files_written[i]);
    bytes += a.size();
    pass = pass && !a.empty() && a == b;
  }
  pass = pass && summary_csv({first.summary}) == summary_csv({second.summary});
  report(11, "deterministic replay", pass,
         std::to_string(first.files_written.size()) + " files, " +
             std::to_string(bytes) + " bytes compared");
}

}  // namespace

int main() {
  criterion_heterogeneity_robustness();
  criterion_exact_elimination();
  criterion_single_step_equivalence();
  criterion_tracking_identity();
  criterion_zero_mean_correction();
  criterion_averaged_iterate();
  criterion_speedup_scaling();
  criterion_variance_reduction();
  criterion_gossip_contraction();
  criterion_theory_algebra();
  criterion_deterministic_replay();
  if (g_failures == 0) {
    std::printf("all criteria passed\n");
  } else {
    std::printf("%d criteria FAILED\n", g_failures);
  }
  return g_failures;
}
