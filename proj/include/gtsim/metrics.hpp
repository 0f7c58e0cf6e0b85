#ifndef GTSIM_METRICS_HPP
#define GTSIM_METRICS_HPP

#include <optional>
#include <utility>
#include <vector>

#include "gtsim/problems.hpp"
#include "gtsim/types.hpp"

namespace gtsim {

/// One trace row per communication round. `client_drift` belongs to the
/// local phase executed *from* this round's state; the final row of a run
/// carries 0 there because no further local phase ran. `f_gap` and
/// `potential` are present only when the optimal value is known (and, for
/// the potential, p > 0).
template <typename Scalar>
struct MetricsRecord {
  int round = 0;
  long comm_rounds = 0;  // cumulative gossip exchanges
  long grad_evals = 0;   // cumulative stochastic-gradient draws per node
  Scalar grad_norm_sq = Scalar(0);
  std::optional<Scalar> f_gap;
  Scalar consensus = Scalar(0);
  Scalar client_drift = Scalar(0);
  std::vector<Scalar> drift_steps;  // e_k per local step, opt-in
  Scalar gamma = Scalar(0);
  std::optional<Scalar> potential;
};

/// Consensus distance (1/n) sum_i ||x_i - xbar||^2.
template <typename Scalar>
Scalar consensus_distance(const DenseMatrix<Scalar>& model) {
  const DenseVector<Scalar> mean = model.rowwise().mean();
  return (model.colwise() - mean).squaredNorm() /
         static_cast<Scalar>(model.cols());
}

/// Client drift of one round's local phase. snapshots[k] = X at local step
/// k, measured against the round-start average: e_k = (1/n) sum_i
/// ||x_i^{+k} - xbar_start||^2, total = sum_k e_k.
template <typename Scalar>
std::pair<Scalar, std::vector<Scalar>> client_drift(
    const std::vector<DenseMatrix<Scalar>>& snapshots,
    const DenseMatrix<Scalar>& round_start) {
  if (snapshots.empty()) {
    throw std::invalid_argument("client_drift: no local snapshots");
  }
  const DenseVector<Scalar> mean = round_start.rowwise().mean();
  std::vector<Scalar> steps;
  steps.reserve(snapshots.size());
  Scalar total = Scalar(0);
  for (const auto& snap : snapshots) {
    const Scalar e = (snap.colwise() - mean).squaredNorm() /
                     static_cast<Scalar>(snap.cols());
    steps.push_back(e);
    total += e;
  }
  return {total, std::move(steps)};
}

/// Correction quality
///   gamma = (1/(n L^2)) sum_i ||c_i + grad f_i(xbar) - grad f(xbar)||^2,
/// i.e. the normalized error of the correction against the exact
/// local-global gradient deviation at the averaged model.
template <typename Scalar, typename DerivedC, typename DerivedX>
Scalar correction_quality(const Eigen::MatrixBase<DerivedC>& correction,
                          const Problem<Scalar>& prob,
                          const Eigen::MatrixBase<DerivedX>& xbar) {
  const DenseVector<Scalar> global = global_gradient(prob, xbar);
  Scalar sum = Scalar(0);
  for (Eigen::Index i = 0; i < prob.n; ++i) {
    sum += (correction.col(i) + node_gradient(prob, i, xbar) - global)
               .squaredNorm();
  }
  const Scalar l = prob.smoothness;
  return sum / (static_cast<Scalar>(prob.n) * l * l);
}

/// ||grad f(xbar)||^2 with the exact global gradient.
template <typename Scalar, typename Derived>
Scalar global_grad_norm(const Problem<Scalar>& prob,
                        const Eigen::MatrixBase<Derived>& xbar) {
  return global_gradient(prob, xbar).squaredNorm();
}

/// Lyapunov combination of suboptimality, correction quality and consensus
/// distance,
///   H = f_gap + A (K eta_c)^3 L^4 / (p eta_s^2) * gamma
///           + B/(6 v^2) * (K eta_c L^2 / p) * consensus,
/// with weights A = 72 v^3 p + 48 v p and B = 36 v^3 p.
template <typename Scalar>
Scalar potential(Scalar f_gap, Scalar gamma, Scalar consensus, Scalar p, int k,
                 Scalar eta_c, Scalar eta_s, Scalar smoothness,
                 Scalar v = Scalar(2)) {
  if (p <= Scalar(0)) {
    throw std::invalid_argument("potential: requires p > 0");
  }
  if (v <= Scalar(1)) {
    throw std::invalid_argument("potential: requires v > 1");
  }
  const Scalar a_coef = 72 * v * v * v * p + 48 * v * p;
  const Scalar b_coef = 36 * v * v * v * p;
  const Scalar k_eta = static_cast<Scalar>(k) * eta_c;
  const Scalar l2 = smoothness * smoothness;
  return f_gap +
         a_coef * k_eta * k_eta * k_eta * l2 * l2 / (p * eta_s * eta_s) *
             gamma +
         b_coef / (6 * v * v) * (k_eta * l2 / p) * consensus;
}

}  // namespace gtsim

#endif  // GTSIM_METRICS_HPP
