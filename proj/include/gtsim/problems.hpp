#ifndef GTSIM_PROBLEMS_HPP
#define GTSIM_PROBLEMS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "gtsim/rng.hpp"
#include "gtsim/types.hpp"

namespace gtsim {

enum class ProblemKind { quadratic, nonconvex };

/// Distributed objective f(x) = (1/n) sum_i f_i(x) with per-node
///
///   f_i(x) = 1/2 ||A_i x - b_i||^2 + c * sum_j cos(x_j),
///
/// where A_i^2 = (i^2/n) I (i is 1-indexed) and b_i ~ N(0, zeta_bar^2/i^2 I).
/// c = 0 gives the heterogeneous least-squares family; c > 0 adds a smooth
/// non-convex term with analytic gradient. Immutable after construction.
template <typename Scalar>
struct Problem {
  ProblemKind kind = ProblemKind::quadratic;
  Eigen::Index n = 0;
  Eigen::Index d = 0;
  DenseVector<Scalar> hessian_scale;  // a_i = i^2/n
  DenseMatrix<Scalar> offsets;        // column i holds b_i
  Scalar cosine_weight = Scalar(0);   // c
  Scalar smoothness = Scalar(0);      // L = max_i a_i + c
  Scalar zeta_bar = Scalar(0);        // heterogeneity control used at sampling
};

/// Additive Gaussian gradient noise with per-coordinate variance sigma^2/d,
/// so E||noise column||^2 = sigma^2 exactly. Streams are keyed by
/// (seed, node, round, local_step): bit-reproducible under any schedule.
template <typename Scalar>
struct NoiseModel {
  Scalar sigma = Scalar(0);
  std::uint64_t seed = 0;
};

namespace detail {

template <typename Scalar>
Problem<Scalar> make_problem(ProblemKind kind, Eigen::Index n, Eigen::Index d,
                             Scalar zeta_bar, Scalar cosine_weight,
                             std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("problem: n must be >= 1");
  if (d < 1) throw std::invalid_argument("problem: d must be >= 1");
  if (zeta_bar < Scalar(0)) {
    throw std::invalid_argument("problem: zeta_bar must be >= 0");
  }
  if (cosine_weight < Scalar(0)) {
    throw std::invalid_argument("problem: c must be >= 0");
  }
  Problem<Scalar> prob;
  prob.kind = kind;
  prob.n = n;
  prob.d = d;
  prob.zeta_bar = zeta_bar;
  prob.cosine_weight = cosine_weight;
  prob.hessian_scale.resize(n);
  prob.offsets.resize(d, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar node = Scalar(i + 1);
    prob.hessian_scale[i] = node * node / Scalar(n);
    const Scalar scale = zeta_bar / node;  // std of b_i coordinates
    rng::CounterStream stream(
        rng::stream_key({seed, rng::kTagData, static_cast<std::uint64_t>(i)}));
    for (Eigen::Index j = 0; j < d; ++j) {
      prob.offsets(j, i) =
          scale == Scalar(0)
              ? Scalar(0)
              : scale * static_cast<Scalar>(stream.gaussian());
    }
  }
  prob.smoothness = prob.hessian_scale.maxCoeff() + cosine_weight;
  return prob;
}

}  // namespace detail

/// Heterogeneous least squares: L = max_i i^2/n = n.
template <typename Scalar = double>
Problem<Scalar> make_quadratic(Eigen::Index n, Eigen::Index d, Scalar zeta_bar,
                               std::uint64_t seed) {
  return detail::make_problem<Scalar>(ProblemKind::quadratic, n, d, zeta_bar,
                                      Scalar(0), seed);
}

/// Least squares plus c * sum_j cos(x_j); non-convex for c > 0, L = n + c.
template <typename Scalar = double>
Problem<Scalar> make_nonconvex(Eigen::Index n, Eigen::Index d, Scalar zeta_bar,
                               Scalar cosine_weight, std::uint64_t seed) {
  return detail::make_problem<Scalar>(ProblemKind::nonconvex, n, d, zeta_bar,
                                      cosine_weight, seed);
}

/// f_i evaluated at x (any vector expression).
template <typename Scalar, typename Derived>
Scalar node_value(const Problem<Scalar>& prob, Eigen::Index node,
                  const Eigen::MatrixBase<Derived>& x) {
  const Scalar root = std::sqrt(prob.hessian_scale[node]);
  Scalar v = Scalar(0.5) * (root * x - prob.offsets.col(node)).squaredNorm();
  if (prob.kind == ProblemKind::nonconvex) {
    v += prob.cosine_weight * x.array().cos().sum();
  }
  return v;
}

/// f(x) = (1/n) sum_i f_i(x).
template <typename Scalar, typename Derived>
Scalar global_value(const Problem<Scalar>& prob,
                    const Eigen::MatrixBase<Derived>& x) {
  Scalar sum = Scalar(0);
  for (Eigen::Index i = 0; i < prob.n; ++i) sum += node_value(prob, i, x);
  return sum / Scalar(prob.n);
}

/// grad f_i(x) = a_i x - sqrt(a_i) b_i - c sin(x) (componentwise).
template <typename Scalar, typename Derived>
DenseVector<Scalar> node_gradient(const Problem<Scalar>& prob,
                                  Eigen::Index node,
                                  const Eigen::MatrixBase<Derived>& x) {
  const Scalar a = prob.hessian_scale[node];
  DenseVector<Scalar> g = a * x - std::sqrt(a) * prob.offsets.col(node);
  if (prob.kind == ProblemKind::nonconvex) {
    g.array() -= prob.cosine_weight * x.array().sin();
  }
  return g;
}

/// Column i of the result is grad f_i applied to column i of the model
/// matrix.
template <typename Scalar>
DenseMatrix<Scalar> full_gradient(const Problem<Scalar>& prob,
                                  const DenseMatrix<Scalar>& model) {
  if (model.rows() != prob.d || model.cols() != prob.n) {
    throw std::invalid_argument(
        "full_gradient: model must be d x n = " + std::to_string(prob.d) +
        " x " + std::to_string(prob.n));
  }
  DenseMatrix<Scalar> grad(prob.d, prob.n);
  for (Eigen::Index i = 0; i < prob.n; ++i) {
    grad.col(i) = node_gradient(prob, i, model.col(i));
  }
  return grad;
}

/// Exact global gradient grad f(x) = (1/n) sum_i grad f_i(x).
template <typename Scalar, typename Derived>
DenseVector<Scalar> global_gradient(const Problem<Scalar>& prob,
                                    const Eigen::MatrixBase<Derived>& x) {
  DenseVector<Scalar> g = DenseVector<Scalar>::Zero(prob.d);
  for (Eigen::Index i = 0; i < prob.n; ++i) g += node_gradient(prob, i, x);
  return g / Scalar(prob.n);
}

/// full_gradient plus one keyed Gaussian noise column per node. The stream
/// key is (seed, node, round, local_step), so the same coordinates always
/// reproduce the same draw and sigma = 0 returns the exact gradient.
template <typename Scalar>
DenseMatrix<Scalar> stochastic_gradient(const Problem<Scalar>& prob,
                                        const NoiseModel<Scalar>& noise,
                                        const DenseMatrix<Scalar>& model,
                                        int round, int local_step) {
  DenseMatrix<Scalar> grad = full_gradient(prob, model);
  if (noise.sigma != Scalar(0)) {
    const Scalar scale =
        noise.sigma / std::sqrt(static_cast<Scalar>(prob.d));
    for (Eigen::Index i = 0; i < prob.n; ++i) {
      rng::CounterStream stream(rng::stream_key(
          {noise.seed, rng::kTagNoise, static_cast<std::uint64_t>(i),
           static_cast<std::uint64_t>(round),
           static_cast<std::uint64_t>(local_step)}));
      for (Eigen::Index j = 0; j < prob.d; ++j) {
        grad(j, i) += scale * static_cast<Scalar>(stream.gaussian());
      }
    }
  }
  return grad;
}

/// Closed-form optimum of the quadratic family:
/// x* = (sum_i A_i^2)^{-1} sum_i A_i b_i, a scalar divide per coordinate
/// because every Hessian is a multiple of the identity.
template <typename Scalar>
std::pair<DenseVector<Scalar>, Scalar> quadratic_optimum(
    const Problem<Scalar>& prob) {
  if (prob.kind != ProblemKind::quadratic) {
    throw unsupported_error(
        "quadratic_optimum: closed form only exists for the quadratic kind");
  }
  DenseVector<Scalar> numerator = DenseVector<Scalar>::Zero(prob.d);
  Scalar denominator = Scalar(0);
  for (Eigen::Index i = 0; i < prob.n; ++i) {
    numerator += std::sqrt(prob.hessian_scale[i]) * prob.offsets.col(i);
    denominator += prob.hessian_scale[i];
  }
  DenseVector<Scalar> x_star = numerator / denominator;
  return {x_star, global_value(prob, x_star)};
}

/// Per-point pair (h, g) with h(x) = (1/n) sum_i ||grad f_i(x)||^2 and
/// g(x) = ||grad f(x)||^2, plus the estimate max_x (h - g), i.e. the
/// heterogeneity bound slice at B = 1.
template <typename Scalar>
struct HeterogeneityReport {
  Scalar zeta_sq_est = Scalar(0);
  std::vector<std::pair<Scalar, Scalar>> point_stats;
};

template <typename Scalar>
HeterogeneityReport<Scalar> measure_heterogeneity(
    const Problem<Scalar>& prob,
    const std::vector<DenseVector<Scalar>>& sample_points) {
  if (sample_points.empty()) {
    throw std::invalid_argument(
        "measure_heterogeneity: need at least one sample point");
  }
  HeterogeneityReport<Scalar> report;
  report.zeta_sq_est = Scalar(0);
  for (const auto& x : sample_points) {
    Scalar h = Scalar(0);
    DenseVector<Scalar> mean = DenseVector<Scalar>::Zero(prob.d);
    for (Eigen::Index i = 0; i < prob.n; ++i) {
      const DenseVector<Scalar> gi = node_gradient(prob, i, x);
      h += gi.squaredNorm();
      mean += gi;
    }
    h /= Scalar(prob.n);
    mean /= Scalar(prob.n);
    const Scalar g = mean.squaredNorm();
    report.point_stats.emplace_back(h, g);
    report.zeta_sq_est = std::max(report.zeta_sq_est, h - g);
  }
  return report;
}

enum class PartitionMode { random, sorted };

/// Splits sample indices across n nodes. random: seeded Fisher-Yates
/// shuffle, then near-equal contiguous chunks (sizes differ by at most 1).
/// sorted: stable sort by class id, then contiguous chunks, so each node
/// sees few classes (exactly one when classes are balanced and n equals
/// the class count).
inline std::vector<std::vector<std::size_t>> partition_labels(
    const std::vector<int>& labels, std::size_t n, PartitionMode mode,
    std::uint64_t seed) {
  if (labels.empty()) {
    throw std::invalid_argument("partition_labels: label list is empty");
  }
  if (n < 1 || n > labels.size()) {
    throw std::invalid_argument(
        "partition_labels: need 1 <= n <= number of samples");
  }
  std::vector<std::size_t> order(labels.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (mode == PartitionMode::random) {
    rng::CounterStream stream(rng::stream_key({seed, rng::kTagShuffle}));
    for (std::size_t i = order.size() - 1; i > 0; --i) {
      const std::size_t j = static_cast<std::size_t>(stream.bounded(i + 1));
      std::swap(order[i], order[j]);
    }
  } else {
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                       return labels[a] < labels[b];
                     });
  }
  std::vector<std::vector<std::size_t>> parts(n);
  const std::size_t base = labels.size() / n;
  const std::size_t extra = labels.size() % n;
  std::size_t pos = 0;
  for (std::size_t node = 0; node < n; ++node) {
    const std::size_t size = base + (node < extra ? 1 : 0);
    parts[node].assign(order.begin() + pos, order.begin() + pos + size);
    pos += size;
  }
  return parts;
}

}  // namespace gtsim

#endif  // GTSIM_PROBLEMS_HPP
