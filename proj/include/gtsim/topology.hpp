#ifndef GTSIM_TOPOLOGY_HPP
#define GTSIM_TOPOLOGY_HPP

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gtsim/types.hpp"

namespace gtsim {

/// Symmetric, doubly stochastic, nonnegative gossip weights together with
/// the cached contraction parameter p of the averaging step:
///
///   ||X W - Xbar||_F^2 <= (1 - p) ||X - Xbar||_F^2   for every d x n X.
///
/// p = 1 for a complete graph, p = 0 for a disconnected graph (identity).
/// Immutable after construction; safe to share across threads.
template <typename Scalar>
struct MixingMatrix {
  Eigen::Index n = 0;
  DenseMatrix<Scalar> weights;
  Scalar p = Scalar(0);
  std::string label;
};

namespace detail {

/// Largest-magnitude eigenvalue of a symmetric matrix by power iteration.
/// Fallback path for spectral_gap; also usable as an independent check.
template <typename Scalar>
Scalar spectral_norm_power_iteration(const DenseMatrix<Scalar>& m,
                                     Scalar tol = Scalar(1e-10),
                                     int max_iter = 100000) {
  const Eigen::Index n = m.rows();
  DenseVector<Scalar> v = DenseVector<Scalar>::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i)
    v[i] = Scalar(1) + Scalar(i % 7) / Scalar(8);
  v.normalize();
  Scalar lambda = Scalar(0);
  for (int it = 0; it < max_iter; ++it) {
    DenseVector<Scalar> w = m * v;
    const Scalar norm = w.norm();
    if (norm == Scalar(0)) return Scalar(0);
    w /= norm;
    const Scalar next = w.dot(m * w);
    if (std::abs(next - lambda) <= tol * std::max(Scalar(1), std::abs(next)) &&
        it > 2) {
      return std::abs(next);
    }
    lambda = next;
    v = std::move(w);
  }
  return std::abs(lambda);
}

template <typename Scalar>
DenseMatrix<Scalar> averaging_projector(Eigen::Index n) {
  return DenseMatrix<Scalar>::Constant(n, n, Scalar(1) / Scalar(n));
}

}  // namespace detail

/// Throws validation_error naming the violated property and the worst
/// offending entry. Checks, in order: squareness, symmetry (1e-12),
/// nonnegativity, row sums and column sums (1e-10).
template <typename Scalar>
void validate_mixing_weights(const DenseMatrix<Scalar>& w) {
  if (w.rows() != w.cols()) {
    throw validation_error("mixing matrix must be square, got " +
                           std::to_string(w.rows()) + "x" +
                           std::to_string(w.cols()));
  }
  const Eigen::Index n = w.rows();
  if (n == 0) throw validation_error("mixing matrix must be non-empty");

  Scalar worst = Scalar(0);
  Eigen::Index wi = 0, wj = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const Scalar dev = std::abs(w(i, j) - w(j, i));
      if (dev > worst) {
        worst = dev;
        wi = i;
        wj = j;
      }
    }
  }
  if (worst > Scalar(1e-12)) {
    std::ostringstream os;
    os << "mixing matrix not symmetric: |W(" << wi << "," << wj << ") - W("
       << wj << "," << wi << ")| = " << worst;
    throw validation_error(os.str());
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (w(i, j) < Scalar(0)) {
        std::ostringstream os;
        os << "mixing matrix has a negative entry: W(" << i << "," << j
           << ") = " << w(i, j);
        throw validation_error(os.str());
      }
    }
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar row = w.row(i).sum();
    if (std::abs(row - Scalar(1)) > Scalar(1e-10)) {
      std::ostringstream os;
      os << "mixing matrix row " << i << " sums to " << row << ", expected 1";
      throw validation_error(os.str());
    }
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    const Scalar col = w.col(j).sum();
    if (std::abs(col - Scalar(1)) > Scalar(1e-10)) {
      std::ostringstream os;
      os << "mixing matrix column " << j << " sums to " << col
         << ", expected 1";
      throw validation_error(os.str());
    }
  }
}

/// Contraction parameter p = 1 - rho^2 where rho is the spectral norm of
/// W - (1/n) * ones. For symmetric doubly stochastic W this is the tight
/// constant of the averaging contraction, so the sampled property
/// ||X W - Xbar||_F^2 <= (1-p) ||X - Xbar||_F^2 holds with equality in the
/// worst direction. Values within 1e-10 of 0 or 1 are snapped exactly.
template <typename Scalar>
Scalar spectral_gap(const DenseMatrix<Scalar>& w) {
  if (w.rows() != w.cols()) {
    throw validation_error("spectral_gap requires a square matrix");
  }
  const Eigen::Index n = w.rows();
  Scalar asym = Scalar(0);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      asym = std::max(asym, std::abs(w(i, j) - w(j, i)));
  if (asym > Scalar(1e-12)) {
    throw validation_error("spectral_gap requires a symmetric matrix, max "
                           "asymmetry " +
                           std::to_string(static_cast<double>(asym)));
  }

  const DenseMatrix<Scalar> centered =
      w - detail::averaging_projector<Scalar>(n);
  Scalar rho;
  Eigen::SelfAdjointEigenSolver<DenseMatrix<Scalar>> solver(
      centered, Eigen::EigenvaluesOnly);
  if (solver.info() == Eigen::Success) {
    const auto& ev = solver.eigenvalues();
    rho = std::max(std::abs(ev.minCoeff()), std::abs(ev.maxCoeff()));
  } else {
    rho = detail::spectral_norm_power_iteration(centered);
  }

  Scalar p = Scalar(1) - rho * rho;
  if (std::abs(p) <= Scalar(1e-10)) p = Scalar(0);
  if (std::abs(p - Scalar(1)) <= Scalar(1e-10)) p = Scalar(1);
  if (p < Scalar(0)) p = Scalar(0);
  if (p > Scalar(1)) p = Scalar(1);
  return p;
}

/// Validates the weights and computes p.
template <typename Scalar = double>
MixingMatrix<Scalar> from_weights(DenseMatrix<Scalar> weights,
                                  std::string label = "custom") {
  validate_mixing_weights(weights);
  MixingMatrix<Scalar> mix;
  mix.n = weights.rows();
  mix.p = spectral_gap(weights);
  mix.weights = std::move(weights);
  mix.label = std::move(label);
  return mix;
}

/// Ring with uniform weight 1/3 on self and both neighbours. Degenerate
/// sizes: n = 1 is the 1x1 identity, n = 2 uses weight 1/2 each. The
/// 3-ring coincides with the complete graph on 3 nodes.
template <typename Scalar = double>
MixingMatrix<Scalar> build_ring(Eigen::Index n) {
  if (n < 1) throw std::invalid_argument("build_ring: n must be >= 1");
  DenseMatrix<Scalar> w = DenseMatrix<Scalar>::Zero(n, n);
  if (n == 1) {
    w(0, 0) = Scalar(1);
  } else if (n == 2) {
    w.setConstant(Scalar(1) / Scalar(2));
  } else {
    const Scalar third = Scalar(1) / Scalar(3);
    for (Eigen::Index i = 0; i < n; ++i) {
      w(i, i) = third;
      w(i, (i + 1) % n) += third;
      w(i, (i + n - 1) % n) += third;
    }
  }
  return from_weights(std::move(w), "ring");
}

/// All weights 1/n; one gossip step averages exactly, p = 1.
template <typename Scalar = double>
MixingMatrix<Scalar> build_complete(Eigen::Index n) {
  if (n < 1) throw std::invalid_argument("build_complete: n must be >= 1");
  DenseMatrix<Scalar> w =
      DenseMatrix<Scalar>::Constant(n, n, Scalar(1) / Scalar(n));
  return from_weights(std::move(w), "complete");
}

/// Identity weights; gossip is a no-op, p = 0.
template <typename Scalar = double>
MixingMatrix<Scalar> build_disconnected(Eigen::Index n) {
  if (n < 1) throw std::invalid_argument("build_disconnected: n must be >= 1");
  DenseMatrix<Scalar> w = DenseMatrix<Scalar>::Identity(n, n);
  return from_weights(std::move(w), "disconnected");
}

/// Reads whitespace-separated rows of floats (one matrix row per line).
template <typename Scalar = double>
MixingMatrix<Scalar> load_mixing_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open mixing-matrix file: " + path);
  std::vector<std::vector<Scalar>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::vector<Scalar> row;
    double v;
    while (ls >> v) row.push_back(static_cast<Scalar>(v));
    if (!ls.eof()) {
      throw validation_error("malformed number in mixing-matrix file " + path +
                             ", line " + std::to_string(rows.size() + 1));
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    throw validation_error("mixing-matrix file is empty: " + path);
  }
  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  DenseMatrix<Scalar> w(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (static_cast<Eigen::Index>(rows[i].size()) != n) {
      throw validation_error("mixing-matrix file " + path + " row " +
                             std::to_string(i + 1) + " has " +
                             std::to_string(rows[i].size()) +
                             " entries, expected " + std::to_string(n));
    }
    for (Eigen::Index j = 0; j < n; ++j) w(i, j) = rows[i][j];
  }
  return from_weights(std::move(w), "file:" + path);
}

/// Dispatch by name: "ring" | "complete" | "disconnected" | "file:<path>".
/// For file topologies a positive n must match the file dimension.
template <typename Scalar = double>
MixingMatrix<Scalar> make_topology(const std::string& name, Eigen::Index n) {
  if (name == "ring") return build_ring<Scalar>(n);
  if (name == "complete") return build_complete<Scalar>(n);
  if (name == "disconnected") return build_disconnected<Scalar>(n);
  if (name.rfind("file:", 0) == 0) {
    auto mix = load_mixing_file<Scalar>(name.substr(5));
    if (n > 0 && mix.n != n) {
      throw validation_error(
          "topology file has " + std::to_string(mix.n) +
          " nodes but the configuration asks for " + std::to_string(n));
    }
    return mix;
  }
  throw config_error("unknown topology name: " + name);
}

}  // namespace gtsim

#endif  // GTSIM_TOPOLOGY_HPP
