#ifndef GTSIM_TYPES_HPP
#define GTSIM_TYPES_HPP

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace gtsim {

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = DenseMatrix<double>;
using Vector = DenseVector<double>;

/// A user-supplied object (mixing matrix, weight file, ...) violates a
/// structural invariant. The message names the failed property and the
/// worst-offending entry.
class validation_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad configuration: unknown key, missing key, type mismatch, or an
/// init mode that does not apply to the selected algorithm variant.
class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An operation was called in the wrong phase of a round.
class state_error : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Operation not defined for this object (e.g. closed-form optimum of a
/// non-convex objective).
class unsupported_error : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// The iterates blew up (non-finite entries or norm beyond the guard).
class divergence_error : public std::runtime_error {
 public:
  divergence_error(const std::string& what, int round)
      : std::runtime_error(what), round_(round) {}
  int round() const { return round_; }

 private:
  int round_;
};

}  // namespace gtsim

#endif  // GTSIM_TYPES_HPP
