#ifndef GTSIM_THEORY_HPP
#define GTSIM_THEORY_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "gtsim/types.hpp"

namespace gtsim {

/// Inputs to the round-complexity predictors. All entries must be strictly
/// positive except sigma, which may be zero.
template <typename Scalar = double>
struct RateInputs {
  Scalar sigma = Scalar(0);        // gradient-noise level
  Scalar nodes = Scalar(1);        // n
  Scalar local_steps = Scalar(1);  // K (batch multiplier for large batches)
  Scalar contraction = Scalar(1);  // p
  Scalar accuracy = Scalar(1);     // target epsilon
  Scalar smoothness = Scalar(1);   // L
  Scalar initial_gap = Scalar(1);  // F0 = f(x0) - f*
};

/// Predicted communication rounds split by regime. Unit constants: these
/// are scaling predictors, meant for ratio comparisons rather than
/// absolute counts.
template <typename Scalar>
struct RateBound {
  Scalar noise_term = Scalar(0);     // sigma^2-driven leading term
  Scalar middle_term = Scalar(0);    // sqrt(sigma)-regime term
  Scalar topology_term = Scalar(0);  // noise-free term
  Scalar total() const { return noise_term + middle_term + topology_term; }
};

namespace detail {

template <typename Scalar>
void validate_rate_inputs(const RateInputs<Scalar>& in) {
  if (in.sigma < Scalar(0)) {
    throw std::invalid_argument("rate inputs: sigma must be >= 0");
  }
  if (in.nodes <= Scalar(0) || in.local_steps <= Scalar(0) ||
      in.contraction <= Scalar(0) || in.accuracy <= Scalar(0) ||
      in.smoothness <= Scalar(0) || in.initial_gap <= Scalar(0)) {
    throw std::invalid_argument(
        "rate inputs: n, K, p, eps, L, F0 must be > 0");
  }
}

// Shared sub-expressions so that exact term ratios between variants
// (1/K on the noise term, sqrt(K) on the middle term) hold in floating
// point, not just algebraically.
template <typename Scalar>
Scalar noise_base(const RateInputs<Scalar>& in) {
  return in.sigma * in.sigma / (in.nodes * in.accuracy * in.accuracy) *
         in.smoothness * in.initial_gap;
}

template <typename Scalar>
Scalar middle_base(const RateInputs<Scalar>& in) {
  return in.sigma /
         (in.contraction * in.contraction * in.accuracy *
          std::sqrt(in.accuracy)) *
         in.smoothness * in.initial_gap;
}

template <typename Scalar>
Scalar topology_base(const RateInputs<Scalar>& in) {
  return Scalar(1) / (in.contraction * in.contraction * in.accuracy) *
         in.smoothness * in.initial_gap;
}

}  // namespace detail

/// (sigma^2/(n K eps^2) + sigma/(p^2 sqrt(K) eps^{3/2}) + 1/(p^2 eps)) L F0.
template <typename Scalar>
RateBound<Scalar> rate_kgt(const RateInputs<Scalar>& in) {
  detail::validate_rate_inputs(in);
  RateBound<Scalar> out;
  out.noise_term = detail::noise_base(in) / in.local_steps;
  out.middle_term = detail::middle_base(in) / std::sqrt(in.local_steps);
  out.topology_term = detail::topology_base(in);
  return out;
}

/// Without full-batch tracking the middle term loses the sqrt(K) factor;
/// with it the bound coincides with rate_kgt.
template <typename Scalar>
RateBound<Scalar> rate_periodical_gt(const RateInputs<Scalar>& in,
                                     bool full_batch_tracking) {
  if (full_batch_tracking) return rate_kgt(in);
  detail::validate_rate_inputs(in);
  RateBound<Scalar> out;
  out.noise_term = detail::noise_base(in) / in.local_steps;
  out.middle_term = detail::middle_base(in);
  out.topology_term = detail::topology_base(in);
  return out;
}

/// (sigma^2/(n eps^2) + sigma/(p^{3/2} eps^{3/2}) + 1/(p^2 eps)) L F0.
template <typename Scalar>
RateBound<Scalar> rate_gt(const RateInputs<Scalar>& in) {
  detail::validate_rate_inputs(in);
  RateBound<Scalar> out;
  out.noise_term = detail::noise_base(in);
  out.middle_term = in.sigma /
                    (in.contraction * std::sqrt(in.contraction) *
                     in.accuracy * std::sqrt(in.accuracy)) *
                    in.smoothness * in.initial_gap;
  out.topology_term = detail::topology_base(in);
  return out;
}

/// (sigma^2/(n K eps^2) + (zeta/p + sigma/sqrt(pK))/eps^{3/2} + 1/(p eps))
/// L F0; the only predictor with a heterogeneity term.
template <typename Scalar>
RateBound<Scalar> rate_dsgd(const RateInputs<Scalar>& in, Scalar zeta_bar) {
  detail::validate_rate_inputs(in);
  if (zeta_bar < Scalar(0)) {
    throw std::invalid_argument("rate_dsgd: zeta_bar must be >= 0");
  }
  RateBound<Scalar> out;
  out.noise_term = detail::noise_base(in) / in.local_steps;
  out.middle_term =
      (zeta_bar / in.contraction +
       in.sigma / std::sqrt(in.contraction * in.local_steps)) /
      (in.accuracy * std::sqrt(in.accuracy)) * in.smoothness * in.initial_gap;
  out.topology_term = Scalar(1) / (in.contraction * in.accuracy) *
                      in.smoothness * in.initial_gap;
  return out;
}

/// Explicit stepsize caps of the potential-function analysis:
/// eta_c_max = p/(96 v K L), eta_s = v p. eta_max is returned as the exact
/// product eta_c_max * eta_s, which equals p^2/(96 K L) up to rounding.
template <typename Scalar>
struct StepsizeCaps {
  Scalar eta_c_max = Scalar(0);
  Scalar eta_s = Scalar(0);
  Scalar eta_max = Scalar(0);
};

template <typename Scalar>
StepsizeCaps<Scalar> stepsize_caps(Scalar p, Scalar local_steps,
                                   Scalar smoothness, Scalar v) {
  if (p <= Scalar(0)) {
    throw std::invalid_argument("stepsize_caps: requires p > 0");
  }
  if (v <= Scalar(1)) {
    throw std::invalid_argument("stepsize_caps: requires v > 1");
  }
  if (local_steps < Scalar(1) || smoothness <= Scalar(0)) {
    throw std::invalid_argument("stepsize_caps: requires K >= 1 and L > 0");
  }
  StepsizeCaps<Scalar> caps;
  caps.eta_c_max = p / (Scalar(96) * v * local_steps * smoothness);
  caps.eta_s = v * p;
  caps.eta_max = caps.eta_c_max * caps.eta_s;
  return caps;
}

/// Constant stepsize minimizing Psi(eta) = r0/((T+1) eta) + b eta + e eta^2
/// subject to eta <= 1/u (u = 0 means no cap), picked among the closed-form
/// minimizers of the pairwise trade-offs and the cap. Also reports the
/// three-term guarantee 2 sqrt(b r0/(T+1)) + 2 e^{1/3} (r0/(T+1))^{2/3}
/// + u r0/(T+1), which Psi(eta) never exceeds.
template <typename Scalar>
struct TunedStepsize {
  Scalar eta = Scalar(0);
  Scalar psi = Scalar(0);
  Scalar bound = Scalar(0);
};

template <typename Scalar>
TunedStepsize<Scalar> tune_stepsize(Scalar r0, Scalar b, Scalar e, Scalar u,
                                    long horizon) {
  if (r0 < Scalar(0) || b < Scalar(0) || e < Scalar(0) || u < Scalar(0)) {
    throw std::invalid_argument("tune_stepsize: parameters must be >= 0");
  }
  if (horizon < 0) {
    throw std::invalid_argument("tune_stepsize: horizon must be >= 0");
  }
  const Scalar steps = static_cast<Scalar>(horizon) + Scalar(1);
  const Scalar r = r0 / steps;

  TunedStepsize<Scalar> out;
  out.bound = Scalar(2) * std::sqrt(b * r) +
              Scalar(2) * std::cbrt(e) * std::pow(r, Scalar(2) / Scalar(3)) +
              u * r;

  if (r0 == Scalar(0)) {
    out.eta = Scalar(0);
    out.psi = Scalar(0);
    return out;
  }

  const Scalar cap =
      u > Scalar(0) ? Scalar(1) / u : std::numeric_limits<Scalar>::infinity();
  std::vector<Scalar> candidates;
  if (u > Scalar(0)) candidates.push_back(cap);
  if (b > Scalar(0)) candidates.push_back(std::min(cap, std::sqrt(r / b)));
  if (e > Scalar(0)) {
    candidates.push_back(std::min(cap, std::cbrt(r / (Scalar(2) * e))));
    candidates.push_back(std::min(cap, std::cbrt(r / e)));
  }
  if (candidates.empty()) {
    // No curvature and no cap: Psi decreases towards 0 as eta grows.
    out.eta = std::numeric_limits<Scalar>::infinity();
    out.psi = Scalar(0);
    return out;
  }

  const auto psi_at = [&](Scalar eta) { return r / eta + b * eta + e * eta * eta; };
  out.eta = candidates.front();
  out.psi = psi_at(out.eta);
  for (Scalar eta : candidates) {
    const Scalar value = psi_at(eta);
    if (value < out.psi) {
      out.psi = value;
      out.eta = eta;
    }
  }
  return out;
}

}  // namespace gtsim

#endif  // GTSIM_THEORY_HPP
