#include <doctest.h>

#include <cmath>

#include "gtsim/rng.hpp"
#include "gtsim/theory.hpp"

namespace {

gtsim::RateInputs<double> base_inputs() {
  gtsim::RateInputs<double> in;
  in.sigma = 1.0;
  in.nodes = 1.0;
  in.local_steps = 1.0;
  in.contraction = 1.0;
  in.accuracy = 0.01;
  in.smoothness = 1.0;
  in.initial_gap = 1.0;
  return in;
}

}  // namespace

TEST_CASE("rate predictors: plug-in values") {
  const auto in = base_inputs();
  // 1/eps^2 + 1/eps^{3/2} + 1/eps = 10^4 + 10^3 + 10^2
  CHECK(gtsim::rate_kgt(in).total() == doctest::Approx(11100.0).epsilon(1e-12));

  auto silent = in;
  silent.sigma = 0.0;
  silent.contraction = 0.5;
  const auto bound = gtsim::rate_kgt(silent);
  CHECK(bound.noise_term == 0.0);
  CHECK(bound.middle_term == 0.0);
  CHECK(bound.total() ==
        doctest::Approx(1.0 / (0.25 * 0.01)).epsilon(1e-12));

  auto invalid = in;
  invalid.accuracy = 0.0;
  CHECK_THROWS_AS(gtsim::rate_kgt(invalid), std::invalid_argument);
}

TEST_CASE("rate predictors: exact structural ratios") {
  auto in = base_inputs();
  in.nodes = 10.0;
  in.contraction = 0.3;
  for (double k : {1.0, 2.0, 4.0, 16.0, 64.0}) {
    in.local_steps = k;
    const auto kgt = gtsim::rate_kgt(in);
    const auto gt = gtsim::rate_gt(in);
    const auto pgt = gtsim::rate_periodical_gt(in, false);
    const auto pgt_full = gtsim::rate_periodical_gt(in, true);

    // leading term improves by exactly K, bitwise
    CHECK(kgt.noise_term == gt.noise_term / k);
    CHECK(pgt.noise_term == kgt.noise_term);
    // full-batch tracking coincides with the kgt bound
    CHECK(pgt_full.noise_term == kgt.noise_term);
    CHECK(pgt_full.middle_term == kgt.middle_term);
    CHECK(pgt_full.topology_term == kgt.topology_term);
    // middle-term ratio is sqrt(K)
    CHECK(pgt.middle_term / kgt.middle_term ==
          doctest::Approx(std::sqrt(k)).epsilon(1e-12));
    // kgt never loses to periodical tracking without the full batch
    CHECK(kgt.total() <= pgt.total());
  }
}

TEST_CASE("rate predictors: monotonicity and heterogeneity") {
  auto in = base_inputs();
  in.nodes = 10.0;
  in.local_steps = 4.0;

  double previous = 0.0;
  for (double zeta : {0.0, 0.5, 1.0, 5.0}) {
    const double total = gtsim::rate_dsgd(in, zeta).total();
    CHECK(total >= previous);
    previous = total;
  }
  const auto homo = gtsim::rate_dsgd(in, 0.0);
  auto with_more_noise = in;
  with_more_noise.sigma = 0.0;
  CHECK(gtsim::rate_dsgd(with_more_noise, 0.0).middle_term == 0.0);
  CHECK(homo.middle_term > 0.0);

  // decreasing in p, increasing in sigma, F0 and 1/eps
  double last = std::numeric_limits<double>::infinity();
  for (double p : {0.05, 0.1, 0.2, 0.5, 1.0}) {
    auto probe = in;
    probe.contraction = p;
    const double total = gtsim::rate_kgt(probe).total();
    CHECK(total <= last);
    last = total;
  }
  last = 0.0;
  for (double sigma : {0.0, 0.5, 1.0, 2.0}) {
    auto probe = in;
    probe.sigma = sigma;
    CHECK(gtsim::rate_kgt(probe).total() >= last);
    last = gtsim::rate_kgt(probe).total();
  }
  last = 0.0;
  for (double f0 : {0.1, 1.0, 10.0}) {
    auto probe = in;
    probe.initial_gap = f0;
    CHECK(gtsim::rate_kgt(probe).total() >= last);
    last = gtsim::rate_kgt(probe).total();
  }
  last = std::numeric_limits<double>::infinity();
  for (double eps : {1e-4, 1e-3, 1e-2, 1e-1}) {
    auto probe = in;
    probe.accuracy = eps;
    CHECK(gtsim::rate_kgt(probe).total() >= 0.0);
    CHECK(gtsim::rate_kgt(probe).total() <= last);
    last = gtsim::rate_kgt(probe).total();
  }
}

TEST_CASE("stepsize caps") {
  const auto caps = gtsim::stepsize_caps(1.0, 1.0, 1.0, 2.0);
  CHECK(caps.eta_c_max == doctest::Approx(1.0 / 192.0).epsilon(1e-15));
  CHECK(caps.eta_s == 2.0);
  CHECK(caps.eta_max == doctest::Approx(1.0 / 96.0).epsilon(1e-15));

  // product identity holds exactly by construction
  CHECK(caps.eta_max == caps.eta_c_max * caps.eta_s);
  for (double p : {0.1, 0.3, 0.9}) {
    for (double k : {1.0, 8.0, 32.0}) {
      const auto c = gtsim::stepsize_caps(p, k, 10.0, 1.5);
      CHECK(c.eta_max == c.eta_c_max * c.eta_s);
      CHECK(c.eta_max ==
            doctest::Approx(p * p / (96.0 * k * 10.0)).epsilon(1e-14));
      const auto doubled = gtsim::stepsize_caps(p, 2.0 * k, 10.0, 1.5);
      CHECK(doubled.eta_c_max == doctest::Approx(c.eta_c_max / 2).epsilon(1e-15));
      CHECK(doubled.eta_max == doctest::Approx(c.eta_max / 2).epsilon(1e-15));
    }
  }

  CHECK_THROWS_AS(gtsim::stepsize_caps(1.0, 1.0, 1.0, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(gtsim::stepsize_caps(0.0, 1.0, 1.0, 2.0),
                  std::invalid_argument);
}

TEST_CASE("tune_stepsize: closed-form corners") {
  {
    // no curvature, no cap: balance the first two terms
    const auto tuned = gtsim::tune_stepsize(2.0, 8.0, 0.0, 0.0, 3L);
    const double r = 2.0 / 4.0;
    CHECK(tuned.eta == doctest::Approx(std::sqrt(r / 8.0)).epsilon(1e-15));
    CHECK(tuned.psi == doctest::Approx(2.0 * std::sqrt(8.0 * r)).epsilon(1e-15));
  }
  {
    // only the cap binds
    const auto tuned = gtsim::tune_stepsize(2.0, 0.0, 0.0, 5.0, 3L);
    CHECK(tuned.eta == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(tuned.psi == doctest::Approx(5.0 * 2.0 / 4.0).epsilon(1e-15));
    CHECK(tuned.psi == doctest::Approx(tuned.bound).epsilon(1e-15));
  }
  CHECK_THROWS_AS(gtsim::tune_stepsize(-1.0, 0.0, 0.0, 0.0, 3L),
                  std::invalid_argument);
}

TEST_CASE("tune_stepsize: never exceeds the three-term guarantee") {
  gtsim::rng::CounterStream stream(gtsim::rng::stream_key({0x7147ULL}));
  const auto log_uniform = [&](double lo, double hi) {
    return lo * std::pow(hi / lo, stream.uniform());
  };
  for (int trial = 0; trial < 1000; ++trial) {
    const double r0 = log_uniform(1e-6, 1e4);
    const double b = (trial % 5 == 0) ? 0.0 : log_uniform(1e-6, 1e6);
    const double e = (trial % 7 == 0) ? 0.0 : log_uniform(1e-6, 1e9);
    const double u = (trial % 3 == 0) ? 0.0 : log_uniform(1e-3, 1e6);
    const long horizon = static_cast<long>(stream.bounded(100000));

    const auto tuned = gtsim::tune_stepsize(r0, b, e, u, horizon);
    REQUIRE(tuned.psi <= tuned.bound * (1.0 + 1e-12));
    if (u > 0.0) REQUIRE(tuned.eta <= 1.0 / u * (1.0 + 1e-12));

    // grid-scan oracle: the returned candidate is near-optimal
    const double steps = static_cast<double>(horizon) + 1.0;
    const auto psi_at = [&](double eta) {
      return r0 / (steps * eta) + b * eta + e * eta * eta;
    };
    const double cap = u > 0.0 ? 1.0 / u : 1e9;
    double grid_best = std::numeric_limits<double>::infinity();
    for (int g = 0; g < 2000; ++g) {
      const double eta = 1e-12 * std::pow(cap / 1e-12, (g + 1) / 2000.0);
      grid_best = std::min(grid_best, psi_at(eta));
    }
    REQUIRE(tuned.psi <= grid_best * 1.1 + 1e-15);
  }
}
