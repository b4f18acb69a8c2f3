#include "ballwave/gibbs.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "ballwave/stats.hpp"
#include "doctest.h"

using namespace ballwave;

namespace {

// Reference values computed beforehand with 30-digit arithmetic.
constexpr double kExpMomN1 = 1.0206833694227933868;    // N=1, s=0,    c=0.1, +
constexpr double kExpMomN16P = 1.4954632461762872068;  // N=16, s=0.25, c=0.5, +
constexpr double kExpMomN16M = 0.69545676239645974168; // N=16, s=0.25, c=0.5, -
constexpr double kMeanL2SqN8 = 0.30952042049134322799;   // E ||u||_{L^2}^2
constexpr double kMeanH025SqN16 = 0.76147304862741925945;
constexpr double kLogWeightE1Quartic = -2.1113732011212109322;

}  // namespace

TEST_CASE("free-field draws are pure functions of seed and index") {
  const SpectralState a = sample_gaussian(8, 123, 7);
  const SpectralState b = sample_gaussian(8, 123, 7);
  CHECK(a == b);
  CHECK_FALSE(sample_gaussian(8, 123, 8) == a);
  CHECK_FALSE(sample_gaussian(8, 124, 7) == a);
  CHECK_THROWS_AS(sample_gaussian(0, 1, 0), std::invalid_argument);
}

TEST_CASE("draws at different truncations share their low modes") {
  const SpectralState small = sample_gaussian(16, 2024, 5);
  const SpectralState big = sample_gaussian(32, 2024, 5);
  for (int k = 0; k < 16; ++k) {
    CHECK(big.coeffs[k] == small.coeffs[k]);
  }
}

TEST_CASE("coefficient scale matches the eigenvalue decay") {
  // c_n = (h + i l)/z_n: across samples, E z_n^2 |c_n|^2 = 2.
  const int n_samples = 4000;
  double acc = 0.0;
  for (int i = 0; i < n_samples; ++i) {
    const SpectralState u = sample_gaussian(4, 99, static_cast<std::uint64_t>(i));
    acc += std::norm(u.coeffs[3]) * std::pow(4.0 * kPi, 2.0);
  }
  acc /= n_samples;
  CHECK(std::abs(acc - 2.0) < 0.12);  // ~3.8 sigma at this sample count
}

TEST_CASE("closed-form exponential moments") {
  CHECK(std::abs(exp_moment_product(1, 0.1, 0.0, MomentSign::kPlus) -
                 kExpMomN1) < 1e-15);
  CHECK(std::abs(exp_moment_product(16, 0.5, 0.25, MomentSign::kPlus) -
                 kExpMomN16P) < 1e-14);
  CHECK(std::abs(exp_moment_product(16, 0.5, 0.25, MomentSign::kMinus) -
                 kExpMomN16M) < 1e-14);
  const TailParameter tp(0.5, 0.25);
  CHECK(exp_moment_product(16, tp, MomentSign::kPlus) ==
        exp_moment_product(16, 0.5, 0.25, MomentSign::kPlus));
}

TEST_CASE("admissibility window of the tail parameter") {
  CHECK_NOTHROW(TailParameter(0.5, 0.45));
  CHECK_NOTHROW(TailParameter(0.5, -1.0));
  CHECK_THROWS_AS(TailParameter(-1.0, 0.0), std::domain_error);
  CHECK_THROWS_AS(TailParameter(0.0, 0.0), std::domain_error);
  CHECK_THROWS_AS(TailParameter(0.1, 0.5), std::domain_error);   // s at 1/2
  CHECK_THROWS_AS(TailParameter(5.0, 0.0), std::domain_error);   // 2c > pi^2
}

TEST_CASE("plus-sign moments blow up outside the window") {
  CHECK_THROWS_AS(exp_moment_product(4, 5.0, 0.0, MomentSign::kPlus),
                  std::domain_error);
  // At s >= 1/2 the minus-sign product decays to zero as N grows: the
  // norm itself diverges, which is the boundary diagnostic.
  const double m16 = exp_moment_product(16, 0.5, 0.6, MomentSign::kMinus);
  const double m64 = exp_moment_product(64, 0.5, 0.6, MomentSign::kMinus);
  const double m256 = exp_moment_product(256, 0.5, 0.6, MomentSign::kMinus);
  CHECK(m64 < m16);
  CHECK(m256 < m64);
  // ... with growing log-increments, while below 1/2 they shrink.
  CHECK(std::log(m64 / m256) > std::log(m16 / m64));
  const double p16 = exp_moment_product(16, 0.5, 0.25, MomentSign::kMinus);
  const double p64 = exp_moment_product(64, 0.5, 0.25, MomentSign::kMinus);
  const double p256 = exp_moment_product(256, 0.5, 0.25, MomentSign::kMinus);
  CHECK(std::log(p64 / p256) < std::log(p16 / p64));
}

TEST_CASE("interaction log-weight matches the quartic closed form") {
  SpectralState e1 = SpectralState::zero(1);
  e1.coeffs[0] = 1.0;
  const auto gl = RadialQuadrature::gauss_legendre(256);
  CHECK(std::abs(gibbs_log_weight(e1, 2.0, gl) - kLogWeightE1Quartic) < 1e-10);
  const auto uni = RadialQuadrature::uniform_sine(128);
  CHECK(std::abs(gibbs_log_weight(e1, 2.0, uni) - kLogWeightE1Quartic) < 1e-6);
  CHECK_THROWS_AS(gibbs_log_weight(e1, -0.5, uni), std::invalid_argument);

  // Defocusing sign: the weight never exceeds one.
  for (int i = 0; i < 50; ++i) {
    const SpectralState u = sample_gaussian(8, 7, static_cast<std::uint64_t>(i));
    CHECK(gibbs_log_weight(u, 1.0, uni) <= 0.0);
  }
}

TEST_CASE("monte carlo squared norms agree with the gaussian closed forms") {
  const int n = 20000;
  std::vector<double> l2(n), h025(n);
  const std::vector<double> unit_logw(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const SpectralState u =
        sample_gaussian(16, 12345, static_cast<std::uint64_t>(i));
    SpectralState low = u;
    low.coeffs.resize(8);
    const double l2n = sobolev_norm(low, 0.0);
    l2[i] = l2n * l2n;
    const double hn = sobolev_norm(u, 0.25);
    h025[i] = hn * hn;
  }
  const MeanSE m_l2 = weighted_mean_se(l2, unit_logw);
  CHECK(std::abs(m_l2.mean - kMeanL2SqN8) <= 3.5 * m_l2.se);
  const MeanSE m_h = weighted_mean_se(h025, unit_logw);
  CHECK(std::abs(m_h.mean - kMeanH025SqN16) <= 3.5 * m_h.se);
}

TEST_CASE("monte carlo exponential moment agrees with the product formula") {
  const int n = 20000;
  std::vector<double> y(n);
  const std::vector<double> unit_logw(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const SpectralState u =
        sample_gaussian(8, 4242, static_cast<std::uint64_t>(i));
    const double norm = sobolev_norm(u, 0.25);
    y[i] = std::exp(0.1 * norm * norm);
  }
  const MeanSE m = weighted_mean_se(y, unit_logw);
  const double exact = exp_moment_product(8, 0.1, 0.25, MomentSign::kPlus);
  CHECK(std::abs(m.mean - exact) <= 3.5 * m.se);
}

TEST_CASE("effective sample size") {
  WeightedEnsemble ens;
  ens.samples.resize(4);
  ens.log_weights = {0.0, 0.0, 0.0, 0.0};
  CHECK(std::abs(ens.ess() - 4.0) < 1e-12);
  ens.log_weights = {0.0, -1000.0, -1000.0, -1000.0};
  CHECK(std::abs(ens.ess() - 1.0) < 1e-12);
  // Invariant under a common shift (self-normalization).
  ens.log_weights = {700.0, 699.0, 698.0, 697.0};
  const double a = ens.ess();
  ens.log_weights = {0.0, -1.0, -2.0, -3.0};
  CHECK(std::abs(ens.ess() - a) < 1e-12);
}

TEST_CASE("ensemble sampling is parallel-deterministic") {
  const auto quad = RadialQuadrature::uniform_sine(64);
  const WeightedEnsemble a = sample_ensemble(8, 40, 1.0, 555, quad, 1);
  const WeightedEnsemble b = sample_ensemble(8, 40, 1.0, 555, quad, 4);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.samples[i] == b.samples[i]);
    CHECK(a.log_weights[i] == b.log_weights[i]);
  }
  CHECK(a.n_modes == 8);
  CHECK(a.alpha == 1.0);
  CHECK(a.master_seed == 555);
  CHECK(a.ess() > 1.0);
  CHECK(a.ess() <= 40.0 + 1e-9);
}

TEST_CASE("ensemble csv round-trips bit for bit") {
  const auto quad = RadialQuadrature::uniform_sine(64);
  const WeightedEnsemble ens = sample_ensemble(8, 25, 1.0, 777, quad, 2);
  const auto path =
      std::filesystem::temp_directory_path() / "ballwave_test_ensemble.csv";
  write_ensemble_csv(ens, path);
  const WeightedEnsemble back = read_ensemble_csv(path);
  std::filesystem::remove(path);
  REQUIRE(back.size() == ens.size());
  CHECK(back.n_modes == ens.n_modes);
  CHECK(back.alpha == ens.alpha);
  CHECK(back.master_seed == ens.master_seed);
  for (std::size_t i = 0; i < ens.size(); ++i) {
    CHECK(back.samples[i] == ens.samples[i]);
    CHECK(back.log_weights[i] == ens.log_weights[i]);
  }
}

TEST_CASE("chernoff envelope formula") {
  CHECK(std::abs(tail_probability_bound(2.0, 0.5, 1.5) -
                 1.5 * std::exp(-2.0)) < 1e-15);
  CHECK_THROWS_AS(tail_probability_bound(1.0, -0.5, 1.0), std::domain_error);
}
