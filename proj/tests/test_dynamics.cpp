#include "ballwave/dynamics.hpp"

#include <cmath>
#include <complex>
#include <vector>

#include "ballwave/gibbs.hpp"
#include "doctest.h"

using namespace ballwave;

namespace {

// Reference values computed beforehand with 30-digit arithmetic.
constexpr double kDb1E1Quartic = -5.8298765069513869285;  // alpha = 2, v = e_1
constexpr double kHE1Quartic = 7.0461754016658902416;     // alpha = 2
constexpr double kHalfPiSq = 4.9348022005446793094;       // pi^2 / 2
constexpr double kE1L3Cubed = 2.7443163184313646218;      // ||e_1||_{L^3}^3

FlowParams flow(const RadialQuadrature& quad, int n_modes, double dt,
                Scheme scheme = Scheme::kStrang, double alpha = 1.0) {
  FlowParams p;
  p.alpha = alpha;
  p.n_modes = n_modes;
  p.dt = dt;
  p.quad = &quad;
  p.scheme = scheme;
  return p;
}

}  // namespace

TEST_CASE("energy closed forms on a single mode") {
  SpectralState e1 = SpectralState::zero(1);
  e1.coeffs[0] = 1.0;
  const auto gl = RadialQuadrature::gauss_legendre(256);
  CHECK(std::abs(hamiltonian(e1, 2.0, gl) - kHE1Quartic) < 1e-10);
  CHECK(std::abs(hamiltonian(e1, 1.0, gl) -
                 (kHalfPiSq + kE1L3Cubed / 3.0)) < 1e-10);
  // Purely kinetic when the position part vanishes.
  SpectralState vel = SpectralState::zero(1);
  vel.coeffs[0] = {0.0, 1.0};
  CHECK(std::abs(hamiltonian(vel, 1.0, gl) - kHalfPiSq) < 1e-12);
}

TEST_CASE("vector field closed form on a single mode") {
  SpectralState e1 = SpectralState::zero(1);
  e1.coeffs[0] = 1.0;
  const auto gl = RadialQuadrature::gauss_legendre(256);
  const Tangent t = vector_field(e1, 2.0, gl);
  CHECK(t.da[0] == 0.0);
  CHECK(std::abs(t.db[0] - kDb1E1Quartic) < 1e-10);

  SpectralState mixed = SpectralState::zero(2);
  mixed.coeffs[0] = {0.0, 0.7};
  mixed.coeffs[1] = {0.0, -0.3};
  const Tangent tm = vector_field(mixed, 1.0, gl);
  CHECK(std::abs(tm.da[0] - kPi * 0.7) < 1e-14);
  CHECK(std::abs(tm.da[1] + 2.0 * kPi * 0.3) < 1e-14);
  // Zero position: the nonlinear pairing vanishes, db = -z a = 0.
  CHECK(std::abs(tm.db[0]) < 1e-12);
}

TEST_CASE("free flow is exactly 2-periodic and isometric") {
  const SpectralState u = sample_gaussian(32, 31337, 0);
  CHECK(sobolev_distance(linear_substep(u, 2.0), u, 0.0) == 0.0);
  CHECK(sobolev_distance(linear_substep(u, -2.0), u, 0.0) == 0.0);

  const SpectralState a = linear_substep(u, 0.37);
  const SpectralState b = linear_substep(u, 2.37);
  CHECK(sobolev_distance(a, b, 0.0) <= 1e-13 * sobolev_norm(u, 0.0));

  for (const double s : {0.0, 0.25, 1.0}) {
    const double n0 = sobolev_norm(u, s);
    CHECK(std::abs(sobolev_norm(a, s) - n0) <= 1e-13 * n0);
  }
}

TEST_CASE("free flow composes additively") {
  const SpectralState u = sample_gaussian(16, 8, 3);
  const SpectralState two_hops = linear_substep(linear_substep(u, 0.4), 0.35);
  const SpectralState one_hop = linear_substep(u, 0.75);
  CHECK(sobolev_distance(two_hops, one_hop, 0.0) <=
        1e-13 * sobolev_norm(u, 0.0));
  // Inverse composition.
  const SpectralState back = linear_substep(linear_substep(u, 0.6), -0.6);
  CHECK(sobolev_distance(back, u, 0.0) <= 1e-14 * sobolev_norm(u, 0.0));
}

TEST_CASE("potential kick moves only velocities and composes additively") {
  const auto quad = RadialQuadrature::uniform_sine(64);
  const SpectralState u = sample_gaussian(8, 9, 1);
  const SpectralState kicked = nonlinear_substep(u, 0.3, 1.0, quad);
  for (int k = 0; k < 8; ++k) {
    CHECK(kicked.coeffs[k].real() == u.coeffs[k].real());
  }
  const SpectralState twice =
      nonlinear_substep(nonlinear_substep(u, 0.1, 1.0, quad), 0.2, 1.0, quad);
  for (int k = 0; k < 8; ++k) {
    CHECK(std::abs(twice.coeffs[k] - kicked.coeffs[k]) <= 1e-14);
  }
}

TEST_CASE("parameter validation") {
  const auto quad = RadialQuadrature::uniform_sine(64);  // capacity 8
  CHECK_NOTHROW(flow(quad, 8, 1e-3).validate());
  CHECK_THROWS_AS(flow(quad, 9, 1e-3).validate(), CapacityError);
  CHECK_THROWS_AS(flow(quad, 0, 1e-3).validate(), std::invalid_argument);
  CHECK_THROWS_AS(flow(quad, 4, 0.0).validate(), std::invalid_argument);
  CHECK_THROWS_AS(flow(quad, 4, 1e-3, Scheme::kStrang, 2.0).validate(),
                  std::invalid_argument);
  CHECK_THROWS_AS(flow(quad, 4, 1e-3, Scheme::kStrang, 0.0).validate(),
                  std::invalid_argument);
  FlowParams no_quad;
  no_quad.n_modes = 4;
  CHECK_THROWS_AS(no_quad.validate(), std::invalid_argument);
}

TEST_CASE("states above the active truncation must vanish") {
  const auto quad = RadialQuadrature::uniform_sine(128);
  SpectralState padded = SpectralState::zero(12);
  padded.coeffs[0] = 1.0;
  CHECK_NOTHROW(evolve(padded, flow(quad, 8, 1e-2), 0.05));
  padded.coeffs[10] = 1e-12;
  CHECK_THROWS_AS(evolve(padded, flow(quad, 8, 1e-2), 0.05),
                  std::invalid_argument);
}

TEST_CASE("embedded storage evolves identically to tight storage") {
  const auto quad = RadialQuadrature::uniform_sine(128);
  const SpectralState tight = sample_gaussian(8, 21, 4);
  SpectralState padded = tight;
  padded.coeffs.resize(12, {0.0, 0.0});
  const SpectralState a = evolve(tight, flow(quad, 8, 1e-3), 0.1);
  const SpectralState b = evolve(padded, flow(quad, 8, 1e-3), 0.1);
  for (int k = 0; k < 8; ++k) CHECK(a.coeffs[k] == b.coeffs[k]);
  for (int k = 8; k < 12; ++k) {
    CHECK(b.coeffs[k] == std::complex<double>{0.0, 0.0});
  }
}

TEST_CASE("strang flow reverses to the initial data") {
  const auto quad = RadialQuadrature::uniform_sine(64);
  const SpectralState u0 = sample_gaussian(8, 77, 0);
  const FlowParams p = flow(quad, 8, 1e-3);
  const SpectralState fwd = evolve(u0, p, 0.2);
  const SpectralState back = evolve(fwd, p, -0.2);
  CHECK(sobolev_distance(back, u0, 0.0) <= 1e-11 * sobolev_norm(u0, 0.0));
}

TEST_CASE("splitting with the kick disabled reproduces the free flow") {
  const auto quad = RadialQuadrature::uniform_sine(64);
  FlowParams p = flow(quad, 8, 1e-3);
  p.nonlinear = false;
  const SpectralState u0 = sample_gaussian(8, 5, 2);
  const SpectralState split = evolve(u0, p, 0.3);
  const SpectralState exact = linear_substep(u0, 0.3);
  CHECK(sobolev_distance(split, exact, 0.0) <=
        1e-12 * sobolev_norm(u0, 0.0));
}

TEST_CASE("energy drift shrinks fourfold when dt halves") {
  const auto quad = RadialQuadrature::uniform_sine(64);
  const SpectralState u0 = sample_gaussian(8, 2718, 0);
  const auto max_drift = [&](double dt) {
    TrajectoryRecord rec;
    ObserverSpec obs;
    obs.stride = 1;
    evolve_recording(u0, flow(quad, 8, dt), 0.5, obs, rec);
    double d = 0.0;
    for (const double e : rec.energies) {
      d = std::max(d, std::abs(e - rec.energies[0]) /
                          std::abs(rec.energies[0]));
    }
    return d;
  };
  const double coarse = max_drift(2e-3);
  const double fine = max_drift(1e-3);
  CHECK(fine <= 1e-5);
  CHECK(coarse / fine >= 3.2);
  CHECK(coarse / fine <= 4.8);
}

TEST_CASE("first and second order self-convergence rates") {
  const auto quad = RadialQuadrature::uniform_sine(64);
  const SpectralState u0 = sample_gaussian(6, 1618, 0);
  const auto endpoint_gap = [&](Scheme scheme, double dt) {
    const SpectralState a = evolve(u0, flow(quad, 6, dt, scheme), 0.1);
    const SpectralState b = evolve(u0, flow(quad, 6, dt / 2.0, scheme), 0.1);
    return sobolev_distance(a, b, 0.0);
  };
  const double strang_ratio =
      endpoint_gap(Scheme::kStrang, 4e-3) / endpoint_gap(Scheme::kStrang, 2e-3);
  CHECK(strang_ratio >= 3.3);
  CHECK(strang_ratio <= 4.7);
  const double lie_ratio =
      endpoint_gap(Scheme::kLie, 4e-3) / endpoint_gap(Scheme::kLie, 2e-3);
  CHECK(lie_ratio >= 1.6);
  CHECK(lie_ratio <= 2.6);
}

TEST_CASE("recording honors the stride and the landing step") {
  const auto quad = RadialQuadrature::uniform_sine(64);
  TrajectoryRecord rec;
  ObserverSpec obs;
  obs.stride = 10;
  obs.sobolev_indices = {0.0, 0.25};
  obs.mode_indices = {1, 3};
  const SpectralState u0 = sample_gaussian(8, 33, 0);
  evolve_recording(u0, flow(quad, 8, 1e-3), 0.1005, obs, rec);
  REQUIRE(rec.times.size() >= 3);
  CHECK(rec.times.front() == 0.0);
  CHECK(rec.times.back() == 0.1005);
  CHECK(rec.times[1] == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(rec.energies.size() == rec.times.size());
  REQUIRE(rec.sobolev.size() == 2);
  CHECK(rec.sobolev[0].size() == rec.times.size());
  REQUIRE(rec.modes.size() == 2);
  CHECK(rec.modes[1].size() == rec.times.size());

  // Zero horizon: exactly the initial row.
  TrajectoryRecord single;
  evolve_recording(u0, flow(quad, 8, 1e-3), 0.0, obs, single);
  CHECK(single.times.size() == 1);

  ObserverSpec bad = obs;
  bad.mode_indices = {9};
  TrajectoryRecord scratch;
  CHECK_THROWS_AS(evolve_recording(u0, flow(quad, 8, 1e-3), 0.1, bad, scratch),
                  std::invalid_argument);
}

TEST_CASE("checkpoint visiting matches one-shot evolution") {
  const auto quad = RadialQuadrature::uniform_sine(64);
  const FlowParams p = flow(quad, 8, 1e-3);
  const SpectralState u0 = sample_gaussian(8, 55, 0);

  SpectralState at_03;
  const std::vector<double> single = {0.3};
  evolve_checkpoints(u0, p, single,
                     [&](std::size_t, double, const SpectralState& s) {
                       at_03 = s;
                     });
  CHECK(at_03 == evolve(u0, p, 0.3));

  std::vector<SpectralState> seen(2);
  const std::vector<double> both = {0.15, 0.3};
  evolve_checkpoints(u0, p, both,
                     [&](std::size_t k, double, const SpectralState& s) {
                       seen[k] = s;
                     });
  CHECK(seen[0] == evolve(u0, p, 0.15));
  CHECK(sobolev_distance(seen[1], at_03, 0.25) <= 1e-6);

  const std::vector<double> decreasing = {0.2, 0.1};
  CHECK_THROWS_AS(
      evolve_checkpoints(u0, p, decreasing,
                         [](std::size_t, double, const SpectralState&) {}),
      std::invalid_argument);
}

TEST_CASE("picard scheme is rejected by the stepper entry point") {
  const auto quad = RadialQuadrature::uniform_sine(64);
  const SpectralState u0 = sample_gaussian(8, 2, 0);
  CHECK_THROWS_AS(evolve(u0, flow(quad, 8, 1e-3, Scheme::kPicard), 0.1),
                  std::invalid_argument);
}

TEST_CASE("phase-space divergence vanishes identically") {
  const auto quad = RadialQuadrature::uniform_sine(64);
  for (std::uint64_t i = 0; i < 5; ++i) {
    const SpectralState u = sample_gaussian(8, 4040, i);
    CHECK(divergence_probe(u, 1.0, quad, 1e-5) == 0.0);
  }
  CHECK_THROWS_AS(divergence_probe(sample_gaussian(4, 1, 0), 1.0, quad, 0.0),
                  std::invalid_argument);
}

TEST_CASE("fixed-point solver agrees with the splitting integrator") {
  const auto quad = RadialQuadrature::uniform_sine(64);
  const FlowParams p = flow(quad, 8, 1e-4);
  const SpectralState u0 = sample_gaussian(8, 1234, 0);
  const PicardResult res = picard_solve(u0, 0.05, p, 8, 251, 0.25);
  const SpectralState split = evolve(u0, p, 0.05);
  CHECK(sobolev_distance(res.u, split, 0.25) <= 1e-6);
  REQUIRE(res.iteration_deltas.size() == 8);
  // Geometric contraction until the resolution floor.
  const double floor_gap = 1e-13 * (1.0 + sobolev_norm(u0, 0.25));
  for (std::size_t k = 1; k < res.iteration_deltas.size(); ++k) {
    if (res.iteration_deltas[k] > floor_gap) {
      CHECK(res.iteration_deltas[k] <= 0.5 * res.iteration_deltas[k - 1]);
    }
  }
}

TEST_CASE("fixed-point solver reduces to the free flow without the kick") {
  const auto quad = RadialQuadrature::uniform_sine(64);
  FlowParams p = flow(quad, 8, 1e-3);
  p.nonlinear = false;
  const SpectralState u0 = sample_gaussian(8, 11, 0);
  const PicardResult res = picard_solve(u0, 0.3, p, 3, 41, 0.25);
  CHECK(sobolev_distance(res.u, linear_substep(u0, 0.3), 0.25) <=
        1e-13 * sobolev_norm(u0, 0.25));
}

TEST_CASE("fixed-point solver input validation") {
  const auto quad = RadialQuadrature::uniform_sine(64);
  const FlowParams p = flow(quad, 8, 1e-3);
  const SpectralState u0 = sample_gaussian(8, 3, 0);
  CHECK_THROWS_AS(picard_solve(u0, 0.0, p, 4, 41, 0.25),
                  std::invalid_argument);
  CHECK_THROWS_AS(picard_solve(u0, 0.1, p, 0, 41, 0.25),
                  std::invalid_argument);
  CHECK_THROWS_AS(picard_solve(u0, 0.1, p, 4, 40, 0.25),
                  std::invalid_argument);
}

TEST_CASE("local-existence heuristic window") {
  CHECK(std::abs(picard_time_heuristic(0.0) - 0.1) < 1e-15);
  CHECK(std::abs(picard_time_heuristic(1.0) - 0.025) < 1e-15);
  CHECK(picard_time_heuristic(3.0, 0.2, 1.0) == doctest::Approx(0.05));
  CHECK_THROWS_AS(picard_time_heuristic(-1.0), std::invalid_argument);
}
