#pragma once

#include <functional>
#include <span>
#include <vector>

#include "ballwave/spectral.hpp"

namespace ballwave {

enum class Scheme { kStrang, kLie, kPicard };

// Parameters of the truncated flow. n_modes is the active truncation: the
// kick pairs the nonlinearity onto modes 1..n_modes only, and states with
// longer storage must be zero above it. nonlinear = false freezes the kick
// (free flow), used by control experiments.
struct FlowParams {
  double alpha = 1.0;
  int n_modes = 0;
  double dt = 1e-3;
  const RadialQuadrature* quad = nullptr;
  Scheme scheme = Scheme::kStrang;
  bool nonlinear = true;

  void validate() const;
};

// Conserved energy
//   H = 1/2 sum z_n^2 |c_n|^2 + 1/(alpha+2) ||Re u||_{L^{alpha+2}}^{alpha+2}.
double hamiltonian(const SpectralState&, double alpha, const RadialQuadrature&);

struct Tangent {
  std::vector<double> da;
  std::vector<double> db;
};

// Right-hand side in real coordinates c_n = a_n + i b_n:
//   da_n = z_n b_n,   db_n = -z_n a_n - <|v|^alpha v, e_n> / z_n,
// with v = sum a_m e_m. Divergence-free: da_n has no a_n dependence and
// db_n has no b_n dependence.
Tangent vector_field(const SpectralState&, double alpha, const RadialQuadrature&);

// Exact free flow c_n -> exp(-i z_n t) c_n. Isometry of every H^s and
// 2-periodic in t, since all z_n are integer multiples of pi.
SpectralState linear_substep(SpectralState, double t);

// Exact potential kick: Re u is untouched, b_n -= t <|v|^alpha v, e_n>/z_n.
SpectralState nonlinear_substep(SpectralState, double t, double alpha,
                                const RadialQuadrature&);

// Second-order symmetric composition linear(dt/2) o kick(dt) o linear(dt/2).
SpectralState strang_step(SpectralState, const FlowParams&);

// First-order composition linear(dt) o kick(dt).
SpectralState lie_step(SpectralState, const FlowParams&);

struct ObserverSpec {
  std::vector<double> sobolev_indices;
  std::vector<int> mode_indices;  // 1-based
  int stride = 1;                 // record every stride-th step
};

struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<double> energies;
  std::vector<double> sobolev_indices;
  std::vector<std::vector<double>> sobolev;                // [s][time]
  std::vector<int> mode_indices;
  std::vector<std::vector<std::complex<double>>> modes;    // [k][time]
};

// Composed flow to t_final (either sign): full steps of params.dt plus one
// fractional step landing on t_final. Throws on a non-finite state.
SpectralState evolve(SpectralState, const FlowParams&, double t_final);

// As evolve, recording observables at t = 0, every stride-th step and the
// final time.
SpectralState evolve_recording(SpectralState, const FlowParams&, double t_final,
                               const ObserverSpec&, TrajectoryRecord&);

// Visits strictly increasing checkpoint times (first >= 0), invoking
// visit(k, t_k, state) at each; all runs sharing a checkpoint grid see the
// same step sequence.
SpectralState evolve_checkpoints(
    SpectralState, const FlowParams&, std::span<const double> times,
    const std::function<void(std::size_t, double, const SpectralState&)>& visit);

// Central finite-difference estimate of the phase-space divergence
// sum_n (d da_n/d a_n + d db_n/d b_n) at the given point; analytically zero.
double divergence_probe(const SpectralState&, double alpha,
                        const RadialQuadrature&, double h);

struct PicardResult {
  SpectralState u;                        // solution at t_final
  std::vector<double> iteration_deltas;   // sup-over-mesh H^sigma gaps
};

// Duhamel fixed point on [0, t_final]:
//   u(t) = S(t) u0 - i int_0^t S(t - tau) W P_N F(u(tau)) dtau,
// F(u) = |Re u|^alpha Re u, W the inverse of sqrt(-Laplace), iterated from
// u^0 = S(t) u0 with the tau-integral by composite Simpson on a uniform
// mesh. Throws if successive iterate gaps stop halving while above the
// resolution floor. Independent of the splitting stepper by construction.
PicardResult picard_solve(const SpectralState& u0, double t_final,
                          const FlowParams&, int n_iterations, int time_mesh,
                          double sigma);

// Advisory local-existence window c (1 + ||u0||_{H^sigma})^{-gamma}. The
// enforced contract is the contraction diagnostic above, which covers the
// cases where this conservative estimate is pessimistic.
double picard_time_heuristic(double norm_u0, double c = 0.1,
                             double gamma = 2.0);

}  // namespace ballwave
