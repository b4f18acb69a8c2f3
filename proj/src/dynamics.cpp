#include "ballwave/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ballwave {

namespace {

void require_active_truncation(const SpectralState& s, int n_active,
                               const char* op) {
  if (n_active < 1) {
    throw std::invalid_argument(std::string(op) + ": active mode count must be >= 1");
  }
  if (s.n_modes() < n_active) {
    throw std::invalid_argument(std::string(op) + ": state has " +
                                std::to_string(s.n_modes()) +
                                " modes, fewer than active truncation " +
                                std::to_string(n_active));
  }
  for (int k = n_active; k < s.n_modes(); ++k) {
    if (s.coeffs[k] != std::complex<double>{0.0, 0.0}) {
      throw std::invalid_argument(std::string(op) +
                                  ": state carries nonzero modes above the "
                                  "active truncation " +
                                  std::to_string(n_active));
    }
  }
}

// <|v|^alpha v, e_n> for n = 1..n_active, with v = sum_{n<=n_active} a_n e_n.
std::vector<double> kick_pairing(const SpectralState& s, int n_active,
                                 double alpha, const RadialQuadrature& quad) {
  std::vector<double> a(static_cast<std::size_t>(n_active));
  for (int k = 0; k < n_active; ++k) a[k] = s.coeffs[k].real();
  auto v = synthesize_real(a, quad);
  for (auto& x : v) x = std::pow(std::abs(x), alpha) * x;
  return analyze_real(v, quad, n_active);
}

// c_n *= exp(-i z_n t). All z_n are integer multiples of pi, so the map is
// exactly 2-periodic in t; reducing t mod 2 first keeps the computed phase
// accurate for every mode index and makes the periodicity hold to rounding.
void linear_inplace(SpectralState& s, double t) {
  const double t_red = std::fmod(t, 2.0);
  for (int k = 0; k < s.n_modes(); ++k) {
    s.coeffs[k] *= std::polar(1.0, -kPi * (k + 1) * t_red);
  }
}

void kick_inplace(SpectralState& s, int n_active, double t, double alpha,
                  const RadialQuadrature& quad) {
  const auto f = kick_pairing(s, n_active, alpha, quad);
  for (int k = 0; k < n_active; ++k) {
    s.coeffs[k].imag(s.coeffs[k].imag() - t * f[k] / (kPi * (k + 1)));
  }
}

void step_inplace(SpectralState& s, const FlowParams& p, double h) {
  switch (p.scheme) {
    case Scheme::kStrang:
      linear_inplace(s, 0.5 * h);
      if (p.nonlinear) kick_inplace(s, p.n_modes, h, p.alpha, *p.quad);
      linear_inplace(s, 0.5 * h);
      break;
    case Scheme::kLie:
      if (p.nonlinear) kick_inplace(s, p.n_modes, h, p.alpha, *p.quad);
      linear_inplace(s, h);
      break;
    case Scheme::kPicard:
      throw std::invalid_argument(
          "evolve: the picard scheme is served by picard_solve");
  }
}

// Full steps of p.dt plus one fractional step landing on t_final; calls
// on_step(t) after each step with the signed elapsed time.
template <typename F>
void advance(SpectralState& s, const FlowParams& p, double t_final,
             const F& on_step) {
  if (t_final == 0.0) return;
  const double sign = t_final < 0.0 ? -1.0 : 1.0;
  const double total = std::abs(t_final);
  const auto n_full = static_cast<long long>(std::floor(total / p.dt));
  double rem = total - static_cast<double>(n_full) * p.dt;
  if (rem <= p.dt * 1e-9) rem = 0.0;
  for (long long k = 1; k <= n_full; ++k) {
    step_inplace(s, p, sign * p.dt);
    if (!s.finite()) {
      throw std::runtime_error(
          "evolve: state left the finite range at step " + std::to_string(k) +
          " (t = " + std::to_string(sign * static_cast<double>(k) * p.dt) + ")");
    }
    on_step(rem == 0.0 && k == n_full ? t_final
                                      : sign * static_cast<double>(k) * p.dt);
  }
  if (rem > 0.0) {
    step_inplace(s, p, sign * rem);
    if (!s.finite()) {
      throw std::runtime_error("evolve: state left the finite range on the "
                               "fractional step to t_final");
    }
    on_step(t_final);
  }
}

}  // namespace

void FlowParams::validate() const {
  if (quad == nullptr) {
    throw std::invalid_argument("FlowParams: quadrature is required");
  }
  if (n_modes < 1) {
    throw std::invalid_argument("FlowParams: n_modes must be >= 1");
  }
  if (n_modes > quad->capacity()) {
    throw CapacityError("FlowParams: n_modes " + std::to_string(n_modes) +
                        " exceeds quadrature capacity " +
                        std::to_string(quad->capacity()));
  }
  if (!(alpha > 0.0) || !(alpha < 2.0)) {
    throw std::invalid_argument("FlowParams: alpha must lie in (0,2), got " +
                                std::to_string(alpha));
  }
  if (!(dt > 0.0)) {
    throw std::invalid_argument("FlowParams: dt must be positive");
  }
}

double hamiltonian(const SpectralState& s, double alpha,
                   const RadialQuadrature& quad) {
  double kinetic = 0.0;
  for (int k = 0; k < s.n_modes(); ++k) {
    const double z = kPi * (k + 1);
    kinetic += z * z * std::norm(s.coeffs[k]);
  }
  return 0.5 * kinetic + real_lp_pow(s, alpha + 2.0, quad) / (alpha + 2.0);
}

Tangent vector_field(const SpectralState& s, double alpha,
                     const RadialQuadrature& quad) {
  const int n = s.n_modes();
  const auto f = kick_pairing(s, n, alpha, quad);
  Tangent t;
  t.da.resize(static_cast<std::size_t>(n));
  t.db.resize(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double z = kPi * (k + 1);
    t.da[k] = z * s.coeffs[k].imag();
    t.db[k] = -z * s.coeffs[k].real() - f[k] / z;
  }
  return t;
}

SpectralState linear_substep(SpectralState s, double t) {
  linear_inplace(s, t);
  return s;
}

SpectralState nonlinear_substep(SpectralState s, double t, double alpha,
                                const RadialQuadrature& quad) {
  if (s.n_modes() >= 1) kick_inplace(s, s.n_modes(), t, alpha, quad);
  return s;
}

SpectralState strang_step(SpectralState s, const FlowParams& p) {
  p.validate();
  require_active_truncation(s, p.n_modes, "strang_step");
  FlowParams q = p;
  q.scheme = Scheme::kStrang;
  step_inplace(s, q, p.dt);
  return s;
}

SpectralState lie_step(SpectralState s, const FlowParams& p) {
  p.validate();
  require_active_truncation(s, p.n_modes, "lie_step");
  FlowParams q = p;
  q.scheme = Scheme::kLie;
  step_inplace(s, q, p.dt);
  return s;
}

SpectralState evolve(SpectralState s, const FlowParams& p, double t_final) {
  p.validate();
  require_active_truncation(s, p.n_modes, "evolve");
  advance(s, p, t_final, [](double) {});
  return s;
}

SpectralState evolve_recording(SpectralState s, const FlowParams& p,
                               double t_final, const ObserverSpec& obs,
                               TrajectoryRecord& rec) {
  p.validate();
  require_active_truncation(s, p.n_modes, "evolve");
  if (obs.stride < 1) {
    throw std::invalid_argument("evolve: observer stride must be >= 1");
  }
  rec = TrajectoryRecord{};
  rec.sobolev_indices = obs.sobolev_indices;
  rec.mode_indices = obs.mode_indices;
  rec.sobolev.resize(obs.sobolev_indices.size());
  rec.modes.resize(obs.mode_indices.size());
  for (const int k : obs.mode_indices) {
    if (k < 1 || k > s.n_modes()) {
      throw std::invalid_argument("evolve: observed mode " + std::to_string(k) +
                                  " outside 1.." + std::to_string(s.n_modes()));
    }
  }

  const auto record = [&](double t, const SpectralState& x) {
    rec.times.push_back(t);
    rec.energies.push_back(hamiltonian(x, p.alpha, *p.quad));
    for (std::size_t i = 0; i < obs.sobolev_indices.size(); ++i) {
      rec.sobolev[i].push_back(sobolev_norm(x, obs.sobolev_indices[i]));
    }
    for (std::size_t i = 0; i < obs.mode_indices.size(); ++i) {
      rec.modes[i].push_back(x.coeffs[obs.mode_indices[i] - 1]);
    }
  };

  record(0.0, s);
  long long step = 0;
  advance(s, p, t_final, [&](double t) {
    ++step;
    if (t == t_final || step % obs.stride == 0) record(t, s);
  });
  return s;
}

SpectralState evolve_checkpoints(
    SpectralState s, const FlowParams& p, std::span<const double> times,
    const std::function<void(std::size_t, double, const SpectralState&)>& visit) {
  p.validate();
  require_active_truncation(s, p.n_modes, "evolve");
  double prev = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] < 0.0 || (k > 0 && times[k] <= times[k - 1])) {
      throw std::invalid_argument(
          "evolve_checkpoints: times must be strictly increasing and >= 0");
    }
    advance(s, p, times[k] - prev, [](double) {});
    prev = times[k];
    visit(k, times[k], s);
  }
  return s;
}

double divergence_probe(const SpectralState& s, double alpha,
                        const RadialQuadrature& quad, double h) {
  if (!(h > 0.0)) {
    throw std::invalid_argument("divergence_probe: step h must be positive");
  }
  const int n = s.n_modes();
  double div = 0.0;
  for (int k = 0; k < n; ++k) {
    SpectralState plus = s, minus = s;
    plus.coeffs[k] += h;
    minus.coeffs[k] -= h;
    div += (vector_field(plus, alpha, quad).da[k] -
            vector_field(minus, alpha, quad).da[k]) /
           (2.0 * h);
    plus = s;
    minus = s;
    plus.coeffs[k] += std::complex<double>{0.0, h};
    minus.coeffs[k] -= std::complex<double>{0.0, h};
    div += (vector_field(plus, alpha, quad).db[k] -
            vector_field(minus, alpha, quad).db[k]) /
           (2.0 * h);
  }
  return div;
}

PicardResult picard_solve(const SpectralState& u0, double t_final,
                          const FlowParams& p, int n_iterations, int time_mesh,
                          double sigma) {
  p.validate();
  require_active_truncation(u0, p.n_modes, "picard_solve");
  if (!(t_final > 0.0)) {
    throw std::invalid_argument("picard_solve: t_final must be positive");
  }
  if (n_iterations < 1) {
    throw std::invalid_argument("picard_solve: need at least one iteration");
  }
  if (time_mesh < 3 || time_mesh % 2 == 0) {
    throw std::invalid_argument(
        "picard_solve: time_mesh must be an odd count >= 3");
  }

  const int big_k = time_mesh;
  const double h = t_final / (big_k - 1);
  const int n_store = u0.n_modes();

  std::vector<SpectralState> traj(static_cast<std::size_t>(big_k));
  for (int m = 0; m < big_k; ++m) traj[m] = linear_substep(u0, m * h);

  const double floor_gap = 1e-13 * (1.0 + sobolev_norm(u0, sigma));
  PicardResult result;

  for (int iter = 0; iter < n_iterations; ++iter) {
    // G(t_m) = S(-t_m) W P_N F(u(t_m)) in coefficients.
    std::vector<SpectralState> g(static_cast<std::size_t>(big_k));
    for (int m = 0; m < big_k; ++m) {
      SpectralState w = SpectralState::zero(n_store);
      if (p.nonlinear) {
        const auto f = kick_pairing(traj[m], p.n_modes, p.alpha, *p.quad);
        for (int k = 0; k < p.n_modes; ++k) {
          w.coeffs[k] = {f[k] / (kPi * (k + 1)), 0.0};
        }
      }
      g[m] = linear_substep(std::move(w), -m * h);
    }

    // Prefix integrals J_m = int_0^{t_m} G: composite Simpson on even
    // prefixes, a one-interval quadratic end rule on odd ones.
    std::vector<SpectralState> big_j(static_cast<std::size_t>(big_k),
                                     SpectralState::zero(n_store));
    for (int m = 1; m < big_k; ++m) {
      if (m % 2 == 0) {
        for (int k = 0; k < n_store; ++k) {
          big_j[m].coeffs[k] =
              big_j[m - 2].coeffs[k] +
              (h / 3.0) * (g[m - 2].coeffs[k] + 4.0 * g[m - 1].coeffs[k] +
                           g[m].coeffs[k]);
        }
      } else {
        for (int k = 0; k < n_store; ++k) {
          big_j[m].coeffs[k] =
              big_j[m - 1].coeffs[k] +
              (h / 12.0) * (5.0 * g[m - 1].coeffs[k] + 8.0 * g[m].coeffs[k] -
                            g[m + 1].coeffs[k]);
        }
      }
    }

    double delta = 0.0;
    for (int m = 0; m < big_k; ++m) {
      SpectralState next = SpectralState::zero(n_store);
      for (int k = 0; k < n_store; ++k) {
        const std::complex<double> j = big_j[m].coeffs[k];
        next.coeffs[k] = u0.coeffs[k] - std::complex<double>{0.0, 1.0} * j;
      }
      linear_inplace(next, m * h);
      delta = std::max(delta, sobolev_distance(next, traj[m], sigma));
      traj[m] = std::move(next);
    }
    if (!traj.back().finite()) {
      throw std::runtime_error("picard_solve: iterate left the finite range");
    }

    if (!result.iteration_deltas.empty()) {
      const double prev = result.iteration_deltas.back();
      if (delta > floor_gap && delta > 0.5 * prev) {
        std::string msg = "picard_solve: no contraction, iterate gaps";
        for (const double d : result.iteration_deltas) {
          msg += " " + std::to_string(d);
        }
        msg += " " + std::to_string(delta);
        throw std::runtime_error(msg);
      }
    }
    result.iteration_deltas.push_back(delta);
  }

  result.u = traj.back();
  return result;
}

double picard_time_heuristic(double norm_u0, double c, double gamma) {
  if (!(norm_u0 >= 0.0)) {
    throw std::invalid_argument("picard_time_heuristic: norm must be >= 0");
  }
  return c * std::pow(1.0 + norm_u0, -gamma);
}

}  // namespace ballwave
