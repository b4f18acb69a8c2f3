#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "ballwave/spectral.hpp"

namespace ballwave {

// Exponent pair for Gaussian exponential moments E exp(+- c ||u||_{H^s}^2).
// The positive-sign moment is finite iff every product factor is positive,
// i.e. 2c < z_n^{2-2s} for all n; the binding constraint is n = 1, so the
// constructor enforces 2c < pi^{2-2s} together with c > 0 and s < 1/2.
struct TailParameter {
  double c;
  double s;
  TailParameter(double c_in, double s_in);
};

enum class MomentSign { kPlus, kMinus };

// One free-field draw: c_n = (h_n + i l_n) / z_n with h, l standard normal
// from the per-sample stream (master_seed, sample_index). Mode n consumes
// the n-th normal pair of the stream, so draws at different truncation
// levels share their common low modes. Bitwise deterministic.
SpectralState sample_gaussian(int n_modes, std::uint64_t master_seed,
                              std::uint64_t sample_index);

// Log-density of the interaction weight against the free measure:
// -(1/(alpha+2)) ||Re u||_{L^{alpha+2}}^{alpha+2}. Always <= 0.
double gibbs_log_weight(const SpectralState&, double alpha,
                        const RadialQuadrature&);

// Free-field draws with their interaction log-weights; a self-normalized
// importance-sampling view of the Gibbs measure at truncation n_modes.
struct WeightedEnsemble {
  std::vector<SpectralState> samples;
  std::vector<double> log_weights;
  int n_modes = 0;
  double alpha = 0.0;
  std::uint64_t master_seed = 0;

  std::size_t size() const { return samples.size(); }
  double ess() const;  // (sum w)^2 / sum w^2, evaluated stably in log space
};

WeightedEnsemble sample_ensemble(int n_modes, int n_samples, double alpha,
                                 std::uint64_t master_seed,
                                 const RadialQuadrature&, int threads = 1);

// Closed-form Gaussian moment prod_{n<=N} 1 / (1 -+ 2c / z_n^{2-2s}).
// The plus sign requires every factor to be positive and throws otherwise;
// the minus sign is defined for any s (and decays to zero in N once
// s >= 1/2, which is the boundary diagnostic).
double exp_moment_product(int n_modes, double c, double s, MomentSign);
double exp_moment_product(int n_modes, const TailParameter&, MomentSign);

// Chernoff envelope C_s exp(-c Lambda^2) for P(||u||_{H^s} > Lambda).
double tail_probability_bound(double lambda, double c, double big_c);

// CSV persistence: one record per sample -- index, n_modes, alpha, seed,
// log_weight, then the 2 n_modes coefficient reals. 17 significant digits,
// so a read-back reproduces the ensemble bit for bit.
void write_ensemble_csv(const WeightedEnsemble&, const std::filesystem::path&);
WeightedEnsemble read_ensemble_csv(const std::filesystem::path&);

}  // namespace ballwave
