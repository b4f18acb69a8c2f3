#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ballwave/dynamics.hpp"
#include "ballwave/gibbs.hpp"

namespace ballwave {

struct MeanSE {
  double mean;
  double se;
};

// Self-normalized importance estimate with delta-method standard error
// se = sqrt(sum w_i^2 (x_i - mean)^2) / sum w_i. Needs >= 2 samples.
MeanSE weighted_mean_se(std::span<const double> values,
                        std::span<const double> log_weights);

// Smallest value whose normalized cumulative weight reaches tau.
double weighted_quantile(std::span<const double> values,
                         std::span<const double> log_weights, double tau);

// Kolmogorov distance between the weighted empirical CDFs of two paired
// samples sharing one weight vector. Tied values are processed as a group,
// so identical samples give exactly zero.
double weighted_ks(std::span<const double> x0, std::span<const double> x1,
                   std::span<const double> log_weights);

// Calibration quantile of weighted_ks under the paired null: each pair
// (x0_i, x1_i) is swapped with probability 1/2 per replicate. Returns the
// nearest-rank `level` quantile of n_resamples replicate statistics.
double ks_resample_threshold(std::span<const double> x0,
                             std::span<const double> x1,
                             std::span<const double> log_weights,
                             int n_resamples, double level,
                             std::uint64_t seed);

enum class ObservableKind {
  kL2Sq,      // sum |c_n|^2
  kLpRePow,   // ||Re u||_{L^p}^p, param = p
  kSobolev,   // ||u||_{H^s}, param = s
  kReMode,    // Re c_k
  kImMode,    // Im c_k
  kAbs2Mode,  // |c_k|^2
  kEnergy,    // conserved H
};

struct Observable {
  std::string name;
  ObservableKind kind;
  double param = 0.0;
  int mode = 0;  // 1-based
};

// Tokens: l2sq | lp_re | hs | energy | re_c<k> | im_c<k> | abs2_c<k>.
// lp_re uses p = alpha + 2 and hs uses s = sigma.
Observable parse_observable(const std::string& token, double alpha,
                            double sigma);

double eval_observable(const Observable&, const SpectralState&, double alpha,
                       const RadialQuadrature&);

struct ObservableResult {
  std::string name;
  double mean_initial, se_initial;
  double mean_final, se_final;
  double ks, ks_threshold;
  bool mean_pass, ks_pass;

  bool pass() const { return mean_pass && ks_pass; }
};

struct InvarianceReport {
  double t_final = 0.0;
  std::size_t n_samples = 0;
  double ess = 0.0;
  std::vector<ObservableResult> rows;

  bool all_pass() const;
};

// Pushes every ensemble member through the flow for time t_final, keeping
// the original weights, then compares each observable's weighted law at
// t = 0 and t = t_final: |mean shift| <= 3 combined SE, and weighted KS at
// or below its resampling threshold (200 replicates, 99% by default).
InvarianceReport invariance_test(const WeightedEnsemble&, double t_final,
                                 const FlowParams&,
                                 std::span<const Observable>, int threads,
                                 int n_resamples = 200, double level = 0.99);

struct TailRow {
  double lambda;
  double survival;
  double bound;
};

struct TailReport {
  double s = 0.0, c = 0.0, big_c = 0.0;
  std::vector<TailRow> rows;
  double log_slope = 0.0;  // LS slope of log survival against lambda^2
  bool dominated = false;  // survival <= bound at every grid point
};

// Weighted survival of ||u||_{H^s} over the lambda grid against the
// Chernoff envelope with C_s = exp_moment_product(N, c, s, plus).
TailReport tail_check(const WeightedEnsemble&, double s,
                      std::span<const double> lambdas, double c);

struct ConvergenceRow {
  int n_modes;
  double sup_discrepancy;
};

struct ConvergenceReport {
  double sigma = 0.0;
  std::vector<ConvergenceRow> rows;

  bool nonincreasing(double slack) const;
};

// Evolves each truncation of one reference datum next to the reference
// flow on a shared checkpoint grid (all on the reference quadrature) and
// reports sup_t ||u_N(t) - u_ref(t)||_{H^sigma}.
ConvergenceReport convergence_experiment(const SpectralState& reference_data,
                                         std::span<const int> n_list,
                                         double t_final, const FlowParams&,
                                         double sigma, int n_checkpoints);

class GrowthGuardError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GrowthReport {
  double sigma = 0.0;
  std::vector<double> times;
  std::vector<double> q_low, q_mid, q_high;  // weighted quartiles of H^sigma
  std::vector<double> normalized_median;     // q_mid / sqrt(1 + log(1+t))
  double i0_fit = 0.0;      // LS fit of median^2 = b (i0 + log(1+t))
  double max_energy_drift = 0.0;
};

// Weighted quartiles of ||u(t)||_{H^sigma} across the ensemble at each
// checkpoint. Every trajectory carries an energy guard: relative drift
// beyond drift_guard aborts with GrowthGuardError.
GrowthReport growth_experiment(const WeightedEnsemble&,
                               std::span<const double> checkpoints,
                               const FlowParams&, double sigma,
                               double drift_guard, int threads);

struct StrichartzReport {
  double p = 0.0, q = 0.0, t_final = 0.0;
  int n_modes = 0;
  std::vector<double> ratios;
  double supremum = 0.0;
};

// Space-time ratio || exp(-it sqrt(-Laplace)) f ||_{L^p((-T,T); L^q)} over
// ||f||_{H^{2/p}} for the admissible pairing 1/p + 1/q = 1/2, p > 2; the
// time integral uses composite Simpson on time_mesh points. Invariant under
// f -> lambda f.
double strichartz_ratio(const SpectralState& f, double p, double t_final,
                        const RadialQuadrature&, int time_mesh);

StrichartzReport strichartz_probe(int n_modes, double p, int n_samples,
                                  double t_final, std::uint64_t seed,
                                  const RadialQuadrature&, int time_mesh,
                                  int threads);

}  // namespace ballwave
