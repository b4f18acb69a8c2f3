#include "ballwave/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ballwave/parallel.hpp"
#include "ballwave/rng.hpp"

namespace ballwave {

namespace {

// exp(lw - max lw): overflow-safe unnormalized weights.
std::vector<double> shifted_weights(std::span<const double> log_weights) {
  const double m =
      *std::max_element(log_weights.begin(), log_weights.end());
  std::vector<double> w(log_weights.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::exp(log_weights[i] - m);
  return w;
}

struct KsEntry {
  double value;
  std::uint32_t pair;
  std::uint8_t side;
};

std::vector<KsEntry> ks_entries(std::span<const double> x0,
                                std::span<const double> x1) {
  std::vector<KsEntry> entries;
  entries.reserve(2 * x0.size());
  for (std::size_t i = 0; i < x0.size(); ++i) {
    entries.push_back({x0[i], static_cast<std::uint32_t>(i), 0});
    entries.push_back({x1[i], static_cast<std::uint32_t>(i), 1});
  }
  std::sort(entries.begin(), entries.end(),
            [](const KsEntry& a, const KsEntry& b) { return a.value < b.value; });
  return entries;
}

// Sweeps the pooled sorted values, accumulating each side's normalized
// weight; tied values advance as one group so identical samples yield 0.
// flips, when nonempty, swap the side of selected pairs (resampling null).
double ks_sweep(const std::vector<KsEntry>& entries,
                const std::vector<double>& w_norm,
                const std::vector<std::uint8_t>& flips) {
  double cum0 = 0.0, cum1 = 0.0, d = 0.0;
  std::size_t i = 0;
  while (i < entries.size()) {
    const double v = entries[i].value;
    for (; i < entries.size() && entries[i].value == v; ++i) {
      const KsEntry& e = entries[i];
      const std::uint8_t side =
          flips.empty() ? e.side : static_cast<std::uint8_t>(e.side ^ flips[e.pair]);
      (side == 0 ? cum0 : cum1) += w_norm[e.pair];
    }
    d = std::max(d, std::abs(cum0 - cum1));
  }
  return d;
}

std::vector<double> normalized_weights(std::span<const double> log_weights) {
  auto w = shifted_weights(log_weights);
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& x : w) x /= total;
  return w;
}

void require_paired(std::span<const double> x0, std::span<const double> x1,
                    std::span<const double> lw, const char* op) {
  if (x0.size() != x1.size() || x0.size() != lw.size()) {
    throw std::invalid_argument(std::string(op) +
                                ": value and weight lengths differ");
  }
  if (x0.empty()) {
    throw std::invalid_argument(std::string(op) + ": empty sample");
  }
}

double fit_slope(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double den = n * sxx - sx * sx;
  return (n * sxy - sx * sy) / den;
}

}  // namespace

MeanSE weighted_mean_se(std::span<const double> values,
                        std::span<const double> log_weights) {
  if (values.size() != log_weights.size()) {
    throw std::invalid_argument("weighted_mean_se: length mismatch");
  }
  if (values.size() < 2) {
    throw std::invalid_argument(
        "weighted_mean_se: need at least two samples for a standard error");
  }
  const auto w = shifted_weights(log_weights);
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  double mean = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) mean += w[i] * values[i];
  mean /= total;
  double var = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double d = values[i] - mean;
    var += w[i] * w[i] * d * d;
  }
  return {mean, std::sqrt(var) / total};
}

double weighted_quantile(std::span<const double> values,
                         std::span<const double> log_weights, double tau) {
  if (values.size() != log_weights.size() || values.empty()) {
    throw std::invalid_argument("weighted_quantile: bad sample");
  }
  if (!(tau > 0.0 && tau <= 1.0)) {
    throw std::invalid_argument("weighted_quantile: tau must lie in (0,1]");
  }
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  const auto w = normalized_weights(log_weights);
  double cum = 0.0;
  for (const std::size_t i : order) {
    cum += w[i];
    if (cum >= tau) return values[i];
  }
  return values[order.back()];
}

double weighted_ks(std::span<const double> x0, std::span<const double> x1,
                   std::span<const double> log_weights) {
  require_paired(x0, x1, log_weights, "weighted_ks");
  const auto entries = ks_entries(x0, x1);
  const auto w = normalized_weights(log_weights);
  return ks_sweep(entries, w, {});
}

double ks_resample_threshold(std::span<const double> x0,
                             std::span<const double> x1,
                             std::span<const double> log_weights,
                             int n_resamples, double level,
                             std::uint64_t seed) {
  require_paired(x0, x1, log_weights, "ks_resample_threshold");
  if (n_resamples < 1 || !(level > 0.0) || !(level <= 1.0)) {
    throw std::invalid_argument("ks_resample_threshold: bad calibration request");
  }
  const auto entries = ks_entries(x0, x1);
  const auto w = normalized_weights(log_weights);
  std::vector<double> stats(static_cast<std::size_t>(n_resamples));
  std::vector<std::uint8_t> flips(x0.size());
  for (int b = 0; b < n_resamples; ++b) {
    CounterRng rng(seed, static_cast<std::uint64_t>(b));
    for (auto& f : flips) f = static_cast<std::uint8_t>(rng.next_u64() & 1u);
    stats[b] = ks_sweep(entries, w, flips);
  }
  std::sort(stats.begin(), stats.end());
  const auto rank = static_cast<std::size_t>(
      std::ceil(level * n_resamples));
  return stats[std::min(stats.size() - 1, std::max<std::size_t>(rank, 1) - 1)];
}

Observable parse_observable(const std::string& token, double alpha,
                            double sigma) {
  const auto mode_suffix = [&](const std::string& prefix) {
    const std::string digits = token.substr(prefix.size());
    if (digits.empty() ||
        digits.find_first_not_of("0123456789") != std::string::npos) {
      throw std::invalid_argument("observable '" + token +
                                  "': expected a mode index after '" + prefix +
                                  "'");
    }
    const int k = std::stoi(digits);
    if (k < 1) {
      throw std::invalid_argument("observable '" + token +
                                  "': mode index must be >= 1");
    }
    return k;
  };

  if (token == "l2sq") return {token, ObservableKind::kL2Sq, 0.0, 0};
  if (token == "lp_re") return {token, ObservableKind::kLpRePow, alpha + 2.0, 0};
  if (token == "hs") return {token, ObservableKind::kSobolev, sigma, 0};
  if (token == "energy") return {token, ObservableKind::kEnergy, 0.0, 0};
  if (token.rfind("re_c", 0) == 0) {
    return {token, ObservableKind::kReMode, 0.0, mode_suffix("re_c")};
  }
  if (token.rfind("im_c", 0) == 0) {
    return {token, ObservableKind::kImMode, 0.0, mode_suffix("im_c")};
  }
  if (token.rfind("abs2_c", 0) == 0) {
    return {token, ObservableKind::kAbs2Mode, 0.0, mode_suffix("abs2_c")};
  }
  throw std::invalid_argument(
      "unknown observable '" + token +
      "'; expected l2sq | lp_re | hs | energy | re_c<k> | im_c<k> | abs2_c<k>");
}

double eval_observable(const Observable& obs, const SpectralState& s,
                       double alpha, const RadialQuadrature& quad) {
  switch (obs.kind) {
    case ObservableKind::kL2Sq: {
      double acc = 0.0;
      for (const auto& c : s.coeffs) acc += std::norm(c);
      return acc;
    }
    case ObservableKind::kLpRePow:
      return real_lp_pow(s, obs.param, quad);
    case ObservableKind::kSobolev:
      return sobolev_norm(s, obs.param);
    case ObservableKind::kEnergy:
      return hamiltonian(s, alpha, quad);
    case ObservableKind::kReMode:
    case ObservableKind::kImMode:
    case ObservableKind::kAbs2Mode: {
      if (obs.mode > s.n_modes()) {
        throw std::invalid_argument("observable '" + obs.name +
                                    "': mode outside the truncation");
      }
      const std::complex<double> c = s.coeffs[obs.mode - 1];
      if (obs.kind == ObservableKind::kReMode) return c.real();
      if (obs.kind == ObservableKind::kImMode) return c.imag();
      return std::norm(c);
    }
  }
  throw std::logic_error("eval_observable: unhandled kind");
}

bool InvarianceReport::all_pass() const {
  return std::all_of(rows.begin(), rows.end(),
                     [](const ObservableResult& r) { return r.pass(); });
}

InvarianceReport invariance_test(const WeightedEnsemble& ens, double t_final,
                                 const FlowParams& params,
                                 std::span<const Observable> observables,
                                 int threads, int n_resamples, double level) {
  params.validate();
  if (ens.size() < 2) {
    throw std::invalid_argument("invariance_test: need at least two samples");
  }
  if (observables.empty()) {
    throw std::invalid_argument("invariance_test: no observables requested");
  }

  const std::size_t n = ens.size();
  const std::size_t n_obs = observables.size();
  std::vector<std::vector<double>> x0(n_obs, std::vector<double>(n));
  std::vector<std::vector<double>> xt(n_obs, std::vector<double>(n));

  parallel_for(n, threads, [&](std::size_t i) {
    for (std::size_t o = 0; o < n_obs; ++o) {
      x0[o][i] =
          eval_observable(observables[o], ens.samples[i], params.alpha, *params.quad);
    }
    const SpectralState moved = evolve(ens.samples[i], params, t_final);
    for (std::size_t o = 0; o < n_obs; ++o) {
      xt[o][i] = eval_observable(observables[o], moved, params.alpha, *params.quad);
    }
  });

  InvarianceReport report;
  report.t_final = t_final;
  report.n_samples = n;
  report.ess = ens.ess();
  for (std::size_t o = 0; o < n_obs; ++o) {
    const MeanSE m0 = weighted_mean_se(x0[o], ens.log_weights);
    const MeanSE mt = weighted_mean_se(xt[o], ens.log_weights);
    const double ks = weighted_ks(x0[o], xt[o], ens.log_weights);
    CounterRng seed_rng(ens.master_seed, 0x4B530000ull + o);
    const double thr = ks_resample_threshold(x0[o], xt[o], ens.log_weights,
                                             n_resamples, level,
                                             seed_rng.next_u64());
    ObservableResult row;
    row.name = observables[o].name;
    row.mean_initial = m0.mean;
    row.se_initial = m0.se;
    row.mean_final = mt.mean;
    row.se_final = mt.se;
    row.ks = ks;
    row.ks_threshold = thr;
    row.mean_pass = std::abs(mt.mean - m0.mean) <=
                    3.0 * std::hypot(m0.se, mt.se);
    row.ks_pass = ks <= thr;
    report.rows.push_back(std::move(row));
  }
  return report;
}

TailReport tail_check(const WeightedEnsemble& ens, double s,
                      std::span<const double> lambdas, double c) {
  const TailParameter tp(c, s);
  if (lambdas.empty()) {
    throw std::invalid_argument("tail_check: empty lambda grid");
  }
  for (std::size_t i = 1; i < lambdas.size(); ++i) {
    if (!(lambdas[i] > lambdas[i - 1])) {
      throw std::invalid_argument("tail_check: lambda grid must increase");
    }
  }
  if (ens.size() == 0) {
    throw std::invalid_argument("tail_check: empty ensemble");
  }

  std::vector<double> norms(ens.size());
  for (std::size_t i = 0; i < ens.size(); ++i) {
    norms[i] = sobolev_norm(ens.samples[i], s);
  }
  const auto w = normalized_weights(ens.log_weights);

  TailReport report;
  report.s = s;
  report.c = c;
  report.big_c = exp_moment_product(ens.n_modes, tp, MomentSign::kPlus);
  report.dominated = true;
  std::vector<double> xs, ys;
  for (const double lambda : lambdas) {
    double surv = 0.0;
    for (std::size_t i = 0; i < norms.size(); ++i) {
      if (norms[i] > lambda) surv += w[i];
    }
    const double bound = tail_probability_bound(lambda, c, report.big_c);
    report.rows.push_back({lambda, surv, bound});
    if (surv > bound) report.dominated = false;
    if (surv > 0.0) {
      xs.push_back(lambda * lambda);
      ys.push_back(std::log(surv));
    }
  }
  report.log_slope = xs.size() >= 2 ? fit_slope(xs, ys) : 0.0;
  return report;
}

bool ConvergenceReport::nonincreasing(double slack) const {
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].sup_discrepancy > slack * rows[i - 1].sup_discrepancy) {
      return false;
    }
  }
  return true;
}

ConvergenceReport convergence_experiment(const SpectralState& reference_data,
                                         std::span<const int> n_list,
                                         double t_final,
                                         const FlowParams& params,
                                         double sigma, int n_checkpoints) {
  if (!(t_final >= 0.0)) {
    throw std::invalid_argument("convergence_experiment: t_final must be >= 0");
  }
  if (n_checkpoints < 2 && t_final > 0.0) {
    throw std::invalid_argument("convergence_experiment: need >= 2 checkpoints");
  }
  const int n_ref = reference_data.n_modes();
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (n_list[i] < 1 || n_list[i] >= n_ref ||
        (i > 0 && n_list[i] <= n_list[i - 1])) {
      throw std::invalid_argument(
          "convergence_experiment: truncation list must increase and stay "
          "below the reference mode count");
    }
  }

  std::vector<double> times;
  if (t_final == 0.0) {
    times = {0.0};
  } else {
    for (int k = 0; k < n_checkpoints; ++k) {
      times.push_back(t_final * k / (n_checkpoints - 1));
    }
  }

  FlowParams ref_params = params;
  ref_params.n_modes = n_ref;
  std::vector<SpectralState> ref_states(times.size());
  evolve_checkpoints(reference_data, ref_params, times,
                     [&](std::size_t k, double, const SpectralState& st) {
                       ref_states[k] = st;
                     });

  ConvergenceReport report;
  report.sigma = sigma;
  for (const int n : n_list) {
    FlowParams trunc_params = params;
    trunc_params.n_modes = n;
    double sup = 0.0;
    evolve_checkpoints(project(reference_data, n), trunc_params, times,
                       [&](std::size_t k, double, const SpectralState& st) {
                         sup = std::max(
                             sup, sobolev_distance(st, ref_states[k], sigma));
                       });
    report.rows.push_back({n, sup});
  }
  return report;
}

GrowthReport growth_experiment(const WeightedEnsemble& ens,
                               std::span<const double> checkpoints,
                               const FlowParams& params, double sigma,
                               double drift_guard, int threads) {
  params.validate();
  if (checkpoints.empty()) {
    throw std::invalid_argument("growth_experiment: no checkpoints");
  }
  if (ens.size() == 0) {
    throw std::invalid_argument("growth_experiment: empty ensemble");
  }
  if (!(drift_guard > 0.0)) {
    throw std::invalid_argument("growth_experiment: guard must be positive");
  }

  const std::size_t n = ens.size();
  const std::size_t n_check = checkpoints.size();
  std::vector<std::vector<double>> norms(n, std::vector<double>(n_check));
  std::vector<double> drifts(n, 0.0);

  parallel_for(n, threads, [&](std::size_t i) {
    const double h0 = hamiltonian(ens.samples[i], params.alpha, *params.quad);
    evolve_checkpoints(
        ens.samples[i], params, checkpoints,
        [&](std::size_t k, double t, const SpectralState& st) {
          norms[i][k] = sobolev_norm(st, sigma);
          const double drift =
              std::abs(hamiltonian(st, params.alpha, *params.quad) - h0) /
              std::abs(h0);
          drifts[i] = std::max(drifts[i], drift);
          if (drift > drift_guard) {
            throw GrowthGuardError(
                "growth_experiment: energy drift " + std::to_string(drift) +
                " beyond guard " + std::to_string(drift_guard) + " at sample " +
                std::to_string(i) + ", t = " + std::to_string(t));
          }
        });
  });

  GrowthReport report;
  report.sigma = sigma;
  report.times.assign(checkpoints.begin(), checkpoints.end());
  std::vector<double> column(n);
  for (std::size_t k = 0; k < n_check; ++k) {
    for (std::size_t i = 0; i < n; ++i) column[i] = norms[i][k];
    report.q_low.push_back(weighted_quantile(column, ens.log_weights, 0.25));
    report.q_mid.push_back(weighted_quantile(column, ens.log_weights, 0.50));
    report.q_high.push_back(weighted_quantile(column, ens.log_weights, 0.75));
    report.normalized_median.push_back(
        report.q_mid.back() / std::sqrt(1.0 + std::log1p(report.times[k])));
  }
  report.max_energy_drift = *std::max_element(drifts.begin(), drifts.end());

  // median^2 = B (i0 + log(1+t)) fitted by least squares; degenerate when
  // the medians do not actually grow, hence the guarded ratio.
  std::vector<double> xs(n_check), ys(n_check);
  for (std::size_t k = 0; k < n_check; ++k) {
    xs[k] = std::log1p(report.times[k]);
    ys[k] = report.q_mid[k] * report.q_mid[k];
  }
  if (n_check >= 2) {
    const double slope = fit_slope(xs, ys);
    double sx = 0, sy = 0;
    for (std::size_t k = 0; k < n_check; ++k) {
      sx += xs[k];
      sy += ys[k];
    }
    const double intercept = (sy - slope * sx) / static_cast<double>(n_check);
    report.i0_fit = std::abs(slope) > 1e-12 * std::max(std::abs(intercept), 1.0)
                        ? intercept / slope
                        : std::numeric_limits<double>::quiet_NaN();
  } else {
    report.i0_fit = std::numeric_limits<double>::quiet_NaN();
  }
  return report;
}

double strichartz_ratio(const SpectralState& f, double p, double t_final,
                        const RadialQuadrature& quad, int time_mesh) {
  if (!(p > 2.0)) {
    throw std::invalid_argument(
        "strichartz_ratio: admissibility needs p > 2 (1/p + 1/q = 1/2)");
  }
  if (!(t_final > 0.0)) {
    throw std::invalid_argument("strichartz_ratio: t_final must be positive");
  }
  if (time_mesh < 3 || time_mesh % 2 == 0) {
    throw std::invalid_argument(
        "strichartz_ratio: time_mesh must be an odd count >= 3");
  }
  const double q = 2.0 * p / (p - 2.0);
  const double denom = sobolev_norm(f, 2.0 / p);
  if (denom == 0.0) {
    throw std::invalid_argument("strichartz_ratio: zero datum");
  }

  const double h = 2.0 * t_final / (time_mesh - 1);
  double acc = 0.0;
  for (int m = 0; m < time_mesh; ++m) {
    const double t = -t_final + m * h;
    const auto grid = synthesize(linear_substep(f, t), quad);
    double lq = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j) {
      lq += quad.weights()[j] * std::pow(std::abs(grid[j]), q);
    }
    const double phi = std::pow(lq, p / q);  // ||u(t)||_{L^q}^p
    const double coeff =
        (m == 0 || m == time_mesh - 1) ? 1.0 : (m % 2 == 1 ? 4.0 : 2.0);
    acc += coeff * phi;
  }
  const double integral = acc * h / 3.0;
  return std::pow(integral, 1.0 / p) / denom;
}

StrichartzReport strichartz_probe(int n_modes, double p, int n_samples,
                                  double t_final, std::uint64_t seed,
                                  const RadialQuadrature& quad, int time_mesh,
                                  int threads) {
  if (n_samples < 1) {
    throw std::invalid_argument("strichartz_probe: need n_samples >= 1");
  }
  StrichartzReport report;
  report.p = p;
  report.q = 2.0 * p / (p - 2.0);
  report.t_final = t_final;
  report.n_modes = n_modes;
  report.ratios.resize(static_cast<std::size_t>(n_samples));
  parallel_for(static_cast<std::size_t>(n_samples), threads, [&](std::size_t i) {
    const SpectralState f = sample_gaussian(n_modes, seed, i);
    report.ratios[i] = strichartz_ratio(f, p, t_final, quad, time_mesh);
  });
  report.supremum =
      *std::max_element(report.ratios.begin(), report.ratios.end());
  return report;
}

}  // namespace ballwave
