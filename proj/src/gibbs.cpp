#include "ballwave/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "ballwave/output.hpp"
#include "ballwave/parallel.hpp"
#include "ballwave/rng.hpp"

namespace ballwave {

TailParameter::TailParameter(double c_in, double s_in) : c(c_in), s(s_in) {
  if (!(c > 0.0)) {
    throw std::domain_error("TailParameter: c must be positive, got c = " +
                            std::to_string(c_in));
  }
  if (!(s < 0.5)) {
    throw std::domain_error("TailParameter: need s < 1/2, got s = " +
                            std::to_string(s_in));
  }
  if (!(2.0 * c < std::pow(kPi, 2.0 - 2.0 * s))) {
    throw std::domain_error(
        "TailParameter: admissibility 2c < pi^(2-2s) violated for (c, s) = (" +
        std::to_string(c_in) + ", " + std::to_string(s_in) + ")");
  }
}

SpectralState sample_gaussian(int n_modes, std::uint64_t master_seed,
                              std::uint64_t sample_index) {
  if (n_modes < 1) {
    throw std::invalid_argument("sample_gaussian: need n_modes >= 1");
  }
  CounterRng rng(master_seed, sample_index);
  SpectralState s = SpectralState::zero(n_modes);
  for (int k = 0; k < n_modes; ++k) {
    const auto [h, l] = rng.next_normal_pair();
    const double z = kPi * (k + 1);
    s.coeffs[k] = {h / z, l / z};
  }
  return s;
}

double gibbs_log_weight(const SpectralState& state, double alpha,
                        const RadialQuadrature& quad) {
  if (!(alpha >= 0.0)) {
    throw std::invalid_argument("gibbs_log_weight: alpha must be >= 0");
  }
  return -real_lp_pow(state, alpha + 2.0, quad) / (alpha + 2.0);
}

double WeightedEnsemble::ess() const {
  if (log_weights.empty()) return 0.0;
  const double m = *std::max_element(log_weights.begin(), log_weights.end());
  double s1 = 0.0, s2 = 0.0;
  for (const double lw : log_weights) {
    const double w = std::exp(lw - m);
    s1 += w;
    s2 += w * w;
  }
  return s1 * s1 / s2;
}

WeightedEnsemble sample_ensemble(int n_modes, int n_samples, double alpha,
                                 std::uint64_t master_seed,
                                 const RadialQuadrature& quad, int threads) {
  if (n_samples < 1) {
    throw std::invalid_argument("sample_ensemble: need n_samples >= 1");
  }
  WeightedEnsemble ens;
  ens.n_modes = n_modes;
  ens.alpha = alpha;
  ens.master_seed = master_seed;
  ens.samples.resize(static_cast<std::size_t>(n_samples));
  ens.log_weights.resize(static_cast<std::size_t>(n_samples));
  parallel_for(static_cast<std::size_t>(n_samples), threads, [&](std::size_t i) {
    ens.samples[i] = sample_gaussian(n_modes, master_seed, i);
    ens.log_weights[i] = gibbs_log_weight(ens.samples[i], alpha, quad);
  });
  return ens;
}

double exp_moment_product(int n_modes, double c, double s, MomentSign sign) {
  if (n_modes < 1) {
    throw std::invalid_argument("exp_moment_product: need n_modes >= 1");
  }
  if (!(c > 0.0)) {
    throw std::domain_error("exp_moment_product: c must be positive");
  }
  double prod = 1.0;
  for (int n = 1; n <= n_modes; ++n) {
    const double t = 2.0 * c / std::pow(kPi * n, 2.0 - 2.0 * s);
    if (sign == MomentSign::kPlus) {
      if (!(t < 1.0)) {
        throw std::domain_error(
            "exp_moment_product: factor 1 - 2c/z_n^(2-2s) not positive at n = " +
            std::to_string(n) + " for (c, s) = (" + std::to_string(c) + ", " +
            std::to_string(s) + ")");
      }
      prod /= 1.0 - t;
    } else {
      prod /= 1.0 + t;
    }
  }
  return prod;
}

double exp_moment_product(int n_modes, const TailParameter& tp,
                          MomentSign sign) {
  return exp_moment_product(n_modes, tp.c, tp.s, sign);
}

double tail_probability_bound(double lambda, double c, double big_c) {
  if (!(c > 0.0) || !(big_c > 0.0)) {
    throw std::domain_error("tail_probability_bound: c and C must be positive");
  }
  return big_c * std::exp(-c * lambda * lambda);
}

void write_ensemble_csv(const WeightedEnsemble& ens,
                        const std::filesystem::path& path) {
  CsvWriter csv(path);
  std::vector<std::string> names = {"index", "n_modes", "alpha", "seed",
                                    "log_weight"};
  for (int k = 1; k <= ens.n_modes; ++k) {
    names.push_back("re_c" + std::to_string(k));
    names.push_back("im_c" + std::to_string(k));
  }
  csv.header(names);
  for (std::size_t i = 0; i < ens.size(); ++i) {
    csv.field(static_cast<std::int64_t>(i))
        .field(ens.n_modes)
        .field(ens.alpha)
        .field(ens.master_seed)
        .field(ens.log_weights[i]);
    for (int k = 0; k < ens.n_modes; ++k) {
      csv.field(ens.samples[i].coeffs[k].real())
          .field(ens.samples[i].coeffs[k].imag());
    }
    csv.end_row();
  }
}

WeightedEnsemble read_ensemble_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("read_ensemble_csv: cannot open " + path.string());
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("read_ensemble_csv: empty file " + path.string());
  }
  WeightedEnsemble ens;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() < 5) {
      throw std::runtime_error("read_ensemble_csv: short record in " +
                               path.string());
    }
    const int n_modes = std::stoi(cells[1]);
    if (first) {
      ens.n_modes = n_modes;
      ens.alpha = std::stod(cells[2]);
      ens.master_seed = std::stoull(cells[3]);
      first = false;
    }
    if (n_modes != ens.n_modes ||
        cells.size() != static_cast<std::size_t>(5 + 2 * n_modes)) {
      throw std::runtime_error("read_ensemble_csv: inconsistent record in " +
                               path.string());
    }
    ens.log_weights.push_back(std::stod(cells[4]));
    SpectralState s = SpectralState::zero(n_modes);
    for (int k = 0; k < n_modes; ++k) {
      s.coeffs[k] = {std::stod(cells[5 + 2 * k]), std::stod(cells[6 + 2 * k])};
    }
    ens.samples.push_back(std::move(s));
  }
  return ens;
}

}  // namespace ballwave
