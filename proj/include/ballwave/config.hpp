#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ballwave/dynamics.hpp"

namespace ballwave {

enum class Experiment {
  kSample,
  kEvolve,
  kInvariance,
  kGrowth,
  kConverge,
  kStrichartz,
  kValidate,
};

const char* experiment_name(Experiment);
Experiment parse_experiment(const std::string&);

// Flat key = value run description. Unset grid_points defaults to
// 8 * n_modes; empty observables / checkpoints / n_list fall back to
// per-experiment defaults at run time.
struct SimConfig {
  Experiment experiment = Experiment::kValidate;
  double alpha = 1.0;
  int n_modes = 16;
  int grid_points = 0;
  double dt = 1e-3;
  double horizon = 1.0;
  double sigma = 0.25;
  std::vector<double> sobolev_indices = {0.25};
  std::vector<int> mode_indices = {1, 2};
  std::vector<std::string> observables;
  int n_samples = 1000;
  std::uint64_t master_seed = 12345;
  int record_stride = 10;
  int time_mesh = 401;
  std::vector<double> checkpoints;
  std::vector<int> n_list;
  double strichartz_p = 4.0;
  Scheme scheme = Scheme::kStrang;
  bool nonlinear = true;      // key: flow = nonlinear | linear
  bool unit_weights = false;  // key: weights = gibbs | unit
  std::string output_dir;

  bool operator==(const SimConfig&) const = default;
};

// Applies derived defaults and enforces every config invariant; error
// messages name the offending key and the violated constraint.
void validate_config(SimConfig&);

SimConfig parse_config_text(const std::string& text, const std::string& origin);
SimConfig load_config(const std::filesystem::path&);

// Flat text that load_config parses back to an equal SimConfig.
std::string serialize_config(const SimConfig&);

}  // namespace ballwave
