#pragma once

#include <cstdint>
#include <filesystem>

#include "ballwave/config.hpp"

namespace ballwave {

struct RunOptions {
  int threads = 0;                      // 0: one per hardware core
  std::filesystem::path out_override;   // empty: timestamped dir under root
  bool has_seed_override = false;
  std::uint64_t seed_override = 0;
};

// Executes the configured experiment, writing its CSV tables, summary.json
// and manifest.json into the run directory. Returns the process exit code:
// 0 when every pass flag holds, 1 otherwise. Data outputs depend only on
// (config, seed); the manifest additionally records threads and wall clock.
int run_experiment(SimConfig, const RunOptions&);

}  // namespace ballwave
