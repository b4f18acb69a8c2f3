#include "ballwave/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "ballwave/output.hpp"

namespace ballwave {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

[[noreturn]] void fail(const std::string& origin, int line,
                       const std::string& what) {
  throw std::invalid_argument(origin + ":" + std::to_string(line) + ": " +
                              what);
}

double parse_double(const std::string& origin, int line, const std::string& key,
                    const std::string& raw) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(raw, &pos);
    if (pos != raw.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    fail(origin, line, "key '" + key + "': '" + raw + "' is not a number");
  }
}

long long parse_int(const std::string& origin, int line, const std::string& key,
                    const std::string& raw) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(raw, &pos);
    if (pos != raw.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    fail(origin, line, "key '" + key + "': '" + raw + "' is not an integer");
  }
}

std::uint64_t parse_u64(const std::string& origin, int line,
                        const std::string& key, const std::string& raw) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(raw, &pos);
    if (pos != raw.size() || (!raw.empty() && raw[0] == '-')) {
      throw std::invalid_argument("trailing characters");
    }
    return v;
  } catch (const std::exception&) {
    fail(origin, line,
         "key '" + key + "': '" + raw + "' is not an unsigned integer");
  }
}

std::vector<std::string> split_list(const std::string& raw) {
  std::vector<std::string> items;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += ",";
    out += items[i];
  }
  return out;
}

}  // namespace

const char* experiment_name(Experiment e) {
  switch (e) {
    case Experiment::kSample:
      return "sample";
    case Experiment::kEvolve:
      return "evolve";
    case Experiment::kInvariance:
      return "invariance";
    case Experiment::kGrowth:
      return "growth";
    case Experiment::kConverge:
      return "converge";
    case Experiment::kStrichartz:
      return "strichartz";
    case Experiment::kValidate:
      return "validate";
  }
  throw std::logic_error("experiment_name: unhandled enum value");
}

Experiment parse_experiment(const std::string& name) {
  for (const Experiment e :
       {Experiment::kSample, Experiment::kEvolve, Experiment::kInvariance,
        Experiment::kGrowth, Experiment::kConverge, Experiment::kStrichartz,
        Experiment::kValidate}) {
    if (name == experiment_name(e)) return e;
  }
  throw std::invalid_argument(
      "unknown experiment '" + name +
      "'; expected sample | evolve | invariance | growth | converge | "
      "strichartz | validate");
}

void validate_config(SimConfig& cfg) {
  const auto bad = [](const std::string& key, const std::string& why) {
    throw std::invalid_argument("config key '" + key + "': " + why);
  };
  if (!(cfg.alpha > 0.0) || !(cfg.alpha < 2.0)) {
    bad("alpha", "nonlinearity exponent must lie in (0, 2)");
  }
  if (cfg.n_modes < 1) bad("n_modes", "must be >= 1");
  if (cfg.grid_points == 0) cfg.grid_points = 8 * cfg.n_modes;
  if (cfg.grid_points < 8) bad("grid_points", "must be >= 8 (or 0 for default)");
  if (cfg.grid_points < 8 * cfg.n_modes) {
    bad("grid_points", "must be >= 8 * n_modes to resolve the nonlinearity");
  }
  if (!(cfg.dt > 0.0)) bad("dt", "must be positive");
  if (!(cfg.horizon >= 0.0)) bad("horizon", "must be >= 0");
  if (cfg.horizon > 0.0 && !(cfg.dt <= cfg.horizon)) {
    bad("dt", "must not exceed horizon when horizon > 0");
  }
  if (cfg.sobolev_indices.empty()) bad("sobolev_indices", "must be nonempty");
  for (const double s : cfg.sobolev_indices) {
    if (!(s < 0.5)) bad("sobolev_indices", "every index must be < 1/2");
  }
  const double sigma_floor = std::max(0.0, (cfg.alpha - 1.0) / cfg.alpha);
  if (!(cfg.sigma > sigma_floor) || !(cfg.sigma < 0.5)) {
    bad("sigma", "must lie in (max(0, (alpha-1)/alpha), 1/2) = (" +
                     fmt_g17(sigma_floor) + ", 0.5)");
  }
  for (const int k : cfg.mode_indices) {
    if (k < 1 || k > cfg.n_modes) {
      bad("mode_indices", "every index must lie in [1, n_modes]");
    }
  }
  if (cfg.n_samples < 2) bad("n_samples", "must be >= 2");
  if (cfg.record_stride < 1) bad("record_stride", "must be >= 1");
  if (cfg.time_mesh < 3 || cfg.time_mesh % 2 == 0) {
    bad("time_mesh", "must be an odd count >= 3");
  }
  for (std::size_t i = 0; i < cfg.checkpoints.size(); ++i) {
    if (!(cfg.checkpoints[i] >= 0.0) ||
        (i > 0 && !(cfg.checkpoints[i] > cfg.checkpoints[i - 1]))) {
      bad("checkpoints", "must be strictly increasing and >= 0");
    }
  }
  for (std::size_t i = 0; i < cfg.n_list.size(); ++i) {
    if (cfg.n_list[i] < 1 || (i > 0 && cfg.n_list[i] <= cfg.n_list[i - 1])) {
      bad("n_list", "must be a strictly increasing list of mode counts >= 1");
    }
    if (cfg.n_list[i] >= cfg.n_modes) {
      bad("n_list", "every truncation must stay below n_modes");
    }
  }
  if (!(cfg.strichartz_p > 2.0)) {
    bad("strichartz_p", "admissibility needs p > 2");
  }
  if (cfg.scheme == Scheme::kPicard && cfg.experiment != Experiment::kEvolve) {
    bad("scheme", "picard is only available for the evolve experiment");
  }
}

SimConfig parse_config_text(const std::string& text,
                            const std::string& origin) {
  SimConfig cfg;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string raw_line;
  int line_no = 0;
  while (std::getline(in, raw_line)) {
    ++line_no;
    const std::size_t hash = raw_line.find('#');
    std::string line =
        trim(hash == std::string::npos ? raw_line : raw_line.substr(0, hash));
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      fail(origin, line_no, "expected 'key = value', got '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(origin, line_no, "empty key");
    if (!seen.insert(key).second) {
      fail(origin, line_no, "duplicate key '" + key + "'");
    }

    if (key == "experiment") {
      try {
        cfg.experiment = parse_experiment(value);
      } catch (const std::invalid_argument& e) {
        fail(origin, line_no, e.what());
      }
    } else if (key == "alpha") {
      cfg.alpha = parse_double(origin, line_no, key, value);
    } else if (key == "n_modes") {
      cfg.n_modes = static_cast<int>(parse_int(origin, line_no, key, value));
    } else if (key == "grid_points") {
      cfg.grid_points =
          static_cast<int>(parse_int(origin, line_no, key, value));
    } else if (key == "dt") {
      cfg.dt = parse_double(origin, line_no, key, value);
    } else if (key == "horizon") {
      cfg.horizon = parse_double(origin, line_no, key, value);
    } else if (key == "sigma") {
      cfg.sigma = parse_double(origin, line_no, key, value);
    } else if (key == "sobolev_indices") {
      cfg.sobolev_indices.clear();
      for (const auto& item : split_list(value)) {
        cfg.sobolev_indices.push_back(parse_double(origin, line_no, key, item));
      }
    } else if (key == "mode_indices") {
      cfg.mode_indices.clear();
      for (const auto& item : split_list(value)) {
        cfg.mode_indices.push_back(
            static_cast<int>(parse_int(origin, line_no, key, item)));
      }
    } else if (key == "observables") {
      cfg.observables = split_list(value);
    } else if (key == "n_samples") {
      cfg.n_samples = static_cast<int>(parse_int(origin, line_no, key, value));
    } else if (key == "master_seed") {
      cfg.master_seed = parse_u64(origin, line_no, key, value);
    } else if (key == "record_stride") {
      cfg.record_stride =
          static_cast<int>(parse_int(origin, line_no, key, value));
    } else if (key == "time_mesh") {
      cfg.time_mesh = static_cast<int>(parse_int(origin, line_no, key, value));
    } else if (key == "checkpoints") {
      cfg.checkpoints.clear();
      for (const auto& item : split_list(value)) {
        cfg.checkpoints.push_back(parse_double(origin, line_no, key, item));
      }
    } else if (key == "n_list") {
      cfg.n_list.clear();
      for (const auto& item : split_list(value)) {
        cfg.n_list.push_back(
            static_cast<int>(parse_int(origin, line_no, key, item)));
      }
    } else if (key == "strichartz_p") {
      cfg.strichartz_p = parse_double(origin, line_no, key, value);
    } else if (key == "scheme") {
      if (value == "strang") {
        cfg.scheme = Scheme::kStrang;
      } else if (value == "lie") {
        cfg.scheme = Scheme::kLie;
      } else if (value == "picard") {
        cfg.scheme = Scheme::kPicard;
      } else {
        fail(origin, line_no,
             "key 'scheme': expected strang | lie | picard, got '" + value +
                 "'");
      }
    } else if (key == "flow") {
      if (value == "nonlinear") {
        cfg.nonlinear = true;
      } else if (value == "linear") {
        cfg.nonlinear = false;
      } else {
        fail(origin, line_no,
             "key 'flow': expected nonlinear | linear, got '" + value + "'");
      }
    } else if (key == "weights") {
      if (value == "gibbs") {
        cfg.unit_weights = false;
      } else if (value == "unit") {
        cfg.unit_weights = true;
      } else {
        fail(origin, line_no,
             "key 'weights': expected gibbs | unit, got '" + value + "'");
      }
    } else if (key == "output_dir") {
      cfg.output_dir = value;
    } else {
      fail(origin, line_no, "unknown key '" + key + "'");
    }
  }
  validate_config(cfg);
  return cfg;
}

SimConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open config '" + path.string() + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path.string());
}

std::string serialize_config(const SimConfig& cfg) {
  std::ostringstream out;
  out << "experiment = " << experiment_name(cfg.experiment) << "\n";
  out << "alpha = " << fmt_g17(cfg.alpha) << "\n";
  out << "n_modes = " << cfg.n_modes << "\n";
  out << "grid_points = " << cfg.grid_points << "\n";
  out << "dt = " << fmt_g17(cfg.dt) << "\n";
  out << "horizon = " << fmt_g17(cfg.horizon) << "\n";
  out << "sigma = " << fmt_g17(cfg.sigma) << "\n";
  {
    std::vector<std::string> items;
    for (const double s : cfg.sobolev_indices) items.push_back(fmt_g17(s));
    out << "sobolev_indices = " << join(items) << "\n";
  }
  {
    std::vector<std::string> items;
    for (const int k : cfg.mode_indices) items.push_back(std::to_string(k));
    out << "mode_indices = " << join(items) << "\n";
  }
  if (!cfg.observables.empty()) {
    out << "observables = " << join(cfg.observables) << "\n";
  }
  out << "n_samples = " << cfg.n_samples << "\n";
  out << "master_seed = " << cfg.master_seed << "\n";
  out << "record_stride = " << cfg.record_stride << "\n";
  out << "time_mesh = " << cfg.time_mesh << "\n";
  if (!cfg.checkpoints.empty()) {
    std::vector<std::string> items;
    for (const double t : cfg.checkpoints) items.push_back(fmt_g17(t));
    out << "checkpoints = " << join(items) << "\n";
  }
  if (!cfg.n_list.empty()) {
    std::vector<std::string> items;
    for (const int n : cfg.n_list) items.push_back(std::to_string(n));
    out << "n_list = " << join(items) << "\n";
  }
  out << "strichartz_p = " << fmt_g17(cfg.strichartz_p) << "\n";
  out << "scheme = "
      << (cfg.scheme == Scheme::kStrang
              ? "strang"
              : (cfg.scheme == Scheme::kLie ? "lie" : "picard"))
      << "\n";
  out << "flow = " << (cfg.nonlinear ? "nonlinear" : "linear") << "\n";
  out << "weights = " << (cfg.unit_weights ? "unit" : "gibbs") << "\n";
  if (!cfg.output_dir.empty()) {
    out << "output_dir = " << cfg.output_dir << "\n";
  }
  return out.str();
}

}  // namespace ballwave
