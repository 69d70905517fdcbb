#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "chdyn/errors.hpp"
#include "chdyn/models.hpp"
#include "chdyn/solver.hpp"

namespace chdyn {

/// Missing, unknown or malformed configuration entries. `key` is the dotted
/// `section.name` of the offending entry.
class ConfigError : public InvalidArgument {
 public:
  ConfigError(std::string key, const std::string& what)
      : InvalidArgument(what), key(std::move(key)) {}

  std::string key;
};

struct SweepSettings {
  std::vector<double> taus;
  std::vector<int> ells{1, 2, 4};
  std::vector<int> boundary_factors{1, 2, 4};
  double reference_tau = 0.0;
  int reference_factor = 0;
};

/// Everything a `run` or `sweep` invocation needs, read from a sectioned
/// key-value file (sections `[model]`, `[discretization]`, `[solver]`,
/// `[output]`, `[sweep]`).
struct RunConfig {
  ModelConfig model;
  int cells = 32;
  int boundary_factor = 1;
  std::string initial = "cosine";
  double initial_frequency = 4.0;
  double initial_value = 0.0;
  NewtonSettings newton;
  std::filesystem::path output_dir = "out";
  /// Steps at which field snapshots are written; empty means initial and final.
  std::vector<int> snapshot_steps;
  bool write_mesh = false;
  int threads = 1;
  SweepSettings sweep;

  [[nodiscard]] std::function<double(Point)> initial_condition() const;
};

RunConfig parse_run_config(std::istream& in);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace chdyn
