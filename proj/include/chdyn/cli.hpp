#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace chdyn {

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitSolver = 3 };

/// Runs one simulation from a config file and writes series.csv plus the
/// requested snapshots. `out_dir` overrides `[output] dir`. Diagnostics go to
/// `err`.
int cmd_run(const std::filesystem::path& config_path,
            const std::optional<std::filesystem::path>& out_dir, std::ostream& err);

/// kind ∈ {tau, ell, hgamma}; writes sweep.csv. `threads` overrides
/// `[sweep] threads`.
int cmd_sweep(const std::string& kind, const std::filesystem::path& config_path,
              const std::optional<std::filesystem::path>& out_dir, std::optional<int> threads,
              std::ostream& err);

}  // namespace chdyn
