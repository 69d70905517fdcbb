#pragma once

#include <functional>
#include <memory>

#include "chdyn/diagnostics.hpp"

namespace chdyn {

struct SimulationOptions {
  NewtonSettings newton;
  /// Keep every k-th time level (the initial and final levels are always kept).
  int record_stride = 1;
  /// Called after every accepted step.
  std::function<void(const SystemState&, const StepReport&)> observer;
};

/// Runs cfg.num_steps() steps of the configured scheme from `initial`.
/// Step failures propagate as StepFailure.
Trajectory simulate(const ModelConfig& cfg, std::shared_ptr<const Discretization> disc,
                    SystemState initial, const SimulationOptions& options = {});

/// Same, starting from the consistent state built from `u0`.
Trajectory simulate(const ModelConfig& cfg, std::shared_ptr<const Discretization> disc,
                    const std::function<double(Point)>& u0, const SimulationOptions& options = {});

}  // namespace chdyn
