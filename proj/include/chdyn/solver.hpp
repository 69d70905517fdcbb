#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace chdyn {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

struct NewtonSettings {
  double abs_tol = 1e-11;
  double rel_tol = 1e-12;
  int max_iters = 50;
  /// Step shrink factor applied while the residual norm increases; 0 disables
  /// backtracking.
  double damping = 0.5;
  int max_backtracks = 10;
  /// A factorized Jacobian is reused while each step shrinks the residual by
  /// at least this factor; 0 relinearizes every iteration (plain Newton).
  double refresh_ratio = 0.1;

  void validate() const;
};

struct NewtonResult {
  Vector x;
  int iterations = 0;
  double residual_norm = 0.0;
  std::vector<double> residual_history;
};

/// Per-step diagnostics recorded by the time integrator.
struct StepReport {
  int step = 0;
  int newton_iterations = 0;
  double residual_norm = 0.0;
  double energy_before = 0.0;
  double energy_after = 0.0;
  double energy_bulk = 0.0;  ///< split of energy_after
  double energy_surface = 0.0;
  double mass_bulk = 0.0;
  double mass_surface = 0.0;
  double mass_total = 0.0;
  double wall_time = 0.0;
};

struct NewtonWorkspaceImpl;

/// Factorized Jacobian carried between consecutive Newton solves of one time
/// integration, so a still-contracting linearization is not rebuilt every step.
class NewtonWorkspace {
 public:
  NewtonWorkspace();
  ~NewtonWorkspace();
  NewtonWorkspace(NewtonWorkspace&&) noexcept;
  NewtonWorkspace& operator=(NewtonWorkspace&&) noexcept;

  /// Drops the stored factorization.
  void reset();
  NewtonWorkspaceImpl& impl() { return *impl_; }

 private:
  std::unique_ptr<NewtonWorkspaceImpl> impl_;
};

using ResidualFn = std::function<Vector(const Vector&)>;
using JacobianFn = std::function<SparseMatrix(const Vector&)>;
using BlockNamer = std::function<std::string(Eigen::Index)>;

/// Newton's method with a sparse LU solve per iteration. Converged once
/// ‖F(x)‖ ≤ max(abs_tol, rel_tol·‖F(x0)‖). Throws StepFailure after
/// `max_iters` iterations. A factorization left in `workspace` by an earlier
/// solve of the same size is tried first.
NewtonResult newton_solve(const ResidualFn& residual, const JacobianFn& jacobian, Vector x0,
                          const NewtonSettings& settings, const BlockNamer& namer = {},
                          NewtonWorkspace* workspace = nullptr);

/// Direct sparse LU solve. Throws SolverError on a singular factorization; the
/// message names the offending block when `namer` is given.
Vector sparse_linear_solve(const SparseMatrix& a, const Vector& b, const BlockNamer& namer = {});

/// Dense Newton with a central finite-difference Jacobian and dense LU.
/// Verification oracle for small systems only.
NewtonResult dense_newton_solve(const ResidualFn& residual, Vector x0,
                                const NewtonSettings& settings);

}  // namespace chdyn
