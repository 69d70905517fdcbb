#include "chdyn/solver.hpp"

#include <Eigen/Dense>
#include <Eigen/OrderingMethods>
#include <Eigen/SparseLU>
#include <cmath>
#include <sstream>

#include "chdyn/errors.hpp"

namespace chdyn {

namespace {

std::string describe_index(Eigen::Index i, const BlockNamer& namer) {
  std::ostringstream os;
  os << "index " << i;
  if (namer) os << " (" << namer(i) << ")";
  return os.str();
}

// Structurally empty rows or columns make the factorization fail; report them
// by block before Eigen's generic message.
void check_structure(const SparseMatrix& a, const BlockNamer& namer) {
  Eigen::VectorXi row_count = Eigen::VectorXi::Zero(a.rows());
  Eigen::VectorXi col_count = Eigen::VectorXi::Zero(a.cols());
  for (Eigen::Index k = 0; k < a.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) {
      if (it.value() != 0.0) {
        ++row_count[it.row()];
        ++col_count[it.col()];
      }
    }
  }
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    if (row_count[i] == 0) {
      throw SolverError("singular matrix: zero row at " + describe_index(i, namer));
    }
  }
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    if (col_count[j] == 0) {
      throw SolverError("singular matrix: zero column at " + describe_index(j, namer));
    }
  }
}

class SparseFactorization {
 public:
  void factorize(const SparseMatrix& a, const BlockNamer& namer) {
    if (!analyzed_ || a.rows() != rows_ || a.nonZeros() != nnz_) {
      lu_.analyzePattern(a);
      analyzed_ = true;
      rows_ = a.rows();
      nnz_ = a.nonZeros();
    }
    valid_ = false;
    lu_.factorize(a);
    if (lu_.info() != Eigen::Success) {
      check_structure(a, namer);
      std::string msg = "sparse LU failed: " + lu_.lastErrorMessage();
      // Eigen reports the failing pivot as a (permuted) column index.
      const auto pos = msg.find_last_not_of("0123456789");
      if (pos + 1 < msg.size()) {
        const Eigen::Index k = std::stol(msg.substr(pos + 1));
        if (k >= 0 && k < a.cols()) {
          const Eigen::Index col = lu_.colsPermutation().indices()[k];
          msg += "; zero pivot near " + describe_index(col, namer);
        }
      }
      throw SolverError(msg);
    }
    valid_ = true;
  }

  [[nodiscard]] bool valid_for(Eigen::Index rows) const { return valid_ && rows == rows_; }
  void invalidate() { valid_ = false; }

  Vector solve(const Vector& b) const {
    Vector x = lu_.solve(b);
    if (!x.allFinite()) throw SolverError("sparse LU produced non-finite solution");
    return x;
  }

 private:
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu_;
  bool analyzed_ = false;
  bool valid_ = false;
  Eigen::Index rows_ = -1;
  Eigen::Index nnz_ = -1;
};

}  // namespace

struct NewtonWorkspaceImpl {
  SparseFactorization lu;
};

NewtonWorkspace::NewtonWorkspace() : impl_(std::make_unique<NewtonWorkspaceImpl>()) {}
NewtonWorkspace::~NewtonWorkspace() = default;
NewtonWorkspace::NewtonWorkspace(NewtonWorkspace&&) noexcept = default;
NewtonWorkspace& NewtonWorkspace::operator=(NewtonWorkspace&&) noexcept = default;
void NewtonWorkspace::reset() { impl_->lu.invalidate(); }

void NewtonSettings::validate() const {
  if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) {
    throw InvalidArgument("NewtonSettings: tolerances must be positive");
  }
  if (max_iters < 1) throw InvalidArgument("NewtonSettings: max_iters must be >= 1");
  if (refresh_ratio < 0.0 || refresh_ratio >= 1.0) {
    throw InvalidArgument("NewtonSettings: refresh_ratio must lie in [0, 1)");
  }
  if (damping < 0.0 || damping >= 1.0) {
    throw InvalidArgument("NewtonSettings: damping must lie in [0, 1)");
  }
}

Vector sparse_linear_solve(const SparseMatrix& a, const Vector& b, const BlockNamer& namer) {
  if (a.rows() != a.cols() || a.rows() != b.size()) {
    throw InvalidArgument("sparse_linear_solve: dimension mismatch");
  }
  SparseMatrix compressed = a;
  compressed.makeCompressed();
  SparseFactorization lu;
  lu.factorize(compressed, namer);
  return lu.solve(b);
}

NewtonResult newton_solve(const ResidualFn& residual, const JacobianFn& jacobian, Vector x0,
                          const NewtonSettings& settings, const BlockNamer& namer,
                          NewtonWorkspace* workspace) {
  settings.validate();
  NewtonResult out;
  out.x = std::move(x0);
  Vector r = residual(out.x);
  double norm = r.norm();
  out.residual_history.push_back(norm);
  const double tol = std::max(settings.abs_tol, settings.rel_tol * norm);

  NewtonWorkspace local;
  SparseFactorization& lu = (workspace != nullptr ? *workspace : local).impl().lu;
  bool have_factor = settings.refresh_ratio > 0.0 && lu.valid_for(out.x.size());
  while (norm > tol) {
    if (out.iterations >= settings.max_iters) {
      std::ostringstream os;
      os << "Newton did not converge in " << settings.max_iters << " iterations (residual " << norm
         << ", tolerance " << tol << ")";
      throw StepFailure(os.str(), out.residual_history, out.x);
    }
    const bool fresh = !have_factor;
    if (fresh) {
      SparseMatrix jac = jacobian(out.x);
      jac.makeCompressed();
      lu.invalidate();
      lu.factorize(jac, namer);
      have_factor = true;
    }
    const Vector dx = lu.solve(-r);

    double alpha = 1.0;
    Vector trial = out.x + dx;
    Vector r_trial = residual(trial);
    if (!fresh && !(r_trial.norm() <= settings.refresh_ratio * norm)) {
      // The reused Jacobian no longer contracts well enough; relinearize.
      have_factor = false;
      continue;
    }
    for (int b = 0;
         settings.damping > 0.0 && b < settings.max_backtracks && !(r_trial.norm() < norm); ++b) {
      alpha *= settings.damping;
      trial = out.x + alpha * dx;
      r_trial = residual(trial);
    }
    out.x = std::move(trial);
    r = std::move(r_trial);
    const double previous = norm;
    norm = r.norm();
    if (!std::isfinite(norm)) {
      throw StepFailure("Newton produced a non-finite residual", out.residual_history, out.x);
    }
    if (!(norm <= settings.refresh_ratio * previous)) have_factor = false;
    out.residual_history.push_back(norm);
    ++out.iterations;
  }
  out.residual_norm = norm;
  return out;
}

NewtonResult dense_newton_solve(const ResidualFn& residual, Vector x0,
                                const NewtonSettings& settings) {
  settings.validate();
  NewtonResult out;
  out.x = std::move(x0);
  Vector r = residual(out.x);
  double norm = r.norm();
  out.residual_history.push_back(norm);
  const double tol = std::max(settings.abs_tol, settings.rel_tol * norm);
  const Eigen::Index n = out.x.size();

  while (norm > tol) {
    if (out.iterations >= settings.max_iters) {
      throw StepFailure("dense Newton did not converge", out.residual_history, out.x);
    }
    Eigen::MatrixXd jac(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double h = 1e-6 * std::max(1.0, std::abs(out.x[j]));
      Vector xp = out.x, xm = out.x;
      xp[j] += h;
      xm[j] -= h;
      jac.col(j) = (residual(xp) - residual(xm)) / (2.0 * h);
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(jac);
    out.x += lu.solve(-r);
    r = residual(out.x);
    norm = r.norm();
    out.residual_history.push_back(norm);
    ++out.iterations;
  }
  out.residual_norm = norm;
  return out;
}

}  // namespace chdyn
