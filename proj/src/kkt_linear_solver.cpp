#include "ddcd/kkt_linear_solver.hpp"

#include <Eigen/SparseLU>

#include <vector>

namespace ddcd {

const char* to_string(LinearBackend backend) {
  return backend == LinearBackend::Sparse ? "sparse" : "dense";
}

LinearBackend parse_linear_backend(const std::string& name) {
  if (name == "sparse") return LinearBackend::Sparse;
  if (name == "dense") return LinearBackend::Dense;
  throw InvalidInput("unknown linear solver backend '" + name + "'");
}

struct KktLinearSolver::Impl {
  SpMat matrix;
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> sparse;
  std::vector<int> outer, inner;
  bool analyzed = false;
  Eigen::PartialPivLU<MatX> dense;
};

KktLinearSolver::KktLinearSolver(LinearBackend backend)
    : backend_(backend), impl_(std::make_unique<Impl>()) {}
KktLinearSolver::~KktLinearSolver() = default;
KktLinearSolver::KktLinearSolver(KktLinearSolver&&) noexcept = default;
KktLinearSolver& KktLinearSolver::operator=(KktLinearSolver&&) noexcept = default;

bool KktLinearSolver::factorize(const SpMat& matrix) {
  Impl& s = *impl_;
  s.matrix = matrix;
  s.matrix.makeCompressed();
  if (backend_ == LinearBackend::Dense) {
    s.dense.compute(MatX(s.matrix));
    const auto diag = s.dense.matrixLU().diagonal();
    for (Eigen::Index i = 0; i < diag.size(); ++i) {
      if (!(std::abs(diag[i]) > 0.0) || !std::isfinite(diag[i])) return false;
    }
    return true;
  }
  const int n_outer = static_cast<int>(s.matrix.outerSize());
  const int nnz = static_cast<int>(s.matrix.nonZeros());
  const bool same_pattern =
      s.analyzed && static_cast<int>(s.outer.size()) == n_outer + 1 &&
      static_cast<int>(s.inner.size()) == nnz &&
      std::equal(s.outer.begin(), s.outer.end(), s.matrix.outerIndexPtr()) &&
      std::equal(s.inner.begin(), s.inner.end(), s.matrix.innerIndexPtr());
  if (!same_pattern) {
    s.sparse.analyzePattern(s.matrix);
    s.outer.assign(s.matrix.outerIndexPtr(), s.matrix.outerIndexPtr() + n_outer + 1);
    s.inner.assign(s.matrix.innerIndexPtr(), s.matrix.innerIndexPtr() + nnz);
    s.analyzed = true;
  }
  s.sparse.factorize(s.matrix);
  return s.sparse.info() == Eigen::Success;
}

bool KktLinearSolver::solve(const VecX& rhs, VecX& x) const {
  const Impl& s = *impl_;
  if (backend_ == LinearBackend::Dense) {
    x = s.dense.solve(rhs);
  } else {
    x = s.sparse.solve(rhs);
    if (s.sparse.info() != Eigen::Success) return false;
  }
  if (!x.allFinite()) return false;
  // Reject solutions that do not actually solve the system (numerically
  // singular pivots slip through partial pivoting).
  const double residual = (s.matrix * x - rhs).lpNorm<Eigen::Infinity>();
  double scale = rhs.lpNorm<Eigen::Infinity>();
  for (int k = 0; k < s.matrix.outerSize(); ++k)
    for (SpMat::InnerIterator it(s.matrix, k); it; ++it)
      scale = std::max(scale, std::abs(it.value()) * std::abs(x[it.col()]));
  return residual <= 1e-8 * scale;
}

}  // namespace ddcd
