#pragma once

#include <memory>
#include <string>

#include "ddcd/types.hpp"

namespace ddcd {

enum class LinearBackend { Sparse, Dense };

const char* to_string(LinearBackend backend);
LinearBackend parse_linear_backend(const std::string& name);

/// Factorizes symmetric indefinite KKT matrices. The sparse backend keeps
/// the symbolic analysis between calls as long as the sparsity pattern does
/// not change.
class KktLinearSolver {
 public:
  explicit KktLinearSolver(LinearBackend backend = LinearBackend::Sparse);
  ~KktLinearSolver();
  KktLinearSolver(KktLinearSolver&&) noexcept;
  KktLinearSolver& operator=(KktLinearSolver&&) noexcept;

  LinearBackend backend() const { return backend_; }

  /// Returns false if the matrix is numerically singular.
  bool factorize(const SpMat& matrix);
  /// Solves with the last factorized matrix; returns false on a non-finite
  /// or inaccurate solution.
  bool solve(const VecX& rhs, VecX& x) const;

 private:
  struct Impl;
  LinearBackend backend_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace ddcd
