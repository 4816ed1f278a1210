#pragma once

#include "mbl/types.hpp"

#include <functional>
#include <optional>

namespace mbl {

template <typename DerivedA, typename DerivedB>
Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic> kron(
    const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic> out(a.rows() * b.rows(),
                                                                               a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

template <typename DerivedA, typename DerivedB>
auto commutator(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  return (a * b - b * a).eval();
}

/// ‖m − m†‖_F / ‖m‖_F, zero for the zero matrix.
template <typename Derived>
double hermiticity_defect(const Eigen::MatrixBase<Derived>& m) {
  const double scale = m.norm();
  if (scale == 0.0) return 0.0;
  return (m - m.adjoint()).norm() / scale;
}

template <typename Derived>
bool is_hermitian(const Eigen::MatrixBase<Derived>& m, double rel_tol = 1e-12) {
  return m.rows() == m.cols() && hermiticity_defect(m) <= rel_tol;
}

/// ‖u u† − 1‖_F (an upper bound on the spectral defect).
template <typename Derived>
double unitarity_defect(const Eigen::MatrixBase<Derived>& u) {
  using Plain = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  return (u * u.adjoint() - Plain::Identity(u.rows(), u.cols())).norm();
}

/// In-place fast Walsh–Hadamard transform: v[k] <- Σ_b (−1)^{popcount(k & b)} v[b].
template <typename Derived>
void walsh_hadamard(Eigen::DenseBase<Derived>& v) {
  const Index n = v.size();
  for (Index h = 1; h < n; h <<= 1)
    for (Index i = 0; i < n; i += 2 * h)
      for (Index j = i; j < i + h; ++j) {
        const auto a = v(j);
        const auto b = v(j + h);
        v(j) = a + b;
        v(j + h) = a - b;
      }
}

struct IterativeOptions {
  double tol = 1e-13;       ///< relative residual on the Ritz value
  Index max_krylov = 80;
  int max_restarts = 30;
  /// Return as soon as a Ritz value exceeds this (Ritz values are lower bounds).
  std::optional<double> stop_above;
};

struct IterativeResult {
  double value = 0.0;
  Index matvecs = 0;
  bool converged = false;
  bool exceeded = false;  ///< stopped early because value > stop_above
};

using LinearMap = std::function<void(const Eigen::Ref<const Vector>&, Eigen::Ref<Vector>)>;

/// Largest eigenvalue of a Hermitian positive semidefinite map (Lanczos, full reorthogonalization).
IterativeResult lanczos_top_eigenvalue(const LinearMap& apply, Index dim, const IterativeOptions& opts = {});

/// Largest singular value by Lanczos on the smaller Gram matrix. stop_above is in singular-value units.
IterativeResult largest_singular_value(const Eigen::Ref<const Matrix>& m, const IterativeOptions& opts = {});

/// Largest singular value by dense SVD.
double spectral_norm_dense(const Eigen::Ref<const Matrix>& m);

/// Dense SVD up to 256, Lanczos above (dense again if Lanczos stalls below 4096); NumericalError beyond that.
double spectral_norm(const Eigen::Ref<const Matrix>& m);

/// max |eigenvalue| of a Hermitian matrix (lower triangle read); dense up to 4096.
double hermitian_spectral_norm(const Eigen::Ref<const Matrix>& m);

/// Rows and columns of one connected component of a matrix's nonzero pattern (as a bipartite graph).
struct MatrixBlock {
  std::vector<Index> rows, cols;
};

/// Components with at least one nonzero entry, ordered by their smallest row. The spectral norm of m is
/// the largest norm among the gathered blocks.
std::vector<MatrixBlock> nonzero_blocks(const Eigen::Ref<const Matrix>& m);
Matrix gather_block(const Eigen::Ref<const Matrix>& m, const MatrixBlock& b);

struct NormBounds {
  double lower = 0.0;
  double upper = 0.0;
};

/// O(rows·cols) bounds: largest row/column 2-norm below, min(Frobenius, sqrt(‖m‖₁‖m‖∞)) above.
NormBounds cheap_norm_bounds(const Eigen::Ref<const Matrix>& m);

}  // namespace mbl
