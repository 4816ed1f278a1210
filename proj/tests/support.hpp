#pragma once

#include "mbl/operator_core.hpp"
#include "mbl/rng.hpp"

namespace mbl::test {

inline Matrix random_matrix(RandomStream& rng, Index rows, Index cols) {
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = Complex(rng.normal(), rng.normal());
  return m;
}

inline Matrix random_hermitian(RandomStream& rng, Index dim) {
  const Matrix g = random_matrix(rng, dim, dim);
  return 0.5 * (g + g.adjoint());
}

inline LocalOperator random_qubit_operator(RandomStream& rng, const SiteSet& support, bool hermitian = false) {
  const Index dim = Index{1} << support.size();
  return LocalOperator::qubits(support, hermitian ? random_hermitian(rng, dim) : random_matrix(rng, dim, dim));
}

inline Matrix single(int letter) { return pauli_matrix(letter); }

/// Kronecker product of one 2×2 factor per site, site 0 leftmost.
inline Matrix product(const std::vector<Matrix>& factors) {
  Matrix out = Matrix::Ones(1, 1);
  for (const auto& f : factors) {
    Matrix next(out.rows() * f.rows(), out.cols() * f.cols());
    for (Index i = 0; i < out.rows(); ++i)
      for (Index j = 0; j < out.cols(); ++j) next.block(i * f.rows(), j * f.cols(), f.rows(), f.cols()) = out(i, j) * f;
    out = next;
  }
  return out;
}

/// σ^letter at position `site` of an n-site chain.
inline Matrix at_site(int letter, int site, int n) {
  std::vector<Matrix> f(static_cast<std::size_t>(n), Matrix::Identity(2, 2));
  f[static_cast<std::size_t>(site)] = pauli_matrix(letter);
  return product(f);
}

inline double spectral(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

}  // namespace mbl::test
