#include "mbl/linalg.hpp"

#include <numeric>

#include "mbl/errors.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <random>

namespace mbl {

namespace {

Vector start_vector(Index dim) {
  std::mt19937_64 gen(0x5eed0000ULL + static_cast<std::uint64_t>(dim));
  Vector v(dim);
  for (Index i = 0; i < dim; ++i) {
    const double re = static_cast<double>(gen() >> 11) * 0x1.0p-53 - 0.5;
    const double im = static_cast<double>(gen() >> 11) * 0x1.0p-53 - 0.5;
    v(i) = Complex(re, im);
  }
  v.normalize();
  return v;
}

}  // namespace

IterativeResult lanczos_top_eigenvalue(const LinearMap& apply, Index dim, const IterativeOptions& opts) {
  IterativeResult res;
  if (dim <= 0) {
    res.converged = true;
    return res;
  }
  const Index kmax = std::min<Index>(dim, std::max<Index>(opts.max_krylov, 2));
  Matrix basis(dim, kmax + 1);
  Vector w(dim);
  Vector start = start_vector(dim);
  RealVector diag(kmax);
  RealVector sub(kmax);
  double best = 0.0;

  for (int restart = 0; restart <= opts.max_restarts; ++restart) {
    basis.col(0) = start;
    RealVector ritz_vec;
    Index used = 0;
    double scale = 0.0;
    for (Index k = 0; k < kmax; ++k) {
      apply(basis.col(k), w);
      ++res.matvecs;
      diag(k) = basis.col(k).dot(w).real();
      scale = std::max(scale, std::abs(diag(k)));
      for (int pass = 0; pass < 2; ++pass) {
        const Vector coeff = basis.leftCols(k + 1).adjoint() * w;
        w.noalias() -= basis.leftCols(k + 1) * coeff;
      }
      const double b = w.norm();
      scale = std::max(scale, b);

      const bool check = k < 12 || k % 3 == 0 || k + 1 == kmax;
      const bool breakdown = b <= 1e-14 * scale || k + 1 == dim;
      if (check || breakdown) {
        Eigen::SelfAdjointEigenSolver<RealMatrix> tri;
        RealVector d = diag.head(k + 1);
        RealVector s = sub.head(std::max<Index>(k, 0));
        if (k == 0) {
          ritz_vec = RealVector::Ones(1);
          best = std::max(best, d(0));
          if (breakdown) {
            res.value = std::max(d(0), 0.0);
            res.converged = true;
            return res;
          }
        } else {
          tri.computeFromTridiagonal(d, s, Eigen::ComputeEigenvectors);
          const double theta = tri.eigenvalues()(k);
          ritz_vec = tri.eigenvectors().col(k);
          best = std::max(best, theta);
          const double resid = b * std::abs(ritz_vec(k));
          if (opts.stop_above && theta > *opts.stop_above) {
            res.value = theta;
            res.exceeded = true;
            return res;
          }
          if (breakdown || resid <= opts.tol * std::max(std::abs(theta), 1e-300) || scale == 0.0) {
            res.value = std::max(theta, 0.0);
            res.converged = true;
            return res;
          }
        }
        used = k + 1;
      }
      sub(k) = b;
      basis.col(k + 1) = w / b;
    }
    if (ritz_vec.size() != used || used == 0) break;
    start = basis.leftCols(used) * ritz_vec.cast<Complex>();
    start.normalize();
  }
  res.value = std::max(best, 0.0);
  return res;
}

IterativeResult largest_singular_value(const Eigen::Ref<const Matrix>& m, const IterativeOptions& opts) {
  IterativeResult out;
  if (m.size() == 0) {
    out.converged = true;
    return out;
  }
  IterativeOptions gram_opts = opts;
  if (opts.stop_above) gram_opts.stop_above = (*opts.stop_above) * (*opts.stop_above);
  const bool wide = m.rows() <= m.cols();
  const Index dim = wide ? m.rows() : m.cols();
  Vector tmp(wide ? m.cols() : m.rows());
  LinearMap apply;
  if (wide) {
    apply = [&](const Eigen::Ref<const Vector>& x, Eigen::Ref<Vector> y) {
      tmp.noalias() = m.adjoint() * x;
      y.noalias() = m * tmp;
    };
  } else {
    apply = [&](const Eigen::Ref<const Vector>& x, Eigen::Ref<Vector> y) {
      tmp.noalias() = m * x;
      y.noalias() = m.adjoint() * tmp;
    };
  }
  out = lanczos_top_eigenvalue(apply, dim, gram_opts);
  out.value = std::sqrt(std::max(out.value, 0.0));
  return out;
}

double spectral_norm_dense(const Eigen::Ref<const Matrix>& m) {
  if (m.size() == 0) return 0.0;
  Eigen::BDCSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

double spectral_norm(const Eigen::Ref<const Matrix>& m) {
  if (std::max(m.rows(), m.cols()) <= 256) return spectral_norm_dense(m);
  const IterativeResult r = largest_singular_value(m);
  // clustered top singular values (noise-level matrices) stall Lanczos; dense SVD is still affordable here
  if (!r.converged && std::max(m.rows(), m.cols()) <= 4096) return spectral_norm_dense(m);
  if (!r.converged)
    throw NumericalError("spectral_norm: Lanczos did not converge (dim " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()) + ", " + std::to_string(r.matvecs) + " products)");
  return r.value;
}

double hermitian_spectral_norm(const Eigen::Ref<const Matrix>& m) {
  if (m.size() == 0) return 0.0;
  if (m.rows() > 4096) return spectral_norm(m);
  auto extreme = [](const RealVector& ev) { return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1))); };
  if (m.imag().isZero(0.0)) {
    const RealMatrix re = m.real();
    return extreme(Eigen::SelfAdjointEigenSolver<RealMatrix>(re, Eigen::EigenvaluesOnly).eigenvalues());
  }
  return extreme(Eigen::SelfAdjointEigenSolver<Matrix>(m, Eigen::EigenvaluesOnly).eigenvalues());
}

std::vector<MatrixBlock> nonzero_blocks(const Eigen::Ref<const Matrix>& m) {
  const Index R = m.rows(), C = m.cols();
  // union-find over rows 0..R-1 and columns R..R+C-1
  std::vector<Index> parent(static_cast<std::size_t>(R + C));
  std::iota(parent.begin(), parent.end(), Index{0});
  auto find = [&](Index v) {
    while (parent[static_cast<std::size_t>(v)] != v) {
      parent[static_cast<std::size_t>(v)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])];
      v = parent[static_cast<std::size_t>(v)];
    }
    return v;
  };
  std::vector<bool> touched(static_cast<std::size_t>(R + C), false);
  for (Index j = 0; j < C; ++j)
    for (Index i = 0; i < R; ++i) {
      if (m(i, j) == Complex(0.0, 0.0)) continue;
      touched[static_cast<std::size_t>(i)] = touched[static_cast<std::size_t>(R + j)] = true;
      const Index a = find(i), b = find(R + j);
      if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
    }
  std::vector<Index> slot(static_cast<std::size_t>(R + C), -1);
  std::vector<MatrixBlock> out;
  for (Index v = 0; v < R + C; ++v) {
    if (!touched[static_cast<std::size_t>(v)]) continue;
    const Index root = find(v);
    Index& k = slot[static_cast<std::size_t>(root)];
    if (k < 0) {
      k = static_cast<Index>(out.size());
      out.emplace_back();
    }
    auto& blk = out[static_cast<std::size_t>(k)];
    if (v < R)
      blk.rows.push_back(v);
    else
      blk.cols.push_back(v - R);
  }
  return out;
}

Matrix gather_block(const Eigen::Ref<const Matrix>& m, const MatrixBlock& b) {
  Matrix out(static_cast<Index>(b.rows.size()), static_cast<Index>(b.cols.size()));
  for (std::size_t j = 0; j < b.cols.size(); ++j)
    for (std::size_t i = 0; i < b.rows.size(); ++i)
      out(static_cast<Index>(i), static_cast<Index>(j)) = m(b.rows[i], b.cols[j]);
  return out;
}

NormBounds cheap_norm_bounds(const Eigen::Ref<const Matrix>& m) {
  NormBounds b;
  if (m.size() == 0) return b;
  // one pass: squared and plain column/row sums
  RealVector col_sq = RealVector::Zero(m.cols()), col_abs = RealVector::Zero(m.cols());
  RealVector row_sq = RealVector::Zero(m.rows()), row_abs = RealVector::Zero(m.rows());
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i) {
      const double sq = std::norm(m(i, j));
      const double a = std::sqrt(sq);
      col_sq(j) += sq;
      col_abs(j) += a;
      row_sq(i) += sq;
      row_abs(i) += a;
    }
  b.lower = std::sqrt(std::max(col_sq.maxCoeff(), row_sq.maxCoeff()));
  b.upper = std::min(std::sqrt(col_sq.sum()), std::sqrt(col_abs.maxCoeff() * row_abs.maxCoeff()));
  b.upper = std::max(b.upper, b.lower);
  return b;
}

}  // namespace mbl
