#include "mbl/dynamics.hpp"
#include "mbl/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <numeric>

namespace mbl {

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(Index n) : parent_(static_cast<std::size_t>(n)) {
    std::iota(parent_.begin(), parent_.end(), Index{0});
  }
  Index find(Index x) {
    while (parent_[static_cast<std::size_t>(x)] != x) {
      auto& p = parent_[static_cast<std::size_t>(x)];
      p = parent_[static_cast<std::size_t>(p)];
      x = p;
    }
    return x;
  }
  void unite(Index a, Index b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a > b) std::swap(a, b);
    parent_[static_cast<std::size_t>(b)] = a;
  }

 private:
  std::vector<Index> parent_;
};

Chain chain_of(const LocalOperator& h) {
  const SiteSet& s = h.support();
  if (s.empty()) throw DomainError("eigendecompose: operator has empty support");
  for (std::size_t i = 1; i < s.size(); ++i)
    if (s[i] != s[i - 1] + 1) throw DomainError("eigendecompose: support must be a contiguous chain");
  return Chain(s.front(), h.dims());
}

EigenSystem::Block diagonalize(const Matrix& h, std::vector<Index> states) {
  const Index k = static_cast<Index>(states.size());
  Matrix sub(k, k);
  for (Index i = 0; i < k; ++i)
    for (Index j = 0; j < k; ++j) sub(i, j) = h(states[static_cast<std::size_t>(i)], states[static_cast<std::size_t>(j)]);
  sub = 0.5 * (sub + sub.adjoint()).eval();
  EigenSystem::Block b;
  b.states = std::move(states);
  if (sub.imag().isZero(0.0)) {
    Eigen::SelfAdjointEigenSolver<RealMatrix> eig(sub.real());
    if (eig.info() != Eigen::Success) throw NumericalError("eigendecompose: real solver failed on a block of size " + std::to_string(k));
    b.energies = eig.eigenvalues();
    b.vectors = eig.eigenvectors().cast<Complex>();
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sub);
    if (eig.info() != Eigen::Success) throw NumericalError("eigendecompose: solver failed on a block of size " + std::to_string(k));
    b.energies = eig.eigenvalues();
    b.vectors = eig.eigenvectors();
  }
  return b;
}

}  // namespace

EigenSystem::EigenSystem(Chain chain, std::vector<Block> blocks) : chain_(std::move(chain)), blocks_(std::move(blocks)) {
  dim_ = chain_.total_dim();
  block_of_.assign(static_cast<std::size_t>(dim_), -1);
  struct Entry {
    double e;
    Index block, col;
  };
  std::vector<Entry> all;
  all.reserve(static_cast<std::size_t>(dim_));
  for (std::size_t p = 0; p < blocks_.size(); ++p) {
    for (Index s : blocks_[p].states) block_of_[static_cast<std::size_t>(s)] = static_cast<Index>(p);
    for (Index c = 0; c < blocks_[p].energies.size(); ++c) all.push_back({blocks_[p].energies(c), static_cast<Index>(p), c});
  }
  if (static_cast<Index>(all.size()) != dim_) throw DomainError("EigenSystem: blocks do not cover the space");
  std::stable_sort(all.begin(), all.end(), [](const Entry& a, const Entry& b) { return a.e < b.e; });
  energies_.resize(dim_);
  for (auto& b : blocks_) b.global.assign(static_cast<std::size_t>(b.energies.size()), 0);
  for (Index k = 0; k < dim_; ++k) {
    const Entry& e = all[static_cast<std::size_t>(k)];
    energies_(k) = e.e;
    blocks_[static_cast<std::size_t>(e.block)].global[static_cast<std::size_t>(e.col)] = k;
  }
}

double EigenSystem::spectral_radius() const {
  if (dim_ == 0) return 0.0;
  return std::max(std::abs(energies_(0)), std::abs(energies_(dim_ - 1)));
}

Matrix EigenSystem::basis() const {
  Matrix u = Matrix::Zero(dim_, dim_);
  for (const Block& b : blocks_)
    for (Index c = 0; c < b.vectors.cols(); ++c) {
      const Index k = b.global[static_cast<std::size_t>(c)];
      for (Index r = 0; r < b.vectors.rows(); ++r) u(b.states[static_cast<std::size_t>(r)], k) = b.vectors(r, c);
    }
  return u;
}

std::vector<EigenSystem::BlockOp> EigenSystem::to_eigenbasis(const Eigen::Ref<const Matrix>& a, bool upper_only) const {
  if (a.rows() != dim_ || a.cols() != dim_) throw DomainError("to_eigenbasis: dimension mismatch");
  std::vector<BlockOp> out;
  for (std::size_t p = 0; p < blocks_.size(); ++p)
    for (std::size_t q = upper_only ? p : 0; q < blocks_.size(); ++q) {
      const Block& bp = blocks_[p];
      const Block& bq = blocks_[q];
      const Index rp = static_cast<Index>(bp.states.size()), rq = static_cast<Index>(bq.states.size());
      Matrix sub(rp, rq);
      bool nonzero = false;
      for (Index j = 0; j < rq; ++j)
        for (Index i = 0; i < rp; ++i) {
          const Complex v = a(bp.states[static_cast<std::size_t>(i)], bq.states[static_cast<std::size_t>(j)]);
          sub(i, j) = v;
          nonzero = nonzero || v != Complex(0.0);
        }
      if (!nonzero) continue;
      Matrix tmp = bp.vectors.adjoint() * sub;
      out.push_back({static_cast<Index>(p), static_cast<Index>(q), tmp * bq.vectors});
    }
  return out;
}

Matrix EigenSystem::from_eigenbasis(const std::vector<BlockOp>& ops) const {
  Matrix out = Matrix::Zero(dim_, dim_);
  for (const BlockOp& op : ops) {
    const Block& bp = blocks_[static_cast<std::size_t>(op.p)];
    const Block& bq = blocks_[static_cast<std::size_t>(op.q)];
    Matrix tmp = bp.vectors * op.m;
    const Matrix full = tmp * bq.vectors.adjoint();
    for (Index j = 0; j < full.cols(); ++j)
      for (Index i = 0; i < full.rows(); ++i)
        out(bp.states[static_cast<std::size_t>(i)], bq.states[static_cast<std::size_t>(j)]) = full(i, j);
  }
  return out;
}

Matrix EigenSystem::from_eigenbasis_hermitian(const std::vector<BlockOp>& upper) const {
  Matrix out = Matrix::Zero(dim_, dim_);
  for (const BlockOp& op : upper) {
    if (op.p > op.q) throw DomainError("from_eigenbasis_hermitian: block below the diagonal");
    const Block& bp = blocks_[static_cast<std::size_t>(op.p)];
    const Block& bq = blocks_[static_cast<std::size_t>(op.q)];
    Matrix tmp = bp.vectors * op.m;
    const Matrix full = tmp * bq.vectors.adjoint();
    for (Index j = 0; j < full.cols(); ++j)
      for (Index i = 0; i < full.rows(); ++i) {
        const Index r = bp.states[static_cast<std::size_t>(i)], c = bq.states[static_cast<std::size_t>(j)];
        out(r, c) = full(i, j);
        if (op.p != op.q) out(c, r) = std::conj(full(i, j));
      }
  }
  return out;
}

EigenSystem eigendecompose(const LocalOperator& h, const EigenOptions& opts) {
  const Chain chain = chain_of(h);
  const Index dim = h.dim();
  if (dim > opts.dim_cap)
    throw ResourceError("eigendecompose: dimension " + std::to_string(dim) + " exceeds cap " + std::to_string(opts.dim_cap));
  const Matrix& m = h.matrix();
  if (hermiticity_defect(m) > 1e-12) throw DomainError("eigendecompose: Hamiltonian is not Hermitian");

  std::vector<std::vector<Index>> groups;
  if (opts.split_blocks) {
    DisjointSets sets(dim);
    for (Index j = 0; j < dim; ++j)
      for (Index i = j + 1; i < dim; ++i)
        if (m(i, j) != Complex(0.0) || m(j, i) != Complex(0.0)) sets.unite(i, j);
    std::vector<Index> label(static_cast<std::size_t>(dim), -1);
    for (Index s = 0; s < dim; ++s) {
      const Index root = sets.find(s);
      auto& l = label[static_cast<std::size_t>(root)];
      if (l < 0) {
        l = static_cast<Index>(groups.size());
        groups.emplace_back();
      }
      groups[static_cast<std::size_t>(l)].push_back(s);
    }
  } else {
    groups.emplace_back(static_cast<std::size_t>(dim));
    std::iota(groups.back().begin(), groups.back().end(), Index{0});
  }
  std::vector<EigenSystem::Block> blocks;
  blocks.reserve(groups.size());
  for (auto& g : groups) blocks.push_back(diagonalize(m, std::move(g)));
  return EigenSystem(chain, std::move(blocks));
}

HeisenbergEvolver::HeisenbergEvolver(const EigenSystem& es, const Eigen::Ref<const Matrix>& a_full)
    : es_(&es), hermitian_(a_full.rows() == a_full.cols() && a_full == a_full.adjoint()),
      tilde_(es.to_eigenbasis(a_full, hermitian_)) {}

Matrix HeisenbergEvolver::at(double t) const {
  std::vector<EigenSystem::BlockOp> phased = tilde_;
  for (auto& op : phased) {
    const auto& ep = es_->blocks()[static_cast<std::size_t>(op.p)].energies;
    const auto& eq = es_->blocks()[static_cast<std::size_t>(op.q)].energies;
    const Vector left = (ep.cast<Complex>() * Complex(0.0, t)).array().exp().matrix();
    const Vector right = (eq.cast<Complex>() * Complex(0.0, -t)).array().exp().matrix();
    op.m = left.asDiagonal() * op.m * right.asDiagonal();
  }
  return hermitian_ ? es_->from_eigenbasis_hermitian(phased) : es_->from_eigenbasis(phased);
}

LocalOperator heisenberg_evolve(const EigenSystem& es, const LocalOperator& a, double t) {
  if (!es.chain().contains(a.support())) throw DomainError("heisenberg_evolve: operator not on the system's chain");
  const LocalOperator full = embed(a, es.chain());
  if (full.dim() != es.dim()) throw DomainError("heisenberg_evolve: dimension mismatch");
  HeisenbergEvolver ev(es, full.matrix());
  return LocalOperator(full.support(), full.dims(), ev.at(t), a.hermitian_hint());
}

}  // namespace mbl
