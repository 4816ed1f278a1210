#include "mbl/lioms.hpp"
#include "mbl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

namespace mbl {

namespace {

Matrix full_matrix(const EigenSystem& es, const LocalOperator& a) {
  if (!es.chain().contains(a.support())) throw DomainError("operator not on the system's chain");
  LocalOperator f = embed(a, es.chain());
  if (f.dim() != es.dim()) throw DomainError("operator dimensions do not match the chain");
  return f.matrix();
}

LocalOperator on_chain(const EigenSystem& es, Matrix m, std::optional<bool> hint) {
  return LocalOperator(es.chain().sites(), es.chain().dims(), std::move(m), hint);
}

double block_energy(const EigenSystem& es, Index block, Index k) {
  return es.blocks()[static_cast<std::size_t>(block)].energies(k);
}

/// (e^{ix} − 1)/(ix)
Complex average_kernel(double x) {
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    return {1.0 - x2 / 6.0, x / 2.0 - x * x2 / 24.0};
  }
  return (std::exp(Complex(0.0, x)) - 1.0) / Complex(0.0, x);
}

/// ‖m − Π_region(m)‖ for a full-chain matrix.
double outside_defect(const Matrix& m, const Chain& chain, const SiteSet& region) {
  if (static_cast<Index>(region.size()) == chain.size()) return 0.0;
  const TensorSplit split(chain, region);
  const Matrix r = m - expand_from_subset(reduce_to_subset(m, split), split);
  // Π preserves Hermiticity, so a Hermitian input can use the symmetric eigensolver
  return is_hermitian(m) ? hermitian_spectral_norm(r) : spectral_norm(r);
}

/// U† P U for a Pauli word P.
Matrix conjugate_pauli(const Eigen::Ref<const Matrix>& U, const PauliWord& w, const Chain& chain) {
  const PauliAction act = pauli_action(w, chain);
  const Matrix pu = pauli_left(act, U);
  return U.adjoint() * pu;
}

}  // namespace

LocalOperator finite_time_average(const EigenSystem& es, const LocalOperator& a, double T) {
  if (!(T > 0.0)) throw DomainError("finite_time_average: T must be positive");
  auto blocks = es.to_eigenbasis(full_matrix(es, a));
  for (auto& op : blocks)
    for (Index c = 0; c < op.m.cols(); ++c)
      for (Index r = 0; r < op.m.rows(); ++r) {
        const double delta = block_energy(es, op.p, r) - block_energy(es, op.q, c);
        if (delta != 0.0) op.m(r, c) *= average_kernel(T * delta);
      }
  return on_chain(es, es.from_eigenbasis(blocks), std::nullopt);
}

double default_gap_tol(const EigenSystem& es) { return 1e-9 * es.spectral_radius(); }

DephasedOperator dephase(const EigenSystem& es, const LocalOperator& a, double gap_tol) {
  if (gap_tol < 0.0) gap_tol = default_gap_tol(es);
  auto blocks = es.to_eigenbasis(full_matrix(es, a));
  for (auto& op : blocks)
    for (Index c = 0; c < op.m.cols(); ++c)
      for (Index r = 0; r < op.m.rows(); ++r)
        if (std::abs(block_energy(es, op.p, r) - block_energy(es, op.q, c)) > gap_tol) op.m(r, c) = 0.0;
  std::erase_if(blocks, [](const EigenSystem::BlockOp& op) { return op.m.isZero(0.0); });
  DephasedOperator out;
  out.op = on_chain(es, es.from_eigenbasis(blocks), a.hermitian_hint());
  out.eigen_blocks = std::move(blocks);
  out.gap_tol = gap_tol;
  return out;
}

double LocalityProfile::at(Site x, int r) const {
  const auto it = std::find(sites.begin(), sites.end(), x);
  if (it == sites.end() || r < 0 || r >= values.cols()) throw DomainError("LocalityProfile::at: out of range");
  return values(it - sites.begin(), r);
}

SecondKindLioms build_lioms_second_kind(const EigenSystem& es, const std::vector<LocalOperator>& terms,
                                        double gap_tol) {
  const Chain& chain = es.chain();
  if (static_cast<Index>(terms.size()) != chain.size())
    throw DomainError("build_lioms_second_kind: need one term per chain site");
  Matrix sum = Matrix::Zero(es.dim(), es.dim());
  for (const auto& h : terms) sum += full_matrix(es, h);
  std::vector<EigenSystem::BlockOp> diag;
  for (std::size_t p = 0; p < es.blocks().size(); ++p) {
    const auto& b = es.blocks()[p];
    diag.push_back({static_cast<Index>(p), static_cast<Index>(p), b.energies.cast<Complex>().asDiagonal()});
  }
  const Matrix H = es.from_eigenbasis(diag);
  if ((sum - H).norm() > 1e-10 * std::max(1.0, H.norm()))
    throw DomainError("build_lioms_second_kind: local terms do not sum to H");

  SecondKindLioms out;
  const Index N = chain.size();
  out.profile.sites = chain.sites();
  out.profile.values = RealMatrix::Zero(N, N);
  for (Index i = 0; i < N; ++i) {
    out.lioms.push_back(dephase(es, terms[static_cast<std::size_t>(i)], gap_tol));
    const Matrix& m = out.lioms.back().op.matrix();
    const Site x = chain.first() + static_cast<Site>(i);
    for (Index r = 0; r < N; ++r)
      out.profile.values(i, r) = outside_defect(m, chain, neighborhood({x}, static_cast<int>(r), chain));
  }
  return out;
}

Index LiomFirstKind::mask_of(const SiteSet& X) const {
  Index mask = 0;
  for (Site x : X) {
    if (!chain.contains(x)) throw DomainError("LiomFirstKind: site outside chain");
    mask |= Index{1} << (chain.size() - 1 - chain.position(x));
  }
  return mask;
}

RealVector character_transform(const RealVector& diagonal) {
  RealVector phi = diagonal;
  walsh_hadamard(phi);
  return phi / static_cast<double>(diagonal.size());
}

RealVector inverse_character_transform(const RealVector& phi) {
  RealVector d = phi;
  walsh_hadamard(d);
  return d;
}

RealMatrix two_point_kernel(const RealVector& phi, Index n_sites) {
  RealMatrix T = RealMatrix::Zero(n_sites, n_sites);
  std::vector<Index> members;
  for (Index mask = 1; mask < phi.size(); ++mask) {
    const double v = std::abs(phi(mask));
    if (v == 0.0) continue;
    members.clear();
    for (Index p = 0; p < n_sites; ++p)
      if (mask >> (n_sites - 1 - p) & 1) members.push_back(p);
    for (Index a : members)
      for (Index b : members) T(a, b) += v;
  }
  return T;
}

LiomFirstKind liom_first_kind_decompose(const EigenSystem& es, const Chain& chain) {
  if (!chain.all_qubits()) throw UnsupportedDimensionError("liom_first_kind_decompose: qubit chains only");
  if (!(chain == es.chain())) throw DomainError("liom_first_kind_decompose: chain differs from the system's");
  const Index dim = es.dim();
  if (dim > (Index{1} << 12)) throw ResourceError("liom_first_kind_decompose: more than 2^12 states");

  struct Candidate {
    double weight;
    std::uint32_t state, eigen;
  };
  std::vector<Candidate> cand;
  for (const auto& b : es.blocks())
    for (Index c = 0; c < b.vectors.cols(); ++c)
      for (Index r = 0; r < b.vectors.rows(); ++r) {
        const double w = std::abs(b.vectors(r, c));
        if (w > 0.0)
          cand.push_back({w, static_cast<std::uint32_t>(b.states[static_cast<std::size_t>(r)]),
                          static_cast<std::uint32_t>(b.global[static_cast<std::size_t>(c)])});
      }
  std::sort(cand.begin(), cand.end(), [](const Candidate& a, const Candidate& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    if (a.state != b.state) return a.state < b.state;
    return a.eigen < b.eigen;
  });

  constexpr Index kNone = -1;
  std::vector<Index> assignment(static_cast<std::size_t>(dim), kNone);
  std::vector<bool> used(static_cast<std::size_t>(dim), false);
  for (const auto& c : cand) {
    if (assignment[c.state] != kNone || used[c.eigen]) continue;
    assignment[c.state] = c.eigen;
    used[c.eigen] = true;
  }
  Index next_free = 0;
  for (auto& a : assignment) {
    if (a != kNone) continue;
    while (used[static_cast<std::size_t>(next_free)]) ++next_free;
    a = next_free;
    used[static_cast<std::size_t>(next_free)] = true;
  }

  // eigen index -> (block, column)
  std::vector<std::pair<Index, Index>> where(static_cast<std::size_t>(dim));
  for (std::size_t p = 0; p < es.blocks().size(); ++p)
    for (std::size_t c = 0; c < es.blocks()[p].global.size(); ++c)
      where[static_cast<std::size_t>(es.blocks()[p].global[c])] = {static_cast<Index>(p), static_cast<Index>(c)};

  LiomFirstKind lf;
  lf.chain = chain;
  lf.assignment = assignment;
  lf.U = Matrix::Zero(dim, dim);
  lf.diagonal.resize(dim);
  for (Index b = 0; b < dim; ++b) {
    const Index k = assignment[static_cast<std::size_t>(b)];
    const auto [p, c] = where[static_cast<std::size_t>(k)];
    const auto& blk = es.blocks()[static_cast<std::size_t>(p)];
    Vector v = Vector::Zero(dim);
    for (std::size_t r = 0; r < blk.states.size(); ++r) v(blk.states[r]) = blk.vectors(static_cast<Index>(r), c);
    const double mag = std::abs(v(b));
    if (mag > 0.0) v *= std::conj(v(b)) / mag;
    lf.U.col(b) = v;
    lf.diagonal(b) = es.energies()(k);
  }
  lf.phi = character_transform(lf.diagonal);
  lf.two_point = two_point_kernel(lf.phi, chain.size());
  return lf;
}

LocalityProfile unitary_quasilocality_profile(const Eigen::Ref<const Matrix>& U, const Chain& chain,
                                              const SiteSet& sites) {
  if (!chain.all_qubits()) throw UnsupportedDimensionError("unitary_quasilocality_profile: qubit chains only");
  if (U.rows() != chain.total_dim() || U.cols() != chain.total_dim())
    throw DomainError("unitary_quasilocality_profile: dimension mismatch");
  if (unitarity_defect(U) > 1e-8) throw DomainError("unitary_quasilocality_profile: U is not unitary");
  LocalityProfile out;
  out.sites = sites.empty() ? chain.sites() : sites;
  if (!chain.contains(out.sites)) throw DomainError("unitary_quasilocality_profile: site outside chain");
  const Index N = chain.size();
  out.values = RealMatrix::Zero(static_cast<Index>(out.sites.size()), N);
  for (std::size_t i = 0; i < out.sites.size(); ++i) {
    const Site x = out.sites[i];
    for (int letter = 1; letter <= 3; ++letter) {
      const Matrix c = conjugate_pauli(U, PauliWord{{x}, {letter}}, chain);
      for (Index r = 0; r < N; ++r) {
        const double v = outside_defect(c, chain, neighborhood({x}, static_cast<int>(r), chain));
        out.values(static_cast<Index>(i), r) = std::max(out.values(static_cast<Index>(i), r), v);
      }
    }
  }
  return out;
}

double unitary_region_defect(const Eigen::Ref<const Matrix>& U, const Chain& chain, const SiteSet& X,
                             const SiteSet& region) {
  double best = 0.0;
  for (const PauliWord& w : nonidentity_words(X))
    best = std::max(best, outside_defect(conjugate_pauli(U, w, chain), chain, region));
  return best;
}

std::vector<double> empirical_envelope(const RealMatrix& two_point, double floor) {
  const Index N = two_point.rows();
  std::vector<double> F(static_cast<std::size_t>(std::max<Index>(N, 1)), floor);
  for (Index x = 0; x < N; ++x)
    for (Index y = 0; y < N; ++y)
      if (x != y) {
        auto& f = F[static_cast<std::size_t>(std::abs(x - y))];
        f = std::max(f, two_point(x, y));
      }
  for (Index r = N - 2; r >= 1; --r)
    F[static_cast<std::size_t>(r)] = std::max(F[static_cast<std::size_t>(r)], F[static_cast<std::size_t>(r + 1)]);
  if (N > 1) F[0] = F[1];
  return F;
}

LiomBoundCheck verify_liom_bound(const LiomFirstKind& lf, const EigenSystem& es, const SiteSet& X,
                                 const SiteSet& Y, double t, double lambda_frac,
                                 const std::function<double(int)>& F_in) {
  if (!(lambda_frac > 0.0 && lambda_frac < 0.5)) throw DomainError("verify_liom_bound: lambda_frac must lie in (0, 1/2)");
  const Chain& chain = lf.chain;
  check_estimator_geometry(chain, X, Y);
  int dXY = std::numeric_limits<int>::max();
  for (Site x : X)
    for (Site y : Y) dXY = std::min(dXY, std::abs(x - y));

  std::function<double(int)> F = F_in;
  if (!F) {
    auto env = empirical_envelope(lf.two_point);
    F = [env = std::move(env)](int r) { return env[static_cast<std::size_t>(r)]; };
  }

  LiomBoundCheck out;
  const int radius = static_cast<int>(std::floor(lambda_frac * dXY));
  out.X_lambda = neighborhood(X, radius, chain);
  out.Y_lambda = neighborhood(Y, radius, chain);
  out.D_X = unitary_region_defect(lf.U, chain, X, out.X_lambda);
  out.D_Y = unitary_region_defect(lf.U, chain, Y, out.Y_lambda);

  const Index N = chain.size();
  for (Index a = 0; a < N; ++a)
    for (Index b = 0; b < N; ++b) {
      if (a == b) continue;
      const double f = F(static_cast<int>(std::abs(a - b)));
      if (!(f > 0.0)) throw DomainError("verify_liom_bound: F must be positive");
      out.C = std::max(out.C, lf.two_point(a, b) / f);
    }
  for (Site x : out.X_lambda)
    for (Site y : out.Y_lambda) out.F_sum += F(std::abs(x - y));

  out.lhs = pauli_commutator_estimator(es, X, Y, t);
  out.rhs = 2.0 * (out.D_X + out.D_Y) + 4.0 * std::abs(t) * out.C * out.F_sum;
  return out;
}

void write_phi_csv(std::ostream& os, const LiomFirstKind& lf, double drop_below) {
  const Index N = lf.chain.size();
  os << "mask,value\n";
  os.precision(17);
  for (Index mask = 0; mask < lf.phi.size(); ++mask) {
    const double v = lf.phi(mask);
    if (std::abs(v) <= drop_below) continue;
    Index little = 0;
    for (Index p = 0; p < N; ++p)
      if (mask >> (N - 1 - p) & 1) little |= Index{1} << p;
    os << little << ',' << v << '\n';
  }
}

void write_profile_csv(std::ostream& os, const LocalityProfile& p) {
  os << "x,r,value\n";
  os.precision(17);
  for (std::size_t i = 0; i < p.sites.size(); ++i)
    for (Index r = 0; r < p.values.cols(); ++r) os << p.sites[i] << ',' << r << ',' << p.values(static_cast<Index>(i), r) << '\n';
}

}  // namespace mbl
