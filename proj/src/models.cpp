#include "mbl/models.hpp"

#include "mbl/errors.hpp"
#include "mbl/linalg.hpp"
#include "mbl/rng.hpp"

#include <cmath>
#include <sstream>

namespace mbl {

namespace {

Matrix two_site(int first, int second) { return kron(pauli_matrix(first), pauli_matrix(second)); }

void check_length(const std::vector<double>& v, std::size_t want, const char* what) {
  if (v.size() != want)
    throw ConfigError(std::string(what) + ": expected length " + std::to_string(want) + ", got " +
                      std::to_string(v.size()));
}

}  // namespace

DisorderSpec DisorderSpec::constant(double c) {
  DisorderSpec s;
  s.kind = Kind::constant;
  s.c = c;
  return s;
}

DisorderSpec DisorderSpec::uniform(double a, double b, std::uint64_t seed, std::uint64_t stream_id) {
  DisorderSpec s;
  s.kind = Kind::uniform;
  s.a = a;
  s.b = b;
  s.seed = seed;
  s.stream_id = stream_id;
  return s;
}

DisorderSpec DisorderSpec::bernoulli(double p_zero, std::uint64_t seed, std::uint64_t stream_id) {
  DisorderSpec s;
  s.kind = Kind::bernoulli;
  s.p_zero = p_zero;
  s.seed = seed;
  s.stream_id = stream_id;
  return s;
}

void DisorderSpec::validate() const {
  switch (kind) {
    case Kind::constant:
      if (!std::isfinite(c)) throw ConfigError("constant disorder: value must be finite");
      break;
    case Kind::uniform:
      if (!(a < b) || !std::isfinite(a) || !std::isfinite(b)) throw ConfigError("uniform disorder: need a < b");
      break;
    case Kind::bernoulli:
      if (!(p_zero >= 0.0 && p_zero <= 1.0)) throw ConfigError("bernoulli disorder: p_zero must lie in [0, 1]");
      break;
  }
}

std::string DisorderSpec::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind) {
    case Kind::constant:
      os << "constant(" << c << ")";
      break;
    case Kind::uniform:
      os << "uniform(" << a << "," << b << ")";
      break;
    case Kind::bernoulli:
      os << "bernoulli(p_zero=" << p_zero << ")";
      break;
  }
  os << " seed=" << seed << " stream=" << stream_id;
  return os.str();
}

SampleRecord sample_sequence(const DisorderSpec& spec, Index length, std::uint64_t realization) {
  spec.validate();
  if (length < 1) throw ConfigError("sample_sequence: length must be >= 1");
  SampleRecord rec{spec, realization, std::vector<double>(static_cast<std::size_t>(length))};
  if (spec.kind == DisorderSpec::Kind::constant) {
    std::fill(rec.values.begin(), rec.values.end(), spec.c);
    return rec;
  }
  RandomStream rng(spec.seed, spec.stream_id, realization);
  for (double& v : rec.values) {
    const double u = rng.uniform();
    if (spec.kind == DisorderSpec::Kind::uniform)
      v = spec.a + (spec.b - spec.a) * u;
    else
      v = u < spec.p_zero ? 0.0 : 1.0;
  }
  return rec;
}

void XYParams::validate() const {
  if (n < 0) throw ConfigError("XYParams: n must be >= 0");
  check_length(mu, static_cast<std::size_t>(n), "XYParams.mu");
  check_length(gamma, static_cast<std::size_t>(n), "XYParams.gamma");
  check_length(omega, static_cast<std::size_t>(n + 1), "XYParams.omega");
}

void IsingParams::validate() const {
  if (b < a) throw ConfigError("IsingParams: need a <= b");
  const auto sites = static_cast<std::size_t>(b - a + 1);
  check_length(J, sites - 1, "IsingParams.J");
  check_length(Gamma, sites, "IsingParams.Gamma");
  check_length(h, sites, "IsingParams.h");
}

void Interaction::add(const LocalOperator& term) {
  if (!chain_.contains(term.support())) throw DomainError("Interaction::add: term support outside chain");
  auto it = terms_.find(term.support());
  if (it == terms_.end())
    terms_.emplace(term.support(), term);
  else
    it->second = it->second + term;
}

LocalOperator Interaction::hamiltonian() const {
  const Index dim = chain_.total_dim();
  Matrix h = Matrix::Zero(dim, dim);
  for (const auto& [support, term] : terms_) add_embedded(h, term, chain_);
  return LocalOperator(chain_.sites(), chain_.dims(), std::move(h));
}

std::vector<LocalOperator> Interaction::local_terms() const {
  std::vector<LocalOperator> out;
  for (Site x = chain_.first(); x <= chain_.last(); ++x) {
    const int d = chain_.dim(x);
    out.emplace_back(SiteSet{x}, std::vector<int>{d}, Matrix::Zero(d, d), true);
  }
  for (const auto& [support, term] : terms_) {
    auto& slot = out[static_cast<std::size_t>(chain_.position(support.front()))];
    slot = slot + term;
  }
  return out;
}

ModelBuild build_xy_hamiltonian(const XYParams& p) {
  p.validate();
  Interaction phi(Chain::qubits(0, p.n));
  for (int j = 0; j < p.n; ++j) {
    const auto k = static_cast<std::size_t>(j);
    Matrix bond = p.mu[k] * ((1.0 + p.gamma[k]) * two_site(1, 1) + (1.0 - p.gamma[k]) * two_site(2, 2));
    if (!bond.isZero(0.0)) phi.add(LocalOperator::qubits({j, j + 1}, std::move(bond), true));
  }
  for (int j = 0; j <= p.n; ++j) {
    Matrix field = p.lambda * p.omega[static_cast<std::size_t>(j)] * pauli_matrix(3);
    if (!field.isZero(0.0)) phi.add(LocalOperator::qubits({j}, std::move(field), true));
  }
  LocalOperator h = phi.hamiltonian();
  return {std::move(phi), std::move(h)};
}

ModelBuild build_ising_hamiltonian(const IsingParams& p) {
  p.validate();
  Interaction phi(Chain::qubits(p.a, p.b));
  for (int x = p.a; x < p.b; ++x) {
    Matrix bond = p.J[static_cast<std::size_t>(x - p.a)] * two_site(3, 3);
    if (!bond.isZero(0.0)) phi.add(LocalOperator::qubits({x, x + 1}, std::move(bond), true));
  }
  for (int x = p.a; x <= p.b; ++x) {
    const auto k = static_cast<std::size_t>(x - p.a);
    Matrix field = p.gamma_scale * p.Gamma[k] * pauli_matrix(1) + p.h[k] * pauli_matrix(3);
    if (!field.isZero(0.0)) phi.add(LocalOperator::qubits({x}, std::move(field), true));
  }
  LocalOperator h = phi.hamiltonian();
  return {std::move(phi), std::move(h)};
}

namespace {

SparsePerturbation make_perturbation(const Chain& chain, std::vector<int> delta, double p_zero, const Matrix& block) {
  if (!(p_zero >= 0.0 && p_zero <= 1.0)) throw ConfigError("perturbation: p_zero must lie in [0, 1]");
  if (delta.size() != static_cast<std::size_t>(chain.size() - 1))
    throw ConfigError("perturbation: need one delta per bond");
  for (int d : delta)
    if (d != 0 && d != 1) throw ConfigError("perturbation: delta entries must be 0 or 1");
  if (block.rows() != 4 || block.cols() != 4 || hermiticity_defect(block) > 1e-12)
    throw ConfigError("perturbation: block must be a 4x4 Hermitian matrix");
  SparsePerturbation pert;
  pert.delta = std::move(delta);
  pert.p_zero = p_zero;
  for (Site x = chain.first(); x < chain.last(); ++x) pert.psi.push_back(LocalOperator::qubits({x, x + 1}, block, true));
  pert.psi_bound = pert.psi.empty() ? 0.0 : spectral_norm_dense(block);
  return pert;
}

}  // namespace

SparsePerturbation zz_perturbation(const Chain& chain, std::vector<int> delta, double p_zero, double strength) {
  return make_perturbation(chain, std::move(delta), p_zero, strength * two_site(3, 3));
}

SparsePerturbation block_perturbation(const Chain& chain, std::vector<int> delta, double p_zero, const Matrix& block) {
  return make_perturbation(chain, std::move(delta), p_zero, block);
}

Interaction apply_sparse_perturbation(const Interaction& base, const SparsePerturbation& pert) {
  if (pert.delta.size() != pert.psi.size()) throw ConfigError("perturbation: delta and psi lengths differ");
  Interaction out = base;
  for (std::size_t i = 0; i < pert.delta.size(); ++i) {
    if (pert.delta[i] == 0) continue;
    if (!base.chain().contains(pert.psi[i].support()))
      throw ConfigError("perturbation: psi support outside the base chain");
    out.add(pert.psi[i]);
  }
  return out;
}

std::vector<int> to_mask(const std::vector<double>& values) {
  std::vector<int> out;
  out.reserve(values.size());
  for (double v : values) out.push_back(v != 0.0 ? 1 : 0);
  return out;
}

int longest_zero_run(std::span<const int> delta) {
  if (delta.empty()) throw DomainError("longest_zero_run: empty sequence");
  int best = 0, run = 0;
  for (int d : delta) {
    run = d == 0 ? run + 1 : 0;
    best = std::max(best, run);
  }
  return best;
}

}  // namespace mbl
