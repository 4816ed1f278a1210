#include "mbl/operator_core.hpp"

#include "mbl/errors.hpp"
#include "mbl/linalg.hpp"

#include <algorithm>
#include <numeric>

namespace mbl {

namespace {

void check_sorted_unique(const SiteSet& s, const char* what) {
  for (std::size_t i = 1; i < s.size(); ++i)
    if (s[i] <= s[i - 1]) throw DomainError(std::string(what) + ": site set must be strictly increasing");
}

Index product(const std::vector<int>& dims) {
  Index d = 1;
  for (int x : dims) d *= x;
  return d;
}

std::vector<int> dims_on(const SiteSet& outer, const std::vector<int>& outer_dims, const SiteSet& subset) {
  std::vector<int> out;
  out.reserve(subset.size());
  for (Site x : subset) {
    auto it = std::lower_bound(outer.begin(), outer.end(), x);
    out.push_back(outer_dims[static_cast<std::size_t>(it - outer.begin())]);
  }
  return out;
}

/// Union of supports with consistent dims.
std::pair<SiteSet, std::vector<int>> joint_layout(const LocalOperator& a, const LocalOperator& b) {
  SiteSet u = site_union(a.support(), b.support());
  std::vector<int> dims;
  dims.reserve(u.size());
  for (Site x : u) {
    int d = 0;
    auto ia = std::lower_bound(a.support().begin(), a.support().end(), x);
    if (ia != a.support().end() && *ia == x) d = a.dims()[static_cast<std::size_t>(ia - a.support().begin())];
    auto ib = std::lower_bound(b.support().begin(), b.support().end(), x);
    if (ib != b.support().end() && *ib == x) {
      const int db = b.dims()[static_cast<std::size_t>(ib - b.support().begin())];
      if (d != 0 && d != db) throw DomainError("operators disagree on the local dimension of a shared site");
      d = db;
    }
    dims.push_back(d);
  }
  return {std::move(u), std::move(dims)};
}

std::optional<bool> joint_hint(const LocalOperator& a, const LocalOperator& b) {
  if (a.hermitian_hint().value_or(false) && b.hermitian_hint().value_or(false)) return true;
  return std::nullopt;
}

}  // namespace

Chain::Chain(Site first, std::vector<int> dims) : first_(first), dims_(std::move(dims)) {
  if (dims_.empty()) throw DomainError("Chain: at least one site required");
  for (int d : dims_)
    if (d < 2) throw DomainError("Chain: local dimensions must be >= 2");
  total_dim_ = product(dims_);
}

Chain Chain::qubits(Site first, Site last) {
  if (last < first) throw DomainError("Chain::qubits: empty interval");
  return Chain(first, std::vector<int>(static_cast<std::size_t>(last - first + 1), 2));
}

int Chain::dim(Site x) const {
  if (!contains(x)) throw DomainError("Chain::dim: site outside chain");
  return dims_[static_cast<std::size_t>(x - first_)];
}

SiteSet Chain::sites() const {
  SiteSet s(dims_.size());
  std::iota(s.begin(), s.end(), first_);
  return s;
}

bool Chain::contains(const SiteSet& s) const {
  return std::all_of(s.begin(), s.end(), [&](Site x) { return contains(x); });
}

bool Chain::all_qubits() const {
  return std::all_of(dims_.begin(), dims_.end(), [](int d) { return d == 2; });
}

std::vector<int> Chain::dims_of(const SiteSet& s) const {
  std::vector<int> out;
  out.reserve(s.size());
  for (Site x : s) out.push_back(dim(x));
  return out;
}

LocalOperator::LocalOperator(SiteSet support, std::vector<int> dims, Matrix matrix,
                             std::optional<bool> hermitian_hint)
    : support_(std::move(support)), dims_(std::move(dims)), matrix_(std::move(matrix)), hermitian_hint_(hermitian_hint) {
  check_sorted_unique(support_, "LocalOperator");
  if (dims_.size() != support_.size()) throw DomainError("LocalOperator: one dimension per support site");
  for (int d : dims_)
    if (d < 2) throw DomainError("LocalOperator: local dimensions must be >= 2");
  const Index d = product(dims_);
  if (matrix_.rows() != d || matrix_.cols() != d)
    throw DomainError("LocalOperator: matrix is " + std::to_string(matrix_.rows()) + "x" +
                      std::to_string(matrix_.cols()) + ", support needs " + std::to_string(d));
  if (hermitian_hint_.value_or(false) && hermiticity_defect(matrix_) > 1e-12)
    throw DomainError("LocalOperator: hermitian_hint set on a non-Hermitian matrix");
}

LocalOperator LocalOperator::qubits(SiteSet support, Matrix matrix, std::optional<bool> hermitian_hint) {
  std::vector<int> dims(support.size(), 2);
  return LocalOperator(std::move(support), std::move(dims), std::move(matrix), hermitian_hint);
}

LocalOperator LocalOperator::identity(SiteSet support, std::vector<int> dims) {
  const Index d = product(dims);
  return LocalOperator(std::move(support), std::move(dims), Matrix::Identity(d, d), true);
}

TensorSplit::TensorSplit(const SiteSet& outer, const std::vector<int>& outer_dims, const SiteSet& subset) {
  check_sorted_unique(subset, "TensorSplit");
  if (!is_subset(subset, outer)) throw DomainError("TensorSplit: subset not contained in outer sites");
  const std::size_t len = outer.size();
  std::vector<bool> in_sub(len, false);
  for (std::size_t p = 0; p < len; ++p) in_sub[p] = std::binary_search(subset.begin(), subset.end(), outer[p]);

  full_dim_ = product(outer_dims);
  std::vector<Index> stride(len), sub_stride(len), comp_stride(len);
  Index s = 1, ss = 1, cs = 1;
  for (std::size_t k = len; k-- > 0;) {
    stride[k] = s;
    s *= outer_dims[k];
    if (in_sub[k]) {
      sub_stride[k] = ss;
      ss *= outer_dims[k];
    } else {
      comp_stride[k] = cs;
      cs *= outer_dims[k];
    }
  }
  sub_dim_ = ss;
  comp_dim_ = cs;
  sub_.assign(static_cast<std::size_t>(full_dim_), 0);
  comp_.assign(static_cast<std::size_t>(full_dim_), 0);
  compose_.assign(static_cast<std::size_t>(full_dim_), 0);
  for (Index i = 0; i < full_dim_; ++i) {
    Index si = 0, ci = 0;
    for (std::size_t k = 0; k < len; ++k) {
      const Index digit = (i / stride[k]) % outer_dims[k];
      if (in_sub[k])
        si += digit * sub_stride[k];
      else
        ci += digit * comp_stride[k];
    }
    sub_[static_cast<std::size_t>(i)] = si;
    comp_[static_cast<std::size_t>(i)] = ci;
    compose_[static_cast<std::size_t>(si * comp_dim_ + ci)] = i;
  }
}

TensorSplit::TensorSplit(const Chain& chain, const SiteSet& subset)
    : TensorSplit(chain.sites(), chain.dims(), subset) {}

Matrix reduce_to_subset(const Eigen::Ref<const Matrix>& full, const TensorSplit& split) {
  const Index ds = split.sub_dim(), dc = split.comp_dim();
  Matrix out = Matrix::Zero(ds, ds);
  for (Index b = 0; b < ds; ++b)
    for (Index c = 0; c < dc; ++c) {
      const Index col = split.compose(b, c);
      for (Index a = 0; a < ds; ++a) out(a, b) += full(split.compose(a, c), col);
    }
  out /= static_cast<double>(dc);
  return out;
}

Matrix expand_from_subset(const Eigen::Ref<const Matrix>& sub, const TensorSplit& split) {
  const Index ds = split.sub_dim(), dc = split.comp_dim();
  Matrix out = Matrix::Zero(split.full_dim(), split.full_dim());
  for (Index b = 0; b < ds; ++b)
    for (Index c = 0; c < dc; ++c) {
      const Index col = split.compose(b, c);
      for (Index a = 0; a < ds; ++a) out(split.compose(a, c), col) = sub(a, b);
    }
  return out;
}

LocalOperator embed_into(const LocalOperator& op, const SiteSet& support, const std::vector<int>& dims) {
  if (!is_subset(op.support(), support)) throw DomainError("embed: operator support not contained in target");
  if (op.support() == support) return op;
  if (dims_on(support, dims, op.support()) != op.dims())
    throw DomainError("embed: local dimensions disagree with the target");
  const TensorSplit split(support, dims, op.support());
  return LocalOperator(support, dims, expand_from_subset(op.matrix(), split), op.hermitian_hint());
}

LocalOperator embed(const LocalOperator& op, const Chain& chain) {
  if (!chain.contains(op.support())) throw DomainError("embed: operator support not contained in chain");
  return embed_into(op, chain.sites(), chain.dims());
}

void add_embedded(Matrix& full, const LocalOperator& op, const Chain& chain) {
  if (!chain.contains(op.support())) throw DomainError("add_embedded: operator support not contained in chain");
  if (full.rows() != chain.total_dim() || full.cols() != chain.total_dim())
    throw DomainError("add_embedded: accumulator has the wrong dimension");
  const SiteSet sites = chain.sites();
  const std::vector<int> dims = chain.dims();
  if (dims_on(sites, dims, op.support()) != op.dims()) throw DomainError("add_embedded: local dimensions disagree");
  const TensorSplit split(sites, dims, op.support());
  const Matrix& sub = op.matrix();
  for (Index b = 0; b < split.sub_dim(); ++b)
    for (Index c = 0; c < split.comp_dim(); ++c) {
      const Index col = split.compose(b, c);
      for (Index a = 0; a < split.sub_dim(); ++a) full(split.compose(a, c), col) += sub(a, b);
    }
}

LocalOperator operator+(const LocalOperator& a, const LocalOperator& b) {
  auto [u, dims] = joint_layout(a, b);
  const LocalOperator ea = embed_into(a, u, dims), eb = embed_into(b, u, dims);
  return LocalOperator(u, dims, ea.matrix() + eb.matrix(), joint_hint(a, b));
}

LocalOperator operator-(const LocalOperator& a, const LocalOperator& b) {
  auto [u, dims] = joint_layout(a, b);
  const LocalOperator ea = embed_into(a, u, dims), eb = embed_into(b, u, dims);
  return LocalOperator(u, dims, ea.matrix() - eb.matrix(), joint_hint(a, b));
}

LocalOperator operator*(const LocalOperator& a, const LocalOperator& b) {
  auto [u, dims] = joint_layout(a, b);
  const LocalOperator ea = embed_into(a, u, dims), eb = embed_into(b, u, dims);
  return LocalOperator(u, dims, ea.matrix() * eb.matrix());
}

LocalOperator operator*(Complex s, const LocalOperator& a) {
  std::optional<bool> hint;
  if (s.imag() == 0.0) hint = a.hermitian_hint();
  return LocalOperator(a.support(), a.dims(), s * a.matrix(), hint);
}

LocalOperator commutator(const LocalOperator& a, const LocalOperator& b) {
  auto [u, dims] = joint_layout(a, b);
  const LocalOperator ea = embed_into(a, u, dims), eb = embed_into(b, u, dims);
  return LocalOperator(u, dims, commutator(ea.matrix(), eb.matrix()));
}

double operator_norm(const LocalOperator& a) {
  if (a.matrix().size() == 0) throw DomainError("operator_norm: empty matrix");
  return spectral_norm(a.matrix());
}

LocalOperator conditional_expectation(const LocalOperator& a, const SiteSet& keep, const Chain& chain) {
  check_sorted_unique(keep, "conditional_expectation");
  if (!chain.contains(keep)) throw DomainError("conditional_expectation: keep not contained in chain");
  if (!chain.contains(a.support())) throw DomainError("conditional_expectation: operator not on chain");
  const SiteSet u = site_union(a.support(), keep);
  const std::vector<int> dims = chain.dims_of(u);
  const LocalOperator au = embed_into(a, u, dims);
  if (u == keep) return au;
  const TensorSplit split(u, dims, keep);
  return LocalOperator(keep, chain.dims_of(keep), reduce_to_subset(au.matrix(), split), a.hermitian_hint());
}

LocalOperator build_S(int m, int d, Site site) {
  if (d < 2) throw DomainError("build_S: d must be >= 2");
  if (m < 2 || m > d) throw DomainError("build_S: need 2 <= m <= d");
  Matrix s = Matrix::Zero(d, d);
  s(0, 0) = 1.0;
  s(m - 1, m - 1) = -1.0;
  return LocalOperator({site}, {d}, s, true);
}

Matrix pauli_matrix(int letter) {
  Matrix p = Matrix::Zero(2, 2);
  switch (letter) {
    case 0:
      p(0, 0) = 1.0;
      p(1, 1) = 1.0;
      break;
    case 1:
      p(0, 1) = 1.0;
      p(1, 0) = 1.0;
      break;
    case 2:
      p(0, 1) = -kI;
      p(1, 0) = kI;
      break;
    case 3:
      p(0, 0) = 1.0;
      p(1, 1) = -1.0;
      break;
    default:
      throw DomainError("pauli_matrix: letter must be 0..3");
  }
  return p;
}

bool PauliWord::is_identity() const {
  return std::all_of(letters.begin(), letters.end(), [](int l) { return l == 0; });
}

std::vector<PauliWord> pauli_word_codes(const SiteSet& support) {
  check_sorted_unique(support, "pauli_words");
  const std::size_t k = support.size();
  const Index count = Index{1} << (2 * k);
  std::vector<PauliWord> out;
  out.reserve(static_cast<std::size_t>(count));
  for (Index code = 0; code < count; ++code) {
    PauliWord w{support, std::vector<int>(k, 0)};
    Index c = code;
    for (std::size_t p = k; p-- > 0;) {
      w.letters[p] = static_cast<int>(c % 4);
      c /= 4;
    }
    out.push_back(std::move(w));
  }
  return out;
}

LocalOperator to_operator(const PauliWord& w) {
  Matrix m = Matrix::Ones(1, 1);
  for (int l : w.letters) m = kron(m, pauli_matrix(l));
  return LocalOperator::qubits(w.support, std::move(m), true);
}

std::vector<LocalOperator> pauli_words(const SiteSet& support, const Chain& chain) {
  if (!chain.contains(support)) throw DomainError("pauli_words: support outside chain");
  for (Site x : support)
    if (chain.dim(x) != 2) throw UnsupportedDimensionError("pauli_words: qubit sites only");
  std::vector<LocalOperator> out;
  for (const PauliWord& w : pauli_word_codes(support)) out.push_back(to_operator(w));
  return out;
}

PauliAction pauli_action(const PauliWord& w, const Chain& chain) {
  if (!chain.all_qubits()) throw UnsupportedDimensionError("pauli_action: qubit chains only");
  if (!chain.contains(w.support)) throw DomainError("pauli_action: word outside chain");
  const Index len = chain.size();
  const Index dim = chain.total_dim();
  PauliAction p;
  p.phase = Vector::Ones(dim);
  for (std::size_t k = 0; k < w.support.size(); ++k) {
    const int letter = w.letters[k];
    if (letter == 0) continue;
    const Index bit = Index{1} << (len - 1 - chain.position(w.support[k]));
    if (letter == 1 || letter == 2) p.flip |= bit;
    for (Index b = 0; b < dim; ++b) {
      const bool one = (b & bit) != 0;
      if (letter == 2) p.phase(b) *= one ? -kI : kI;
      if (letter == 3 && one) p.phase(b) = -p.phase(b);
    }
  }
  return p;
}

Matrix pauli_left(const PauliAction& p, const Eigen::Ref<const Matrix>& c) {
  Matrix out(c.rows(), c.cols());
  for (Index r = 0; r < c.rows(); ++r) out.row(r) = p.phase(r ^ p.flip) * c.row(r ^ p.flip);
  return out;
}

Matrix pauli_right(const Eigen::Ref<const Matrix>& c, const PauliAction& p) {
  Matrix out(c.rows(), c.cols());
  for (Index col = 0; col < c.cols(); ++col) out.col(col) = c.col(col ^ p.flip) * p.phase(col);
  return out;
}

SiteSet site_union(const SiteSet& a, const SiteSet& b) {
  SiteSet out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

SiteSet site_intersection(const SiteSet& a, const SiteSet& b) {
  SiteSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

bool is_subset(const SiteSet& a, const SiteSet& b) { return std::includes(b.begin(), b.end(), a.begin(), a.end()); }

SiteSet neighborhood(const SiteSet& s, int r, const Chain& chain) {
  if (r < 0) throw DomainError("neighborhood: negative radius");
  SiteSet out;
  for (Site x = chain.first(); x <= chain.last(); ++x)
    for (Site y : s)
      if (std::abs(x - y) <= r) {
        out.push_back(x);
        break;
      }
  return out;
}

}  // namespace mbl
