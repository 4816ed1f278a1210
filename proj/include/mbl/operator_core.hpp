#pragma once

#include "mbl/types.hpp"

#include <optional>
#include <vector>

namespace mbl {

/// Contiguous interval of sites [first, first + dims.size()) with per-site local dimensions.
/// Tensor factors are ordered by increasing site label; the smallest site is the leftmost factor
/// (most significant digit of a basis index).
class Chain {
 public:
  Chain() = default;
  Chain(Site first, std::vector<int> dims);
  static Chain qubits(Site first, Site last);

  Site first() const { return first_; }
  Site last() const { return first_ + static_cast<Site>(dims_.size()) - 1; }
  Index size() const { return static_cast<Index>(dims_.size()); }
  Index total_dim() const { return total_dim_; }
  const std::vector<int>& dims() const { return dims_; }
  int dim(Site x) const;
  SiteSet sites() const;
  bool contains(Site x) const { return x >= first() && x <= last(); }
  bool contains(const SiteSet& s) const;
  bool all_qubits() const;
  std::vector<int> dims_of(const SiteSet& s) const;
  /// Position of a site counted from the left end.
  Index position(Site x) const { return x - first_; }

  bool operator==(const Chain&) const = default;

 private:
  Site first_ = 0;
  std::vector<int> dims_;
  Index total_dim_ = 1;
};

/// Dense operator with an explicit support.
class LocalOperator {
 public:
  LocalOperator() = default;
  LocalOperator(SiteSet support, std::vector<int> dims, Matrix matrix,
                std::optional<bool> hermitian_hint = std::nullopt);
  /// All support sites two-dimensional.
  static LocalOperator qubits(SiteSet support, Matrix matrix, std::optional<bool> hermitian_hint = std::nullopt);
  static LocalOperator identity(SiteSet support, std::vector<int> dims);

  const SiteSet& support() const { return support_; }
  const std::vector<int>& dims() const { return dims_; }
  const Matrix& matrix() const { return matrix_; }
  Index dim() const { return matrix_.rows(); }
  std::optional<bool> hermitian_hint() const { return hermitian_hint_; }

 private:
  SiteSet support_;
  std::vector<int> dims_;
  Matrix matrix_ = Matrix::Ones(1, 1);
  std::optional<bool> hermitian_hint_;
};

/// Index bookkeeping for a subset of an ordered list of sites.
/// Every outer index i factors as (sub(i), comp(i)); compose() inverts that.
class TensorSplit {
 public:
  TensorSplit(const SiteSet& outer, const std::vector<int>& outer_dims, const SiteSet& subset);
  TensorSplit(const Chain& chain, const SiteSet& subset);

  Index full_dim() const { return full_dim_; }
  Index sub_dim() const { return sub_dim_; }
  Index comp_dim() const { return comp_dim_; }
  Index sub(Index i) const { return sub_[static_cast<std::size_t>(i)]; }
  Index comp(Index i) const { return comp_[static_cast<std::size_t>(i)]; }
  Index compose(Index s, Index c) const { return compose_[static_cast<std::size_t>(s * comp_dim_ + c)]; }

 private:
  Index full_dim_ = 1, sub_dim_ = 1, comp_dim_ = 1;
  std::vector<Index> sub_, comp_, compose_;
};

/// Normalized partial trace of an outer-space matrix onto the subset of `split`.
Matrix reduce_to_subset(const Eigen::Ref<const Matrix>& full, const TensorSplit& split);
/// sub ⊗ identity on the complement.
Matrix expand_from_subset(const Eigen::Ref<const Matrix>& sub, const TensorSplit& split);

/// Extend `op` to a larger support (identity on the new sites).
LocalOperator embed_into(const LocalOperator& op, const SiteSet& support, const std::vector<int>& dims);
LocalOperator embed(const LocalOperator& op, const Chain& chain);
/// full += embed(op, chain) without forming the embedded matrix.
void add_embedded(Matrix& full, const LocalOperator& op, const Chain& chain);

LocalOperator operator+(const LocalOperator& a, const LocalOperator& b);
LocalOperator operator-(const LocalOperator& a, const LocalOperator& b);
LocalOperator operator*(const LocalOperator& a, const LocalOperator& b);
LocalOperator operator*(Complex s, const LocalOperator& a);

/// ab − ba on the union of supports.
LocalOperator commutator(const LocalOperator& a, const LocalOperator& b);

double operator_norm(const LocalOperator& a);

/// Normalized partial trace onto `keep`, tensored with identity on keep \ supp(a).
LocalOperator conditional_expectation(const LocalOperator& a, const SiteSet& keep, const Chain& chain);

/// diag(1, 0, ..., 0, -1 at position m-1, 0, ...) of size d.
LocalOperator build_S(int m, int d, Site site = 0);

/// Single-qubit Paulis by letter: 0 = 1, 1 = σ^x, 2 = σ^y, 3 = σ^z.
Matrix pauli_matrix(int letter);

struct PauliWord {
  SiteSet support;
  std::vector<int> letters;  ///< one letter per support site
  bool is_identity() const;
};

/// All 4^|support| words, first site most significant; word 0 is the identity.
std::vector<PauliWord> pauli_word_codes(const SiteSet& support);
LocalOperator to_operator(const PauliWord& w);
std::vector<LocalOperator> pauli_words(const SiteSet& support, const Chain& chain);

/// Pauli strings are monomial: P|b> = phase[b] |b xor flip>.
struct PauliAction {
  Index flip = 0;
  Vector phase;
};
PauliAction pauli_action(const PauliWord& w, const Chain& chain);
Matrix pauli_left(const PauliAction& p, const Eigen::Ref<const Matrix>& c);   ///< P c
Matrix pauli_right(const Eigen::Ref<const Matrix>& c, const PauliAction& p);  ///< c P

SiteSet site_union(const SiteSet& a, const SiteSet& b);
SiteSet site_intersection(const SiteSet& a, const SiteSet& b);
bool is_subset(const SiteSet& a, const SiteSet& b);
/// Sites of `chain` within distance r of `s`.
SiteSet neighborhood(const SiteSet& s, int r, const Chain& chain);

}  // namespace mbl
