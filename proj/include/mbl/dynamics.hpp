#pragma once

#include "mbl/linalg.hpp"
#include "mbl/operator_core.hpp"

#include <functional>
#include <iosfwd>
#include <span>

namespace mbl {

struct EigenOptions {
  Index dim_cap = Index{1} << 13;
  /// Diagonalize the connected components of H's nonzero pattern separately
  /// (conserved-charge sectors are found without being declared).
  bool split_blocks = true;
};

/// Spectral decomposition H = U diag(E) U†, stored block-diagonally.
class EigenSystem {
 public:
  struct Block {
    std::vector<Index> states;  ///< computational basis states, ascending
    Matrix vectors;             ///< columns: eigenvectors restricted to `states`
    RealVector energies;        ///< ascending
    std::vector<Index> global;  ///< global eigen-index of each column
  };
  /// One nonzero block of an operator written in the eigenbasis: rows of block p, columns of block q.
  struct BlockOp {
    Index p = 0, q = 0;
    Matrix m;
  };

  EigenSystem() = default;
  EigenSystem(Chain chain, std::vector<Block> blocks);

  const Chain& chain() const { return chain_; }
  Index dim() const { return dim_; }
  const RealVector& energies() const { return energies_; }
  const std::vector<Block>& blocks() const { return blocks_; }
  Index block_of(Index state) const { return block_of_[static_cast<std::size_t>(state)]; }
  /// max |E|, which equals ‖H‖.
  double spectral_radius() const;

  /// Dense eigenvector matrix, column k belongs to energies()(k).
  Matrix basis() const;
  /// U† A U as nonzero blocks; `upper_only` keeps p <= q.
  std::vector<BlockOp> to_eigenbasis(const Eigen::Ref<const Matrix>& a, bool upper_only = false) const;
  /// Σ U_p X_pq U_q† scattered into a dense matrix.
  Matrix from_eigenbasis(const std::vector<BlockOp>& ops) const;
  /// Same for a Hermitian operator given by its blocks with p <= q; the lower blocks are adjoints.
  Matrix from_eigenbasis_hermitian(const std::vector<BlockOp>& upper) const;
  /// Global (energy-ordered) index pairs for entry (r, c) of a block op.
  Index global_index(Index block, Index column) const {
    return blocks_[static_cast<std::size_t>(block)].global[static_cast<std::size_t>(column)];
  }

 private:
  Chain chain_;
  Index dim_ = 0;
  std::vector<Block> blocks_;
  std::vector<Index> block_of_;
  RealVector energies_;
};

EigenSystem eigendecompose(const LocalOperator& h, const EigenOptions& opts = {});

/// τ_t(A) = e^{itH} A e^{-itH} for one fixed A at many times.
class HeisenbergEvolver {
 public:
  HeisenbergEvolver(const EigenSystem& es, const Eigen::Ref<const Matrix>& a_full);
  Matrix at(double t) const;

 private:
  const EigenSystem* es_;
  bool hermitian_ = false;  ///< exactly Hermitian input: only blocks with p <= q are kept
  std::vector<EigenSystem::BlockOp> tilde_;
};

LocalOperator heisenberg_evolve(const EigenSystem& es, const LocalOperator& a, double t);

/// [C, B] for a Pauli word B, reduced to a matrix `core` with ‖[C, B]‖ = scale·‖core‖.
/// Single-site B and Hermitian C use the off-diagonal block of C in B's eigenbasis (half dimension).
struct CommutatorProbe {
  Matrix core;
  double scale = 1.0;
  /// Connected blocks of core's nonzero pattern, gathered; empty means core is treated whole.
  std::vector<Matrix> parts;
  NormBounds bounds() const;
  double norm() const;
  /// Exact decision of ‖[C, B]‖ > threshold.
  bool exceeds(double threshold) const;
};

CommutatorProbe commutator_probe(const Eigen::Ref<const Matrix>& c, const PauliWord& b, const Chain& chain,
                                 bool c_hermitian);
double pauli_commutator_norm(const Eigen::Ref<const Matrix>& c, const PauliWord& b, const Chain& chain,
                             bool c_hermitian);

/// Produces the evolved full-chain matrix of the `word`-th non-identity Pauli word on X at time t.
using EvolutionFn = std::function<Matrix(std::size_t word, double t)>;

/// Non-identity Pauli words on a site set.
std::vector<PauliWord> nonidentity_words(const SiteSet& s);

/// Throws DomainError unless X, Y are nonempty, disjoint, on the chain, and Y avoids [min X, max X].
void check_estimator_geometry(const Chain& chain, const SiteSet& X, const SiteSet& Y);

double pauli_commutator_estimator(const EigenSystem& es, const SiteSet& X, const SiteSet& Y, double t);
double pauli_commutator_estimator(const EvolutionFn& evolve, const Chain& chain, const SiteSet& X,
                                  const SiteSet& Y, double t);

double quasi_locality_estimator(const EigenSystem& es, const LocalOperator& a, int r, double t);

struct EstimatorNormalization {
  double chi_base = 4.0;  ///< χ(x) = chi_base^x
  double beta = 0.0;
  double chi(Index x_size) const;
  double weight(Index x_size, double t) const;
};

struct CommutatorTrace {
  std::vector<double> time_grid;
  std::vector<double> values;
  SiteSet X, Y;
  double beta = 0.0;
  double chi_of_X = 1.0;
};

CommutatorTrace commutator_trace(const EigenSystem& es, const SiteSet& X, const SiteSet& Y,
                                 std::span<const double> grid, const EstimatorNormalization& norm = {});
double sup_over_time(const CommutatorTrace& trace);
void write_trace_csv(std::ostream& os, const CommutatorTrace& trace);

struct GridSupResult {
  std::vector<double> sup;     ///< normalized grid sup per Y
  std::vector<double> argmax;  ///< time attaining it
  Index exact_evaluations = 0;
  Index candidates = 0;
};

/// Same value as sup_over_time(commutator_trace(...)) for each Y, computed with bound-based pruning:
/// cheap rigorous norm bounds rank all (t, A, B) candidates and only those that can still win are
/// evaluated exactly.
GridSupResult grid_sup_pauli_estimator(const EvolutionFn& evolve, const Chain& chain, const SiteSet& X,
                                       const std::vector<SiteSet>& Ys, std::span<const double> grid,
                                       const EstimatorNormalization& norm = {});
GridSupResult grid_sup_pauli_estimator(const EigenSystem& es, const SiteSet& X, const std::vector<SiteSet>& Ys,
                                       std::span<const double> grid, const EstimatorNormalization& norm = {});

struct TransmissionTimeResult {
  double epsilon = 0.0;
  bool censored = true;
  double t_est = 0.0;  ///< bracket midpoint; meaningless when censored
  double t_low = 0.0;
  double t_high = 0.0;
  double horizon = 0.0;
  Index evaluations = 0;
};

/// First grid crossing of the Pauli estimator between the chain ends above epsilon, bisected to `tol`.
TransmissionTimeResult transmission_time(const EigenSystem& es, double epsilon, std::span<const double> grid,
                                         double T_max, double tol = 1e-3);
void write_transmission_json(std::ostream& os, const std::vector<TransmissionTimeResult>& results);

/// `points` samples: a tenth of them uniform on [0, 1], the rest log-spaced on (1, t_max].
std::vector<double> default_time_grid(Index points = 1000, double t_max = 1000.0);
std::vector<double> linear_grid(double t0, double t1, Index points);

}  // namespace mbl
