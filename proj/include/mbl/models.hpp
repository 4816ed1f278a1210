#pragma once

#include "mbl/operator_core.hpp"

#include <cstdint>
#include <map>
#include <span>
#include <string>

namespace mbl {

struct DisorderSpec {
  enum class Kind { constant, uniform, bernoulli };
  Kind kind = Kind::constant;
  double c = 0.0;       ///< constant value
  double a = 0.0;       ///< uniform lower end
  double b = 1.0;       ///< uniform upper end
  double p_zero = 0.0;  ///< bernoulli: probability of drawing 0
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;

  static DisorderSpec constant(double c);
  static DisorderSpec uniform(double a, double b, std::uint64_t seed, std::uint64_t stream_id);
  static DisorderSpec bernoulli(double p_zero, std::uint64_t seed, std::uint64_t stream_id);
  /// Throws ConfigError on invalid parameters.
  void validate() const;
  std::string describe() const;
};

/// Everything needed to replay a draw.
struct SampleRecord {
  DisorderSpec spec;
  std::uint64_t realization = 0;
  std::vector<double> values;
};

SampleRecord sample_sequence(const DisorderSpec& spec, Index length, std::uint64_t realization = 0);

/// Disordered XY chain on sites [0, n].
struct XYParams {
  int n = 0;
  std::vector<double> mu;     ///< length n
  std::vector<double> gamma;  ///< length n
  std::vector<double> omega;  ///< length n + 1
  double lambda = 0.0;
  void validate() const;
};

/// Quantum Ising chain on sites [a, b].
struct IsingParams {
  int a = 0;
  int b = 0;
  std::vector<double> J;      ///< length b - a
  std::vector<double> Gamma;  ///< length b - a + 1
  std::vector<double> h;      ///< length b - a + 1
  double gamma_scale = 0.0;
  void validate() const;
};

/// Finite-range interaction: support -> term. Terms on equal supports are summed.
class Interaction {
 public:
  Interaction() = default;
  explicit Interaction(Chain chain) : chain_(std::move(chain)) {}

  void add(const LocalOperator& term);
  const std::map<SiteSet, LocalOperator>& terms() const { return terms_; }
  const Chain& chain() const { return chain_; }
  bool empty() const { return terms_.empty(); }

  /// Σ_X Φ(X) on the whole chain.
  LocalOperator hamiltonian() const;
  /// h_x = Σ over terms whose leftmost site is x; one entry per chain site, zero where no term starts.
  std::vector<LocalOperator> local_terms() const;

 private:
  Chain chain_;
  std::map<SiteSet, LocalOperator> terms_;
};

struct ModelBuild {
  Interaction interaction;
  LocalOperator hamiltonian;
};

ModelBuild build_xy_hamiltonian(const XYParams& p);
ModelBuild build_ising_hamiltonian(const IsingParams& p);

/// Bernoulli-gated nearest-neighbour terms: bond x = chain.first() + i carries delta[i] * psi[i].
struct SparsePerturbation {
  std::vector<int> delta;
  double p_zero = 0.0;
  std::vector<LocalOperator> psi;
  double psi_bound = 0.0;  ///< sup_x ‖ψ_x‖, recorded not normalized
};

/// psi_x = strength · σ^z_x σ^z_{x+1} on every bond of the chain.
SparsePerturbation zz_perturbation(const Chain& chain, std::vector<int> delta, double p_zero, double strength);
/// psi_x = block (4×4 Hermitian) on every bond.
SparsePerturbation block_perturbation(const Chain& chain, std::vector<int> delta, double p_zero, const Matrix& block);

Interaction apply_sparse_perturbation(const Interaction& base, const SparsePerturbation& pert);

std::vector<int> to_mask(const std::vector<double>& values);
int longest_zero_run(std::span<const int> delta);

}  // namespace mbl
