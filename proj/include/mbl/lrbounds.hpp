#pragma once

#include "mbl/dynamics.hpp"
#include "mbl/models.hpp"

#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <utility>

namespace mbl {

/// Finite set of sites with a distance table.
struct FiniteMetric {
  std::vector<Site> points;
  RealMatrix d;  ///< d(i, j) between points[i] and points[j]

  /// Integer metric |x − y| restricted to `points`.
  static FiniteMetric restricted(std::vector<Site> points);
  /// Points relabelled 0, 1, 2, ... in increasing order.
  static FiniteMetric collapsed(std::vector<Site> points);
  /// Sites 0 .. size - 1 with |x − y|.
  static FiniteMetric path(int size);
  Index index_of(Site x) const;
  double distance(Site x, Site y) const { return d(index_of(x), index_of(y)); }
};

using DecayFunction = std::function<double(double)>;

/// (1 + r)^{-4}.
DecayFunction default_decay();

struct FConstants {
  double norm = 0.0;  ///< sup_x Σ_y F(d(x, y))
  double conv = 0.0;  ///< sup_{x,y} Σ_z F(d(x, z)) F(d(z, y)) / F(d(x, y))
};

/// DomainError on a nonpositive value of F on the lattice.
FConstants f_constants(const DecayFunction& F, const FiniteMetric& lattice);

struct FFunction {
  DecayFunction base;
  double mu = 0.0;
  FiniteMetric lattice;
  FConstants plain;     ///< constants of F
  FConstants weighted;  ///< constants of F_μ(r) = e^{−μr} F(r)

  double operator()(double r) const { return base(r); }
  double weighted_value(double r) const;
};

/// DomainError if mu < 0 or F increases on the lattice's distances.
FFunction make_f_function(DecayFunction base, double mu, FiniteMetric lattice);

enum class MetricMode { restricted, collapsed };

/// Sites in the gaps [b_{j-1}, a_j] (b_0 = 0, a_{m+1} = n) are identified with a_j.
struct ContractedLattice {
  int n = 0;
  std::vector<std::pair<Site, Site>> intervals;
  SiteSet gamma_I;         ///< ∪[a_j, b_j) ∪ {n}
  std::vector<Site> cmap;  ///< cmap[x] for x in [0, n]
  MetricMode metric_mode = MetricMode::restricted;

  Site map(Site x) const;
  SiteSet map(const SiteSet& s) const;
  FiniteMetric metric() const;
};

/// DomainError unless a_j < b_j, b_j < a_{j+1}, and everything lies in [0, n].
ContractedLattice contract(int n, std::vector<std::pair<Site, Site>> intervals,
                           MetricMode mode = MetricMode::restricted);

/// Terms regrouped by contracted support; values stay operators on original sites.
struct ContractedInteraction {
  std::map<SiteSet, LocalOperator> terms;
};

ContractedInteraction contracted_interaction(const Interaction& phi, const ContractedLattice& cl);

/// Λ_x(m) = sites within m of {x, x + 1}, clipped to the chain.
SiteSet bond_neighborhood(Site x, int m, const Chain& chain);

/// ψ^{(m)}_x(t) for every bond x and every m until Λ_x(m - 1) is the whole chain.
struct InteractionSnapshot {
  double t = 0.0;
  std::vector<std::vector<LocalOperator>> psi;  ///< [bond][m], each supported on Λ_x(m)
};

/// Telescoping partial-trace decomposition of τ^{H0}_t(ψ_x). Operators are rebuilt on demand per
/// time; only norms and telescoping residuals are stored.
class InteractionPictureTerms {
 public:
  InteractionPictureTerms(const EigenSystem& es0, SparsePerturbation pert, std::vector<double> times,
                          bool record_norms = true);

  const Chain& chain() const { return es0_->chain(); }
  const std::vector<double>& times() const { return times_; }
  const std::vector<int>& delta() const { return pert_.delta; }
  const SparsePerturbation& perturbation() const { return pert_; }
  Index bonds() const { return static_cast<Index>(pert_.delta.size()); }

  InteractionSnapshot snapshot(double t) const;
  InteractionSnapshot snapshot_at(std::size_t k) const { return snapshot(times_[k]); }

  /// ‖ψ^{(m)}_x(times[k])‖, zero past the last m.
  double norm(Index bond, int m, std::size_t k) const;
  int max_m(Index bond) const;
  /// max over bonds of ‖Σ_m ψ^{(m)} − τ_t(ψ_x)‖ at times[k].
  double telescoping_residual(std::size_t k) const { return residual_[k]; }

  /// Φ_n(t)(X) = Σ_{(x,m): Λ_x(m) = X} δ_x ψ^{(m)}_x(t).
  Interaction assemble(const InteractionSnapshot& s) const;

 private:
  const EigenSystem* es0_;
  SparsePerturbation pert_;
  std::vector<double> times_;
  std::vector<HeisenbergEvolver> evolvers_;
  std::vector<std::vector<std::vector<double>>> norms_;  ///< [k][bond][m]
  std::vector<double> residual_;
};

/// Σ_{X∋x,y} ‖Φ_n(t)(X)‖ at times[k], exact.
double pair_interaction_norm(const InteractionPictureTerms& terms, Site x, Site y, std::size_t k);
/// Σ_z Σ_{m ≥ max(|z−x|, |z−y+1|)} δ_z ‖ψ^{(m)}_z‖ at times[k]. Never below the exact value.
double pair_interaction_norm_bound(const InteractionPictureTerms& terms, Site x, Site y, std::size_t k);

/// sup_{x,y∈Γ_I} e^{μd}/F(d) Σ_{X∋x,y, |X|>1} ‖Φ̃(X)‖ for one contracted interaction.
double contracted_pair_sup(const ContractedInteraction& phi, const FFunction& F, const ContractedLattice& cl);

struct IntegralEstimate {
  double value = 0.0;
  double error = 0.0;  ///< |trapezoid − trapezoid on every other sample| / 3
};

/// I(t) on every sample time (cumulative trapezoid), plus the Richardson error at each.
struct IntegralTrace {
  std::vector<double> times;
  std::vector<double> integrand;
  std::vector<double> value;
  std::vector<double> error;
};

/// Times must start at 0 and be ascending; ResolutionError with fewer than 3 samples.
IntegralTrace integrand_trace(const InteractionPictureTerms& terms, const FFunction& F, const ContractedLattice& cl);
/// I(t_end); t_end must be one of the sample times.
IntegralEstimate integrand_I(const InteractionPictureTerms& terms, const FFunction& F, const ContractedLattice& cl,
                             double t_end);
IntegralEstimate trapezoid_with_error(std::span<const double> x, std::span<const double> y);

/// (2‖F‖/C_{F_μ}) min{|C(X)|, |C(Y)|} (e^{2 C_{F_μ} I} − 1) e^{−μ d(C(X), C(Y))}.
/// DomainError when C(X) and C(Y) intersect.
double lr_bound_value(const FFunction& F, const ContractedLattice& cl, const SiteSet& X, const SiteSet& Y,
                      double I_t);

/// τ^{I}_t(A) = τ^{H}_t(τ^{H0}_{−t}(A)) for the non-identity Pauli words on X.
EvolutionFn interaction_picture_evolution(const EigenSystem& es0, const EigenSystem& es, const SiteSet& X);

/// Zero runs of a bond mask as site intervals [first + s + collar, first + e + 1 - collar]; runs that
/// vanish under the collar are skipped.
std::vector<std::pair<Site, Site>> zero_run_intervals(std::span<const int> delta, Site first, int collar);

struct BoundRow {
  double t = 0.0;
  double measured = 0.0;
  double bound = 0.0;
  double margin() const { return bound - measured; }
};
/// Measured interaction-picture Pauli estimator against the bound at every sample time of `terms`.
/// `es` must describe H0 + Σ δ_x ψ_x.
std::vector<BoundRow> lr_bound_comparison(const EigenSystem& es0, const EigenSystem& es,
                                          const InteractionPictureTerms& terms, const FFunction& F,
                                          const ContractedLattice& cl, const SiteSet& X, const SiteSet& Y);
void write_bound_csv(std::ostream& os, const std::vector<BoundRow>& rows);

}  // namespace mbl
