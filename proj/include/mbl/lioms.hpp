#pragma once

#include "mbl/dynamics.hpp"

#include <functional>
#include <iosfwd>
#include <optional>

namespace mbl {

/// (1/T)∫_0^T τ_t(A) dt in closed form. Returned on the whole chain of `es`.
LocalOperator finite_time_average(const EigenSystem& es, const LocalOperator& a, double T);

/// 1e-9·‖H‖.
double default_gap_tol(const EigenSystem& es);

/// Spectral dephasing of A: eigenbasis entries with |E_j − E_k| > gap_tol removed.
struct DephasedOperator {
  LocalOperator op;                             ///< computational basis, whole chain
  std::vector<EigenSystem::BlockOp> eigen_blocks;  ///< the same operator in the eigenbasis
  double gap_tol = 0.0;
};

/// gap_tol < 0 selects default_gap_tol(es).
DephasedOperator dephase(const EigenSystem& es, const LocalOperator& a, double gap_tol = -1.0);

/// Rows are sites, column r holds the value at radius r (r = 0 .. chain.size() - 1).
struct LocalityProfile {
  std::vector<Site> sites;
  RealMatrix values;
  double at(Site x, int r) const;
};

struct SecondKindLioms {
  std::vector<DephasedOperator> lioms;  ///< one per input term
  LocalityProfile profile;              ///< ‖h̃_x − Π_{B_r(x)} h̃_x‖, x = leftmost site of term x
};

/// Terms are indexed by chain position (as from Interaction::local_terms()).
/// Throws DomainError if Σ h_x differs from H by more than 1e-10 relative (Frobenius).
SecondKindLioms build_lioms_second_kind(const EigenSystem& es, const std::vector<LocalOperator>& terms,
                                        double gap_tol = -1.0);

/// Diagonal Hamiltonian in spin language: U†HU = Σ_X φ(X) Π_{x∈X} σ^z_x.
/// Subset masks use bit (size - 1 - position), matching basis-state bits.
struct LiomFirstKind {
  Chain chain;
  std::vector<Index> assignment;  ///< assignment[b] = eigen index labelled by basis state b
  Matrix U;                       ///< column b is eigenvector assignment[b], phase fixed
  RealVector diagonal;            ///< D_b = E_{assignment[b]}
  RealVector phi;                 ///< indexed by subset mask
  RealMatrix two_point;           ///< T(x, y) = Σ_{X∋x,y} |φ(X)| by chain position

  Index mask_of(const SiteSet& X) const;
  double coupling(const SiteSet& X) const { return phi(mask_of(X)); }
};

/// φ = 2^{-N} WHT(D).
RealVector character_transform(const RealVector& diagonal);
/// D = WHT(φ).
RealVector inverse_character_transform(const RealVector& phi);
RealMatrix two_point_kernel(const RealVector& phi, Index n_sites);

/// Qubit chains only (UnsupportedDimensionError otherwise); ResourceError above 2^12 states.
LiomFirstKind liom_first_kind_decompose(const EigenSystem& es, const Chain& chain);

/// G_x(r) = max over single-site Paulis A at x of ‖U†AU − Π_{B_r(x)}(U†AU)‖.
/// DomainError if ‖UU† − 1‖_F > 1e-8. Empty `sites` means every site.
LocalityProfile unitary_quasilocality_profile(const Eigen::Ref<const Matrix>& U, const Chain& chain,
                                              const SiteSet& sites = {});

/// max over non-identity Pauli words A on X of ‖U†AU − Π_region(U†AU)‖.
double unitary_region_defect(const Eigen::Ref<const Matrix>& U, const Chain& chain, const SiteSet& X,
                             const SiteSet& region);

/// F(r) for r = 0 .. N-1: nonincreasing envelope of the two-point kernel, F(r) = max_{|x-y| ≥ r} T(x, y).
/// Entry 0 repeats entry 1. Values are floored at `floor` to keep F positive.
std::vector<double> empirical_envelope(const RealMatrix& two_point, double floor = 1e-300);

struct LiomBoundCheck {
  double lhs = 0.0;  ///< Pauli commutator estimator at t
  double rhs = 0.0;  ///< 2(D_X + D_Y) + 4|t|·C·ΣF
  double D_X = 0.0, D_Y = 0.0;
  double C = 0.0;      ///< sup_{x≠y} T(x, y) / F(|x − y|)
  double F_sum = 0.0;  ///< Σ_{x∈X_λ, y∈Y_λ} F(|x − y|)
  SiteSet X_lambda, Y_lambda;
  bool violated() const { return lhs > rhs; }
};

/// `F` maps a distance to a positive weight; empty selects the empirical envelope of lf.two_point.
/// DomainError unless 0 < lambda_frac < 1/2.
LiomBoundCheck verify_liom_bound(const LiomFirstKind& lf, const EigenSystem& es, const SiteSet& X,
                                 const SiteSet& Y, double t, double lambda_frac,
                                 const std::function<double(int)>& F = {});

/// mask,value with mask bit p set for chain position p; zero couplings skipped.
void write_phi_csv(std::ostream& os, const LiomFirstKind& lf, double drop_below = 0.0);
/// x,r,value
void write_profile_csv(std::ostream& os, const LocalityProfile& p);

}  // namespace mbl
