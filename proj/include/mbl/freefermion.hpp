#pragma once

#include "mbl/models.hpp"

#include <iosfwd>
#include <span>

namespace mbl {

/// One-body block matrix M = [[A, B], [-B, -A]] of an XY chain on [0, n].
struct OneBodyMatrix {
  int n = 0;
  RealMatrix A;  ///< diagonal λω_j, off-diagonal -μ_j
  RealMatrix B;  ///< B(j, j+1) = -μ_jγ_j, B(j+1, j) = +μ_jγ_j
  RealMatrix M;
};

OneBodyMatrix build_M(const XYParams& p);

/// Spectral decomposition of M (real symmetric), reused across propagator evaluations.
struct OneBodySpectrum {
  int n = 0;
  RealVector energies;
  RealMatrix modes;  ///< columns are eigenvectors
};

OneBodySpectrum one_body_spectrum(const OneBodyMatrix& m);

/// e^{-itM}.
Matrix propagator(const OneBodyMatrix& m, double t);
Matrix propagator(const OneBodySpectrum& s, double t);
/// Selected rows of e^{-itM}.
Matrix propagator_rows(const OneBodySpectrum& s, std::span<const Index> rows, double t);

struct LocalizationKernel {
  int n = 0;
  std::vector<Index> rows;   ///< site j of each row of K
  RealMatrix K;              ///< rows.size() × (n + 1)
  std::vector<double> time_grid;
  bool refined = false;
  double at(Index j, Index k) const;
};

struct KernelOptions {
  int refine_top = 5;  ///< golden-section searches around this many grid maxima per entry; 0 disables
  int golden_iterations = 40;
  std::vector<Index> rows;  ///< empty: all sites
};

/// K_{jk} = max_t |U_{j,k}(t)| + |U_{j,n+1+k}(t)| over the grid (plus refinement).
LocalizationKernel localization_kernel(const OneBodyMatrix& m, std::span<const double> grid,
                                       const KernelOptions& opts = {});
LocalizationKernel localization_kernel(const OneBodySpectrum& s, std::span<const double> grid,
                                       const KernelOptions& opts = {});

/// 2000 points on [0, 50].
std::vector<double> default_kernel_grid();

/// 4^{|X|} Σ_{j∈X, k∈Y} K_{jk}.
double xy_manybody_surrogate_bound(const LocalizationKernel& k, const SiteSet& X, const SiteSet& Y);

/// Header row of site indices, then one row per kernel row prefixed by its site.
void write_kernel_csv(std::ostream& os, const LocalizationKernel& k);

}  // namespace mbl
