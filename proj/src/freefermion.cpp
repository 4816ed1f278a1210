#include "mbl/freefermion.hpp"

#include "mbl/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

namespace mbl {

OneBodyMatrix build_M(const XYParams& p) {
  p.validate();
  const Index s = p.n + 1;
  OneBodyMatrix out;
  out.n = p.n;
  out.A = RealMatrix::Zero(s, s);
  out.B = RealMatrix::Zero(s, s);
  for (Index j = 0; j < s; ++j) out.A(j, j) = p.lambda * p.omega[static_cast<std::size_t>(j)];
  for (Index j = 0; j + 1 < s; ++j) {
    const double mu = p.mu[static_cast<std::size_t>(j)];
    const double g = p.gamma[static_cast<std::size_t>(j)];
    out.A(j, j + 1) = -mu;
    out.A(j + 1, j) = -mu;
    out.B(j, j + 1) = -mu * g;
    out.B(j + 1, j) = mu * g;
  }
  out.M.resize(2 * s, 2 * s);
  out.M << out.A, out.B, -out.B, -out.A;
  return out;
}

OneBodySpectrum one_body_spectrum(const OneBodyMatrix& m) {
  Eigen::SelfAdjointEigenSolver<RealMatrix> eig(m.M);
  if (eig.info() != Eigen::Success)
    throw NumericalError("one_body_spectrum: eigensolver failed for n=" + std::to_string(m.n));
  return {m.n, eig.eigenvalues(), eig.eigenvectors()};
}

Matrix propagator(const OneBodySpectrum& s, double t) {
  std::vector<Index> rows(static_cast<std::size_t>(s.modes.rows()));
  std::iota(rows.begin(), rows.end(), Index{0});
  return propagator_rows(s, rows, t);
}

Matrix propagator(const OneBodyMatrix& m, double t) { return propagator(one_body_spectrum(m), t); }

Matrix propagator_rows(const OneBodySpectrum& s, std::span<const Index> rows, double t) {
  const Index r = static_cast<Index>(rows.size());
  const Index m = s.modes.cols();
  RealMatrix left_re(r, m), left_im(r, m);
  for (Index a = 0; a < m; ++a) {
    const double c = std::cos(t * s.energies(a));
    const double sn = -std::sin(t * s.energies(a));
    for (Index i = 0; i < r; ++i) {
      const double v = s.modes(rows[static_cast<std::size_t>(i)], a);
      left_re(i, a) = v * c;
      left_im(i, a) = v * sn;
    }
  }
  Matrix out(r, m);
  out.real() = left_re * s.modes.transpose();
  out.imag() = left_im * s.modes.transpose();
  return out;
}

double LocalizationKernel::at(Index j, Index k) const {
  auto it = std::find(rows.begin(), rows.end(), j);
  if (it == rows.end()) throw DomainError("LocalizationKernel: row " + std::to_string(j) + " not computed");
  if (k < 0 || k > n) throw DomainError("LocalizationKernel: column out of range");
  return K(it - rows.begin(), k);
}

namespace {

/// |Σ_a w1_a e^{-itε_a}| + |Σ_a w2_a e^{-itε_a}| for one kernel entry.
struct EntryProbe {
  const RealVector& energies;
  RealVector w1, w2;
  double operator()(double t) const {
    Complex s1 = 0.0, s2 = 0.0;
    for (Index a = 0; a < energies.size(); ++a) {
      const Complex ph = std::polar(1.0, -t * energies(a));
      s1 += w1(a) * ph;
      s2 += w2(a) * ph;
    }
    return std::abs(s1) + std::abs(s2);
  }
};

double golden_max(const EntryProbe& f, double lo, double hi, int iterations) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  double best = std::max(f1, f2);
  for (int i = 0; i < iterations; ++i) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = f(x1);
    }
    best = std::max({best, f1, f2});
  }
  return best;
}

}  // namespace

LocalizationKernel localization_kernel(const OneBodySpectrum& s, std::span<const double> grid,
                                       const KernelOptions& opts) {
  if (grid.empty()) throw DomainError("localization_kernel: empty grid");
  const Index sites = s.n + 1;
  LocalizationKernel out;
  out.n = s.n;
  out.rows = opts.rows;
  if (out.rows.empty()) {
    out.rows.resize(static_cast<std::size_t>(sites));
    std::iota(out.rows.begin(), out.rows.end(), Index{0});
  }
  for (Index j : out.rows)
    if (j < 0 || j >= sites) throw DomainError("localization_kernel: row outside [0, n]");
  out.time_grid.assign(grid.begin(), grid.end());
  const Index r = static_cast<Index>(out.rows.size());
  out.K = RealMatrix::Zero(r, sites);

  // Local maxima of each entry's grid trace are tracked on the fly (top refine_top per entry).
  const bool refine = opts.refine_top > 0 && grid.size() >= 3;
  const auto top = static_cast<std::size_t>(std::max(opts.refine_top, 0));
  using Peak = std::pair<double, Index>;
  std::vector<std::vector<Peak>> peaks(refine ? static_cast<std::size_t>(r * sites) : 0);
  auto offer = [&](Index i, Index k, double v, Index g) {
    auto& list = peaks[static_cast<std::size_t>(i * sites + k)];
    auto pos = std::find_if(list.begin(), list.end(), [&](const Peak& p) { return v > p.first; });
    if (pos == list.end() && list.size() >= top) return;
    list.insert(pos, {v, g});
    if (list.size() > top) list.pop_back();
  };
  RealMatrix prev2, prev1, cur(r, sites);
  const Index gsize = static_cast<Index>(grid.size());
  for (Index g = 0; g < gsize; ++g) {
    const Matrix u = propagator_rows(s, out.rows, grid[static_cast<std::size_t>(g)]);
    for (Index i = 0; i < r; ++i)
      for (Index k = 0; k < sites; ++k) cur(i, k) = std::abs(u(i, k)) + std::abs(u(i, sites + k));
    out.K = out.K.cwiseMax(cur);
    if (refine) {
      for (Index i = 0; i < r; ++i)
        for (Index k = 0; k < sites; ++k) {
          if (g == 1 && prev1(i, k) >= cur(i, k)) offer(i, k, prev1(i, k), 0);
          if (g >= 2 && prev1(i, k) >= prev2(i, k) && prev1(i, k) >= cur(i, k)) offer(i, k, prev1(i, k), g - 1);
          if (g == gsize - 1 && cur(i, k) >= prev1(i, k)) offer(i, k, cur(i, k), g);
        }
      prev2 = prev1;
      prev1 = cur;
    }
  }
  if (!refine) return out;

  out.refined = true;
  for (Index i = 0; i < r; ++i) {
    const Index j = out.rows[static_cast<std::size_t>(i)];
    for (Index k = 0; k < sites; ++k) {
      EntryProbe probe{s.energies, s.modes.row(j).transpose().cwiseProduct(s.modes.row(k).transpose()),
                       s.modes.row(j).transpose().cwiseProduct(s.modes.row(sites + k).transpose())};
      for (const Peak& p : peaks[static_cast<std::size_t>(i * sites + k)]) {
        const Index g = p.second;
        const double lo = grid[static_cast<std::size_t>(std::max<Index>(g - 1, 0))];
        const double hi = grid[static_cast<std::size_t>(std::min<Index>(g + 1, gsize - 1))];
        if (hi <= lo) continue;
        out.K(i, k) = std::max(out.K(i, k), golden_max(probe, lo, hi, opts.golden_iterations));
      }
    }
  }
  return out;
}

LocalizationKernel localization_kernel(const OneBodyMatrix& m, std::span<const double> grid,
                                       const KernelOptions& opts) {
  return localization_kernel(one_body_spectrum(m), grid, opts);
}

std::vector<double> default_kernel_grid() {
  std::vector<double> g(2000);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = 50.0 * static_cast<double>(i) / 1999.0;
  return g;
}

double xy_manybody_surrogate_bound(const LocalizationKernel& k, const SiteSet& X, const SiteSet& Y) {
  if (!site_intersection(X, Y).empty()) throw DomainError("surrogate bound: X and Y overlap");
  double sum = 0.0;
  for (Site j : X)
    for (Site l : Y) sum += k.at(j, l);
  return std::pow(4.0, static_cast<double>(X.size())) * sum;
}

void write_kernel_csv(std::ostream& os, const LocalizationKernel& k) {
  os << "site";
  for (Index c = 0; c <= k.n; ++c) os << ',' << c;
  os << '\n';
  os.precision(17);
  for (std::size_t i = 0; i < k.rows.size(); ++i) {
    os << k.rows[i];
    for (Index c = 0; c <= k.n; ++c) os << ',' << k.K(static_cast<Index>(i), c);
    os << '\n';
  }
}

}  // namespace mbl
