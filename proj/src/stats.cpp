#include "mbl/stats.hpp"
#include "mbl/errors.hpp"
#include "mbl/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mbl {

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw DomainError("quantile: empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError("quantile: q must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0) return values[lo];
  return values[lo] + frac * (values[hi] - values[lo]);
}

double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

double mean(std::span<const double> values) {
  if (values.empty()) throw DomainError("mean: empty sample");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

std::vector<std::vector<Index>> bootstrap_indices(Index n, int resamples, std::uint64_t seed) {
  if (n < 1 || resamples < 1) throw DomainError("bootstrap: need a nonempty sample and resamples >= 1");
  RandomStream rng(seed);
  std::vector<std::vector<Index>> out(static_cast<std::size_t>(resamples), std::vector<Index>(static_cast<std::size_t>(n)));
  for (auto& draw : out)
    for (auto& i : draw) i = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
  return out;
}

BootstrapSummary bootstrap_mean(std::span<const double> values, int resamples, std::uint64_t seed, double level) {
  BootstrapSummary s;
  s.mean = mean(values);
  const auto draws = bootstrap_indices(static_cast<Index>(values.size()), resamples, seed);
  std::vector<double> means;
  means.reserve(draws.size());
  for (const auto& d : draws) {
    double acc = 0.0;
    for (Index i : d) acc += values[static_cast<std::size_t>(i)];
    means.push_back(acc / static_cast<double>(d.size()));
  }
  const double alpha = (1.0 - level) / 2.0;
  s.ci_low = quantile(means, alpha);
  s.ci_high = quantile(means, 1.0 - alpha);
  const double m = mean(means);
  double var = 0.0;
  for (double v : means) var += (v - m) * (v - m);
  s.se = means.size() > 1 ? std::sqrt(var / static_cast<double>(means.size() - 1)) : 0.0;
  return s;
}

namespace {

LineFit solve_weighted(std::span<const double> x, std::span<const double> y, std::span<const double> w) {
  if (x.size() != y.size() || x.size() != w.size()) throw DomainError("line fit: size mismatch");
  if (x.size() < 2) throw ResolutionError("line fit: need at least 2 points");
  double S = 0, Sx = 0, Sy = 0, Sxx = 0, Sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(w[i] > 0.0) || !std::isfinite(w[i])) throw DomainError("line fit: weights must be positive and finite");
    S += w[i];
    Sx += w[i] * x[i];
    Sy += w[i] * y[i];
    Sxx += w[i] * x[i] * x[i];
    Sxy += w[i] * x[i] * y[i];
  }
  const double det = S * Sxx - Sx * Sx;
  if (!(std::abs(det) > 0.0)) throw ResolutionError("line fit: degenerate abscissae");
  LineFit f;
  f.slope = (S * Sxy - Sx * Sy) / det;
  f.intercept = (Sxx * Sy - Sx * Sxy) / det;
  f.slope_se = std::sqrt(S / det);
  f.intercept_se = std::sqrt(Sxx / det);
  for (std::size_t i = 0; i < x.size(); ++i) f.residuals.push_back(y[i] - (f.intercept + f.slope * x[i]));
  return f;
}

}  // namespace

LineFit weighted_line_fit(std::span<const double> x, std::span<const double> y, std::span<const double> w) {
  return solve_weighted(x, y, w);
}

LineFit line_fit(std::span<const double> x, std::span<const double> y) {
  const std::vector<double> ones(x.size(), 1.0);
  LineFit f = solve_weighted(x, y, ones);
  if (x.size() > 2) {
    double rss = 0.0;
    for (double r : f.residuals) rss += r * r;
    const double s = std::sqrt(rss / static_cast<double>(x.size() - 2));
    f.slope_se *= s;
    f.intercept_se *= s;
  } else {
    f.slope_se = f.intercept_se = 0.0;
  }
  return f;
}

PowerLawFit power_law_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DomainError("power_law_fit: size mismatch");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] > 0.0 && y[i] > 0.0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  const LineFit f = line_fit(lx, ly);
  return {std::exp(f.intercept), f.slope, f.slope_se, static_cast<Index>(lx.size())};
}

}  // namespace mbl
