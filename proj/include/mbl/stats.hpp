#pragma once

#include "mbl/types.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace mbl {

/// Linear-interpolation quantile (the usual "type 7"); q in [0, 1].
double quantile(std::vector<double> values, double q);
double median(std::vector<double> values);
double mean(std::span<const double> values);

struct BootstrapSummary {
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double se = 0.0;  ///< standard deviation of the resampled means
};

/// Percentile bootstrap of the mean.
BootstrapSummary bootstrap_mean(std::span<const double> values, int resamples, std::uint64_t seed,
                                double level = 0.95);

/// Resampling indices 0..n-1 with replacement, `resamples` times, from one seeded stream.
std::vector<std::vector<Index>> bootstrap_indices(Index n, int resamples, std::uint64_t seed);

struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double intercept_se = 0.0;
  double slope_se = 0.0;
  std::vector<double> residuals;
};

/// Weighted least squares y ≈ a + b x. Standard errors from (XᵀWX)⁻¹ with weights taken as inverse variances.
LineFit weighted_line_fit(std::span<const double> x, std::span<const double> y, std::span<const double> w);
/// Ordinary least squares; standard errors from the residual variance.
LineFit line_fit(std::span<const double> x, std::span<const double> y);

/// y ≈ c x^p by least squares on logs; points with x <= 0 or y <= 0 are ignored.
struct PowerLawFit {
  double prefactor = 0.0;
  double exponent = 0.0;
  double exponent_se = 0.0;
  Index points = 0;
};
PowerLawFit power_law_fit(std::span<const double> x, std::span<const double> y);

}  // namespace mbl
