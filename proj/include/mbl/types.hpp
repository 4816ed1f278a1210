#pragma once

#include <Eigen/Dense>

#include <complex>
#include <vector>

namespace mbl {

using Complex = std::complex<double>;
using Index = Eigen::Index;

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

using Site = int;
/// Sorted, duplicate-free list of site labels.
using SiteSet = std::vector<Site>;

inline constexpr Complex kI{0.0, 1.0};

}  // namespace mbl
