#pragma once

#include "mbl/config.hpp"
#include "mbl/dynamics.hpp"
#include "mbl/freefermion.hpp"
#include "mbl/stats.hpp"

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

namespace mbl {

/// Runs f(0) .. f(count - 1) on `threads` workers. Each result is stored at its own index, so the
/// output does not depend on scheduling. The first exception (lowest index) is rethrown.
template <typename T>
std::vector<T> parallel_map(Index count, int threads, const std::function<T(Index)>& f) {
  std::vector<std::optional<T>> slots(static_cast<std::size_t>(count));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  std::atomic<Index> next{0};
  auto work = [&] {
    for (Index i = next++; i < count; i = next++) {
      try {
        slots[static_cast<std::size_t>(i)].emplace(f(i));
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  const int workers = static_cast<int>(std::min<Index>(std::max(threads, 1), std::max<Index>(count, 1)));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<T> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

// ---- draws -------------------------------------------------------------------------------------

XYParams draw_xy(const ModelConfig& m, int n, std::uint64_t seed, std::uint64_t realization);
IsingParams draw_ising(const ModelConfig& m, int n, std::uint64_t seed, std::uint64_t realization);
/// Bernoulli(p_zero) mask on the bonds of `chain` and the chosen ψ family.
SparsePerturbation draw_perturbation(const PerturbationConfig& p, const Chain& chain, std::uint64_t seed,
                                     std::uint64_t realization);
/// Hamiltonian of one realization of size n (perturbation included when enabled).
ModelBuild draw_model(const ExperimentConfig& cfg, int n, std::uint64_t realization);

// ---- localization ------------------------------------------------------------------------------

struct DistanceSummary {
  int distance = 0;
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double se = 0.0;
  int R = 0;
  bool dropped = false;
};

struct LocalizationReport {
  std::string engine;
  int n = 0;
  std::vector<int> distances;
  std::vector<std::vector<double>> raw;  ///< [realization][distance index]
  std::vector<DistanceSummary> summary;
  double eta = 0.0;  ///< minus the slope of the weighted fit of log-means
  double eta_se = 0.0;
  double eta_ci_low = 0.0;  ///< percentile bootstrap over realizations
  double eta_ci_high = 0.0;
  double log_prefactor = 0.0;
  std::vector<int> fitted_distances;
  std::vector<std::string> warnings;
};

/// Per-realization quantity: the Pauli estimator grid sup (manybody) or the one-body kernel entry
/// K(origin, origin + d) on a one-body grid twice the configured time grid (onebody).
std::vector<double> localization_sample(const ExperimentConfig& cfg, std::uint64_t realization);
/// Means, bootstrap intervals and the η fit from raw samples.
LocalizationReport summarize_localization(const ExperimentConfig& cfg, std::vector<std::vector<double>> raw);
LocalizationReport run_localization_experiment(const ExperimentConfig& cfg);

// ---- transmission time -------------------------------------------------------------------------

struct ScalingParams {
  double alpha = 0.1;
  double beta = 0.0;
  double gamma = 1.0;
  double eta = 1.0;
  double p_zero = 0.9;
  // proof-side knobs, recorded only
  double theta = 0.5;
  double sigma = 0.25;
  double lambda_split = 0.5;
  double nu = 1.0;
  double xi = 1.0;
  double kappa = 1.0;
  /// Throws ConfigError.
  void validate() const;
};

struct TransmissionRow {
  int n = 0;
  double epsilon = 0.0;
  int R = 0;
  double censored_fraction = 0.0;
  double median = 0.0;  ///< +inf when at least half the draws are censored
  double q25 = 0.0;
  double q75 = 0.0;
  bool fully_censored = false;
};

struct TransmissionReport {
  double eta_used = 0.0;
  bool eta_estimated = false;
  std::vector<TransmissionRow> rows;
  std::vector<std::vector<TransmissionTimeResult>> raw;  ///< [size index][realization]
  std::vector<std::string> warnings;
};

/// Quantile with censored values treated as +inf.
double censored_quantile(const std::vector<TransmissionTimeResult>& r, double q);
double schedule_epsilon(const ScheduleConfig& s, double eta, int n);
TransmissionReport run_transmission_scaling(const ExperimentConfig& cfg, const ScalingParams& sp);

// ---- constraint --------------------------------------------------------------------------------

struct ConstraintReport {
  bool in_scope = true;      ///< 0 < α < 1/3
  bool unconstrained = false;  ///< p_zero = 1
  double gamma_max = 0.0;    ///< +inf when unconstrained
  bool satisfied = false;    ///< the inequality at sp.gamma
  double lhs = 0.0;
  double rhs = 0.0;
};

/// η(1 − 3α)/(1 − α) > 2[(β + 1)γ − 1] log(1/p), evaluated directly.
bool scaling_inequality(double alpha, double beta, double gamma, double eta, double p);
ConstraintReport constraint_report(const ScalingParams& sp);

// ---- gaps --------------------------------------------------------------------------------------

struct GapStatistics {
  int interval_length = 0;
  std::vector<double> min_gaps;  ///< per realization, 0 for zero-gap events
  int zero_gap_events = 0;
  std::vector<double> deltas;
  std::vector<double> cdf;  ///< P̂(min gap < δ)
  std::optional<PowerLawFit> tail_fit;
};

/// min_{j≠k} |E_j − E_k| for ascending energies; 0 when fewer than two.
double min_spectral_gap(const RealVector& ascending);
GapStatistics run_gap_statistics(const ExperimentConfig& cfg);

}  // namespace mbl
