#pragma once

#include "mbl/dynamics.hpp"
#include "mbl/models.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace mbl {

/// Stream ids used to derive independent disorder families from the master seed.
namespace streams {
inline constexpr std::uint64_t mu = 1, gamma = 2, omega = 3, J = 4, Gamma = 5, h = 6, delta = 7, psi = 8,
                               bootstrap = 9;
}

struct ModelConfig {
  std::string kind = "xy";  ///< xy | ising
  int n = 8;                ///< sites 0..n
  // xy
  DisorderSpec mu = DisorderSpec::constant(1.0);
  DisorderSpec gamma = DisorderSpec::constant(0.0);
  DisorderSpec omega = DisorderSpec::uniform(-1.0, 1.0, 0, streams::omega);
  double lambda = 8.0;
  // ising
  DisorderSpec J = DisorderSpec::uniform(0.5, 1.5, 0, streams::J);
  DisorderSpec Gamma = DisorderSpec::uniform(0.5, 1.5, 0, streams::Gamma);
  DisorderSpec h = DisorderSpec::uniform(-1.0, 1.0, 0, streams::h);
  double gamma_scale = 0.1;
};

struct PerturbationConfig {
  bool enabled = false;
  std::string kind = "zz";  ///< zz | random_block
  double p_zero = 0.9;
  double strength = 1.0;
};

struct TimeGridConfig {
  std::string kind = "log";  ///< log (default_time_grid) | linear
  int points = 100;
  double t_max = 25.0;
};

struct ScheduleConfig {
  double alpha = 0.1;
  std::optional<double> eta;      ///< estimated first when absent
  std::optional<double> epsilon;  ///< fixed threshold, overrides the schedule
  double tol = 1e-3;
};

struct GapConfig {
  int delta_points = 50;
  double delta_min = 1e-6;
  double delta_max = 1.0;
  double tail_fraction = 0.2;  ///< lowest fraction of the δ grid used in the power-law fit
};

struct ExperimentConfig {
  ModelConfig model;
  PerturbationConfig perturbation;
  int realizations = 10;
  std::uint64_t seed = 42;
  TimeGridConfig time_grid;
  std::vector<int> distances{1, 2, 3, 4, 5, 6, 7, 8};
  std::vector<int> sizes{4, 5, 6, 7, 8};
  std::string engine = "manybody";  ///< manybody | onebody
  Site origin = 0;
  EstimatorNormalization estimator{1.0, 0.0};
  ScheduleConfig schedule;
  GapConfig gaps;
  int bootstrap_resamples = 1000;
  int threads = 1;
  std::string output = "out";

  /// Throws ConfigError.
  void validate() const;
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
/// Sorted-key JSON of every field that influences results (threads and output excluded).
std::string canonical_json(const ExperimentConfig& cfg);
/// FNV-1a over canonical_json.
std::uint64_t config_hash(const ExperimentConfig& cfg);
std::string hex64(std::uint64_t v);

std::vector<double> build_time_grid(const TimeGridConfig& g);

}  // namespace mbl
