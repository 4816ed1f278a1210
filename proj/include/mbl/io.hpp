#pragma once

#include "mbl/harness.hpp"

#include <iosfwd>
#include <string>

namespace mbl {

/// "%.17g", with inf and nan spelled out, independent of the stream's locale and flags.
std::string format_number(double v);

void write_localization_csv(std::ostream& os, const LocalizationReport& r);      ///< distance,mean,ci_low,ci_high,R
void write_localization_raw_csv(std::ostream& os, const LocalizationReport& r);  ///< realization,distance,value
void write_localization_fit_csv(std::ostream& os, const LocalizationReport& r);  ///< eta,eta_se,eta_ci_low,eta_ci_high,log_prefactor
void write_transmission_csv(std::ostream& os, const TransmissionReport& r);  ///< n,epsilon,R,censored_fraction,median,q25,q75
void write_transmission_raw_csv(std::ostream& os, const TransmissionReport& r);
void write_gap_csv(std::ostream& os, const GapStatistics& g);      ///< realization,min_gap
void write_gap_cdf_csv(std::ostream& os, const GapStatistics& g);  ///< delta,probability
void write_constraint_csv(std::ostream& os, const ScalingParams& sp, const ConstraintReport& c);

/// Checks the header of a localization table and that every row parses with ci_low <= mean <= ci_high.
bool validate_localization_csv(const std::string& text, std::string* why = nullptr);

struct RunManifest {
  std::string command;
  std::string version = "0.1.0";
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  int realizations = 0;
  int threads = 1;
  double wall_seconds = 0.0;
  std::vector<std::string> files;
  std::vector<std::string> warnings;
};

/// Writes the tables of a report into cfg.output plus manifest.json; returns the paths written.
/// IoError when the directory or a file cannot be written.
std::vector<std::string> emit_results(const LocalizationReport& r, const ExperimentConfig& cfg, RunManifest m);
std::vector<std::string> emit_results(const TransmissionReport& r, const ExperimentConfig& cfg, RunManifest m);
std::vector<std::string> emit_results(const GapStatistics& g, const ExperimentConfig& cfg, RunManifest m);

void write_manifest(const std::string& path, const RunManifest& m, const ExperimentConfig& cfg);

}  // namespace mbl
