#include "mbl/io.hpp"
#include "mbl/errors.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

namespace mbl {

namespace fs = std::filesystem;

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_localization_csv(std::ostream& os, const LocalizationReport& r) {
  os << "distance,mean,ci_low,ci_high,R\n";
  for (const auto& s : r.summary)
    os << s.distance << ',' << format_number(s.mean) << ',' << format_number(s.ci_low) << ','
       << format_number(s.ci_high) << ',' << s.R << '\n';
}

void write_localization_raw_csv(std::ostream& os, const LocalizationReport& r) {
  os << "realization,distance,value\n";
  for (std::size_t i = 0; i < r.raw.size(); ++i)
    for (std::size_t d = 0; d < r.distances.size(); ++d)
      os << i << ',' << r.distances[d] << ',' << format_number(r.raw[i][d]) << '\n';
}

void write_localization_fit_csv(std::ostream& os, const LocalizationReport& r) {
  os << "eta,eta_se,eta_ci_low,eta_ci_high,log_prefactor\n";
  os << format_number(r.eta) << ',' << format_number(r.eta_se) << ',' << format_number(r.eta_ci_low) << ','
     << format_number(r.eta_ci_high) << ',' << format_number(r.log_prefactor) << '\n';
}

void write_transmission_csv(std::ostream& os, const TransmissionReport& r) {
  os << "n,epsilon,R,censored_fraction,median,q25,q75\n";
  for (const auto& row : r.rows)
    os << row.n << ',' << format_number(row.epsilon) << ',' << row.R << ',' << format_number(row.censored_fraction)
       << ',' << format_number(row.median) << ',' << format_number(row.q25) << ',' << format_number(row.q75) << '\n';
}

void write_transmission_raw_csv(std::ostream& os, const TransmissionReport& r) {
  os << "n,realization,censored,t_est,t_low,t_high\n";
  for (std::size_t k = 0; k < r.rows.size(); ++k)
    for (std::size_t i = 0; i < r.raw[k].size(); ++i) {
      const auto& x = r.raw[k][i];
      os << r.rows[k].n << ',' << i << ',' << (x.censored ? 1 : 0) << ',' << format_number(x.t_est) << ','
         << format_number(x.t_low) << ',' << format_number(x.t_high) << '\n';
    }
}

void write_gap_csv(std::ostream& os, const GapStatistics& g) {
  os << "realization,min_gap\n";
  for (std::size_t i = 0; i < g.min_gaps.size(); ++i) os << i << ',' << format_number(g.min_gaps[i]) << '\n';
}

void write_gap_cdf_csv(std::ostream& os, const GapStatistics& g) {
  os << "delta,probability\n";
  for (std::size_t i = 0; i < g.deltas.size(); ++i)
    os << format_number(g.deltas[i]) << ',' << format_number(g.cdf[i]) << '\n';
}

void write_constraint_csv(std::ostream& os, const ScalingParams& sp, const ConstraintReport& c) {
  os << "alpha,beta,gamma,eta,p_zero,in_scope,unconstrained,gamma_max,satisfied\n";
  os << format_number(sp.alpha) << ',' << format_number(sp.beta) << ',' << format_number(sp.gamma) << ','
     << format_number(sp.eta) << ',' << format_number(sp.p_zero) << ',' << c.in_scope << ',' << c.unconstrained << ','
     << format_number(c.gamma_max) << ',' << c.satisfied << '\n';
}

bool validate_localization_csv(const std::string& text, std::string* why) {
  auto fail = [why](const std::string& m) {
    if (why) *why = m;
    return false;
  };
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "distance,mean,ci_low,ci_high,R") return fail("bad header");
  int row = 0;
  while (std::getline(in, line)) {
    ++row;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 5) return fail("row " + std::to_string(row) + ": expected 5 columns");
    try {
      std::size_t used = 0;
      const int d = std::stoi(cells[0], &used);
      if (used != cells[0].size() || d < 1) return fail("row " + std::to_string(row) + ": bad distance");
      const double m = std::stod(cells[1]), lo = std::stod(cells[2]), hi = std::stod(cells[3]);
      const int R = std::stoi(cells[4], &used);
      if (used != cells[4].size() || R < 1) return fail("row " + std::to_string(row) + ": bad R");
      if (!(lo <= m && m <= hi)) return fail("row " + std::to_string(row) + ": mean outside its interval");
    } catch (const std::exception&) {
      return fail("row " + std::to_string(row) + ": unparsable number");
    }
  }
  return true;
}

namespace {

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir);
}

std::string write_file(const std::string& dir, const std::string& name, const std::function<void(std::ostream&)>& body) {
  const std::string path = (fs::path(dir) / name).string();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  body(out);
  out.flush();
  if (!out) throw IoError("write failed for " + path);
  return path;
}

std::vector<std::string> finish(const ExperimentConfig& cfg, RunManifest m, std::vector<std::string> files) {
  m.files = files;
  m.config_hash = config_hash(cfg);
  m.seed = cfg.seed;
  m.realizations = cfg.realizations;
  m.threads = cfg.threads;
  const std::string path = (fs::path(cfg.output) / "manifest.json").string();
  write_manifest(path, m, cfg);
  files.push_back(path);
  return files;
}

}  // namespace

std::vector<std::string> emit_results(const LocalizationReport& r, const ExperimentConfig& cfg, RunManifest m) {
  ensure_dir(cfg.output);
  std::vector<std::string> files;
  files.push_back(write_file(cfg.output, "localization.csv", [&](std::ostream& os) { write_localization_csv(os, r); }));
  files.push_back(write_file(cfg.output, "localization_raw.csv", [&](std::ostream& os) { write_localization_raw_csv(os, r); }));
  files.push_back(write_file(cfg.output, "localization_fit.csv", [&](std::ostream& os) { write_localization_fit_csv(os, r); }));
  m.warnings.insert(m.warnings.end(), r.warnings.begin(), r.warnings.end());
  return finish(cfg, std::move(m), std::move(files));
}

std::vector<std::string> emit_results(const TransmissionReport& r, const ExperimentConfig& cfg, RunManifest m) {
  ensure_dir(cfg.output);
  std::vector<std::string> files;
  files.push_back(write_file(cfg.output, "transmission.csv", [&](std::ostream& os) { write_transmission_csv(os, r); }));
  files.push_back(write_file(cfg.output, "transmission_raw.csv", [&](std::ostream& os) { write_transmission_raw_csv(os, r); }));
  m.warnings.insert(m.warnings.end(), r.warnings.begin(), r.warnings.end());
  return finish(cfg, std::move(m), std::move(files));
}

std::vector<std::string> emit_results(const GapStatistics& g, const ExperimentConfig& cfg, RunManifest m) {
  ensure_dir(cfg.output);
  std::vector<std::string> files;
  files.push_back(write_file(cfg.output, "gaps.csv", [&](std::ostream& os) { write_gap_csv(os, g); }));
  files.push_back(write_file(cfg.output, "gap_cdf.csv", [&](std::ostream& os) { write_gap_cdf_csv(os, g); }));
  return finish(cfg, std::move(m), std::move(files));
}

void write_manifest(const std::string& path, const RunManifest& m, const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["command"] = m.command;
  j["version"] = m.version;
  j["config_hash"] = hex64(m.config_hash);
  j["config"] = nlohmann::json::parse(canonical_json(cfg));
  j["seed"] = m.seed;
  j["realizations"] = m.realizations;
  j["threads"] = m.threads;
  j["wall_seconds"] = m.wall_seconds;
  j["files"] = m.files;
  j["warnings"] = m.warnings;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace mbl
