#include "mbl/config.hpp"
#include "mbl/errors.hpp"
#include "mbl/harness.hpp"
#include "mbl/io.hpp"
#include "mbl/lioms.hpp"
#include "mbl/lrbounds.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

namespace fs = std::filesystem;
using namespace mbl;

constexpr double bound_slack = 1e-8;

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> out;
};

ExperimentConfig resolve(const Globals& g) {
  ExperimentConfig cfg = g.config.empty() ? ExperimentConfig{} : load_config(g.config);
  if (g.seed) cfg.seed = *g.seed;
  if (g.threads) cfg.threads = *g.threads;
  if (g.out) cfg.output = *g.out;
  cfg.validate();
  return cfg;
}

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

RunManifest manifest(const std::string& command, const Timer& timer) {
  RunManifest m;
  m.command = command;
  m.wall_seconds = timer.seconds();
  return m;
}

/// Writes one table into cfg.output and returns its path.
template <typename Body>
std::string write_table(const ExperimentConfig& cfg, const std::string& name, Body body) {
  std::error_code ec;
  fs::create_directories(cfg.output, ec);
  if (ec) throw IoError("cannot create output directory " + cfg.output);
  const std::string path = (fs::path(cfg.output) / name).string();
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write " + path);
  body(os);
  if (!os) throw IoError("write failed for " + path);
  return path;
}

void finish(const ExperimentConfig& cfg, RunManifest m, std::vector<std::string> files) {
  const std::string path = (fs::path(cfg.output) / "manifest.json").string();
  m.files = std::move(files);
  m.files.push_back(path);
  m.config_hash = config_hash(cfg);
  m.seed = cfg.seed;
  m.realizations = cfg.realizations;
  m.threads = cfg.threads;
  write_manifest(path, m, cfg);
  for (const auto& f : m.files) std::cout << f << '\n';
}

void cmd_build(const Globals& g, std::uint64_t r) {
  Timer timer;
  const ExperimentConfig cfg = resolve(g);
  const ModelBuild b = draw_model(cfg, cfg.model.n, r);
  const EigenSystem es = eigendecompose(b.hamiltonian);
  std::vector<std::string> files;
  files.push_back(write_table(cfg, "spectrum.csv", [&](std::ostream& os) {
    os << "index,energy\n";
    for (Index k = 0; k < es.dim(); ++k) os << k << ',' << format_number(es.energies()(k)) << '\n';
  }));
  files.push_back(write_table(cfg, "terms.csv", [&](std::ostream& os) {
    os << "first,last,norm\n";
    for (const auto& [support, term] : b.interaction.terms())
      os << support.front() << ',' << support.back() << ',' << format_number(operator_norm(term)) << '\n';
  }));
  std::cout << "dimension " << es.dim() << ", " << es.blocks().size() << " blocks, |H| = "
            << format_number(es.spectral_radius()) << '\n';
  finish(cfg, manifest("build", timer), std::move(files));
}

void cmd_evolve(const Globals& g, std::uint64_t r, int distance) {
  Timer timer;
  const ExperimentConfig cfg = resolve(g);
  const ModelBuild b = draw_model(cfg, cfg.model.n, r);
  const EigenSystem es = eigendecompose(b.hamiltonian);
  const std::vector<double> grid = build_time_grid(cfg.time_grid);
  const CommutatorTrace tr = commutator_trace(es, {cfg.origin}, {cfg.origin + distance}, grid, cfg.estimator);
  std::vector<std::string> files{write_table(cfg, "trace.csv", [&](std::ostream& os) { write_trace_csv(os, tr); })};
  std::cout << "sup " << format_number(sup_over_time(tr)) << '\n';
  finish(cfg, manifest("evolve", timer), std::move(files));
}

void cmd_localize(const Globals& g) {
  Timer timer;
  const ExperimentConfig cfg = resolve(g);
  const LocalizationReport rep = run_localization_experiment(cfg);
  std::cout << "eta " << format_number(rep.eta) << " +- " << format_number(rep.eta_se) << " ci ["
            << format_number(rep.eta_ci_low) << ", " << format_number(rep.eta_ci_high) << "]\n";
  for (const auto& f : emit_results(rep, cfg, manifest("localize", timer))) std::cout << f << '\n';
}

void cmd_ttime(const Globals& g, ScalingParams sp) {
  Timer timer;
  const ExperimentConfig cfg = resolve(g);
  sp.alpha = cfg.schedule.alpha;
  sp.p_zero = cfg.perturbation.enabled ? cfg.perturbation.p_zero : 1.0;
  if (cfg.schedule.eta) sp.eta = *cfg.schedule.eta;
  const TransmissionReport rep = run_transmission_scaling(cfg, sp);
  for (const auto& row : rep.rows)
    std::cout << "n " << row.n << " median " << format_number(row.median) << " censored "
              << format_number(row.censored_fraction) << '\n';
  for (const auto& f : emit_results(rep, cfg, manifest("ttime", timer))) std::cout << f << '\n';
}

void cmd_lioms(const Globals& g, std::uint64_t r, const std::string& kind) {
  Timer timer;
  const ExperimentConfig cfg = resolve(g);
  const ModelBuild b = draw_model(cfg, cfg.model.n, r);
  const EigenSystem es = eigendecompose(b.hamiltonian);
  std::vector<std::string> files;
  if (kind == "first") {
    const LiomFirstKind lf = liom_first_kind_decompose(es, es.chain());
    files.push_back(write_table(cfg, "phi.csv", [&](std::ostream& os) { write_phi_csv(os, lf, 1e-14); }));
    files.push_back(write_table(cfg, "two_point.csv", [&](std::ostream& os) {
      os << "x,y,value\n";
      for (Index x = 0; x < lf.two_point.rows(); ++x)
        for (Index y = 0; y < lf.two_point.cols(); ++y)
          if (x != y) os << x << ',' << y << ',' << format_number(lf.two_point(x, y)) << '\n';
    }));
    files.push_back(write_table(cfg, "unitary_profile.csv", [&](std::ostream& os) {
      write_profile_csv(os, unitary_quasilocality_profile(lf.U, lf.chain));
    }));
  } else {
    const SecondKindLioms s = build_lioms_second_kind(es, b.interaction.local_terms());
    files.push_back(write_table(cfg, "profile.csv", [&](std::ostream& os) { write_profile_csv(os, s.profile); }));
  }
  finish(cfg, manifest("lioms", timer), std::move(files));
}

void cmd_lrbound(const Globals& g, std::uint64_t r, int collar, double mu, int distance) {
  Timer timer;
  const ExperimentConfig cfg = resolve(g);
  if (cfg.model.kind != "xy") throw ConfigError("lrbound needs the xy model");
  const int n = cfg.model.n;
  const ModelBuild base = build_xy_hamiltonian(draw_xy(cfg.model, n, cfg.seed, r));
  const SparsePerturbation pert = draw_perturbation(cfg.perturbation, base.interaction.chain(), cfg.seed, r);
  const EigenSystem es0 = eigendecompose(base.hamiltonian);
  const EigenSystem es = eigendecompose(apply_sparse_perturbation(base.interaction, pert).hamiltonian());
  const ContractedLattice cl = contract(n, zero_run_intervals(pert.delta, 0, collar));
  const FFunction F = make_f_function(default_decay(), mu, cl.metric());
  std::vector<double> times = linear_grid(0.0, cfg.time_grid.t_max, cfg.time_grid.points);
  const InteractionPictureTerms terms(es0, pert, std::move(times));
  const SiteSet X{cfg.origin}, Y{cfg.origin + distance};
  const auto rows = lr_bound_comparison(es0, es, terms, F, cl, X, Y);
  std::vector<std::string> files{write_table(cfg, "bound.csv", [&](std::ostream& os) { write_bound_csv(os, rows); })};
  int violations = 0;
  for (const auto& row : rows) violations += row.margin() < -bound_slack;
  std::cout << cl.intervals.size() << " intervals, " << violations << " rows above the bound by more than "
            << bound_slack << '\n';
  finish(cfg, manifest("lrbound", timer), std::move(files));
}

void cmd_gaps(const Globals& g) {
  Timer timer;
  const ExperimentConfig cfg = resolve(g);
  const GapStatistics s = run_gap_statistics(cfg);
  std::cout << s.zero_gap_events << " zero-gap events\n";
  if (s.tail_fit)
    std::cout << "tail exponent " << format_number(s.tail_fit->exponent) << " +- "
              << format_number(s.tail_fit->exponent_se) << '\n';
  for (const auto& f : emit_results(s, cfg, manifest("gaps", timer))) std::cout << f << '\n';
}

void cmd_report(const Globals& g, const ScalingParams& sp) {
  Timer timer;
  const ExperimentConfig cfg = resolve(g);
  const ConstraintReport c = constraint_report(sp);
  if (!c.in_scope)
    std::cout << "alpha outside (0, 1/3): out of scope\n";
  else if (c.unconstrained)
    std::cout << "p_zero = 1: unconstrained\n";
  else
    std::cout << "gamma_max " << format_number(c.gamma_max) << ", gamma " << format_number(sp.gamma)
              << (c.satisfied ? " satisfies" : " violates") << " the constraint\n";
  std::vector<std::string> files{
      write_table(cfg, "constraint.csv", [&](std::ostream& os) { write_constraint_csv(os, sp, c); })};
  finish(cfg, manifest("report", timer), std::move(files));
}

void add_scaling_options(CLI::App* sub, ScalingParams& sp) {
  sub->add_option("--beta", sp.beta, "time-weight exponent");
  sub->add_option("--gamma", sp.gamma, "growth exponent to test");
  sub->add_option("--theta", sp.theta);
  sub->add_option("--sigma", sp.sigma);
  sub->add_option("--lambda-split", sp.lambda_split);
  sub->add_option("--nu", sp.nu);
  sub->add_option("--xi", sp.xi);
  sub->add_option("--kappa", sp.kappa);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Disordered spin chain simulator"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "JSON experiment config")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "master seed");
  app.add_option("--threads", g.threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", g.out, "output directory");

  std::uint64_t realization = 0;
  int distance = 1;
  auto* build = app.add_subcommand("build", "draw one realization, write its spectrum and terms");
  build->add_option("--realization", realization);
  auto* evolve = app.add_subcommand("evolve", "Pauli commutator trace for one distance");
  evolve->add_option("--realization", realization);
  evolve->add_option("--distance", distance)->check(CLI::PositiveNumber);
  auto* localize = app.add_subcommand("localize", "disorder-averaged decay in distance and its rate");
  ScalingParams ttime_sp;
  auto* ttime = app.add_subcommand("ttime", "transmission-time scaling over the configured sizes");
  add_scaling_options(ttime, ttime_sp);
  std::string liom_kind = "second";
  auto* lioms = app.add_subcommand("lioms", "integrals of motion of one realization");
  lioms->add_option("--realization", realization);
  lioms->add_option("--kind", liom_kind)->check(CLI::IsMember({"first", "second"}));
  int collar = 0;
  double mu = 0.0;
  auto* lrbound = app.add_subcommand("lrbound", "measured commutator against the contracted-lattice bound");
  lrbound->add_option("--realization", realization);
  lrbound->add_option("--distance", distance)->check(CLI::PositiveNumber);
  lrbound->add_option("--collar", collar)->check(CLI::NonNegativeNumber);
  lrbound->add_option("--mu", mu)->check(CLI::NonNegativeNumber);
  auto* gaps = app.add_subcommand("gaps", "minimum spectral gap statistics");
  ScalingParams report_sp;
  auto* report = app.add_subcommand("report", "scaling constraint and its largest admissible gamma");
  report->add_option("--alpha", report_sp.alpha);
  report->add_option("--eta", report_sp.eta);
  report->add_option("--p-zero", report_sp.p_zero);
  add_scaling_options(report, report_sp);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*build) cmd_build(g, realization);
    else if (*evolve) cmd_evolve(g, realization, distance);
    else if (*localize) cmd_localize(g);
    else if (*ttime) cmd_ttime(g, ttime_sp);
    else if (*lioms) cmd_lioms(g, realization, liom_kind);
    else if (*lrbound) cmd_lrbound(g, realization, collar, mu, distance);
    else if (*gaps) cmd_gaps(g);
    else if (*report) cmd_report(g, report_sp);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::bad_alloc&) {
    std::cerr << "error: out of memory\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
