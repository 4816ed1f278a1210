#include "mbl/harness.hpp"
#include "mbl/errors.hpp"
#include "mbl/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mbl {

namespace {

std::vector<double> draw(DisorderSpec spec, std::uint64_t seed, std::uint64_t stream, Index length,
                         std::uint64_t realization) {
  if (length == 0) return {};
  spec.seed = seed;
  spec.stream_id = stream;
  return sample_sequence(spec, length, realization).values;
}

constexpr double kRoundoffFloor = 1e-12;

SiteSet targets(const ExperimentConfig& cfg, int n) {
  SiteSet ys;
  for (int d : cfg.distances) {
    const Site y = cfg.origin + d;
    if (y > n) throw ConfigError("distance " + std::to_string(d) + " reaches past the chain end");
    ys.push_back(y);
  }
  return ys;
}

}  // namespace

XYParams draw_xy(const ModelConfig& m, int n, std::uint64_t seed, std::uint64_t r) {
  XYParams p;
  p.n = n;
  p.mu = draw(m.mu, seed, streams::mu, n, r);
  p.gamma = draw(m.gamma, seed, streams::gamma, n, r);
  p.omega = draw(m.omega, seed, streams::omega, n + 1, r);
  p.lambda = m.lambda;
  return p;
}

IsingParams draw_ising(const ModelConfig& m, int n, std::uint64_t seed, std::uint64_t r) {
  IsingParams p;
  p.a = 0;
  p.b = n;
  p.J = draw(m.J, seed, streams::J, n, r);
  p.Gamma = draw(m.Gamma, seed, streams::Gamma, n + 1, r);
  p.h = draw(m.h, seed, streams::h, n + 1, r);
  p.gamma_scale = m.gamma_scale;
  return p;
}

SparsePerturbation draw_perturbation(const PerturbationConfig& p, const Chain& chain, std::uint64_t seed,
                                     std::uint64_t r) {
  const Index bonds = chain.size() - 1;
  if (bonds < 1) throw ConfigError("perturbation needs at least one bond");
  std::vector<int> delta = to_mask(draw(DisorderSpec::bernoulli(p.p_zero, 0, 0), seed, streams::delta, bonds, r));
  if (p.kind == "zz") return zz_perturbation(chain, std::move(delta), p.p_zero, p.strength);
  RandomStream rng(seed, streams::psi, r);
  Matrix g(4, 4);
  for (Index j = 0; j < 4; ++j)
    for (Index i = 0; i < 4; ++i) g(i, j) = Complex(rng.normal(), rng.normal());
  Matrix block = 0.5 * (g + g.adjoint());
  block *= p.strength / spectral_norm_dense(block);
  return block_perturbation(chain, std::move(delta), p.p_zero, block);
}

ModelBuild draw_model(const ExperimentConfig& cfg, int n, std::uint64_t r) {
  ModelBuild base = cfg.model.kind == "ising" ? build_ising_hamiltonian(draw_ising(cfg.model, n, cfg.seed, r))
                                              : build_xy_hamiltonian(draw_xy(cfg.model, n, cfg.seed, r));
  if (!cfg.perturbation.enabled) return base;
  const SparsePerturbation pert = draw_perturbation(cfg.perturbation, base.interaction.chain(), cfg.seed, r);
  Interaction phi = apply_sparse_perturbation(base.interaction, pert);
  LocalOperator h = phi.hamiltonian();
  return {std::move(phi), std::move(h)};
}

std::vector<double> localization_sample(const ExperimentConfig& cfg, std::uint64_t r) {
  const int n = cfg.model.n;
  const SiteSet ys = targets(cfg, n);
  const std::vector<double> grid = build_time_grid(cfg.time_grid);
  if (cfg.engine == "onebody") {
    if (cfg.model.kind != "xy") throw ConfigError("the onebody engine needs the xy model");
    const OneBodySpectrum s = one_body_spectrum(build_M(draw_xy(cfg.model, n, cfg.seed, r)));
    std::vector<double> doubled;
    for (double t : grid) doubled.push_back(2.0 * t);
    KernelOptions opts;
    opts.refine_top = 0;
    opts.rows = {cfg.origin};
    const LocalizationKernel K = localization_kernel(s, doubled, opts);
    std::vector<double> out;
    for (Site y : ys) out.push_back(K.at(cfg.origin, y));
    return out;
  }
  const ModelBuild b = draw_model(cfg, n, r);
  const EigenSystem es = eigendecompose(b.hamiltonian);
  std::vector<SiteSet> Ys;
  for (Site y : ys) Ys.push_back({y});
  return grid_sup_pauli_estimator(es, {cfg.origin}, Ys, grid, cfg.estimator).sup;
}

LocalizationReport summarize_localization(const ExperimentConfig& cfg, std::vector<std::vector<double>> raw) {
  LocalizationReport rep;
  rep.engine = cfg.engine;
  rep.n = cfg.model.n;
  rep.distances = cfg.distances;
  rep.raw = std::move(raw);
  const Index R = static_cast<Index>(rep.raw.size());
  const std::size_t D = rep.distances.size();
  std::vector<std::vector<double>> columns(D);
  for (const auto& row : rep.raw)
    for (std::size_t d = 0; d < D; ++d) columns[d].push_back(row[d]);

  std::vector<std::size_t> fit_idx;
  for (std::size_t d = 0; d < D; ++d) {
    DistanceSummary s;
    s.distance = rep.distances[d];
    s.R = static_cast<int>(R);
    const auto b = bootstrap_mean(columns[d], cfg.bootstrap_resamples,
                                  stream_seed(cfg.seed, streams::bootstrap, static_cast<std::uint64_t>(s.distance)));
    s.mean = b.mean;
    s.ci_low = b.ci_low;
    s.ci_high = b.ci_high;
    s.se = b.se;
    // the estimators are O(1); a mean at the roundoff level carries no decay information
    s.dropped = !(s.mean > kRoundoffFloor) || !std::isfinite(s.mean);
    if (s.dropped)
      rep.warnings.push_back("distance " + std::to_string(s.distance) + " has a mean at the roundoff floor; dropped from the fit");
    else
      fit_idx.push_back(d);
    rep.summary.push_back(s);
  }
  rep.eta = rep.eta_se = rep.eta_ci_low = rep.eta_ci_high = std::numeric_limits<double>::quiet_NaN();
  if (fit_idx.size() < 2) {
    rep.warnings.push_back("fewer than two distances left; no fit");
    return rep;
  }

  std::vector<double> x, y, w;
  bool unit = false;
  for (std::size_t d : fit_idx) {
    const auto& s = rep.summary[d];
    x.push_back(s.distance);
    y.push_back(std::log(s.mean));
    const double rel = s.se / s.mean;
    if (!(rel > 0.0)) unit = true;
    w.push_back(rel > 0.0 ? 1.0 / (rel * rel) : 1.0);
  }
  if (unit) std::fill(w.begin(), w.end(), 1.0);
  const LineFit f = weighted_line_fit(x, y, w);
  rep.eta = -f.slope;
  rep.eta_se = f.slope_se;
  rep.log_prefactor = f.intercept;
  for (std::size_t d : fit_idx) rep.fitted_distances.push_back(rep.distances[d]);

  const auto draws = bootstrap_indices(R, cfg.bootstrap_resamples, stream_seed(cfg.seed, streams::bootstrap, 0));
  std::vector<double> etas;
  for (const auto& idx : draws) {
    std::vector<double> yb;
    for (std::size_t d : fit_idx) {
      double acc = 0.0;
      for (Index i : idx) acc += columns[d][static_cast<std::size_t>(i)];
      const double m = acc / static_cast<double>(idx.size());
      if (!(m > 0.0)) break;
      yb.push_back(std::log(m));
    }
    if (yb.size() != fit_idx.size()) continue;
    etas.push_back(-weighted_line_fit(x, yb, w).slope);
  }
  if (!etas.empty()) {
    rep.eta_ci_low = quantile(etas, 0.025);
    rep.eta_ci_high = quantile(etas, 0.975);
  }
  return rep;
}

LocalizationReport run_localization_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.origin < 0 || cfg.origin > cfg.model.n) throw ConfigError("origin outside the chain");
  targets(cfg, cfg.model.n);
  std::function<std::vector<double>(Index)> f = [&cfg](Index r) {
    return localization_sample(cfg, static_cast<std::uint64_t>(r));
  };
  return summarize_localization(cfg, parallel_map(cfg.realizations, cfg.threads, f));
}

void ScalingParams::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (!(beta >= 0.0)) throw ConfigError("beta must be >= 0");
  if (!(gamma > 0.0)) throw ConfigError("gamma must be > 0");
  if (!(eta > 0.0)) throw ConfigError("eta must be > 0");
  if (!(p_zero > 0.0 && p_zero <= 1.0)) throw ConfigError("p_zero must lie in (0, 1]");
}

double censored_quantile(const std::vector<TransmissionTimeResult>& r, double q) {
  std::vector<double> v;
  for (const auto& x : r) v.push_back(x.censored ? std::numeric_limits<double>::infinity() : x.t_est);
  if (v.empty()) throw DomainError("censored_quantile: empty sample");
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0 || std::isinf(v[hi])) return frac == 0.0 ? v[lo] : std::numeric_limits<double>::infinity();
  return v[lo] + frac * (v[hi] - v[lo]);
}

double schedule_epsilon(const ScheduleConfig& s, double eta, int n) {
  if (s.epsilon) return *s.epsilon;
  return std::exp(-s.alpha * eta * n);
}

TransmissionReport run_transmission_scaling(const ExperimentConfig& cfg, const ScalingParams& sp) {
  cfg.validate();
  sp.validate();
  TransmissionReport rep;
  if (cfg.sizes.empty()) return rep;
  if (cfg.schedule.epsilon) {
    rep.eta_used = cfg.schedule.eta.value_or(std::numeric_limits<double>::quiet_NaN());
  } else if (cfg.schedule.eta) {
    rep.eta_used = *cfg.schedule.eta;
  } else {
    if (cfg.model.kind != "xy") throw ConfigError("schedule.eta is required for non-xy models");
    ExperimentConfig est = cfg;
    est.engine = "onebody";
    est.perturbation.enabled = false;
    est.origin = 0;
    est.model.n = std::max(cfg.model.n, *std::max_element(cfg.sizes.begin(), cfg.sizes.end()));
    est.distances.clear();
    for (int d : cfg.distances)
      if (d <= est.model.n) est.distances.push_back(d);
    const LocalizationReport loc = run_localization_experiment(est);
    if (!(loc.eta > 0.0)) throw NumericalError("could not estimate a positive decay rate for the schedule");
    rep.eta_used = loc.eta;
    rep.eta_estimated = true;
  }
  const std::vector<double> grid = build_time_grid(cfg.time_grid);
  for (int n : cfg.sizes) {
    const double eps = schedule_epsilon(cfg.schedule, rep.eta_used, n);
    std::function<TransmissionTimeResult(Index)> f = [&, n, eps](Index r) {
      const ModelBuild b = draw_model(cfg, n, static_cast<std::uint64_t>(r));
      const EigenSystem es = eigendecompose(b.hamiltonian);
      return transmission_time(es, eps, grid, grid.back(), cfg.schedule.tol);
    };
    auto results = parallel_map(cfg.realizations, cfg.threads, f);
    TransmissionRow row;
    row.n = n;
    row.epsilon = eps;
    row.R = cfg.realizations;
    const auto censored = std::count_if(results.begin(), results.end(), [](const auto& x) { return x.censored; });
    row.censored_fraction = static_cast<double>(censored) / static_cast<double>(results.size());
    row.fully_censored = censored == static_cast<long>(results.size());
    row.median = censored_quantile(results, 0.5);
    row.q25 = censored_quantile(results, 0.25);
    row.q75 = censored_quantile(results, 0.75);
    if (row.fully_censored) rep.warnings.push_back("n = " + std::to_string(n) + " fully censored; excluded from growth fits");
    rep.rows.push_back(row);
    rep.raw.push_back(std::move(results));
  }
  return rep;
}

bool scaling_inequality(double alpha, double beta, double gamma, double eta, double p) {
  const double lhs = eta * (1.0 - 3.0 * alpha) / (1.0 - alpha);
  const double rhs = 2.0 * ((beta + 1.0) * gamma - 1.0) * std::log(1.0 / p);
  return lhs > rhs;
}

ConstraintReport constraint_report(const ScalingParams& sp) {
  sp.validate();
  ConstraintReport c;
  c.in_scope = sp.alpha > 0.0 && sp.alpha < 1.0 / 3.0;
  c.lhs = sp.eta * (1.0 - 3.0 * sp.alpha) / (1.0 - sp.alpha);
  c.rhs = 2.0 * ((sp.beta + 1.0) * sp.gamma - 1.0) * std::log(1.0 / sp.p_zero);
  c.unconstrained = sp.p_zero == 1.0;
  if (c.unconstrained)
    c.gamma_max = std::numeric_limits<double>::infinity();
  else
    c.gamma_max = (1.0 + c.lhs / (2.0 * std::log(1.0 / sp.p_zero))) / (sp.beta + 1.0);
  c.satisfied = c.in_scope && c.lhs > c.rhs;
  return c;
}

double min_spectral_gap(const RealVector& e) {
  if (e.size() < 2) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (Index i = 1; i < e.size(); ++i) best = std::min(best, e(i) - e(i - 1));
  return best;
}

GapStatistics run_gap_statistics(const ExperimentConfig& cfg) {
  cfg.validate();
  GapStatistics g;
  g.interval_length = cfg.model.n + 1;
  std::function<double(Index)> f = [&cfg](Index r) {
    const ModelBuild b = draw_model(cfg, cfg.model.n, static_cast<std::uint64_t>(r));
    const EigenSystem es = eigendecompose(b.hamiltonian);
    if (es.dim() < 2) return std::numeric_limits<double>::infinity();
    return min_spectral_gap(es.energies());
  };
  g.min_gaps = parallel_map(cfg.realizations, cfg.threads, f);
  for (double& v : g.min_gaps)
    if (v < 1e-13) {
      v = 0.0;
      ++g.zero_gap_events;
    }
  const double l0 = std::log(cfg.gaps.delta_min), l1 = std::log(cfg.gaps.delta_max);
  for (int i = 0; i < cfg.gaps.delta_points; ++i) {
    const double d = std::exp(l0 + (l1 - l0) * i / (cfg.gaps.delta_points - 1));
    g.deltas.push_back(d);
    const auto below = std::count_if(g.min_gaps.begin(), g.min_gaps.end(), [d](double v) { return v < d; });
    g.cdf.push_back(static_cast<double>(below) / static_cast<double>(g.min_gaps.size()));
  }
  const auto tail = static_cast<std::size_t>(std::ceil(cfg.gaps.tail_fraction * static_cast<double>(g.deltas.size())));
  std::vector<double> x, y;
  for (std::size_t i = 0; i < tail && i < g.deltas.size(); ++i)
    if (g.cdf[i] > 0.0) {
      x.push_back(g.deltas[i]);
      y.push_back(g.cdf[i]);
    }
  if (x.size() >= 3) g.tail_fit = power_law_fit(x, y);
  return g;
}

}  // namespace mbl
