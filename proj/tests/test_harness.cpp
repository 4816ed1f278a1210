#include "mbl/errors.hpp"
#include "mbl/io.hpp"
#include "mbl/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace mbl;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string scratch_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("mbl_test_" + name);
  std::filesystem::remove_all(p);
  return p.string();
}

ExperimentConfig small_manybody() {
  ExperimentConfig c;
  c.model.n = 5;
  c.model.lambda = 4.0;
  c.realizations = 6;
  c.distances = {1, 2, 3};
  c.time_grid = {"linear", 20, 5.0};
  c.bootstrap_resamples = 200;
  return c;
}

}  // namespace

TEST_CASE("statistics") {
  CHECK(quantile({3, 1, 2, 4}, 0.5) == 2.5);
  CHECK(quantile({3, 1, 2, 4}, 0.0) == 1.0);
  CHECK(quantile({3, 1, 2, 4}, 1.0) == 4.0);
  CHECK(median({5}) == 5.0);
  CHECK_THROWS_AS(quantile({}, 0.5), DomainError);
  CHECK_THROWS_AS(quantile({1}, 1.5), DomainError);

  const std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
  const LineFit f = line_fit(x, y);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.slope_se == doctest::Approx(0.0).epsilon(1e-12));
  const LineFit w = weighted_line_fit(x, y, std::vector<double>{1, 2, 3, 4});
  CHECK(w.slope == doctest::Approx(2.0));

  const std::vector<double> px{1, 2, 4, 8}, py{3, 12, 48, 192};
  const PowerLawFit p = power_law_fit(px, py);
  CHECK(p.exponent == doctest::Approx(2.0));
  CHECK(p.prefactor == doctest::Approx(3.0));

  const std::vector<double> flat(20, 0.7);
  const BootstrapSummary b = bootstrap_mean(flat, 100, 1);
  CHECK(b.ci_low == doctest::Approx(0.7));
  CHECK(b.ci_high == doctest::Approx(0.7));
  std::vector<double> noisy;
  RandomStream rng(2);
  for (int i = 0; i < 50; ++i) noisy.push_back(rng.normal());
  const BootstrapSummary b1 = bootstrap_mean(noisy, 500, 3), b2 = bootstrap_mean(noisy, 500, 3);
  CHECK(b1.ci_low == b2.ci_low);
  CHECK(b1.ci_low <= b1.mean);
  CHECK(b1.mean <= b1.ci_high);
  // standard error of the mean of 50 unit normals is about 0.14
  CHECK(b1.se == doctest::Approx(1.0 / std::sqrt(50.0)).epsilon(0.3));
}

TEST_CASE("config parsing") {
  const ExperimentConfig c = parse_config(R"({"model": {"kind": "ising", "n": 4, "h": {"kind": "uniform", "a": -2, "b": 2}},
                                             "realizations": 3, "seed": 7, "engine": "manybody"})");
  CHECK(c.model.kind == "ising");
  CHECK(c.model.n == 4);
  CHECK(c.model.h.a == -2.0);
  CHECK(c.seed == 7);
  CHECK_THROWS_AS(parse_config(R"({"modle": {}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"model": {"lamda": 2}})"), ConfigError);
  CHECK_THROWS_AS(parse_config("{"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"realizations": "many"})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"engine": "gpu"})"), ConfigError);

  SUBCASE("hash ignores threads and output") {
    ExperimentConfig a, b;
    b.threads = 4;
    b.output = "elsewhere";
    CHECK(config_hash(a) == config_hash(b));
    b.seed = 43;
    CHECK(config_hash(a) != config_hash(b));
    CHECK(hex64(0xabcULL) == "0000000000000abc");
    CHECK(parse_config(canonical_json(a)).seed == a.seed);
    CHECK(canonical_json(parse_config(canonical_json(a))) == canonical_json(a));
  }
  SUBCASE("time grids") {
    const auto lin = build_time_grid({"linear", 5, 2.0});
    CHECK(lin == std::vector<double>{0.0, 0.5, 1.0, 1.5, 2.0});
    const auto lg = build_time_grid({"log", 10, 100.0});
    CHECK(lg.front() == 0.0);
    CHECK(lg.back() == doctest::Approx(100.0));
    for (std::size_t i = 1; i < lg.size(); ++i) CHECK(lg[i] > lg[i - 1]);
  }
}

TEST_CASE("draws are reproducible and stream-separated") {
  ModelConfig m;
  const XYParams a = draw_xy(m, 6, 42, 3), b = draw_xy(m, 6, 42, 3), c = draw_xy(m, 6, 42, 4);
  CHECK(a.omega == b.omega);
  CHECK(a.omega != c.omega);
  CHECK(a.omega.size() == 7);
  CHECK(a.mu == std::vector<double>(6, 1.0));
  const IsingParams i = draw_ising(m, 3, 42, 0);
  CHECK(i.J.size() == 3);
  CHECK(i.h.size() == 4);
  CHECK(i.J != i.h);
  PerturbationConfig p;
  p.enabled = true;
  p.kind = "random_block";
  p.strength = 0.5;
  const SparsePerturbation s = draw_perturbation(p, Chain::qubits(0, 6), 42, 0);
  CHECK(s.delta.size() == 6);
  CHECK(s.psi_bound == doctest::Approx(0.5));
  CHECK_THROWS_AS(draw_perturbation(p, Chain::qubits(0, 0), 42, 0), ConfigError);
}

TEST_CASE("localization experiment") {
  SUBCASE("distance past the chain end") {
    ExperimentConfig c = small_manybody();
    c.distances = {1, 6};
    CHECK_THROWS_AS(run_localization_experiment(c), ConfigError);
  }
  SUBCASE("a zero column is dropped from the fit") {
    ExperimentConfig c = small_manybody();
    c.realizations = 1;
    const LocalizationReport r = summarize_localization(c, {{0.5, 0.1, 0.0}});
    CHECK(r.summary[2].dropped);
    CHECK_FALSE(r.summary[0].dropped);
    CHECK(r.eta == doctest::Approx(std::log(5.0)));
    CHECK(r.fitted_distances == std::vector<int>{1, 2});
    CHECK_FALSE(r.warnings.empty());
  }
  SUBCASE("decoupled chain cannot be fitted") {
    ExperimentConfig c = small_manybody();
    c.model.mu = DisorderSpec::constant(0.0);
    const LocalizationReport r = run_localization_experiment(c);
    CHECK(std::isnan(r.eta));
    for (const auto& s : r.summary) {
      CHECK(s.dropped);
      CHECK(s.mean <= 1e-12);
    }
  }
  SUBCASE("thread count does not change the output") {
    ExperimentConfig c = small_manybody();
    const LocalizationReport one = run_localization_experiment(c);
    c.threads = 3;
    const LocalizationReport three = run_localization_experiment(c);
    std::ostringstream a, b;
    write_localization_csv(a, one);
    write_localization_csv(b, three);
    CHECK(a.str() == b.str());
    CHECK(one.raw == three.raw);
    CHECK(one.eta > 0.0);
    std::string why;
    CHECK(validate_localization_csv(a.str(), &why));
  }
  SUBCASE("onebody engine needs the xy model") {
    ExperimentConfig c = small_manybody();
    c.engine = "onebody";
    c.model.kind = "ising";
    CHECK_THROWS_AS(run_localization_experiment(c), ConfigError);
  }
}

TEST_CASE("transmission scaling") {
  ExperimentConfig c = small_manybody();
  c.sizes = {3, 4};
  c.distances = {1, 2};
  c.schedule.epsilon = 0.5;
  c.time_grid = {"linear", 40, 20.0};
  ScalingParams sp;
  const TransmissionReport r = run_transmission_scaling(c, sp);
  REQUIRE(r.rows.size() == 2);
  CHECK(r.rows[0].epsilon == 0.5);
  CHECK(r.raw[0].size() == 6);
  CHECK(r.rows[0].q25 <= r.rows[0].median);
  CHECK(r.rows[0].median <= r.rows[0].q75);

  std::vector<TransmissionTimeResult> v(4);
  v[0].t_est = 1.0;
  v[1].t_est = 2.0;
  v[0].censored = v[1].censored = false;
  CHECK(censored_quantile(v, 0.0) == 1.0);
  CHECK(std::isinf(censored_quantile(v, 0.5)));
  CHECK(censored_quantile(v, 1.0 / 3.0) == doctest::Approx(2.0));

  ScheduleConfig s;
  s.alpha = 0.2;
  CHECK(schedule_epsilon(s, 0.5, 10) == doctest::Approx(std::exp(-1.0)));
  s.epsilon = 0.3;
  CHECK(schedule_epsilon(s, 0.5, 10) == 0.3);
}

TEST_CASE("constraint report") {
  ScalingParams sp;
  sp.alpha = 0.1;
  sp.beta = 0.0;
  sp.eta = 1.0;
  sp.p_zero = 0.9;
  const ConstraintReport c = constraint_report(sp);
  CHECK(c.in_scope);
  CHECK(c.gamma_max == doctest::Approx(1.0 + (0.7 / 0.9) / (2.0 * std::log(1.0 / 0.9))));
  SUBCASE("closed form splits the grid") {
    for (int i = 1; i <= 100; ++i) {
      sp.gamma = c.gamma_max * i / 50.0;
      const bool ok = scaling_inequality(sp.alpha, sp.beta, sp.gamma, sp.eta, sp.p_zero);
      if (std::abs(sp.gamma - c.gamma_max) > 1e-12 * c.gamma_max) CHECK(ok == (sp.gamma < c.gamma_max));
      CHECK(constraint_report(sp).satisfied == ok);
    }
  }
  SUBCASE("no perturbation is unconstrained") {
    sp.p_zero = 1.0;
    const ConstraintReport u = constraint_report(sp);
    CHECK(u.unconstrained);
    CHECK(std::isinf(u.gamma_max));
  }
  SUBCASE("alpha at or beyond one third is out of scope") {
    sp.alpha = 0.5;
    CHECK_FALSE(constraint_report(sp).in_scope);
    CHECK_FALSE(constraint_report(sp).satisfied);
    sp.alpha = 1.0;
    CHECK_THROWS_AS(constraint_report(sp), ConfigError);
  }
  SUBCASE("csv") {
    std::ostringstream os;
    write_constraint_csv(os, sp, c);
    CHECK(os.str().find("gamma_max") != std::string::npos);
  }
}

TEST_CASE("gap statistics") {
  CHECK(min_spectral_gap(RealVector::Constant(1, 3.0)) == 0.0);
  RealVector e(4);
  e << -1.0, 0.2, 0.25, 2.0;
  CHECK(min_spectral_gap(e) == doctest::Approx(0.05));

  SUBCASE("single site gap is twice the field") {
    ExperimentConfig c;
    c.model.n = 0;
    c.model.lambda = 3.0;
    c.realizations = 20;
    const GapStatistics g = run_gap_statistics(c);
    for (int r = 0; r < 20; ++r) {
      const double omega = draw_xy(c.model, 0, c.seed, static_cast<std::uint64_t>(r)).omega[0];
      CHECK(g.min_gaps[static_cast<std::size_t>(r)] == doctest::Approx(2 * 3.0 * std::abs(omega)).epsilon(1e-12));
    }
    for (std::size_t i = 1; i < g.cdf.size(); ++i) CHECK(g.cdf[i] >= g.cdf[i - 1]);
    CHECK(g.cdf.back() <= 1.0);
  }
  SUBCASE("vanishing hamiltonian counts zero-gap events") {
    ExperimentConfig c;
    c.model.n = 2;
    c.model.lambda = 0.0;
    c.model.mu = DisorderSpec::constant(0.0);
    c.realizations = 4;
    const GapStatistics g = run_gap_statistics(c);
    CHECK(g.zero_gap_events == 4);
    CHECK(g.cdf.front() == 1.0);
  }
  SUBCASE("two-site isotropic chain against the closed-form spectrum") {
    // n = 1, mu = 1: energies ±λ(ω0+ω1) and ±sqrt(λ²(ω0−ω1)² + 4)
    ExperimentConfig c;
    c.model.n = 1;
    c.model.lambda = 2.0;
    c.realizations = 200;
    const GapStatistics g = run_gap_statistics(c);
    for (int r = 0; r < 200; ++r) {
      const auto w = draw_xy(c.model, 1, c.seed, static_cast<std::uint64_t>(r)).omega;
      const double s = 2.0 * (w[0] + w[1]), d = std::sqrt(4.0 * (w[0] - w[1]) * (w[0] - w[1]) + 4.0);
      std::vector<double> ev{s, -s, d, -d};
      std::sort(ev.begin(), ev.end());
      double best = 1e300;
      for (std::size_t i = 1; i < 4; ++i) best = std::min(best, ev[i] - ev[i - 1]);
      CHECK(g.min_gaps[static_cast<std::size_t>(r)] == doctest::Approx(best).epsilon(1e-10).scale(1.0));
    }
  }
}

TEST_CASE("result files") {
  SUBCASE("byte-identical across runs and thread counts") {
    ExperimentConfig c = small_manybody();
    c.output = scratch_dir("emit_a");
    const LocalizationReport r = run_localization_experiment(c);
    RunManifest m;
    m.command = "localize";
    const auto files = emit_results(r, c, m);
    CHECK(files.size() == 4);
    ExperimentConfig d = c;
    d.threads = 2;
    d.output = scratch_dir("emit_b");
    emit_results(run_localization_experiment(d), d, m);
    for (const char* name : {"localization.csv", "localization_raw.csv", "localization_fit.csv"})
      CHECK(slurp(c.output + "/" + name) == slurp(d.output + "/" + name));
    const std::string manifest = slurp(c.output + "/manifest.json");
    CHECK(manifest.find(hex64(config_hash(c))) != std::string::npos);
    CHECK(validate_localization_csv(slurp(c.output + "/localization.csv")));
  }
  SUBCASE("empty sweep still writes headers") {
    ExperimentConfig c = small_manybody();
    c.sizes = {};
    c.schedule.epsilon = 0.1;
    c.output = scratch_dir("emit_empty");
    const TransmissionReport r = run_transmission_scaling(c, ScalingParams{});
    emit_results(r, c, RunManifest{});
    CHECK(slurp(c.output + "/transmission.csv") == "n,epsilon,R,censored_fraction,median,q25,q75\n");
  }
  SUBCASE("schema validation") {
    std::string why;
    CHECK(validate_localization_csv("distance,mean,ci_low,ci_high,R\n1,0.5,0.4,0.6,10\n"));
    CHECK_FALSE(validate_localization_csv("distance,mean\n1,0.5\n", &why));
    CHECK_FALSE(why.empty());
    CHECK_FALSE(validate_localization_csv("distance,mean,ci_low,ci_high,R\n1,0.5,0.6,0.7,10\n"));
    CHECK_FALSE(validate_localization_csv("distance,mean,ci_low,ci_high,R\n1,abc,0.4,0.6,10\n"));
  }
  SUBCASE("unwritable directory") {
    ExperimentConfig c = small_manybody();
    c.output = "/proc/mbl_cannot_write_here";
    CHECK_THROWS_AS(emit_results(GapStatistics{}, c, RunManifest{}), IoError);
  }
  SUBCASE("number formatting") {
    CHECK(format_number(0.1) == "0.10000000000000001");
    CHECK(format_number(2.0) == "2");
    CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
  }
}
