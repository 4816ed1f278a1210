#include "mbl/config.hpp"
#include "mbl/errors.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace mbl {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : j.items())
    if (!ok.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

DisorderSpec read_disorder(const json& j, DisorderSpec base, const std::string& where) {
  if (j.is_number()) return DisorderSpec::constant(j.get<double>());
  reject_unknown(j, {"kind", "c", "a", "b", "p_zero"}, where);
  std::string kind = "constant";
  read(j, "kind", kind, where);
  DisorderSpec s = base;
  if (kind == "constant")
    s.kind = DisorderSpec::Kind::constant;
  else if (kind == "uniform")
    s.kind = DisorderSpec::Kind::uniform;
  else if (kind == "bernoulli")
    s.kind = DisorderSpec::Kind::bernoulli;
  else
    throw ConfigError(where + ": unknown disorder kind '" + kind + "'");
  read(j, "c", s.c, where);
  read(j, "a", s.a, where);
  read(j, "b", s.b, where);
  read(j, "p_zero", s.p_zero, where);
  s.validate();
  return s;
}

json dump_disorder(const DisorderSpec& s) {
  switch (s.kind) {
    case DisorderSpec::Kind::constant:
      return {{"kind", "constant"}, {"c", s.c}};
    case DisorderSpec::Kind::uniform:
      return {{"kind", "uniform"}, {"a", s.a}, {"b", s.b}};
    case DisorderSpec::Kind::bernoulli:
      break;
  }
  return {{"kind", "bernoulli"}, {"p_zero", s.p_zero}};
}

}  // namespace

void ExperimentConfig::validate() const {
  if (model.kind != "xy" && model.kind != "ising") throw ConfigError("model.kind must be xy or ising");
  if (model.n < 0) throw ConfigError("model.n must be >= 0");
  if (realizations < 1) throw ConfigError("realizations must be >= 1");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  if (bootstrap_resamples < 1) throw ConfigError("bootstrap_resamples must be >= 1");
  if (time_grid.points < 2 || !(time_grid.t_max > 0.0)) throw ConfigError("time_grid needs points >= 2 and t_max > 0");
  if (time_grid.kind != "log" && time_grid.kind != "linear") throw ConfigError("time_grid.kind must be log or linear");
  if (time_grid.kind == "log" && !(time_grid.t_max > 1.0)) throw ConfigError("log time grid needs t_max > 1");
  if (engine != "manybody" && engine != "onebody") throw ConfigError("engine must be manybody or onebody");
  for (int d : distances)
    if (d < 1) throw ConfigError("distances must be >= 1");
  for (int s : sizes)
    if (s < 1) throw ConfigError("sizes must be >= 1");
  if (!(schedule.alpha > 0.0)) throw ConfigError("schedule.alpha must be positive");
  if (schedule.eta && !(*schedule.eta > 0.0)) throw ConfigError("schedule.eta must be positive");
  if (schedule.epsilon && !(*schedule.epsilon > 0.0)) throw ConfigError("schedule.epsilon must be positive");
  if (!(schedule.tol > 0.0)) throw ConfigError("schedule.tol must be positive");
  if (!(perturbation.p_zero >= 0.0 && perturbation.p_zero <= 1.0)) throw ConfigError("perturbation.p_zero must lie in [0, 1]");
  if (perturbation.kind != "zz" && perturbation.kind != "random_block")
    throw ConfigError("perturbation.kind must be zz or random_block");
  if (!(estimator.chi_base > 0.0) || !(estimator.beta >= 0.0)) throw ConfigError("estimator needs chi_base > 0, beta >= 0");
  if (!(gaps.delta_min > 0.0 && gaps.delta_max > gaps.delta_min) || gaps.delta_points < 2)
    throw ConfigError("gaps: need 0 < delta_min < delta_max and delta_points >= 2");
  if (!(gaps.tail_fraction > 0.0 && gaps.tail_fraction <= 1.0)) throw ConfigError("gaps.tail_fraction must lie in (0, 1]");
  for (const DisorderSpec* s : {&model.mu, &model.gamma, &model.omega, &model.J, &model.Gamma, &model.h}) s->validate();
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown(j,
                 {"model", "perturbation", "realizations", "seed", "time_grid", "distances", "sizes", "engine",
                  "origin", "estimator", "schedule", "gaps", "bootstrap_resamples", "threads", "output"},
                 "config");
  ExperimentConfig c;
  if (j.contains("model")) {
    const json& m = j["model"];
    reject_unknown(m, {"kind", "n", "mu", "gamma", "omega", "lambda", "J", "Gamma", "h", "gamma_scale"}, "model");
    read(m, "kind", c.model.kind, "model");
    read(m, "n", c.model.n, "model");
    read(m, "lambda", c.model.lambda, "model");
    read(m, "gamma_scale", c.model.gamma_scale, "model");
    if (m.contains("mu")) c.model.mu = read_disorder(m["mu"], c.model.mu, "model.mu");
    if (m.contains("gamma")) c.model.gamma = read_disorder(m["gamma"], c.model.gamma, "model.gamma");
    if (m.contains("omega")) c.model.omega = read_disorder(m["omega"], c.model.omega, "model.omega");
    if (m.contains("J")) c.model.J = read_disorder(m["J"], c.model.J, "model.J");
    if (m.contains("Gamma")) c.model.Gamma = read_disorder(m["Gamma"], c.model.Gamma, "model.Gamma");
    if (m.contains("h")) c.model.h = read_disorder(m["h"], c.model.h, "model.h");
  }
  if (j.contains("perturbation")) {
    const json& p = j["perturbation"];
    reject_unknown(p, {"enabled", "kind", "p_zero", "strength"}, "perturbation");
    c.perturbation.enabled = true;
    read(p, "enabled", c.perturbation.enabled, "perturbation");
    read(p, "kind", c.perturbation.kind, "perturbation");
    read(p, "p_zero", c.perturbation.p_zero, "perturbation");
    read(p, "strength", c.perturbation.strength, "perturbation");
  }
  read(j, "realizations", c.realizations, "config");
  read(j, "seed", c.seed, "config");
  if (j.contains("time_grid")) {
    const json& g = j["time_grid"];
    reject_unknown(g, {"kind", "points", "t_max"}, "time_grid");
    read(g, "kind", c.time_grid.kind, "time_grid");
    read(g, "points", c.time_grid.points, "time_grid");
    read(g, "t_max", c.time_grid.t_max, "time_grid");
  }
  read(j, "distances", c.distances, "config");
  read(j, "sizes", c.sizes, "config");
  read(j, "engine", c.engine, "config");
  read(j, "origin", c.origin, "config");
  if (j.contains("estimator")) {
    const json& e = j["estimator"];
    reject_unknown(e, {"chi_base", "beta"}, "estimator");
    read(e, "chi_base", c.estimator.chi_base, "estimator");
    read(e, "beta", c.estimator.beta, "estimator");
  }
  if (j.contains("schedule")) {
    const json& s = j["schedule"];
    reject_unknown(s, {"alpha", "eta", "epsilon", "tol"}, "schedule");
    read(s, "alpha", c.schedule.alpha, "schedule");
    read(s, "tol", c.schedule.tol, "schedule");
    if (s.contains("eta") && !s["eta"].is_null()) c.schedule.eta = s["eta"].get<double>();
    if (s.contains("epsilon") && !s["epsilon"].is_null()) c.schedule.epsilon = s["epsilon"].get<double>();
  }
  if (j.contains("gaps")) {
    const json& g = j["gaps"];
    reject_unknown(g, {"delta_points", "delta_min", "delta_max", "tail_fraction"}, "gaps");
    read(g, "delta_points", c.gaps.delta_points, "gaps");
    read(g, "delta_min", c.gaps.delta_min, "gaps");
    read(g, "delta_max", c.gaps.delta_max, "gaps");
    read(g, "tail_fraction", c.gaps.tail_fraction, "gaps");
  }
  read(j, "bootstrap_resamples", c.bootstrap_resamples, "config");
  read(j, "threads", c.threads, "config");
  read(j, "output", c.output, "config");
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string canonical_json(const ExperimentConfig& c) {
  json j;
  j["model"] = {{"kind", c.model.kind},
                {"n", c.model.n},
                {"mu", dump_disorder(c.model.mu)},
                {"gamma", dump_disorder(c.model.gamma)},
                {"omega", dump_disorder(c.model.omega)},
                {"lambda", c.model.lambda},
                {"J", dump_disorder(c.model.J)},
                {"Gamma", dump_disorder(c.model.Gamma)},
                {"h", dump_disorder(c.model.h)},
                {"gamma_scale", c.model.gamma_scale}};
  j["perturbation"] = {{"enabled", c.perturbation.enabled},
                       {"kind", c.perturbation.kind},
                       {"p_zero", c.perturbation.p_zero},
                       {"strength", c.perturbation.strength}};
  j["realizations"] = c.realizations;
  j["seed"] = c.seed;
  j["time_grid"] = {{"kind", c.time_grid.kind}, {"points", c.time_grid.points}, {"t_max", c.time_grid.t_max}};
  j["distances"] = c.distances;
  j["sizes"] = c.sizes;
  j["engine"] = c.engine;
  j["origin"] = c.origin;
  j["estimator"] = {{"chi_base", c.estimator.chi_base}, {"beta", c.estimator.beta}};
  j["schedule"] = {{"alpha", c.schedule.alpha},
                   {"eta", c.schedule.eta ? json(*c.schedule.eta) : json(nullptr)},
                   {"epsilon", c.schedule.epsilon ? json(*c.schedule.epsilon) : json(nullptr)},
                   {"tol", c.schedule.tol}};
  j["gaps"] = {{"delta_points", c.gaps.delta_points},
               {"delta_min", c.gaps.delta_min},
               {"delta_max", c.gaps.delta_max},
               {"tail_fraction", c.gaps.tail_fraction}};
  j["bootstrap_resamples"] = c.bootstrap_resamples;
  return j.dump();
}

std::uint64_t config_hash(const ExperimentConfig& c) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical_json(c)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::vector<double> build_time_grid(const TimeGridConfig& g) {
  if (g.kind == "linear") return linear_grid(0.0, g.t_max, g.points);
  return default_time_grid(g.points, g.t_max);
}

}  // namespace mbl
