#include "mbl/dynamics.hpp"

#include "mbl/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <ostream>

namespace mbl {

namespace {

Matrix pauli_full(const PauliWord& w, const Chain& chain) {
  const PauliAction p = pauli_action(w, chain);
  const Index dim = chain.total_dim();
  Matrix m = Matrix::Zero(dim, dim);
  for (Index i = 0; i < dim; ++i) m(i ^ p.flip, i) = p.phase(i);
  return m;
}

std::vector<HeisenbergEvolver> word_evolvers(const EigenSystem& es, const std::vector<PauliWord>& words) {
  std::vector<HeisenbergEvolver> out;
  out.reserve(words.size());
  for (const PauliWord& w : words) out.emplace_back(es, pauli_full(w, es.chain()));
  return out;
}

EvolutionFn evolver_fn(const std::vector<HeisenbergEvolver>& evs) {
  return [&evs](std::size_t word, double t) { return evs[word].at(t); };
}

}  // namespace

namespace {

bool dense_enough(const Matrix& m) { return m.rows() <= 32 && m.cols() <= 32; }

/// Gram matrix on the smaller side; its largest eigenvalue is ‖m‖².
Matrix gram(const Matrix& m) { return m.rows() >= m.cols() ? Matrix(m.adjoint() * m) : Matrix(m * m.adjoint()); }

double gram_norm(const Matrix& g) {
  const Eigen::SelfAdjointEigenSolver<Matrix> es(g, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(es.eigenvalues().maxCoeff(), 0.0));
}

double part_norm(const Matrix& m) {
  if (dense_enough(m)) return spectral_norm_dense(m);
  IterativeOptions opts;
  opts.max_restarts = 2;
  const IterativeResult r = largest_singular_value(m, opts);
  return r.converged ? r.value : gram_norm(gram(m));
}

/// Exact decision of ‖m‖ > threshold. Lanczos first; when the top singular values cluster it stalls, and
/// the Gram matrix settles the question (Frobenius and row-sum bounds, then its eigenvalues).
bool part_exceeds(const Matrix& m, double threshold) {
  const NormBounds b = cheap_norm_bounds(m);
  if (b.upper <= threshold) return false;
  if (b.lower > threshold) return true;
  if (dense_enough(m)) return spectral_norm_dense(m) > threshold;
  IterativeOptions opts;
  opts.stop_above = threshold;
  opts.max_restarts = 0;
  const IterativeResult r = largest_singular_value(m, opts);
  if (r.exceeded) return true;
  if (r.converged) return r.value > threshold;
  const Matrix g = gram(m);
  const double t2 = threshold * threshold;
  if (g.norm() <= t2 || g.cwiseAbs().rowwise().sum().maxCoeff() <= t2) return false;
  return gram_norm(g) > threshold;
}

/// Conserved charges leave exact zeros in the core; its norm is the max over the connected blocks.
void split_parts(CommutatorProbe& probe) {
  const auto blocks = nonzero_blocks(probe.core);
  if (blocks.size() < 2) return;
  for (const auto& b : blocks) probe.parts.push_back(gather_block(probe.core, b));
}

}  // namespace

NormBounds CommutatorProbe::bounds() const {
  NormBounds b;
  if (parts.empty()) {
    b = cheap_norm_bounds(core);
  } else {
    for (const Matrix& p : parts) {
      const NormBounds pb = cheap_norm_bounds(p);
      b.lower = std::max(b.lower, pb.lower);
      b.upper = std::max(b.upper, pb.upper);
    }
  }
  b.lower *= scale;
  b.upper *= scale;
  return b;
}

double CommutatorProbe::norm() const {
  if (parts.empty()) return scale * part_norm(core);
  double best = 0.0;
  for (const Matrix& p : parts) best = std::max(best, part_norm(p));
  return scale * best;
}

bool CommutatorProbe::exceeds(double threshold) const {
  const NormBounds b = bounds();
  if (b.upper <= threshold) return false;
  if (b.lower > threshold) return true;
  if (parts.empty()) return part_exceeds(core, threshold / scale);
  for (const Matrix& p : parts)
    if (part_exceeds(p, threshold / scale)) return true;
  return false;
}

CommutatorProbe commutator_probe(const Eigen::Ref<const Matrix>& c, const PauliWord& b, const Chain& chain,
                                 bool c_hermitian) {
  const Index dim = chain.total_dim();
  if (c.rows() != dim || c.cols() != dim) throw DomainError("commutator_probe: dimension mismatch");
  std::vector<std::size_t> active;
  for (std::size_t k = 0; k < b.letters.size(); ++k)
    if (b.letters[k] != 0) active.push_back(k);
  CommutatorProbe probe;
  if (active.empty()) {
    probe.core = Matrix::Zero(1, 1);
    return probe;
  }
  if (active.size() > 1 || !c_hermitian) {
    const PauliAction p = pauli_action(b, chain);
    probe.core = pauli_right(c, p) - pauli_left(p, c);
    split_parts(probe);
    return probe;
  }
  const int letter = b.letters[active[0]];
  const Index bit = Index{1} << (chain.size() - 1 - chain.position(b.support[active[0]]));
  const Index half = dim / 2;
  std::vector<Index> zero;
  zero.reserve(static_cast<std::size_t>(half));
  for (Index i = 0; i < dim; ++i)
    if ((i & bit) == 0) zero.push_back(i);
  Matrix core(half, half);
  for (Index col = 0; col < half; ++col) {
    const Index c0 = zero[static_cast<std::size_t>(col)], c1 = c0 | bit;
    for (Index row = 0; row < half; ++row) {
      const Index r0 = zero[static_cast<std::size_t>(row)], r1 = r0 | bit;
      switch (letter) {
        case 3:
          core(row, col) = c(r0, c1);
          break;
        case 1:
          core(row, col) = 0.5 * (c(r0, c0) - c(r0, c1) + c(r1, c0) - c(r1, c1));
          break;
        default:
          core(row, col) = 0.5 * (c(r0, c0) - kI * c(r0, c1) - kI * c(r1, c0) - c(r1, c1));
          break;
      }
    }
  }
  probe.core = std::move(core);
  probe.scale = 2.0;
  split_parts(probe);
  return probe;
}

double pauli_commutator_norm(const Eigen::Ref<const Matrix>& c, const PauliWord& b, const Chain& chain,
                             bool c_hermitian) {
  return commutator_probe(c, b, chain, c_hermitian).norm();
}

std::vector<PauliWord> nonidentity_words(const SiteSet& s) {
  std::vector<PauliWord> w = pauli_word_codes(s);
  w.erase(w.begin());
  return w;
}

void check_estimator_geometry(const Chain& chain, const SiteSet& X, const SiteSet& Y) {
  if (X.empty() || Y.empty()) throw DomainError("estimator: X and Y must be nonempty");
  if (!chain.contains(X) || !chain.contains(Y)) throw DomainError("estimator: X or Y outside the chain");
  if (!chain.all_qubits()) throw UnsupportedDimensionError("estimator: qubit chains only");
  for (Site y : Y)
    if (y >= X.front() && y <= X.back())
      throw DomainError("estimator: Y must lie outside [min X, max X]");
}

double pauli_commutator_estimator(const EvolutionFn& evolve, const Chain& chain, const SiteSet& X,
                                  const SiteSet& Y, double t) {
  check_estimator_geometry(chain, X, Y);
  const auto wx = nonidentity_words(X);
  const auto wy = nonidentity_words(Y);
  double best = 0.0;
  for (std::size_t a = 0; a < wx.size(); ++a) {
    const Matrix c = evolve(a, t);
    for (const PauliWord& b : wy) best = std::max(best, pauli_commutator_norm(c, b, chain, true));
  }
  return best;
}

double pauli_commutator_estimator(const EigenSystem& es, const SiteSet& X, const SiteSet& Y, double t) {
  check_estimator_geometry(es.chain(), X, Y);
  const auto evs = word_evolvers(es, nonidentity_words(X));
  return pauli_commutator_estimator(evolver_fn(evs), es.chain(), X, Y, t);
}

double quasi_locality_estimator(const EigenSystem& es, const LocalOperator& a, int r, double t) {
  if (r < 0) throw DomainError("quasi_locality_estimator: negative radius");
  const Chain& chain = es.chain();
  const SiteSet ball = neighborhood(a.support(), r, chain);
  if (static_cast<Index>(ball.size()) == chain.size()) return 0.0;
  const Matrix c = heisenberg_evolve(es, a, t).matrix();
  const TensorSplit split(chain, ball);
  const Matrix diff = c - expand_from_subset(reduce_to_subset(c, split), split);
  return spectral_norm(diff);
}

double EstimatorNormalization::chi(Index x_size) const { return std::pow(chi_base, static_cast<double>(x_size)); }

double EstimatorNormalization::weight(Index x_size, double t) const {
  const double time_factor = beta > 0.0 ? 1.0 + std::pow(std::abs(t), beta) : 1.0;
  return 1.0 / (chi(x_size) * time_factor);
}

CommutatorTrace commutator_trace(const EigenSystem& es, const SiteSet& X, const SiteSet& Y,
                                 std::span<const double> grid, const EstimatorNormalization& norm) {
  check_estimator_geometry(es.chain(), X, Y);
  const auto evs = word_evolvers(es, nonidentity_words(X));
  const EvolutionFn fn = evolver_fn(evs);
  CommutatorTrace tr;
  tr.time_grid.assign(grid.begin(), grid.end());
  tr.X = X;
  tr.Y = Y;
  tr.beta = norm.beta;
  tr.chi_of_X = norm.chi(static_cast<Index>(X.size()));
  for (double t : grid) tr.values.push_back(pauli_commutator_estimator(fn, es.chain(), X, Y, t));
  return tr;
}

double sup_over_time(const CommutatorTrace& trace) {
  if (trace.time_grid.empty() || trace.values.size() != trace.time_grid.size())
    throw DomainError("sup_over_time: empty or inconsistent trace");
  double best = 0.0;
  for (std::size_t i = 0; i < trace.values.size(); ++i) {
    const double t = trace.time_grid[i];
    const double time_factor = trace.beta > 0.0 ? 1.0 + std::pow(std::abs(t), trace.beta) : 1.0;
    best = std::max(best, trace.values[i] / (trace.chi_of_X * time_factor));
  }
  return best;
}

void write_trace_csv(std::ostream& os, const CommutatorTrace& trace) {
  os << "t,estimator,chi,beta\n";
  os.precision(17);
  for (std::size_t i = 0; i < trace.values.size(); ++i)
    os << trace.time_grid[i] << ',' << trace.values[i] << ',' << trace.chi_of_X << ',' << trace.beta << '\n';
}

GridSupResult grid_sup_pauli_estimator(const EvolutionFn& evolve, const Chain& chain, const SiteSet& X,
                                       const std::vector<SiteSet>& Ys, std::span<const double> grid,
                                       const EstimatorNormalization& norm) {
  for (const SiteSet& Y : Ys) check_estimator_geometry(chain, X, Y);
  const auto wx = nonidentity_words(X);
  std::vector<std::vector<PauliWord>> wy;
  for (const SiteSet& Y : Ys) wy.push_back(nonidentity_words(Y));

  struct Candidate {
    double lower, upper;
    Index g;
    std::size_t a, b;
  };
  std::vector<std::vector<Candidate>> cands(Ys.size());
  GridSupResult res;
  res.sup.assign(Ys.size(), 0.0);
  res.argmax.assign(Ys.size(), grid.empty() ? 0.0 : grid.front());

  for (Index g = 0; g < static_cast<Index>(grid.size()); ++g) {
    const double t = grid[static_cast<std::size_t>(g)];
    const double w = norm.weight(static_cast<Index>(X.size()), t);
    for (std::size_t a = 0; a < wx.size(); ++a) {
      const Matrix c = evolve(a, t);
      for (std::size_t j = 0; j < Ys.size(); ++j)
        for (std::size_t b = 0; b < wy[j].size(); ++b) {
          const NormBounds nb = commutator_probe(c, wy[j][b], chain, true).bounds();
          cands[j].push_back({nb.lower * w, nb.upper * w, g, a, b});
        }
    }
  }

  std::deque<std::pair<std::pair<Index, std::size_t>, Matrix>> cache;
  auto evolved = [&](Index g, std::size_t a) -> const Matrix& {
    for (auto& entry : cache)
      if (entry.first == std::make_pair(g, a)) return entry.second;
    cache.emplace_front(std::make_pair(g, a), evolve(a, grid[static_cast<std::size_t>(g)]));
    if (cache.size() > 8) cache.pop_back();
    return cache.front().second;
  };

  for (std::size_t j = 0; j < Ys.size(); ++j) {
    auto& list = cands[j];
    res.candidates += static_cast<Index>(list.size());
    std::stable_sort(list.begin(), list.end(), [](const Candidate& l, const Candidate& r) { return l.upper > r.upper; });
    double best = -1.0;
    for (const Candidate& cd : list) {
      if (cd.upper <= best) break;
      if (cd.upper == 0.0) {
        if (best < 0.0) best = 0.0;
        break;
      }
      const double t = grid[static_cast<std::size_t>(cd.g)];
      const double w = norm.weight(static_cast<Index>(X.size()), t);
      const double v = w * commutator_probe(evolved(cd.g, cd.a), wy[j][cd.b], chain, true).norm();
      ++res.exact_evaluations;
      if (v > best) {
        best = v;
        res.argmax[j] = t;
      }
    }
    res.sup[j] = std::max(best, 0.0);
  }
  return res;
}

GridSupResult grid_sup_pauli_estimator(const EigenSystem& es, const SiteSet& X, const std::vector<SiteSet>& Ys,
                                       std::span<const double> grid, const EstimatorNormalization& norm) {
  const auto evs = word_evolvers(es, nonidentity_words(X));
  return grid_sup_pauli_estimator(evolver_fn(evs), es.chain(), X, Ys, grid, norm);
}

TransmissionTimeResult transmission_time(const EigenSystem& es, double epsilon, std::span<const double> grid,
                                         double T_max, double tol) {
  if (!(epsilon > 0.0)) throw DomainError("transmission_time: epsilon must be positive");
  if (grid.empty() || grid.front() != 0.0) throw DomainError("transmission_time: grid must start at 0");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw DomainError("transmission_time: grid must be strictly ascending");
  if (!(tol > 0.0)) throw DomainError("transmission_time: tolerance must be positive");
  const Chain& chain = es.chain();
  const SiteSet X{chain.first()}, Y{chain.last()};
  check_estimator_geometry(chain, X, Y);

  TransmissionTimeResult res;
  res.epsilon = epsilon;
  res.horizon = T_max;
  const auto wx = nonidentity_words(X);
  const auto wy = nonidentity_words(Y);
  const auto evs = word_evolvers(es, wx);
  auto exceeds = [&](double t) {
    ++res.evaluations;
    for (const auto& ev : evs) {
      const Matrix c = ev.at(t);
      for (const PauliWord& b : wy)
        if (commutator_probe(c, b, chain, true).exceeds(epsilon)) return true;
    }
    return false;
  };
  if (epsilon > 2.0) return res;  // ‖[A, B]‖ ≤ 2 for unit-norm A, B

  for (std::size_t g = 1; g < grid.size(); ++g) {
    if (grid[g] > T_max) break;
    if (!exceeds(grid[g])) continue;
    double lo = grid[g - 1], hi = grid[g];
    while (hi - lo > tol) {
      const double mid = 0.5 * (lo + hi);
      if (exceeds(mid))
        hi = mid;
      else
        lo = mid;
    }
    res.censored = false;
    res.t_low = lo;
    res.t_high = hi;
    res.t_est = 0.5 * (lo + hi);
    return res;
  }
  return res;
}

void write_transmission_json(std::ostream& os, const std::vector<TransmissionTimeResult>& results) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : results) {
    nlohmann::json j;
    j["epsilon"] = r.epsilon;
    j["censored"] = r.censored;
    j["t_est"] = r.censored ? nlohmann::json(nullptr) : nlohmann::json(r.t_est);
    j["bracket"] = r.censored ? nlohmann::json(nullptr) : nlohmann::json::array({r.t_low, r.t_high});
    j["horizon"] = r.horizon;
    arr.push_back(j);
  }
  os << arr.dump(2) << '\n';
}

std::vector<double> linear_grid(double t0, double t1, Index points) {
  if (points < 1) throw DomainError("linear_grid: need at least one point");
  std::vector<double> g(static_cast<std::size_t>(points));
  for (Index i = 0; i < points; ++i)
    g[static_cast<std::size_t>(i)] = points == 1 ? t0 : t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(points - 1);
  return g;
}

std::vector<double> default_time_grid(Index points, double t_max) {
  if (points < 4) throw DomainError("default_time_grid: need at least 4 points");
  if (!(t_max > 1.0)) return linear_grid(0.0, t_max, points);
  const Index lin = std::max<Index>(2, points / 10);
  std::vector<double> g = linear_grid(0.0, 1.0, lin);
  const Index rest = points - lin;
  const double step = std::log(t_max) / static_cast<double>(rest);
  for (Index i = 1; i <= rest; ++i) g.push_back(std::exp(step * static_cast<double>(i)));
  g.back() = t_max;
  return g;
}

}  // namespace mbl
