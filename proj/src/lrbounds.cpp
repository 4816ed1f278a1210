#include "mbl/lrbounds.hpp"
#include "mbl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <ostream>

namespace mbl {

FiniteMetric FiniteMetric::restricted(std::vector<Site> points) {
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  FiniteMetric m;
  const Index k = static_cast<Index>(points.size());
  m.d.resize(k, k);
  for (Index i = 0; i < k; ++i)
    for (Index j = 0; j < k; ++j) m.d(i, j) = std::abs(points[static_cast<std::size_t>(i)] - points[static_cast<std::size_t>(j)]);
  m.points = std::move(points);
  return m;
}

FiniteMetric FiniteMetric::collapsed(std::vector<Site> points) {
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  FiniteMetric m;
  const Index k = static_cast<Index>(points.size());
  m.d.resize(k, k);
  for (Index i = 0; i < k; ++i)
    for (Index j = 0; j < k; ++j) m.d(i, j) = static_cast<double>(std::abs(i - j));
  m.points = std::move(points);
  return m;
}

FiniteMetric FiniteMetric::path(int size) {
  std::vector<Site> pts(static_cast<std::size_t>(size));
  for (int i = 0; i < size; ++i) pts[static_cast<std::size_t>(i)] = i;
  return restricted(std::move(pts));
}

Index FiniteMetric::index_of(Site x) const {
  const auto it = std::lower_bound(points.begin(), points.end(), x);
  if (it == points.end() || *it != x) throw DomainError("FiniteMetric: site not in lattice");
  return it - points.begin();
}

DecayFunction default_decay() {
  return [](double r) { return std::pow(1.0 + r, -4.0); };
}

FConstants f_constants(const DecayFunction& F, const FiniteMetric& lattice) {
  const Index k = static_cast<Index>(lattice.points.size());
  if (k == 0) throw DomainError("f_constants: empty lattice");
  RealMatrix f(k, k);
  for (Index i = 0; i < k; ++i)
    for (Index j = 0; j < k; ++j) {
      f(i, j) = F(lattice.d(i, j));
      if (!(f(i, j) > 0.0) || !std::isfinite(f(i, j))) throw DomainError("f_constants: F must be positive and finite");
    }
  FConstants c;
  c.norm = f.rowwise().sum().maxCoeff();
  const RealMatrix conv = f * f;
  c.conv = conv.cwiseQuotient(f).maxCoeff();
  return c;
}

double FFunction::weighted_value(double r) const { return std::exp(-mu * r) * base(r); }

FFunction make_f_function(DecayFunction base, double mu, FiniteMetric lattice) {
  if (!(mu >= 0.0)) throw DomainError("make_f_function: mu must be nonnegative");
  FFunction F;
  F.base = std::move(base);
  F.mu = mu;
  std::vector<double> ds(lattice.d.data(), lattice.d.data() + lattice.d.size());
  std::sort(ds.begin(), ds.end());
  ds.erase(std::unique(ds.begin(), ds.end()), ds.end());
  for (std::size_t i = 1; i < ds.size(); ++i)
    if (F.base(ds[i]) > F.base(ds[i - 1])) throw DomainError("make_f_function: F must be nonincreasing");
  F.lattice = std::move(lattice);
  F.plain = f_constants(F.base, F.lattice);
  const double m = mu;
  const DecayFunction b = F.base;
  F.weighted = f_constants([b, m](double r) { return std::exp(-m * r) * b(r); }, F.lattice);
  return F;
}

Site ContractedLattice::map(Site x) const {
  if (x < 0 || x > n) throw DomainError("ContractedLattice: site outside [0, n]");
  return cmap[static_cast<std::size_t>(x)];
}

SiteSet ContractedLattice::map(const SiteSet& s) const {
  SiteSet out;
  for (Site x : s) out.push_back(map(x));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

FiniteMetric ContractedLattice::metric() const {
  return metric_mode == MetricMode::restricted ? FiniteMetric::restricted(gamma_I) : FiniteMetric::collapsed(gamma_I);
}

ContractedLattice contract(int n, std::vector<std::pair<Site, Site>> intervals, MetricMode mode) {
  if (n < 0) throw DomainError("contract: n must be nonnegative");
  for (std::size_t j = 0; j < intervals.size(); ++j) {
    const auto [a, b] = intervals[j];
    if (a < 0 || b > n || !(a < b)) throw DomainError("contract: intervals need 0 <= a < b <= n");
    if (j + 1 < intervals.size() && !(b < intervals[j + 1].first))
      throw DomainError("contract: intervals must be disjoint and ordered");
  }
  ContractedLattice cl;
  cl.n = n;
  cl.metric_mode = mode;
  cl.cmap.resize(static_cast<std::size_t>(n) + 1);
  for (Site x = 0; x <= n; ++x) cl.cmap[static_cast<std::size_t>(x)] = x;
  const std::size_t m = intervals.size();
  for (std::size_t j = 0; j <= m; ++j) {
    const Site lo = j == 0 ? 0 : intervals[j - 1].second;
    const Site hi = j == m ? n : intervals[j].first;
    for (Site x = lo; x <= hi; ++x) cl.cmap[static_cast<std::size_t>(x)] = hi;
  }
  for (const auto& [a, b] : intervals)
    for (Site x = a; x < b; ++x) cl.gamma_I.push_back(x);
  cl.gamma_I.push_back(n);
  std::sort(cl.gamma_I.begin(), cl.gamma_I.end());
  cl.gamma_I.erase(std::unique(cl.gamma_I.begin(), cl.gamma_I.end()), cl.gamma_I.end());
  cl.intervals = std::move(intervals);
  return cl;
}

ContractedInteraction contracted_interaction(const Interaction& phi, const ContractedLattice& cl) {
  ContractedInteraction out;
  for (const auto& [support, term] : phi.terms()) {
    for (Site x : support)
      if (x < 0 || x > cl.n) throw DomainError("contracted_interaction: support outside [0, n]");
    const SiteSet image = cl.map(support);
    auto it = out.terms.find(image);
    if (it == out.terms.end())
      out.terms.emplace(image, term);
    else
      it->second = it->second + term;
  }
  return out;
}

SiteSet bond_neighborhood(Site x, int m, const Chain& chain) {
  SiteSet out;
  for (Site y = std::max(chain.first(), x - m); y <= std::min(chain.last(), x + 1 + m); ++y) out.push_back(y);
  return out;
}

namespace {

double spectral(const LocalOperator& a) { return spectral_norm(a.matrix()); }

}  // namespace

InteractionPictureTerms::InteractionPictureTerms(const EigenSystem& es0, SparsePerturbation pert,
                                                 std::vector<double> times, bool record_norms)
    : es0_(&es0), pert_(std::move(pert)), times_(std::move(times)) {
  const Chain& chain = es0.chain();
  if (static_cast<Index>(pert_.delta.size()) != chain.size() - 1 || pert_.psi.size() != pert_.delta.size())
    throw DomainError("InteractionPictureTerms: perturbation does not match the chain");
  for (const auto& psi : pert_.psi) {
    const LocalOperator full = embed(psi, chain);
    evolvers_.emplace_back(es0, full.matrix());
  }
  residual_.assign(times_.size(), 0.0);
  if (!record_norms) return;
  norms_.resize(times_.size());
  for (std::size_t k = 0; k < times_.size(); ++k) {
    const InteractionSnapshot s = snapshot(times_[k]);
    auto& per_bond = norms_[k];
    per_bond.resize(s.psi.size());
    for (std::size_t z = 0; z < s.psi.size(); ++z) {
      Matrix sum = Matrix::Zero(chain.total_dim(), chain.total_dim());
      for (const auto& p : s.psi[z]) {
        per_bond[z].push_back(spectral(p));
        sum += embed(p, chain).matrix();
      }
      sum -= evolvers_[z].at(times_[k]);
      residual_[k] = std::max(residual_[k], cheap_norm_bounds(sum).upper);
    }
  }
}

InteractionSnapshot InteractionPictureTerms::snapshot(double t) const {
  const Chain& chain = es0_->chain();
  InteractionSnapshot s;
  s.t = t;
  s.psi.resize(evolvers_.size());
  for (std::size_t z = 0; z < evolvers_.size(); ++z) {
    const Site x = chain.first() + static_cast<Site>(z);
    const Matrix tau = evolvers_[z].at(t);
    LocalOperator prev;
    for (int m = 0;; ++m) {
      const SiteSet region = bond_neighborhood(x, m, chain);
      const std::vector<int> dims = chain.dims_of(region);
      const bool whole = static_cast<Index>(region.size()) == chain.size();
      LocalOperator proj = whole ? LocalOperator(region, dims, tau)
                                 : LocalOperator(region, dims, reduce_to_subset(tau, TensorSplit(chain, region)));
      if (m == 0)
        s.psi[z].push_back(proj);
      else
        s.psi[z].push_back(LocalOperator(region, dims, proj.matrix() - embed_into(prev, region, dims).matrix()));
      if (whole) break;
      prev = std::move(proj);
    }
  }
  return s;
}

double InteractionPictureTerms::norm(Index bond, int m, std::size_t k) const {
  if (norms_.empty()) throw DomainError("InteractionPictureTerms: norms were not recorded");
  const auto& v = norms_.at(k).at(static_cast<std::size_t>(bond));
  return m < static_cast<int>(v.size()) ? v[static_cast<std::size_t>(m)] : 0.0;
}

int InteractionPictureTerms::max_m(Index bond) const {
  const Chain& chain = es0_->chain();
  const Site x = chain.first() + static_cast<Site>(bond);
  return std::max(x - chain.first(), chain.last() - x - 1);
}

Interaction InteractionPictureTerms::assemble(const InteractionSnapshot& s) const {
  Interaction phi(chain());
  for (std::size_t z = 0; z < s.psi.size(); ++z) {
    if (pert_.delta[z] == 0) continue;
    for (const auto& p : s.psi[z]) phi.add(static_cast<double>(pert_.delta[z]) * p);
  }
  return phi;
}

double pair_interaction_norm(const InteractionPictureTerms& terms, Site x, Site y, std::size_t k) {
  if (!(x < y) || !terms.chain().contains(x) || !terms.chain().contains(y))
    throw DomainError("pair_interaction_norm: need x < y on the chain");
  const Interaction phi = terms.assemble(terms.snapshot_at(k));
  double total = 0.0;
  for (const auto& [support, op] : phi.terms())
    if (std::binary_search(support.begin(), support.end(), x) && std::binary_search(support.begin(), support.end(), y))
      total += spectral(op);
  return total;
}

double pair_interaction_norm_bound(const InteractionPictureTerms& terms, Site x, Site y, std::size_t k) {
  if (!(x < y) || !terms.chain().contains(x) || !terms.chain().contains(y))
    throw DomainError("pair_interaction_norm_bound: need x < y on the chain");
  double total = 0.0;
  for (Index b = 0; b < terms.bonds(); ++b) {
    if (terms.delta()[static_cast<std::size_t>(b)] == 0) continue;
    const Site z = terms.chain().first() + static_cast<Site>(b);
    const int m0 = std::max(std::abs(z - x), std::abs(z - y + 1));
    for (int m = m0; m <= terms.max_m(b); ++m) total += terms.norm(b, m, k);
  }
  return total;
}

double contracted_pair_sup(const ContractedInteraction& phi, const FFunction& F, const ContractedLattice& cl) {
  const FiniteMetric metric = cl.metric();
  const Index k = static_cast<Index>(metric.points.size());
  RealMatrix pair = RealMatrix::Zero(k, k);
  for (const auto& [image, op] : phi.terms) {
    if (image.size() < 2) continue;
    const double v = spectral(op);
    if (v == 0.0) continue;
    std::vector<Index> idx;
    for (Site s : image) idx.push_back(metric.index_of(s));
    for (Index a : idx)
      for (Index b : idx) pair(a, b) += v;
  }
  double best = 0.0;
  for (Index a = 0; a < k; ++a)
    for (Index b = 0; b < k; ++b) {
      if (pair(a, b) == 0.0) continue;
      const double d = metric.d(a, b);
      best = std::max(best, std::exp(F.mu * d) / F(d) * pair(a, b));
    }
  return best;
}

IntegralEstimate trapezoid_with_error(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DomainError("trapezoid_with_error: size mismatch");
  IntegralEstimate out;
  if (x.size() < 2) return out;
  for (std::size_t i = 1; i < x.size(); ++i) out.value += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  if (x.size() < 3) {
    out.error = std::numeric_limits<double>::infinity();
    return out;
  }
  // Coarse rule on every other sample; an odd leftover interval is shared by both rules.
  double coarse = 0.0;
  std::size_t i = 2;
  for (; i < x.size(); i += 2) coarse += 0.5 * (x[i] - x[i - 2]) * (y[i] + y[i - 2]);
  if (i - 2 != x.size() - 1) {
    const std::size_t last = x.size() - 1;
    coarse += 0.5 * (x[last] - x[last - 1]) * (y[last] + y[last - 1]);
  }
  out.error = std::abs(out.value - coarse) / 3.0;
  return out;
}

IntegralTrace integrand_trace(const InteractionPictureTerms& terms, const FFunction& F, const ContractedLattice& cl) {
  const auto& times = terms.times();
  if (times.size() < 3) throw ResolutionError("integrand_I: need at least 3 time samples");
  if (times.front() != 0.0) throw DomainError("integrand_I: time samples must start at 0");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw DomainError("integrand_I: time samples must increase");
  if (cl.n != terms.chain().last() || terms.chain().first() != 0)
    throw DomainError("integrand_I: lattice does not match the chain [0, n]");
  IntegralTrace tr;
  tr.times = times;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const Interaction phi = terms.assemble(terms.snapshot_at(k));
    tr.integrand.push_back(contracted_pair_sup(contracted_interaction(phi, cl), F, cl));
  }
  for (std::size_t k = 0; k < times.size(); ++k) {
    const auto est = trapezoid_with_error(std::span(tr.times).first(k + 1), std::span(tr.integrand).first(k + 1));
    tr.value.push_back(est.value);
    tr.error.push_back(est.error);
  }
  return tr;
}

IntegralEstimate integrand_I(const InteractionPictureTerms& terms, const FFunction& F, const ContractedLattice& cl,
                             double t_end) {
  const auto& times = terms.times();
  const auto it = std::find(times.begin(), times.end(), t_end);
  if (it == times.end()) throw DomainError("integrand_I: t_end is not a sample time");
  const IntegralTrace tr = integrand_trace(terms, F, cl);
  const std::size_t k = static_cast<std::size_t>(it - times.begin());
  return {tr.value[k], tr.error[k]};
}

double lr_bound_value(const FFunction& F, const ContractedLattice& cl, const SiteSet& X, const SiteSet& Y,
                      double I_t) {
  if (X.empty() || Y.empty()) throw DomainError("lr_bound_value: empty support");
  if (I_t < 0.0) throw DomainError("lr_bound_value: I(t) must be nonnegative");
  const SiteSet cx = cl.map(X), cy = cl.map(Y);
  if (!site_intersection(cx, cy).empty()) throw DomainError("lr_bound_value: contracted supports intersect");
  const FiniteMetric metric = cl.metric();
  double d = std::numeric_limits<double>::infinity();
  for (Site a : cx)
    for (Site b : cy) d = std::min(d, metric.distance(a, b));
  const double C = F.weighted.conv;
  const double size = static_cast<double>(std::min(cx.size(), cy.size()));
  return 2.0 * F.plain.norm / C * size * std::expm1(2.0 * C * I_t) * std::exp(-F.mu * d);
}

EvolutionFn interaction_picture_evolution(const EigenSystem& es0, const EigenSystem& es, const SiteSet& X) {
  if (!(es0.chain() == es.chain())) throw DomainError("interaction_picture_evolution: chains differ");
  auto words = std::make_shared<std::vector<HeisenbergEvolver>>();
  for (const PauliWord& w : nonidentity_words(X)) words->emplace_back(es0, embed(to_operator(w), es0.chain()).matrix());
  const EigenSystem* full = &es;
  return [words, full](std::size_t word, double t) {
    const Matrix back = (*words)[word].at(-t);
    return HeisenbergEvolver(*full, back).at(t);
  };
}

std::vector<std::pair<Site, Site>> zero_run_intervals(std::span<const int> delta, Site first, int collar) {
  if (collar < 0) throw DomainError("zero_run_intervals: collar must be nonnegative");
  std::vector<std::pair<Site, Site>> out;
  const auto len = static_cast<Site>(delta.size());
  for (Site i = 0; i < len;) {
    if (delta[static_cast<std::size_t>(i)] != 0) {
      ++i;
      continue;
    }
    Site e = i;
    while (e + 1 < len && delta[static_cast<std::size_t>(e + 1)] == 0) ++e;
    const Site a = first + i + collar, b = first + e + 1 - collar;
    if (a < b) out.emplace_back(a, b);
    i = e + 1;
  }
  return out;
}

std::vector<BoundRow> lr_bound_comparison(const EigenSystem& es0, const EigenSystem& es,
                                          const InteractionPictureTerms& terms, const FFunction& F,
                                          const ContractedLattice& cl, const SiteSet& X, const SiteSet& Y) {
  const IntegralTrace tr = integrand_trace(terms, F, cl);
  const EvolutionFn evolve = interaction_picture_evolution(es0, es, X);
  std::vector<BoundRow> rows;
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    BoundRow r;
    r.t = tr.times[k];
    r.measured = pauli_commutator_estimator(evolve, es.chain(), X, Y, r.t);
    r.bound = lr_bound_value(F, cl, X, Y, tr.value[k]);
    rows.push_back(r);
  }
  return rows;
}

void write_bound_csv(std::ostream& os, const std::vector<BoundRow>& rows) {
  os << "t,measured,bound,margin\n";
  os.precision(17);
  for (const auto& r : rows) os << r.t << ',' << r.measured << ',' << r.bound << ',' << r.margin() << '\n';
}

}  // namespace mbl
