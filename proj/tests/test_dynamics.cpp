#include "mbl/dynamics.hpp"
#include "mbl/errors.hpp"
#include "mbl/linalg.hpp"
#include "mbl/models.hpp"
#include "fixtures.hpp"
#include "support.hpp"

#include <doctest.h>

#include <sstream>

using namespace mbl;
using namespace mbl::test;

namespace {

LocalOperator random_xy_hamiltonian(RandomStream& rng, int n, double lambda) {
  XYParams p;
  p.n = n;
  p.lambda = lambda;
  p.mu.assign(static_cast<std::size_t>(n), 1.0);
  p.gamma.assign(static_cast<std::size_t>(n), 0.0);
  for (int j = 0; j <= n; ++j) p.omega.push_back(rng.uniform(-1, 1));
  return build_xy_hamiltonian(p).hamiltonian;
}

LocalOperator xx_pair() {
  return LocalOperator::qubits({0, 1}, product({single(1), single(1)}) + product({single(2), single(2)}), true);
}

}  // namespace

TEST_CASE("eigendecompose") {
  SUBCASE("sigma z") {
    const EigenSystem es = eigendecompose(LocalOperator::qubits({0}, single(3), true));
    CHECK(es.energies()(0) == doctest::Approx(-1.0));
    CHECK(es.energies()(1) == doctest::Approx(1.0));
    CHECK((es.basis().cwiseAbs() - RealMatrix{{0, 1}, {1, 0}}.cast<Complex>()).norm() <= 1e-15);
  }
  SUBCASE("zero") {
    const EigenSystem es = eigendecompose(LocalOperator::qubits({0, 1}, Matrix::Zero(4, 4), true));
    CHECK(es.energies().cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("random 16x16 reconstruction") {
    RandomStream rng(1);
    const Matrix h = random_hermitian(rng, 16);
    const EigenSystem es = eigendecompose(LocalOperator::qubits({0, 1, 2, 3}, h));
    const Matrix u = es.basis();
    CHECK((u * es.energies().cast<Complex>().asDiagonal() * u.adjoint() - h).norm() <= 1e-10 * spectral(h));
    CHECK(unitarity_defect(u) <= 1e-10);
    CHECK(es.spectral_radius() == doctest::Approx(spectral(h)).epsilon(1e-12));
  }
  SUBCASE("block splitting keeps the spectrum") {
    RandomStream rng(2);
    const LocalOperator h = random_xy_hamiltonian(rng, 5, 2.0);
    const EigenSystem split = eigendecompose(h);
    const EigenSystem whole = eigendecompose(h, {Index{1} << 13, false});
    CHECK(split.blocks().size() == 7);  // magnetization sectors
    CHECK((split.energies() - whole.energies()).norm() <= 1e-12);
  }
  SUBCASE("errors") {
    RandomStream rng(3);
    CHECK_THROWS_AS(eigendecompose(LocalOperator::qubits({0}, random_matrix(rng, 2, 2))), DomainError);
    CHECK_THROWS_AS(eigendecompose(LocalOperator::qubits({0, 1, 2}, Matrix::Identity(8, 8)), {4, true}), ResourceError);
  }
}

TEST_CASE("heisenberg evolution") {
  RandomStream rng(4);
  const LocalOperator h = random_xy_hamiltonian(rng, 3, 1.5);
  const EigenSystem es = eigendecompose(h);
  const Chain& c = es.chain();
  SUBCASE("t = 0 and A = H") {
    const LocalOperator a = random_qubit_operator(rng, {1});
    CHECK((heisenberg_evolve(es, a, 0.0).matrix() - embed(a, c).matrix()).norm() <= 1e-12);
    CHECK((heisenberg_evolve(es, h, 2.3).matrix() - h.matrix()).norm() <= 1e-12 * h.matrix().norm());
  }
  SUBCASE("single spin closed form") {
    const EigenSystem s = eigendecompose(LocalOperator::qubits({0}, single(3), true));
    const double t = 0.3;
    // e^{itσz} σx e^{-itσz} = cos(2t) σx − sin(2t) σy
    const Matrix want = std::cos(2 * t) * single(1) - std::sin(2 * t) * single(2);
    CHECK((heisenberg_evolve(s, LocalOperator::qubits({0}, single(1)), t).matrix() - want).norm() <= 1e-14);
  }
  SUBCASE("norm preservation") {
    for (int k = 0; k < 100; ++k) {
      const LocalOperator hk = LocalOperator::qubits({0, 1, 2}, random_hermitian(rng, 8));
      const EigenSystem ek = eigendecompose(hk);
      const LocalOperator a = random_qubit_operator(rng, {k % 3});
      const double t = rng.uniform(-10, 10);
      CHECK(operator_norm(heisenberg_evolve(ek, a, t)) == doctest::Approx(operator_norm(a)).epsilon(1e-10));
    }
  }
}

TEST_CASE("pauli commutator estimator") {
  RandomStream rng(5);
  SUBCASE("t = 0") {
    const EigenSystem es = eigendecompose(random_xy_hamiltonian(rng, 3, 1.0));
    CHECK(pauli_commutator_estimator(es, {0}, {2}, 0.0) <= 1e-14);
  }
  SUBCASE("no coupling between X and Y") {
    // bond (1, 2) is absent: sites {0, 1} and {2, 3} never talk
    XYParams p{3, {1.0, 0.0, 1.0}, {0, 0, 0}, {0.1, 0.5, -0.3, 0.2}, 1.0};
    const EigenSystem es = eigendecompose(build_xy_hamiltonian(p).hamiltonian);
    for (double t : {0.5, 3.0, 40.0}) CHECK(pauli_commutator_estimator(es, {0}, {3}, t) <= 1e-12);
  }
  SUBCASE("two-site xy against the unit-ball optimum") {
    const EigenSystem es = eigendecompose(xx_pair());
    const double v = pauli_commutator_estimator(es, {0}, {1}, 0.5);
    CHECK(v == doctest::Approx(fixtures::xx_pauli_max).epsilon(1e-10));
    CHECK(v <= fixtures::xx_unit_ball_sup + 1e-10);
    // the Pauli maximum is within the documented factor 2^{|X|} 2^{|Y|} of the unit-ball sup
    CHECK(fixtures::xx_unit_ball_sup <= 4.0 * v);
  }
  SUBCASE("geometry checks") {
    const EigenSystem es = eigendecompose(random_xy_hamiltonian(rng, 3, 1.0));
    CHECK_THROWS_AS(pauli_commutator_estimator(es, {0, 2}, {1}, 1.0), DomainError);
    CHECK_THROWS_AS(pauli_commutator_estimator(es, {0}, {0}, 1.0), DomainError);
    CHECK_THROWS_AS(pauli_commutator_estimator(es, {0}, {7}, 1.0), DomainError);
  }
  SUBCASE("probe norm equals the dense commutator norm") {
    const Chain c = Chain::qubits(0, 3);
    for (int k = 0; k < 20; ++k) {
      const Matrix m = random_hermitian(rng, 16);
      for (const auto& w : pauli_word_codes({k % 4})) {
        if (w.is_identity()) continue;
        const Matrix b = embed(to_operator(w), c).matrix();
        CHECK(pauli_commutator_norm(m, w, c, true) == doctest::Approx(spectral(m * b - b * m)).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("probes split along conserved charge and decide exactly") {
  RandomStream rng(55);
  const EigenSystem es = eigendecompose(random_xy_hamiltonian(rng, 8, 2.0));
  const Chain& c = es.chain();
  bool saw_split = false;
  for (int letter = 1; letter <= 3; ++letter) {
    const Matrix a = embed(LocalOperator::qubits({0}, pauli_matrix(letter)), c).matrix();
    const Matrix ct = HeisenbergEvolver(es, a).at(1.7);
    for (int bl = 1; bl <= 3; ++bl) {
      const PauliWord w{{8}, {bl}};
      const CommutatorProbe p = commutator_probe(ct, w, c, true);
      saw_split = saw_split || p.parts.size() > 1;
      const Matrix b = embed(to_operator(w), c).matrix();
      const double exact = spectral(ct * b - b * ct);
      CHECK(p.norm() == doctest::Approx(exact).epsilon(1e-10));
      const NormBounds nb = p.bounds();
      CHECK(nb.lower <= exact * (1 + 1e-12));
      CHECK(nb.upper >= exact * (1 - 1e-12));
      CHECK(p.exceeds(exact * (1 - 1e-6)));
      CHECK_FALSE(p.exceeds(exact * (1 + 1e-6)));
    }
  }
  CHECK(saw_split);
}

TEST_CASE("estimator bounded by twice the quasi-locality defect") {
  RandomStream rng(6);
  for (int k = 0; k < 5; ++k) {
    const EigenSystem es = eigendecompose(random_xy_hamiltonian(rng, 5, 3.0));
    const double t = rng.uniform(0.5, 5.0);
    for (int r = 0; r < 4; ++r) {
      double dmax = 0.0;
      for (const auto& w : pauli_word_codes({0}))
        if (!w.is_identity()) dmax = std::max(dmax, quasi_locality_estimator(es, to_operator(w), r, t));
      for (Site y = r + 1; y <= 5; ++y) CHECK(pauli_commutator_estimator(es, {0}, {y}, t) <= 2.0 * dmax + 1e-10);
    }
  }
}

TEST_CASE("quasi-locality estimator") {
  RandomStream rng(7);
  const EigenSystem es = eigendecompose(random_xy_hamiltonian(rng, 4, 1.0));
  const LocalOperator a = LocalOperator::qubits({2}, single(1));
  CHECK(quasi_locality_estimator(es, a, 3, 4.0) == 0.0);
  CHECK(quasi_locality_estimator(es, a, 0, 0.0) <= 1e-13);
  CHECK(quasi_locality_estimator(es, a, 0, 2.0) > 1e-3);
  CHECK_THROWS_AS(quasi_locality_estimator(es, a, -1, 1.0), DomainError);
}

TEST_CASE("traces and grid sups") {
  SUBCASE("all zero") {
    CommutatorTrace tr;
    tr.time_grid = {0, 1, 2};
    tr.values = {0, 0, 0};
    CHECK(sup_over_time(tr) == 0.0);
  }
  SUBCASE("plain max at beta 0") {
    CommutatorTrace tr;
    tr.time_grid = {0, 1, 2};
    tr.values = {0.1, 0.7, 0.4};
    CHECK(sup_over_time(tr) == 0.7);
  }
  SUBCASE("linear growth with beta 1") {
    CommutatorTrace tr;
    tr.beta = 1.0;
    for (int i = 0; i <= 10; ++i) {
      const double t = 0.5 * i;
      tr.time_grid.push_back(t);
      tr.values.push_back(std::min(0.4 * t, 1.0));  // v/(1+t) peaks at t = 2.5
    }
    CHECK(sup_over_time(tr) == doctest::Approx(1.0 / 3.5));
  }
  SUBCASE("pruned grid sup equals the full trace") {
    RandomStream rng(8);
    const EigenSystem es = eigendecompose(random_xy_hamiltonian(rng, 5, 2.0));
    const auto grid = default_time_grid(60, 30.0);
    const EstimatorNormalization norm{4.0, 0.5};
    const GridSupResult g = grid_sup_pauli_estimator(es, {1}, {{3}, {4}, {5}}, grid, norm);
    for (std::size_t j = 0; j < 3; ++j) {
      const double full = sup_over_time(commutator_trace(es, {1}, {static_cast<Site>(3 + j)}, grid, norm));
      CHECK(g.sup[j] == doctest::Approx(full).epsilon(1e-12));
    }
    CHECK(g.exact_evaluations < g.candidates);
  }
  SUBCASE("csv") {
    const EigenSystem es = eigendecompose(xx_pair());
    const std::vector<double> grid{0.0, 0.5};
    std::ostringstream os;
    write_trace_csv(os, commutator_trace(es, {0}, {1}, grid));
    CHECK(os.str().rfind("t,estimator,chi,beta\n0,", 0) == 0);
  }
}

TEST_CASE("time grids") {
  const auto g = default_time_grid(1000, 1000.0);
  CHECK(g.size() == 1000);
  CHECK(g.front() == 0.0);
  CHECK(g.back() == doctest::Approx(1000.0));
  for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] > g[i - 1]);
  const auto l = linear_grid(0, 1, 5);
  CHECK(l == std::vector<double>{0, 0.25, 0.5, 0.75, 1});
}

TEST_CASE("transmission time") {
  const EigenSystem es = eigendecompose(xx_pair());
  const auto grid = linear_grid(0, 1, 11);
  SUBCASE("above 2 is always censored") { CHECK(transmission_time(es, 2.5, grid, 1.0).censored); }
  SUBCASE("no path between the ends") {
    XYParams p{2, {1.0, 0.0}, {0, 0}, {0.1, 0.5, -0.3}, 1.0};
    const EigenSystem cut = eigendecompose(build_xy_hamiltonian(p).hamiltonian);
    CHECK(transmission_time(cut, 1e-3, linear_grid(0, 50, 101), 50.0).censored);
  }
  SUBCASE("crossing against a dense grid scan") {
    const TransmissionTimeResult r = transmission_time(es, 0.1, grid, 1.0, 1e-3);
    REQUIRE_FALSE(r.censored);
    CHECK(r.t_high - r.t_low <= 1e-3);
    CHECK(std::abs(r.t_est - fixtures::xx_crossing_01) <= 1e-3);
    CHECK(pauli_commutator_estimator(es, {0}, {1}, r.t_low) <= 0.1);
    CHECK(pauli_commutator_estimator(es, {0}, {1}, r.t_high) > 0.1);
  }
  SUBCASE("nondecreasing in epsilon") {
    RandomStream rng(9);
    const EigenSystem e4 = eigendecompose(random_xy_hamiltonian(rng, 4, 1.0));
    const auto g = default_time_grid(80, 40.0);
    double last = 0.0;
    for (double eps : {0.01, 0.05, 0.2, 0.5, 1.0, 1.5}) {
      const auto r = transmission_time(e4, eps, g, 40.0);
      const double t = r.censored ? std::numeric_limits<double>::infinity() : r.t_est;
      CHECK(t >= last - 1e-3);
      last = t;
    }
  }
  SUBCASE("json") {
    std::ostringstream os;
    write_transmission_json(os, {transmission_time(es, 0.1, grid, 1.0)});
    CHECK(os.str().find("\"censored\": false") != std::string::npos);
  }
}
