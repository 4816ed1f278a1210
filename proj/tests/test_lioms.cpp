#include "mbl/errors.hpp"
#include "mbl/linalg.hpp"
#include "mbl/lioms.hpp"
#include "mbl/models.hpp"
#include "fixtures.hpp"
#include "support.hpp"

#include <doctest.h>

#include <sstream>

using namespace mbl;
using namespace mbl::test;

namespace {

ModelBuild random_xy(RandomStream& rng, int n, double lambda) {
  XYParams p;
  p.n = n;
  p.lambda = lambda;
  p.mu.assign(static_cast<std::size_t>(n), 1.0);
  p.gamma.assign(static_cast<std::size_t>(n), 0.0);
  for (int j = 0; j <= n; ++j) p.omega.push_back(rng.uniform(-1, 1));
  return build_xy_hamiltonian(p);
}

ModelBuild random_ising(RandomStream& rng, int n, double gamma_scale) {
  IsingParams p;
  p.a = 0;
  p.b = n;
  p.gamma_scale = gamma_scale;
  for (int x = 0; x < n; ++x) p.J.push_back(rng.uniform(0.5, 1.5));
  for (int x = 0; x <= n; ++x) {
    p.Gamma.push_back(rng.uniform(0.5, 1.5));
    p.h.push_back(rng.uniform(-1, 1));
  }
  return build_ising_hamiltonian(p);
}

Matrix commutator_with_h(const EigenSystem& es, const Matrix& a) {
  const Matrix h = es.basis() * es.energies().cast<Complex>().asDiagonal() * es.basis().adjoint();
  return h * a - a * h;
}

}  // namespace

TEST_CASE("finite-time average") {
  SUBCASE("H is invariant") {
    RandomStream rng(1);
    const ModelBuild b = random_xy(rng, 3, 1.0);
    const EigenSystem es = eigendecompose(b.hamiltonian);
    for (double T : {0.1, 3.0, 100.0})
      CHECK((finite_time_average(es, b.hamiltonian, T).matrix() - b.hamiltonian.matrix()).norm() <=
            1e-12 * b.hamiltonian.matrix().norm());
  }
  SUBCASE("single spin against quadrature") {
    const EigenSystem es = eigendecompose(LocalOperator::qubits({0}, single(3), true));
    const Matrix avg = finite_time_average(es, LocalOperator::qubits({0}, single(1)), 1.3).matrix();
    CHECK(std::abs(avg(0, 1) - Complex(fixtures::average_01_re, fixtures::average_01_im)) <= 1e-8);
    CHECK(std::abs(avg(1, 0) - Complex(fixtures::average_01_re, -fixtures::average_01_im)) <= 1e-8);
    CHECK(std::abs(avg(0, 0)) + std::abs(avg(1, 1)) <= 1e-15);
  }
  SUBCASE("diagonal eigenbasis entries are untouched") {
    const EigenSystem es = eigendecompose(LocalOperator::qubits({0}, single(3), true));
    const Matrix avg = finite_time_average(es, LocalOperator::qubits({0}, single(3)), 0.7).matrix();
    CHECK((avg - single(3)).norm() <= 1e-15);
  }
  SUBCASE("long times approach the dephased operator") {
    RandomStream rng(2);
    const EigenSystem es = eigendecompose(LocalOperator::qubits({0}, random_hermitian(rng, 2)));
    const LocalOperator a = random_qubit_operator(rng, {0});
    CHECK((finite_time_average(es, a, 1e6).matrix() - dephase(es, a, 0.0).op.matrix()).norm() <= 1e-5);
  }
  SUBCASE("T must be positive") {
    const EigenSystem es = eigendecompose(LocalOperator::qubits({0}, single(3), true));
    CHECK_THROWS_AS(finite_time_average(es, LocalOperator::qubits({0}, single(1)), 0.0), DomainError);
  }
}

TEST_CASE("dephasing") {
  RandomStream rng(3);
  const ModelBuild b = random_xy(rng, 4, 2.0);
  const EigenSystem es = eigendecompose(b.hamiltonian);
  SUBCASE("H and operators commuting with H are fixed") {
    CHECK((dephase(es, b.hamiltonian).op.matrix() - b.hamiltonian.matrix()).norm() <= 1e-12 * b.hamiltonian.matrix().norm());
    RandomStream r2(4);
    const Matrix h = random_hermitian(r2, 4);
    const EigenSystem e2 = eigendecompose(LocalOperator::qubits({0, 1}, h));
    const Matrix f = h * h - 0.3 * h;
    CHECK((dephase(e2, LocalOperator::qubits({0, 1}, f)).op.matrix() - f).norm() <= 1e-12 * f.norm());
  }
  SUBCASE("projection, contraction, commutant, trace") {
    for (int k = 0; k < 10; ++k) {
      const LocalOperator a = random_qubit_operator(rng, {k % 5}, k % 2 == 0);
      const DephasedOperator d = dephase(es, a, 0.0);
      const DephasedOperator dd = dephase(es, d.op, 0.0);
      const Matrix full = embed(a, es.chain()).matrix();
      CHECK((dd.op.matrix() - d.op.matrix()).norm() <= 1e-12 * std::max(1.0, d.op.matrix().norm()));
      CHECK(operator_norm(d.op) <= operator_norm(a) * (1 + 1e-12));
      CHECK(commutator_with_h(es, d.op.matrix()).norm() <= 1e-10 * es.spectral_radius() * operator_norm(a));
      CHECK(std::abs(d.op.matrix().trace() - full.trace()) <= 1e-12 * full.norm());
    }
  }
  SUBCASE("default tolerance") {
    CHECK(dephase(es, b.hamiltonian).gap_tol == doctest::Approx(1e-9 * es.spectral_radius()));
  }
}

TEST_CASE("second-kind lioms") {
  SUBCASE("diagonal model keeps its terms") {
    IsingParams p{0, 3, {1.0, 0.5, -0.7}, {1, 1, 1, 1}, {0.2, -0.4, 0.1, 0.9}, 0.0};
    const ModelBuild b = build_ising_hamiltonian(p);
    const EigenSystem es = eigendecompose(b.hamiltonian);
    const auto terms = b.interaction.local_terms();
    const SecondKindLioms s = build_lioms_second_kind(es, terms, 0.0);
    for (std::size_t x = 0; x < terms.size(); ++x) {
      CHECK((s.lioms[x].op.matrix() - embed(terms[x], es.chain()).matrix()).norm() <= 1e-12);
      CHECK(s.profile.at(static_cast<Site>(x), 1) <= 1e-12);  // nearest-neighbour terms fit in radius 1
    }
  }
  SUBCASE("sum reconstructs H and every liom commutes with H") {
    RandomStream rng(5);
    const ModelBuild b = random_xy(rng, 5, 3.0);
    const EigenSystem es = eigendecompose(b.hamiltonian);
    const SecondKindLioms s = build_lioms_second_kind(es, b.interaction.local_terms());
    Matrix sum = Matrix::Zero(es.dim(), es.dim());
    for (const auto& l : s.lioms) sum += l.op.matrix();
    CHECK((sum - b.hamiltonian.matrix()).norm() <= 1e-10 * b.hamiltonian.matrix().norm());
    for (std::size_t x = 0; x < s.lioms.size(); ++x)
      CHECK(commutator_with_h(es, s.lioms[x].op.matrix()).norm() <=
            1e-10 * es.spectral_radius() * std::max(1.0, operator_norm(b.interaction.local_terms()[x])));
    // the full chain is inside radius N - 1
    for (Site x = 0; x <= 5; ++x) CHECK(s.profile.at(x, 5) == 0.0);
  }
  SUBCASE("terms must sum to H") {
    RandomStream rng(6);
    const ModelBuild b = random_xy(rng, 2, 1.0);
    const EigenSystem es = eigendecompose(b.hamiltonian);
    auto terms = b.interaction.local_terms();
    terms[0] = terms[0] + LocalOperator::qubits({0}, single(3), true);
    CHECK_THROWS_AS(build_lioms_second_kind(es, terms), DomainError);
  }
}

TEST_CASE("character transform") {
  RandomStream rng(7);
  for (int k = 0; k < 20; ++k) {
    RealVector d(64);
    for (Index i = 0; i < 64; ++i) d(i) = rng.normal();
    CHECK((inverse_character_transform(character_transform(d)) - d).cwiseAbs().maxCoeff() <= 1e-12);
  }
  // explicit character sum on 3 sites
  RealVector d(8);
  for (Index i = 0; i < 8; ++i) d(i) = rng.normal();
  const RealVector phi = character_transform(d);
  for (Index mask = 0; mask < 8; ++mask) {
    double s = 0.0;
    for (Index b = 0; b < 8; ++b) s += (__builtin_popcountll(static_cast<unsigned long long>(mask & b)) % 2 ? -1.0 : 1.0) * d(b);
    CHECK(phi(mask) == doctest::Approx(s / 8).epsilon(1e-13));
  }
}

TEST_CASE("first-kind decomposition") {
  SUBCASE("zz coupling") {
    const LocalOperator h = LocalOperator::qubits({0, 1}, 0.8 * product({single(3), single(3)}), true);
    const EigenSystem es = eigendecompose(h);
    const LiomFirstKind lf = liom_first_kind_decompose(es, es.chain());
    CHECK(lf.coupling({0, 1}) == doctest::Approx(0.8).epsilon(1e-14));
    CHECK(std::abs(lf.coupling({0})) + std::abs(lf.coupling({1})) + std::abs(lf.coupling({})) <= 1e-14);
    CHECK(lf.two_point(0, 1) == doctest::Approx(0.8));
  }
  SUBCASE("single field") {
    const EigenSystem es = eigendecompose(LocalOperator::qubits({3}, -0.6 * single(3), true));
    const LiomFirstKind lf = liom_first_kind_decompose(es, es.chain());
    CHECK(lf.coupling({3}) == doctest::Approx(-0.6).epsilon(1e-14));
    CHECK(lf.assignment[0] == 0);  // |0> has the lower energy
  }
  SUBCASE("random diagonal couplings are recovered") {
    RandomStream rng(8);
    const Chain c = Chain::qubits(0, 4);
    RealVector phi(32);
    for (Index m = 0; m < 32; ++m) phi(m) = rng.normal();
    const RealVector diag = inverse_character_transform(phi);
    const EigenSystem es = eigendecompose(LocalOperator(c.sites(), c.dims(), diag.cast<Complex>().asDiagonal(), true));
    const LiomFirstKind lf = liom_first_kind_decompose(es, c);
    CHECK((lf.phi - phi).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(unitarity_defect(lf.U) <= 1e-12);
  }
  SUBCASE("transverse ising against brute-force character sums") {
    IsingParams p{0, 2, {0.83, 1.21}, {0.7, 1.1, 0.95}, {0.41, -0.66, 0.27}, 0.3};
    const ModelBuild b = build_ising_hamiltonian(p);
    const EigenSystem es = eigendecompose(b.hamiltonian);
    const LiomFirstKind lf = liom_first_kind_decompose(es, es.chain());
    for (const auto& f : fixtures::ising3_phi) {
      const SiteSet X(f.sites.begin(), f.sites.begin() + f.size);
      CHECK(lf.coupling(X) == doctest::Approx(f.value).epsilon(1e-12).scale(1.0));
    }
    // U diagonalizes H with the assigned diagonal, phases fixed
    const Matrix rot = lf.U.adjoint() * b.hamiltonian.matrix() * lf.U;
    CHECK((rot - lf.diagonal.cast<Complex>().asDiagonal().toDenseMatrix()).norm() <= 1e-12);
    for (Index k = 0; k < 8; ++k) {
      CHECK(std::abs(lf.U(k, k).imag()) <= 1e-15);
      CHECK(lf.U(k, k).real() > 0.0);
    }
  }
  SUBCASE("errors") {
    const EigenSystem es = eigendecompose(LocalOperator({0}, {3}, Matrix::Identity(3, 3), true));
    CHECK_THROWS_AS(liom_first_kind_decompose(es, es.chain()), UnsupportedDimensionError);
    const EigenSystem e2 = eigendecompose(LocalOperator::qubits({0}, single(3), true));
    CHECK_THROWS_AS(liom_first_kind_decompose(e2, Chain::qubits(1, 1)), DomainError);
  }
}

TEST_CASE("unitary quasi-locality profile") {
  const Chain c = Chain::qubits(0, 3);
  SUBCASE("identity") {
    const LocalityProfile p = unitary_quasilocality_profile(Matrix::Identity(16, 16), c);
    CHECK(p.values.maxCoeff() == 0.0);
  }
  SUBCASE("local unitary on {0, 1}") {
    RandomStream rng(9);
    const Matrix h = random_hermitian(rng, 4);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(h);
    const Matrix u2 = eig.eigenvectors() * (eig.eigenvalues() * Complex(0, 1)).array().exp().matrix().asDiagonal() *
                      eig.eigenvectors().adjoint();
    const Matrix U = embed(LocalOperator::qubits({0, 1}, u2), c).matrix();
    const LocalityProfile p = unitary_quasilocality_profile(U, c);
    CHECK(p.at(0, 0) > 1e-3);
    for (int r = 1; r < 4; ++r) CHECK(p.at(0, r) <= 1e-13);
    CHECK(p.at(3, 0) <= 1e-13);
  }
  SUBCASE("localized xy diagonalizer against explicit pauli-basis averaging") {
    RandomStream rng(10);
    const ModelBuild b = random_xy(rng, 4, 8.0);
    const EigenSystem es = eigendecompose(b.hamiltonian);
    const LiomFirstKind lf = liom_first_kind_decompose(es, es.chain());
    const LocalityProfile p = unitary_quasilocality_profile(lf.U, es.chain(), {2});
    // Π over the sites outside the ball by averaging over their Pauli words
    for (int r = 0; r < 2; ++r) {
      const SiteSet ball = neighborhood({2}, r, es.chain());
      SiteSet outside;
      for (Site s = 0; s <= 4; ++s)
        if (!std::binary_search(ball.begin(), ball.end(), s)) outside.push_back(s);
      double best = 0.0;
      for (int letter = 1; letter <= 3; ++letter) {
        const Matrix a = embed(LocalOperator::qubits({2}, single(letter)), es.chain()).matrix();
        const Matrix c2 = lf.U.adjoint() * a * lf.U;
        Matrix avg = Matrix::Zero(32, 32);
        const auto words = pauli_words(outside, es.chain());
        for (const auto& w : words) {
          const Matrix pw = embed(w, es.chain()).matrix();
          avg += pw * c2 * pw.adjoint();
        }
        avg /= static_cast<double>(words.size());
        best = std::max(best, spectral(c2 - avg));
      }
      CHECK(p.at(2, r) == doctest::Approx(best).epsilon(1e-10));
    }
    CHECK(p.at(2, 0) >= p.at(2, 1));
    CHECK(p.at(2, 1) >= p.at(2, 2));
  }
  SUBCASE("non-unitary input") { CHECK_THROWS_AS(unitary_quasilocality_profile(2.0 * Matrix::Identity(16, 16), c), DomainError); }
}

TEST_CASE("envelope and bound check") {
  RandomStream rng(11);
  const ModelBuild b = random_ising(rng, 6, 0.1);
  const EigenSystem es = eigendecompose(b.hamiltonian);
  const LiomFirstKind lf = liom_first_kind_decompose(es, es.chain());
  SUBCASE("envelope is nonincreasing and gives C <= 1") {
    const auto F = empirical_envelope(lf.two_point);
    for (std::size_t r = 1; r + 1 < F.size(); ++r) CHECK(F[r] >= F[r + 1]);
    const LiomBoundCheck chk = verify_liom_bound(lf, es, {0}, {6}, 1.0, 0.25);
    CHECK(chk.C <= 1.0 + 1e-15);
  }
  SUBCASE("t = 0 with a local unitary") {
    IsingParams p{0, 3, {1.0, 0.5, -0.7}, {1, 1, 1, 1}, {0.2, -0.4, 0.1, 0.9}, 0.0};
    const EigenSystem e0 = eigendecompose(build_ising_hamiltonian(p).hamiltonian);
    const LiomFirstKind l0 = liom_first_kind_decompose(e0, e0.chain());
    const LiomBoundCheck chk = verify_liom_bound(l0, e0, {0}, {3}, 0.0, 0.4);
    CHECK(chk.lhs <= 1e-14);
    CHECK(chk.rhs >= 0.0);
    CHECK_FALSE(chk.violated());
  }
  SUBCASE("localized draw at several times") {
    for (double t : {0.5, 2.0, 8.0})
      for (Site y = 3; y <= 6; ++y) {
        const LiomBoundCheck chk = verify_liom_bound(lf, es, {0}, {y}, t, 0.4);
        CHECK(chk.lhs <= chk.rhs);
      }
  }
  SUBCASE("lambda range") {
    CHECK_THROWS_AS(verify_liom_bound(lf, es, {0}, {6}, 1.0, 0.5), DomainError);
    CHECK_THROWS_AS(verify_liom_bound(lf, es, {0}, {6}, 1.0, 0.0), DomainError);
  }
}

TEST_CASE("csv exports") {
  const LocalOperator h = LocalOperator::qubits({0, 1}, 0.8 * product({single(3), single(3)}) +
                                                            0.5 * product({single(3), Matrix::Identity(2, 2)}),
                                              true);
  const EigenSystem es = eigendecompose(h);
  const LiomFirstKind lf = liom_first_kind_decompose(es, es.chain());
  std::ostringstream os;
  write_phi_csv(os, lf, 1e-14);
  CHECK(os.str() == "mask,value\n1,0.5\n3,0.80000000000000004\n");
  std::ostringstream ps;
  LocalityProfile p{{4}, RealMatrix::Constant(1, 2, 0.25)};
  write_profile_csv(ps, p);
  CHECK(ps.str() == "x,r,value\n4,0,0.25\n4,1,0.25\n");
}
