#pragma once

// Reference values produced by tests/oracles/make_fixtures.py (numpy/scipy, no shared code).

#include <array>

namespace mbl::fixtures {

/// First uniforms of the stream (master 42, stream 0, realization 0).
inline constexpr std::array<double, 8> uniforms_42{0.8803763686091186, 0.5855415773912843, 0.3706659890047008,
                                                   0.38728667235156244, 0.4249114026453735, 0.6523052715449988,
                                                   0.14322114755579196, 0.33625170345584776};
/// (master 42, stream 6, realization 3).
inline constexpr std::array<double, 4> uniforms_42_s6_r3{0.67586831846369, 0.09333689076293727, 0.5849306481125877,
                                                         0.6674895813679267};

/// F(r) = e^{-r} on the path {0, 1, 2}.
inline constexpr double path3_norm = 1.7357588823428847;
inline constexpr double path3_conv = 3.0;

/// Entry (0, 1) of (1/T)∫_0^T e^{itσz} σx e^{-itσz} dt at T = 1.3, by adaptive quadrature.
inline constexpr double average_01_re = 0.19826975839287084;
inline constexpr double average_01_im = 0.7141879820649798;

/// First-kind couplings of the Ising chain J = (0.83, 1.21), Γ = (0.7, 1.1, 0.95), γ = 0.3,
/// h = (0.41, −0.66, 0.27), by brute-force character sums.
struct Coupling {
  std::array<int, 3> sites;
  int size;
  double value;
};
inline constexpr std::array<Coupling, 8> ising3_phi{{
    {{0, 0, 0}, 0, 0.0},
    {{0, 0, 0}, 1, 0.39252481776430104},
    {{1, 0, 0}, 1, -0.697917604864784},
    {{2, 0, 0}, 1, 0.2770600901067283},
    {{0, 1, 0}, 2, 0.8926236841563826},
    {{0, 2, 0}, 2, 0.004530516387151129},
    {{1, 2, 0}, 2, 1.2434745830486387},
    {{0, 1, 2}, 3, 0.0535853053114721},
}};

/// H = XX + YY on two sites, t = 0.5: sup of ‖[τ_t(A), B]‖ over unit balls (multistart optimizer) and
/// the maximum over Pauli words.
inline constexpr double xx_unit_ball_sup = 2.0;
inline constexpr double xx_pauli_max = 1.818594853651363;

/// Same Hamiltonian: first point of a 10^5-point grid on [0, 1] where the Pauli estimator exceeds 0.1.
inline constexpr double xx_crossing_01 = 0.01251;

}  // namespace mbl::fixtures
