// Single-center response: deterministic level positions, the closed-form
// excitation and its algebraic limits, and agreement with the brute-force
// Lindblad steady state.

#include <cmath>
#include <random>

#include "doctest.h"

#include "nvodmr/constants.hpp"
#include "nvodmr/excitation.hpp"
#include "nvodmr/lindblad.hpp"

using namespace nvodmr;

TEST_CASE("zero-field splitting shifts linearly with temperature and axial strain") {
    CHECK(zfs_frequency_mhz(0.0, 0.0) == doctest::Approx(2870.685).epsilon(1e-14));
    CHECK(zfs_frequency_mhz(10.0, 0.0) == doctest::Approx(2869.899).epsilon(1e-12));
    CHECK(zfs_frequency_mhz(0.0, 1.0) == doctest::Approx(2870.6885).epsilon(1e-12));
    // Linearity: equal steps give equal increments.
    const double a = zfs_frequency_mhz(1.0, 0.0) - zfs_frequency_mhz(0.0, 0.0);
    const double b = zfs_frequency_mhz(2.0, 0.0) - zfs_frequency_mhz(1.0, 0.0);
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
}

TEST_CASE("branch frequencies straddle D symmetrically and follow the sign of E1") {
    const auto [wb, wd] = branch_frequencies(2870.0, 3.0);
    CHECK(wb == doctest::Approx(2867.0));
    CHECK(wd == doctest::Approx(2873.0));

    const auto degenerate = branch_frequencies(2870.685, 0.0);
    CHECK(degenerate.bright_mhz == degenerate.dark_mhz);

    const auto flipped = branch_frequencies(2870.0, -3.0);
    CHECK(flipped.bright_mhz == doctest::Approx(2873.0));
    CHECK(flipped.dark_mhz == doctest::Approx(2867.0));
}

TEST_CASE("constants validation names the offending field") {
    PhysicalConstants c;
    c.ct_mhz_per_k = 0.0;
    CHECK_THROWS_WITH_AS(c.validate(), "PhysicalConstants: ct_mhz_per_k must be < 0",
                         std::invalid_argument);
    c = PhysicalConstants{};
    c.ge_mub_mhz_per_mt = -1.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    CHECK_NOTHROW(PhysicalConstants{}.validate());
}

TEST_CASE("axial strain couples about 48.6 times weaker than transverse strain") {
    const PhysicalConstants c;
    const double ratio = c.ce_par_mhz_per_v_um / c.ce_perp_mhz_per_v_um;
    CHECK(ratio * 48.6 == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("on-resonance excitation of an unmixed center is lambda^2 over gamma^2") {
    CenterParams p;
    p.e1_mhz = 4.0;
    p.gamma_mhz = 0.7;
    p.lambda_eff_mhz = 0.01;
    const auto [wb, wd] = branch_frequencies(p.d_mhz, p.e1_mhz);
    const double expect = p.lambda_eff_mhz * p.lambda_eff_mhz / (p.gamma_mhz * p.gamma_mhz);
    CHECK(single_center_excitation(wb, p) == doctest::Approx(expect).epsilon(1e-12));
    // At omega = D the response is lambda^2 / (E1^2 + gamma^2 + J^2 + E2^2).
    p.zeeman_mhz = 2.0;
    p.e2_mhz = 1.5;
    const double jsq = p.zeeman_mhz * p.zeeman_mhz + p.e2_mhz * p.e2_mhz;
    const double at_d = p.lambda_eff_mhz * p.lambda_eff_mhz /
                        (p.e1_mhz * p.e1_mhz + p.gamma_mhz * p.gamma_mhz + jsq);
    CHECK(single_center_excitation(p.d_mhz, p) == doctest::Approx(at_d).epsilon(1e-12));
}

TEST_CASE("zero drive gives exactly zero excitation") {
    CenterParams p;
    p.e1_mhz = 2.0;
    p.e2_mhz = 1.0;
    p.zeeman_mhz = 3.0;
    p.lambda_eff_mhz = 0.0;
    for (double omega : {2850.0, 2870.685, 2881.3})
        CHECK(single_center_excitation(omega, p) == 0.0);
}

TEST_CASE("excitation is non-negative for arbitrary parameters") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 500; ++trial) {
        CenterParams p;
        p.d_mhz = 2870.685 + 10.0 * (u(rng) - 0.5);
        p.e1_mhz = -8.0 + 16.0 * u(rng);
        p.e2_mhz = -5.0 + 10.0 * u(rng);
        p.zeeman_mhz = -10.0 + 20.0 * u(rng);
        p.gamma_mhz = 0.05 + 3.0 * u(rng);
        p.lambda_eff_mhz = 0.5 * u(rng);
        const double omega = p.d_mhz - 30.0 + 60.0 * u(rng);
        CHECK(single_center_excitation(omega, p) >= 0.0);
    }
}

TEST_CASE("doubling the drive strength exactly quadruples the response") {
    CenterParams p;
    p.e1_mhz = 3.0;
    p.e2_mhz = 1.0;
    p.zeeman_mhz = 2.0;
    p.gamma_mhz = 0.8;
    p.lambda_eff_mhz = 0.29;
    CenterParams q = p;
    q.lambda_eff_mhz = 2.0 * p.lambda_eff_mhz;
    for (double omega : {2860.0, 2870.685, 2872.1, 2884.0})
        CHECK(single_center_excitation(omega, q) ==
              4.0 * single_center_excitation(omega, p));
}

TEST_CASE("closed form matches the scale-free kernel for random parameters") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        CenterParams p;
        p.d_mhz = 2870.685 + 6.0 * (u(rng) - 0.5);
        p.e1_mhz = -6.0 + 12.0 * u(rng);
        p.e2_mhz = -4.0 + 8.0 * u(rng);
        p.zeeman_mhz = -8.0 + 16.0 * u(rng);
        p.gamma_mhz = 0.1 + 2.0 * u(rng);
        p.lambda_eff_mhz = 0.29;
        const double omega = p.d_mhz - 25.0 + 50.0 * u(rng);
        const auto [wb, wd] = branch_frequencies(p.d_mhz, p.e1_mhz);
        const double jsq = p.zeeman_mhz * p.zeeman_mhz + p.e2_mhz * p.e2_mhz;
        const double kernel = p.lambda_eff_mhz * p.lambda_eff_mhz *
                              detail::excitation_kernel(omega, wb, wd, jsq, p.gamma_mhz);
        CHECK(single_center_excitation(omega, p) ==
              doctest::Approx(kernel).epsilon(1e-12));
    }
}

TEST_CASE("without branch mixing the response is a pair of Lorentzian lines") {
    // With J = E2 = 0 each center's response factorizes into a single
    // Lorentzian at its bright frequency, and the strain pair (+E1, -E1)
    // together covers both branch positions.
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        CenterParams p;
        p.d_mhz = 2870.685;
        p.e1_mhz = -6.0 + 12.0 * u(rng);
        p.e2_mhz = 0.0;
        p.zeeman_mhz = 0.0;
        p.gamma_mhz = 0.1 + 2.0 * u(rng);
        p.lambda_eff_mhz = 0.29;
        CenterParams m = p;
        m.e1_mhz = -p.e1_mhz;
        const auto [wb, wd] = branch_frequencies(p.d_mhz, p.e1_mhz);
        const double l2 = p.lambda_eff_mhz * p.lambda_eff_mhz;
        const double omega = p.d_mhz - 20.0 + 40.0 * u(rng);

        const double single = single_center_excitation(omega, p);
        CHECK(single == doctest::Approx(lorentzian_response(omega, wb, p.gamma_mhz, l2))
                            .epsilon(1e-12));

        const double pair = single + single_center_excitation(omega, m);
        const double two = lorentzian_response(omega, wb, p.gamma_mhz, l2) +
                           lorentzian_response(omega, wd, p.gamma_mhz, l2);
        CHECK(pair == doctest::Approx(two).epsilon(1e-12));
    }
}

TEST_CASE("the unmixed strain pair is symmetric about D") {
    CenterParams p;
    p.e1_mhz = 4.5;
    p.gamma_mhz = 0.6;
    CenterParams m = p;
    m.e1_mhz = -p.e1_mhz;
    for (double delta : {0.3, 1.7, 6.2, 15.0}) {
        const double up = single_center_excitation(p.d_mhz + delta, p) +
                          single_center_excitation(p.d_mhz + delta, m);
        const double down = single_center_excitation(p.d_mhz - delta, p) +
                            single_center_excitation(p.d_mhz - delta, m);
        CHECK(up == doctest::Approx(down).epsilon(1e-12));
    }
}

TEST_CASE("Lindblad steady state rejects non-positive rates") {
    CenterParams p;
    CHECK_THROWS_AS(lindblad_steady_state_oracle(p, 0.0, 2870.0), std::invalid_argument);
    p.gamma_mhz = 0.0;
    CHECK_THROWS_AS(lindblad_steady_state_oracle(p, 0.01, 2870.0), std::invalid_argument);
}

TEST_CASE("Lindblad steady state vanishes when the drive is off") {
    CenterParams p;
    p.e1_mhz = 3.0;
    p.lambda_eff_mhz = 0.0;
    const double pop = lindblad_steady_state_oracle(p, p.gamma_mhz / 100.0, 2867.685);
    CHECK(std::abs(pop) < 1e-12);
}

TEST_CASE("weak-drive Lindblad population matches the closed form on resonance") {
    CenterParams p;
    p.e1_mhz = 4.0;
    p.gamma_mhz = 1.0;
    p.lambda_eff_mhz = 0.01 * p.gamma_mhz;
    const auto [wb, wd] = branch_frequencies(p.d_mhz, p.e1_mhz);
    const double analytic = single_center_excitation(wb, p);
    const double oracle = lindblad_steady_state_oracle(p, p.gamma_mhz / 100.0, wb);
    CHECK(oracle == doctest::Approx(analytic).epsilon(0.01));
}

TEST_CASE("weak-drive Lindblad population tracks the closed form across a sweep") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 3; ++trial) {
        CenterParams p;
        p.d_mhz = 2870.685 + 4.0 * (u(rng) - 0.5);
        p.e1_mhz = -8.0 + 16.0 * u(rng);
        p.e2_mhz = -5.0 + 10.0 * u(rng);
        p.zeeman_mhz = -10.0 + 20.0 * u(rng);
        p.gamma_mhz = 0.2 + 2.8 * u(rng);
        p.lambda_eff_mhz = 0.01 * p.gamma_mhz;
        for (int i = 0; i < 21; ++i) {
            const double omega = p.d_mhz - 20.0 + 40.0 * i / 20.0;
            const double analytic = single_center_excitation(omega, p);
            const double oracle =
                lindblad_steady_state_oracle(p, p.gamma_mhz / 100.0, omega);
            const double denom = std::max({std::abs(analytic), std::abs(oracle), 1e-300});
            CHECK(std::abs(analytic - oracle) / denom < 0.02);
        }
    }
}
