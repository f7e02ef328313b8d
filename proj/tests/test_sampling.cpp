// Ensemble sampling: the Lorentzian inverse CDF, the frozen per-center draw
// order, the hyperfine triplet and the geometry of field projections.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"

#include "nvodmr/constants.hpp"
#include "nvodmr/sampling.hpp"

using namespace nvodmr;

TEST_CASE("Lorentzian quantile hits the quartiles and the median exactly") {
    CHECK(lorentzian_sample(0.0, 1.0, 0.75) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(lorentzian_sample(0.0, 1.0, 0.25) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(lorentzian_sample(5.0, 2.0, 0.5) == 5.0);
    CHECK(lorentzian_sample(-3.0, 0.0, 0.9) == -3.0);  // zero width collapses
}

TEST_CASE("Lorentzian quantile rejects invalid inputs") {
    CHECK_THROWS_AS(lorentzian_sample(0.0, -1.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(lorentzian_sample(0.0, 1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(lorentzian_sample(0.0, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("noise parameter validation rejects out-of-range widths") {
    NoiseParams n;
    CHECK_NOTHROW(n.validate());
    n.gamma_mhz = 0.0;
    CHECK_THROWS_AS(n.validate(), std::invalid_argument);
    n = NoiseParams{};
    n.db_mhz = -0.1;
    CHECK_THROWS_AS(n.validate(), std::invalid_argument);
    n = NoiseParams{};
    n.z_strain_factor = 0.0;
    CHECK_THROWS_AS(n.validate(), std::invalid_argument);
    n.z_strain_factor = 1.5;
    CHECK_THROWS_AS(n.validate(), std::invalid_argument);
}

TEST_CASE("degenerate noise reproduces the deterministic center exactly") {
    NoiseParams noise;
    noise.db_mhz = 0.0;
    noise.de_mhz = 0.0;
    noise.hyperfine_split_mhz = 0.0;
    RandomStream stream(1, 0);
    const CenterSample s = sample_center(noise, 2870.685, 3.25, stream);
    CHECK(s.d_mhz == 2870.685);
    CHECK(s.e1_mhz == 0.0);
    CHECK(s.e2_mhz == 0.0);
    CHECK(s.j_mhz == 3.25);
}

TEST_CASE("the stream position does not depend on the hyperfine setting") {
    // The hyperfine index is consumed even when the splitting is zero, so
    // toggling it cannot shift later draws.
    NoiseParams with_split;
    NoiseParams without_split = with_split;
    without_split.hyperfine_split_mhz = 0.0;

    RandomStream a(77, 4);
    RandomStream b(77, 4);
    (void)sample_center(with_split, 2870.685, 0.0, a);
    (void)sample_center(without_split, 2870.685, 0.0, b);
    for (int i = 0; i < 8; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("hyperfine offsets split the ensemble into equal thirds") {
    NoiseParams noise;
    noise.db_mhz = 0.0;  // leave only the discrete hyperfine part in J
    noise.de_mhz = 0.0;
    const int n = 100000;
    int counts[3] = {0, 0, 0};
    bool only_triplet_values = true;
    for (int c = 0; c < n; ++c) {
        RandomStream stream(42, static_cast<std::uint64_t>(c));
        const CenterSample s = sample_center(noise, 2870.685, 0.0, stream);
        // With the continuous noise switched off, J is exactly one of the
        // three discrete offsets.
        if (s.j_mhz == -2.3)
            ++counts[0];
        else if (s.j_mhz == 0.0)
            ++counts[1];
        else if (s.j_mhz == 2.3)
            ++counts[2];
        else
            only_triplet_values = false;
    }
    CHECK(only_triplet_values);
    for (int k = 0; k < 3; ++k) {
        const double fraction = static_cast<double>(counts[k]) / n;
        CHECK(std::abs(fraction - 1.0 / 3.0) < 0.02);
    }
}

TEST_CASE("strain draws have the Lorentzian interquartile range") {
    NoiseParams noise;
    noise.de_mhz = 5.0;
    const int n = 100000;
    std::vector<double> e1;
    e1.reserve(n);
    for (int c = 0; c < n; ++c) {
        RandomStream stream(7, static_cast<std::uint64_t>(c));
        e1.push_back(sample_center(noise, 2870.685, 0.0, stream).e1_mhz);
    }
    std::sort(e1.begin(), e1.end());
    const double q1 = e1[n / 4];
    const double q3 = e1[(3 * n) / 4];
    CHECK(q3 - q1 == doctest::Approx(10.0).epsilon(0.03));  // 10 +- 0.3
}

TEST_CASE("strain draws pass a Kolmogorov-Smirnov check against the Lorentzian CDF") {
    NoiseParams noise;
    noise.de_mhz = 5.0;
    const int n = 100000;
    std::vector<double> e1;
    e1.reserve(n);
    for (int c = 0; c < n; ++c) {
        RandomStream stream(3, static_cast<std::uint64_t>(c));
        e1.push_back(sample_center(noise, 2870.685, 0.0, stream).e1_mhz);
    }
    std::sort(e1.begin(), e1.end());
    double ks = 0.0;
    for (int i = 0; i < n; ++i) {
        const double cdf = 0.5 + std::atan(e1[i] / noise.de_mhz) / std::numbers::pi;
        ks = std::max(ks, std::abs(cdf - static_cast<double>(i) / n));
        ks = std::max(ks, std::abs(static_cast<double>(i + 1) / n - cdf));
    }
    CHECK(ks < 0.01);
}

TEST_CASE("field-noise draws are symmetric about the static Zeeman value") {
    NoiseParams noise;
    noise.db_mhz = 1.0;
    noise.de_mhz = 0.0;
    noise.hyperfine_split_mhz = 0.0;
    const int n = 10000;
    int positive = 0;
    for (int c = 0; c < n; ++c) {
        RandomStream stream(5, static_cast<std::uint64_t>(c));
        if (sample_center(noise, 2870.685, 0.0, stream).j_mhz > 0.0) ++positive;
    }
    // Binomial(n, 1/2): three standard deviations is 3*sqrt(n)/2 = 150.
    CHECK(std::abs(positive - n / 2) < 150);
}

TEST_CASE("a field along [001] projects equally onto all four NV axes") {
    const FieldVector b{0.0, 0.0, 1.0};
    const auto proj = project_field(b, kDefaultConstants.ge_mub_mhz_per_mt);
    const double expect = 28.7 / std::sqrt(3.0);
    for (double p : proj)
        CHECK(std::abs(p) == doctest::Approx(expect).epsilon(1e-14));
    // The four magnitudes agree to the last bit, not just to a tolerance.
    CHECK(std::abs(proj[0]) == std::abs(proj[1]));
    CHECK(std::abs(proj[0]) == std::abs(proj[2]));
    CHECK(std::abs(proj[0]) == std::abs(proj[3]));
}

TEST_CASE("a field along [111] singles out one axis") {
    const double s = 1.0 / std::sqrt(3.0);
    const FieldVector b{s, s, s};  // unit field along axis 0
    const auto proj = project_field(b, kDefaultConstants.ge_mub_mhz_per_mt);
    CHECK(proj[0] == doctest::Approx(28.7).epsilon(1e-12));
    for (int a = 1; a < 4; ++a)
        CHECK(proj[a] == doctest::Approx(-28.7 / 3.0).epsilon(1e-12));
}

TEST_CASE("projections vanish for zero field and never exceed the full Zeeman scale") {
    const auto zero = project_field(FieldVector{}, 28.7);
    for (double p : zero) CHECK(p == 0.0);

    RandomStream stream(17, 0);
    for (int trial = 0; trial < 200; ++trial) {
        const FieldVector b{stream.next_unit_open() - 0.5, stream.next_unit_open() - 0.5,
                            stream.next_unit_open() - 0.5};
        const auto proj = project_field(b, 28.7);
        const double cap = 28.7 * b.magnitude_mt() * (1.0 + 1e-12);
        for (double p : proj) CHECK(std::abs(p) <= cap);
    }
}

TEST_CASE("flipping the field flips every projection exactly") {
    const FieldVector b{0.3, -1.2, 0.7};
    const FieldVector m{-0.3, 1.2, -0.7};
    const auto pb = project_field(b, 28.7);
    const auto pm = project_field(m, 28.7);
    for (int a = 0; a < 4; ++a) CHECK(pb[a] == -pm[a]);
}

TEST_CASE("the earth-field preset has fixed magnitude in any direction") {
    const FieldVector e = earth_field(1.0, 1.0, 1.0);
    CHECK(e.magnitude_mt() == doctest::Approx(0.045).epsilon(1e-12));
    const FieldVector scaled = earth_field(10.0, 10.0, 10.0);
    CHECK(scaled.bx_mt == doctest::Approx(e.bx_mt).epsilon(1e-12));
    CHECK(earth_field(0.0, 0.0, -2.0).bz_mt == doctest::Approx(-0.045).epsilon(1e-12));
    CHECK_THROWS_AS(earth_field(0.0, 0.0, 0.0), std::invalid_argument);
}
