// Ensemble spectra: agreement with the single-center closed form in the
// degenerate limit, determinism, statistical symmetry, Zeeman splitting
// geometry and the Monte Carlo convergence measure.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"

#include "nvodmr/csv.hpp"
#include "nvodmr/simulate.hpp"
#include "nvodmr/spectrum.hpp"

using namespace nvodmr;

namespace {

// Shape of the zero-field feature at D: strict local maximum of the signal
// at the nearest grid point, bracketed by the walk-down local minima on both
// sides. Returns the feature amplitude relative to the minima.
double dip_amplitude(const Spectrum& s, double d0) {
    std::size_t ci = 0;
    for (std::size_t i = 1; i < s.freqs_mhz.size(); ++i)
        if (std::abs(s.freqs_mhz[i] - d0) < std::abs(s.freqs_mhz[ci] - d0)) ci = i;
    REQUIRE(ci > 0);
    REQUIRE(ci + 1 < s.values.size());
    REQUIRE(s.values[ci] >= s.values[ci - 1]);
    REQUIRE(s.values[ci] >= s.values[ci + 1]);
    std::size_t li = ci;
    while (li > 0 && s.values[li - 1] <= s.values[li]) --li;
    std::size_t ri = ci;
    while (ri + 1 < s.values.size() && s.values[ri + 1] <= s.values[ri]) ++ri;
    REQUIRE(li < ci);
    REQUIRE(ri > ci);
    return s.values[ci] - 0.5 * (s.values[li] + s.values[ri]);
}

}  // namespace

TEST_CASE("with all noise widths at zero the ensemble reduces to one center") {
    NoiseParams noise;
    noise.db_mhz = 0.0;
    noise.de_mhz = 0.0;
    noise.hyperfine_split_mhz = 0.0;
    noise.gamma_mhz = 0.8;

    SimulationConfig cfg;
    cfg.freq_start_mhz = 2855.0;
    cfg.freq_stop_mhz = 2885.0;
    cfg.n_points = 61;
    cfg.n_samples = 10;

    const MeanExcitation e = simulate_mean_excitation(cfg, noise, 1);
    CenterParams p;
    p.gamma_mhz = noise.gamma_mhz;
    p.lambda_eff_mhz = cfg.lambda_eff_mhz;
    for (std::size_t i = 0; i < e.freqs_mhz.size(); ++i) {
        CHECK(e.values[i] ==
              doctest::Approx(single_center_excitation(e.freqs_mhz[i], p)).epsilon(1e-12));
        CHECK(e.std_errors[i] == doctest::Approx(0.0));
    }
}

TEST_CASE("zero drive maps to a flat spectrum at the bare baseline") {
    NoiseParams noise;
    SimulationConfig cfg;
    cfg.lambda_eff_mhz = 0.0;
    cfg.n_points = 51;
    cfg.n_samples = 50;
    const Spectrum s = simulate_spectrum(cfg, noise, 3);
    for (double v : s.values) CHECK(v == cfg.baseline);
}

TEST_CASE("reruns with the same config and seed are bit-identical") {
    NoiseParams noise;
    SimulationConfig cfg;
    cfg.n_points = 101;
    cfg.n_samples = 500;
    cfg.field = FieldVector{0.4, -0.2, 1.1};
    const Spectrum a = simulate_spectrum(cfg, noise, 42);
    const Spectrum b = simulate_spectrum(cfg, noise, 42);
    REQUIRE(a.values.size() == b.values.size());
    for (std::size_t i = 0; i < a.values.size(); ++i) CHECK(a.values[i] == b.values[i]);
    CHECK(a.meta.config_hash == b.meta.config_hash);

    const Spectrum c = simulate_spectrum(cfg, noise, 43);
    int differing = 0;
    for (std::size_t i = 0; i < a.values.size(); ++i)
        if (a.values[i] != c.values[i]) ++differing;
    CHECK(differing > 0);
}

TEST_CASE("the zero-field spectrum is statistically symmetric about D") {
    NoiseParams noise;
    SimulationConfig cfg;
    const double d0 = cfg.constants.d0_mhz;
    cfg.freq_start_mhz = d0 - 10.0;
    cfg.freq_stop_mhz = d0 + 10.0;
    cfg.n_points = 41;  // grid contains D and symmetric +-delta pairs
    cfg.n_samples = 4000;
    cfg.normalize_to_peak = false;
    const SpectrumWithErrors s = simulate_spectrum_with_errors(cfg, noise, 42);
    const std::size_t center = 20;
    for (std::size_t k : {4u, 10u, 20u}) {  // delta = 2, 5, 10 MHz
        const std::size_t up = center + k;
        const std::size_t down = center - k;
        const double diff = std::abs(s.spectrum.values[up] - s.spectrum.values[down]);
        const double se = std::sqrt(s.std_errors[up] * s.std_errors[up] +
                                    s.std_errors[down] * s.std_errors[down]);
        CHECK(diff <= 4.0 * se);
    }
}

TEST_CASE("larger homogeneous linewidth smears the central feature") {
    NoiseParams noise;
    noise.de_mhz = 5.0;
    noise.db_mhz = 0.5;
    SimulationConfig cfg;
    cfg.n_samples = 10000;
    double previous = 1e300;
    for (double gamma : {0.1, 1.0, 2.0}) {
        noise.gamma_mhz = gamma;
        const double amp = dip_amplitude(simulate_spectrum(cfg, noise, 2),
                                         cfg.constants.d0_mhz);
        CHECK(amp > 0.0);
        CHECK(amp <= previous);
        previous = amp;
    }
}

TEST_CASE("a 5 mT field along [001] splits the line by twice its Zeeman projection") {
    NoiseParams noise;
    noise.db_mhz = 0.01;
    noise.de_mhz = 0.5;
    noise.hyperfine_split_mhz = 0.0;

    SimulationConfig cfg;
    cfg.field = FieldVector{0.0, 0.0, 5.0};
    const GridSpec grid = suggest_grid(cfg.field, 0.0, cfg.constants);
    cfg.freq_start_mhz = grid.start_mhz;
    cfg.freq_stop_mhz = grid.stop_mhz;
    cfg.n_points = grid.n_points;
    cfg.n_samples = 2000;
    cfg.normalize_to_peak = false;

    const MeanExcitation e = simulate_mean_excitation(cfg, noise, 5);
    const double d0 = cfg.constants.d0_mhz;
    std::size_t lo = 0, hi = 0;
    for (std::size_t i = 0; i < e.freqs_mhz.size(); ++i) {
        if (e.freqs_mhz[i] < d0) {
            if (e.values[i] > e.values[lo]) lo = i;
        } else if (hi == 0 || e.values[i] > e.values[hi]) {
            hi = i;
        }
    }
    const double projection = 28.7 * 5.0 / std::sqrt(3.0);
    const double split = e.freqs_mhz[hi] - e.freqs_mhz[lo];
    const double step = e.freqs_mhz[1] - e.freqs_mhz[0];
    CHECK(std::abs(split - 2.0 * projection) <= 0.5 * step + 1e-9);
}

TEST_CASE("normalized signals stay between baseline minus contrast and baseline") {
    NoiseParams noise;
    SimulationConfig cfg;
    cfg.n_samples = 2000;
    cfg.field = FieldVector{0.3, 0.1, 0.9};
    const Spectrum s = simulate_spectrum(cfg, noise, 9);
    for (double v : s.values) {
        CHECK(v <= cfg.baseline + 1e-12);
        CHECK(v >= cfg.baseline - cfg.contrast - 1e-12);
    }
    // The normalization pins the deepest point exactly at baseline - contrast.
    const double deepest = *std::min_element(s.values.begin(), s.values.end());
    CHECK(deepest == doctest::Approx(cfg.baseline - cfg.contrast).epsilon(1e-12));
}

TEST_CASE("the convergence measure is zero for a degenerate ensemble") {
    NoiseParams noise;
    noise.db_mhz = 0.0;
    noise.de_mhz = 0.0;
    noise.hyperfine_split_mhz = 0.0;
    SimulationConfig cfg;
    cfg.n_points = 101;
    cfg.n_samples = 64;
    CHECK(convergence_check(cfg, noise, 4) == 0.0);
}

TEST_CASE("the convergence measure is small at full sampling and large at one sample") {
    NoiseParams noise;
    SimulationConfig cfg;
    CHECK(convergence_check(cfg, noise, 42) < 0.01);
    cfg.n_samples = 1;
    CHECK(convergence_check(cfg, noise, 42) > 0.05);
}

TEST_CASE("spectra survive the CSV round trip bit for bit") {
    NoiseParams noise;
    SimulationConfig cfg;
    cfg.n_points = 41;
    cfg.n_samples = 200;
    const Spectrum s = simulate_spectrum(cfg, noise, 6);

    const std::string path =
        (std::filesystem::temp_directory_path() / "nvodmr_roundtrip.csv").string();
    write_spectrum_csv(path, s);
    const auto rows = read_two_column_csv(path);
    std::filesystem::remove(path);

    REQUIRE(rows.size() == s.freqs_mhz.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].first == s.freqs_mhz[i]);
        CHECK(rows[i].second == s.values[i]);
    }
}

TEST_CASE("config validation names the offending field") {
    SimulationConfig cfg;
    cfg.freq_start_mhz = 2900.0;
    cfg.freq_stop_mhz = 2845.0;
    CHECK_THROWS_WITH_AS(cfg.validate(),
                         "SimulationConfig: freq_start_mhz must be < freq_stop_mhz",
                         std::invalid_argument);
    cfg = SimulationConfig{};
    cfg.n_points = 1;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = SimulationConfig{};
    cfg.contrast = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = SimulationConfig{};
    cfg.axis_index = 4;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("grid suggestion covers the default window and widens with the field") {
    const GridSpec zero = suggest_grid(std::nullopt, 0.0);
    CHECK(zero.start_mhz == doctest::Approx(2845.0).epsilon(1e-12));
    CHECK(zero.stop_mhz == doctest::Approx(2895.0).epsilon(1e-12));
    CHECK(zero.n_points == 501);

    const GridSpec wide = suggest_grid(FieldVector{0.0, 0.0, 5.0}, 0.0);
    const double reach = 28.7 * 5.0 / std::sqrt(3.0);
    CHECK(wide.start_mhz == doctest::Approx(2870.685 - reach - 25.0).epsilon(1e-10));
    CHECK(wide.stop_mhz == doctest::Approx(2870.685 + reach + 25.0).epsilon(1e-10));
    CHECK(wide.n_points >= 501);
    CHECK(wide.n_points <= 4001);

    // Warmer sample: the window tracks the temperature-shifted D.
    const GridSpec warm = suggest_grid(std::nullopt, 100.0);
    CHECK(warm.start_mhz < zero.start_mhz);
}
