#pragma once

// Monte Carlo ensemble spectra. Each sampled center contributes the closed
// form from excitation.hpp; the ensemble mean over centers (and, with an
// applied field, over the four crystallographic axes) gives the excitation
// curve, which is mapped to a fluorescence-like signal via contrast and
// baseline.
//
// Determinism contract: every quantity is a pure function of (config, noise,
// seed). Centers use independent substreams keyed by center index, the
// accumulation order is fixed, and no threading is involved, so repeated
// runs are bit-identical.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nvodmr/constants.hpp"
#include "nvodmr/csv.hpp"
#include "nvodmr/excitation.hpp"
#include "nvodmr/sampling.hpp"
#include "nvodmr/spectrum.hpp"

namespace nvodmr {

enum class AxesMode {
    kAllFour,     // with a field: four axis sub-ensembles, weight 1/4 each
    kSingleAxis,  // only axis_index (used for the arbitrary-direction peak mode)
};

struct SimulationConfig {
    double freq_start_mhz = 2845.0;
    double freq_stop_mhz = 2895.0;
    int n_points = 501;
    int n_samples = 10000;             // Monte Carlo centers per axis
    double lambda_eff_mhz = 0.29;      // effective drive strength lambda'
    std::optional<FieldVector> field;  // absent = zero applied field
    AxesMode axes_mode = AxesMode::kAllFour;
    int axis_index = 0;
    double temperature_offset_k = 0.0;
    double contrast = 0.2;
    double baseline = 1.0;
    bool normalize_to_peak = true;
    PhysicalConstants constants{};

    void validate() const {
        auto fail = [](const char* what) {
            throw std::invalid_argument(std::string("SimulationConfig: ") + what);
        };
        constants.validate();
        if (!(freq_start_mhz < freq_stop_mhz)) fail("freq_start_mhz must be < freq_stop_mhz");
        if (!(std::isfinite(freq_start_mhz) && std::isfinite(freq_stop_mhz)))
            fail("frequency bounds must be finite");
        if (n_points < 2) fail("n_points must be >= 2");
        if (n_samples < 1) fail("n_samples must be >= 1");
        if (!(lambda_eff_mhz >= 0.0)) fail("lambda_eff_mhz must be >= 0");
        if (!(contrast > 0.0 && contrast <= 1.0)) fail("contrast must lie in (0, 1]");
        if (!std::isfinite(baseline)) fail("baseline must be finite");
        if (!std::isfinite(temperature_offset_k)) fail("temperature_offset_k must be finite");
        if (axis_index < 0 || axis_index > 3) fail("axis_index must be in [0, 3]");
        if (field) {
            if (!(std::isfinite(field->bx_mt) && std::isfinite(field->by_mt) &&
                  std::isfinite(field->bz_mt)))
                fail("field components must be finite");
        }
    }

    std::vector<double> frequency_grid() const {
        std::vector<double> freqs(static_cast<std::size_t>(n_points));
        const double step = (freq_stop_mhz - freq_start_mhz) / (n_points - 1);
        for (int i = 0; i < n_points; ++i) freqs[static_cast<std::size_t>(i)] = freq_start_mhz + i * step;
        return freqs;
    }

    // Canonical serialization for provenance hashing.
    std::string serialize(const NoiseParams& noise) const {
        std::string s;
        auto add = [&s](const char* key, double v) {
            s += key;
            s += '=';
            s += format_double(v);
            s += ';';
        };
        add("freq_start_mhz", freq_start_mhz);
        add("freq_stop_mhz", freq_stop_mhz);
        add("n_points", static_cast<double>(n_points));
        add("n_samples", static_cast<double>(n_samples));
        add("lambda_eff_mhz", lambda_eff_mhz);
        if (field) {
            add("bx_mt", field->bx_mt);
            add("by_mt", field->by_mt);
            add("bz_mt", field->bz_mt);
        } else {
            s += "field=none;";
        }
        s += axes_mode == AxesMode::kAllFour ? "axes=all;" : "axes=single;";
        add("axis_index", static_cast<double>(axis_index));
        add("temperature_offset_k", temperature_offset_k);
        add("contrast", contrast);
        add("baseline", baseline);
        s += normalize_to_peak ? "normalize=1;" : "normalize=0;";
        add("d0_mhz", constants.d0_mhz);
        add("ct_mhz_per_k", constants.ct_mhz_per_k);
        add("ce_perp", constants.ce_perp_mhz_per_v_um);
        add("ce_par", constants.ce_par_mhz_per_v_um);
        add("ge_mub", constants.ge_mub_mhz_per_mt);
        add("gamma_mhz", noise.gamma_mhz);
        add("db_mhz", noise.db_mhz);
        add("de_mhz", noise.de_mhz);
        add("hyperfine_split_mhz", noise.hyperfine_split_mhz);
        add("z_strain_factor", noise.z_strain_factor);
        return s;
    }
};

// Raw ensemble-mean excitation with per-point Monte Carlo standard error
// (standard deviation of the mean over per-center responses).
struct MeanExcitation {
    std::vector<double> freqs_mhz;
    std::vector<double> values;
    std::vector<double> std_errors;
};

namespace detail {

// Static Zeeman projections in scope, deduplicated with multiplicities.
// The simulator itself draws an independent ensemble per axis and cannot
// merge degenerate axes, but the fitter's quadrature model evaluates one
// shared point set against every axis and uses this plan to collapse
// duplicate projections (e.g. an exactly [001]-aligned field) into one
// kernel pass.
struct AxisGroup {
    double static_j_mhz;
    double multiplicity;
};

struct AxisPlan {
    std::vector<AxisGroup> groups;
    double n_axes;  // total weight, 1 or 4
};

inline AxisPlan axis_plan(const SimulationConfig& cfg) {
    AxisPlan plan;
    std::array<double, 4> proj{0.0, 0.0, 0.0, 0.0};
    if (cfg.field)
        proj = project_field(*cfg.field, cfg.constants.ge_mub_mhz_per_mt);
    if (cfg.axes_mode == AxesMode::kSingleAxis) {
        plan.groups.push_back({proj[static_cast<std::size_t>(cfg.axis_index)], 1.0});
        plan.n_axes = 1.0;
        return plan;
    }
    for (double p : proj) {
        auto it = std::find_if(plan.groups.begin(), plan.groups.end(),
                               [p](const AxisGroup& g) { return g.static_j_mhz == p; });
        if (it == plan.groups.end())
            plan.groups.push_back({p, 1.0});
        else
            it->multiplicity += 1.0;
    }
    plan.n_axes = 4.0;
    return plan;
}

// Axes participating in a run, with their static Zeeman projections and
// physical axis indices (the latter select RNG substreams).
struct AxisScope {
    std::array<double, 4> static_j_mhz;
    std::array<std::size_t, 4> axis;
    std::size_t count;
};

inline AxisScope axis_scope(const SimulationConfig& cfg) {
    std::array<double, 4> proj{0.0, 0.0, 0.0, 0.0};
    if (cfg.field)
        proj = project_field(*cfg.field, cfg.constants.ge_mub_mhz_per_mt);
    AxisScope scope{};
    if (cfg.axes_mode == AxesMode::kSingleAxis) {
        const auto a = static_cast<std::size_t>(cfg.axis_index);
        scope.static_j_mhz[0] = proj[a];
        scope.axis[0] = a;
        scope.count = 1;
        return scope;
    }
    for (std::size_t a = 0; a < 4; ++a) {
        scope.static_j_mhz[a] = proj[a];
        scope.axis[a] = a;
    }
    scope.count = 4;
    return scope;
}

// Accumulate nSamples independent centers per axis for center counters in
// [first, first + count), summing each (axis, center) response and its
// square. Every axis gets its own draws; the substream index interleaves as
// 4*counter + axis so that an N-sample run is exactly the prefix of a
// 2N-sample run (the convergence check relies on this) and a single-axis
// run reuses the same draws that axis sees in a four-axis run. Because
// sample_center consumes its stream identically for any staticJ, runs that
// differ only in the applied field share all their randomness.
inline void accumulate_excitation(const SimulationConfig& cfg, const NoiseParams& noise,
                                  std::uint64_t seed, std::uint64_t first,
                                  std::uint64_t count, const std::vector<double>& freqs,
                                  std::vector<double>& sum, std::vector<double>& sum_sq) {
    const AxisScope scope = axis_scope(cfg);
    const double base_d = zfs_frequency_mhz(cfg.temperature_offset_k, 0.0, cfg.constants);
    const double gamma = noise.gamma_mhz;
    const double g2 = gamma * gamma;
    const double scale = cfg.lambda_eff_mhz * cfg.lambda_eff_mhz;
    const std::size_t n = freqs.size();

    for (std::uint64_t c = 0; c < count; ++c) {
        for (std::size_t k = 0; k < scope.count; ++k) {
            RandomStream stream(seed, (first + c) * 4 + scope.axis[k]);
            const CenterSample s =
                sample_center(noise, base_d, scope.static_j_mhz[k], stream);
            const double wb = s.d_mhz - s.e1_mhz;
            const double wd = s.d_mhz + s.e1_mhz;
            const double jsq = s.j_mhz * s.j_mhz + s.e2_mhz * s.e2_mhz;
            const double g2pj = g2 + jsq;
            const double* f = freqs.data();
            for (std::size_t i = 0; i < n; ++i) {
                const double xb = f[i] - wb;
                const double xd = f[i] - wd;
                const double re = xb * xd - g2pj;
                const double im = gamma * (xb + xd);
                const double v = scale * ((xd * xd + g2pj) / (re * re + im * im));
                sum[i] += v;
                sum_sq[i] += v * v;
            }
        }
    }
}

struct ExcitationStats {
    std::vector<double> mean;
    std::vector<double> std_error;
};

inline ExcitationStats finish_stats(const std::vector<double>& sum,
                                    const std::vector<double>& sum_sq,
                                    std::uint64_t count) {
    const std::size_t n = sum.size();
    ExcitationStats out;
    out.mean.resize(n);
    out.std_error.assign(n, 0.0);
    const double cn = static_cast<double>(count);
    for (std::size_t i = 0; i < n; ++i) {
        out.mean[i] = sum[i] / cn;
        if (count > 1) {
            const double var = (sum_sq[i] - cn * out.mean[i] * out.mean[i]) / (cn - 1.0);
            out.std_error[i] = std::sqrt(std::max(var, 0.0) / cn);
        }
    }
    return out;
}

// Signal mapping: baseline - contrast * E (optionally peak-normalized). A
// flat zero excitation (lambda' = 0) maps to the bare baseline.
inline std::vector<double> map_to_signal(const SimulationConfig& cfg,
                                         const std::vector<double>& excitation,
                                         double* scale_out = nullptr) {
    double scale = cfg.contrast;
    if (cfg.normalize_to_peak) {
        const double peak =
            *std::max_element(excitation.begin(), excitation.end());
        scale = peak > 0.0 ? cfg.contrast / peak : 0.0;
    }
    std::vector<double> signal(excitation.size());
    for (std::size_t i = 0; i < excitation.size(); ++i)
        signal[i] = cfg.baseline - scale * excitation[i];
    if (scale_out) *scale_out = scale;
    return signal;
}

}  // namespace detail

inline MeanExcitation simulate_mean_excitation(const SimulationConfig& cfg,
                                               const NoiseParams& noise,
                                               std::uint64_t seed) {
    cfg.validate();
    noise.validate();
    MeanExcitation out;
    out.freqs_mhz = cfg.frequency_grid();
    std::vector<double> sum(out.freqs_mhz.size(), 0.0);
    std::vector<double> sum_sq(out.freqs_mhz.size(), 0.0);
    detail::accumulate_excitation(cfg, noise, seed, 0,
                                  static_cast<std::uint64_t>(cfg.n_samples),
                                  out.freqs_mhz, sum, sum_sq);
    const std::uint64_t observations =
        static_cast<std::uint64_t>(cfg.n_samples) * detail::axis_scope(cfg).count;
    auto stats = detail::finish_stats(sum, sum_sq, observations);
    out.values = std::move(stats.mean);
    out.std_errors = std::move(stats.std_error);
    return out;
}

inline Spectrum simulate_spectrum(const SimulationConfig& cfg, const NoiseParams& noise,
                                  std::uint64_t seed) {
    const MeanExcitation e = simulate_mean_excitation(cfg, noise, seed);
    Spectrum s;
    s.freqs_mhz = e.freqs_mhz;
    s.values = detail::map_to_signal(cfg, e.values);
    s.meta.seed = seed;
    s.meta.config_hash = fnv1a_hash(cfg.serialize(noise));
    s.validate();
    return s;
}

// Spectrum plus its per-point Monte Carlo standard errors mapped into the
// same signal units (useful for statistical comparisons of two runs).
struct SpectrumWithErrors {
    Spectrum spectrum;
    std::vector<double> std_errors;
};

inline SpectrumWithErrors simulate_spectrum_with_errors(const SimulationConfig& cfg,
                                                        const NoiseParams& noise,
                                                        std::uint64_t seed) {
    const MeanExcitation e = simulate_mean_excitation(cfg, noise, seed);
    SpectrumWithErrors out;
    out.spectrum.freqs_mhz = e.freqs_mhz;
    double scale = 0.0;
    out.spectrum.values = detail::map_to_signal(cfg, e.values, &scale);
    out.spectrum.meta.seed = seed;
    out.spectrum.meta.config_hash = fnv1a_hash(cfg.serialize(noise));
    out.std_errors.resize(e.std_errors.size());
    for (std::size_t i = 0; i < e.std_errors.size(); ++i)
        out.std_errors[i] = std::abs(scale) * e.std_errors[i];
    out.spectrum.validate();
    return out;
}

// Monte Carlo self-consistency measure: relative RMS difference between the
// nSamples run and a 2*nSamples run, both mapped to signal space. The
// doubled run is evaluated as the average of two disjoint half-ensembles
// (center counters [0, N) and [N, 2N)); this is the same ensemble a 2N run
// draws and lets the fully degenerate (zero-width, zero-hyperfine) case
// cancel to exactly zero. The result is normalized by the doubled run's
// dynamic range.
inline double convergence_check(const SimulationConfig& cfg, const NoiseParams& noise,
                                std::uint64_t seed) {
    cfg.validate();
    noise.validate();
    const auto freqs = cfg.frequency_grid();
    const std::size_t n = freqs.size();
    const auto count = static_cast<std::uint64_t>(cfg.n_samples) *
                       detail::axis_scope(cfg).count;
    std::vector<double> sum_a(n, 0.0), sq_a(n, 0.0), sum_b(n, 0.0), sq_b(n, 0.0);
    detail::accumulate_excitation(cfg, noise, seed, 0,
                                  static_cast<std::uint64_t>(cfg.n_samples), freqs,
                                  sum_a, sq_a);
    detail::accumulate_excitation(cfg, noise, seed,
                                  static_cast<std::uint64_t>(cfg.n_samples),
                                  static_cast<std::uint64_t>(cfg.n_samples), freqs,
                                  sum_b, sq_b);
    const auto stats_a = detail::finish_stats(sum_a, sq_a, count);
    std::vector<double> mean_ab(n);
    for (std::size_t i = 0; i < n; ++i)
        mean_ab[i] = (stats_a.mean[i] + sum_b[i] / static_cast<double>(count)) / 2.0;
    const auto sig_a = detail::map_to_signal(cfg, stats_a.mean);
    const auto sig_ab = detail::map_to_signal(cfg, mean_ab);
    double rms = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = sig_a[i] - sig_ab[i];
        rms += d * d;
    }
    rms = std::sqrt(rms / static_cast<double>(n));
    const auto [lo, hi] = std::minmax_element(sig_ab.begin(), sig_ab.end());
    const double range = *hi - *lo;
    return range > 0.0 ? rms / range : rms;
}

// Grid suggestion used by the CLI when a config omits the frequency axis:
// the default window for zero field, widened to cover the outermost Zeeman
// resonance plus margin when a field is applied.
struct GridSpec {
    double start_mhz;
    double stop_mhz;
    int n_points;
};

inline GridSpec suggest_grid(const std::optional<FieldVector>& field,
                             double temperature_offset_k,
                             const PhysicalConstants& consts = kDefaultConstants) {
    const double d = zfs_frequency_mhz(temperature_offset_k, 0.0, consts);
    if (!field) return {d - 25.685, d + 24.315, 501};  // 2845..2895 at defaults
    const auto proj = project_field(*field, consts.ge_mub_mhz_per_mt);
    double reach = 0.0;
    for (double p : proj) reach = std::max(reach, std::abs(p));
    const double half_span = reach + 25.0;
    const int points = std::clamp(static_cast<int>(std::lround(2.0 * half_span / 0.1)) + 1,
                                  501, 4001);
    return {d - half_span, d + half_span, points};
}

}  // namespace nvodmr
