#pragma once

// Noise-parameter estimation from measured spectra. The protocol is staged:
// gamma from the zero-field dip shape (narrow window around the center,
// where the dip dominates and the other widths barely matter), dB from the
// in-field line width, dE from the full zero-field spectrum, then one joint
// refinement over all three widths.
//
// Contrast and baseline are affine nuisance parameters. For any fixed set
// of widths the optimal (contrast, baseline) has a closed least-squares
// form, so the simplex only ever searches width space and the nuisance pair
// is profiled out exactly at every evaluation. Widths are searched in log10
// space, which enforces positivity and makes the simplex tolerance a
// relative one.
//
// The objective simulates with a fixed seed (common random numbers), so it
// is a deterministic function of the parameters and the whole fit is
// reproducible bit for bit. Because the model replays the simulator's exact
// draw layout, fitting a simulated spectrum with the same seed and sample
// count recovers the generating widths up to optimizer tolerance; with an
// independent seed the misfit floor is the sum of the two Monte Carlo noise
// realizations instead, and wide-noise cases then need far more samples for
// comparable accuracy.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nvodmr/csv.hpp"
#include "nvodmr/nelder_mead.hpp"
#include "nvodmr/simulate.hpp"

namespace nvodmr {

class FitError : public std::runtime_error {
public:
    FitError(std::string stage, const std::string& message)
        : std::runtime_error(stage + ": " + message), stage_(std::move(stage)) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

struct ExperimentalSpectrum {
    std::vector<double> freqs_mhz;
    std::vector<double> values;
    std::string label;
    // Min-max preprocessing record: values = (raw - raw_min)/(raw_max - raw_min)
    // when rescaled is true.
    bool rescaled = false;
    double raw_min = 0.0;
    double raw_max = 0.0;

    void validate() const {
        if (freqs_mhz.size() != values.size())
            throw std::invalid_argument("spectrum: freqs/values length mismatch");
        if (freqs_mhz.size() < 20)
            throw std::invalid_argument("spectrum: needs at least 20 points, got " +
                                        std::to_string(freqs_mhz.size()));
        for (std::size_t i = 0; i < freqs_mhz.size(); ++i) {
            if (!std::isfinite(freqs_mhz[i]) || !std::isfinite(values[i]))
                throw std::invalid_argument("spectrum: non-finite entry at row " +
                                            std::to_string(i + 1));
            if (i > 0 && !(freqs_mhz[i] > freqs_mhz[i - 1]))
                throw std::invalid_argument(
                    "spectrum: frequencies not strictly increasing at row " +
                    std::to_string(i + 1));
        }
    }
};

// Read a two-column CSV (freq_mhz, intensity) and min-max rescale the
// intensities to [0, 1] (skipped for a degenerate flat file; the fitter
// rejects those later with a clear message).
inline ExperimentalSpectrum load_spectrum(const std::string& path) {
    const auto rows = read_two_column_csv(path);
    ExperimentalSpectrum s;
    s.label = path;
    s.freqs_mhz.reserve(rows.size());
    s.values.reserve(rows.size());
    for (const auto& [f, v] : rows) {
        s.freqs_mhz.push_back(f);
        s.values.push_back(v);
    }
    s.validate();
    const auto [lo, hi] = std::minmax_element(s.values.begin(), s.values.end());
    s.raw_min = *lo;
    s.raw_max = *hi;
    if (*hi > *lo) {
        const double inv = 1.0 / (*hi - *lo);
        for (double& v : s.values) v = (v - s.raw_min) * inv;
        s.rescaled = true;
    }
    return s;
}

struct FitOptions {
    // Model ensemble inside the objective. Defaults match the simulator's
    // defaults on purpose: a synthetic spectrum fitted with the seed and
    // sample count it was generated with has an exact misfit zero at the
    // generating widths, so the round trip tests the estimation machinery
    // itself rather than Monte Carlo luck. For real data (or deliberately
    // independent noise) the seed is arbitrary and only fixes the model's
    // quadrature realization.
    int n_samples = 10000;
    std::uint64_t seed = 42;
    int restarts = 5;             // log-spaced width restarts per stage
    int cycles = 1;               // passes through the staged protocol
    NelderMeadOptions simplex{};  // tolerance 1e-4 (relative in width)
    bool joint_refine = true;
    double joint_step = 0.2;      // initial simplex step of the joint pass, log10 units
    int joint_rounds = 3;         // simplex re-inflations within the joint pass
    double gamma_window_mhz = 3.0;  // half-width of the gamma-stage fit window
    double lambda_eff_mhz = 0.29;
    double temperature_offset_k = 0.0;
    PhysicalConstants constants{};
    // Search bounds for log10(width/MHz). The lower bound lets degenerate
    // widths collapse to effectively zero without log-space blowup.
    double log10_width_min = -6.0;
    double log10_width_max = 4.0;
};

struct StageEstimate {
    std::string stage;
    NoiseParams noise;
    double contrast = 0.0;
    double baseline = 0.0;
    double residual = 0.0;  // RMS misfit on the stage's own grid
    int evaluations = 0;
};

struct FitResult {
    NoiseParams noise;
    double contrast = 0.0;  // zero-field spectrum nuisance values
    double baseline = 0.0;
    double residual = 0.0;  // combined RMS over both spectra
    std::vector<StageEstimate> stage_trace;
    std::uint64_t seed = 0;
};

namespace detail {

// Unit-width noise draws for one (center, axis) slot, cached so objective
// evaluations at different widths reuse the same underlying randomness.
// Multiplying a cached tan value by a width reproduces lorentzian_sample
// bit for bit, so with matching seed and sample count the objective's model
// curve is bitwise identical to the simulator's and a fit of simulated data
// has an exact zero of the misfit at the generating parameters.
struct CachedDraws {
    double t_dshift;
    double t_e1;
    double t_e2;
    double t_field;
    double hyper_sign;  // -1, 0, +1
};

// Mirrors the simulator's draw layout: center counter c, axis k in scope
// order, substream 4c + axis, tan draws in the frozen per-center order.
inline std::vector<CachedDraws> cache_center_draws(int n_samples,
                                                   const AxisScope& scope,
                                                   std::uint64_t seed) {
    std::vector<CachedDraws> draws;
    draws.reserve(static_cast<std::size_t>(n_samples) * scope.count);
    for (std::uint64_t c = 0; c < static_cast<std::uint64_t>(n_samples); ++c) {
        for (std::size_t k = 0; k < scope.count; ++k) {
            RandomStream stream(seed, c * 4 + scope.axis[k]);
            auto tan_draw = [&stream] {
                return std::tan(std::numbers::pi * (stream.next_unit_open() - 0.5));
            };
            CachedDraws d;
            d.t_dshift = tan_draw();
            d.t_e1 = tan_draw();
            d.t_e2 = tan_draw();
            d.t_field = tan_draw();
            d.hyper_sign = static_cast<double>(stream.next_below(3)) - 1.0;
            draws.push_back(d);
        }
    }
    return draws;
}

// Misfit machine for one spectrum: simulates the model on the data's own
// frequency grid (optionally restricted to a window) and profiles out the
// affine nuisance pair per evaluation.
class SpectrumObjective {
public:
    SpectrumObjective(const ExperimentalSpectrum& data,
                      std::optional<FieldVector> field, const FitOptions& opts,
                      std::optional<double> window_half_mhz,
                      const std::string& stage)
        : opts_(opts), stage_(stage) {
        const double d0 =
            zfs_frequency_mhz(opts.temperature_offset_k, 0.0, opts.constants);
        base_d_ = d0;
        for (std::size_t i = 0; i < data.freqs_mhz.size(); ++i) {
            if (window_half_mhz &&
                std::abs(data.freqs_mhz[i] - d0) > *window_half_mhz)
                continue;
            freqs_.push_back(data.freqs_mhz[i]);
            y_.push_back(data.values[i]);
        }
        if (freqs_.size() < 5)
            throw FitError(stage, "fit window covers fewer than 5 data points");
        SimulationConfig grid_cfg;  // reuse the axis bookkeeping of the simulator
        grid_cfg.field = field;
        grid_cfg.axes_mode = AxesMode::kAllFour;
        grid_cfg.constants = opts.constants;
        scope_ = axis_scope(grid_cfg);
        draws_ = cache_center_draws(opts.n_samples, scope_, opts.seed);
    }

    std::size_t size() const { return freqs_.size(); }

    // Mean model excitation at the given widths (raw, before the affine
    // map). The loop replays accumulate_excitation with the cached draws,
    // keeping the same expression trees and accumulation order so the result
    // matches the simulator bit for bit.
    std::vector<double> model_excitation(const NoiseParams& noise) const {
        const std::size_t n = freqs_.size();
        std::vector<double> sum(n, 0.0);
        const double gamma = noise.gamma_mhz;
        const double g2 = gamma * gamma;
        const double hw_d = noise.de_mhz * noise.z_strain_factor;
        const double scale = opts_.lambda_eff_mhz * opts_.lambda_eff_mhz;
        for (std::size_t slot = 0; slot < draws_.size(); ++slot) {
            const CachedDraws& t = draws_[slot];
            const double d = base_d_ + hw_d * t.t_dshift;
            const double e1 = noise.de_mhz * t.t_e1;
            const double e2 = noise.de_mhz * t.t_e2;
            double j = scope_.static_j_mhz[slot % scope_.count] + noise.db_mhz * t.t_field;
            if (noise.hyperfine_split_mhz > 0.0)
                j += t.hyper_sign * noise.hyperfine_split_mhz;
            const double wb = d - e1;
            const double wd = d + e1;
            const double jsq = j * j + e2 * e2;
            const double g2pj = g2 + jsq;
            const double* f = freqs_.data();
            for (std::size_t i = 0; i < n; ++i) {
                const double xb = f[i] - wb;
                const double xd = f[i] - wd;
                const double re = xb * xd - g2pj;
                const double im = gamma * (xb + xd);
                const double v = scale * ((xd * xd + g2pj) / (re * re + im * im));
                sum[i] += v;
            }
        }
        const double cn = static_cast<double>(draws_.size());
        for (double& v : sum) v /= cn;
        return sum;
    }

    // Profiled sum of squared residuals: optimal (contrast, baseline) for
    // the model y ~ baseline - contrast*E in closed form, contrast clamped
    // to be non-negative.
    double profiled_sse(const NoiseParams& noise, double* contrast_out = nullptr,
                        double* baseline_out = nullptr) const {
        const std::vector<double> e = model_excitation(noise);
        const std::size_t n = e.size();
        double me = 0.0, my = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            me += e[i];
            my += y_[i];
        }
        me /= static_cast<double>(n);
        my /= static_cast<double>(n);
        double see = 0.0, sey = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double de = e[i] - me;
            see += de * de;
            sey += de * (y_[i] - my);
        }
        double c = see > 0.0 ? -sey / see : 0.0;
        if (c < 0.0) c = 0.0;
        const double b = my + c * me;
        double sse = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = y_[i] - (b - c * e[i]);
            sse += r * r;
        }
        if (contrast_out) *contrast_out = c;
        if (baseline_out) *baseline_out = b;
        return sse;
    }

    double rms(double sse) const {
        return std::sqrt(sse / static_cast<double>(freqs_.size()));
    }

    const std::string& stage() const { return stage_; }

private:
    FitOptions opts_;
    std::string stage_;
    double base_d_ = 0.0;
    std::vector<double> freqs_;
    std::vector<double> y_;
    AxisScope scope_{};
    std::vector<CachedDraws> draws_;
};

inline void check_dynamic_range(const ExperimentalSpectrum& s, const std::string& stage) {
    const auto [lo, hi] = std::minmax_element(s.values.begin(), s.values.end());
    double max_abs = 1.0;
    for (double v : s.values) max_abs = std::max(max_abs, std::abs(v));
    if (*hi - *lo < 1e-3 * max_abs)
        throw FitError(stage, "flat spectrum: dynamic range below 1e-3 of scale");
}

// Multi-start simplex over log10 widths. `apply` writes the searched widths
// into a NoiseParams; `x0` is the log10 of the initial widths. Restarts are
// log-spaced around x0 (the whole start simplex shifted), merged by lowest
// objective with first-index tiebreak.
struct SearchOutcome {
    std::vector<double> log_widths;
    double sse = 0.0;
    int evaluations = 0;
};

template <typename Apply>
inline SearchOutcome multi_start_search(
    const std::vector<const SpectrumObjective*>& objectives,
    const std::vector<double>& x0, const FitOptions& opts, Apply apply,
    const NoiseParams& base, const std::string& stage, bool spread_restarts) {
    auto clamped = [&opts](double x) {
        return std::clamp(x, opts.log10_width_min, opts.log10_width_max);
    };
    auto objective = [&](const std::vector<double>& x) {
        NoiseParams noise = base;
        std::vector<double> widths(x.size());
        for (std::size_t i = 0; i < x.size(); ++i)
            widths[i] = std::pow(10.0, clamped(x[i]));
        apply(noise, widths);
        double total = 0.0;
        for (const SpectrumObjective* obj : objectives)
            total += obj->profiled_sse(noise);
        return total;
    };

    SearchOutcome best;
    bool have_best = false;
    bool any_converged = false;
    const int restarts = spread_restarts ? std::max(1, opts.restarts) : 1;
    for (int r = 0; r < restarts; ++r) {
        // Multipliers 10^{-1}, 10^{-0.5}, 1, 10^{0.5}, 10 for five restarts.
        const double offset =
            restarts == 1 ? 0.0
                          : -1.0 + 2.0 * static_cast<double>(r) /
                                       static_cast<double>(restarts - 1);
        std::vector<double> start(x0.size());
        for (std::size_t i = 0; i < x0.size(); ++i) start[i] = clamped(x0[i] + offset);
        const NelderMeadResult res = nelder_mead(objective, start, opts.simplex);
        any_converged = any_converged || res.converged;
        if (!res.converged) continue;
        if (!have_best || res.fmin < best.sse) {
            best.log_widths = res.x;
            best.sse = res.fmin;
            have_best = true;
        }
        best.evaluations += res.evaluations;
    }
    if (!any_converged)
        throw FitError(stage, "optimizer did not converge within " +
                                  std::to_string(opts.simplex.max_iterations) +
                                  " iterations in any restart");
    for (double& x : best.log_widths) x = clamped(x);
    return best;
}

}  // namespace detail

// Stage 1: homogeneous broadening from the dip shape. Only data within
// +-gamma_window_mhz of the center frequency participates; dB and dE stay
// at their init values.
inline StageEstimate fit_gamma(const ExperimentalSpectrum& zero_field,
                               const NoiseParams& init, const FitOptions& opts = {}) {
    const std::string stage = "gamma stage";
    zero_field.validate();
    init.validate();
    detail::check_dynamic_range(zero_field, stage);
    const double d0 = zfs_frequency_mhz(opts.temperature_offset_k, 0.0, opts.constants);
    if (zero_field.freqs_mhz.front() > d0 || zero_field.freqs_mhz.back() < d0)
        throw FitError(stage, "spectrum does not cover the central feature at " +
                                  format_double(d0) + " MHz");
    detail::SpectrumObjective obj(zero_field, std::nullopt, opts,
                                  opts.gamma_window_mhz, stage);
    const auto outcome = detail::multi_start_search(
        {&obj}, {std::log10(init.gamma_mhz)}, opts,
        [](NoiseParams& n, const std::vector<double>& w) { n.gamma_mhz = w[0]; }, init,
        stage, true);
    StageEstimate est;
    est.stage = "gamma";
    est.noise = init;
    est.noise.gamma_mhz = std::pow(10.0, outcome.log_widths[0]);
    est.evaluations = outcome.evaluations;
    est.residual = obj.rms(obj.profiled_sse(est.noise, &est.contrast, &est.baseline));
    return est;
}

// Stage 2: inhomogeneous field width from the in-field spectrum; gamma and
// dE fixed at `known`.
inline StageEstimate fit_inhomogeneous_field(const ExperimentalSpectrum& in_field,
                                             const FieldVector& field,
                                             const NoiseParams& known,
                                             const FitOptions& opts = {}) {
    const std::string stage = "field stage";
    in_field.validate();
    known.validate();
    detail::check_dynamic_range(in_field, stage);
    const double d0 = zfs_frequency_mhz(opts.temperature_offset_k, 0.0, opts.constants);
    const auto proj = project_field(field, opts.constants.ge_mub_mhz_per_mt);
    double reach = 0.0;
    for (double p : proj) reach = std::max(reach, std::abs(p));
    if (in_field.freqs_mhz.front() > d0 - reach || in_field.freqs_mhz.back() < d0 + reach)
        throw FitError(stage,
                       "insufficient span: spectrum must cover both split peak groups "
                       "(needs " +
                           format_double(d0 - reach) + " .. " + format_double(d0 + reach) +
                           " MHz)");
    detail::SpectrumObjective obj(in_field, field, opts, std::nullopt, stage);
    const auto outcome = detail::multi_start_search(
        {&obj}, {std::log10(std::max(known.db_mhz, 1e-3))}, opts,
        [](NoiseParams& n, const std::vector<double>& w) { n.db_mhz = w[0]; }, known,
        stage, true);
    StageEstimate est;
    est.stage = "field";
    est.noise = known;
    est.noise.db_mhz = std::pow(10.0, outcome.log_widths[0]);
    est.evaluations = outcome.evaluations;
    est.residual = obj.rms(obj.profiled_sse(est.noise, &est.contrast, &est.baseline));
    return est;
}

// Stage 3: strain width from the full zero-field grid; gamma and dB fixed.
inline StageEstimate fit_strain(const ExperimentalSpectrum& zero_field,
                                const NoiseParams& known, const FitOptions& opts = {}) {
    const std::string stage = "strain stage";
    zero_field.validate();
    known.validate();
    detail::check_dynamic_range(zero_field, stage);
    detail::SpectrumObjective obj(zero_field, std::nullopt, opts, std::nullopt, stage);
    const auto outcome = detail::multi_start_search(
        {&obj}, {std::log10(std::max(known.de_mhz, 1e-3))}, opts,
        [](NoiseParams& n, const std::vector<double>& w) { n.de_mhz = w[0]; }, known,
        stage, true);
    StageEstimate est;
    est.stage = "strain";
    est.noise = known;
    est.noise.de_mhz = std::pow(10.0, outcome.log_widths[0]);
    est.evaluations = outcome.evaluations;
    est.residual = obj.rms(obj.profiled_sse(est.noise, &est.contrast, &est.baseline));
    return est;
}

// Full staged protocol plus one joint refinement over all three widths.
// Each stage holds the not-yet-estimated widths at whatever the init guess
// says, so a badly wrong guess can distort the first pass; a second pass
// through the cycle (started from the first pass's result, without the
// restart spread) removes that coupling before the joint polish. The joint
// pass is kept only if it does not worsen the combined misfit, so the
// objective-decrease contract holds.
inline FitResult fit_all(const ExperimentalSpectrum& zero_field,
                         const ExperimentalSpectrum& in_field, const FieldVector& field,
                         const NoiseParams& init, const FitOptions& opts = {}) {
    FitResult result;
    result.seed = opts.seed;

    detail::SpectrumObjective zero_obj(zero_field, std::nullopt, opts, std::nullopt,
                                       "joint stage");
    detail::SpectrumObjective field_obj(in_field, field, opts, std::nullopt,
                                        "joint stage");
    const auto combined_rms = [&](const NoiseParams& noise, double* c0 = nullptr,
                                  double* b0 = nullptr) {
        const double sse =
            zero_obj.profiled_sse(noise, c0, b0) + field_obj.profiled_sse(noise);
        return std::sqrt(sse / static_cast<double>(zero_obj.size() + field_obj.size()));
    };

    StageEstimate at_init;
    at_init.stage = "init";
    at_init.noise = init;
    at_init.residual = combined_rms(init, &at_init.contrast, &at_init.baseline);
    result.stage_trace.push_back(at_init);

    NoiseParams current = init;
    for (int pass = 0; pass < std::max(1, opts.cycles); ++pass) {
        FitOptions pass_opts = opts;
        if (pass > 0) pass_opts.restarts = 1;  // refine from the previous pass
        const StageEstimate s1 = fit_gamma(zero_field, current, pass_opts);
        result.stage_trace.push_back(s1);
        const StageEstimate s2 =
            fit_inhomogeneous_field(in_field, field, s1.noise, pass_opts);
        result.stage_trace.push_back(s2);
        const StageEstimate s3 = fit_strain(zero_field, s2.noise, pass_opts);
        result.stage_trace.push_back(s3);
        current = s3.noise;
    }

    NoiseParams final_noise = current;
    if (opts.joint_refine) {
        // A staged width that collapsed toward zero carries no information
        // (the misfit is flat below the other widths), so lift the joint
        // start back into the identifiable region. The search space itself
        // keeps its full range.
        std::vector<double> x = {std::log10(std::max(final_noise.gamma_mhz, 0.05)),
                                 std::log10(std::max(final_noise.db_mhz, 0.05)),
                                 std::log10(std::max(final_noise.de_mhz, 0.05))};
        FitOptions joint_opts = opts;
        joint_opts.simplex.initial_step = opts.joint_step;
        StageEstimate joint;
        joint.stage = "joint";
        double best_sse = -1.0;
        // Plain simplex descent tends to collapse anisotropically in three
        // dimensions; re-inflating a fresh simplex at the incumbent best
        // point recovers the lost directions cheaply.
        for (int round = 0; round < std::max(1, opts.joint_rounds); ++round) {
            const auto outcome = detail::multi_start_search(
                {&zero_obj, &field_obj}, x, joint_opts,
                [](NoiseParams& n, const std::vector<double>& w) {
                    n.gamma_mhz = w[0];
                    n.db_mhz = w[1];
                    n.de_mhz = w[2];
                },
                final_noise, "joint stage", false);
            joint.evaluations += outcome.evaluations;
            const bool improved = best_sse < 0.0 || outcome.sse < best_sse * (1.0 - 1e-6);
            if (best_sse < 0.0 || outcome.sse < best_sse) {
                best_sse = outcome.sse;
                x = outcome.log_widths;
            }
            if (!improved) break;
        }
        NoiseParams joint_noise = final_noise;
        joint_noise.gamma_mhz = std::pow(10.0, x[0]);
        joint_noise.db_mhz = std::pow(10.0, x[1]);
        joint_noise.de_mhz = std::pow(10.0, x[2]);
        joint.noise = joint_noise;
        joint.residual = combined_rms(joint_noise, &joint.contrast, &joint.baseline);
        if (joint.residual <= combined_rms(final_noise)) {
            final_noise = joint_noise;
            result.stage_trace.push_back(joint);
        }
    }

    result.noise = final_noise;
    result.residual = combined_rms(final_noise, &result.contrast, &result.baseline);
    return result;
}

// Human-readable fit report.
inline void write_fit_report(const std::string& path, const FitResult& r) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << "noise parameter fit\n";
    out << "===================\n";
    out << "gamma_mhz    " << format_double(r.noise.gamma_mhz) << "\n";
    out << "db_mhz       " << format_double(r.noise.db_mhz) << "\n";
    out << "de_mhz       " << format_double(r.noise.de_mhz) << "\n";
    out << "contrast     " << format_double(r.contrast) << "\n";
    out << "baseline     " << format_double(r.baseline) << "\n";
    out << "residual     " << format_double(r.residual) << "\n";
    out << "seed         " << r.seed << "\n";
    out << "\nstage trace (stage, gamma_mhz, db_mhz, de_mhz, residual)\n";
    for (const StageEstimate& s : r.stage_trace) {
        out << "  " << s.stage << " " << format_double(s.noise.gamma_mhz) << " "
            << format_double(s.noise.db_mhz) << " " << format_double(s.noise.de_mhz)
            << " " << format_double(s.residual) << "\n";
    }
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

// Machine-readable key-value file (one `key value` pair per line).
inline void write_fit_keyvalues(const std::string& path, const FitResult& r) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << "gamma_mhz " << format_double(r.noise.gamma_mhz) << "\n";
    out << "db_mhz " << format_double(r.noise.db_mhz) << "\n";
    out << "de_mhz " << format_double(r.noise.de_mhz) << "\n";
    out << "contrast " << format_double(r.contrast) << "\n";
    out << "baseline " << format_double(r.baseline) << "\n";
    out << "residual " << format_double(r.residual) << "\n";
    out << "seed " << r.seed << "\n";
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace nvodmr
