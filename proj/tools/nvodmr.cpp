// Command-line front end: simulate ODMR spectra, fit noise parameters, sweep
// temperature sensitivity over NV concentration, and print field projections.
//
// Each command reads one JSON config file whose keys carry explicit units
// (freq_start_mhz, peak_field_mt, ...). Outputs are plain CSV / key-value
// text written through a temp-file-and-rename step, so a failed run never
// leaves a partial file behind. Every run is reproducible: the seed defaults
// to a fixed constant, outputs carry no timestamps, and rerunning with the
// same inputs produces byte-identical files.
//
// Exit codes: 0 success, 1 config or parameter validation error, 2 file I/O
// or input parsing error, 3 fit-stage failure.

#include <array>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "nvodmr/csv.hpp"
#include "nvodmr/fit.hpp"
#include "nvodmr/sampling.hpp"
#include "nvodmr/sensitivity.hpp"
#include "nvodmr/simulate.hpp"
#include "nvodmr/spectrum.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr const char* kToolVersion = "1.0.0";
constexpr std::uint64_t kDefaultSeed = 42;

constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;
constexpr int kExitFitStage = 3;

// Config-content problem: wrong type, unknown key, inconsistent fields.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// File-level problem: missing, unreadable, unwritable.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

bool g_verbose = false;

void note(const std::string& msg) {
    if (g_verbose) std::cerr << "nvodmr: " << msg << "\n";
}

// Strict reader over one JSON object. Every accepted key is marked used;
// finish() lists all unknown keys at once so a typo'd config fails with the
// full diagnosis instead of one key per run.
class ObjectReader {
public:
    ObjectReader(const json& node, std::string path)
        : node_(node), path_(std::move(path)) {
        if (!node_.is_object())
            throw ConfigError(path_ + ": expected a JSON object");
    }

    bool has(const std::string& key) const { return node_.contains(key); }

    double number(const std::string& key, double fallback) {
        if (!has(key)) return fallback;
        return require_number(key);
    }

    double require_number(const std::string& key) {
        const json& v = consume(key);
        if (!v.is_number())
            throw ConfigError(loc(key) + ": expected a number");
        return v.get<double>();
    }

    int integer(const std::string& key, int fallback) {
        if (!has(key)) return fallback;
        const json& v = consume(key);
        if (!v.is_number_integer())
            throw ConfigError(loc(key) + ": expected an integer");
        return v.get<int>();
    }

    bool boolean(const std::string& key, bool fallback) {
        if (!has(key)) return fallback;
        const json& v = consume(key);
        if (!v.is_boolean())
            throw ConfigError(loc(key) + ": expected true or false");
        return v.get<bool>();
    }

    std::string text(const std::string& key, std::string fallback) {
        if (!has(key)) return fallback;
        const json& v = consume(key);
        if (!v.is_string())
            throw ConfigError(loc(key) + ": expected a string");
        return v.get<std::string>();
    }

    std::array<double, 3> vec3(const std::string& key) {
        const json& v = consume(key);
        if (!v.is_array() || v.size() != 3 || !v[0].is_number() ||
            !v[1].is_number() || !v[2].is_number())
            throw ConfigError(loc(key) + ": expected an array of 3 numbers");
        return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
    }

    std::vector<double> number_list(const std::string& key) {
        const json& v = consume(key);
        if (!v.is_array())
            throw ConfigError(loc(key) + ": expected an array of numbers");
        std::vector<double> out;
        out.reserve(v.size());
        for (const json& item : v) {
            if (!item.is_number())
                throw ConfigError(loc(key) + ": expected an array of numbers");
            out.push_back(item.get<double>());
        }
        return out;
    }

    // Returns the nested object for `key` (caller wraps it in its own
    // ObjectReader); an absent key yields nullptr.
    const json* object(const std::string& key) {
        if (!has(key)) return nullptr;
        const json& v = consume(key);
        if (!v.is_object())
            throw ConfigError(loc(key) + ": expected a JSON object");
        return &v;
    }

    void finish() const {
        std::vector<std::string> unknown;
        for (const auto& item : node_.items())
            if (!used_.count(item.key())) unknown.push_back(item.key());
        if (unknown.empty()) return;
        std::string msg = path_ + ": unknown key";
        msg += unknown.size() > 1 ? "s: " : ": ";
        for (std::size_t i = 0; i < unknown.size(); ++i)
            msg += (i ? ", '" : "'") + unknown[i] + "'";
        throw ConfigError(msg);
    }

    std::string loc(const std::string& key) const { return path_ + "." + key; }

private:
    const json& consume(const std::string& key) {
        used_.insert(key);
        return node_.at(key);
    }

    const json& node_;
    std::string path_;
    std::set<std::string> used_;
};

json load_config(const std::string& path) {
    if (!fs::exists(path))
        throw IoError("config file '" + path + "' does not exist");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config file '" + path + "': " + e.what());
    }
}

// Deferred file outputs: each stage() hands back a temp path to write; only
// commit() moves everything into place. Going out of scope without commit
// deletes the temp files, so a run that dies mid-way leaves nothing partial.
class OutputSet {
public:
    ~OutputSet() {
        for (const auto& [tmp, final_path] : pending_) {
            std::error_code ec;
            fs::remove(tmp, ec);
        }
    }

    std::string stage(const std::string& final_path) {
        std::string tmp = final_path + ".tmp";
        pending_.emplace_back(tmp, final_path);
        return tmp;
    }

    void commit() {
        for (const auto& [tmp, final_path] : pending_) {
            std::error_code ec;
            fs::rename(tmp, final_path, ec);
            if (ec)
                throw IoError("cannot move '" + tmp + "' to '" + final_path +
                              "': " + ec.message());
        }
        pending_.clear();
    }

private:
    std::vector<std::pair<std::string, std::string>> pending_;
};

// Shared sub-schemas ------------------------------------------------------

nvodmr::NoiseParams read_noise(ObjectReader& cfg, const char* key) {
    nvodmr::NoiseParams noise;
    if (const json* node = cfg.object(key)) {
        ObjectReader r(*node, cfg.loc(key));
        noise.gamma_mhz = r.number("gamma_mhz", noise.gamma_mhz);
        noise.db_mhz = r.number("db_mhz", noise.db_mhz);
        noise.de_mhz = r.number("de_mhz", noise.de_mhz);
        noise.hyperfine_split_mhz =
            r.number("hyperfine_split_mhz", noise.hyperfine_split_mhz);
        noise.z_strain_factor = r.number("z_strain_factor", noise.z_strain_factor);
        r.finish();
    }
    return noise;
}

// Applied field: either an explicit vector in mT or the earth-field preset
// (fixed 0.045 mT magnitude, chosen direction). Returns nullopt when neither
// key is present and `required` is off.
std::optional<nvodmr::FieldVector> read_field(ObjectReader& cfg, bool required) {
    const bool has_vec = cfg.has("field_mt");
    const bool has_earth = cfg.has("earth_field_direction");
    if (has_vec && has_earth)
        throw ConfigError(cfg.loc("field_mt") +
                          ": give either field_mt or earth_field_direction, not both");
    if (has_vec) {
        const auto v = cfg.vec3("field_mt");
        return nvodmr::FieldVector{v[0], v[1], v[2]};
    }
    if (has_earth) {
        const auto v = cfg.vec3("earth_field_direction");
        return nvodmr::earth_field(v[0], v[1], v[2]);
    }
    if (required)
        throw ConfigError("config: field_mt (or earth_field_direction) is required");
    return std::nullopt;
}

std::uint64_t pick_seed(const std::optional<std::uint64_t>& flag_seed,
                        ObjectReader& cfg) {
    std::uint64_t seed = kDefaultSeed;
    if (cfg.has("seed")) {
        const double raw = cfg.require_number("seed");
        if (!(raw >= 0.0) || raw != std::floor(raw))
            throw ConfigError(cfg.loc("seed") + ": expected a non-negative integer");
        seed = static_cast<std::uint64_t>(raw);
    }
    if (flag_seed) seed = *flag_seed;  // the flag wins over the config
    return seed;
}

// simulate -----------------------------------------------------------------

int run_simulate(const std::string& config_path,
                 const std::optional<std::uint64_t>& flag_seed,
                 const std::string& out_path) {
    const json root = load_config(config_path);
    ObjectReader cfg(root, "config");

    const nvodmr::NoiseParams noise = read_noise(cfg, "noise");

    nvodmr::SimulationConfig sim;
    sim.field = read_field(cfg, false);
    sim.n_samples = cfg.integer("n_samples", sim.n_samples);
    sim.lambda_eff_mhz = cfg.number("lambda_eff_mhz", sim.lambda_eff_mhz);
    sim.temperature_offset_k =
        cfg.number("temperature_offset_k", sim.temperature_offset_k);
    sim.contrast = cfg.number("contrast", sim.contrast);
    sim.baseline = cfg.number("baseline", sim.baseline);
    sim.normalize_to_peak = cfg.boolean("normalize_to_peak", sim.normalize_to_peak);

    const std::string mode = cfg.text("axes_mode", "all");
    if (mode == "single")
        sim.axes_mode = nvodmr::AxesMode::kSingleAxis;
    else if (mode != "all")
        throw ConfigError(cfg.loc("axes_mode") + ": expected \"all\" or \"single\"");
    sim.axis_index = cfg.integer("axis_index", sim.axis_index);

    // The frequency grid is either given in full or derived from the field:
    // a partial specification is almost certainly a mistake, so reject it.
    const bool has_start = cfg.has("freq_start_mhz");
    const bool has_stop = cfg.has("freq_stop_mhz");
    const bool has_points = cfg.has("n_points");
    if (has_start != has_stop || has_start != has_points)
        throw ConfigError(
            "config: freq_start_mhz, freq_stop_mhz and n_points must be given "
            "together (or all omitted for an automatic grid)");
    if (has_start) {
        sim.freq_start_mhz = cfg.require_number("freq_start_mhz");
        sim.freq_stop_mhz = cfg.require_number("freq_stop_mhz");
        sim.n_points = cfg.integer("n_points", 0);
    } else {
        const nvodmr::GridSpec grid =
            nvodmr::suggest_grid(sim.field, sim.temperature_offset_k, sim.constants);
        sim.freq_start_mhz = grid.start_mhz;
        sim.freq_stop_mhz = grid.stop_mhz;
        sim.n_points = grid.n_points;
    }

    const std::uint64_t seed = pick_seed(flag_seed, cfg);
    cfg.finish();
    sim.validate();
    noise.validate();

    std::ostringstream grid_note;
    grid_note << "simulate: grid " << sim.freq_start_mhz << ".." << sim.freq_stop_mhz
              << " MHz, " << sim.n_points << " points, " << sim.n_samples
              << " samples per axis, seed " << seed;
    note(grid_note.str());

    const nvodmr::Spectrum spectrum = nvodmr::simulate_spectrum(sim, noise, seed);

    OutputSet outputs;
    nvodmr::write_spectrum_csv(outputs.stage(out_path), spectrum);
    {
        std::ofstream meta(outputs.stage(out_path + ".meta"), std::ios::binary);
        if (!meta) throw IoError("cannot open '" + out_path + ".meta' for writing");
        meta << "config_hash " << spectrum.meta.config_hash << "\n";
        meta << "seed " << spectrum.meta.seed << "\n";
        meta << "tool_version " << kToolVersion << "\n";
        if (!meta) throw IoError("write failed for '" + out_path + ".meta'");
    }
    outputs.commit();
    note("wrote " + out_path + " (" + std::to_string(spectrum.freqs_mhz.size()) +
         " rows) and " + out_path + ".meta");
    return 0;
}

// fit ------------------------------------------------------------------

int run_fit(const std::string& config_path, const std::string& zero_field_path,
            const std::string& in_field_path,
            const std::optional<std::uint64_t>& flag_seed,
            const std::string& out_path) {
    const json root = load_config(config_path);
    ObjectReader cfg(root, "config");

    const std::optional<nvodmr::FieldVector> field = read_field(cfg, true);

    nvodmr::NoiseParams init;
    init.gamma_mhz = 0.5;
    if (const json* node = cfg.object("init")) {
        ObjectReader r(*node, cfg.loc("init"));
        init.gamma_mhz = r.number("gamma_mhz", init.gamma_mhz);
        init.db_mhz = r.number("db_mhz", init.db_mhz);
        init.de_mhz = r.number("de_mhz", init.de_mhz);
        r.finish();
    }
    if (const json* node = cfg.object("known")) {
        ObjectReader r(*node, cfg.loc("known"));
        init.hyperfine_split_mhz =
            r.number("hyperfine_split_mhz", init.hyperfine_split_mhz);
        init.z_strain_factor = r.number("z_strain_factor", init.z_strain_factor);
        r.finish();
    }

    nvodmr::FitOptions opts;
    opts.n_samples = cfg.integer("n_samples", opts.n_samples);
    opts.lambda_eff_mhz = cfg.number("lambda_eff_mhz", opts.lambda_eff_mhz);
    opts.temperature_offset_k =
        cfg.number("temperature_offset_k", opts.temperature_offset_k);
    opts.restarts = cfg.integer("restarts", opts.restarts);
    opts.cycles = cfg.integer("cycles", opts.cycles);
    opts.joint_refine = cfg.boolean("joint_refine", opts.joint_refine);
    opts.gamma_window_mhz = cfg.number("gamma_window_mhz", opts.gamma_window_mhz);
    opts.seed = pick_seed(flag_seed, cfg);
    cfg.finish();

    note("fit: loading " + zero_field_path + " and " + in_field_path);
    const nvodmr::ExperimentalSpectrum zero_field =
        nvodmr::load_spectrum(zero_field_path);
    const nvodmr::ExperimentalSpectrum in_field = nvodmr::load_spectrum(in_field_path);

    note("fit: staged protocol, seed " + std::to_string(opts.seed) + ", " +
         std::to_string(opts.n_samples) + " model samples per axis");
    const nvodmr::FitResult result =
        nvodmr::fit_all(zero_field, in_field, *field, init, opts);

    OutputSet outputs;
    nvodmr::write_fit_report(outputs.stage(out_path), result);
    nvodmr::write_fit_keyvalues(outputs.stage(out_path + ".kv"), result);
    outputs.commit();

    std::ostringstream summary;
    summary << "fit: gamma " << nvodmr::format_double(result.noise.gamma_mhz)
            << " MHz, dB " << nvodmr::format_double(result.noise.db_mhz)
            << " MHz, dE " << nvodmr::format_double(result.noise.de_mhz)
            << " MHz, residual " << nvodmr::format_double(result.residual);
    note(summary.str());
    note("wrote " + out_path + " and " + out_path + ".kv");
    return 0;
}

// sweep ----------------------------------------------------------------

int run_sweep(const std::string& config_path, const std::string& calibration_path,
              const std::optional<std::uint64_t>& flag_seed,
              const std::string& out_path) {
    const json root = load_config(config_path);
    ObjectReader cfg(root, "config");

    nvodmr::Calibration calibration;  // built-in defaults when no file given
    if (!calibration_path.empty()) {
        if (!fs::exists(calibration_path))
            throw IoError("calibration file '" + calibration_path +
                          "' does not exist");
        try {
            calibration = nvodmr::load_calibration(calibration_path);
        } catch (const std::runtime_error& e) {
            throw ConfigError(e.what());  // schema problems, listed exhaustively
        }
    }

    nvodmr::SensitivityConfig sens;
    sens.sigma = calibration.sigma;
    sens.ref_concentration = calibration.ref_concentration;
    sens.volume_um3 = cfg.number("volume_um3", sens.volume_um3);
    sens.od_nd = cfg.number("od_nd", sens.od_nd);
    sens.peak_field_mt = cfg.number("peak_field_mt", sens.peak_field_mt);
    sens.lambda_eff_mhz = cfg.number("lambda_eff_mhz", sens.lambda_eff_mhz);
    sens.n_samples = cfg.integer("n_samples", sens.n_samples);

    std::vector<double> concentrations;
    if (cfg.has("concentrations_1e17_cm3"))
        concentrations = cfg.number_list("concentrations_1e17_cm3");
    else
        concentrations = nvodmr::default_concentration_grid();

    const std::uint64_t seed = pick_seed(flag_seed, cfg);
    cfg.finish();

    note("sweep: " + std::to_string(concentrations.size()) +
         " concentrations, seed " + std::to_string(seed));
    const nvodmr::SweepResult result =
        nvodmr::sweep(calibration.laws, sens, concentrations, seed);

    OutputSet outputs;
    nvodmr::write_sweep_csv(outputs.stage(out_path), result);
    outputs.commit();
    note("wrote " + out_path);
    return 0;
}

// project-field ----------------------------------------------------------

int run_project_field(const std::string& config_path, const std::string& out_path) {
    const json root = load_config(config_path);
    ObjectReader cfg(root, "config");
    const std::optional<nvodmr::FieldVector> field = read_field(cfg, true);
    cfg.finish();

    const auto proj =
        nvodmr::project_field(*field, nvodmr::kDefaultConstants.ge_mub_mhz_per_mt);
    const double inv_sqrt3 = 1.0 / std::sqrt(3.0);

    std::ostringstream body;
    body << "axis,unit_x,unit_y,unit_z,zeeman_mhz\n";
    for (std::size_t a = 0; a < 4; ++a) {
        body << a;
        for (std::size_t c = 0; c < 3; ++c)
            body << ',' << nvodmr::format_double(nvodmr::kNvAxes[a][c] * inv_sqrt3);
        body << ',' << nvodmr::format_double(proj[a]) << '\n';
    }

    if (out_path.empty()) {
        std::cout << body.str();
        return 0;
    }
    OutputSet outputs;
    {
        std::ofstream out(outputs.stage(out_path), std::ios::binary);
        if (!out) throw IoError("cannot open '" + out_path + "' for writing");
        out << body.str();
        if (!out) throw IoError("write failed for '" + out_path + "'");
    }
    outputs.commit();
    note("wrote " + out_path);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "NV-ensemble ODMR toolkit: simulate spectra, fit noise parameters, "
        "sweep temperature sensitivity over NV concentration."};
    app.require_subcommand(1);

    std::string config_path, out_path, zero_field_path, in_field_path;
    std::string calibration_path;
    std::optional<std::uint64_t> flag_seed;

    auto add_common = [&](CLI::App* sub, bool needs_out) {
        sub->add_option("--config", config_path, "JSON config file")->required();
        auto* out = sub->add_option("--out", out_path, "output file path");
        if (needs_out) out->required();
        sub->add_option("--seed", flag_seed,
                        "random seed (overrides the config; default 42)");
        sub->add_flag("--verbose", g_verbose, "progress notes on stderr");
    };

    CLI::App* simulate =
        app.add_subcommand("simulate", "simulate an ODMR spectrum to CSV");
    add_common(simulate, true);

    CLI::App* fit = app.add_subcommand(
        "fit", "fit noise parameters to a zero-field / in-field spectrum pair");
    add_common(fit, true);
    fit->add_option("--zero-field", zero_field_path, "zero-field spectrum CSV")
        ->required();
    fit->add_option("--in-field", in_field_path, "in-field spectrum CSV")->required();

    CLI::App* sweep = app.add_subcommand(
        "sweep", "sensitivity sweep over NV concentration (three modes) to CSV");
    add_common(sweep, true);
    sweep->add_option("--calibration", calibration_path,
                      "calibration file (key-value text; built-in defaults "
                      "when omitted)");

    CLI::App* project = app.add_subcommand(
        "project-field", "Zeeman projections of a field onto the four NV axes");
    add_common(project, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        if (simulate->parsed()) return run_simulate(config_path, flag_seed, out_path);
        if (fit->parsed())
            return run_fit(config_path, zero_field_path, in_field_path, flag_seed,
                           out_path);
        if (sweep->parsed())
            return run_sweep(config_path, calibration_path, flag_seed, out_path);
        if (project->parsed()) return run_project_field(config_path, out_path);
    } catch (const nvodmr::FitError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFitStage;
    } catch (const nvodmr::CsvError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return 0;
}
