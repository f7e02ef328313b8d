#pragma once

// Spectrum container and its CSV form.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nvodmr/csv.hpp"

namespace nvodmr {

// Provenance of a simulated spectrum: hash of the generating configuration
// (including noise parameters) and the master seed. Enough to reproduce the
// file bit for bit.
struct SpectrumMeta {
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
};

struct Spectrum {
    std::vector<double> freqs_mhz;
    std::vector<double> values;
    SpectrumMeta meta;

    void validate() const {
        if (freqs_mhz.size() != values.size())
            throw std::invalid_argument("Spectrum: freqs/values length mismatch");
        for (std::size_t i = 0; i < freqs_mhz.size(); ++i) {
            if (!std::isfinite(freqs_mhz[i]) || !std::isfinite(values[i]))
                throw std::invalid_argument("Spectrum: non-finite entry");
            if (i > 0 && !(freqs_mhz[i] > freqs_mhz[i - 1]))
                throw std::invalid_argument("Spectrum: frequencies not strictly increasing");
        }
    }
};

inline void write_spectrum_csv(const std::string& path, const Spectrum& s) {
    std::ofstream out(path, std::ios::binary);  // binary: no newline surprises
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << "freq_mhz,signal\n";
    for (std::size_t i = 0; i < s.freqs_mhz.size(); ++i)
        out << format_double(s.freqs_mhz[i]) << ',' << format_double(s.values[i]) << '\n';
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace nvodmr
