#pragma once

// Per-center noise realizations. Each center in the ensemble differs from
// its neighbors by Lorentzian-distributed offsets (local strain, local
// magnetic environment, z-strain shift of D) plus a discrete hyperfine
// offset from the host nitrogen nuclear spin, which at room temperature is
// an equal mixture of its three projections.

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "nvodmr/rng.hpp"

namespace nvodmr {

// Widths of the ensemble noise distributions. All widths are HWHM in MHz.
struct NoiseParams {
    double gamma_mhz = 1.0;           // homogeneous broadening (per-center linewidth)
    double db_mhz = 1.0;              // inhomogeneous Zeeman distribution
    double de_mhz = 3.0;              // inhomogeneous strain distribution (E1 and E2)
    double hyperfine_split_mhz = 2.3; // adjacent-line separation of the N triplet
    double z_strain_factor = 0.02;    // D-shift width as a fraction of de_mhz

    void validate() const {
        auto fail = [](const char* what) {
            throw std::invalid_argument(std::string("NoiseParams: ") + what);
        };
        if (!(gamma_mhz > 0.0)) fail("gamma_mhz must be > 0");
        if (!(db_mhz >= 0.0)) fail("db_mhz must be >= 0");
        if (!(de_mhz >= 0.0)) fail("de_mhz must be >= 0");
        if (!(hyperfine_split_mhz >= 0.0)) fail("hyperfine_split_mhz must be >= 0");
        if (!(z_strain_factor > 0.0 && z_strain_factor <= 1.0))
            fail("z_strain_factor must be in (0, 1]");
    }
};

// One realized center, before the drive strength is attached.
struct CenterSample {
    double d_mhz;
    double e1_mhz;
    double e2_mhz;
    double j_mhz;  // total effective Zeeman frequency incl. hyperfine offset
};

// External magnetic field in the cubic crystal frame, mT.
struct FieldVector {
    double bx_mt = 0.0;
    double by_mt = 0.0;
    double bz_mt = 0.0;

    double magnitude_mt() const {
        return std::sqrt(bx_mt * bx_mt + by_mt * by_mt + bz_mt * bz_mt);
    }
};

// Inverse-CDF draw from a Lorentzian: center + hwhm*tan(pi*(u - 1/2)).
// Tails are intentionally not truncated; extreme outliers only add a
// negligible flat background to spectra, and truncating would bias fits.
inline double lorentzian_sample(double center, double hwhm, double u) {
    if (!(hwhm >= 0.0)) throw std::invalid_argument("lorentzian_sample: hwhm must be >= 0");
    if (!(u > 0.0 && u < 1.0))
        throw std::invalid_argument("lorentzian_sample: u must lie strictly inside (0, 1)");
    if (hwhm == 0.0) return center;
    return center + hwhm * std::tan(std::numbers::pi * (u - 0.5));
}

// Draw one center. baseD is the deterministic part of the zero-field
// splitting, staticJ the deterministic Zeeman projection for this center's
// crystallographic axis. Draw order is frozen as part of the determinism
// contract: z-strain D shift, E1, E2, field noise, hyperfine index.
inline CenterSample sample_center(const NoiseParams& noise, double base_d_mhz,
                                  double static_j_mhz, RandomStream& stream) {
    CenterSample s;
    s.d_mhz = base_d_mhz +
              lorentzian_sample(0.0, noise.de_mhz * noise.z_strain_factor,
                                stream.next_unit_open());
    s.e1_mhz = lorentzian_sample(0.0, noise.de_mhz, stream.next_unit_open());
    s.e2_mhz = lorentzian_sample(0.0, noise.de_mhz, stream.next_unit_open());
    s.j_mhz = static_j_mhz + lorentzian_sample(0.0, noise.db_mhz, stream.next_unit_open());
    if (noise.hyperfine_split_mhz > 0.0) {
        const std::uint32_t which = stream.next_below(3);
        s.j_mhz += (static_cast<double>(which) - 1.0) * noise.hyperfine_split_mhz;
    } else {
        // Consume the draw anyway so the stream position does not depend on
        // the parameter value.
        (void)stream.next_below(3);
    }
    return s;
}

// Unit vectors of the four NV crystallographic axes, cubic frame.
inline constexpr std::array<std::array<double, 3>, 4> kNvAxes = {{
    {1.0, 1.0, 1.0},
    {1.0, -1.0, -1.0},
    {-1.0, 1.0, -1.0},
    {-1.0, -1.0, 1.0},
}};

// Zeeman frequencies geMuB*(b.u) for the four axes (signed projections; the
// response depends on them only through J^2, so the sign is unobservable).
// For b along [001] the four magnitudes are identical to machine precision.
inline std::array<double, 4> project_field(const FieldVector& b,
                                           double ge_mub_mhz_per_mt) {
    const double inv_sqrt3 = 1.0 / std::sqrt(3.0);
    std::array<double, 4> out{};
    for (std::size_t a = 0; a < 4; ++a) {
        const double dot = b.bx_mt * (kNvAxes[a][0] * inv_sqrt3) +
                           b.by_mt * (kNvAxes[a][1] * inv_sqrt3) +
                           b.bz_mt * (kNvAxes[a][2] * inv_sqrt3);
        out[a] = ge_mub_mhz_per_mt * dot;
    }
    return out;
}

inline constexpr double kEarthFieldMagnitudeMt = 0.045;

// Earth-strength field along the given direction (any nonzero vector).
inline FieldVector earth_field(double dir_x, double dir_y, double dir_z) {
    const double n = std::sqrt(dir_x * dir_x + dir_y * dir_y + dir_z * dir_z);
    if (!(n > 0.0)) throw std::invalid_argument("earth_field: direction must be nonzero");
    const double s = kEarthFieldMagnitudeMt / n;
    return {dir_x * s, dir_y * s, dir_z * s};
}

}  // namespace nvodmr
