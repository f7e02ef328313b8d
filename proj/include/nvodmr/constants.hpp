#pragma once

// Physical constants and level-frequency helpers for NV-ensemble ODMR
// modeling. All frequencies in this library are ordinary frequencies in MHz
// (not angular); magnetic fields are in mT, electric/strain fields in V/um,
// temperatures in K. Angular-frequency factors of 2*pi cancel in every
// steady-state expression we evaluate, so they are absorbed once here and
// never reappear downstream.

#include <stdexcept>
#include <string>

namespace nvodmr {

// Coupling constants of the NV ground-state spin triplet.
struct PhysicalConstants {
    // Zero-field splitting at the reference temperature, MHz.
    double d0_mhz = 2870.685;
    // Thermal shift of the splitting, MHz per K. Negative: D drops as the
    // sample warms, which is the whole basis of thermometry here.
    double ct_mhz_per_k = -0.0786;
    // Transverse effective-field coupling, MHz per V/um.
    double ce_perp_mhz_per_v_um = 0.170;
    // Axial effective-field coupling, MHz per V/um.
    double ce_par_mhz_per_v_um = 0.0035;
    // Electron Zeeman conversion g_e * mu_B, MHz per mT.
    double ge_mub_mhz_per_mt = 28.7;

    // Throws std::invalid_argument naming the first offending field. Every
    // magnitude must be strictly positive and ct_mhz_per_k strictly negative.
    void validate() const {
        auto fail = [](const std::string& what) {
            throw std::invalid_argument("PhysicalConstants: " + what);
        };
        if (!(d0_mhz > 0.0)) fail("d0_mhz must be > 0");
        if (!(ct_mhz_per_k < 0.0)) fail("ct_mhz_per_k must be < 0");
        if (!(ce_perp_mhz_per_v_um > 0.0)) fail("ce_perp_mhz_per_v_um must be > 0");
        if (!(ce_par_mhz_per_v_um > 0.0)) fail("ce_par_mhz_per_v_um must be > 0");
        if (!(ge_mub_mhz_per_mt > 0.0)) fail("ge_mub_mhz_per_mt must be > 0");
    }
};

inline constexpr PhysicalConstants kDefaultConstants{};

// Deterministic part of the zero-field splitting: D(dT, eps_z) =
// d0 + ct*dT + ce_par*eps_z. Random strain is handled by the sampler, not
// here.
constexpr double zfs_frequency_mhz(double temperature_offset_k,
                                   double axial_strain_v_per_um,
                                   const PhysicalConstants& c = kDefaultConstants) {
    return c.d0_mhz + c.ct_mhz_per_k * temperature_offset_k +
           c.ce_par_mhz_per_v_um * axial_strain_v_per_um;
}

// Branch frequencies of a single center in the strain-split basis. The
// bright branch (the one the microwave drive couples to directly) sits at
// D - E1 and the dark branch at D + E1; E1 may be negative, which swaps
// which branch is lower in frequency.
struct BranchFrequencies {
    double bright_mhz;  // D - E1
    double dark_mhz;    // D + E1
};

constexpr BranchFrequencies branch_frequencies(double d_mhz, double e1_mhz) {
    return {d_mhz - e1_mhz, d_mhz + e1_mhz};
}

}  // namespace nvodmr
