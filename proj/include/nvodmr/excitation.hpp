#pragma once

// Closed-form steady-state excitation of a single NV center under weak
// microwave drive. This is the scalar kernel every spectrum in the library
// is built from: the ensemble simulator averages it over sampled center
// parameters, and the Lindblad solver in lindblad.hpp provides an
// independent numerical check of the same quantity.

#include <complex>

#include "nvodmr/constants.hpp"

namespace nvodmr {

// Parameters of one center as seen by the drive. All MHz.
struct CenterParams {
    double d_mhz = 2870.685;    // zero-field splitting of this center
    double e1_mhz = 0.0;        // in-plane strain component splitting the branches
    double e2_mhz = 0.0;        // strain component mixing the branches
    double zeeman_mhz = 0.0;    // axial Zeeman frequency J = ge*muB*Bz
    double gamma_mhz = 1.0;     // dephasing / inter-branch relaxation rate
    double lambda_eff_mhz = 0.29;  // effective drive strength lambda'
};

namespace detail {

// Scale-free part of the excitation: multiply by lambda'^2 to get the
// physical response. jsq = J^2 + E2^2 is the squared magnitude of the
// branch-mixing term. Expanded into real arithmetic because this runs a few
// hundred million times per fit; the complex form below is the readable
// reference and the two are pinned together by a unit test.
inline double excitation_kernel(double omega_mhz, double bright_mhz,
                                double dark_mhz, double jsq_mhz2,
                                double gamma_mhz) {
    const double xb = omega_mhz - bright_mhz;
    const double xd = omega_mhz - dark_mhz;
    const double g2 = gamma_mhz * gamma_mhz;
    const double re = xb * xd - g2 - jsq_mhz2;
    const double im = gamma_mhz * (xb + xd);
    return (xd * xd + g2 + jsq_mhz2) / (re * re + im * im);
}

}  // namespace detail

// Steady-state excited-population response of one center at drive frequency
// omega. With zb = omega - (D - E1) + i*gamma, zd = omega - (D + E1) +
// i*gamma and Z = zb*zd - (J^2 + E2^2), the response is
//
//     lambda'^2 * ( |zd|^2 + |J - i*E2|^2 ) / |Z|^2.
//
// The denominator cannot vanish for gamma > 0: Im(Z) = gamma*(xb + xd) is
// zero only at omega = D, where Re(Z) = -(E1^2 + gamma^2 + J^2 + E2^2) < 0.
inline double single_center_excitation(double omega_mhz, const CenterParams& p) {
    const auto [wb, wd] = branch_frequencies(p.d_mhz, p.e1_mhz);
    const std::complex<double> zb(omega_mhz - wb, p.gamma_mhz);
    const std::complex<double> zd(omega_mhz - wd, p.gamma_mhz);
    const std::complex<double> mix(p.zeeman_mhz, -p.e2_mhz);  // J - i*E2
    const std::complex<double> z = zb * zd - mix * std::conj(mix);
    const double znorm2 = std::norm(z);
    const double l2 = p.lambda_eff_mhz * p.lambda_eff_mhz;
    return l2 * (std::norm(zd) + std::norm(mix)) / znorm2;
}

// Lorentzian line of unit peak height: gamma^2 / ((omega-center)^2 + gamma^2)
// scaled by amplitude/gamma^2 gives amplitude / ((omega-center)^2 + gamma^2),
// which is the form the unmixed (J = E2 = 0) response reduces to.
inline double lorentzian_response(double omega_mhz, double center_mhz,
                                  double gamma_mhz, double amplitude) {
    const double x = omega_mhz - center_mhz;
    return amplitude / (x * x + gamma_mhz * gamma_mhz);
}

}  // namespace nvodmr
