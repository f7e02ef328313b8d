#pragma once

// Numerical steady-state solver for the single-center three-level master
// equation. This is deliberately independent of the closed form in
// excitation.hpp: it builds the full 9x9 superoperator and solves it with a
// dense LU factorization, so the two routes share no algebra. Used as a test
// oracle only; the simulator never calls it.

#include <complex>
#include <stdexcept>

#include <Eigen/Dense>

#include "nvodmr/excitation.hpp"

namespace nvodmr {

// Steady-state excited population 1 - rho_00 of one driven center, from the
// Lindblad equation
//
//   drho/dt = -i[H, rho] + sum_j gamma_j (2 L_j rho L_j+ - L_j+ L_j rho
//                                         - rho L_j+ L_j)
//
// in the rotating frame, basis {|0>, |B>, |D>}. Jump operators: branch
// exchange |B><D| and |D><B| at rate gamma, energy relaxation |0><B| and
// |0><D| at rate energy_relax. The drive couples |0> to |B> with matrix
// element lambda_eff * sqrt(energy_relax / (gamma + energy_relax)); the
// closed form's effective strength lambda' absorbs sqrt(Gamma''/Gamma'), and
// the full coupling element (no factor 1/2) is what reproduces the closed
// form's normalization in the small-energy-relax limit.
//
// Throws std::invalid_argument for non-positive rates and std::runtime_error
// if the (trace-constrained) superoperator turns out singular, which only
// happens for invalid rate combinations.
inline double lindblad_steady_state_oracle(const CenterParams& p,
                                           double energy_relax_mhz,
                                           double omega_mhz) {
    if (!(p.gamma_mhz > 0.0))
        throw std::invalid_argument("lindblad_steady_state_oracle: gamma must be > 0");
    if (!(energy_relax_mhz > 0.0))
        throw std::invalid_argument("lindblad_steady_state_oracle: energy relaxation rate must be > 0");

    using Complex = std::complex<double>;
    using Matrix3c = Eigen::Matrix3cd;
    using Matrix9c = Eigen::Matrix<Complex, 9, 9>;
    using Vector9c = Eigen::Matrix<Complex, 9, 1>;

    const auto [wb, wd] = branch_frequencies(p.d_mhz, p.e1_mhz);
    const double gamma_total = p.gamma_mhz + energy_relax_mhz;  // Gamma''
    const double drive = p.lambda_eff_mhz * std::sqrt(energy_relax_mhz / gamma_total);

    Matrix3c h = Matrix3c::Zero();
    h(1, 1) = Complex(wb - omega_mhz, 0.0);
    h(2, 2) = Complex(wd - omega_mhz, 0.0);
    h(1, 2) = Complex(p.zeeman_mhz, p.e2_mhz);   // J + i*E2
    h(2, 1) = Complex(p.zeeman_mhz, -p.e2_mhz);  // J - i*E2
    h(0, 1) = Complex(drive, 0.0);
    h(1, 0) = Complex(drive, 0.0);

    struct Jump {
        int to;
        int from;
        double rate;
    };
    const Jump jumps[4] = {
        {1, 2, p.gamma_mhz},       // |B><D|
        {2, 1, p.gamma_mhz},       // |D><B|
        {0, 1, energy_relax_mhz},  // |0><B|
        {0, 2, energy_relax_mhz},  // |0><D|
    };

    // Superoperator M acting on rho flattened row-major: index(i,j) = 3i + j.
    // M[(i,j),(k,l)] = coefficient of rho_kl in d(rho_ij)/dt.
    auto idx = [](int i, int j) { return 3 * i + j; };
    Matrix9c m = Matrix9c::Zero();

    // Commutator: d(rho_ij)/dt += -i * (H_ik rho_kj - rho_ik H_kj).
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) {
                m(idx(i, j), idx(k, j)) += Complex(0.0, -1.0) * h(i, k);
                m(idx(i, j), idx(i, k)) -= Complex(0.0, -1.0) * h(k, j);
            }

    // Dissipators. For L = |to><from|: 2 L rho L+ moves rho_{from,from} into
    // rho_{to,to}; L+L = |from><from| enters the anticommutator.
    for (const Jump& jump : jumps) {
        m(idx(jump.to, jump.to), idx(jump.from, jump.from)) += 2.0 * jump.rate;
        for (int j = 0; j < 3; ++j) {
            m(idx(jump.from, j), idx(jump.from, j)) -= jump.rate;
            m(idx(j, jump.from), idx(j, jump.from)) -= jump.rate;
        }
    }

    // Steady state: M vec(rho) = 0 with Tr rho = 1. Replace the rho_00 row
    // with the trace constraint to pin normalization.
    Vector9c rhs = Vector9c::Zero();
    rhs(0) = Complex(1.0, 0.0);
    for (int k = 0; k < 9; ++k) m(0, k) = Complex(0.0, 0.0);
    m(0, idx(0, 0)) = Complex(1.0, 0.0);
    m(0, idx(1, 1)) = Complex(1.0, 0.0);
    m(0, idx(2, 2)) = Complex(1.0, 0.0);

    Eigen::FullPivLU<Matrix9c> lu(m);
    if (!lu.isInvertible())
        throw std::runtime_error("lindblad_steady_state_oracle: singular superoperator (invalid rates)");
    const Vector9c rho = lu.solve(rhs);
    return 1.0 - rho(idx(0, 0)).real();
}

}  // namespace nvodmr
