#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "dephasim/errors.hpp"
#include "dephasim/matrix.hpp"
#include "dephasim/spectral.hpp"

namespace dephasim {

// Basis order (|00>, |01>, |10>, |11>). sigma_z^A and sigma_z^B act as the
// diagonal sign vectors below; the master equation couples through
// M = z_A - z_B and P = z_A + z_B.
inline constexpr double kZA[4] = {+1.0, +1.0, -1.0, -1.0};
inline constexpr double kZB[4] = {+1.0, -1.0, +1.0, -1.0};

/// Accumulated dephasing exponents at one time: Gamma0 = 2 int gamma1,
/// delta = 4 int gamma2. Coherence (i,j) is suppressed by exp(-Lambda_ij).
struct DephasingExponents {
    double Gamma0 = 0.0;
    double delta = 0.0;
};

/// Exponent Lambda_ij of the two-qubit element (i,j): single-flip coherences
/// decay with Gamma0, the (00,11) pair with 2*Gamma0 + delta, the (01,10)
/// pair with 2*Gamma0 - delta. Derived from the Lindblad generator with the
/// rate combinations (gamma1 -+ gamma2)/2 on M and P.
inline double element_exponent(std::size_t i, std::size_t j, const DephasingExponents& e) {
    const double dM = kZA[i] - kZB[i] - (kZA[j] - kZB[j]);
    const double dP = kZA[i] + kZB[i] - (kZA[j] + kZB[j]);
    // rate_ij = (g1-g2)/4 * dM^2 + (g1+g2)/4 * dP^2, integrated in time
    return (dM * dM + dP * dP) * 0.125 * e.Gamma0 + (dP * dP - dM * dM) * 0.0625 * e.delta;
}

namespace detail {
inline constexpr double kHermTol = 1e-12;
inline constexpr double kTraceTol = 1e-12;
inline constexpr double kEigTol = -1e-10;
}

/// Two-qubit density matrix; Hermitian, unit trace, positive semidefinite
/// within fixed tolerances.
struct DensityMatrix4 {
    CMat4 m;

    void validate() const {
        if (hermiticity_error(m) > detail::kHermTol)
            throw InvalidState("DensityMatrix4: not Hermitian at 1e-12");
        if (std::abs(trace(m) - 1.0) > detail::kTraceTol)
            throw InvalidState("DensityMatrix4: trace differs from 1 at 1e-12");
        for (double ev : jacobi_eigenvalues(m))
            if (ev < detail::kEigTol)
                throw InvalidState("DensityMatrix4: negative eigenvalue " + std::to_string(ev));
    }
};

struct DensityMatrix2 {
    CMat2 m;

    void validate() const {
        if (hermiticity_error(m) > detail::kHermTol)
            throw InvalidState("DensityMatrix2: not Hermitian at 1e-12");
        if (std::abs(trace(m) - 1.0) > detail::kTraceTol)
            throw InvalidState("DensityMatrix2: trace differs from 1 at 1e-12");
        for (double ev : jacobi_eigenvalues(m))
            if (ev < detail::kEigTol)
                throw InvalidState("DensityMatrix2: negative eigenvalue " + std::to_string(ev));
    }
};

/// |psi><psi| from a 4-component state vector (normalized by the caller).
inline DensityMatrix4 pure_state(const std::array<cplx, 4>& psi) {
    DensityMatrix4 r;
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) r.m(i, j) = psi[i] * std::conj(psi[j]);
    return r;
}

inline DensityMatrix4 bell_phi_plus()  { const double q = 1.0 / std::sqrt(2.0); return pure_state({q, 0, 0, q}); }
inline DensityMatrix4 bell_phi_minus() { const double q = 1.0 / std::sqrt(2.0); return pure_state({q, 0, 0, -q}); }
inline DensityMatrix4 bell_psi_plus()  { const double q = 1.0 / std::sqrt(2.0); return pure_state({0, q, q, 0}); }
inline DensityMatrix4 bell_psi_minus() { const double q = 1.0 / std::sqrt(2.0); return pure_state({0, q, -q, 0}); }

/// Exact dephasing channel: element-wise suppression of coherences,
/// populations untouched.
inline DensityMatrix4 apply_two_qubit(const DensityMatrix4& rho0, const DephasingExponents& e) {
    rho0.validate();
    DensityMatrix4 out;
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j)
            out.m(i, j) = rho0.m(i, j) * std::exp(-element_exponent(i, j, e));
    return out;
}

/// Single-qubit dephasing: off-diagonals times exp(-Gamma0).
inline DensityMatrix2 apply_single_qubit(const DensityMatrix2& rho0, double Gamma0) {
    rho0.validate();
    DensityMatrix2 out = rho0;
    const double f = std::exp(-Gamma0);
    out.m(0, 1) *= f;
    out.m(1, 0) *= f;
    return out;
}

/// Hadamard factor matrix of the intermediate map between exponents e1 (at t')
/// and e2 (at t >= t'): M_ij = exp(-[Lambda_ij(e2) - Lambda_ij(e1)]). The
/// intermediate map is completely positive iff M is positive semidefinite.
inline CMat4 intermediate_factor_matrix(const DephasingExponents& e1, const DephasingExponents& e2) {
    const DephasingExponents diff{e2.Gamma0 - e1.Gamma0, e2.delta - e1.delta};
    CMat4 f;
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j)
            f(i, j) = std::exp(-element_exponent(i, j, diff));
    return f;
}

inline bool factor_matrix_psd(const CMat4& f, double tol = 1e-12) {
    for (double ev : jacobi_eigenvalues(f))
        if (ev < -tol) return false;
    return true;
}

/// Fixed-step RK4 integration of the master equation with the rates
/// interpolated linearly between table grid points; the independent oracle for
/// apply_two_qubit. Returns the state at every grid time.
inline std::vector<DensityMatrix4> rk4_evolve(const DensityMatrix4& rho0, const DecoherenceTable& table) {
    rho0.validate();
    const std::size_t n = table.size();
    const double h = table.step();
    double max_rate = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        // fastest element rate is 4|gamma1 -+ gamma2|
        max_rate = std::max(max_rate, 4.0 * (std::abs(table.gamma1[i]) + std::abs(table.gamma2[i])));
    }
    if (h * max_rate >= 0.1)
        throw StepTooLarge("rk4_evolve: step * max rate = " + std::to_string(h * max_rate) +
                           " (must be < 0.1)");

    auto rates_at = [&](double t) -> std::array<double, 2> {
        if (t <= 0.0) return {table.gamma1.front(), table.gamma2.front()};
        if (t >= table.tau.back()) return {table.gamma1.back(), table.gamma2.back()};
        const std::size_t i = std::min(static_cast<std::size_t>(t / h), n - 2);
        const double u = (t - table.tau[i]) / h;
        return {table.gamma1[i] * (1.0 - u) + table.gamma1[i + 1] * u,
                table.gamma2[i] * (1.0 - u) + table.gamma2[i + 1] * u};
    };
    // right-hand side of the master equation for diagonal Lindblad operators
    auto rhs = [&](const CMat4& rho, double g1, double g2) {
        CMat4 d;
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 4; ++j) {
                const double Mi = kZA[i] - kZB[i], Mj = kZA[j] - kZB[j];
                const double Pi = kZA[i] + kZB[i], Pj = kZA[j] + kZB[j];
                const double lm = 0.5 * (g1 - g2) * (Mi * Mj - 0.5 * (Mi * Mi + Mj * Mj));
                const double lp = 0.5 * (g1 + g2) * (Pi * Pj - 0.5 * (Pi * Pi + Pj * Pj));
                d(i, j) = (lm + lp) * rho(i, j);
            }
        return d;
    };

    std::vector<DensityMatrix4> out(n);
    out[0] = rho0;
    CMat4 rho = rho0.m;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double t = table.tau[i];
        const auto r0 = rates_at(t);
        const auto rh = rates_at(t + 0.5 * h);
        const auto r1 = rates_at(t + h);
        const CMat4 k1 = rhs(rho, r0[0], r0[1]);
        const CMat4 k2 = rhs(rho + 0.5 * h * k1, rh[0], rh[1]);
        const CMat4 k3 = rhs(rho + 0.5 * h * k2, rh[0], rh[1]);
        const CMat4 k4 = rhs(rho + h * k3, r1[0], r1[1]);
        rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        out[i + 1].m = rho;
    }
    return out;
}

} // namespace dephasim
