#pragma once

#include <cmath>
#include <charconv>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>

#include "dephasim/errors.hpp"

namespace dephasim {

// SI constants (CODATA 2018)
namespace constants {
inline constexpr double hbar = 1.054571817e-34;         // J s
inline constexpr double amu = 1.66053906660e-27;        // kg
inline constexpr double bohr_radius = 5.29177210903e-11; // m
inline constexpr double mass_Rb87_amu = 86.909180527;
inline constexpr double mass_Na23_amu = 22.98976928;
// natural Rb-Rb scattering length, a_Rb = 99 a0
inline constexpr double a_Rb = 99.0 * bohr_radius;
} // namespace constants

/// Experimental configuration in SI units: two impurity-atom qubits in a
/// superlattice, dephasing against a homogeneous BEC.
struct PhysicalParams {
    double m_E;            ///< environment boson mass (kg)
    double m_S;            ///< impurity atom mass (kg)
    double a_E;            ///< boson-boson scattering length (m)
    double a_SE;           ///< impurity-boson scattering length (m)
    double n0;             ///< condensate density (m^-3)
    double lambda_lattice; ///< superlattice wavelength (m)
    double sigma_site;     ///< lattice-site variance parameter (m)
    double D;              ///< qubit half-separation (m)

    double site_length() const { return lambda_lattice / 4.0; } // L = lambda/4
};

/// Dimensionless parameter set consumed by every integral. Unit system:
/// hbar = 1, length L = lambda/4, energy E0 = hbar^2/(m_E L^2), time t0 = hbar/E0.
struct ReducedParams {
    double d;       ///< half-separation D/L
    double s;       ///< site width sigma/L
    double g_tilde; ///< environment mean-field energy g_E n0 / E0
    double c_rate;  ///< overall rate prefactor, 4 (m_E/m_SE)^2 (a_SE/L)^2 (n0 L^3)
    double t0;      ///< time unit hbar/E0 in seconds
};

/// Reference configuration: Na-23 impurities in a Rb-87 condensate,
/// lambda = 600 nm, n0 = 1e20 m^-3, a_SE = 55 a0, a_E = a_Rb, sigma = 45 nm,
/// D = 200 L.
inline PhysicalParams default_params() {
    PhysicalParams p;
    p.m_E = constants::mass_Rb87_amu * constants::amu;
    p.m_S = constants::mass_Na23_amu * constants::amu;
    p.a_E = constants::a_Rb;
    p.a_SE = 55.0 * constants::bohr_radius;
    p.n0 = 1e20;
    p.lambda_lattice = 600e-9;
    p.sigma_site = 45e-9;
    p.D = 200.0 * p.site_length();
    return p;
}

inline void validate(const PhysicalParams& p) {
    auto need = [](bool ok, const char* msg) {
        if (!ok) throw InvalidParams(msg);
    };
    need(p.m_E > 0, "m_E must be positive");
    need(p.m_S > 0, "m_S must be positive");
    need(p.a_E > 0, "a_E must be positive");
    need(p.a_SE > 0, "a_SE must be positive");
    need(p.n0 > 0, "n0 must be positive");
    need(p.lambda_lattice > 0, "lambda_lattice must be positive");
    need(p.sigma_site > 0, "sigma_site must be positive");
    need(p.D >= 4.0 * p.site_length(), "D must be at least 4 L (2 D_min = 8 L)");
}

/// Nondimensionalize. gamma1/gamma2 evaluated in reduced units and divided by
/// t0 reproduce the SI-unit integrals.
inline ReducedParams reduce(const PhysicalParams& p) {
    validate(p);
    const double L = p.site_length();
    const double n0L3 = p.n0 * L * L * L;
    const double m_SE = p.m_S * p.m_E / (p.m_S + p.m_E);
    ReducedParams r;
    r.d = p.D / L;
    r.s = p.sigma_site / L;
    r.g_tilde = 4.0 * M_PI * (p.a_E / L) * n0L3;
    r.c_rate = 4.0 * (p.m_E / m_SE) * (p.m_E / m_SE) * (p.a_SE / L) * (p.a_SE / L) * n0L3;
    r.t0 = p.m_E * L * L / constants::hbar;
    return r;
}

// ---------------------------------------------------------------------------
// Config file: flat key-value lines, "key = value". '#' starts a comment,
// blank lines are skipped. Unknown keys are errors. Keys:
//   m_E_amu m_S_amu a_B_over_aRb a_SE_over_a0 n0_per_m3 lambda_nm sigma_nm D_over_L
// ---------------------------------------------------------------------------

/// Configuration in the CLI's native units. Kept verbatim so output metadata
/// round-trips byte-for-byte.
struct ConfigValues {
    double m_E_amu = constants::mass_Rb87_amu;
    double m_S_amu = constants::mass_Na23_amu;
    double a_B_over_aRb = 1.0;
    double a_SE_over_a0 = 55.0;
    double n0_per_m3 = 1e20;
    double lambda_nm = 600.0;
    double sigma_nm = 45.0;
    double D_over_L = 200.0;

    PhysicalParams to_physical() const {
        PhysicalParams p;
        p.m_E = m_E_amu * constants::amu;
        p.m_S = m_S_amu * constants::amu;
        p.a_E = a_B_over_aRb * constants::a_Rb;
        p.a_SE = a_SE_over_a0 * constants::bohr_radius;
        p.n0 = n0_per_m3;
        p.lambda_lattice = lambda_nm * 1e-9;
        p.sigma_site = sigma_nm * 1e-9;
        p.D = D_over_L * p.site_length();
        return p;
    }
};

namespace detail {
inline std::string_view trim(std::string_view v) {
    while (!v.empty() && (v.front() == ' ' || v.front() == '\t')) v.remove_prefix(1);
    while (!v.empty() && (v.back() == ' ' || v.back() == '\t' || v.back() == '\r')) v.remove_suffix(1);
    return v;
}

inline double parse_number(std::string_view v, const std::string& key) {
    double x = 0.0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc{} || ptr != v.data() + v.size())
        throw ConfigError("bad numeric value for key '" + key + "': '" + std::string(v) + "'");
    return x;
}
} // namespace detail

inline ConfigValues parse_config_values(std::istream& in) {
    ConfigValues c;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view v(line);
        if (auto hash = v.find('#'); hash != std::string_view::npos) v = v.substr(0, hash);
        v = detail::trim(v);
        if (v.empty()) continue;
        auto eq = v.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        std::string key(detail::trim(v.substr(0, eq)));
        const double x = detail::parse_number(detail::trim(v.substr(eq + 1)), key);
        if (key == "m_E_amu") c.m_E_amu = x;
        else if (key == "m_S_amu") c.m_S_amu = x;
        else if (key == "a_B_over_aRb") c.a_B_over_aRb = x;
        else if (key == "a_SE_over_a0") c.a_SE_over_a0 = x;
        else if (key == "n0_per_m3") c.n0_per_m3 = x;
        else if (key == "lambda_nm") c.lambda_nm = x;
        else if (key == "sigma_nm") c.sigma_nm = x;
        else if (key == "D_over_L") c.D_over_L = x;
        else throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    validate(c.to_physical());
    return c;
}

inline PhysicalParams parse_config(std::istream& in) {
    return parse_config_values(in).to_physical();
}

inline PhysicalParams parse_config_string(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

} // namespace dephasim
