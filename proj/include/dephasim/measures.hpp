#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "dephasim/channel.hpp"
#include "dephasim/matrix.hpp"
#include "dephasim/spectral.hpp"

namespace dephasim {

/// Trace distance 1/2 Tr|r1 - r2| of two-qubit states.
inline double trace_distance(const DensityMatrix4& r1, const DensityMatrix4& r2) {
    CMat4 diff = r1.m - r2.m;
    double s = 0.0;
    for (double ev : jacobi_eigenvalues(diff)) s += std::abs(ev);
    return 0.5 * s;
}

inline double trace_distance(const DensityMatrix2& r1, const DensityMatrix2& r2) {
    CMat2 diff = r1.m - r2.m;
    double s = 0.0;
    for (double ev : jacobi_eigenvalues(diff)) s += std::abs(ev);
    return 0.5 * s;
}

/// One maximal interval on which a decay-rate combination is negative.
struct RateInterval {
    double a = 0.0;
    double b = 0.0;
};

enum class RateCombination { Gamma1, Sum, Diff };

namespace detail {

inline double rate_value(RateCombination c, double tau, const ReducedParams& rp, double tol) {
    switch (c) {
        case RateCombination::Gamma1: return gamma1(tau, rp, tol);
        case RateCombination::Sum: return gamma1(tau, rp, tol) + gamma2(tau, rp, tol);
        default: return gamma1(tau, rp, tol) - gamma2(tau, rp, tol);
    }
}

inline double sampled_rate(RateCombination c, const DecoherenceTable& t, std::size_t i) {
    switch (c) {
        case RateCombination::Gamma1: return t.gamma1[i];
        case RateCombination::Sum: return t.gamma1[i] + t.gamma2[i];
        default: return t.gamma1[i] - t.gamma2[i];
    }
}

/// Refine a sign change of the rate inside [lo, hi]; f(lo) and f(hi) are the
/// sampled values. Falls back to the negative-side endpoint when the bracket
/// has no sign change (both already negative within tolerance).
inline double refine_crossing(RateCombination c, const DecoherenceTable& t, double lo, double hi,
                              double flo, double fhi, double tau_tol) {
    if (flo == 0.0) return lo;
    if (flo < 0.0 == fhi < 0.0) return flo < 0.0 ? lo : hi;
    while (hi - lo > tau_tol) {
        const double mid = 0.5 * (lo + hi);
        const double fm = rate_value(c, mid, t.rp, t.tol);
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid; flo = fm;
        } else {
            hi = mid; fhi = fm;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace detail

/// Maximal intervals where the chosen rate combination is negative. Candidate
/// runs come from the table samples; only excursions below -rate_tol count,
/// and endpoints are refined by bisection on the adaptively evaluated rate to
/// tau_tol.
inline std::vector<RateInterval> negativity_intervals(const DecoherenceTable& t, RateCombination c,
                                                      double tau_tol = 1e-8, double rate_tol = 1e-12) {
    const std::size_t n = t.size();
    std::vector<RateInterval> out;
    std::size_t i = 0;
    while (i < n) {
        if (detail::sampled_rate(c, t, i) < -rate_tol) {
            const std::size_t i0 = i;
            while (i + 1 < n && detail::sampled_rate(c, t, i + 1) < -rate_tol) ++i;
            const std::size_t i1 = i;
            RateInterval iv;
            iv.a = (i0 == 0) ? t.tau.front()
                             : detail::refine_crossing(c, t, t.tau[i0 - 1], t.tau[i0],
                                                       detail::sampled_rate(c, t, i0 - 1),
                                                       detail::sampled_rate(c, t, i0), tau_tol);
            iv.b = (i1 + 1 >= n) ? t.tau.back()
                                 : detail::refine_crossing(c, t, t.tau[i1], t.tau[i1 + 1],
                                                           detail::sampled_rate(c, t, i1),
                                                           detail::sampled_rate(c, t, i1 + 1), tau_tol);
            out.push_back(iv);
        }
        ++i;
    }
    return out;
}

struct DivisibilityReport {
    bool divisible = true;
    std::vector<RateInterval> negativity_sum;   // gamma1 + gamma2 < 0
    std::vector<RateInterval> negativity_diff;  // gamma1 - gamma2 < 0
};

/// The map is divisible iff neither rate combination has a negative excursion.
inline DivisibilityReport divisibility(const DecoherenceTable& t) {
    DivisibilityReport r;
    r.negativity_sum = negativity_intervals(t, RateCombination::Sum);
    r.negativity_diff = negativity_intervals(t, RateCombination::Diff);
    r.divisible = r.negativity_sum.empty() && r.negativity_diff.empty();
    return r;
}

namespace detail {

/// Dephasing exponent of a Bell-pair coherence at a refined time, by the
/// analytic inner-time route.
inline double bell_exponent(double tau, const ReducedParams& rp, double tol, bool phi_pair) {
    const double G0 = decoherence_gamma0(tau, rp, tol);
    const double de = decoherence_delta(tau, rp, tol);
    return phi_pair ? 2.0 * G0 + de : 2.0 * G0 - de;
}

inline double backflow_sum(const std::vector<RateInterval>& ivs, const DecoherenceTable& t, bool phi_pair) {
    double N = 0.0;
    for (const auto& iv : ivs)
        N += std::exp(-bell_exponent(iv.b, t.rp, t.tol, phi_pair)) -
             std::exp(-bell_exponent(iv.a, t.rp, t.tol, phi_pair));
    return N;
}

} // namespace detail

/// Non-Markovianity computation results.
struct NmReport {
    double N_phi = 0.0;
    double N_psi = 0.0;
    double N_blp = 0.0;
    double N1 = 0.0;
    bool divisible = true;
    std::vector<RateInterval> backflow_phi;       // == negativity of gamma1+gamma2
    std::vector<RateInterval> backflow_psi;       // == negativity of gamma1-gamma2
    std::vector<RateInterval> gamma1_negativity;  // single-qubit backflow intervals
    std::map<std::string, double> sampled_max_by_category;
};

/// BLP measure over the Bell pairs: the evolved trace distance of the
/// (Phi+, Phi-) pair is exp(-(2 Gamma0 + delta)) and of (Psi+, Psi-) is
/// exp(-(2 Gamma0 - delta)); information flows back exactly where the
/// corresponding rate combination is negative.
inline NmReport blp_bell_analytic(const DecoherenceTable& t) {
    NmReport r;
    r.backflow_phi = negativity_intervals(t, RateCombination::Sum);
    r.backflow_psi = negativity_intervals(t, RateCombination::Diff);
    r.N_phi = detail::backflow_sum(r.backflow_phi, t, true);
    r.N_psi = detail::backflow_sum(r.backflow_psi, t, false);
    r.N_blp = std::max(r.N_phi, r.N_psi);
    r.divisible = r.backflow_phi.empty() && r.backflow_psi.empty();
    return r;
}

/// Single-qubit BLP value: the optimal pair is antipodal equatorial, with
/// evolved distance exp(-Gamma0).
inline double blp_single_qubit(const DecoherenceTable& t) {
    double N = 0.0;
    for (const auto& iv : negativity_intervals(t, RateCombination::Gamma1))
        N += std::exp(-decoherence_gamma0(iv.b, t.rp, t.tol)) -
             std::exp(-decoherence_gamma0(iv.a, t.rp, t.tol));
    return N;
}

struct PairBlp {
    double N = 0.0;
    std::vector<RateInterval> intervals;  // refined periods of increasing distance
};

namespace detail {

/// Evolved trace distance of a fixed Hermitian difference under the channel
/// exponents (the channel is linear, so the pair difference evolves alone).
inline double evolved_distance(const CMat4& diff0, const DephasingExponents& e) {
    CMat4 d;
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j)
            d(i, j) = diff0(i, j) * std::exp(-element_exponent(i, j, e));
    double s = 0.0;
    for (double ev : jacobi_eigenvalues(d)) s += std::abs(ev);
    return 0.5 * s;
}

/// Locate the boundary between rising and falling distance inside [lo, hi]
/// by bisection on the sign of the interpolated derivative.
inline double refine_extremum(const CMat4& diff0, const DecoherenceTable& t, double lo, double hi,
                              bool rising_right, double tau_tol) {
    auto dist = [&](double tau) {
        return evolved_distance(diff0, {t.Gamma0_at(tau), t.delta_at(tau)});
    };
    const double eps = 0.5e-8;
    while (hi - lo > tau_tol) {
        const double mid = 0.5 * (lo + hi);
        const bool rising = dist(mid + eps) > dist(mid - eps);
        if (rising == rising_right) hi = mid;
        else lo = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace detail

/// BLP functional for one pair of initial states: total increase of trace
/// distance over the grid, intervals of increase refined to 1e-8 in tau.
inline PairBlp blp_pair(const DensityMatrix4& r1, const DensityMatrix4& r2,
                        const DecoherenceTable& t, bool refine_intervals = true) {
    r1.validate();
    r2.validate();
    const CMat4 diff0 = r1.m - r2.m;
    const std::size_t n = t.size();
    std::vector<double> D(n);
    for (std::size_t i = 0; i < n; ++i)
        D[i] = detail::evolved_distance(diff0, {t.Gamma0[i], t.delta[i]});

    PairBlp r;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double inc = D[i + 1] - D[i];
        if (inc > 0.0) r.N += inc;
    }
    if (!refine_intervals) return r;

    constexpr double tau_tol = 1e-8;
    std::size_t i = 0;
    while (i + 1 < n) {
        if (D[i + 1] > D[i]) {
            const std::size_t i0 = i;
            while (i + 1 < n && D[i + 1] > D[i]) ++i;
            RateInterval iv;
            iv.a = (i0 == 0) ? t.tau.front()
                             : detail::refine_extremum(diff0, t, t.tau[i0 - 1], t.tau[i0 + 1], true, tau_tol);
            iv.b = (i + 1 >= n) ? t.tau.back()
                                : detail::refine_extremum(diff0, t, t.tau[i - 1], t.tau[i + 1], false, tau_tol);
            r.intervals.push_back(iv);
        } else {
            ++i;
        }
    }
    return r;
}

enum class AdditivityRegime { Subadditive, Superadditive, Equal };

struct AdditivityReport {
    double N_phi = 0.0;
    double N_psi = 0.0;
    double N2 = 0.0;
    double N1 = 0.0;
    double twoN1 = 0.0;
    AdditivityRegime regime = AdditivityRegime::Equal;
    std::size_t gamma1_interval_count = 0;  // Eq-style factorized identity assumes one
};

inline const char* to_string(AdditivityRegime r) {
    switch (r) {
        case AdditivityRegime::Subadditive: return "sub";
        case AdditivityRegime::Superadditive: return "super";
        default: return "equal";
    }
}

/// Two-qubit vs twice the single-qubit measure, with a small dead band so the
/// factorized boundary does not flap between regimes.
inline AdditivityReport additivity_report(const DecoherenceTable& t) {
    const NmReport bell = blp_bell_analytic(t);
    AdditivityReport r;
    r.N_phi = bell.N_phi;
    r.N_psi = bell.N_psi;
    r.N2 = bell.N_blp;
    r.N1 = blp_single_qubit(t);
    r.twoN1 = 2.0 * r.N1;
    r.gamma1_interval_count = negativity_intervals(t, RateCombination::Gamma1).size();
    constexpr double dead_band = 1e-9;
    if (r.N2 > r.twoN1 + dead_band) r.regime = AdditivityRegime::Superadditive;
    else if (r.N2 < r.twoN1 - dead_band) r.regime = AdditivityRegime::Subadditive;
    else r.regime = AdditivityRegime::Equal;
    return r;
}

/// Full per-parameter-point analysis used by scans and the CLI.
inline NmReport analyze_table(const DecoherenceTable& t) {
    NmReport r = blp_bell_analytic(t);
    r.N1 = blp_single_qubit(t);
    r.gamma1_negativity = negativity_intervals(t, RateCombination::Gamma1);
    return r;
}

} // namespace dephasim
