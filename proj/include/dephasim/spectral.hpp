#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <string>
#include <thread>
#include <vector>

#include "dephasim/errors.hpp"
#include "dephasim/params.hpp"
#include "dephasim/quadrature.hpp"

namespace dephasim {

// ---------------------------------------------------------------------------
// Integrand pieces. Reduced units throughout: kappa = k L, energies in E0,
// times in t0, rates in 1/t0.
//
//   gamma1(tau) = c   * int_0^inf dk k^2 e^{-k^2 s^2/2} sin(E_k tau)/(k^2+4g) (1 - sinc 2k)
//   gamma2(tau) = c/2 * int ...                                   * bracket_d(k)
//   E_k = k sqrt(g + k^2/4)
//   Gamma0 = 2 int_0^t gamma1,  delta = 4 int_0^t gamma2; the time integral is
//   carried out inside the k-integral: int_0^tau sin(E t') dt' = (1-cos(E tau))/E.
// ---------------------------------------------------------------------------

/// sin(x)/x with a series branch to avoid cancellation near zero.
inline double sinc(double x) {
    const double ax = std::abs(x);
    if (ax < 1e-4) {
        const double x2 = x * x;
        return 1.0 - x2 / 6.0 + (x2 * x2) / 120.0;
    }
    return std::sin(x) / x;
}

/// 1 - sinc(y), series branch for small y where the direct form cancels.
inline double one_minus_sinc(double y) {
    const double ay = std::abs(y);
    if (ay < 0.1) {
        const double y2 = y * y;
        return y2 / 6.0 * (1.0 - y2 / 20.0 * (1.0 - y2 / 42.0 * (1.0 - y2 / 72.0)));
    }
    return 1.0 - sinc(y);
}

/// Spatial factor of the cross-talk rate:
///   sinc(2k(d+1)) + sinc(2k(d-1)) - 2 sinc(2kd)
/// Taylor series at small argument (the three sinc's cancel to O(k^2)):
///   -(4/3)k^2 + (2/15)(6d^2+1)k^4 - (8/315)(15d^4+15d^2+1)k^6 + ...
inline double cross_talk_bracket(double kappa, double d) {
    const double x = 2.0 * kappa * (d + 1.0);
    if (std::abs(x) < 0.1) {
        const double k2 = kappa * kappa;
        const double d2 = d * d;
        return k2 * (-4.0 / 3.0 +
                     k2 * (2.0 / 15.0 * (6.0 * d2 + 1.0) -
                           k2 * 8.0 / 315.0 * (15.0 * d2 * d2 + 15.0 * d2 + 1.0)));
    }
    return sinc(2.0 * kappa * (d + 1.0)) + sinc(2.0 * kappa * (d - 1.0)) - 2.0 * sinc(2.0 * kappa * d);
}

/// Bogoliubov mode energy in units of E0: E(k) = k sqrt(g + k^2/4).
inline double bogoliubov_energy(double kappa, double g_tilde) {
    return kappa * std::sqrt(g_tilde + 0.25 * kappa * kappa);
}

/// dE/dk, used to bound the oscillation rate of sin(E tau).
inline double bogoliubov_denergy(double kappa, double g_tilde) {
    const double r = std::sqrt(g_tilde + 0.25 * kappa * kappa);
    return r + 0.25 * kappa * kappa / r;
}

/// Smooth envelope weight: k^2 e^{-k^2 s^2/2} / (k^2 + 4g).
inline double envelope_weight(double kappa, const ReducedParams& rp) {
    const double k2 = kappa * kappa;
    return k2 * std::exp(-0.5 * k2 * rp.s * rp.s) / (k2 + 4.0 * rp.g_tilde);
}

/// Upper bound on the domain: the Gaussian factor is < 1.3e-14 beyond 8/s.
inline double kappa_max(const ReducedParams& rp) { return 8.0 / rp.s; }

/// Natural magnitude of the rates, c * int k^2 e^{-k^2 s^2/2}/(k^2+4g) <= c sqrt(pi/2)/s.
/// Used as the reference scale for absolute quadrature floors.
inline double rate_scale(const ReducedParams& rp) {
    return rp.c_rate * std::sqrt(M_PI / 2.0) / rp.s;
}

namespace detail {

inline std::vector<double> rate_edges(const ReducedParams& rp, double tau, double spatial_freq) {
    return quad::graded_edges(kappa_max(rp), rp.s, [&](double k) {
        return tau * bogoliubov_denergy(k, rp.g_tilde) + spatial_freq;
    });
}

inline quad::AdaptiveOptions rate_options(const ReducedParams& rp, double tol) {
    if (tol <= 0.0) throw InvalidParams("quadrature tolerance must be positive");
    quad::AdaptiveOptions opt;
    opt.rel_tol = tol;
    opt.abs_tol = 0.1 * tol * rate_scale(rp);
    return opt;
}

} // namespace detail

/// Individual dephasing rate gamma1(tau); independent of the separation d.
inline double gamma1(double tau, const ReducedParams& rp, double tol) {
    if (tau < 0.0) throw InvalidParams("gamma1: tau must be nonnegative");
    if (tau == 0.0) return 0.0;
    const double pref = rp.c_rate;
    auto f = [&, pref](double k) {
        return pref * envelope_weight(k, rp) * one_minus_sinc(2.0 * k) *
               std::sin(bogoliubov_energy(k, rp.g_tilde) * tau);
    };
    const auto edges = detail::rate_edges(rp, tau, 2.0);
    return quad::integrate_adaptive(f, edges, detail::rate_options(rp, tol));
}

/// Cross-talk rate gamma2(tau); decays to zero as d grows.
inline double gamma2(double tau, const ReducedParams& rp, double tol) {
    if (tau < 0.0) throw InvalidParams("gamma2: tau must be nonnegative");
    if (rp.d < 4.0) throw InvalidParams("gamma2: d must be >= 4");
    if (tau == 0.0) return 0.0;
    const double pref = 0.5 * rp.c_rate;
    auto f = [&, pref](double k) {
        return pref * envelope_weight(k, rp) * cross_talk_bracket(k, rp.d) *
               std::sin(bogoliubov_energy(k, rp.g_tilde) * tau);
    };
    const auto edges = detail::rate_edges(rp, tau, 2.0 * (rp.d + 1.0));
    return quad::integrate_adaptive(f, edges, detail::rate_options(rp, tol));
}

/// Single-qubit decoherence function Gamma0(tau) = 2 int_0^tau gamma1, with
/// the time integral done analytically inside the k-integral. Nonnegative.
inline double decoherence_gamma0(double tau, const ReducedParams& rp, double tol) {
    if (tau < 0.0) throw InvalidParams("Gamma0: tau must be nonnegative");
    if (tau == 0.0) return 0.0;
    if (tol <= 0.0) throw InvalidParams("Gamma0: tol must be positive");
    const double pref = 2.0 * rp.c_rate;
    auto f = [&, pref](double k) {
        const double E = bogoliubov_energy(k, rp.g_tilde);
        const double si = std::sin(0.5 * E * tau);
        // (1 - cos(E tau))/E = 2 sin^2(E tau / 2)/E;  -> tau^2 E /2 as E -> 0
        const double timef = (E > 0.0) ? 2.0 * si * si / E : 0.0;
        return pref * envelope_weight(k, rp) * one_minus_sinc(2.0 * k) * timef;
    };
    const auto edges = detail::rate_edges(rp, tau, 2.0);
    quad::AdaptiveOptions opt;
    opt.rel_tol = tol;  // nonnegative integrand, no cancellation
    return quad::integrate_adaptive(f, edges, opt);
}

/// Cross-talk decoherence correction delta(tau) = 4 int_0^tau gamma2.
inline double decoherence_delta(double tau, const ReducedParams& rp, double tol) {
    if (tau < 0.0) throw InvalidParams("delta: tau must be nonnegative");
    if (rp.d < 4.0) throw InvalidParams("delta: d must be >= 4");
    if (tau == 0.0) return 0.0;
    const double pref = 2.0 * rp.c_rate;
    auto f = [&, pref](double k) {
        const double E = bogoliubov_energy(k, rp.g_tilde);
        const double si = std::sin(0.5 * E * tau);
        const double timef = (E > 0.0) ? 2.0 * si * si / E : 0.0;
        return pref * envelope_weight(k, rp) * cross_talk_bracket(k, rp.d) * timef;
    };
    const auto edges = detail::rate_edges(rp, tau, 2.0 * (rp.d + 1.0));
    quad::AdaptiveOptions opt;
    opt.rel_tol = tol;
    // delta may cancel to near zero at large d; its physical scale is Gamma0
    opt.abs_tol = tol * std::max(decoherence_gamma0(tau, rp, tol), 0.01 * rate_scale(rp));
    return quad::integrate_adaptive(f, edges, opt);
}

// ---------------------------------------------------------------------------
// Grid evaluation. One Gauss-Kronrod panelization (sized for the largest tau)
// is shared by all grid points; per node the phase E*tau advances by a fixed
// rotation per time step, re-synchronized from libm trig every kChunk steps.
// Chunk boundaries are fixed by index, so results are bitwise independent of
// the number of worker threads.
// ---------------------------------------------------------------------------

namespace detail {

inline constexpr std::size_t kChunk = 128;

struct SpectralNodes {
    std::vector<double> E;            // mode energy per node
    std::vector<double> wA1, wA2;     // Kronrod weight x amplitude (rate integrands)
    std::vector<double> wA1E, wA2E;   // same over E (decoherence-function integrands)
};

inline SpectralNodes build_nodes(const ReducedParams& rp, double tau_max) {
    const auto edges = rate_edges(rp, tau_max, 2.0 * (rp.d + 1.0));
    SpectralNodes n;
    const std::size_t m = (edges.size() - 1) * 15;
    n.E.reserve(m); n.wA1.reserve(m); n.wA2.reserve(m);
    n.wA1E.reserve(m); n.wA2E.reserve(m);
    for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
        const double h = 0.5 * (edges[p + 1] - edges[p]);
        const double mid = 0.5 * (edges[p] + edges[p + 1]);
        for (int j = -7; j <= 7; ++j) {
            const double k = mid + h * ((j < 0) ? -quad::kXgk[-j - 1] : (j > 0) ? quad::kXgk[7 - j] : 0.0);
            const double w = h * quad::kWgk[(j < 0) ? (-j - 1) : (j > 0) ? (7 - j) : 7];
            const double W = envelope_weight(k, rp);
            const double E = bogoliubov_energy(k, rp.g_tilde);
            const double a1 = W * one_minus_sinc(2.0 * k);
            const double a2 = W * cross_talk_bracket(k, rp.d);
            n.E.push_back(E);
            n.wA1.push_back(w * a1);
            n.wA2.push_back(w * a2);
            n.wA1E.push_back(E > 0.0 ? w * a1 / E : 0.0);
            n.wA2E.push_back(E > 0.0 ? w * a2 / E : 0.0);
        }
    }
    return n;
}

/// Evaluate the four spectral quantities at tau_i = i*h for i in [0, count).
/// G0/de output pointers may be null to skip the decoherence functions.
inline void eval_grid(const SpectralNodes& nodes, const ReducedParams& rp, double h,
                      std::size_t count, double* g1, double* g2, double* G0, double* de,
                      unsigned jobs) {
    const std::size_t m = nodes.E.size();
    if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
    // per-step rotation angles, shared by all chunks
    std::vector<double> rot_s(m), rot_c(m);
    for (std::size_t j = 0; j < m; ++j) {
        rot_s[j] = std::sin(nodes.E[j] * h);
        rot_c[j] = std::cos(nodes.E[j] * h);
    }
    const std::size_t n_chunks = (count + kChunk - 1) / kChunk;
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        std::vector<double> sn(m), cs(m);
        for (;;) {
            const std::size_t chunk = next.fetch_add(1);
            if (chunk >= n_chunks) return;
            const std::size_t i0 = chunk * kChunk;
            const std::size_t i1 = std::min(count, i0 + kChunk);
            const double tau0 = static_cast<double>(i0) * h;
            for (std::size_t j = 0; j < m; ++j) {
                sn[j] = std::sin(nodes.E[j] * tau0);
                cs[j] = std::cos(nodes.E[j] * tau0);
            }
            for (std::size_t i = i0; i < i1; ++i) {
                double a1 = 0.0, a2 = 0.0;
                if (G0 != nullptr) {
                    double b1 = 0.0, b2 = 0.0;
                    for (std::size_t j = 0; j < m; ++j) {
                        a1 += nodes.wA1[j] * sn[j];
                        a2 += nodes.wA2[j] * sn[j];
                        const double omc = 1.0 - cs[j];
                        b1 += nodes.wA1E[j] * omc;
                        b2 += nodes.wA2E[j] * omc;
                    }
                    G0[i] = 2.0 * rp.c_rate * b1;
                    de[i] = 2.0 * rp.c_rate * b2;
                } else {
                    for (std::size_t j = 0; j < m; ++j) {
                        a1 += nodes.wA1[j] * sn[j];
                        a2 += nodes.wA2[j] * sn[j];
                    }
                }
                g1[i] = rp.c_rate * a1;
                g2[i] = 0.5 * rp.c_rate * a2;
                if (i + 1 < i1) {
                    for (std::size_t j = 0; j < m; ++j) {
                        const double s2 = sn[j] * rot_c[j] + cs[j] * rot_s[j];
                        cs[j] = cs[j] * rot_c[j] - sn[j] * rot_s[j];
                        sn[j] = s2;
                    }
                }
            }
        }
    };
    const unsigned n_threads = std::min<std::size_t>(jobs, n_chunks);
    for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
}

} // namespace detail

// ---------------------------------------------------------------------------

/// Sampled rates and decoherence functions on a uniform time grid.
struct DecoherenceTable {
    std::vector<double> tau;     ///< strictly increasing, tau[0] = 0
    std::vector<double> gamma1;  ///< in 1/t0
    std::vector<double> gamma2;
    std::vector<double> Gamma0;  ///< dimensionless, Gamma0[0] = 0
    std::vector<double> delta;
    ReducedParams rp;
    double tol = 1e-10;

    std::size_t size() const { return tau.size(); }
    double tau_max() const { return tau.back(); }
    double step() const { return tau[1] - tau[0]; }

    /// Cubic-Hermite interpolation of Gamma0 (derivative 2*gamma1 is known).
    double Gamma0_at(double t) const { return hermite(Gamma0, gamma1, 2.0, t); }
    /// Cubic-Hermite interpolation of delta (derivative 4*gamma2).
    double delta_at(double t) const { return hermite(delta, gamma2, 4.0, t); }

  private:
    double hermite(const std::vector<double>& f, const std::vector<double>& df,
                   double dscale, double t) const {
        const double h = step();
        if (t <= 0.0) return f.front();
        if (t >= tau.back()) return f.back();
        std::size_t i = std::min(static_cast<std::size_t>(t / h), f.size() - 2);
        const double u = (t - tau[i]) / h;
        const double u2 = u * u, u3 = u2 * u;
        return f[i] * (2 * u3 - 3 * u2 + 1) + f[i + 1] * (-2 * u3 + 3 * u2) +
               h * dscale * df[i] * (u3 - 2 * u2 + u) + h * dscale * df[i + 1] * (u3 - u2);
    }
};

/// Build the table by the shared-panelization fast path, then validate a few
/// grid points against the adaptive integrator.
inline DecoherenceTable build_table(const ReducedParams& rp, double tau_max, std::size_t n_steps,
                                    double tol, unsigned jobs = 0) {
    if (tau_max <= 0.0) throw InvalidParams("build_table: tau_max must be positive");
    if (n_steps < 64) throw InvalidParams("build_table: n_steps must be >= 64");
    if (tol <= 0.0) throw InvalidParams("build_table: tol must be positive");

    DecoherenceTable t;
    t.rp = rp;
    t.tol = tol;
    const std::size_t n = n_steps + 1;
    t.tau.resize(n);
    t.gamma1.resize(n); t.gamma2.resize(n); t.Gamma0.resize(n); t.delta.resize(n);
    const double h = tau_max / static_cast<double>(n_steps);
    for (std::size_t i = 0; i < n; ++i) t.tau[i] = static_cast<double>(i) * h;

    const auto nodes = detail::build_nodes(rp, tau_max);
    detail::eval_grid(nodes, rp, h, n, t.gamma1.data(), t.gamma2.data(),
                      t.Gamma0.data(), t.delta.data(), jobs);

    // spot-validate the fast path against the adaptive reference
    const double scale = rate_scale(rp);
    for (std::size_t i : {n_steps, n_steps / 2, n_steps / 8}) {
        if (i == 0) continue;
        const double tau = t.tau[i];
        const double r1 = gamma1(tau, rp, tol);
        const double r2 = gamma2(tau, rp, tol);
        const double q0 = decoherence_gamma0(tau, rp, tol);
        const double qd = decoherence_delta(tau, rp, tol);
        auto close = [&](double a, double b, double ref) {
            return std::abs(a - b) <= 20.0 * tol * (std::abs(b) + ref);
        };
        if (!close(t.gamma1[i], r1, scale) || !close(t.gamma2[i], r2, scale) ||
            !close(t.Gamma0[i], q0, scale) || !close(t.delta[i], qd, q0 + 0.01 * scale))
            throw QuadratureFailure("build_table: fast path disagrees with adaptive reference at tau=" +
                                    std::to_string(tau));
    }
    return t;
}

// ---------------------------------------------------------------------------

struct HorizonOptions {
    double step = 1.0 / 16.0;    ///< marching grid spacing (t0 units)
    double window_frac = 0.25;   ///< quiet window length as a fraction of the horizon
    double hard_cap = 4096.0;    ///< give up beyond this time
};

namespace detail {

/// Horizon search; returns a negative value instead of throwing when no quiet
/// window exists below the cap.
inline double horizon_search(const ReducedParams& rp, double eta, const HorizonOptions& opt) {
    if (!(eta > 0.0 && eta < 1.0)) throw InvalidParams("auto_horizon: eta must be in (0,1)");
    double T = 64.0;
    std::vector<double> env;
    for (;;) {
        T = std::min(T, opt.hard_cap);
        const std::size_t count = static_cast<std::size_t>(std::floor(T / opt.step)) + 1;
        const auto nodes = build_nodes(rp, T);
        std::vector<double> g1(count), g2(count);
        eval_grid(nodes, rp, opt.step, count, g1.data(), g2.data(), nullptr, nullptr, 0);
        env.resize(count);
        for (std::size_t i = 0; i < count; ++i) env[i] = std::max(std::abs(g1[i]), std::abs(g2[i]));

        double peak = 0.0;
        std::size_t ipk = 0;
        for (std::size_t i = 0; i < count; ++i)
            if (env[i] > peak) { peak = env[i]; ipk = i; }
        if (peak == 0.0) return opt.step; // degenerate zero-coupling input

        for (std::size_t i = ipk + 1; i < count; ++i) {
            const double H = static_cast<double>(i) * opt.step;
            const std::size_t jend = static_cast<std::size_t>(std::ceil(H * (1.0 + opt.window_frac) / opt.step));
            if (jend >= count) break;
            bool quiet = true;
            for (std::size_t j = i; j <= jend && quiet; ++j) quiet = env[j] < eta * peak;
            if (quiet) return H;
        }
        if (T >= opt.hard_cap) return -1.0;
        T *= 2.0;
    }
}

} // namespace detail

/// Smallest grid time H after which max(|gamma1|,|gamma2|) stays below
/// eta * (its global peak) throughout [H, (1+window_frac) H].
inline double auto_horizon(const ReducedParams& rp, double eta, HorizonOptions opt = {}) {
    const double H = detail::horizon_search(rp, eta, opt);
    if (H < 0.0)
        throw HorizonNotFound("auto_horizon: no quiet window below hard cap " +
                              std::to_string(opt.hard_cap));
    return H;
}

/// Default analysis window: the eta = 1e-4 horizon, capped at 40 t0. The cap
/// keeps the window clear of the late environment-mediated retardation signal
/// that arrives from the far qubit (see README); every CLI command accepts an
/// explicit --tau-max to override it.
inline constexpr double kDefaultTauCap = 40.0;
inline constexpr std::size_t kDefaultSteps = 2048;

inline double default_tau_max(const ReducedParams& rp) {
    HorizonOptions opt;
    opt.hard_cap = 64.0; // anything quiet only beyond 64 t0 is capped anyway
    const double H = detail::horizon_search(rp, 1e-4, opt);
    return (H < 0.0) ? kDefaultTauCap : std::min(H, kDefaultTauCap);
}

} // namespace dephasim
