#pragma once

#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "dephasim/channel.hpp"
#include "dephasim/matrix.hpp"
#include "dephasim/measures.hpp"

namespace dephasim {

enum class PairCategory { Separable, Mixed, PureAndMixed, Pure, MaximallyEntangled };

inline constexpr std::array<PairCategory, 5> kAllCategories = {
    PairCategory::Separable, PairCategory::Mixed, PairCategory::PureAndMixed,
    PairCategory::Pure, PairCategory::MaximallyEntangled};

inline const char* to_string(PairCategory c) {
    switch (c) {
        case PairCategory::Separable: return "separable";
        case PairCategory::Mixed: return "mixed";
        case PairCategory::PureAndMixed: return "pure_and_mixed";
        case PairCategory::Pure: return "pure";
        default: return "maximally_entangled";
    }
}

// ---------------------------------------------------------------------------
// Reproducible randomness. Every draw consumes one counter value; the draw
// seed is splitmix64(seed ^ splitmix64(counter)) feeding a fresh mt19937_64
// (a fully specified, platform-independent engine). Uniforms come from the
// top 53 bits; normal variates use the Marsaglia polar method (fixed here, so
// CSV outputs are bit-reproducible everywhere).
// ---------------------------------------------------------------------------

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

struct Stream {
    std::mt19937_64 eng;

    explicit Stream(std::uint64_t s) : eng(s) {}

    double uniform() {  // in [0, 1)
        return static_cast<double>(eng() >> 11) * 0x1.0p-53;
    }

    /// Marsaglia polar method, pairwise; the spare value is kept.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
    }

    cplx cnormal() {
        const double re = normal();
        const double im = normal();
        return {re, im};
    }

  private:
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace detail

/// Deterministic pair source. Identical seed => identical pair sequence,
/// across platforms and thread counts.
struct SeededSampler {
    std::uint64_t seed = 0;
    std::uint64_t counter = 0;                    // next draw index
    std::array<std::uint64_t, 5> category_draws{}; // per-category draw counts

    explicit SeededSampler(std::uint64_t s = 0) : seed(s) {}

    detail::Stream next_stream() {
        return detail::Stream(detail::splitmix64(seed ^ detail::splitmix64(counter++)));
    }
};

namespace detail {

inline std::array<cplx, 4> haar_vector4(Stream& st) {
    std::array<cplx, 4> v;
    double norm2 = 0.0;
    for (auto& z : v) {
        z = st.cnormal();
        norm2 += std::norm(z);
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (auto& z : v) z *= inv;
    return v;
}

inline std::array<cplx, 2> haar_vector2(Stream& st) {
    std::array<cplx, 2> v{st.cnormal(), st.cnormal()};
    const double inv = 1.0 / std::sqrt(std::norm(v[0]) + std::norm(v[1]));
    v[0] *= inv;
    v[1] *= inv;
    return v;
}

/// Ginibre construction: G G^dag / Tr, uniformly distributed mixed state.
inline DensityMatrix4 ginibre_state(Stream& st) {
    CMat4 g;
    for (auto& z : g.a) z = st.cnormal();
    CMat4 rho = matmul(g, dagger(g));
    const double tr = trace(rho).real();
    DensityMatrix4 r;
    r.m = rho * cplx(1.0 / tr, 0.0);
    return r;
}

inline DensityMatrix4 haar_pure_state(Stream& st) { return pure_state(haar_vector4(st)); }

/// Haar 2x2 unitary: Gram-Schmidt on two Ginibre columns. This is QR with a
/// real positive R diagonal, so Q carries the Haar measure.
inline CMat2 haar_unitary2(Stream& st) {
    cplx a1 = st.cnormal(), a2 = st.cnormal();
    cplx b1 = st.cnormal(), b2 = st.cnormal();
    const double n1 = std::sqrt(std::norm(a1) + std::norm(a2));
    a1 /= n1;
    a2 /= n1;
    const cplx proj = std::conj(a1) * b1 + std::conj(a2) * b2;
    b1 -= proj * a1;
    b2 -= proj * a2;
    const double n2 = std::sqrt(std::norm(b1) + std::norm(b2));
    b1 /= n2;
    b2 /= n2;
    CMat2 u;
    u(0, 0) = a1; u(1, 0) = a2;
    u(0, 1) = b1; u(1, 1) = b2;
    return u;
}

/// (U_A x U_B)|Phi+>, a Haar-random maximally entangled state.
inline DensityMatrix4 random_max_entangled(Stream& st) {
    const CMat2 ua = haar_unitary2(st);
    const CMat2 ub = haar_unitary2(st);
    const CMat4 u = kron(ua, ub);
    const double q = 1.0 / std::sqrt(2.0);
    const std::array<cplx, 4> phi = {q, 0.0, 0.0, q};
    std::array<cplx, 4> psi{};
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) psi[i] += u(i, j) * phi[j];
    return pure_state(psi);
}

/// Convex mixture of up to max_terms pure product states with flat Dirichlet
/// weights (exponential draws, normalized).
inline DensityMatrix4 random_separable(Stream& st, int max_terms = 4) {
    std::array<double, 4> w{};
    double wsum = 0.0;
    for (int k = 0; k < max_terms; ++k) {
        w[k] = -std::log(1.0 - st.uniform());
        wsum += w[k];
    }
    DensityMatrix4 rho;
    for (int k = 0; k < max_terms; ++k) {
        const auto a = haar_vector2(st);
        const auto b = haar_vector2(st);
        std::array<cplx, 4> prod = {a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]};
        const double wk = w[k] / wsum;
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 4; ++j)
                rho.m(i, j) += wk * prod[i] * std::conj(prod[j]);
    }
    return rho;
}

} // namespace detail

/// Draw one pair of initial states in the requested category. The first two
/// maximally-entangled draws of a sampler are the fixed Bell pairs
/// (Phi+, Phi-) and (Psi+, Psi-); category recipes follow the module docs.
inline std::pair<DensityMatrix4, DensityMatrix4> sample_pair(PairCategory cat, SeededSampler& s) {
    detail::Stream st = s.next_stream();
    const std::size_t ci = static_cast<std::size_t>(cat);
    const std::uint64_t nth = s.category_draws[ci]++;
    switch (cat) {
        case PairCategory::Pure:
            return {detail::haar_pure_state(st), detail::haar_pure_state(st)};
        case PairCategory::Mixed:
            return {detail::ginibre_state(st), detail::ginibre_state(st)};
        case PairCategory::PureAndMixed:
            return {detail::haar_pure_state(st), detail::ginibre_state(st)};
        case PairCategory::Separable:
            return {detail::random_separable(st), detail::random_separable(st)};
        default:
            if (nth == 0) return {bell_phi_plus(), bell_phi_minus()};
            if (nth == 1) return {bell_psi_plus(), bell_psi_minus()};
            return {detail::random_max_entangled(st), detail::random_max_entangled(st)};
    }
}

/// One evaluated sample pair of a categorized scan.
struct SampledPair {
    std::size_t index = 0;
    PairCategory category = PairCategory::Separable;
    double N = 0.0;
};

struct SampledScan {
    std::vector<SampledPair> pairs;                    // in draw order
    std::map<std::string, double> max_by_category;
    std::size_t argmax_index = 0;
    DensityMatrix4 argmax_rho1, argmax_rho2;
};

/// Draw n_pairs round-robin over the five categories and evaluate the BLP
/// functional of each pair on the table grid. Pair generation is sequential
/// (cheap); evaluation is parallel with a deterministic reduction.
inline SampledScan sampled_scan(std::size_t n_pairs, const DecoherenceTable& table,
                                SeededSampler& s, unsigned jobs = 0) {
    if (n_pairs < 1) throw InvalidParams("sampled_scan: n_pairs must be >= 1");
    std::vector<std::pair<DensityMatrix4, DensityMatrix4>> drawn;
    drawn.reserve(n_pairs);
    SampledScan out;
    out.pairs.resize(n_pairs);
    for (std::size_t i = 0; i < n_pairs; ++i) {
        const PairCategory cat = kAllCategories[i % kAllCategories.size()];
        drawn.push_back(sample_pair(cat, s));
        out.pairs[i].index = i;
        out.pairs[i].category = cat;
    }
    if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n_pairs) return;
            out.pairs[i].N = blp_pair(drawn[i].first, drawn[i].second, table, false).N;
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < jobs; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    for (const auto& c : kAllCategories) out.max_by_category[to_string(c)] = 0.0;
    double best = -1.0;
    for (std::size_t i = 0; i < n_pairs; ++i) {
        auto& m = out.max_by_category[to_string(out.pairs[i].category)];
        m = std::max(m, out.pairs[i].N);
        if (out.pairs[i].N > best) {
            best = out.pairs[i].N;
            out.argmax_index = i;
        }
    }
    out.argmax_rho1 = drawn[out.argmax_index].first;
    out.argmax_rho2 = drawn[out.argmax_index].second;
    return out;
}

// Single-qubit samplers, used by the sampled single-qubit oracle.

inline DensityMatrix2 haar_pure_qubit(detail::Stream& st) {
    const auto v = detail::haar_vector2(st);
    DensityMatrix2 r;
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) r.m(i, j) = v[i] * std::conj(v[j]);
    return r;
}

inline DensityMatrix2 ginibre_qubit(detail::Stream& st) {
    CMat2 g;
    for (auto& z : g.a) z = st.cnormal();
    CMat2 rho = matmul(g, dagger(g));
    DensityMatrix2 r;
    r.m = rho * cplx(1.0 / trace(rho).real(), 0.0);
    return r;
}

} // namespace dephasim
