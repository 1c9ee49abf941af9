#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>

#include "dephasim/errors.hpp"

namespace dephasim {

using cplx = std::complex<double>;

/// Dense complex N x N matrix, row-major, value semantics.
template <std::size_t N>
struct CMat {
    std::array<cplx, N * N> a{};

    cplx& operator()(std::size_t i, std::size_t j) { return a[i * N + j]; }
    const cplx& operator()(std::size_t i, std::size_t j) const { return a[i * N + j]; }

    static CMat identity() {
        CMat m;
        for (std::size_t i = 0; i < N; ++i) m(i, i) = 1.0;
        return m;
    }

    CMat& operator+=(const CMat& o) {
        for (std::size_t i = 0; i < N * N; ++i) a[i] += o.a[i];
        return *this;
    }
    CMat& operator-=(const CMat& o) {
        for (std::size_t i = 0; i < N * N; ++i) a[i] -= o.a[i];
        return *this;
    }
    CMat& operator*=(const cplx& z) {
        for (std::size_t i = 0; i < N * N; ++i) a[i] *= z;
        return *this;
    }
    friend CMat operator+(CMat l, const CMat& r) { return l += r; }
    friend CMat operator-(CMat l, const CMat& r) { return l -= r; }
    friend CMat operator*(CMat l, const cplx& z) { return l *= z; }
    friend CMat operator*(const cplx& z, CMat r) { return r *= z; }
};

using CMat2 = CMat<2>;
using CMat4 = CMat<4>;

template <std::size_t N>
cplx trace(const CMat<N>& m) {
    cplx t = 0.0;
    for (std::size_t i = 0; i < N; ++i) t += m(i, i);
    return t;
}

template <std::size_t N>
CMat<N> dagger(const CMat<N>& m) {
    CMat<N> r;
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < N; ++j) r(i, j) = std::conj(m(j, i));
    return r;
}

template <std::size_t N>
CMat<N> matmul(const CMat<N>& x, const CMat<N>& y) {
    CMat<N> r;
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t k = 0; k < N; ++k) {
            const cplx xik = x(i, k);
            for (std::size_t j = 0; j < N; ++j) r(i, j) += xik * y(k, j);
        }
    return r;
}

inline CMat4 kron(const CMat2& x, const CMat2& y) {
    CMat4 r;
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            for (std::size_t k = 0; k < 2; ++k)
                for (std::size_t l = 0; l < 2; ++l)
                    r(2 * i + k, 2 * j + l) = x(i, j) * y(k, l);
    return r;
}

/// max_ij |m_ij - conj(m_ji)|
template <std::size_t N>
double hermiticity_error(const CMat<N>& m) {
    double e = 0.0;
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < N; ++j)
            e = std::max(e, std::abs(m(i, j) - std::conj(m(j, i))));
    return e;
}

template <std::size_t N>
double frobenius_norm(const CMat<N>& m) {
    double s = 0.0;
    for (const auto& z : m.a) s += std::norm(z);
    return std::sqrt(s);
}

/// Eigenvalues of a Hermitian matrix by cyclic complex Jacobi rotations.
/// Unconditionally stable at this size and dependency-free. Off-diagonal norm
/// is driven below off_tol * ||A||_F; more than max_sweeps sweeps raises
/// EigenFailure.
template <std::size_t N>
std::array<double, N> jacobi_eigenvalues(CMat<N> m, double off_tol = 1e-14, int max_sweeps = 50) {
    const double scale = frobenius_norm(m);
    if (scale == 0.0) return {};
    auto off_norm = [&]() {
        double s = 0.0;
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t j = i + 1; j < N; ++j) s += 2.0 * std::norm(m(i, j));
        return std::sqrt(s);
    };
    int sweep = 0;
    while (off_norm() > off_tol * scale) {
        if (++sweep > max_sweeps)
            throw EigenFailure("jacobi_eigenvalues: sweep budget exhausted");
        for (std::size_t p = 0; p < N; ++p)
            for (std::size_t q = p + 1; q < N; ++q) {
                const double r = std::abs(m(p, q));
                if (r <= 1e-300) continue;
                const cplx phase = m(p, q) / r;
                const double app = m(p, p).real();
                const double aqq = m(q, q).real();
                // zero A_pq by the unitary [[c, s*phase], [-s*conj(phase), c]]
                const double beta = (app - aqq) / (2.0 * r);
                const double t = (beta >= 0.0) ? -1.0 / (beta + std::sqrt(beta * beta + 1.0))
                                               : 1.0 / (-beta + std::sqrt(beta * beta + 1.0));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (std::size_t i = 0; i < N; ++i) {
                    const cplx aip = m(i, p), aiq = m(i, q);
                    m(i, p) = c * aip - s * std::conj(phase) * aiq;
                    m(i, q) = s * phase * aip + c * aiq;
                }
                for (std::size_t j = 0; j < N; ++j) {
                    const cplx apj = m(p, j), aqj = m(q, j);
                    m(p, j) = c * apj - s * phase * aqj;
                    m(q, j) = s * std::conj(phase) * apj + c * aqj;
                }
                m(p, q) = 0.0;
                m(q, p) = 0.0;
            }
    }
    std::array<double, N> ev;
    for (std::size_t i = 0; i < N; ++i) ev[i] = m(i, i).real();
    return ev;
}

} // namespace dephasim
