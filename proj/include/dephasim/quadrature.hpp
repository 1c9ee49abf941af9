#pragma once

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

#include "dephasim/errors.hpp"

namespace dephasim {
namespace quad {

// 15-point Kronrod extension of 7-point Gauss (QUADPACK dqk15 constants).
inline constexpr double kXgk[8] = {
    0.9914553711208126, 0.9491079123427585, 0.8648644233597691,
    0.7415311855993944, 0.5860872354676911, 0.4058451513773972,
    0.2077849550078985, 0.0};
inline constexpr double kWgk[8] = {
    0.02293532201052922, 0.06309209262997855, 0.1047900103222502,
    0.1406532597155259,  0.1690047266392679,  0.1903505780647854,
    0.2044329400752989,  0.2094821410847278};
inline constexpr double kWg[4] = {
    0.1294849661688697, 0.2797053914892767, 0.3818300505051189,
    0.4179591836734694};

struct PanelResult {
    double kronrod;  // 15-point estimate
    double err;      // QUADPACK-scaled error estimate
    double resabs;   // integral of |f|
};

/// One Gauss-Kronrod 7-15 panel over [a, b].
template <class F>
PanelResult gk15(F&& f, double a, double b) {
    const double h = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    const double fc = f(mid);
    double resk = kWgk[7] * fc;
    double resg = kWg[3] * fc;
    double resabs = kWgk[7] * std::abs(fc);
    double fv[7][2];
    for (int j = 0; j < 7; ++j) {
        const double dx = h * kXgk[j];
        fv[j][0] = f(mid - dx);
        fv[j][1] = f(mid + dx);
        const double sum = fv[j][0] + fv[j][1];
        resk += kWgk[j] * sum;
        resabs += kWgk[j] * (std::abs(fv[j][0]) + std::abs(fv[j][1]));
        if (j % 2 == 1) resg += kWg[(j - 1) / 2] * sum;
    }
    // deviation from the mean, for the QUADPACK error scaling
    const double mean = 0.5 * resk;
    double resasc = kWgk[7] * std::abs(fc - mean);
    for (int j = 0; j < 7; ++j)
        resasc += kWgk[j] * (std::abs(fv[j][0] - mean) + std::abs(fv[j][1] - mean));
    resasc *= std::abs(h);
    resabs *= std::abs(h);

    double err = std::abs((resk - resg) * h);
    if (resasc != 0.0 && err != 0.0)
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    const double round_floor = 50.0 * 2.220446049250313e-16 * resabs;
    err = std::max(err, round_floor);
    return {resk * h, err, resabs};
}

struct AdaptiveOptions {
    double rel_tol = 1e-10;
    double abs_tol = 0.0;     // floor on the acceptable total error
    int max_panels = 200000;  // subdivision budget
};

/// Adaptive panel subdivision starting from caller-supplied edges.
/// Converges when sum of panel errors <= max(rel_tol*|I|, abs_tol).
template <class F>
double integrate_adaptive(F&& f, const std::vector<double>& edges, const AdaptiveOptions& opt) {
    struct Panel {
        double a, b, value, err;
        bool operator<(const Panel& o) const { return err < o.err; }
    };
    std::priority_queue<Panel> heap;
    double total = 0.0, total_err = 0.0;
    for (size_t i = 0; i + 1 < edges.size(); ++i) {
        PanelResult r = gk15(f, edges[i], edges[i + 1]);
        heap.push({edges[i], edges[i + 1], r.kronrod, r.err});
        total += r.kronrod;
        total_err += r.err;
    }
    int n_panels = static_cast<int>(edges.size()) - 1;
    while (total_err > std::max(opt.rel_tol * std::abs(total), opt.abs_tol)) {
        if (n_panels >= opt.max_panels)
            throw QuadratureFailure("adaptive quadrature: panel budget exhausted (err=" +
                                    std::to_string(total_err) + ")");
        Panel worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b)
            throw QuadratureFailure("adaptive quadrature: panel width at rounding limit");
        PanelResult l = gk15(f, worst.a, mid);
        PanelResult r = gk15(f, mid, worst.b);
        total += l.kronrod + r.kronrod - worst.value;
        total_err += l.err + r.err - worst.err;
        heap.push({worst.a, mid, l.kronrod, l.err});
        heap.push({mid, worst.b, r.kronrod, r.err});
        ++n_panels;
    }
    return total;
}

/// Phase-graded panel edges on [0, kappa_max] for integrands of the form
/// envelope(k) * oscillation, where the local phase rate is dphase(k) and the
/// envelope decays like exp(-k^2 s^2 / 2). At full amplitude a panel holds at
/// most ~1.5 oscillation periods, where GK15 is accurate to ~1e-15 relative;
/// the phase budget grows linearly with the number of decades the envelope
/// has fallen (GK15 error grows by ~6e2 per added period, so error times
/// amplitude stays below ~1e-13 everywhere).
template <class DPhase>
std::vector<double> graded_edges(double kappa_max, double s, DPhase&& dphase, int min_panels = 8) {
    const double ln10 = 2.302585092994046;
    std::vector<double> edges{0.0};
    const double max_step = kappa_max / min_panels;
    double k = 0.0;
    while (k < kappa_max) {
        const double decades = 0.5 * k * k * s * s / ln10;
        const double budget = std::min(3.0 * M_PI + 2.0 * decades, 44.0); // radians
        double step = max_step;
        const double rate0 = std::abs(dphase(k));
        if (rate0 * step > budget) step = budget / rate0;
        // phase rate grows with k; re-evaluate at the tentative right edge
        const double rate1 = std::abs(dphase(std::min(k + step, kappa_max)));
        if (rate1 * step > budget) step = budget / rate1;
        k = (k + step >= kappa_max - 1e-12 * kappa_max) ? kappa_max : k + step;
        edges.push_back(k);
    }
    return edges;
}

} // namespace quad
} // namespace dephasim
