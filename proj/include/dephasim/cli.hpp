#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "dephasim/csv.hpp"
#include "dephasim/measures.hpp"
#include "dephasim/params.hpp"
#include "dephasim/sampling.hpp"
#include "dephasim/spectral.hpp"
#include "dephasim/svg.hpp"

namespace dephasim {
namespace cli {

struct RunOptions {
    ConfigValues config;
    double tol = 1e-10;
    unsigned jobs = 0;          ///< 0 = hardware concurrency
    std::string out_dir = ".";
    std::uint64_t seed = 12345;
    double tau_max = 0.0;       ///< 0 = default window
    std::size_t n_steps = kDefaultSteps;
};

struct ScanSpec {
    enum class Axis { DOverL, ABOverARb };
    Axis axis = Axis::DOverL;
    std::vector<double> values;
};

namespace detail {

inline double resolve_tau_max(const RunOptions& o, const ReducedParams& rp) {
    if (o.tau_max > 0.0) return o.tau_max;
    return default_tau_max(rp);
}

inline void common_meta(CsvWriter& w, const char* command, const RunOptions& o,
                        const ReducedParams& rp, double tau_max) {
    w.meta("command", command);
    w.meta("m_E_amu", o.config.m_E_amu);
    w.meta("m_S_amu", o.config.m_S_amu);
    w.meta("a_B_over_aRb", o.config.a_B_over_aRb);
    w.meta("a_SE_over_a0", o.config.a_SE_over_a0);
    w.meta("n0_per_m3", o.config.n0_per_m3);
    w.meta("lambda_nm", o.config.lambda_nm);
    w.meta("sigma_nm", o.config.sigma_nm);
    w.meta("D_over_L", o.config.D_over_L);
    w.meta("d", rp.d);
    w.meta("s", rp.s);
    w.meta("g_tilde", rp.g_tilde);
    w.meta("c_rate", rp.c_rate);
    w.meta("t0_s", rp.t0);
    w.meta("tol", o.tol);
    w.meta("n_steps", o.n_steps);
    w.meta("tau_max", tau_max);
}

inline std::string out_path(const RunOptions& o, const std::string& name) {
    std::filesystem::create_directories(o.out_dir);
    return (std::filesystem::path(o.out_dir) / name).string();
}

inline DecoherenceTable make_table(const RunOptions& o, const ReducedParams& rp, double tau_max,
                                   unsigned jobs_override = 0) {
    return build_table(rp, tau_max, o.n_steps, o.tol,
                       jobs_override ? jobs_override : o.jobs);
}

inline const char* rate_label(RateCombination c) {
    switch (c) {
        case RateCombination::Gamma1: return "gamma1";
        case RateCombination::Sum: return "gamma1+gamma2";
        default: return "gamma1-gamma2";
    }
}

inline void interval_rows(CsvWriter& w, const std::vector<RateInterval>& ivs, RateCombination c) {
    for (const auto& iv : ivs)
        w.row({format_number(iv.a), format_number(iv.b), rate_label(c)});
}

inline std::vector<std::string> state_header() {
    static const char* basis[4] = {"00", "01", "10", "11"};
    std::vector<std::string> h;
    for (int part = 0; part < 2; ++part)
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                h.push_back(std::string(part == 0 ? "re_" : "im_") + basis[i] + "_" + basis[j]);
    return h;
}

inline void append_state(std::vector<double>& row, const CMat4& m) {
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) row.push_back(m(i, j).real());
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) row.push_back(m(i, j).imag());
}

} // namespace detail

/// rates: sampled gamma1, gamma2 and their sum/difference.
inline int cmd_rates(const RunOptions& o) {
    const ReducedParams rp = reduce(o.config.to_physical());
    const double tau_max = detail::resolve_tau_max(o, rp);
    const DecoherenceTable t = detail::make_table(o, rp, tau_max);
    CsvWriter w;
    detail::common_meta(w, "rates", o, rp, tau_max);
    w.header({"tau", "gamma1", "gamma2", "gamma_sum", "gamma_diff"});
    for (std::size_t i = 0; i < t.size(); ++i)
        w.row_numbers({t.tau[i], t.gamma1[i], t.gamma2[i],
                       t.gamma1[i] + t.gamma2[i], t.gamma1[i] - t.gamma2[i]});
    w.write_file(detail::out_path(o, "rates.csv"));
    return 0;
}

/// evolve: exact channel applied to a chosen initial state at each grid time.
inline int cmd_evolve(const RunOptions& o, const std::string& initial) {
    const ReducedParams rp = reduce(o.config.to_physical());
    const double tau_max = detail::resolve_tau_max(o, rp);
    const DecoherenceTable t = detail::make_table(o, rp, tau_max);

    DensityMatrix4 rho0;
    if (initial == "phi+") rho0 = bell_phi_plus();
    else if (initial == "phi-") rho0 = bell_phi_minus();
    else if (initial == "psi+") rho0 = bell_psi_plus();
    else if (initial == "psi-") rho0 = bell_psi_minus();
    else if (initial == "plus") {
        const cplx h(0.5, 0.0);
        rho0 = pure_state({h, h, h, h});
    } else if (initial == "ginibre") {
        SeededSampler s(o.seed);
        auto st = s.next_stream();
        rho0 = dephasim::detail::ginibre_state(st);
    } else {
        throw InvalidParams("evolve: unknown initial state '" + initial + "'");
    }

    CsvWriter w;
    detail::common_meta(w, "evolve", o, rp, tau_max);
    w.meta("initial", initial);
    if (initial == "ginibre") w.meta("seed", static_cast<std::size_t>(o.seed));
    std::vector<std::string> hdr{"tau"};
    for (auto& c : detail::state_header()) hdr.push_back(c);
    w.header(hdr);
    for (std::size_t i = 0; i < t.size(); ++i) {
        const DensityMatrix4 rho = apply_two_qubit(rho0, {t.Gamma0[i], t.delta[i]});
        std::vector<double> row{t.tau[i]};
        detail::append_state(row, rho.m);
        w.row_numbers(row);
    }
    w.write_file(detail::out_path(o, "evolve.csv"));
    return 0;
}

/// divisibility: negativity intervals of the two decay-rate combinations.
inline int cmd_divisibility(const RunOptions& o) {
    const ReducedParams rp = reduce(o.config.to_physical());
    const double tau_max = detail::resolve_tau_max(o, rp);
    const DecoherenceTable t = detail::make_table(o, rp, tau_max);
    const DivisibilityReport r = divisibility(t);
    CsvWriter w;
    detail::common_meta(w, "divisibility", o, rp, tau_max);
    w.meta("divisible", std::string(r.divisible ? "1" : "0"));
    w.header({"t_start", "t_end", "rate_combination"});
    detail::interval_rows(w, r.negativity_sum, RateCombination::Sum);
    detail::interval_rows(w, r.negativity_diff, RateCombination::Diff);
    w.write_file(detail::out_path(o, "divisibility.csv"));
    return 0;
}

/// blp: Bell-pair analytic measure plus single-qubit value and intervals.
inline int cmd_blp(const RunOptions& o) {
    const ReducedParams rp = reduce(o.config.to_physical());
    const double tau_max = detail::resolve_tau_max(o, rp);
    const DecoherenceTable t = detail::make_table(o, rp, tau_max);
    const NmReport r = analyze_table(t);

    CsvWriter w;
    detail::common_meta(w, "blp", o, rp, tau_max);
    w.header({"N_phi", "N_psi", "N_blp", "N1", "twoN1", "divisible"});
    w.row({format_number(r.N_phi), format_number(r.N_psi), format_number(r.N_blp),
           format_number(r.N1), format_number(2.0 * r.N1), r.divisible ? "1" : "0"});
    w.write_file(detail::out_path(o, "blp.csv"));

    CsvWriter wb;
    detail::common_meta(wb, "blp-backflow", o, rp, tau_max);
    wb.header({"t_start", "t_end", "rate_combination"});
    detail::interval_rows(wb, r.backflow_phi, RateCombination::Sum);
    detail::interval_rows(wb, r.backflow_psi, RateCombination::Diff);
    detail::interval_rows(wb, r.gamma1_negativity, RateCombination::Gamma1);
    wb.write_file(detail::out_path(o, "backflow.csv"));
    return 0;
}

/// additivity: two-qubit measure against twice the single-qubit measure.
inline int cmd_additivity(const RunOptions& o) {
    const ReducedParams rp = reduce(o.config.to_physical());
    const double tau_max = detail::resolve_tau_max(o, rp);
    const DecoherenceTable t = detail::make_table(o, rp, tau_max);
    const AdditivityReport r = additivity_report(t);
    CsvWriter w;
    detail::common_meta(w, "additivity", o, rp, tau_max);
    w.meta("gamma1_intervals", r.gamma1_interval_count);
    w.header({"N_phi", "N_psi", "N2", "N1", "twoN1", "regime"});
    w.row({format_number(r.N_phi), format_number(r.N_psi), format_number(r.N2),
           format_number(r.N1), format_number(r.twoN1), to_string(r.regime)});
    w.write_file(detail::out_path(o, "additivity.csv"));
    return 0;
}

/// scan: measures along one parameter axis; rows in axis order. Failed points
/// are reported on stderr and omitted (partial results, nonzero exit).
inline int cmd_scan(const RunOptions& o, const ScanSpec& spec) {
    if (spec.values.empty()) throw InvalidParams("scan: empty value list");
    for (std::size_t i = 0; i + 1 < spec.values.size(); ++i)
        if (!(spec.values[i] < spec.values[i + 1]))
            throw InvalidParams("scan: values must be strictly increasing");
    if (spec.axis == ScanSpec::Axis::DOverL)
        for (double v : spec.values)
            if (v < 4.0) throw InvalidParams("scan: D_over_L values must be >= 4");

    struct Point {
        bool ok = false;
        std::string error;
        NmReport r;
        double tau_max = 0.0;
    };
    std::vector<Point> pts(spec.values.size());
    std::atomic<std::size_t> next{0};
    unsigned jobs = o.jobs ? o.jobs : std::max(1u, std::thread::hardware_concurrency());
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= spec.values.size()) return;
            try {
                ConfigValues c = o.config;
                if (spec.axis == ScanSpec::Axis::DOverL) c.D_over_L = spec.values[i];
                else c.a_B_over_aRb = spec.values[i];
                const ReducedParams rp = reduce(c.to_physical());
                RunOptions po = o;
                po.config = c;
                const double tau_max = detail::resolve_tau_max(po, rp);
                const DecoherenceTable t = detail::make_table(po, rp, tau_max, 1);
                pts[i].r = analyze_table(t);
                pts[i].tau_max = tau_max;
                pts[i].ok = true;
            } catch (const std::exception& e) {
                pts[i].error = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < jobs; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    const ReducedParams rp0 = reduce(o.config.to_physical());
    CsvWriter w;
    detail::common_meta(w, "scan", o, rp0, o.tau_max);
    w.meta("axis", spec.axis == ScanSpec::Axis::DOverL ? "D_over_L" : "a_B_over_aRb");
    w.header({"param", "N_phi", "N_psi", "N_blp", "N1", "twoN1", "divisible"});
    int failures = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (!pts[i].ok) {
            std::cerr << "scan: point " << format_number(spec.values[i]) << " failed: "
                      << pts[i].error << "\n";
            ++failures;
            continue;
        }
        const NmReport& r = pts[i].r;
        w.row({format_number(spec.values[i]), format_number(r.N_phi), format_number(r.N_psi),
               format_number(r.N_blp), format_number(r.N1), format_number(2.0 * r.N1),
               r.divisible ? "1" : "0"});
    }
    w.write_file(detail::out_path(o, "scan.csv"));
    return failures ? 1 : 0;
}

/// pairs: categorized random-pair sampling scan with argmax sidecar.
inline int cmd_pairs(const RunOptions& o, std::size_t n_pairs) {
    const ReducedParams rp = reduce(o.config.to_physical());
    const double tau_max = detail::resolve_tau_max(o, rp);
    const DecoherenceTable t = detail::make_table(o, rp, tau_max);
    SeededSampler sampler(o.seed);
    const SampledScan scan = sampled_scan(n_pairs, t, sampler, o.jobs);

    CsvWriter w;
    detail::common_meta(w, "pairs", o, rp, tau_max);
    w.meta("seed", static_cast<std::size_t>(o.seed));
    w.meta("n_pairs", n_pairs);
    for (const auto& [cat, mx] : scan.max_by_category) w.meta("max_" + cat, mx);
    w.header({"index", "category", "N", "argmax_flag"});
    for (const auto& p : scan.pairs)
        w.row({std::to_string(p.index), to_string(p.category), format_number(p.N),
               p.index == scan.argmax_index ? "1" : "0"});
    w.write_file(detail::out_path(o, "pairs.csv"));

    CsvWriter ws;
    detail::common_meta(ws, "pairs-argmax", o, rp, tau_max);
    ws.meta("argmax_index", scan.argmax_index);
    std::vector<std::string> hdr{"state"};
    for (auto& c : detail::state_header()) hdr.push_back(c);
    ws.header(hdr);
    for (int which = 0; which < 2; ++which) {
        std::vector<double> row;
        detail::append_state(row, which == 0 ? scan.argmax_rho1.m : scan.argmax_rho2.m);
        std::vector<std::string> cells{which == 0 ? "rho1" : "rho2"};
        for (double x : row) cells.push_back(format_number(x));
        ws.row(cells);
    }
    ws.write_file(detail::out_path(o, "argmax_pair.csv"));
    return 0;
}

/// plot: render a CSV produced by the other commands into a deterministic SVG.
inline int cmd_plot(const std::string& csv_path, const std::string& kind, const std::string& out_dir) {
    const CsvFile csv = CsvFile::read_file(csv_path);
    const std::string svg_text = svg::render(csv, kind);
    std::filesystem::create_directories(out_dir);
    const auto stem = std::filesystem::path(csv_path).stem().string();
    const std::string out = (std::filesystem::path(out_dir) / (stem + ".svg")).string();
    std::ofstream f(out, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + out);
    f << svg_text;
    return 0;
}

} // namespace cli
} // namespace dephasim
