// Command-line front end: rates, evolve, divisibility, blp, scan, pairs,
// additivity, plot. Exit codes: 0 success, 1 computation failure, 2 usage or
// config error.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "dephasim/cli.hpp"

namespace {

dephasim::cli::RunOptions load_options(const std::string& config_path, double tol, unsigned jobs,
                                       const std::string& out_dir, std::uint64_t seed,
                                       double tau_max, std::size_t n_steps) {
    dephasim::cli::RunOptions o;
    if (!config_path.empty()) {
        std::ifstream f(config_path);
        if (!f) throw dephasim::ConfigError("cannot open config file: " + config_path);
        o.config = dephasim::parse_config_values(f);
    }
    o.tol = tol;
    o.jobs = jobs;
    o.out_dir = out_dir;
    o.seed = seed;
    o.tau_max = tau_max;
    o.n_steps = n_steps;
    return o;
}

std::vector<double> expand_range(const std::vector<double>& range_spec, bool log_axis) {
    // --range MIN MAX COUNT
    const double lo = range_spec[0], hi = range_spec[1];
    const int count = static_cast<int>(range_spec[2]);
    if (count < 2 || !(lo < hi))
        throw dephasim::InvalidParams("scan range: need min < max and count >= 2");
    std::vector<double> v(count);
    for (int i = 0; i < count; ++i) {
        const double u = static_cast<double>(i) / (count - 1);
        v[i] = log_axis ? lo * std::pow(hi / lo, u) : lo + (hi - lo) * u;
    }
    return v;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-qubit dephasing in a shared BEC environment: decay rates, exact channel, "
                 "and non-Markovianity diagnostics"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand name

    std::string config_path;
    double tol = 1e-10;
    unsigned jobs = 0;
    std::string out_dir = ".";
    std::uint64_t seed = 12345;
    double tau_max = 0.0;
    std::size_t n_steps = dephasim::kDefaultSteps;

    app.add_option("--config", config_path, "parameter file (key = value lines)");
    app.add_option("--tol", tol, "quadrature relative tolerance")->capture_default_str();
    app.add_option("--jobs", jobs, "worker threads (0 = hardware)")->capture_default_str();
    app.add_option("--out", out_dir, "output directory")->capture_default_str();
    app.add_option("--seed", seed, "sampling seed")->capture_default_str();
    app.add_option("--tau-max", tau_max, "time window in t0 units (0 = automatic)");
    app.add_option("--n-steps", n_steps, "time grid steps");

    auto* rates = app.add_subcommand("rates", "sample gamma1/gamma2 over the window");
    auto* evolve = app.add_subcommand("evolve", "evolve an initial state through the channel");
    std::string initial = "phi+";
    evolve->add_option("--initial", initial, "phi+|phi-|psi+|psi-|plus|ginibre")->capture_default_str();
    auto* divis = app.add_subcommand("divisibility", "rate-negativity intervals");
    auto* blp = app.add_subcommand("blp", "Bell-pair analytic BLP measure");
    auto* additivity = app.add_subcommand("additivity", "N2 versus 2 N1");

    auto* scan = app.add_subcommand("scan", "sweep one parameter axis");
    std::string axis = "D_over_L";
    std::vector<double> values;
    std::vector<double> range_spec;
    bool log_axis = false;
    scan->add_option("--axis", axis, "D_over_L|a_B_over_aRb")->capture_default_str();
    scan->add_option("--values", values, "explicit axis values (increasing)");
    scan->add_option("--range", range_spec, "MIN MAX COUNT")->expected(3);
    scan->add_flag("--log", log_axis, "logarithmic range spacing");

    auto* pairs = app.add_subcommand("pairs", "categorized random-pair BLP sampling");
    std::size_t n_pairs = 20000;
    pairs->add_option("--n-pairs", n_pairs, "number of sampled pairs")->capture_default_str();

    auto* plot = app.add_subcommand("plot", "render a result CSV as SVG");
    std::string csv_path, kind = "rates";
    plot->add_option("csv", csv_path, "input CSV path")->required();
    plot->add_option("--kind", kind, "rates|scan|pairs|additivity")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        const auto opts = load_options(config_path, tol, jobs, out_dir, seed, tau_max, n_steps);
        if (rates->parsed()) return dephasim::cli::cmd_rates(opts);
        if (evolve->parsed()) return dephasim::cli::cmd_evolve(opts, initial);
        if (divis->parsed()) return dephasim::cli::cmd_divisibility(opts);
        if (blp->parsed()) return dephasim::cli::cmd_blp(opts);
        if (additivity->parsed()) return dephasim::cli::cmd_additivity(opts);
        if (scan->parsed()) {
            dephasim::cli::ScanSpec spec;
            if (axis == "D_over_L") spec.axis = dephasim::cli::ScanSpec::Axis::DOverL;
            else if (axis == "a_B_over_aRb") spec.axis = dephasim::cli::ScanSpec::Axis::ABOverARb;
            else throw dephasim::InvalidParams("scan: unknown axis '" + axis + "'");
            if (!values.empty()) spec.values = values;
            else if (!range_spec.empty()) spec.values = expand_range(range_spec, log_axis);
            else throw dephasim::InvalidParams("scan: provide --values or --range");
            return dephasim::cli::cmd_scan(opts, spec);
        }
        if (pairs->parsed()) return dephasim::cli::cmd_pairs(opts, n_pairs);
        if (plot->parsed()) return dephasim::cli::cmd_plot(csv_path, kind, out_dir);
    } catch (const dephasim::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const dephasim::InvalidParams& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
