#include "truncvol/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

#include "truncvol/config.hpp"
#include "truncvol/estimators.hpp"
#include "truncvol/harness.hpp"
#include "truncvol/models.hpp"
#include "truncvol/numeric.hpp"
#include "truncvol/solvers.hpp"

namespace truncvol {
namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    f << text;
    if (!f) throw IoError("write to '" + path + "' failed");
}

PathRecord read_path_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open path file '" + path + "'");
    return read_path_csv(f);
}

unsigned thread_count(const std::optional<unsigned>& flag) {
    if (flag) return *flag;
    if (const char* env = std::getenv("TRUNCVOL_THREADS")) {
        char* end = nullptr;
        const unsigned long v = std::strtoul(env, &end, 10);
        if (end == env || *end != '\0') throw UsageError("TRUNCVOL_THREADS must be a non-negative integer");
        return static_cast<unsigned>(v);
    }
    return 0;
}

double parse_threshold(const std::string& text) {
    if (text == "inf" || text == "+inf" || text == "infinity") return std::numeric_limits<double>::infinity();
    return parse_decimal(text);
}

std::string kv(const std::string& key, double v) { return key + "=" + format_decimal(v) + "\n"; }

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Threshold selection for truncated realized variance"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "Simulate one path of a configured model to CSV");
    std::string sim_config, sim_out;
    std::optional<std::uint64_t> sim_seed;
    std::uint64_t sim_index = 0;
    sim->add_option("--config", sim_config, "Experiment config with [model] and [grid]")->required();
    sim->add_option("--out", sim_out, "Output CSV")->required();
    sim->add_option("--seed", sim_seed, "Base seed (overrides config)");
    sim->add_option("--path-index", sim_index, "Path index within the experiment");

    // estimate
    auto* est = app.add_subcommand("estimate", "Run one estimator on a path CSV");
    std::string est_path, est_name;
    double est_horizon = 0.0;
    std::string est_eps;
    EstimatorParams est_params;
    est->add_option("--path", est_path, "Path CSV (i,dx,m,dn,iv_i)")->required();
    est->add_option("--horizon", est_horizon, "Time horizon T of the path")->required();
    est->add_option("--estimator", est_name, "Estimator key, or trv/tbv with --eps")->required();
    est->add_option("--eps", est_eps, "Fixed threshold for trv/tbv (number or inf)");
    est->add_option("--power-c", est_params.power_c, "Multiplier c of c h^omega sigma_BV");
    est->add_option("--power-omega", est_params.power_omega, "Exponent omega of c h^omega sigma_BV");
    est->add_option("--tol", est_params.new_tol, "Stopping tolerance of NEW,k");

    // table
    auto* tab = app.add_subcommand("table", "Run a Monte Carlo experiment and emit its table");
    std::string tab_config, tab_out, tab_format;
    std::optional<std::uint64_t> tab_seed, tab_paths;
    std::optional<unsigned> tab_threads;
    tab->add_option("--config", tab_config, "Experiment config")->required();
    tab->add_option("--out", tab_out, "Output file (defaults to output.path of the config)");
    tab->add_option("--seed", tab_seed, "Base seed (overrides config)");
    tab->add_option("--paths", tab_paths, "Number of paths (overrides config)");
    tab->add_option("--threads", tab_threads, "Worker threads; results do not depend on it");
    tab->add_option("--format", tab_format, "csv or markdown for the output file")
        ->check(CLI::IsMember({"csv", "markdown"}));

    // solve
    auto* solve = app.add_subcommand("solve", "Scalar solvers");
    solve->require_subcommand(1);
    auto* s_vn = solve->add_subcommand("vn", "v_n for n jump-free intervals");
    std::size_t vn_n = 0;
    s_vn->add_option("--n", vn_n)->required();
    auto* s_wh = solve->add_subcommand("wh", "w_h with exp(-w^2)/(w h) = sqrt(pi)/2");
    double wh_h = 0.0;
    s_wh->add_option("--step", wh_h, "Sampling step h")->required();
    auto* s_root = solve->add_subcommand("rootf", "Root of F for given volatility and jumps");
    double rf_sigma = 0.0, rf_horizon = 0.0;
    std::size_t rf_n = 0;
    std::string rf_path;
    s_root->add_option("--sigma", rf_sigma)->required();
    s_root->add_option("--horizon", rf_horizon)->required();
    s_root->add_option("--n", rf_n, "Interval count (jumps all zero)");
    s_root->add_option("--path", rf_path, "Take n and the jump vector from a path CSV");
    auto* s_levy = solve->add_subcommand("levy", "Root of the Merton MSE equation");
    double lv_sigma = 0.0, lv_horizon = 0.0, lv_lambda = 0.0, lv_mean = 0.0, lv_sd = 0.0;
    std::size_t lv_n = 0;
    s_levy->add_option("--sigma", lv_sigma)->required();
    s_levy->add_option("--horizon", lv_horizon)->required();
    s_levy->add_option("--n", lv_n)->required();
    s_levy->add_option("--lambda", lv_lambda)->required();
    s_levy->add_option("--jump-mean", lv_mean);
    s_levy->add_option("--jump-sd", lv_sd)->required();

    // vn-curve
    auto* curve = app.add_subcommand("vn-curve", "CSV of (n, v_n)");
    std::string curve_out;
    std::size_t curve_points = 41;
    curve->add_option("--out", curve_out, "Output CSV")->required();
    curve->add_option("--points", curve_points, "Log-spaced points between 100 and 10000");

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: usage: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (*sim) {
            ExperimentConfig cfg = load_experiment(sim_config);
            const std::uint64_t base = sim_seed.value_or(cfg.base_seed);
            const PathRecord path = simulate(cfg.model, cfg.grid, derive_seed(base, sim_index));
            std::ofstream f(sim_out, std::ios::binary);
            if (!f) throw IoError("cannot open '" + sim_out + "' for writing");
            write_path_csv(path, f);
            out << "wrote " << path.size() << " increments to " << sim_out << '\n';
        } else if (*est) {
            PathRecord path = read_path_file(est_path);
            const SamplingGrid grid(est_horizon, path.size());
            EstimateReport r;
            if (est_name == "trv" || est_name == "tbv") {
                if (est_eps.empty()) throw UsageError("--eps is required for trv/tbv");
                const double eps = parse_threshold(est_eps);
                r = est_name == "trv" ? trv(path.dx, eps) : tbv(path.dx, eps);
                if (path.has_jump_counts() && std::isfinite(eps)) r.loss = loss_count(path, eps);
            } else {
                const auto id = parse_estimator(est_name);
                if (!id) throw UsageError("unknown estimator '" + est_name + "'");
                r = run_estimator(*id, path, grid, est_params);
            }
            out << kv("iv_hat", r.iv_hat) << kv("sigma2_hat", r.iv_hat / grid.horizon());
            if (r.eps_final) out << kv("eps", *r.eps_final);
            out << "iterations=" << r.iterations << "\nkept=" << r.kept << '\n';
            if (r.loss) out << "loss=" << *r.loss << '\n';
            out << "status="
                << (r.status == ReportStatus::ok ? "ok"
                                                 : r.status == ReportStatus::non_convergence ? "non_convergence"
                                                                                             : "solver_fallback")
                << '\n';
        } else if (*tab) {
            ExperimentConfig cfg = load_experiment(tab_config);
            if (tab_seed) cfg.base_seed = *tab_seed;
            if (tab_paths) cfg.n_paths = *tab_paths;
            if (!tab_format.empty()) cfg.format = tab_format == "csv" ? OutputFormat::csv : OutputFormat::markdown;
            const std::string target = tab_out.empty() ? cfg.output_path : tab_out;
            const McSummary summary = run_experiment(cfg, thread_count(tab_threads));
            out << emit_table(summary, OutputFormat::markdown);
            if (!target.empty()) write_file(target, emit_table(summary, cfg.format));
        } else if (*s_vn) {
            out << format_decimal(solve_vn(vn_n)) << '\n';
        } else if (*s_wh) {
            out << format_decimal(solve_wh(wh_h)) << '\n';
        } else if (*s_root) {
            std::vector<double> jumps;
            if (!rf_path.empty()) {
                jumps = read_path_file(rf_path).m;
            } else {
                if (rf_n == 0) throw UsageError("rootf needs --n or --path");
                jumps.assign(rf_n, 0.0);
            }
            const SamplingGrid grid(rf_horizon, jumps.size());
            out << format_decimal(solve_root_f(rf_sigma, jumps, grid)) << '\n';
        } else if (*s_levy) {
            const SamplingGrid grid(lv_horizon, lv_n);
            out << format_decimal(solve_levy_mse(lv_sigma, grid, FaJumpLaw::gaussian(lv_lambda, lv_mean, lv_sd)))
                << '\n';
        } else if (*curve) {
            write_file(curve_out, emit_vn_curve(default_vn_grid(curve_points)));
            out << "wrote " << curve_out << '\n';
        }
    } catch (const UsageError& e) {
        err << "error: usage: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        err << "error: usage: " << e.what() << '\n';
        return kExitUsage;
    } catch (const NumericError& e) {
        err << "error: numeric: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const IoError& e) {
        err << "error: io: " << e.what() << '\n';
        return kExitIo;
    }
    return kExitOk;
}

}  // namespace truncvol
