#include "truncvol/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "truncvol/models.hpp"
#include "truncvol/solvers.hpp"

namespace truncvol {

const EstimatorSummary& McSummary::row(EstimatorId id) const {
    for (const auto& r : rows)
        if (r.id == id) return r;
    throw std::out_of_range("McSummary: estimator '" + std::string(estimator_key(id)) + "' not in summary");
}

PathOutcome evaluate_path(const ExperimentConfig& cfg, std::size_t path_index) {
    const PathRecord path = simulate(cfg.model, cfg.grid, derive_seed(cfg.base_seed, path_index));
    PathOutcome out;
    out.iv_true = path.iv_total;
    out.reports.resize(cfg.estimators.size());
    out.threw.assign(cfg.estimators.size(), 0);
    for (std::size_t e = 0; e < cfg.estimators.size(); ++e) {
        try {
            out.reports[e] = run_estimator(cfg.estimators[e], path, cfg.grid, cfg.params);
        } catch (const NumericError&) {
            out.threw[e] = 1;
        }
    }
    return out;
}

McSummary run_experiment(const ExperimentConfig& cfg, unsigned threads) {
    cfg.validate();
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, cfg.n_paths));

    std::vector<PathOutcome> outcomes(cfg.n_paths);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    auto worker = [&] {
        for (std::size_t p; !failed && (p = next.fetch_add(1)) < cfg.n_paths;) {
            try {
                outcomes[p] = evaluate_path(cfg, p);
            } catch (...) {
                if (!failed.exchange(true)) failure = std::current_exception();
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    McSummary summary;
    summary.n_paths = cfg.n_paths;
    summary.config_hash = config_hash(cfg);
    summary.error_scale = cfg.error_scale;
    summary.mse_exponent = cfg.mse_exponent;
    summary.rows.resize(cfg.estimators.size());
    for (std::size_t e = 0; e < cfg.estimators.size(); ++e) summary.rows[e].id = cfg.estimators[e];

    const double horizon = cfg.grid.horizon();
    // Fixed path order keeps the reduction independent of scheduling.
    for (const auto& out : outcomes) {
        for (std::size_t e = 0; e < out.reports.size(); ++e) {
            auto& row = summary.rows[e];
            if (out.threw[e]) {
                ++row.failures;
                continue;
            }
            const auto& r = out.reports[e];
            if (r.status != ReportStatus::ok) ++row.failures;
            const double diff = r.iv_hat - out.iv_true;
            const double err = cfg.error_scale == ErrorScale::annualized ? diff / horizon : diff;
            row.rel_error.push(diff / out.iv_true);
            row.sq_error.push(err * err);
            row.iterations.push(r.iterations);
            if (r.eps_final) row.eps.push(*r.eps_final);
            if (r.loss) row.loss.push(static_cast<double>(*r.loss));
        }
    }
    return summary;
}

namespace {

std::string g17(double v) { return format_decimal(v); }

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

// RFC 4180: quote fields containing separators, quotes or line breaks.
std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

}  // namespace

std::string emit_table(const McSummary& summary, OutputFormat format) {
    std::ostringstream out;
    if (format == OutputFormat::csv) {
        out << "index,estimator,mean_rel_bias,std_rel_bias,mse,mean_loss,std_loss,mean_eps,std_eps,"
               "mean_n,std_n,se_rel_bias,se_mse,failures,paths\n";
        std::size_t index = 1;
        for (const auto& r : summary.rows) {
            const bool truncating = r.eps.count() > 0;
            const bool has_loss = r.loss.count() > 0;
            out << index++ << ',' << csv_field(estimator_label(r.id)) << ',' << g17(r.mean_rel_bias()) << ','
                << g17(r.std_rel_bias()) << ',' << g17(r.mse()) << ',';
            out << (has_loss ? g17(r.loss.mean()) : "") << ',' << (has_loss ? g17(r.loss.stddev()) : "") << ',';
            out << (truncating ? g17(r.eps.mean()) : "") << ',' << (truncating ? g17(r.eps.stddev()) : "") << ',';
            out << (truncating ? g17(r.iterations.mean()) : "") << ','
                << (truncating ? g17(r.iterations.stddev()) : "") << ',';
            out << g17(r.rel_error.std_error()) << ',' << g17(r.se_mse()) << ',' << r.failures << ','
                << r.rel_error.count() << '\n';
        }
        return out.str();
    }

    const double mse_scale = std::pow(10.0, summary.mse_exponent);
    const char* err_label = summary.error_scale == ErrorScale::annualized ? "sigma^2" : "IV";
    out << "| # | Estimator | mean rel. err | std rel. err | MSE(" << err_label << ") x 1e" << summary.mse_exponent
        << " | mean Loss | std Loss | mean eps | std eps x 1e3 | mean N | std N |\n";
    out << "|---|---|---|---|---|---|---|---|---|---|---|\n";
    std::size_t index = 1;
    for (const auto& r : summary.rows) {
        const bool truncating = r.eps.count() > 0;
        const bool has_loss = r.loss.count() > 0;
        out << "| " << index++ << " | " << estimator_label(r.id) << " | " << fixed(r.mean_rel_bias(), 5) << " | "
            << fixed(r.std_rel_bias(), 5) << " | " << fixed(r.mse() * mse_scale, 5) << " | ";
        out << (has_loss ? fixed(r.loss.mean(), 5) : "") << " | " << (has_loss ? fixed(r.loss.stddev(), 5) : "")
            << " | ";
        out << (truncating ? fixed(r.eps.mean(), 5) : "") << " | "
            << (truncating ? fixed(r.eps.stddev() * 1e3, 5) : "") << " | ";
        out << (truncating ? fixed(r.iterations.mean(), 5) : "") << " | "
            << (truncating ? fixed(r.iterations.stddev(), 5) : "") << " |\n";
    }
    std::size_t failures = 0;
    for (const auto& r : summary.rows) failures += r.failures;
    out << "\n" << summary.n_paths << " paths; config hash " << std::hex << summary.config_hash << std::dec;
    if (failures > 0) out << "; " << failures << " flagged or failed estimates";
    out << '\n';
    return out.str();
}

std::string emit_vn_curve(std::span<const std::size_t> n_values) {
    std::ostringstream out;
    out << "n,v_n\n";
    for (std::size_t n : n_values) out << n << ',' << g17(solve_vn(n)) << '\n';
    return out.str();
}

std::vector<std::size_t> default_vn_grid(std::size_t points) {
    if (points < 2) throw std::invalid_argument("default_vn_grid: need at least 2 points");
    std::vector<std::size_t> grid;
    for (std::size_t k = 0; k < points; ++k) {
        const double e = 2.0 + 2.0 * static_cast<double>(k) / static_cast<double>(points - 1);
        const auto n = static_cast<std::size_t>(std::llround(std::pow(10.0, e)));
        if (grid.empty() || grid.back() != n) grid.push_back(n);
    }
    return grid;
}

}  // namespace truncvol
