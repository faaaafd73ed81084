#include "truncvol/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "truncvol/kernels.hpp"
#include "truncvol/numeric.hpp"

namespace truncvol {

double rv(std::span<const double> dx) {
    KahanSum s;
    for (double x : dx) s += x * x;
    return s.value();
}

double bv(std::span<const double> dx) {
    KahanSum s;
    for (std::size_t i = 0; i + 1 < dx.size(); ++i) s += std::fabs(dx[i]) * std::fabs(dx[i + 1]);
    return 0.5 * std::numbers::pi * s.value();
}

double minrv(std::span<const double> dx) {
    const std::size_t n = dx.size();
    if (n < 2) throw std::invalid_argument("minrv: needs at least 2 increments");
    KahanSum s;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double lo = std::min(std::fabs(dx[i]), std::fabs(dx[i + 1]));
        s += lo * lo;
    }
    const double edge = static_cast<double>(n) / static_cast<double>(n - 1);
    return std::numbers::pi / (std::numbers::pi - 2.0) * edge * s.value();
}

double medrv(std::span<const double> dx) {
    const std::size_t n = dx.size();
    if (n < 3) throw std::invalid_argument("medrv: needs at least 3 increments");
    KahanSum s;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        std::array<double, 3> w{std::fabs(dx[i - 1]), std::fabs(dx[i]), std::fabs(dx[i + 1])};
        std::sort(w.begin(), w.end());
        s += w[1] * w[1];
    }
    const double edge = static_cast<double>(n) / static_cast<double>(n - 2);
    const double c = std::numbers::pi / (std::numbers::pi + 6.0 - 4.0 * std::sqrt(3.0));
    return c * edge * s.value();
}

EstimateReport trv(std::span<const double> dx, double eps) {
    if (!(eps >= 0.0)) throw std::invalid_argument("trv: eps must be >= 0");
    KahanSum s;
    std::size_t kept = 0;
    for (double x : dx) {
        if (std::fabs(x) <= eps) {
            s += x * x;
            ++kept;
        }
    }
    EstimateReport r;
    r.iv_hat = s.value();
    r.eps_final = eps;
    r.kept = kept;
    return r;
}

EstimateReport tbv(std::span<const double> dx, double eps) {
    if (!(eps >= 0.0)) throw std::invalid_argument("tbv: eps must be >= 0");
    KahanSum s;
    std::size_t kept = 0;
    for (std::size_t i = 0; i < dx.size(); ++i) {
        const double a = std::fabs(dx[i]);
        if (a <= eps) ++kept;
        if (i + 1 < dx.size()) {
            const double b = std::fabs(dx[i + 1]);
            if (a <= eps && b <= eps) s += a * b;
        }
    }
    EstimateReport r;
    r.iv_hat = 0.5 * std::numbers::pi * s.value();
    r.eps_final = eps;
    r.kept = kept;
    return r;
}

namespace {

double sigma_of(double iv, const SamplingGrid& grid) { return std::sqrt(iv / grid.horizon()); }

double log_inv_h(const SamplingGrid& grid) {
    const double h = grid.h();
    if (!(h < 1.0)) throw std::invalid_argument("estimator: step h must be < 1");
    return std::log(1.0 / h);
}

std::vector<char> kept_mask(std::span<const double> dx, double eps) {
    std::vector<char> mask(dx.size());
    for (std::size_t i = 0; i < dx.size(); ++i) mask[i] = std::fabs(dx[i]) <= eps;
    return mask;
}

SigmaSource rule_sigma_source(const ThresholdRule& rule) {
    if (const auto* r = std::get_if<AsympMcRule>(&rule)) return r->sigma_source;
    if (const auto* r = std::get_if<Mc2Rule>(&rule)) return r->sigma_source;
    if (const auto* r = std::get_if<RootFRule>(&rule)) return r->sigma_source;
    if (std::holds_alternative<PowerBvRule>(rule)) return SigmaSource::bv;
    return SigmaSource::rv;
}

}  // namespace

double initial_sigma(std::span<const double> dx, const SamplingGrid& grid, SigmaSource source) {
    if (dx.size() != grid.n()) throw std::invalid_argument("initial_sigma: dx length must equal n");
    switch (source) {
        case SigmaSource::rv:
            return sigma_of(rv(dx), grid);
        case SigmaSource::bv:
            return sigma_of(bv(dx), grid);
        case SigmaSource::trv_as: {
            const double s_bv = sigma_of(bv(dx), grid);
            const double eps_as = std::sqrt(2.0 * s_bv * s_bv * grid.h() * log_inv_h(grid));
            return sigma_of(trv(dx, eps_as).iv_hat, grid);
        }
        case SigmaSource::truth:
            break;
    }
    throw std::invalid_argument("initial_sigma: the true volatility is not observable from increments");
}

EstimateReport iterate_rule(std::span<const double> dx, const SamplingGrid& grid, const ThresholdRule& rule,
                            const IterationConfig& cfg) {
    validate_rule(rule);
    if (std::holds_alternative<RootFRule>(rule))
        throw std::invalid_argument("iterate_rule: use new_method for root-of-F thresholds");
    if (dx.size() != grid.n()) throw std::invalid_argument("iterate_rule: dx length must equal n");
    if (!(cfg.tol >= 0.0)) throw std::invalid_argument("iterate_rule: tol must be >= 0");
    if (cfg.max_iter < 1) throw std::invalid_argument("iterate_rule: max_iter must be >= 1");

    const SigmaSource source = rule_sigma_source(rule);
    double sigma_prev = cfg.initial_sigma ? *cfg.initial_sigma : initial_sigma(dx, grid, source);
    // RV keeps every increment, so it is the k = 0 kept set for the exact stopping rule.
    std::vector<char> mask_prev;
    if (!cfg.initial_sigma && source == SigmaSource::rv) mask_prev.assign(dx.size(), 1);

    if (cfg.trace) cfg.trace->assign(1, sigma_prev);

    const double h = grid.h();
    EstimateReport report;
    for (int k = 1; k <= cfg.max_iter; ++k) {
        const double eps = rule_threshold(rule, sigma_prev, h);
        report = cfg.sum == TruncatedSum::trv ? trv(dx, eps) : tbv(dx, eps);
        report.iterations = k;
        if (cfg.single_step) return report;

        const double sigma_k = sigma_of(report.iv_hat, grid);
        if (cfg.trace) cfg.trace->push_back(sigma_k);
        bool stop = false;
        if (cfg.tol == 0.0) {
            auto mask = kept_mask(dx, eps);
            stop = !mask_prev.empty() && mask == mask_prev;
            mask_prev = std::move(mask);
        } else {
            stop = sigma_prev == 0.0 || std::fabs(sigma_k - sigma_prev) <= cfg.tol * sigma_prev;
        }
        if (stop) return report;
        sigma_prev = sigma_k;
    }
    report.status = ReportStatus::non_convergence;
    return report;
}

EstimateReport new_method(std::span<const double> dx, const SamplingGrid& grid, const NewMethodConfig& cfg) {
    if (dx.size() != grid.n()) throw std::invalid_argument("new_method: dx length must equal n");
    if (!(cfg.tol >= 0.0)) throw std::invalid_argument("new_method: tol must be >= 0");
    if (cfg.max_iter < 1) throw std::invalid_argument("new_method: max_iter must be >= 1");

    double sigma_prev = initial_sigma(dx, grid, cfg.initial);
    std::vector<double> jumps(dx.size(), 0.0);
    EstimateReport report;
    bool have_report = false;

    for (int k = 1; k <= cfg.max_iter; ++k) {
        double eps = 0.0;
        try {
            if (!(sigma_prev > 0.0))
                throw NumericError(NumericErrorKind::no_sign_change, "new_method: volatility estimate is zero");
            eps = solve_root_f(sigma_prev, jumps, grid);
        } catch (const NumericError&) {
            if (!have_report) report = trv(dx, 0.0);
            report.status = ReportStatus::solver_fallback;
            report.iterations = k;
            return report;
        }
        report = trv(dx, eps);
        report.iterations = k;
        have_report = true;
        if (cfg.single_step) return report;

        const double sigma_k = sigma_of(report.iv_hat, grid);
        if (std::fabs(sigma_k - sigma_prev) <= cfg.tol * sigma_prev) return report;
        for (std::size_t i = 0; i < dx.size(); ++i) jumps[i] = std::fabs(dx[i]) > eps ? dx[i] : 0.0;
        sigma_prev = sigma_k;
    }
    report.status = ReportStatus::non_convergence;
    return report;
}

EstimateReport oracle(const PathRecord& path, const SamplingGrid& grid) {
    if (path.size() != grid.n()) throw std::invalid_argument("oracle: path length must equal n");
    const double sigma_avg = std::sqrt(path.iv_total / grid.horizon());
    const double eps = solve_root_f(sigma_avg, path.m, grid);
    return trv(path.dx, eps);
}

double consistency_indicator_check(const PathRecord& path, const SamplingGrid& grid, double eta, SpotLevel) {
    if (!path.has_jump_counts())
        throw std::invalid_argument("consistency_indicator_check: needs a finite-activity path");
    if (!(eta > 0.0)) throw std::invalid_argument("consistency_indicator_check: eta must be positive");
    if (path.size() != grid.n()) throw std::invalid_argument("consistency_indicator_check: length mismatch");
    const double h = grid.h();
    const double log_term = log_inv_h(grid);
    std::size_t disagree = 0;
    for (std::size_t i = 0; i < path.size(); ++i) {
        const double spot = path.iv_i[i] / h;
        const double level = (1.0 + eta) * 2.0 * spot * h * log_term;
        const bool small = path.dx[i] * path.dx[i] <= level;
        const bool no_jump = path.dn[i] == 0;
        if (small != no_jump) ++disagree;
    }
    return static_cast<double>(disagree) / static_cast<double>(path.size());
}

namespace {

struct EstimatorName {
    EstimatorId id;
    std::string_view key;
    std::string_view label;
};

constexpr std::array kNames{
    EstimatorName{EstimatorId::rv, "rv", "RV"},
    EstimatorName{EstimatorId::bv, "bv", "BV"},
    EstimatorName{EstimatorId::minrv, "minrv", "MinRV"},
    EstimatorName{EstimatorId::medrv, "medrv", "MedRV"},
    EstimatorName{EstimatorId::trv_jt, "trv_jt", "TRV_JT"},
    EstimatorName{EstimatorId::three_mc, "3mc", "3mc"},
    EstimatorName{EstimatorId::three_mc_k, "3mc_k", "3mc,k"},
    EstimatorName{EstimatorId::two_mc, "2mc", "2mc"},
    EstimatorName{EstimatorId::two_mc_k, "2mc_k", "2mc,k"},
    EstimatorName{EstimatorId::mc_two, "mc2", "mc2"},
    EstimatorName{EstimatorId::mc_two_k, "mc2_k", "mc2,k"},
    EstimatorName{EstimatorId::new_one, "new", "NEW"},
    EstimatorName{EstimatorId::new_k, "new_k", "NEW,k"},
    EstimatorName{EstimatorId::oracle, "orc", "Orc"},
    EstimatorName{EstimatorId::tbv, "tbv", "TBV"},
    EstimatorName{EstimatorId::tbv_k, "tbv_k", "TBV,k"},
};

const EstimatorName& name_of(EstimatorId id) {
    for (const auto& n : kNames)
        if (n.id == id) return n;
    throw std::logic_error("unknown estimator id");
}

}  // namespace

std::string_view estimator_key(EstimatorId id) { return name_of(id).key; }
std::string_view estimator_label(EstimatorId id) { return name_of(id).label; }

std::optional<EstimatorId> parse_estimator(std::string_view key) {
    for (const auto& n : kNames)
        if (n.key == key) return n.id;
    return std::nullopt;
}

EstimateReport run_estimator(EstimatorId id, const PathRecord& path, const SamplingGrid& grid,
                             const EstimatorParams& params) {
    if (path.size() != grid.n()) throw std::invalid_argument("run_estimator: path length must equal n");
    const std::span<const double> dx = path.dx;
    const PowerBvRule power{params.power_c, params.power_omega};

    auto plain = [](double iv) {
        EstimateReport r;
        r.iv_hat = iv;
        r.iterations = 1;
        return r;
    };
    auto mc = [&](ThresholdRule rule, bool iterated) {
        IterationConfig cfg;
        cfg.tol = 0.0;
        cfg.max_iter = params.max_iter;
        cfg.single_step = !iterated;
        return iterate_rule(dx, grid, rule, cfg);
    };
    auto power_once = [&](TruncatedSum sum) {
        const double eps = rule_threshold(power, initial_sigma(dx, grid, SigmaSource::bv), grid.h());
        return sum == TruncatedSum::trv ? trv(dx, eps) : tbv(dx, eps);
    };

    EstimateReport r;
    switch (id) {
        case EstimatorId::rv: r = plain(rv(dx)); r.kept = dx.size(); break;
        case EstimatorId::bv: r = plain(bv(dx)); break;
        case EstimatorId::minrv: r = plain(minrv(dx)); break;
        case EstimatorId::medrv: r = plain(medrv(dx)); break;
        case EstimatorId::trv_jt: r = power_once(TruncatedSum::trv); break;
        case EstimatorId::three_mc: r = mc(AsympMcRule{3.0, params.mc_initial}, false); break;
        case EstimatorId::three_mc_k: r = mc(AsympMcRule{3.0, params.mc_initial}, true); break;
        case EstimatorId::two_mc: r = mc(AsympMcRule{2.0, params.mc_initial}, false); break;
        case EstimatorId::two_mc_k: r = mc(AsympMcRule{2.0, params.mc_initial}, true); break;
        case EstimatorId::mc_two: r = mc(Mc2Rule{params.mc_initial}, false); break;
        case EstimatorId::mc_two_k: r = mc(Mc2Rule{params.mc_initial}, true); break;
        case EstimatorId::new_one:
        case EstimatorId::new_k: {
            NewMethodConfig cfg;
            cfg.tol = params.new_tol;
            cfg.max_iter = params.max_iter;
            cfg.single_step = id == EstimatorId::new_one;
            cfg.initial = params.new_initial;
            r = new_method(dx, grid, cfg);
            break;
        }
        case EstimatorId::oracle: r = oracle(path, grid); break;
        case EstimatorId::tbv: r = power_once(TruncatedSum::tbv); break;
        case EstimatorId::tbv_k: {
            IterationConfig cfg;
            cfg.tol = params.tbv_tol;
            cfg.max_iter = params.max_iter;
            cfg.sum = TruncatedSum::tbv;
            r = iterate_rule(dx, grid, power, cfg);
            break;
        }
    }
    if (r.eps_final && path.has_jump_counts()) r.loss = loss_count(path, *r.eps_final);
    return r;
}

}  // namespace truncvol
