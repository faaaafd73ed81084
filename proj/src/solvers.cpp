#include "truncvol/solvers.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "truncvol/numeric.hpp"

namespace truncvol {

void RootConfig::validate() const {
    if (!(bracket_lo >= 0.0 && bracket_lo < bracket_hi) || !std::isfinite(bracket_hi))
        throw std::invalid_argument("RootConfig: need 0 <= bracket_lo < bracket_hi < inf");
    if (scan_points < 2) throw std::invalid_argument("RootConfig: scan_points must be >= 2");
    if (!(rel_tol > 0.0)) throw std::invalid_argument("RootConfig: rel_tol must be positive");
    if (max_iter < 1) throw std::invalid_argument("RootConfig: max_iter must be >= 1");
}

RootConfig RootConfig::around_threshold_scale(double sigma, double h) {
    if (!(sigma > 0.0)) throw std::invalid_argument("RootConfig: sigma must be positive");
    if (!(h > 0.0 && h < 1.0)) throw std::invalid_argument("RootConfig: h must lie in (0, 1)");
    RootConfig cfg;
    cfg.bracket_lo = 0.25 * sigma * std::sqrt(h);
    cfg.bracket_hi = 20.0 * sigma * std::sqrt(h * std::log(1.0 / h));
    return cfg;
}

namespace {

double checked(const std::function<double(double)>& fn, double x) {
    const double v = fn(x);
    if (std::isnan(v))
        throw NumericError(NumericErrorKind::non_finite, "objective is NaN at eps=" + std::to_string(x));
    return v;
}

double bisect(const std::function<double(double)>& fn, double lo, double hi, const RootConfig& cfg) {
    for (int it = 0; it < cfg.max_iter && hi - lo > cfg.rel_tol * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (checked(fn, mid) < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

double find_first_root(const std::function<double(double)>& fn, const RootConfig& cfg,
                       std::vector<ScanPoint>* scan) {
    cfg.validate();
    if (scan) scan->clear();

    // Geometric spacing needs a positive start; a zero lower end is probed separately.
    const bool from_zero = cfg.bracket_lo == 0.0;
    const double start = from_zero ? cfg.bracket_hi * 1e-6 : cfg.bracket_lo;
    const std::size_t points = from_zero ? cfg.scan_points - 1 : cfg.scan_points;
    const double ratio = points > 1 ? std::pow(cfg.bracket_hi / start, 1.0 / static_cast<double>(points - 1)) : 1.0;

    double prev_x = 0.0;
    double prev_v = 0.0;
    double last_v = 0.0;
    bool have_prev = false;
    auto visit = [&](double x) -> bool {
        const double v = checked(fn, x);
        last_v = v;
        if (scan) scan->push_back({x, v});
        const bool crossed = have_prev && prev_v < 0.0 && v >= 0.0;
        if (!crossed) {
            prev_x = x;
            prev_v = v;
            have_prev = true;
        }
        return crossed;
    };

    if (from_zero && visit(0.0)) return 0.0;
    for (std::size_t j = 0; j < points; ++j) {
        const double x = j + 1 == points ? cfg.bracket_hi : start * std::pow(ratio, static_cast<double>(j));
        if (visit(x)) {
            if (last_v == 0.0) return x;
            return bisect(fn, prev_x, x, cfg);
        }
    }
    throw NumericError(NumericErrorKind::no_sign_change,
                       "no sign change in [" + std::to_string(cfg.bracket_lo) + ", " +
                           std::to_string(cfg.bracket_hi) + "]");
}

double solve_root_f(double sigma, std::span<const double> jumps, const SamplingGrid& grid,
                    const RootConfig& cfg, std::vector<ScanPoint>* scan) {
    auto objective = [&](double eps) { return cmse_objective({eps, sigma, jumps, grid}); };
    return find_first_root(objective, cfg, scan);
}

double solve_root_f(double sigma, std::span<const double> jumps, const SamplingGrid& grid) {
    return solve_root_f(sigma, jumps, grid, RootConfig::around_threshold_scale(sigma, grid.h()));
}

namespace {

// Bisection for an increasing function with g(lo) < 0 < g(hi).
double bisect_monotone(const std::function<double(double)>& g, const RootConfig& cfg) {
    cfg.validate();
    const double g_lo = checked(g, cfg.bracket_lo);
    const double g_hi = checked(g, cfg.bracket_hi);
    if (!(g_lo < 0.0 && g_hi > 0.0))
        throw NumericError(NumericErrorKind::no_sign_change, "MSE equation does not change sign on bracket");
    return bisect(g, cfg.bracket_lo, cfg.bracket_hi, cfg);
}

}  // namespace

double solve_levy_mse(double sigma, const SamplingGrid& grid, const FaJumpLaw& law, const RootConfig& cfg) {
    law.validate();
    return bisect_monotone([&](double eps) { return levy_mse_equation(eps, sigma, grid, law); }, cfg);
}

double solve_levy_mse(double sigma, const SamplingGrid& grid, const FaJumpLaw& law) {
    return solve_levy_mse(sigma, grid, law, RootConfig::around_threshold_scale(sigma, grid.h()));
}

double solve_levy_mse(double sigma, const SamplingGrid& grid, const StableIncrementSample& sample,
                      const RootConfig& cfg) {
    return bisect_monotone([&](double eps) { return sample.levy_mse_equation(eps, sigma, grid); }, cfg);
}

double solve_vn(std::size_t n) {
    if (n < 2) throw std::invalid_argument("solve_vn: n must be >= 2");
    const double others = static_cast<double>(n - 1);
    auto f = [&](double v) {
        const double half_mass = 0.5 * std::erf(v / std::numbers::sqrt2);  // integral of phi over [0, v]
        return v * v + 4.0 * others * (-v * normal_pdf(v) + half_mass) - 2.0 * static_cast<double>(n);
    };
    double lo = 0.0;
    double hi = 10.0;
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double solve_wh(double h) {
    if (!(h > 0.0 && h < 1.0)) throw std::invalid_argument("solve_wh: h must lie in (0, 1)");
    const double shift = std::log(2.0 / (std::sqrt(std::numbers::pi) * h));
    double x = std::log(1.0 / h);
    for (int it = 0; it < 1000; ++it) {
        const double next = shift - 0.5 * std::log(x);
        if (std::fabs(next - x) < 1e-14) return std::sqrt(next);
        x = next;
    }
    throw NumericError(NumericErrorKind::non_convergence, "solve_wh: fixed point did not settle");
}

double asymptotic_threshold(double factor, double sigma, double h) {
    if (!(factor > 0.0)) throw std::invalid_argument("asymptotic_threshold: factor must be positive");
    if (!(sigma >= 0.0)) throw std::invalid_argument("asymptotic_threshold: sigma must be >= 0");
    if (!(h > 0.0 && h < 1.0)) throw std::invalid_argument("asymptotic_threshold: h must lie in (0, 1)");
    return std::sqrt(factor * sigma * sigma * h * std::log(1.0 / h));
}

double mc2_threshold(double sigma, double h) {
    if (!(sigma >= 0.0)) throw std::invalid_argument("mc2_threshold: sigma must be >= 0");
    return sigma * solve_wh(h) * std::sqrt(2.0 * h);
}

void validate_rule(const ThresholdRule& rule) {
    struct Visitor {
        void operator()(const FixedRule& r) const {
            if (!(r.eps >= 0.0)) throw std::invalid_argument("FixedRule: eps must be >= 0");
        }
        void operator()(const PowerBvRule& r) const {
            if (!(r.c > 0.0)) throw std::invalid_argument("PowerBvRule: c must be positive");
            if (!(r.omega > 0.0 && r.omega < 0.5))
                throw std::invalid_argument("PowerBvRule: omega must lie in (0, 1/2)");
        }
        void operator()(const AsympMcRule& r) const {
            if (r.factor != 2.0 && r.factor != 3.0)
                throw std::invalid_argument("AsympMcRule: factor must be 2 or 3");
        }
        void operator()(const Mc2Rule&) const {}
        void operator()(const RootFRule&) const {}
    };
    std::visit(Visitor{}, rule);
}

double rule_threshold(const ThresholdRule& rule, double sigma, double h) {
    validate_rule(rule);
    struct Visitor {
        double sigma;
        double h;
        double operator()(const FixedRule& r) const { return r.eps; }
        double operator()(const PowerBvRule& r) const { return r.c * std::pow(h, r.omega) * sigma; }
        double operator()(const AsympMcRule& r) const { return asymptotic_threshold(r.factor, sigma, h); }
        double operator()(const Mc2Rule&) const { return mc2_threshold(sigma, h); }
        double operator()(const RootFRule&) const {
            throw std::invalid_argument("rule_threshold: RootFRule needs jump estimates; use solve_root_f");
        }
    };
    return std::visit(Visitor{sigma, h}, rule);
}

}  // namespace truncvol
