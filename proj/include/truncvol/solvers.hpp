#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <variant>
#include <vector>

#include "truncvol/kernels.hpp"
#include "truncvol/types.hpp"

namespace truncvol {

struct RootConfig {
    double bracket_lo = 0.0;
    double bracket_hi = 1.0;
    std::size_t scan_points = 512;  // geometrically spaced
    double rel_tol = 1e-10;
    int max_iter = 200;

    void validate() const;
    // [0.25 sigma sqrt(h), 20 sigma sqrt(h ln(1/h))]
    static RootConfig around_threshold_scale(double sigma, double h);
};

struct ScanPoint {
    double eps;
    double value;
};

// Smallest sign change (negative to non-negative) of `fn` on a geometric scan
// of the bracket, refined by bisection. Optionally records the scan.
double find_first_root(const std::function<double(double)>& fn, const RootConfig& cfg,
                       std::vector<ScanPoint>* scan = nullptr);

// Root of F(eps; sigma, jumps): the conditional-MSE optimal threshold.
double solve_root_f(double sigma, std::span<const double> jumps, const SamplingGrid& grid,
                    const RootConfig& cfg, std::vector<ScanPoint>* scan = nullptr);
double solve_root_f(double sigma, std::span<const double> jumps, const SamplingGrid& grid);

// Unique root of eps^2 + 2(n-1) E[b_1(eps)] - 2 IV for a Merton law.
double solve_levy_mse(double sigma, const SamplingGrid& grid, const FaJumpLaw& law, const RootConfig& cfg);
double solve_levy_mse(double sigma, const SamplingGrid& grid, const FaJumpLaw& law);

// Same equation with E[b_1] estimated from a fixed stable sample.
double solve_levy_mse(double sigma, const SamplingGrid& grid, const StableIncrementSample& sample,
                      const RootConfig& cfg);

// Normalised threshold v_n for n jump-free intervals: eps = v_n sigma sqrt(h).
double solve_vn(std::size_t n);

// w_h with exp(-w^2) / (w h) = sqrt(pi) / 2, by fixed point on x = w^2.
double solve_wh(double h);

// sqrt(factor sigma^2 h ln(1/h)).
double asymptotic_threshold(double factor, double sigma, double h);

// sigma w_h sqrt(2h).
double mc2_threshold(double sigma, double h);

enum class SigmaSource { rv, bv, trv_as, truth };
enum class JumpSource { zero, truth, estimated };

struct FixedRule {
    double eps;
};
// c h^omega sigma
struct PowerBvRule {
    double c = 4.0;
    double omega = 0.49;
};
// sqrt(factor sigma^2 h ln(1/h))
struct AsympMcRule {
    double factor = 2.0;
    SigmaSource sigma_source = SigmaSource::rv;
};
// sigma w_h sqrt(2h)
struct Mc2Rule {
    SigmaSource sigma_source = SigmaSource::rv;
};
// root of F(eps; sigma, m)
struct RootFRule {
    SigmaSource sigma_source = SigmaSource::trv_as;
    JumpSource jumps_source = JumpSource::estimated;
};

using ThresholdRule = std::variant<FixedRule, PowerBvRule, AsympMcRule, Mc2Rule, RootFRule>;

void validate_rule(const ThresholdRule& rule);

// Threshold of a closed-form rule at volatility estimate `sigma`.
// RootFRule needs jump estimates and is rejected here.
double rule_threshold(const ThresholdRule& rule, double sigma, double h);

}  // namespace truncvol
