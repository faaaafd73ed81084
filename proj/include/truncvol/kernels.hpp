#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "truncvol/types.hpp"

namespace truncvol {

// One interval's contribution to the conditional MSE: threshold, jump
// increment and integrated variance of the interval (price^2 units).
struct KernelInput {
    double eps = 0.0;
    double m = 0.0;
    double sigma2_i = 1.0;
};

// Density of the interval increment at +eps and -eps, i.e. d/d(eps) of
// P(|dX| <= eps) given the jump.
double a_coef(const KernelInput& k);

// Conditional mean of the truncated squared increment E[dX^2 1{|dX|<=eps} | m].
double b_coef(const KernelInput& k);

// sigma2_i - b(eps, 0, sigma2_i): the continuous mass cut away by the threshold,
// evaluated without cancellation.
double b_tail_no_jump(double eps, double sigma2_i);

struct CmseObjectiveInput {
    double eps = 0.0;
    double sigma = 0.0;              // constant spot volatility
    std::span<const double> jumps;   // one jump increment per interval
    SamplingGrid grid;
};

// F(eps) = sum_i a_i (eps^2 + 2 sum_{j != i} b_j - 2 IV) with IV = sigma^2 T.
// Its sign is the sign of the derivative of the conditional MSE.
double cmse_objective(const CmseObjectiveInput& in);

// Finite-activity jump law with Gaussian jump sizes.
struct FaJumpLaw {
    double lambda = 0.0;
    double mu_jmp = 0.0;
    double sigma_jmp = 1.0;
    double c_f = 0.0;  // f(0+) + f(0-)

    static FaJumpLaw gaussian(double lambda, double mu_jmp, double sigma_jmp);
    void validate() const;
};

// Symmetric strictly stable jumps with Levy measure c |x|^{-y-1} dx.
struct StableLaw {
    double y = 1.0;
    double c = 1.0;

    void validate() const;
    // Scale s in the characteristic exponent t*s*|u|^y of the same process.
    double characteristic_scale() const;
};

// E[b_1(eps)] for a Merton process: Poisson mixture of Gaussian jump sums,
// each component integrated by adaptive Gauss-Kronrod.
double expected_b1_merton(double eps, double sigma, double h, const FaJumpLaw& law);

// eps^2 + 2 (n-1) E[b_1(eps)] - 2 IV for the Merton law. Assembled from
// the cut-away mass and jump contributions so small-h evaluations keep
// their significant digits.
double levy_mse_equation(double eps, double sigma, const SamplingGrid& grid, const FaJumpLaw& law);

// Leading terms of E[b_1] for finite-activity jumps; valid for eps -> 0, eps >> sqrt(h).
double expected_b1_asymptotic_fa(double eps, double sigma, double h, const FaJumpLaw& law);

// Leading terms of E[b_1] for symmetric stable jumps.
double expected_b1_asymptotic_stable(double eps, double sigma, double h, const StableLaw& law);

// Fixed Monte Carlo sample of stable increments over one step h. Reusing the
// sample across thresholds keeps the resulting equation monotone in eps.
class StableIncrementSample {
public:
    StableIncrementSample(const StableLaw& law, double h, std::size_t samples = 1'000'000,
                          std::uint64_t seed = 0x5eed);

    double h() const { return h_; }
    std::size_t size() const { return jumps_.size(); }
    // Sorted absolute jump increments.
    std::span<const double> abs_jumps() const { return jumps_; }

    // Monte Carlo E[b_1(eps)] with the jump increment drawn from the sample.
    double expected_b1(double eps, double sigma) const;
    // eps^2 + 2 (n-1) E[b_1(eps)] - 2 IV with the Monte Carlo expectation.
    double levy_mse_equation(double eps, double sigma, const SamplingGrid& grid) const;

private:
    // Mean of b(eps, J) - b(eps, 0) over the sample.
    double jump_excess(double eps, double sigma2_i) const;

    double h_;
    std::vector<double> jumps_;
};

// Jump misclassifications: continuous increments above eps plus jump
// increments at or below eps. Rejects paths without jump counts.
std::size_t loss_count(const PathRecord& path, double eps);

}  // namespace truncvol
