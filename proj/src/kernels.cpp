#include "truncvol/kernels.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "truncvol/numeric.hpp"
#include "truncvol/random.hpp"

namespace truncvol {
namespace {

void check_variance(double sigma2_i) {
    if (!(sigma2_i > 0.0) || !std::isfinite(sigma2_i))
        throw std::invalid_argument("kernel: sigma2_i must be positive and finite");
}

void check_threshold(double eps) {
    if (!(eps >= 0.0)) throw std::invalid_argument("kernel: eps must be >= 0");
}

}  // namespace

double a_coef(const KernelInput& k) {
    check_variance(k.sigma2_i);
    check_threshold(k.eps);
    if (std::isinf(k.eps)) return 0.0;
    const double m = std::fabs(k.m);
    const double sd = std::sqrt(k.sigma2_i);
    const double lo = (k.eps - m) / sd;
    const double hi = (k.eps + m) / sd;
    return (std::exp(-0.5 * lo * lo) + std::exp(-0.5 * hi * hi)) * kInvSqrt2Pi / sd;
}

double b_coef(const KernelInput& k) {
    check_variance(k.sigma2_i);
    check_threshold(k.eps);
    const double m = std::fabs(k.m);
    const double cap = m * m + k.sigma2_i;
    if (std::isinf(k.eps)) return cap;
    const double sd = std::sqrt(k.sigma2_i);
    const double zl = (k.eps - m) / sd;
    const double zh = (k.eps + m) / sd;
    const double boundary =
        -(std::exp(-0.5 * zl * zl) * (k.eps + m) + std::exp(-0.5 * zh * zh) * (k.eps - m)) * sd * kInvSqrt2Pi;
    const double inside = cap * normal_mass((m - k.eps) / sd, (m + k.eps) / sd);
    return std::clamp(boundary + inside, 0.0, cap);
}

double b_tail_no_jump(double eps, double sigma2_i) {
    check_variance(sigma2_i);
    check_threshold(eps);
    if (std::isinf(eps)) return 0.0;
    const double v = eps / std::sqrt(sigma2_i);
    return sigma2_i * 2.0 * (v * normal_pdf(v) + normal_sf(v));
}

double cmse_objective(const CmseObjectiveInput& in) {
    if (!(in.sigma > 0.0)) throw std::invalid_argument("cmse_objective: sigma must be positive");
    check_threshold(in.eps);
    const std::size_t n = in.grid.n();
    if (in.jumps.size() != n) throw std::invalid_argument("cmse_objective: jumps length must equal n");

    const double s2 = in.sigma * in.sigma * in.grid.h();
    const double iv = in.sigma * in.sigma * in.grid.horizon();

    // Intervals without a jump share one (a, b) pair.
    std::size_t zeros = 0;
    KahanSum sum_a, sum_excess, sum_ab;
    for (double m : in.jumps) {
        if (m == 0.0) {
            ++zeros;
            continue;
        }
        const KernelInput k{in.eps, m, s2};
        const double a = a_coef(k);
        const double b = b_coef(k);
        sum_a += a;
        sum_excess += b - s2;
        sum_ab += a * b;
    }
    if (zeros > 0) {
        const double z = static_cast<double>(zeros);
        const double a0 = a_coef({in.eps, 0.0, s2});
        const double tail0 = b_tail_no_jump(in.eps, s2);
        sum_a += z * a0;
        sum_excess += -z * tail0;
        sum_ab += z * a0 * (s2 - tail0);
    }
    // 2 S_b - 2 IV, keeping the O(n s2) parts out of the subtraction.
    const double b_minus_iv = 2.0 * sum_excess.value() + 2.0 * (static_cast<double>(n) * s2 - iv);
    return (in.eps * in.eps + b_minus_iv) * sum_a.value() - 2.0 * sum_ab.value();
}

FaJumpLaw FaJumpLaw::gaussian(double lambda, double mu_jmp, double sigma_jmp) {
    FaJumpLaw law{lambda, mu_jmp, sigma_jmp, 0.0};
    law.validate();
    law.c_f = 2.0 * normal_pdf(mu_jmp / sigma_jmp) / sigma_jmp;
    return law;
}

void FaJumpLaw::validate() const {
    if (!(lambda >= 0.0)) throw std::invalid_argument("FaJumpLaw: lambda must be >= 0");
    if (!(sigma_jmp > 0.0)) throw std::invalid_argument("FaJumpLaw: sigma_jmp must be positive");
    if (!(c_f >= 0.0)) throw std::invalid_argument("FaJumpLaw: c_f must be >= 0");
}

void StableLaw::validate() const {
    if (!(y > 0.0 && y < 2.0)) throw std::invalid_argument("StableLaw: y must lie in (0, 2)");
    if (!(c > 0.0)) throw std::invalid_argument("StableLaw: c must be positive");
}

double StableLaw::characteristic_scale() const {
    validate();
    // integral of (1 - cos(ux)) c|x|^{-y-1} dx = 2c Gamma(1-y) cos(pi y/2) / y * |u|^y
    if (std::fabs(y - 1.0) < 1e-12) return std::numbers::pi * c;
    return 2.0 * c * std::tgamma(1.0 - y) * std::cos(0.5 * std::numbers::pi * y) / y;
}

namespace {

// Jump-count weights P(N_h = k), k >= 1, until the remaining tail is below 1e-12.
template <typename Fn>
double poisson_jump_sum(double lambda_h, Fn&& term) {
    if (lambda_h <= 0.0) return 0.0;
    double remaining = -std::expm1(-lambda_h);
    double weight = std::exp(-lambda_h);
    KahanSum acc;
    for (int k = 1; remaining > 1e-12 && k < 10'000; ++k) {
        weight *= lambda_h / k;
        remaining -= weight;
        if (weight > 0.0) acc += weight * term(k);
    }
    return acc.value();
}

// Integral of b(eps, m, s2) against the Normal(k mu, k sd^2) density in m.
double jump_component(double eps, double s2, const FaJumpLaw& law, int k) {
    using boost::math::quadrature::gauss_kronrod;
    const double centre = k * law.mu_jmp;
    const double spread = std::sqrt(static_cast<double>(k)) * law.sigma_jmp;
    const double lo = centre - 10.0 * spread;
    const double hi = centre + 10.0 * spread;
    const double sd = std::sqrt(s2);

    auto integrand = [&](double m) {
        const double z = (m - centre) / spread;
        return b_coef({eps, m, s2}) * normal_pdf(z) / spread;
    };

    // b(., m) changes on the scale sd around m = +-eps; split there.
    std::vector<double> cuts{lo, hi};
    for (double c : {-eps - 8.0 * sd, -eps, 0.0, eps, eps + 8.0 * sd})
        if (c > lo && c < hi) cuts.push_back(c);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    // Absolute target 1e-12 of the component's second moment; boost takes a
    // tolerance relative to each piece, so convert using a one-shot estimate.
    const double target = 1e-12 * (s2 + centre * centre + spread * spread);
    KahanSum total;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double rough = std::fabs(gauss_kronrod<double, 15>::integrate(integrand, cuts[i], cuts[i + 1], 0));
        if (rough < 1e-3 * target) {
            total += rough;
            continue;
        }
        const double tol = std::clamp(target / rough, 1e-14, 1e-3);
        total += gauss_kronrod<double, 15>::integrate(integrand, cuts[i], cuts[i + 1], 20, tol);
    }
    return total.value();
}

void check_step(double h) {
    if (!(h > 0.0)) throw std::invalid_argument("expected_b1: h must be positive");
}

}  // namespace

double expected_b1_merton(double eps, double sigma, double h, const FaJumpLaw& law) {
    check_step(h);
    check_threshold(eps);
    law.validate();
    const double s2 = sigma * sigma * h;
    const double lambda_h = law.lambda * h;
    const double no_jump = std::exp(-lambda_h) * (s2 - b_tail_no_jump(eps, s2));
    const double jumps =
        poisson_jump_sum(lambda_h, [&](int k) { return jump_component(eps, s2, law, k); });
    return no_jump + jumps;
}

double levy_mse_equation(double eps, double sigma, const SamplingGrid& grid, const FaJumpLaw& law) {
    check_threshold(eps);
    law.validate();
    const double h = grid.h();
    const double s2 = sigma * sigma * h;
    const double lambda_h = law.lambda * h;
    const double others = static_cast<double>(grid.n()) - 1.0;
    const double jump_prob = -std::expm1(-lambda_h);
    const double cut = std::exp(-lambda_h) * b_tail_no_jump(eps, s2);
    const double jumps =
        poisson_jump_sum(lambda_h, [&](int k) { return jump_component(eps, s2, law, k); });
    const double grid_residual = static_cast<double>(grid.n()) * s2 - sigma * sigma * grid.horizon();
    return eps * eps - 2.0 * s2 - 2.0 * others * (jump_prob * s2 + cut) + 2.0 * others * jumps +
           2.0 * grid_residual;
}

double expected_b1_asymptotic_fa(double eps, double sigma, double h, const FaJumpLaw& law) {
    check_step(h);
    check_threshold(eps);
    const double s2 = sigma * sigma * h;
    return s2 - 2.0 * kInvSqrt2Pi * sigma * eps * std::sqrt(h) * std::exp(-eps * eps / (2.0 * s2)) +
           law.lambda * h * eps * eps * eps * law.c_f / 3.0;
}

double expected_b1_asymptotic_stable(double eps, double sigma, double h, const StableLaw& law) {
    check_step(h);
    check_threshold(eps);
    const double s2 = sigma * sigma * h;
    return s2 - 2.0 * kInvSqrt2Pi * sigma * std::sqrt(h) * eps * std::exp(-eps * eps / (2.0 * s2)) +
           2.0 * law.c / (2.0 - law.y) * h * std::pow(eps, 2.0 - law.y);
}

StableIncrementSample::StableIncrementSample(const StableLaw& law, double h, std::size_t samples,
                                             std::uint64_t seed)
    : h_(h) {
    check_step(h);
    if (samples == 0) throw std::invalid_argument("StableIncrementSample: need at least one sample");
    const double scale = std::pow(law.characteristic_scale() * h, 1.0 / law.y);
    Rng rng(splitmix64(seed));
    jumps_.resize(samples);
    // b is even in m, so only |J| matters; sorting lets evaluation stop early.
    for (auto& j : jumps_) j = std::fabs(scale * sample_symmetric_stable(rng, law.y));
    std::sort(jumps_.begin(), jumps_.end());
}

double StableIncrementSample::jump_excess(double eps, double sigma2_i) const {
    const double b0 = b_coef({eps, 0.0, sigma2_i});
    // Beyond this |m| the truncated moment is below the smallest double.
    const double negligible = eps + 40.0 * std::sqrt(sigma2_i);
    KahanSum acc;
    std::size_t i = 0;
    for (; i < jumps_.size() && jumps_[i] <= negligible; ++i) acc += b_coef({eps, jumps_[i], sigma2_i}) - b0;
    acc += -static_cast<double>(jumps_.size() - i) * b0;
    return acc.value() / static_cast<double>(jumps_.size());
}

double StableIncrementSample::expected_b1(double eps, double sigma) const {
    check_threshold(eps);
    const double s2 = sigma * sigma * h_;
    return s2 - b_tail_no_jump(eps, s2) + jump_excess(eps, s2);
}

double StableIncrementSample::levy_mse_equation(double eps, double sigma, const SamplingGrid& grid) const {
    check_threshold(eps);
    if (std::fabs(grid.h() - h_) > 1e-12 * h_)
        throw std::invalid_argument("StableIncrementSample: grid step differs from the sampled step");
    const double s2 = sigma * sigma * h_;
    const double others = static_cast<double>(grid.n()) - 1.0;
    const double grid_residual = static_cast<double>(grid.n()) * s2 - sigma * sigma * grid.horizon();
    return eps * eps - 2.0 * s2 - 2.0 * others * b_tail_no_jump(eps, s2) +
           2.0 * others * jump_excess(eps, s2) + 2.0 * grid_residual;
}

std::size_t loss_count(const PathRecord& path, double eps) {
    check_threshold(eps);
    if (!path.has_jump_counts())
        throw std::invalid_argument("loss_count: path has no jump counts (infinite activity model)");
    if (path.dn.size() != path.dx.size()) throw std::invalid_argument("loss_count: dn length mismatch");
    std::size_t misses = 0;
    for (std::size_t i = 0; i < path.dx.size(); ++i) {
        const bool truncated = std::fabs(path.dx[i]) > eps;
        const bool jumped = path.dn[i] > 0;
        if (truncated != jumped) ++misses;
    }
    return misses;
}

}  // namespace truncvol
