#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "truncvol/kernels.hpp"
#include "truncvol/numeric.hpp"
#include "truncvol/random.hpp"

using namespace truncvol;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kH = 1.0 / 19656.0;

// Composite Simpson of x^2 N(m, s2)(x) over [-eps, eps]; independent of the erfc form.
double b_by_simpson(double eps, double m, double s2, int panels = 200000) {
    const double s = std::sqrt(s2);
    const double lo = std::max(-eps, m - 12 * s), hi = std::min(eps, m + 12 * s);
    if (hi <= lo) return 0.0;
    const double step = (hi - lo) / panels;
    auto f = [&](double x) {
        const double z = (x - m) / s;
        return x * x * std::exp(-0.5 * z * z) / (s * std::sqrt(2 * std::numbers::pi));
    };
    double acc = f(lo) + f(hi);
    for (int k = 1; k < panels; ++k) acc += f(lo + k * step) * (k % 2 ? 4.0 : 2.0);
    return acc * step / 3.0;
}

double f_brute(double eps, double sigma, const std::vector<double>& m, double h) {
    const double iv = sigma * sigma * h * m.size();
    double out = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        double others = 0.0;
        for (std::size_t j = 0; j < m.size(); ++j)
            if (j != i) others += b_coef({eps, m[j], sigma * sigma * h});
        out += a_coef({eps, m[i], sigma * sigma * h}) * (eps * eps + 2 * others - 2 * iv);
    }
    return out;
}

}  // namespace

TEST(ACoef, ValueAtOrigin) { EXPECT_NEAR(a_coef({0.0, 0.0, 1.0}), 0.7978845608028654, 1e-15); }

TEST(ACoef, VanishesAtInfinity) {
    EXPECT_EQ(a_coef({kInf, 0.0, 1.0}), 0.0);
    EXPECT_EQ(a_coef({1e6, 0.0, 1e-10}), 0.0);
}

TEST(ACoef, HighPrecisionReference) {
    // 50-digit arithmetic: a(0.01, 0.05, 0.16 * 5.0875e-5)
    const double s2 = 0.16 * 5.0875e-5;
    EXPECT_NEAR(a_coef({0.01, 0.05, s2}) / 2.904647929886308817e-41, 1.0, 1e-11);
    EXPECT_NEAR(a_coef({0.01, 0.0, s2}) / 0.6011340609506598145, 1.0, 1e-13);
}

TEST(ACoef, SymmetricInJump) {
    for (double m : {0.001, 0.02, 0.3})
        EXPECT_EQ(a_coef({0.01, m, 1e-4}), a_coef({0.01, -m, 1e-4}));
}

TEST(ACoef, RejectsBadVariance) {
    EXPECT_THROW(a_coef({0.1, 0.0, 0.0}), std::invalid_argument);
    EXPECT_THROW(a_coef({0.1, 0.0, -1.0}), std::invalid_argument);
    EXPECT_THROW(b_coef({0.1, 0.0, 0.0}), std::invalid_argument);
}

TEST(BCoef, EndpointValues) {
    for (double m : {0.0, 0.01, -0.3, 2.0}) {
        EXPECT_EQ(b_coef({0.0, m, 1e-4}), 0.0);
        const double lim = m * m + 1e-4;
        EXPECT_NEAR(b_coef({kInf, m, 1e-4}), lim, 1e-10 * lim);
        EXPECT_NEAR(b_coef({1e3, m, 1e-4}), lim, 1e-10 * lim);
    }
}

TEST(BCoef, HighPrecisionReference) {
    const double s2 = 0.16 * 5.0875e-5;
    EXPECT_NEAR(b_coef({0.012, 0.0, s2}) / 8.135852840442564020e-6, 1.0, 1e-12);
    EXPECT_NEAR(b_coef({0.012, 0.01, s2}) / 6.242211220873135737e-5, 1.0, 1e-12);
    EXPECT_NEAR(b_coef({0.012, 0.05, s2}), 1.2476510946849090e-44, 1e-50);
}

TEST(BCoef, MatchesSimpsonIntegral) {
    const double s2 = 0.16 * 5.0875e-5;
    for (double m : {0.0, 0.004, -0.011, 0.02})
        for (double eps : {0.002, 0.009, 0.012, 0.03}) {
            const double ref = b_by_simpson(eps, m, s2);
            EXPECT_NEAR(b_coef({eps, m, s2}), ref, 1e-10 * std::max(ref, 1e-12)) << eps << " " << m;
        }
}

TEST(BCoef, TailHelperMatches) {
    const double s2 = 2e-5;
    for (double eps : {0.001, 0.01, 0.02}) {
        const double tail = b_tail_no_jump(eps, s2);
        EXPECT_NEAR(s2 - tail, b_coef({eps, 0.0, s2}), 1e-15);
        EXPECT_GE(tail, 0.0);
    }
}

TEST(BCoef, MonotoneBoundedSymmetric) {
    const double s2 = 1e-4;
    for (double m : {0.0, 0.005, 0.05}) {
        double prev = 0.0;
        for (int k = 0; k <= 400; ++k) {
            const double eps = 1e-4 * k;
            const double v = b_coef({eps, m, s2});
            EXPECT_GE(v, prev);
            EXPECT_LE(v, m * m + s2);
            EXPECT_EQ(v, b_coef({eps, -m, s2}));
            prev = v;
        }
    }
}

TEST(BCoef, DerivativeIdentity) {
    // b'(eps) = eps^2 a(eps) on a 5 x 5 x 4 lattice
    int checked = 0;
    for (double s2 : {1e-6, 1e-4, 1e-2, 1.0})
        for (double mr : {0.0, 0.5, -1.0, 2.0, 4.0})
            for (double er : {0.2, 0.8, 1.5, 3.0, 5.0}) {
                const double s = std::sqrt(s2);
                const double eps = er * s, m = mr * s;
                const double d = 1e-5 * s;
                const double fd = (b_coef({eps + d, m, s2}) - b_coef({eps - d, m, s2})) / (2 * d);
                const double exact = eps * eps * a_coef({eps, m, s2});
                EXPECT_NEAR(fd, exact, 1e-6 * exact) << s2 << " " << mr << " " << er;
                ++checked;
            }
    EXPECT_EQ(checked, 100);
}

TEST(CmseObjective, NegativeAtZero) {
    std::vector<double> m(100, 0.0);
    const SamplingGrid g(1.0 / 12.0, m.size());
    const double f0 = cmse_objective({0.0, 0.4, m, g});
    const double iv = 0.16 / 12.0;
    EXPECT_NEAR(f0, -2 * iv * 100 * a_coef({0.0, 0.0, 0.16 * g.h()}), 1e-12 * std::fabs(f0));
}

TEST(CmseObjective, DecaysToZeroFromAbove) {
    std::vector<double> m(50, 0.0);
    const SamplingGrid g(1.0, m.size());
    const double s = std::sqrt(g.h());
    double prev = kInf;
    for (double k : {6.0, 8.0, 10.0, 12.0}) {
        const double v = cmse_objective({k * s, 1.0, m, g});
        EXPECT_GT(v, 0.0);
        EXPECT_LT(v, prev);
        prev = v;
    }
}

TEST(CmseObjective, SmallHandCase) {
    const std::vector<double> m{0.0, 0.0, 0.5, 0.0};
    const SamplingGrid g(1.0, 4);
    const double fast = cmse_objective({0.3, 1.0, m, g});
    const double slow = f_brute(0.3, 1.0, m, 0.25);
    EXPECT_NEAR(fast, slow, 1e-12 * std::fabs(slow));
}

TEST(CmseObjective, MatchesBruteForceOnRandomInstances) {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> nd(1, 64);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 100; ++rep) {
        const int n = nd(rng);
        const double sigma = 0.1 + u(rng);
        const SamplingGrid g(1.0 / 12.0, n);
        const double sd = sigma * std::sqrt(g.h());
        std::vector<double> m(n, 0.0);
        for (auto& x : m)
            if (u(rng) < 0.3) x = (u(rng) - 0.5) * 10 * sd;
        const double eps = (0.3 + 5 * u(rng)) * sd;
        const double fast = cmse_objective({eps, sigma, m, g});
        const double slow = f_brute(eps, sigma, m, g.h());
        EXPECT_NEAR(fast, slow, 1e-12 * std::fabs(slow)) << "rep " << rep;
        EXPECT_LT(cmse_objective({0.0, sigma, m, g}), 0.0);
    }
}

TEST(CmseObjective, RejectsLengthMismatch) {
    std::vector<double> m(3, 0.0);
    EXPECT_THROW(cmse_objective({0.1, 1.0, m, SamplingGrid(1.0, 4)}), std::invalid_argument);
}

TEST(ExpectedB1Merton, NoJumpsIsPlainKernel) {
    const FaJumpLaw law = FaJumpLaw::gaussian(0.0, 0.0, 0.02);
    for (double eps : {0.0, 0.005, 0.0127, 0.05})
        EXPECT_NEAR(expected_b1_merton(eps, 0.4, kH, law), b_coef({eps, 0.0, 0.16 * kH}), 1e-18);
}

TEST(ExpectedB1Merton, RejectsBadStep) {
    EXPECT_THROW(expected_b1_merton(0.01, 0.4, 0.0, FaJumpLaw::gaussian(1, 0, 1)), std::invalid_argument);
}

TEST(ExpectedB1Merton, UntruncatedSecondMomentMatchesMonteCarlo) {
    const double h = 1e-3, sigma = 0.4;
    const FaJumpLaw law = FaJumpLaw::gaussian(100.0, 0.01, 0.03);
    const double value = expected_b1_merton(kInf, sigma, h, law);

    Rng rng(99);
    std::normal_distribution<double> z;
    std::poisson_distribution<int> pn(law.lambda * h);
    RunningStats st;
    for (int k = 0; k < 10'000'000; ++k) {
        double x = sigma * std::sqrt(h) * z(rng);
        const int jumps = pn(rng);
        for (int j = 0; j < jumps; ++j) x += law.mu_jmp + law.sigma_jmp * z(rng);
        st.push(x * x);
    }
    EXPECT_NEAR(value, st.mean(), 3 * st.std_error());
    // closed form second moment of the mixture
    const double lh = law.lambda * h;
    const double exact = sigma * sigma * h + lh * law.sigma_jmp * law.sigma_jmp +
                         law.mu_jmp * law.mu_jmp * (lh + lh * lh);
    EXPECT_NEAR(value, exact, 1e-9 * exact);
}

TEST(ExpectedB1Merton, MatchesSimpsonMixture) {
    const double h = kH, sigma = 0.4;
    const FaJumpLaw law = FaJumpLaw::gaussian(2000.0, 0.004, 3 * std::sqrt(h));
    const double s2 = sigma * sigma * h;
    for (double eps : {0.006, 0.0127, 0.03}) {
        double ref = 0.0, weight = std::exp(-law.lambda * h);
        ref += weight * b_coef({eps, 0.0, s2});
        for (int k = 1; k <= 8; ++k) {
            weight *= law.lambda * h / k;
            const double c = k * law.mu_jmp, sd = std::sqrt(k) * law.sigma_jmp;
            const int panels = 400000;
            const double lo = c - 12 * sd, step = 24 * sd / panels;
            double acc = 0.0;
            for (int j = 0; j <= panels; ++j) {
                const double m = lo + j * step;
                const double w = (j == 0 || j == panels) ? 1.0 : (j % 2 ? 4.0 : 2.0);
                acc += w * b_coef({eps, m, s2}) * std::exp(-0.5 * ((m - c) / sd) * ((m - c) / sd)) /
                       (sd * std::sqrt(2 * std::numbers::pi));
            }
            ref += weight * acc * step / 3.0;
        }
        EXPECT_NEAR(expected_b1_merton(eps, sigma, h, law) / ref, 1.0, 1e-10) << eps;
    }
}

TEST(ExpectedB1Merton, AgreesWithFaExpansionOnTable1) {
    const FaJumpLaw law = FaJumpLaw::gaussian(100.0, 0.0, 3 * std::sqrt(kH));
    const double q = expected_b1_merton(0.0127, 0.4, kH, law);
    const double a = expected_b1_asymptotic_fa(0.0127, 0.4, kH, law);
    EXPECT_NEAR(a / q, 1.0, 0.02);
}

TEST(ExpectedB1Merton, ExpansionRatioTendsToOneAlongH) {
    // sigma_J held at its 5-minute value; eps at the modulus of continuity
    const FaJumpLaw law = FaJumpLaw::gaussian(100.0, 0.0, 3 * std::sqrt(kH));
    double prev_gap = kInf;
    for (double h : {1e-3, 1e-4, 1e-5, 1e-6}) {
        const double eps = std::sqrt(2 * 0.16 * h * std::log(1 / h));
        const double gap = std::fabs(expected_b1_asymptotic_fa(eps, 0.4, h, law) /
                                         expected_b1_merton(eps, 0.4, h, law) -
                                     1.0);
        EXPECT_LT(gap, prev_gap) << h;
        prev_gap = gap;
    }
    EXPECT_LT(prev_gap, 0.01);
}

TEST(ExpectedB1Asymptotic, FaClosedForms) {
    const double h = 1e-4, sigma = 0.3;
    const FaJumpLaw none = FaJumpLaw::gaussian(0.0, 0.0, 0.01);
    const double eps = 0.01;
    const double expected = sigma * sigma * h - 2 / std::sqrt(2 * std::numbers::pi) * sigma * eps * std::sqrt(h) *
                                                    std::exp(-eps * eps / (2 * sigma * sigma * h));
    EXPECT_NEAR(expected_b1_asymptotic_fa(eps, sigma, h, none), expected, 1e-18);
    EXPECT_EQ(expected_b1_asymptotic_fa(0.0, sigma, h, FaJumpLaw::gaussian(50, 0, 0.01)), sigma * sigma * h);
    const FaJumpLaw g = FaJumpLaw::gaussian(50, 0.0, 0.01);
    EXPECT_NEAR(g.c_f, 2 / (0.01 * std::sqrt(2 * std::numbers::pi)), 1e-9);
}

TEST(ExpectedB1Asymptotic, StableDirectArithmetic) {
    const double v = expected_b1_asymptotic_stable(0.03, 1.0, 1e-4, StableLaw{1.0, 1.0});
    const double ref = 1e-4 - 2 / std::sqrt(2 * std::numbers::pi) * 0.01 * 0.03 * std::exp(-4.5) + 2 * 1e-4 * 0.03;
    EXPECT_NEAR(v, ref, 1e-16);
}

TEST(ExpectedB1Asymptotic, StableWithoutJumpsReducesToFa) {
    const double tiny = 1e-300;
    const double s = expected_b1_asymptotic_stable(0.02, 0.4, 1e-4, StableLaw{1.5, tiny});
    const double f = expected_b1_asymptotic_fa(0.02, 0.4, 1e-4, FaJumpLaw::gaussian(0.0, 0.0, 1.0));
    EXPECT_NEAR(s, f, 1e-18);
}

TEST(StableSample, RatioToExpansionTendsToOne) {
    const StableLaw law{1.0, 0.4 / std::sqrt(2 * std::numbers::pi)};
    double prev_gap = kInf;
    for (double h : {1e-3, 1e-4, 1e-5}) {
        const StableIncrementSample sample(law, h, 1'000'000, 3);
        const double eps = std::sqrt(0.16 * h * std::log(1 / h));
        const double gap = std::fabs(sample.expected_b1(eps, 0.4) / expected_b1_asymptotic_stable(eps, 0.4, h, law) - 1);
        EXPECT_LT(gap, prev_gap + 0.01) << h;
        prev_gap = gap;
    }
    EXPECT_LT(prev_gap, 0.05);
}

TEST(StableSample, ScaleMapping) {
    const StableLaw cauchy{1.0, 2.0};
    EXPECT_NEAR(cauchy.characteristic_scale(), 2.0 * std::numbers::pi, 1e-12);
    // Y = 1/2: 2 C Gamma(1/2) cos(pi/4) / (1/2)
    const StableLaw half{0.5, 1.0};
    EXPECT_NEAR(half.characteristic_scale(),
                4 * std::sqrt(std::numbers::pi) * std::cos(std::numbers::pi / 4), 1e-12);
    EXPECT_THROW(StableLaw({2.0, 1.0}).validate(), std::invalid_argument);
}

TEST(LossCount, Basics) {
    PathRecord p;
    p.dx = {0.1, -0.5, 0.0, 0.3};
    p.m = {0.0, 0.0, 0.0, 0.0};
    p.dn = {0, 0, 0, 0};
    p.iv_i = {1, 1, 1, 1};
    p.iv_total = 4;
    EXPECT_EQ(loss_count(p, 1.0), 0u);
    EXPECT_EQ(loss_count(p, 0.0), 3u);
    p.dn[1] = 1;
    EXPECT_EQ(loss_count(p, 1.0), 1u);  // jump hidden below eps
    EXPECT_EQ(loss_count(p, 0.2), 1u);  // 0.3 misflagged, jump detected
    p.dn.assign(4, kNoJumpCount);
    EXPECT_THROW(loss_count(p, 0.2), std::invalid_argument);
}

TEST(LossCount, PiecewiseConstantBetweenIncrements) {
    Rng rng(5);
    std::normal_distribution<double> z;
    PathRecord p;
    for (int i = 0; i < 200; ++i) {
        p.dx.push_back(z(rng));
        p.m.push_back(0.0);
        p.dn.push_back(i % 17 == 0 ? 1 : 0);
        p.iv_i.push_back(1.0);
    }
    p.iv_total = 200;
    std::vector<double> cuts;
    for (double x : p.dx) cuts.push_back(std::fabs(x));
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const double lo = cuts[k], hi = cuts[k + 1];
        if (hi - lo < 1e-12) continue;
        EXPECT_EQ(loss_count(p, lo + 0.25 * (hi - lo)), loss_count(p, lo + 0.75 * (hi - lo)));
    }
}
