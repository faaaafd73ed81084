#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "truncvol/numeric.hpp"
#include "truncvol/types.hpp"

using namespace truncvol;

TEST(Normal, TailsAndMass) {
    EXPECT_NEAR(normal_cdf(0.0), 0.5, 1e-16);
    EXPECT_NEAR(normal_sf(1.959963984540054), 0.025, 1e-15);
    // deep tail keeps relative precision
    EXPECT_NEAR(normal_sf(30.0) / 4.906713927148187e-198, 1.0, 1e-12);
    EXPECT_NEAR(normal_mass(-1.0, 1.0), 0.6826894921370859, 1e-15);
    EXPECT_NEAR(normal_mass(20.0, 21.0) / 2.7536241153269556761e-89, 1.0, 1e-12);
    EXPECT_EQ(normal_mass(1.0, 1.0), 0.0);
    EXPECT_EQ(normal_mass(2.0, 1.0), 0.0);
}

TEST(KahanSum, RecoversSmallTerms) {
    KahanSum s;
    s += 1.0;
    for (int i = 0; i < 1000; ++i) s += 1e-16;
    s += -1.0;
    EXPECT_NEAR(s.value(), 1e-13, 1e-25);
}

TEST(RunningStats, MatchesTwoPass) {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> z(1e3, 2.0);
    std::vector<double> xs(1000);
    RunningStats st;
    for (auto& x : xs) {
        x = z(rng);
        st.push(x);
    }
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= xs.size();
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    const double var = ss / (xs.size() - 1);
    EXPECT_NEAR(st.mean(), mean, 1e-10 * std::fabs(mean));
    EXPECT_NEAR(st.variance(), var, 1e-10 * var);
    EXPECT_EQ(st.count(), 1000u);
}

TEST(RunningStats, DegenerateCounts) {
    RunningStats st;
    EXPECT_EQ(st.mean(), 0.0);
    EXPECT_EQ(st.variance(), 0.0);
    st.push(3.5);
    EXPECT_EQ(st.mean(), 3.5);
    EXPECT_EQ(st.stddev(), 0.0);
}

TEST(Seeds, DerivedSeedsDiffer) {
    EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
    EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
    EXPECT_EQ(derive_seed(42, 9), derive_seed(42, 9));
}

TEST(SamplingGrid, StepDerivedFromHorizon) {
    const SamplingGrid g(1.0 / 12.0, 1638);
    EXPECT_DOUBLE_EQ(g.h(), 1.0 / 19656.0);
    EXPECT_THROW(SamplingGrid(1.0, 0), std::invalid_argument);
    EXPECT_THROW(SamplingGrid(0.0, 10), std::invalid_argument);
    const auto f = SamplingGrid::from_step(0.25, 4);
    EXPECT_DOUBLE_EQ(f.horizon(), 1.0);
}

TEST(PathRecord, Validate) {
    PathRecord p;
    p.dx = {0.1, -0.2};
    p.m = {0.0, 0.0};
    p.dn = {0, 0};
    p.iv_i = {0.01, 0.01};
    p.iv_total = 0.02;
    EXPECT_NO_THROW(p.validate());
    p.iv_total = 0.03;
    EXPECT_THROW(p.validate(), std::invalid_argument);
    p.iv_total = 0.02;
    p.iv_i[0] = 0.0;
    EXPECT_THROW(p.validate(), std::invalid_argument);
}
