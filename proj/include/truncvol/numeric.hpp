#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>

namespace truncvol {

inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;  // 1/sqrt(2 pi)

inline double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

// Upper tail P(Z > x), accurate deep into both tails.
inline double normal_sf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// P(lo < Z < hi) without cancellation when both ends sit in the same tail.
inline double normal_mass(double lo, double hi) {
    if (hi <= lo) return 0.0;
    if (lo >= 0.0) return normal_sf(lo) - normal_sf(hi);
    if (hi <= 0.0) return normal_sf(-hi) - normal_sf(-lo);
    return 1.0 - normal_sf(hi) - normal_sf(-lo);
}

// Neumaier variant of Kahan summation.
class KahanSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::fabs(sum_) >= std::fabs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    KahanSum& operator+=(double x) {
        add(x);
        return *this;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// One-pass Welford accumulator.
class RunningStats {
public:
    void push(double x) {
        ++count_;
        const double delta = x - mean_;
        mean_ += delta / static_cast<double>(count_);
        m2_ += delta * (x - mean_);
    }
    std::size_t count() const { return count_; }
    double mean() const { return count_ ? mean_ : 0.0; }
    // Sample variance (n-1 denominator); 0 for fewer than two samples.
    double variance() const { return count_ > 1 ? m2_ / static_cast<double>(count_ - 1) : 0.0; }
    double stddev() const { return std::sqrt(variance()); }
    double std_error() const { return count_ ? stddev() / std::sqrt(static_cast<double>(count_)) : 0.0; }

private:
    std::size_t count_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Seed of path `index` in an experiment seeded with `base`.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    return splitmix64(base ^ index);
}

}  // namespace truncvol
