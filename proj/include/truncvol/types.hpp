#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace truncvol {

// Uniform observation grid on [0, T]; the step is always derived from (T, n).
class SamplingGrid {
public:
    SamplingGrid(double horizon, std::size_t n);

    double horizon() const { return horizon_; }
    std::size_t n() const { return n_; }
    double h() const { return horizon_ / static_cast<double>(n_); }

    // Grid with n intervals of length exactly `step`.
    static SamplingGrid from_step(double step, std::size_t n);

private:
    double horizon_;
    std::size_t n_;
};

inline constexpr int kNoJumpCount = -1;

// Simulated observations plus the ground truth that generated them.
struct PathRecord {
    std::vector<double> dx;    // observed increments
    std::vector<double> m;     // jump part of each increment
    std::vector<int> dn;       // jump counts, kNoJumpCount for infinite activity
    std::vector<double> iv_i;  // integrated variance per interval
    double iv_total = 0.0;
    std::uint64_t seed = 0;

    std::size_t size() const { return dx.size(); }
    bool has_jump_counts() const { return dn.empty() || dn.front() != kNoJumpCount; }
    void validate() const;
};

enum class NumericErrorKind { no_sign_change, non_finite, non_convergence };

class NumericError : public std::runtime_error {
public:
    NumericError(NumericErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}
    NumericErrorKind kind() const { return kind_; }

private:
    NumericErrorKind kind_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace truncvol
