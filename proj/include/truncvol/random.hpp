#pragma once

#include <cmath>
#include <numbers>
#include <random>

namespace truncvol {

using Rng = std::mt19937_64;

// Standard symmetric alpha-stable draw (characteristic function exp(-|u|^alpha))
// by the Chambers-Mallows-Stuck construction.
inline double sample_symmetric_stable(Rng& rng, double alpha) {
    std::uniform_real_distribution<double> angle(-0.5 * std::numbers::pi, 0.5 * std::numbers::pi);
    std::exponential_distribution<double> expo(1.0);
    const double u = angle(rng);
    const double w = expo(rng);
    if (alpha == 1.0) return std::tan(u);
    const double lead = std::sin(alpha * u) / std::pow(std::cos(u), 1.0 / alpha);
    return lead * std::pow(std::cos((1.0 - alpha) * u) / w, (1.0 - alpha) / alpha);
}

}  // namespace truncvol
