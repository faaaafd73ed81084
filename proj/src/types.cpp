#include "truncvol/types.hpp"

#include <cmath>

#include "truncvol/numeric.hpp"

namespace truncvol {

SamplingGrid::SamplingGrid(double horizon, std::size_t n) : horizon_(horizon), n_(n) {
    if (n == 0) throw std::invalid_argument("SamplingGrid: n must be >= 1");
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw std::invalid_argument("SamplingGrid: horizon must be positive and finite");
}

SamplingGrid SamplingGrid::from_step(double step, std::size_t n) {
    return SamplingGrid(step * static_cast<double>(n), n);
}

void PathRecord::validate() const {
    const std::size_t n = dx.size();
    if (m.size() != n || dn.size() != n || iv_i.size() != n)
        throw std::invalid_argument("PathRecord: vectors must all have length n");
    KahanSum total;
    for (double v : iv_i) {
        if (!(v > 0.0)) throw std::invalid_argument("PathRecord: iv_i must be positive");
        total += v;
    }
    if (std::fabs(total.value() - iv_total) > 1e-12 * std::fabs(iv_total))
        throw std::invalid_argument("PathRecord: iv_total does not match sum of iv_i");
}

}  // namespace truncvol
