#pragma once

#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <variant>

#include "truncvol/kernels.hpp"
#include "truncvol/types.hpp"

namespace truncvol {

// X = sigma W + compound Poisson with Gaussian jump sizes.
struct MertonModel {
    double sigma = 0.4;
    FaJumpLaw jumps;
};

// Heston variance with correlated price noise, plus independent Merton jumps.
struct HestonJumpModel {
    double mu = 0.0;
    double kappa = 5.0;
    double theta = 0.16;
    double xi = 0.5;
    double rho = 0.0;
    double v0 = 0.16;
    FaJumpLaw jumps;
    int substeps = 10;  // Euler sub-intervals per observation
};

// X = a t + sigma W + sigma_jmp B(S_t) + theta S_t with a Gamma subordinator S.
struct GaussVgModel {
    double drift = 0.0;
    double sigma = 0.0126;
    double sigma_jmp = 0.01;
    double theta_vg = 0.0;
    double kappa_vg = 0.7;
};

// X = sigma W + symmetric y-stable process with characteristic exponent scale * t * |u|^y.
struct GaussStableModel {
    double sigma = 0.4;
    double y = 1.0;
    double scale = 1.0;
};

using ModelSpec = std::variant<MertonModel, HestonJumpModel, GaussVgModel, GaussStableModel>;

void validate_model(const ModelSpec& spec);
std::string_view model_name(const ModelSpec& spec);

// Deterministic in (spec, grid, seed).
PathRecord simulate(const ModelSpec& spec, const SamplingGrid& grid, std::uint64_t seed);

// CSV with columns i,dx,m,dn,iv_i; doubles with 17 significant digits.
void write_path_csv(const PathRecord& path, std::ostream& out);
PathRecord read_path_csv(std::istream& in);

}  // namespace truncvol
