#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "truncvol/config.hpp"
#include "truncvol/estimators.hpp"
#include "truncvol/numeric.hpp"

namespace truncvol {

// Cross-path statistics of one estimator. Errors are (IV_hat - IV)/T on the
// annualized scale and IV_hat - IV on the integrated scale; the relative
// error (IV_hat - IV)/IV is the same on both.
struct EstimatorSummary {
    EstimatorId id{};
    RunningStats rel_error;
    RunningStats sq_error;
    RunningStats loss;
    RunningStats eps;
    RunningStats iterations;
    std::size_t failures = 0;  // flagged reports plus paths that threw

    double mean_rel_bias() const { return rel_error.mean(); }
    double std_rel_bias() const { return rel_error.stddev(); }
    double mse() const { return sq_error.mean(); }
    double se_mse() const { return sq_error.std_error(); }
};

struct McSummary {
    std::vector<EstimatorSummary> rows;
    std::size_t n_paths = 0;
    std::uint64_t config_hash = 0;
    ErrorScale error_scale = ErrorScale::annualized;
    int mse_exponent = 5;

    const EstimatorSummary& row(EstimatorId id) const;
};

// Per-path outcome, exposed for tests and custom aggregation.
struct PathOutcome {
    double iv_true = 0.0;
    std::vector<EstimateReport> reports;
    std::vector<char> threw;
};

PathOutcome evaluate_path(const ExperimentConfig& cfg, std::size_t path_index);

// Simulates and evaluates every path. Result is identical for any thread count.
McSummary run_experiment(const ExperimentConfig& cfg, unsigned threads = 0);

std::string emit_table(const McSummary& summary, OutputFormat format);

// CSV "n,v_n".
std::string emit_vn_curve(std::span<const std::size_t> n_values);
// Log-spaced grid from 100 to 10000.
std::vector<std::size_t> default_vn_grid(std::size_t points = 41);

}  // namespace truncvol
