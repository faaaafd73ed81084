#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "truncvol/solvers.hpp"
#include "truncvol/types.hpp"

namespace truncvol {

enum class ReportStatus { ok, non_convergence, solver_fallback };

// Every estimate is an integrated variance over [0, T], not an annualised variance.
struct EstimateReport {
    double iv_hat = 0.0;
    std::optional<double> eps_final;  // threshold that produced iv_hat
    int iterations = 1;
    std::optional<std::size_t> loss;  // needs jump counts
    std::size_t kept = 0;             // increments at or below the threshold
    ReportStatus status = ReportStatus::ok;
};

double rv(std::span<const double> dx);
double bv(std::span<const double> dx);
double minrv(std::span<const double> dx);
double medrv(std::span<const double> dx);

EstimateReport trv(std::span<const double> dx, double eps);
EstimateReport tbv(std::span<const double> dx, double eps);

// sqrt(estimate / T) for the chosen starting estimator. `truth` is not
// observable from increments and is rejected.
double initial_sigma(std::span<const double> dx, const SamplingGrid& grid, SigmaSource source);

enum class TruncatedSum { trv, tbv };

struct IterationConfig {
    double tol = 0.0;  // 0: stop once the kept set repeats
    int max_iter = 100;
    bool single_step = false;
    TruncatedSum sum = TruncatedSum::trv;
    std::optional<double> initial_sigma;  // overrides the rule's sigma source
    std::vector<double>* trace = nullptr;  // receives sigma_0, sigma_1, ...
};

// Alternates threshold <- rule(sigma_hat) and sigma_hat^2 <- truncated sum / T.
// `iterations` is the index k of the estimate at which the stopping rule fired.
EstimateReport iterate_rule(std::span<const double> dx, const SamplingGrid& grid, const ThresholdRule& rule,
                            const IterationConfig& cfg);

struct NewMethodConfig {
    double tol = 1e-5;
    int max_iter = 100;
    bool single_step = false;
    SigmaSource initial = SigmaSource::trv_as;
};

// Root-of-F threshold with jump and volatility estimates refined in turn.
EstimateReport new_method(std::span<const double> dx, const SamplingGrid& grid, const NewMethodConfig& cfg);

// TRV at the root of F built from the true jumps and the path's average variance.
EstimateReport oracle(const PathRecord& path, const SamplingGrid& grid);

enum class SpotLevel { interval_mean };

// Fraction of intervals where 1{dX^2 <= (1+eta) 2 M_i h ln(1/h)} disagrees with 1{dN = 0}.
double consistency_indicator_check(const PathRecord& path, const SamplingGrid& grid, double eta,
                                   SpotLevel level = SpotLevel::interval_mean);

enum class EstimatorId {
    rv, bv, minrv, medrv, trv_jt, three_mc, three_mc_k, two_mc, two_mc_k, mc_two, mc_two_k, new_one, new_k, oracle, tbv, tbv_k
};

inline constexpr std::array kAllEstimators{
    EstimatorId::rv,    EstimatorId::bv,     EstimatorId::minrv,   EstimatorId::medrv,
    EstimatorId::trv_jt, EstimatorId::three_mc,   EstimatorId::three_mc_k,   EstimatorId::two_mc,
    EstimatorId::two_mc_k, EstimatorId::mc_two,   EstimatorId::mc_two_k,   EstimatorId::new_one,
    EstimatorId::new_k, EstimatorId::oracle, EstimatorId::tbv,     EstimatorId::tbv_k,
};

// Config key, e.g. "2mc_k".
std::string_view estimator_key(EstimatorId id);
// Table label, e.g. "2mc,k".
std::string_view estimator_label(EstimatorId id);
std::optional<EstimatorId> parse_estimator(std::string_view key);

struct EstimatorParams {
    double power_c = 4.0;
    double power_omega = 0.49;
    double new_tol = 1e-5;
    double tbv_tol = 1e-5;
    int max_iter = 100;
    SigmaSource mc_initial = SigmaSource::rv;
    SigmaSource new_initial = SigmaSource::trv_as;
};

// Runs one estimator on a path; fills loss when the path carries jump counts.
EstimateReport run_estimator(EstimatorId id, const PathRecord& path, const SamplingGrid& grid,
                             const EstimatorParams& params = {});

}  // namespace truncvol
