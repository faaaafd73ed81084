#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "truncvol/estimators.hpp"
#include "truncvol/models.hpp"
#include "truncvol/types.hpp"

namespace truncvol {

// Flat view of an INI-style file: top-level `key = value` lines plus
// `[section]` blocks, addressed as "section.key".
class ConfigTree {
public:
    static ConfigTree parse(std::istream& in);
    static ConfigTree parse_file(const std::string& path);

    bool contains(const std::string& key) const { return values_.count(key) > 0; }
    const std::string& at(const std::string& key) const;
    std::optional<std::string> get(const std::string& key) const;
    void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
    void erase(const std::string& key) { values_.erase(key); }
    const std::map<std::string, std::string>& values() const { return values_; }

    double number(const std::string& key) const;
    double number_or(const std::string& key, double fallback) const;
    std::uint64_t integer(const std::string& key) const;

    std::string serialize() const;

private:
    std::map<std::string, std::string> values_;
};

enum class ErrorScale { annualized, integrated };
enum class OutputFormat { csv, markdown };

struct ExperimentConfig {
    std::string name = "experiment";
    ModelSpec model = MertonModel{};
    SamplingGrid grid{1.0 / 12.0, 1638};
    std::size_t n_paths = 1000;
    std::uint64_t base_seed = 1;
    std::vector<EstimatorId> estimators;
    EstimatorParams params;
    ErrorScale error_scale = ErrorScale::annualized;
    int mse_exponent = 5;  // markdown shows MSE * 10^mse_exponent
    std::string output_path;
    OutputFormat format = OutputFormat::csv;

    void validate() const;
};

ExperimentConfig experiment_from_tree(const ConfigTree& tree);
ConfigTree experiment_to_tree(const ExperimentConfig& cfg);
ExperimentConfig load_experiment(const std::string& path);

// Canonical text form; equal configs serialise identically.
std::string serialize_experiment(const ExperimentConfig& cfg);
// FNV-1a of the canonical form without the [output] block.
std::uint64_t config_hash(const ExperimentConfig& cfg);

std::string format_decimal(double v);
double parse_decimal(const std::string& text);

}  // namespace truncvol
