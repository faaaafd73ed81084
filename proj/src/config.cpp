#include "truncvol/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace truncvol {
namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_words(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string w; in >> w;) {
        if (!w.empty() && w.back() == ',') w.pop_back();
        if (!w.empty()) out.push_back(w);
    }
    return out;
}

}  // namespace

ConfigTree ConfigTree::parse(std::istream& in) {
    ConfigTree tree;
    std::string section;
    std::string line;
    for (int lineno = 1; std::getline(in, line); ++lineno) {
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string text = trim(line);
        if (text.empty()) continue;
        if (text.front() == '[') {
            if (text.back() != ']' || text.size() < 3)
                throw std::invalid_argument("config line " + std::to_string(lineno) + ": malformed section");
            section = trim(std::string_view(text).substr(1, text.size() - 2));
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(std::string_view(text).substr(0, eq));
        const std::string value = trim(std::string_view(text).substr(eq + 1));
        if (key.empty()) throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
        const std::string full = section.empty() ? key : section + "." + key;
        if (tree.contains(full)) throw std::invalid_argument("config: duplicate key '" + full + "'");
        tree.values_[full] = value;
    }
    return tree;
}

ConfigTree ConfigTree::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    return parse(in);
}

const std::string& ConfigTree::at(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw std::invalid_argument("config: missing key '" + key + "'");
    return it->second;
}

std::optional<std::string> ConfigTree::get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

double ConfigTree::number(const std::string& key) const {
    try {
        return parse_decimal(at(key));
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument("config key '" + key + "': " + e.what());
    }
}

double ConfigTree::number_or(const std::string& key, double fallback) const {
    return contains(key) ? number(key) : fallback;
}

std::uint64_t ConfigTree::integer(const std::string& key) const {
    const std::string& text = at(key);
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw std::invalid_argument("config key '" + key + "': not a non-negative integer: '" + text + "'");
    return v;
}

std::string ConfigTree::serialize() const {
    std::ostringstream out;
    // Top-level keys first, then one block per section.
    for (const auto& [key, value] : values_)
        if (key.find('.') == std::string::npos) out << key << " = " << value << '\n';
    std::string current;
    for (const auto& [key, value] : values_) {
        const auto dot = key.find('.');
        if (dot == std::string::npos) continue;
        const std::string section = key.substr(0, dot);
        if (section != current) {
            out << '\n' << '[' << section << "]\n";
            current = section;
        }
        out << key.substr(dot + 1) << " = " << value << '\n';
    }
    return out.str();
}

std::string format_decimal(double v) {
    char buf[40];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, end);
}

double parse_decimal(const std::string& text) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (first != last && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v))
        throw std::invalid_argument("not a finite decimal number: '" + text + "'");
    return v;
}

namespace {

SigmaSource parse_sigma_source(const std::string& s) {
    if (s == "rv") return SigmaSource::rv;
    if (s == "bv") return SigmaSource::bv;
    if (s == "trv_as") return SigmaSource::trv_as;
    throw std::invalid_argument("config: unknown sigma source '" + s + "' (rv, bv, trv_as)");
}

std::string sigma_source_name(SigmaSource s) {
    switch (s) {
        case SigmaSource::rv: return "rv";
        case SigmaSource::bv: return "bv";
        case SigmaSource::trv_as: return "trv_as";
        case SigmaSource::truth: break;
    }
    throw std::invalid_argument("config: sigma source 'truth' cannot start a feasible estimator");
}

int to_int(double v, const std::string& key) {
    if (v != std::floor(v) || std::fabs(v) > 1e9)
        throw std::invalid_argument("config key '" + key + "': expected an integer");
    return static_cast<int>(v);
}

ModelSpec model_from_tree(const ConfigTree& t) {
    const std::string& type = t.at("model.type");
    auto jumps = [&] {
        return FaJumpLaw::gaussian(t.number("model.lambda"), t.number_or("model.jump_mean", 0.0),
                                   t.number("model.jump_sd"));
    };
    if (type == "merton") return MertonModel{t.number("model.sigma"), jumps()};
    if (type == "heston_jump") {
        HestonJumpModel m;
        m.mu = t.number_or("model.mu", 0.0);
        m.kappa = t.number("model.kappa");
        m.theta = t.number("model.theta");
        m.xi = t.number("model.xi");
        m.rho = t.number("model.rho");
        m.v0 = t.number("model.v0");
        m.jumps = jumps();
        m.substeps = to_int(t.number_or("model.substeps", 10.0), "model.substeps");
        return m;
    }
    if (type == "gauss_vg") {
        GaussVgModel m;
        m.drift = t.number_or("model.drift", 0.0);
        m.sigma = t.number("model.sigma");
        m.sigma_jmp = t.number("model.sigma_jmp");
        m.theta_vg = t.number_or("model.theta_vg", 0.0);
        m.kappa_vg = t.number("model.kappa_vg");
        return m;
    }
    if (type == "gauss_stable")
        return GaussStableModel{t.number("model.sigma"), t.number("model.y"), t.number("model.scale")};
    throw std::invalid_argument("config: unknown model.type '" + type + "'");
}

void model_to_tree(const ModelSpec& spec, ConfigTree& t) {
    t.set("model.type", std::string(model_name(spec)));
    auto put = [&](const std::string& k, double v) { t.set("model." + k, format_decimal(v)); };
    auto put_jumps = [&](const FaJumpLaw& law) {
        put("lambda", law.lambda);
        put("jump_mean", law.mu_jmp);
        put("jump_sd", law.sigma_jmp);
    };
    if (const auto* m = std::get_if<MertonModel>(&spec)) {
        put("sigma", m->sigma);
        put_jumps(m->jumps);
    } else if (const auto* m = std::get_if<HestonJumpModel>(&spec)) {
        put("mu", m->mu);
        put("kappa", m->kappa);
        put("theta", m->theta);
        put("xi", m->xi);
        put("rho", m->rho);
        put("v0", m->v0);
        put("substeps", m->substeps);
        put_jumps(m->jumps);
    } else if (const auto* m = std::get_if<GaussVgModel>(&spec)) {
        put("drift", m->drift);
        put("sigma", m->sigma);
        put("sigma_jmp", m->sigma_jmp);
        put("theta_vg", m->theta_vg);
        put("kappa_vg", m->kappa_vg);
    } else if (const auto* m = std::get_if<GaussStableModel>(&spec)) {
        put("sigma", m->sigma);
        put("y", m->y);
        put("scale", m->scale);
    }
}

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys{
        "name", "paths", "seed", "error_scale", "mse_exponent",
        "grid.n", "grid.horizon",
        "model.type", "model.sigma", "model.lambda", "model.jump_mean", "model.jump_sd", "model.mu",
        "model.kappa", "model.theta", "model.xi", "model.rho", "model.v0", "model.substeps", "model.drift",
        "model.sigma_jmp", "model.theta_vg", "model.kappa_vg", "model.y", "model.scale",
        "estimators.ids", "estimators.power_c", "estimators.power_omega", "estimators.new_tol",
        "estimators.tbv_tol", "estimators.max_iter", "estimators.mc_initial", "estimators.new_initial",
        "output.path", "output.format",
    };
    return keys;
}

}  // namespace

void ExperimentConfig::validate() const {
    validate_model(model);
    if (n_paths < 1) throw std::invalid_argument("experiment: paths must be >= 1");
    std::set<EstimatorId> seen;
    for (EstimatorId id : estimators)
        if (!seen.insert(id).second)
            throw std::invalid_argument("experiment: duplicate estimator '" + std::string(estimator_key(id)) + "'");
    validate_rule(PowerBvRule{params.power_c, params.power_omega});
    if (!(params.new_tol >= 0.0) || !(params.tbv_tol >= 0.0))
        throw std::invalid_argument("experiment: tolerances must be >= 0");
    if (params.max_iter < 1) throw std::invalid_argument("experiment: max_iter must be >= 1");
}

ExperimentConfig experiment_from_tree(const ConfigTree& t) {
    for (const auto& [key, value] : t.values())
        if (!known_keys().count(key)) throw std::invalid_argument("config: unknown key '" + key + "'");

    ExperimentConfig cfg;
    cfg.name = t.get("name").value_or("experiment");
    cfg.grid = SamplingGrid(t.number("grid.horizon"), t.integer("grid.n"));
    if (t.contains("paths")) cfg.n_paths = t.integer("paths");
    if (t.contains("seed")) cfg.base_seed = t.integer("seed");
    cfg.model = model_from_tree(t);

    const std::string scale = t.get("error_scale").value_or("annualized");
    if (scale == "annualized")
        cfg.error_scale = ErrorScale::annualized;
    else if (scale == "integrated")
        cfg.error_scale = ErrorScale::integrated;
    else
        throw std::invalid_argument("config: error_scale must be annualized or integrated");
    cfg.mse_exponent = to_int(t.number_or("mse_exponent", 5.0), "mse_exponent");

    if (auto ids = t.get("estimators.ids")) {
        for (const auto& w : split_words(*ids)) {
            const auto id = parse_estimator(w);
            if (!id) throw std::invalid_argument("config: unknown estimator '" + w + "'");
            cfg.estimators.push_back(*id);
        }
    } else {
        cfg.estimators.assign(kAllEstimators.begin(), kAllEstimators.end());
    }
    cfg.params.power_c = t.number_or("estimators.power_c", cfg.params.power_c);
    cfg.params.power_omega = t.number_or("estimators.power_omega", cfg.params.power_omega);
    cfg.params.new_tol = t.number_or("estimators.new_tol", cfg.params.new_tol);
    cfg.params.tbv_tol = t.number_or("estimators.tbv_tol", cfg.params.tbv_tol);
    cfg.params.max_iter = to_int(t.number_or("estimators.max_iter", cfg.params.max_iter), "estimators.max_iter");
    if (auto s = t.get("estimators.mc_initial")) cfg.params.mc_initial = parse_sigma_source(*s);
    if (auto s = t.get("estimators.new_initial")) cfg.params.new_initial = parse_sigma_source(*s);

    cfg.output_path = t.get("output.path").value_or("");
    const std::string format = t.get("output.format").value_or("csv");
    if (format == "csv")
        cfg.format = OutputFormat::csv;
    else if (format == "markdown")
        cfg.format = OutputFormat::markdown;
    else
        throw std::invalid_argument("config: output.format must be csv or markdown");

    cfg.validate();
    return cfg;
}

ConfigTree experiment_to_tree(const ExperimentConfig& cfg) {
    ConfigTree t;
    t.set("name", cfg.name);
    t.set("paths", std::to_string(cfg.n_paths));
    t.set("seed", std::to_string(cfg.base_seed));
    t.set("error_scale", cfg.error_scale == ErrorScale::annualized ? "annualized" : "integrated");
    t.set("mse_exponent", std::to_string(cfg.mse_exponent));
    t.set("grid.n", std::to_string(cfg.grid.n()));
    t.set("grid.horizon", format_decimal(cfg.grid.horizon()));
    model_to_tree(cfg.model, t);
    std::string ids;
    for (EstimatorId id : cfg.estimators) {
        if (!ids.empty()) ids += ' ';
        ids += estimator_key(id);
    }
    t.set("estimators.ids", ids);
    t.set("estimators.power_c", format_decimal(cfg.params.power_c));
    t.set("estimators.power_omega", format_decimal(cfg.params.power_omega));
    t.set("estimators.new_tol", format_decimal(cfg.params.new_tol));
    t.set("estimators.tbv_tol", format_decimal(cfg.params.tbv_tol));
    t.set("estimators.max_iter", std::to_string(cfg.params.max_iter));
    t.set("estimators.mc_initial", sigma_source_name(cfg.params.mc_initial));
    t.set("estimators.new_initial", sigma_source_name(cfg.params.new_initial));
    if (!cfg.output_path.empty()) t.set("output.path", cfg.output_path);
    t.set("output.format", cfg.format == OutputFormat::csv ? "csv" : "markdown");
    return t;
}

ExperimentConfig load_experiment(const std::string& path) {
    return experiment_from_tree(ConfigTree::parse_file(path));
}

std::string serialize_experiment(const ExperimentConfig& cfg) { return experiment_to_tree(cfg).serialize(); }

std::uint64_t config_hash(const ExperimentConfig& cfg) {
    ConfigTree t = experiment_to_tree(cfg);
    t.erase("output.path");
    t.erase("output.format");
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : t.serialize()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace truncvol
