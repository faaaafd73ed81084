#include "truncvol/models.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "truncvol/numeric.hpp"
#include "truncvol/random.hpp"

namespace truncvol {
namespace {

void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}

struct Validator {
    void operator()(const MertonModel& m) const {
        require(m.sigma > 0.0, "Merton: sigma must be positive");
        m.jumps.validate();
    }
    void operator()(const HestonJumpModel& m) const {
        require(m.kappa > 0.0 && m.theta > 0.0 && m.xi > 0.0 && m.v0 > 0.0,
                "HestonJump: kappa, theta, xi and v0 must be positive");
        require(m.rho >= -1.0 && m.rho <= 1.0, "HestonJump: rho must lie in [-1, 1]");
        require(m.substeps >= 1, "HestonJump: substeps must be >= 1");
        m.jumps.validate();
    }
    void operator()(const GaussVgModel& m) const {
        require(m.sigma > 0.0, "GaussVG: sigma must be positive");
        require(m.sigma_jmp >= 0.0, "GaussVG: sigma_jmp must be >= 0");
        require(m.kappa_vg > 0.0, "GaussVG: kappa_vg must be positive");
    }
    void operator()(const GaussStableModel& m) const {
        require(m.sigma > 0.0, "GaussStable: sigma must be positive");
        require(m.y > 0.0 && m.y < 2.0, "GaussStable: y must lie in (0, 2)");
        require(m.scale > 0.0, "GaussStable: scale must be positive");
    }
};

PathRecord blank_path(std::size_t n, std::uint64_t seed, int dn_fill) {
    PathRecord p;
    p.dx.assign(n, 0.0);
    p.m.assign(n, 0.0);
    p.dn.assign(n, dn_fill);
    p.iv_i.assign(n, 0.0);
    p.seed = seed;
    return p;
}

void finish(PathRecord& p) {
    KahanSum total;
    for (double v : p.iv_i) total += v;
    p.iv_total = total.value();
}

// Adds compound Poisson jumps to p.m / p.dn / p.dx over steps of length h.
void add_merton_jumps(PathRecord& p, const FaJumpLaw& law, double h, Rng& rng) {
    if (law.lambda == 0.0) return;
    std::poisson_distribution<int> arrivals(law.lambda * h);
    std::normal_distribution<double> size(law.mu_jmp, law.sigma_jmp);
    for (std::size_t i = 0; i < p.size(); ++i) {
        const int count = arrivals(rng);
        double jump = 0.0;
        for (int k = 0; k < count; ++k) jump += size(rng);
        p.dn[i] = count;
        p.m[i] = jump;
        p.dx[i] += jump;
    }
}

PathRecord simulate_merton(const MertonModel& model, const SamplingGrid& grid, Rng& rng, std::uint64_t seed) {
    const double h = grid.h();
    PathRecord p = blank_path(grid.n(), seed, 0);
    std::normal_distribution<double> z;
    const double sd = model.sigma * std::sqrt(h);
    for (std::size_t i = 0; i < p.size(); ++i) {
        p.dx[i] = sd * z(rng);
        p.iv_i[i] = model.sigma * model.sigma * h;
    }
    add_merton_jumps(p, model.jumps, h, rng);
    finish(p);
    return p;
}

PathRecord simulate_heston(const HestonJumpModel& model, const SamplingGrid& grid, Rng& rng,
                           std::uint64_t seed) {
    std::size_t cells = 0;
    if (__builtin_mul_overflow(grid.n(), static_cast<std::size_t>(model.substeps), &cells) ||
        cells > (std::size_t{1} << 40))
        throw std::invalid_argument("HestonJump: substeps * n overflows the sub-grid");

    const double h = grid.h();
    const double dt = h / model.substeps;
    const double sqrt_dt = std::sqrt(dt);
    const double rho_perp = std::sqrt(1.0 - model.rho * model.rho);
    PathRecord p = blank_path(grid.n(), seed, 0);
    std::normal_distribution<double> z;

    double v = model.v0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        double dx = 0.0;
        KahanSum iv;
        for (int s = 0; s < model.substeps; ++s) {
            const double z1 = z(rng);
            const double z2 = z(rng);
            const double v_pos = std::max(v, 0.0);
            const double vol = std::sqrt(v_pos);
            dx += model.mu * dt + vol * sqrt_dt * (model.rho * z1 + rho_perp * z2);
            v += model.kappa * (model.theta - v_pos) * dt + model.xi * vol * sqrt_dt * z1;
            iv += 0.5 * (v_pos + std::max(v, 0.0)) * dt;
        }
        p.dx[i] = dx;
        p.iv_i[i] = iv.value();
    }
    add_merton_jumps(p, model.jumps, h, rng);
    finish(p);
    return p;
}

PathRecord simulate_vg(const GaussVgModel& model, const SamplingGrid& grid, Rng& rng, std::uint64_t seed) {
    const double h = grid.h();
    PathRecord p = blank_path(grid.n(), seed, kNoJumpCount);
    std::normal_distribution<double> z;
    std::gamma_distribution<double> clock(h / model.kappa_vg, model.kappa_vg);
    const double sd = model.sigma * std::sqrt(h);
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double diffusive = sd * z(rng);
        const double ds = clock(rng);
        const double jump = model.theta_vg * ds + model.sigma_jmp * std::sqrt(ds) * z(rng);
        p.m[i] = jump;
        p.dx[i] = model.drift * h + diffusive + jump;
        p.iv_i[i] = model.sigma * model.sigma * h;
    }
    finish(p);
    return p;
}

PathRecord simulate_stable(const GaussStableModel& model, const SamplingGrid& grid, Rng& rng,
                           std::uint64_t seed) {
    const double h = grid.h();
    PathRecord p = blank_path(grid.n(), seed, kNoJumpCount);
    std::normal_distribution<double> z;
    const double sd = model.sigma * std::sqrt(h);
    const double jump_scale = std::pow(model.scale * h, 1.0 / model.y);
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double diffusive = sd * z(rng);
        const double jump = jump_scale * sample_symmetric_stable(rng, model.y);
        p.m[i] = jump;
        p.dx[i] = diffusive + jump;
        p.iv_i[i] = model.sigma * model.sigma * h;
    }
    finish(p);
    return p;
}

}  // namespace

void validate_model(const ModelSpec& spec) { std::visit(Validator{}, spec); }

std::string_view model_name(const ModelSpec& spec) {
    struct Name {
        std::string_view operator()(const MertonModel&) const { return "merton"; }
        std::string_view operator()(const HestonJumpModel&) const { return "heston_jump"; }
        std::string_view operator()(const GaussVgModel&) const { return "gauss_vg"; }
        std::string_view operator()(const GaussStableModel&) const { return "gauss_stable"; }
    };
    return std::visit(Name{}, spec);
}

PathRecord simulate(const ModelSpec& spec, const SamplingGrid& grid, std::uint64_t seed) {
    validate_model(spec);
    Rng rng(splitmix64(seed));
    struct Dispatch {
        const SamplingGrid& grid;
        Rng& rng;
        std::uint64_t seed;
        PathRecord operator()(const MertonModel& m) const { return simulate_merton(m, grid, rng, seed); }
        PathRecord operator()(const HestonJumpModel& m) const { return simulate_heston(m, grid, rng, seed); }
        PathRecord operator()(const GaussVgModel& m) const { return simulate_vg(m, grid, rng, seed); }
        PathRecord operator()(const GaussStableModel& m) const { return simulate_stable(m, grid, rng, seed); }
    };
    return std::visit(Dispatch{grid, rng, seed}, spec);
}

namespace {

std::string format_double(double v) {
    char buf[40];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, end);
}

}  // namespace

void write_path_csv(const PathRecord& path, std::ostream& out) {
    out << "i,dx,m,dn,iv_i\n";
    for (std::size_t i = 0; i < path.size(); ++i) {
        out << i << ',' << format_double(path.dx[i]) << ',' << format_double(path.m[i]) << ',' << path.dn[i]
            << ',' << format_double(path.iv_i[i]) << '\n';
    }
    if (!out) throw IoError("write_path_csv: stream write failed");
}

PathRecord read_path_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw IoError("read_path_csv: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "i,dx,m,dn,iv_i") throw IoError("read_path_csv: unexpected header '" + line + "'");

    PathRecord p;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string_view> cells;
        std::string_view rest(line);
        for (std::size_t pos; (pos = rest.find(',')) != std::string_view::npos; rest.remove_prefix(pos + 1))
            cells.push_back(rest.substr(0, pos));
        cells.push_back(rest);
        if (cells.size() != 5) throw IoError("read_path_csv: row " + std::to_string(row) + " needs 5 fields");

        auto parse = [&](std::string_view cell, auto& value) {
            auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
            if (ec != std::errc() || ptr != cell.data() + cell.size())
                throw IoError("read_path_csv: bad field '" + std::string(cell) + "' in row " +
                              std::to_string(row));
        };
        std::size_t index = 0;
        double dx = 0.0, m = 0.0, iv = 0.0;
        int dn = 0;
        parse(cells[0], index);
        parse(cells[1], dx);
        parse(cells[2], m);
        parse(cells[3], dn);
        parse(cells[4], iv);
        if (index != row) throw IoError("read_path_csv: rows out of order at " + std::to_string(row));
        p.dx.push_back(dx);
        p.m.push_back(m);
        p.dn.push_back(dn);
        p.iv_i.push_back(iv);
        ++row;
    }
    if (row == 0) throw IoError("read_path_csv: no rows");
    finish(p);
    return p;
}

}  // namespace truncvol
