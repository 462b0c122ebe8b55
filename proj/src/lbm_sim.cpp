#include "clbm/lbm_sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace clbm {

namespace {

void check_mask(const PopulationField& field, const std::vector<std::uint8_t>& mask) {
    if (static_cast<long long>(mask.size()) != field.grid.n()) {
        throw std::invalid_argument("mask size does not match grid");
    }
}

double cdot_u(int i, const Vec3& u) {
    const auto& c = d3q27().vectors[i];
    return c[0] * u[0] + c[1] * u[1] + c[2] * u[2];
}

}  // namespace

Populations equilibrium(double rho, const Vec3& u) {
    const double uu = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
    Populations feq{};
    for (int i = 0; i < Q; ++i) {
        const double cu = cdot_u(i, u);
        feq[i] = weight(i) * rho * (1.0 + 3.0 * cu + 4.5 * cu * cu - 1.5 * uu);
    }
    return feq;
}

Populations approx_equilibrium(const Populations& f) {
    double rho = 0.0;
    Vec3 m{};
    for (int i = 0; i < Q; ++i) {
        const auto& c = d3q27().vectors[i];
        rho += f[i];
        for (int a = 0; a < 3; ++a) {
            m[a] += f[i] * c[a];
        }
    }
    const double mm = m[0] * m[0] + m[1] * m[1] + m[2] * m[2];
    Populations out{};
    for (int i = 0; i < Q; ++i) {
        const double cm = cdot_u(i, m);
        out[i] = weight(i) * (rho + 3.0 * cm + (2.0 - rho) * (4.5 * cm * cm - 1.5 * mm));
    }
    return out;
}

void validate_config(const SimConfig& config) {
    if (!(config.tau > 0.5 && config.tau <= 1.0)) {
        throw std::invalid_argument(fmt::format("tau = {} outside (0.5, 1]", config.tau));
    }
    if (!(config.epsilon_rho >= 0.0)) {
        throw std::invalid_argument("epsilon_rho must be nonnegative");
    }
    for (double v : config.initial_velocity) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("initial velocity must be finite");
        }
    }
}

PopulationField initialize(const GridSpec& g, const std::vector<std::uint8_t>& mask, const SimConfig& config) {
    validate_config(config);
    PopulationField field(g);
    check_mask(field, mask);
    const Populations feq = equilibrium(1.0, config.initial_velocity);
    for (long long a = 0; a < g.n(); ++a) {
        if (mask[a] != 0) {
            continue;
        }
        for (int i = 0; i < Q; ++i) {
            field.at(a, i) = feq[i];
        }
    }
    return field;
}

PopulationField collide(const PopulationField& field, const std::vector<std::uint8_t>& mask, const SimConfig& config) {
    check_mask(field, mask);
    PopulationField out = field;
    const double omega = 1.0 / config.tau;
    for (long long a = 0; a < field.grid.n(); ++a) {
        if (mask[a] != 0) {
            continue;
        }
        double rho = 0.0;
        Vec3 m{};
        for (int i = 0; i < Q; ++i) {
            const double fi = field.at(a, i);
            const auto& c = d3q27().vectors[i];
            rho += fi;
            m[0] += fi * c[0];
            m[1] += fi * c[1];
            m[2] += fi * c[2];
        }
        Vec3 u{};
        if (rho != 0.0) {
            u = {m[0] / rho, m[1] / rho, m[2] / rho};
        }
        const Populations feq = equilibrium(rho, u);
        for (int i = 0; i < Q; ++i) {
            const double fi = field.at(a, i);
            out.at(a, i) = fi - omega * (fi - feq[i]);
        }
    }
    return out;
}

PopulationField stream(const PopulationField& field, const std::vector<std::uint8_t>& mask) {
    check_mask(field, mask);
    const GridSpec& g = field.grid;
    PopulationField out(g);
    out.time_step = field.time_step;
    for (long long a = 0; a < g.n(); ++a) {
        if (mask[a] != 0) {
            continue;
        }
        const Node p = g.node(a);
        for (int i = 0; i < Q; ++i) {
            const long long b = g.node_index(g.shifted(p, d3q27().vectors[i]));
            if (mask[b] == 0) {
                out.at(b, i) = field.at(a, i);
            } else {
                out.at(a, d3q27().opposite[i]) = field.at(a, i);
            }
        }
    }
    return out;
}

PopulationField step(const PopulationField& field, const std::vector<std::uint8_t>& mask, const SimConfig& config) {
    PopulationField out = stream(collide(field, mask, config), mask);
    out.time_step = field.time_step + 1;
    return out;
}

MacroFields macro_fields(const PopulationField& field) {
    const long long n = field.grid.n();
    MacroFields mf;
    mf.density.assign(static_cast<std::size_t>(n), 0.0);
    mf.velocity.assign(static_cast<std::size_t>(n), Vec3{});
    for (long long a = 0; a < n; ++a) {
        double rho = 0.0;
        Vec3 m{};
        for (int i = 0; i < Q; ++i) {
            const double fi = field.at(a, i);
            const auto& c = d3q27().vectors[i];
            rho += fi;
            for (int k = 0; k < 3; ++k) {
                m[k] += fi * c[k];
            }
        }
        mf.density[a] = rho;
        if (rho == 0.0) {
            mf.empty_nodes.push_back(a);
        } else {
            mf.velocity[a] = {m[0] / rho, m[1] / rho, m[2] / rho};
        }
    }
    return mf;
}

Vec3 total_momentum(const PopulationField& field) {
    Vec3 p{};
    for (long long a = 0; a < field.grid.n(); ++a) {
        for (int i = 0; i < Q; ++i) {
            const auto& c = d3q27().vectors[i];
            for (int k = 0; k < 3; ++k) {
                p[k] += field.at(a, i) * c[k];
            }
        }
    }
    return p;
}

double total_mass(const PopulationField& field) {
    double s = 0.0;
    for (double v : field.values) {
        s += v;
    }
    return s;
}

DragResult drag_force(const PopulationField& field, const std::vector<std::uint8_t>& mask, double dx, double dt) {
    check_mask(field, mask);
    const auto links = boundary_links(field.grid, mask);
    DragResult r;
    if (links.empty()) {
        r.empty_link_set = true;
        return r;
    }
    double sum = 0.0;
    for (const auto& l : links) {
        const int ib = d3q27().opposite[l.i];
        sum += (field.at(l.node, l.i) + field.at(l.node, ib)) * d3q27().vectors[l.i][0];
    }
    r.force = dx * dx * dx / dt * sum;
    return r;
}

Vec3 exchange_impulse(const PopulationField& pre_stream, const std::vector<std::uint8_t>& mask) {
    check_mask(pre_stream, mask);
    Vec3 j{};
    for (const auto& l : boundary_links(pre_stream.grid, mask)) {
        const auto& c = d3q27().vectors[l.i];
        const double fi = pre_stream.at(l.node, l.i);
        for (int k = 0; k < 3; ++k) {
            j[k] += 2.0 * fi * c[k];
        }
    }
    return j;
}

namespace {

double max_density_deviation(const PopulationField& field, const std::vector<std::uint8_t>& mask) {
    double dev = 0.0;
    for (long long a = 0; a < field.grid.n(); ++a) {
        if (mask[a] != 0) {
            continue;
        }
        double rho = 0.0;
        for (int i = 0; i < Q; ++i) {
            rho += field.at(a, i);
        }
        dev = std::max(dev, std::abs(1.0 - rho));
    }
    return dev;
}

}  // namespace

RunResult run(const SimConfig& config, const GridSpec& g, const GeometryOracle& oracle, const RunOptions& options) {
    if (options.steps < 0) {
        throw std::invalid_argument("step count must be nonnegative");
    }
    if (!(options.dx > 0.0) || !(options.dt > 0.0) || !(options.density > 0.0)) {
        throw std::invalid_argument("dx, dt and density must be positive");
    }
    const auto mask = solid_mask(g, oracle);
    PopulationField field = initialize(g, mask, config);
    // Lattice momentum per step to newtons.
    const double force_scale = options.density * std::pow(options.dx, 4) / (options.dt * options.dt);
    auto wants_snapshot = [&](long long s) {
        return std::find(options.snapshot_steps.begin(), options.snapshot_steps.end(), s) != options.snapshot_steps.end();
    };

    RunResult result{{}, {}, field, {}};
    auto record = [&](long long s, double drag_lattice) {
        const double dev = max_density_deviation(field, mask);
        result.series.push_back({s, force_scale * drag_lattice, total_mass(field), dev});
        if (dev > 10.0 * config.epsilon_rho) {
            result.incompressibility_warnings.push_back(s);
        }
        if (wants_snapshot(s)) {
            result.snapshots.push_back(field);
        }
    };

    record(0, drag_force(field, mask, 1.0, 1.0).force);
    for (long long s = 1; s <= options.steps; ++s) {
        const PopulationField post = collide(field, mask, config);
        const double impulse = exchange_impulse(post, mask)[0];
        field = stream(post, mask);
        field.time_step = s;
        for (long long a = 0; a < g.n(); ++a) {
            if (mask[a] != 0) {
                for (int i = 0; i < Q; ++i) {
                    if (field.at(a, i) != 0.0) {
                        throw std::logic_error("nonzero population at a solid node after streaming");
                    }
                }
            }
        }
        record(s, impulse);
    }
    result.final_field = field;
    return result;
}

std::string snapshot_csv(const PopulationField& field) {
    std::string out = "x,y,z,i,f\n";
    for (long long a = 0; a < field.grid.n(); ++a) {
        const Node p = field.grid.node(a);
        for (int i = 0; i < Q; ++i) {
            out += fmt::format("{},{},{},{},{:.17g}\n", p.x, p.y, p.z, i, field.at(a, i));
        }
    }
    return out;
}

}  // namespace clbm
