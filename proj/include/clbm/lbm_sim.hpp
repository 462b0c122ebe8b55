#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "clbm/lattice.hpp"

namespace clbm {

using Populations = std::array<double, Q>;

struct PopulationField {
    GridSpec grid;
    std::vector<double> values;  // l1_index layout
    long long time_step = 0;

    explicit PopulationField(const GridSpec& g) : grid(g), values(static_cast<std::size_t>(g.nq()), 0.0) {}
    double& at(long long node, int i) { return values[static_cast<std::size_t>(node * Q + i)]; }
    double at(long long node, int i) const { return values[static_cast<std::size_t>(node * Q + i)]; }
};

struct SimConfig {
    double tau = 0.6;
    Vec3 initial_velocity{};
    double epsilon_rho = 1e-3;
};

struct MacroFields {
    std::vector<double> density;
    std::vector<Vec3> velocity;
    // Nodes with zero density; velocity reported as zero there.
    std::vector<long long> empty_nodes;
};

// w_i rho (1 + 3 u.c_i + 9/2 (u.c_i)^2 - 3/2 u.u)
Populations equilibrium(double rho, const Vec3& u);
// Cubic polynomial form with 1/rho replaced by (2 - rho).
Populations approx_equilibrium(const Populations& f);

void validate_config(const SimConfig& config);
PopulationField initialize(const GridSpec& g, const std::vector<std::uint8_t>& mask, const SimConfig& config);

PopulationField collide(const PopulationField& field, const std::vector<std::uint8_t>& mask, const SimConfig& config);
PopulationField stream(const PopulationField& field, const std::vector<std::uint8_t>& mask);
PopulationField step(const PopulationField& field, const std::vector<std::uint8_t>& mask, const SimConfig& config);

MacroFields macro_fields(const PopulationField& field);
Vec3 total_momentum(const PopulationField& field);
double total_mass(const PopulationField& field);

struct DragResult {
    double force = 0.0;
    bool empty_link_set = false;
};

// F = (dx^3 / dt) sum over boundary links of (f_i(x) + f_opp(i)(x)) c_ix
DragResult drag_force(const PopulationField& field, const std::vector<std::uint8_t>& mask, double dx, double dt);

// Momentum handed to the solid while streaming `pre_stream`: sum over links of 2 f_i(x) c_i.
// Equals the drop in total fluid momentum across the streaming step.
Vec3 exchange_impulse(const PopulationField& pre_stream, const std::vector<std::uint8_t>& mask);

struct DragSample {
    long long step = 0;
    double drag_N = 0.0;
    double total_mass = 0.0;
    double max_density_deviation = 0.0;
};

struct RunOptions {
    long long steps = 0;
    double dx = 1.0;
    double dt = 1.0;
    double density = 1.0;  // physical density used for the force unit conversion
    std::vector<long long> snapshot_steps;
};

struct RunResult {
    std::vector<DragSample> series;
    std::vector<PopulationField> snapshots;
    PopulationField final_field;
    // Steps where max |1 - rho| exceeded 10 * epsilon_rho.
    std::vector<long long> incompressibility_warnings;
};

RunResult run(const SimConfig& config, const GridSpec& g, const GeometryOracle& oracle, const RunOptions& options);

std::string snapshot_csv(const PopulationField& field);

}  // namespace clbm
