#pragma once

#include <optional>
#include <string>
#include <vector>

#include "clbm/lattice.hpp"

namespace clbm {

enum class InstanceKind { sphere, hull };

struct PhysicalInstance {
    std::string id;
    std::string name;
    InstanceKind kind = InstanceKind::sphere;
    double kinematic_viscosity = 1.003e-6;  // m^2/s
    double density = 998.21;                // kg/m^3
    double characteristic_length = 1.0;     // m
    double reynolds = 0.0;
    double velocity = 0.0;  // m/s; Re = u L / nu
    Vec3 domain_lo{};
    Vec3 domain_hi{};
    double velocity_margin = 1.05;
    // Sphere geometry (m); hulls carry bounding data only.
    Vec3 sphere_center{};
    double sphere_radius = 0.0;
    double frontal_area = 0.0;  // m^2
    // Tabulated values for hulls.
    std::optional<double> dx_stored;
    std::optional<double> t_adv_stored;
    std::optional<double> n_f_stored;
};

PhysicalInstance instance_from_reynolds(PhysicalInstance base, double reynolds);
PhysicalInstance instance_from_velocity(PhysicalInstance base, double velocity);

struct DxRule {
    enum class Kind { catalog, reynolds, fixed };
    Kind kind = Kind::catalog;  // stored spacing if present, otherwise L / Re
    double value = 0.0;
};

struct LatticeOptions {
    double tau = 0.6;
    DxRule dx_rule{};
    // Round L / u_max to one significant figure when no tabulated value exists.
    bool round_advective_time = false;
};

struct LatticeInstance {
    std::string id;
    double reynolds = 0.0;
    double tau = 0.6;
    double u = 0.0;
    double u_max = 0.0;
    double dx = 0.0;
    double dt = 0.0;
    double t_adv = 0.0;
    double t_star = 0.0;
    // Grid counts as reals; table-scale instances exceed 64-bit integers.
    double nx = 0.0;
    double ny = 0.0;
    double nz = 0.0;
    double n = 0.0;
    double nq = 0.0;
    double total_dimension = 0.0;  // nQ + (nQ)^2 + (nQ)^3
    double n_f = 0.0;
    double T_exact = 0.0;          // T* / dt
    long long T = 0;               // round(T* / dt)
    double lattice_velocity = 0.0;
    double lattice_mach = 0.0;
    double volume = 0.0;
    std::vector<std::string> warnings;
};

LatticeInstance derive_lattice(const PhysicalInstance& inst, const LatticeOptions& options = {});

const std::vector<PhysicalInstance>& catalog();
const PhysicalInstance& find_instance(const std::string& id);

double round_sig(double x, int digits);

// Exponent p in T ~ n^p when dx ~ 1/Re^alpha under the CFL argument: (1 + alpha) / (3 alpha).
double time_step_scaling(double alpha);
// Exponent under diffusive scaling with dx = L / Re: T ~ n^(1/3).
double diffusive_time_step_scaling();

}  // namespace clbm
