#include "clbm/instances.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace clbm {

namespace {

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw std::invalid_argument(fmt::format("{} must be positive and finite", what));
    }
}

PhysicalInstance sphere(int exponent) {
    PhysicalInstance p;
    p.id = fmt::format("sphere-1e{}", exponent);
    p.name = fmt::format("Flow past a sphere - Re=10^{}", exponent);
    p.kind = InstanceKind::sphere;
    p.characteristic_length = 1.0;
    p.domain_lo = {-5.0, -4.0, -4.0};
    p.domain_hi = {5.0, 4.0, 4.0};
    p.sphere_center = {0.0, 0.0, 0.0};
    p.sphere_radius = 0.5;
    p.frontal_area = M_PI * 0.25;
    return instance_from_reynolds(p, std::pow(10.0, exponent));
}

PhysicalInstance hull(const std::string& id, const std::string& name, double length, double velocity, Vec3 extents,
                      double dx, double t_adv, double n_f, double frontal_area) {
    PhysicalInstance p;
    p.id = id;
    p.name = name;
    p.kind = InstanceKind::hull;
    p.characteristic_length = length;
    p.domain_lo = {0.0, 0.0, 0.0};
    p.domain_hi = extents;
    p.frontal_area = frontal_area;
    p.dx_stored = dx;
    p.t_adv_stored = t_adv;
    p.n_f_stored = n_f;
    return instance_from_velocity(p, velocity);
}

std::vector<PhysicalInstance> build_catalog() {
    std::vector<PhysicalInstance> c;
    for (int e = 1; e <= 8; ++e) {
        c.push_back(sphere(e));
    }
    c.push_back(hull("jbc", "Japan Bulk Carrier (JBC)", 7.0, 1.179, {14.0, 4.0, 1.4125}, 5e-6, 6.0, 6.068e17, 0.46319));
    c.push_back(hull("kcs", "KRISO Container Ship (KCS)", 7.27, 0.915, {14.0, 4.0, 1.34178}, 5e-6, 7.0, 5.806e17,
                     0.34301));
    c.push_back(hull("mv-regal", "MV Regal", 138.0, 7.202, {300.0, 70.0, 15.25}, 5e-7, 18.0, 2.429e24, 120.055));
    return c;
}

}  // namespace

PhysicalInstance instance_from_reynolds(PhysicalInstance base, double reynolds) {
    require_positive(reynolds, "Reynolds number");
    require_positive(base.kinematic_viscosity, "kinematic viscosity");
    require_positive(base.characteristic_length, "characteristic length");
    base.reynolds = reynolds;
    base.velocity = base.kinematic_viscosity * reynolds / base.characteristic_length;
    return base;
}

PhysicalInstance instance_from_velocity(PhysicalInstance base, double velocity) {
    require_positive(velocity, "velocity");
    require_positive(base.kinematic_viscosity, "kinematic viscosity");
    require_positive(base.characteristic_length, "characteristic length");
    base.velocity = velocity;
    base.reynolds = velocity * base.characteristic_length / base.kinematic_viscosity;
    return base;
}

double round_sig(double x, int digits) {
    if (x == 0.0 || !std::isfinite(x)) {
        return x;
    }
    const double mag = std::floor(std::log10(std::abs(x)));
    const double scale = std::pow(10.0, digits - 1 - mag);
    return std::round(x * scale) / scale;
}

LatticeInstance derive_lattice(const PhysicalInstance& inst, const LatticeOptions& options) {
    if (!(options.tau > 0.5 && options.tau <= 1.0)) {
        throw std::invalid_argument(fmt::format("tau = {} outside (0.5, 1]", options.tau));
    }
    require_positive(inst.reynolds, "Reynolds number");
    require_positive(inst.kinematic_viscosity, "kinematic viscosity");
    require_positive(inst.characteristic_length, "characteristic length");
    require_positive(inst.velocity_margin, "velocity margin");

    LatticeInstance li;
    li.id = inst.id;
    li.reynolds = inst.reynolds;
    li.tau = options.tau;
    li.u = inst.kinematic_viscosity * inst.reynolds / inst.characteristic_length;
    li.u_max = inst.velocity_margin * li.u;

    switch (options.dx_rule.kind) {
        case DxRule::Kind::catalog:
            li.dx = inst.dx_stored ? *inst.dx_stored : inst.characteristic_length / inst.reynolds;
            break;
        case DxRule::Kind::reynolds:
            li.dx = inst.characteristic_length / inst.reynolds;
            break;
        case DxRule::Kind::fixed:
            li.dx = options.dx_rule.value;
            break;
    }
    require_positive(li.dx, "grid spacing");

    // nu = c_s^2 (tau - 1/2) dx^2 / dt
    li.dt = cs2 * (options.tau - 0.5) * li.dx * li.dx / inst.kinematic_viscosity;

    if (inst.t_adv_stored) {
        li.t_adv = *inst.t_adv_stored;
    } else {
        li.t_adv = inst.characteristic_length / li.u_max;
        if (options.round_advective_time) {
            li.t_adv = round_sig(li.t_adv, 1);
        }
    }
    li.t_star = 2.0 * li.t_adv;
    li.T_exact = li.t_star / li.dt;
    li.T = std::llround(li.T_exact);

    const double ex = inst.domain_hi[0] - inst.domain_lo[0];
    const double ey = inst.domain_hi[1] - inst.domain_lo[1];
    const double ez = inst.domain_hi[2] - inst.domain_lo[2];
    require_positive(ex, "domain extent x");
    require_positive(ey, "domain extent y");
    require_positive(ez, "domain extent z");
    li.volume = ex * ey * ez;
    li.nx = std::round(ex / li.dx);
    li.ny = std::round(ey / li.dx);
    li.nz = std::round(ez / li.dx);
    li.n = li.nx * li.ny * li.nz;
    li.nq = li.n * Q;
    li.total_dimension = li.nq + li.nq * li.nq + li.nq * li.nq * li.nq;

    if (inst.n_f_stored) {
        li.n_f = *inst.n_f_stored;
    } else if (inst.kind == InstanceKind::sphere) {
        const double r = inst.sphere_radius / li.dx;
        li.n_f = li.n - std::round(4.0 / 3.0 * M_PI * r * r * r);
    } else {
        li.n_f = li.n;
    }

    li.lattice_velocity = li.u_max * li.dt / li.dx;
    li.lattice_mach = li.lattice_velocity / std::sqrt(cs2);
    if (li.lattice_mach > 0.3) {
        li.warnings.push_back(fmt::format("lattice Mach number {:.3f} exceeds 0.3", li.lattice_mach));
    }
    if (li.lattice_velocity > 0.2) {
        li.warnings.push_back(fmt::format("lattice velocity {:.3f} exceeds the 0.1-0.2 guidance", li.lattice_velocity));
    }
    return li;
}

const std::vector<PhysicalInstance>& catalog() {
    static const std::vector<PhysicalInstance> c = build_catalog();
    return c;
}

const PhysicalInstance& find_instance(const std::string& id) {
    for (const auto& p : catalog()) {
        if (p.id == id) {
            return p;
        }
    }
    throw std::invalid_argument("unknown instance id '" + id + "'");
}

double time_step_scaling(double alpha) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
        throw std::invalid_argument("alpha must be positive and finite");
    }
    return (1.0 + alpha) / (3.0 * alpha);
}

double diffusive_time_step_scaling() { return 1.0 / 3.0; }

}  // namespace clbm
