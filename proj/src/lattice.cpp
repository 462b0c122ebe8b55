#include "clbm/lattice.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace clbm {

namespace {

void check_direction(int i) {
    if (i < 0 || i >= Q) {
        throw std::out_of_range("direction index " + std::to_string(i) + " outside [0,26]");
    }
}

VelocitySet build_velocity_set() {
    VelocitySet vs;
    for (int i = 0; i < Q; ++i) {
        vs.vectors[i] = {((i % 27) + 2) % 3 - 1, ((i / 3) + 2) % 3 - 1, ((i / 9) + 2) % 3 - 1};
    }
    for (int i = 0; i < Q; ++i) {
        const auto& c = vs.vectors[i];
        int speed = std::abs(c[0]) + std::abs(c[1]) + std::abs(c[2]);
        switch (speed) {
            case 0: vs.weights[i] = Rational(8, 27); break;
            case 1: vs.weights[i] = Rational(2, 27); break;
            case 2: vs.weights[i] = Rational(1, 54); break;
            default: vs.weights[i] = Rational(1, 216); break;
        }
        vs.opposite[i] = i + c[0] + 3 * c[1] + 9 * c[2];
    }
    vs.speed_of_sound_sq = Rational(1, 3);
    return vs;
}

bool mul_overflows(unsigned long long a, unsigned long long b) {
    return a != 0 && b > std::numeric_limits<unsigned long long>::max() / a;
}

}  // namespace

const VelocitySet& d3q27() {
    static const VelocitySet vs = build_velocity_set();
    return vs;
}

Vec3i velocity_component(int i) {
    check_direction(i);
    return d3q27().vectors[i];
}

int opposite(int i) {
    check_direction(i);
    return d3q27().opposite[i];
}

Rational weight_exact(int i) {
    check_direction(i);
    return d3q27().weights[i];
}

double weight(int i) {
    static const auto table = [] {
        std::array<double, Q> w{};
        for (int k = 0; k < Q; ++k) {
            w[k] = boost::rational_cast<double>(d3q27().weights[k]);
        }
        return w;
    }();
    check_direction(i);
    return table[i];
}

int cdot(int i, int j) {
    const auto& a = d3q27().vectors[i];
    const auto& b = d3q27().vectors[j];
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

GridSpec::GridSpec(long long nx_, long long ny_, long long nz_) : nx(nx_), ny(ny_), nz(nz_) {
    if (nx < 1 || ny < 1 || nz < 1) {
        throw std::invalid_argument("grid dimensions must be >= 1");
    }
}

bool GridSpec::contains(const Node& p) const {
    return p.x >= 0 && p.x < nx && p.y >= 0 && p.y < ny && p.z >= 0 && p.z < nz;
}

long long GridSpec::node_index(const Node& p) const {
    if (!contains(p)) {
        throw std::out_of_range("node outside grid");
    }
    return p.x + nx * p.y + nx * ny * p.z;
}

Node GridSpec::node(long long alpha) const {
    if (alpha < 0 || alpha >= n()) {
        throw std::out_of_range("node index outside grid");
    }
    return {alpha % nx, (alpha / nx) % ny, alpha / (nx * ny)};
}

Node GridSpec::shifted(const Node& p, const Vec3i& c, int s) const {
    auto wrap = [](long long v, long long m) { return ((v % m) + m) % m; };
    return {wrap(p.x + s * c[0], nx), wrap(p.y + s * c[1], ny), wrap(p.z + s * c[2], nz)};
}

long long l1_index(const GridSpec& g, const Node& p, int i) {
    check_direction(i);
    return Q * g.node_index(p) + i;
}

std::pair<Node, int> l1_inverse(const GridSpec& g, long long mu) {
    if (mu < 0 || mu >= g.nq()) {
        throw std::out_of_range("flat index outside [0, nQ)");
    }
    return {g.node(mu / Q), static_cast<int>(mu % Q)};
}

unsigned long long l2_index(const GridSpec& g, const SecondOrderMonomial& m) {
    check_direction(m.j);
    check_direction(m.k);
    const unsigned long long n = g.n();
    if (mul_overflows(g.nq(), g.nq())) {
        throw std::overflow_error("(nQ)^2 exceeds 64-bit index range");
    }
    const unsigned long long ab = g.node_index(m.xb);
    const unsigned long long ag = g.node_index(m.xg);
    return Q * Q * (n * ab + ag) + Q * m.j + m.k;
}

SecondOrderMonomial l2_inverse(const GridSpec& g, unsigned long long idx) {
    const unsigned long long nq = g.nq();
    if (mul_overflows(nq, nq) || idx >= nq * nq) {
        throw std::out_of_range("second-order index outside [0, (nQ)^2)");
    }
    const unsigned long long n = g.n();
    SecondOrderMonomial m;
    m.k = static_cast<int>(idx % Q);
    m.j = static_cast<int>((idx / Q) % Q);
    const unsigned long long pos = idx / (Q * Q);
    m.xg = g.node(static_cast<long long>(pos % n));
    m.xb = g.node(static_cast<long long>(pos / n));
    return m;
}

unsigned long long l3_index(const GridSpec& g, const ThirdOrderMonomial& m) {
    check_direction(m.j);
    check_direction(m.k);
    check_direction(m.l);
    const unsigned long long nq = g.nq();
    if (mul_overflows(nq, nq) || mul_overflows(nq * nq, nq)) {
        throw std::overflow_error("(nQ)^3 exceeds 64-bit index range");
    }
    const unsigned long long n = g.n();
    const unsigned long long ab = g.node_index(m.xb);
    const unsigned long long ag = g.node_index(m.xg);
    const unsigned long long ad = g.node_index(m.xd);
    return Q * Q * Q * (n * n * ab + n * ag + ad) + Q * Q * m.j + Q * m.k + m.l;
}

ThirdOrderMonomial l3_inverse(const GridSpec& g, unsigned long long idx) {
    const unsigned long long nq = g.nq();
    if (mul_overflows(nq, nq) || mul_overflows(nq * nq, nq) || idx >= nq * nq * nq) {
        throw std::out_of_range("third-order index outside [0, (nQ)^3)");
    }
    const unsigned long long n = g.n();
    ThirdOrderMonomial m;
    m.l = static_cast<int>(idx % Q);
    m.k = static_cast<int>((idx / Q) % Q);
    m.j = static_cast<int>((idx / (Q * Q)) % Q);
    const unsigned long long pos = idx / (Q * Q * Q);
    m.xd = g.node(static_cast<long long>(pos % n));
    m.xg = g.node(static_cast<long long>((pos / n) % n));
    m.xb = g.node(static_cast<long long>(pos / (n * n)));
    return m;
}

namespace {

// Heaviside with H(0) = 1.
int heaviside(double v) { return v >= 0.0 ? 1 : 0; }

int prism_indicator(const Prism& pr, const Node& p) {
    const double xs[3] = {static_cast<double>(p.x), static_cast<double>(p.y), static_cast<double>(p.z)};
    int r = 1;
    for (int a = 0; a < 3; ++a) {
        r *= heaviside(xs[a] - pr.origin[a]) - heaviside(xs[a] - (pr.origin[a] + pr.extents[a]));
    }
    return r;
}

}  // namespace

NodeKind classify(const GeometryOracle& oracle, const Node& p) {
    struct Visitor {
        const Node& p;
        int operator()(const AllFluid&) const { return 0; }
        int operator()(const Sphere& s) const {
            const double dx = static_cast<double>(p.x) - s.center[0];
            const double dy = static_cast<double>(p.y) - s.center[1];
            const double dz = static_cast<double>(p.z) - s.center[2];
            return heaviside(s.radius * s.radius - dx * dx - dy * dy - dz * dz);
        }
        int operator()(const Prism& pr) const { return prism_indicator(pr, p); }
        int operator()(const PrismUnion& u) const {
            for (const auto& pr : u.prisms) {
                if (prism_indicator(pr, p) != 0) {
                    return 1;
                }
            }
            return 0;
        }
    };
    return std::visit(Visitor{p}, oracle) != 0 ? NodeKind::solid : NodeKind::fluid;
}

std::vector<std::uint8_t> solid_mask(const GridSpec& g, const GeometryOracle& oracle) {
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(g.n()));
    for (long long a = 0; a < g.n(); ++a) {
        mask[a] = classify(oracle, g.node(a)) == NodeKind::solid ? 1 : 0;
    }
    return mask;
}

std::vector<BoundaryLink> boundary_links(const GridSpec& g, const std::vector<std::uint8_t>& mask) {
    if (static_cast<long long>(mask.size()) != g.n()) {
        throw std::invalid_argument("mask size does not match grid");
    }
    std::vector<BoundaryLink> links;
    for (long long a = 0; a < g.n(); ++a) {
        if (mask[a] != 0) {
            continue;
        }
        const Node p = g.node(a);
        for (int i = 0; i < Q; ++i) {
            if (i == rest_direction) {
                continue;
            }
            if (mask[g.node_index(g.shifted(p, d3q27().vectors[i]))] != 0) {
                links.push_back({a, i});
            }
        }
    }
    return links;
}

std::vector<BoundaryLink> boundary_links(const GridSpec& g, const GeometryOracle& oracle) {
    return boundary_links(g, solid_mask(g, oracle));
}

}  // namespace clbm
