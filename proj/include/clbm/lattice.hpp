#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <variant>
#include <vector>

#include <boost/rational.hpp>

namespace clbm {

constexpr int Q = 27;
constexpr int rest_direction = 26;

using Rational = boost::rational<long long>;
using Vec3i = std::array<int, 3>;
using Vec3 = std::array<double, 3>;

struct VelocitySet {
    std::array<Vec3i, Q> vectors;
    std::array<Rational, Q> weights;
    std::array<int, Q> opposite;
    Rational speed_of_sound_sq;
};

// Components follow c_x = ((i mod 27) + 2) mod 3 - 1, c_y = (floor(i/3) + 2) mod 3 - 1,
// c_z = (floor(i/9) + 2) mod 3 - 1.
Vec3i velocity_component(int i);
int opposite(int i);
const VelocitySet& d3q27();

Rational weight_exact(int i);
double weight(int i);
// c_i . c_j
int cdot(int i, int j);
constexpr double cs2 = 1.0 / 3.0;

struct Node {
    long long x = 0;
    long long y = 0;
    long long z = 0;
    bool operator==(const Node&) const = default;
};

struct GridSpec {
    long long nx = 1;
    long long ny = 1;
    long long nz = 1;
    bool periodic = true;

    GridSpec() = default;
    GridSpec(long long nx_, long long ny_, long long nz_);

    long long n() const { return nx * ny * nz; }
    long long nq() const { return n() * Q; }
    bool contains(const Node& p) const;
    long long node_index(const Node& p) const;
    Node node(long long alpha) const;
    // Periodic image of p + s * c.
    Node shifted(const Node& p, const Vec3i& c, int s = 1) const;
};

long long l1_index(const GridSpec& g, const Node& p, int i);
std::pair<Node, int> l1_inverse(const GridSpec& g, long long mu);

struct SecondOrderMonomial {
    Node xb;
    int j = 0;
    Node xg;
    int k = 0;
};

struct ThirdOrderMonomial {
    Node xb;
    int j = 0;
    Node xg;
    int k = 0;
    Node xd;
    int l = 0;
};

// Q^2 (n a_b + a_g) + Q j + k
unsigned long long l2_index(const GridSpec& g, const SecondOrderMonomial& m);
SecondOrderMonomial l2_inverse(const GridSpec& g, unsigned long long idx);
// Q^3 (n^2 a_b + n a_g + a_d) + Q^2 j + Q k + l
unsigned long long l3_index(const GridSpec& g, const ThirdOrderMonomial& m);
ThirdOrderMonomial l3_inverse(const GridSpec& g, unsigned long long idx);

struct AllFluid {};

struct Sphere {
    Vec3 center{};
    double radius = 0.0;
};

struct Prism {
    Vec3 origin{};
    Vec3 extents{};
};

struct PrismUnion {
    std::vector<Prism> prisms;
};

using GeometryOracle = std::variant<AllFluid, Sphere, Prism, PrismUnion>;

enum class NodeKind : std::uint8_t { fluid = 0, solid = 1 };

NodeKind classify(const GeometryOracle& oracle, const Node& p);
// One byte per node in node_index order, 1 for solid.
std::vector<std::uint8_t> solid_mask(const GridSpec& g, const GeometryOracle& oracle);

struct BoundaryLink {
    long long node = 0;
    int i = 0;
    bool operator==(const BoundaryLink&) const = default;
    auto operator<=>(const BoundaryLink&) const = default;
};

// Pairs (x, i) with x fluid and x + c_i solid, sorted by (node, i).
std::vector<BoundaryLink> boundary_links(const GridSpec& g, const std::vector<std::uint8_t>& mask);
std::vector<BoundaryLink> boundary_links(const GridSpec& g, const GeometryOracle& oracle);

}  // namespace clbm
