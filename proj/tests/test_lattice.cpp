#include <gtest/gtest.h>

#include <random>
#include <set>

#include "clbm/lattice.hpp"

using namespace clbm;

namespace {

// Transcribed table of D3Q27 velocity vectors in index order.
const int kTable[27][3] = {
    {1, 1, 1},   {-1, 1, 1},   {0, 1, 1},   {1, -1, 1},  {-1, -1, 1},  {0, -1, 1},  {1, 0, 1},  {-1, 0, 1},  {0, 0, 1},
    {1, 1, -1},  {-1, 1, -1},  {0, 1, -1},  {1, -1, -1}, {-1, -1, -1}, {0, -1, -1}, {1, 0, -1}, {-1, 0, -1}, {0, 0, -1},
    {1, 1, 0},   {-1, 1, 0},   {0, 1, 0},   {1, -1, 0},  {-1, -1, 0},  {0, -1, 0},  {1, 0, 0},  {-1, 0, 0},  {0, 0, 0},
};

bool brute_inside_sphere(const Node& p, const Vec3& c, double r) {
    const double dx = static_cast<double>(p.x) - c[0];
    const double dy = static_cast<double>(p.y) - c[1];
    const double dz = static_cast<double>(p.z) - c[2];
    return dx * dx + dy * dy + dz * dz <= r * r;
}

}  // namespace

TEST(VelocitySet, MatchesTable) {
    for (int i = 0; i < Q; ++i) {
        const Vec3i c = velocity_component(i);
        EXPECT_EQ(c[0], kTable[i][0]) << i;
        EXPECT_EQ(c[1], kTable[i][1]) << i;
        EXPECT_EQ(c[2], kTable[i][2]) << i;
        EXPECT_EQ(d3q27().vectors[i], c);
    }
    EXPECT_EQ(velocity_component(0), (Vec3i{1, 1, 1}));
    EXPECT_EQ(velocity_component(26), (Vec3i{0, 0, 0}));
}

TEST(VelocitySet, RejectsOutOfRange) {
    EXPECT_THROW(velocity_component(-1), std::out_of_range);
    EXPECT_THROW(velocity_component(27), std::out_of_range);
}

TEST(VelocitySet, OppositeIsInvolutionAndNegates) {
    for (int i = 0; i < Q; ++i) {
        const int o = opposite(i);
        EXPECT_EQ(opposite(o), i);
        const Vec3i a = velocity_component(i);
        const Vec3i b = velocity_component(o);
        EXPECT_EQ(a[0], -b[0]);
        EXPECT_EQ(a[1], -b[1]);
        EXPECT_EQ(a[2], -b[2]);
    }
    EXPECT_EQ(opposite(rest_direction), rest_direction);
}

TEST(VelocitySet, WeightsSumToOneAndArePositive) {
    Rational sum(0);
    for (int i = 0; i < Q; ++i) {
        EXPECT_GT(weight_exact(i), Rational(0));
        sum += weight_exact(i);
        EXPECT_DOUBLE_EQ(weight(i), boost::rational_cast<double>(weight_exact(i)));
    }
    EXPECT_EQ(sum, Rational(1));
    EXPECT_EQ(weight_exact(26), Rational(8, 27));
    EXPECT_EQ(weight_exact(24), Rational(2, 27));
    EXPECT_EQ(weight_exact(18), Rational(1, 54));
    EXPECT_EQ(weight_exact(0), Rational(1, 216));
    EXPECT_EQ(d3q27().speed_of_sound_sq, Rational(1, 3));
}

TEST(VelocitySet, SecondMomentIsotropy) {
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
            Rational s(0);
            for (int i = 0; i < Q; ++i) {
                const Vec3i c = velocity_component(i);
                s += weight_exact(i) * Rational(c[a] * c[b]);
            }
            EXPECT_EQ(s, a == b ? Rational(1, 3) : Rational(0));
        }
    }
}

TEST(VelocitySet, ComponentPeriodicities) {
    for (int i = 0; i + 3 < Q; ++i) {
        EXPECT_EQ(velocity_component(i)[0], velocity_component(i + 3)[0]);
    }
    for (int i = 0; i + 9 < Q; ++i) {
        EXPECT_EQ(velocity_component(i)[1], velocity_component(i + 9)[1]);
    }
}

TEST(IndexMaps, L1Examples) {
    const GridSpec g(4, 4, 4);
    EXPECT_EQ(l1_index(g, Node{1, 0, 0}, 2), 29);
    const auto [node, i] = l1_inverse(g, 0);
    EXPECT_EQ(node, (Node{0, 0, 0}));
    EXPECT_EQ(i, 0);
}

TEST(IndexMaps, L1RoundTripExhaustive) {
    const GridSpec g(3, 4, 5);
    for (long long mu = 0; mu < g.nq(); ++mu) {
        const auto [node, i] = l1_inverse(g, mu);
        ASSERT_EQ(l1_index(g, node, i), mu);
    }
}

TEST(IndexMaps, L1RejectsOutOfGrid) {
    const GridSpec g(2, 2, 2);
    EXPECT_THROW(l1_index(g, Node{2, 0, 0}, 0), std::out_of_range);
    EXPECT_THROW(l1_index(g, Node{0, 0, 0}, 27), std::out_of_range);
    EXPECT_THROW(l1_inverse(g, g.nq()), std::out_of_range);
}

TEST(IndexMaps, L2AndL3Examples) {
    const GridSpec g(3, 2, 2);
    EXPECT_EQ(l2_index(g, SecondOrderMonomial{Node{0, 0, 0}, 1, Node{0, 0, 0}, 2}), 29ULL);
    EXPECT_EQ(l3_index(g, ThirdOrderMonomial{}), 0ULL);
}

TEST(IndexMaps, L2L3RoundTripRandom) {
    const GridSpec g(2, 3, 2);
    const unsigned long long nq = static_cast<unsigned long long>(g.nq());
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<unsigned long long> d2(0, nq * nq - 1);
    std::uniform_int_distribution<unsigned long long> d3(0, nq * nq * nq - 1);
    for (int s = 0; s < 2000; ++s) {
        const auto a = d2(rng);
        ASSERT_EQ(l2_index(g, l2_inverse(g, a)), a);
        const auto b = d3(rng);
        ASSERT_EQ(l3_index(g, l3_inverse(g, b)), b);
    }
    EXPECT_THROW(l2_inverse(g, nq * nq), std::out_of_range);
    EXPECT_THROW(l3_inverse(g, nq * nq * nq), std::out_of_range);
}

TEST(IndexMaps, L2IsBijectionSmallGrid) {
    const GridSpec g(2, 1, 1);
    std::set<unsigned long long> seen;
    for (long long a = 0; a < g.n(); ++a) {
        for (long long b = 0; b < g.n(); ++b) {
            for (int j = 0; j < Q; ++j) {
                for (int k = 0; k < Q; ++k) {
                    seen.insert(l2_index(g, SecondOrderMonomial{g.node(a), j, g.node(b), k}));
                }
            }
        }
    }
    EXPECT_EQ(seen.size(), static_cast<std::size_t>(g.nq() * g.nq()));
    EXPECT_EQ(*seen.rbegin(), static_cast<unsigned long long>(g.nq() * g.nq() - 1));
}

TEST(Geometry, SphereClassification) {
    const Sphere s{{4.0, 4.0, 4.0}, 2.5};
    EXPECT_EQ(classify(s, Node{4, 4, 4}), NodeKind::solid);
    EXPECT_EQ(classify(s, Node{0, 0, 0}), NodeKind::fluid);
    const GridSpec g(9, 9, 9);
    const auto mask = solid_mask(g, s);
    long long solid = 0;
    long long brute = 0;
    for (long long a = 0; a < g.n(); ++a) {
        solid += mask[a];
        brute += brute_inside_sphere(g.node(a), s.center, s.radius) ? 1 : 0;
    }
    EXPECT_EQ(solid, brute);
    EXPECT_GT(solid, 0);
}

TEST(Geometry, SurfaceNodeCountsAsSolid) {
    const Sphere s{{0.0, 0.0, 0.0}, 2.0};
    EXPECT_EQ(classify(s, Node{2, 0, 0}), NodeKind::solid);
    EXPECT_EQ(classify(s, Node{3, 0, 0}), NodeKind::fluid);
}

TEST(Geometry, PrismFaces) {
    const Prism p{{1.0, 1.0, 1.0}, {2.0, 2.0, 2.0}};
    EXPECT_EQ(classify(p, Node{1, 1, 1}), NodeKind::solid);  // lower face
    EXPECT_EQ(classify(p, Node{2, 2, 2}), NodeKind::solid);
    EXPECT_EQ(classify(p, Node{3, 1, 1}), NodeKind::fluid);  // upper face
    EXPECT_EQ(classify(p, Node{0, 1, 1}), NodeKind::fluid);
    const PrismUnion u{{p, Prism{{5.0, 5.0, 5.0}, {1.0, 1.0, 1.0}}}};
    EXPECT_EQ(classify(u, Node{5, 5, 5}), NodeKind::solid);
    EXPECT_EQ(classify(u, Node{4, 4, 4}), NodeKind::fluid);
}

TEST(BoundaryLinks, AllFluidIsEmpty) {
    const GridSpec g(4, 4, 4);
    EXPECT_TRUE(boundary_links(g, AllFluid{}).empty());
}

TEST(BoundaryLinks, SingleSolidNodeHas26Links) {
    const GridSpec g(7, 7, 7);
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(g.n()), 0);
    const long long solid = g.node_index(Node{3, 3, 3});
    mask[solid] = 1;
    const auto links = boundary_links(g, mask);
    // Brute force: fluid x and direction i with x + c_i the solid node.
    std::vector<BoundaryLink> brute;
    for (long long a = 0; a < g.n(); ++a) {
        if (mask[a]) {
            continue;
        }
        for (int i = 0; i < Q; ++i) {
            if (g.node_index(g.shifted(g.node(a), velocity_component(i))) == solid) {
                brute.push_back({a, i});
            }
        }
    }
    EXPECT_EQ(links.size(), 26u);
    EXPECT_EQ(links, brute);
}

TEST(BoundaryLinks, SphereLinksStartAtFluidNextToSolid) {
    const GridSpec g(10, 10, 10);
    const Sphere s{{5.0, 5.0, 5.0}, 2.2};
    const auto mask = solid_mask(g, s);
    const auto links = boundary_links(g, mask);
    ASSERT_FALSE(links.empty());
    for (const auto& l : links) {
        EXPECT_EQ(mask[l.node], 0);
        const long long t = g.node_index(g.shifted(g.node(l.node), velocity_component(l.i)));
        EXPECT_EQ(mask[t], 1);
    }
}

TEST(BoundaryLinks, TranslationSymmetryOnPeriodicGrid) {
    const GridSpec g(8, 8, 8);
    const auto a = boundary_links(g, Sphere{{3.0, 3.0, 3.0}, 1.5});
    const auto b = boundary_links(g, Sphere{{5.0, 4.0, 6.0}, 1.5});
    EXPECT_EQ(a.size(), b.size());
    std::multiset<int> da;
    std::multiset<int> db;
    for (const auto& l : a) {
        da.insert(l.i);
    }
    for (const auto& l : b) {
        db.insert(l.i);
    }
    EXPECT_EQ(da, db);
}

TEST(GridSpec, PeriodicShiftWraps) {
    const GridSpec g(3, 3, 3);
    EXPECT_EQ(g.shifted(Node{2, 0, 0}, Vec3i{1, 0, 0}), (Node{0, 0, 0}));
    EXPECT_EQ(g.shifted(Node{0, 0, 0}, Vec3i{-1, -1, -1}), (Node{2, 2, 2}));
    EXPECT_THROW(GridSpec(0, 1, 1), std::invalid_argument);
}
