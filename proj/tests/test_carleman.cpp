#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "clbm/carleman.hpp"
#include "clbm/lbm_sim.hpp"

using namespace clbm;

namespace {

// Independent scalar evaluation of the F1 block: (-delta_ij + w_i + 3 w_i c_i.c_j) / tau.
Rational f1_oracle(int i, int j, const Rational& tau) {
    const Vec3i a = velocity_component(i);
    const Vec3i b = velocity_component(j);
    const int dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    return (Rational(i == j ? -1 : 0) + weight_exact(i) + Rational(3) * weight_exact(i) * Rational(dot)) / tau;
}

std::vector<double> random_populations(long long nq, std::mt19937_64& rng, double lo = 0.0, double hi = 0.1) {
    std::uniform_real_distribution<double> d(lo, hi);
    std::vector<double> f(static_cast<std::size_t>(nq));
    for (auto& v : f) {
        v = d(rng);
    }
    return f;
}

std::vector<double> kron(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out;
    out.reserve(a.size() * b.size());
    for (double x : a) {
        for (double y : b) {
            out.push_back(x * y);
        }
    }
    return out;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
    EXPECT_EQ(a.size(), b.size());
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        m = std::max(m, std::abs(a[k] - b[k]));
    }
    return m;
}

}  // namespace

TEST(Entries, F1RestDiagonal) {
    const GridSpec g(1, 1, 1);
    EXPECT_NEAR(f1_entry(g, 26, 26, 0.6), (-1.0 + 8.0 / 27.0) / 0.6, 1e-14);
    EXPECT_NEAR(f1_entry(g, 26, 26, 0.6), -1.17284, 1e-5);
}

TEST(Entries, F1MatchesScalarOracle) {
    const Rational tau(3, 5);
    for (int i = 0; i < Q; ++i) {
        for (int j = 0; j < Q; ++j) {
            EXPECT_EQ(f1_local<Rational>(i, j, Rational(1) / tau), f1_oracle(i, j, tau));
        }
    }
}

TEST(Entries, DifferentNodesGiveZero) {
    const GridSpec g(2, 1, 1);
    EXPECT_EQ(f1_entry(g, 0, Q + 0, 0.6), 0.0);
    EXPECT_EQ(f2_entry(g, 0, 0, Q, 0.6, Variant::dense), 0.0);
    EXPECT_EQ(f3_entry(g, 0, Q, 0, 0, 0.6, Variant::dense), 0.0);
}

TEST(Entries, StreamingEntryCases) {
    const GridSpec g(4, 4, 4);
    const std::vector<std::uint8_t> mask(static_cast<std::size_t>(g.n()), 0);
    const long long mu = l1_index(g, Node{1, 1, 1}, 24);
    EXPECT_EQ(s_entry(g, mask, mu, mu), -1.0);
    const long long rest = l1_index(g, Node{1, 1, 1}, 26);
    for (long long c = 0; c < g.nq(); ++c) {
        EXPECT_EQ(s_entry(g, mask, rest, c), 0.0);
        EXPECT_EQ(s_entry(g, mask, c, rest), 0.0);
    }
    const long long up = l1_index(g, Node{0, 1, 1}, 24);
    EXPECT_EQ(s_entry(g, mask, mu, up), 1.0);
}

TEST(Census, ExactCounts) {
    const Rational tau(3, 5);
    const BlockCensus c1 = census_f1(tau);
    EXPECT_EQ(c1.nonzeros, 729);
    // Distinct values from the scalar oracle.
    std::set<Rational> uniq;
    for (int i = 0; i < Q; ++i) {
        for (int j = 0; j < Q; ++j) {
            uniq.insert(f1_oracle(i, j, tau));
        }
    }
    EXPECT_EQ(c1.unique_values, static_cast<long long>(uniq.size()));
    const BlockCensus c2 = census_f2(tau, Variant::dense);
    EXPECT_EQ(c2.nonzeros, 15180);
    EXPECT_EQ(c2.unique_values, 42);
    EXPECT_EQ(census_f3(tau, Variant::dense).nonzeros, 409860);
    EXPECT_NE(census_f2(tau, Variant::sparse).nonzeros, c2.nonzeros);
}

TEST(Assembly, SingleNodeShapes) {
    const GridSpec g(1, 1, 1);
    const std::vector<std::uint8_t> mask(1, 0);
    const FirstOrderBlocks b = assemble_first_order(g, mask, 0.6, Variant::dense);
    EXPECT_EQ(b.F2.n_rows, 27);
    EXPECT_EQ(b.F2.n_cols, 729);
    EXPECT_EQ(b.F3.n_rows, 27);
    EXPECT_EQ(b.F3.n_cols, 19683);
    EXPECT_EQ(b.S.nnz(), 0u);
    EXPECT_EQ(b.F1.nnz(), 729u);
    EXPECT_EQ(b.F2.nnz(), 15180u);
    EXPECT_EQ(b.F3.nnz(), 409860u);
}

TEST(Assembly, RepeatedBlocksOnTwoNodes) {
    const GridSpec g(2, 1, 1);
    const std::vector<std::uint8_t> mask(2, 0);
    const FirstOrderBlocks b = assemble_first_order(g, mask, 0.6, Variant::dense);
    std::vector<double> dense(static_cast<std::size_t>(g.nq() * g.nq()), 0.0);
    for (std::size_t k = 0; k < b.F1.nnz(); ++k) {
        dense[b.F1.rows[k] * g.nq() + b.F1.cols[k]] = b.F1.values[k];
    }
    for (int i = 0; i < Q; ++i) {
        for (int j = 0; j < Q; ++j) {
            EXPECT_EQ(dense[i * g.nq() + j], dense[(Q + i) * g.nq() + Q + j]);
            EXPECT_EQ(dense[i * g.nq() + Q + j], 0.0);
        }
    }
}

TEST(Assembly, EntryFunctionsAgreeWithTriples) {
    const GridSpec g(2, 1, 1);
    const std::vector<std::uint8_t> mask{0, 1};
    for (Variant v : {Variant::dense, Variant::sparse}) {
        const FirstOrderBlocks b = assemble_first_order(g, mask, 0.7, v);
        const long long nq = g.nq();
        for (std::size_t k = 0; k < b.S.nnz(); ++k) {
            ASSERT_EQ(s_entry(g, mask, b.S.rows[k], b.S.cols[k]), b.S.values[k]);
        }
        for (std::size_t k = 0; k < b.F2.nnz(); ++k) {
            const long long c = b.F2.cols[k];
            ASSERT_DOUBLE_EQ(f2_entry(g, b.F2.rows[k], c / nq, c % nq, 0.7, v), b.F2.values[k]);
        }
        for (std::size_t k = 0; k < b.F3.nnz(); k += 97) {
            const long long c = b.F3.cols[k];
            ASSERT_DOUBLE_EQ(f3_entry(g, b.F3.rows[k], c / (nq * nq), (c / nq) % nq, c % nq, 0.7, v), b.F3.values[k]);
        }
        // Random absent coordinates.
        std::set<std::pair<long long, long long>> present;
        for (std::size_t k = 0; k < b.F2.nnz(); ++k) {
            present.insert({b.F2.rows[k], b.F2.cols[k]});
        }
        std::mt19937_64 rng(5);
        std::uniform_int_distribution<long long> dr(0, nq - 1);
        std::uniform_int_distribution<long long> dc(0, nq * nq - 1);
        int checked = 0;
        while (checked < 20000) {
            const long long r = dr(rng);
            const long long c = dc(rng);
            if (present.count({r, c}) == 0) {
                ASSERT_EQ(f2_entry(g, r, c / nq, c % nq, 0.7, v), 0.0);
                ++checked;
            }
        }
    }
}

TEST(Assembly, CapRefusal) {
    const GridSpec g(5, 5, 5);
    const std::vector<std::uint8_t> mask(static_cast<std::size_t>(g.n()), 0);
    EXPECT_THROW(assemble_first_order(g, mask, 0.6, Variant::dense), CapacityError);
}

TEST(Streaming, RowsHaveOneMinusAndOnePlus) {
    const GridSpec g(4, 3, 3);
    const auto mask = solid_mask(g, Sphere{{1.0, 1.0, 1.0}, 0.9});
    const FirstOrderBlocks b = assemble_first_order(g, mask, 0.6, Variant::dense);
    std::vector<int> minus(static_cast<std::size_t>(g.nq()), 0);
    std::vector<int> plus(static_cast<std::size_t>(g.nq()), 0);
    for (std::size_t k = 0; k < b.S.nnz(); ++k) {
        if (b.S.values[k] == -1.0) {
            ++minus[b.S.rows[k]];
        } else if (b.S.values[k] == 1.0) {
            ++plus[b.S.rows[k]];
        } else {
            FAIL() << "unexpected S value " << b.S.values[k];
        }
    }
    for (long long r = 0; r < g.nq(); ++r) {
        EXPECT_EQ(minus[r], plus[r]);
        EXPECT_LE(minus[r], 1);
    }
}

TEST(Streaming, SPlusIdentityMatchesSimulator) {
    const GridSpec g(4, 4, 4);
    const auto mask = solid_mask(g, Prism{{1.0, 1.0, 1.0}, {2.0, 1.0, 1.0}});
    const CarlemanOperator op(g, mask, 0.6);
    for (long long mu = 0; mu < g.nq(); mu += 7) {
        if (mask[mu / Q]) {
            continue;
        }
        PopulationField f(g);
        f.values[mu] = 1.0;
        const PopulationField s = stream(f, mask);
        std::vector<double> y(static_cast<std::size_t>(g.nq()));
        op.apply_streaming(f.values.data(), y.data());
        for (long long k = 0; k < g.nq(); ++k) {
            ASSERT_EQ(y[k] + f.values[k], s.values[k]);
        }
    }
}

TEST(Operator, Sector1EqualsNonlinearRhs) {
    const GridSpec g(1, 1, 1);
    const CarlemanOperator op(g, {0}, 0.6);
    std::mt19937_64 rng(9);
    for (int s = 0; s < 20; ++s) {
        const auto f = random_populations(g.nq(), rng);
        const PhiVector out = op.apply(op.phi_from(f));
        EXPECT_LT(max_diff(out.s1, op.nonlinear_rhs(f)), 1e-14);
    }
}

TEST(Operator, HigherSectorsFollowProductRule) {
    const GridSpec g(1, 1, 1);
    const CarlemanOperator op(g, {0}, 0.6);
    std::mt19937_64 rng(13);
    const auto f = random_populations(g.nq(), rng);
    const PhiVector out = op.apply(op.phi_from(f));
    std::vector<double> lf(Q);
    op.apply_first(f.data(), lf.data());
    const auto ff = kron(f, f);
    std::vector<double> q(Q);
    op.apply_f2(ff.data(), q.data());
    std::vector<double> df2(Q);
    for (int i = 0; i < Q; ++i) {
        df2[i] = lf[i] + q[i];
    }
    auto s2 = kron(df2, f);
    const auto s2b = kron(f, df2);
    for (std::size_t k = 0; k < s2.size(); ++k) {
        s2[k] += s2b[k];
    }
    EXPECT_LT(max_diff(out.s2, s2), 1e-14);
    auto s3 = kron(kron(lf, f), f);
    const auto t2 = kron(kron(f, lf), f);
    const auto t3 = kron(kron(f, f), lf);
    for (std::size_t k = 0; k < s3.size(); ++k) {
        s3[k] += t2[k] + t3[k];
    }
    EXPECT_LT(max_diff(out.s3, s3), 1e-14);
}

TEST(Operator, LazySectorOnGrid) {
    const GridSpec g(3, 2, 1);
    const auto mask = solid_mask(g, Prism{{2.0, 0.0, 0.0}, {1.0, 1.0, 1.0}});
    const CarlemanOperator op(g, mask, 0.8);
    std::mt19937_64 rng(21);
    auto f = random_populations(g.nq(), rng);
    for (long long a = 0; a < g.n(); ++a) {
        if (mask[a]) {
            for (int i = 0; i < Q; ++i) {
                f[a * Q + i] = 0.0;
            }
        }
    }
    EXPECT_LT(max_diff(op.sector1_lazy(f), op.nonlinear_rhs(f)), 1e-14);
    EXPECT_THROW(op.phi_from(f), CapacityError);
}

TEST(Operator, UniformRestIsFixedPoint) {
    const GridSpec g(3, 3, 3);
    const std::vector<std::uint8_t> mask(static_cast<std::size_t>(g.n()), 0);
    const CarlemanOperator op(g, mask, 0.6);
    const PopulationField f = initialize(g, mask, SimConfig{});
    for (double v : op.nonlinear_rhs(f.values)) {
        EXPECT_NEAR(v, 0.0, 1e-15);
    }
}

TEST(Operator, KroneckerLiftDoublesInfNorm) {
    const GridSpec g(1, 1, 1);
    const CarlemanOperator op(g, {0}, 0.6);
    // Build (S + F1)^[2] column by column from the operator.
    const int n2 = Q * Q;
    std::vector<double> rows(n2, 0.0);
    PhiVector phi{std::vector<double>(Q, 0.0), std::vector<double>(n2, 0.0), std::vector<double>(n2 * Q, 0.0)};
    for (int c = 0; c < n2; ++c) {
        phi.s2.assign(n2, 0.0);
        phi.s2[c] = 1.0;
        const PhiVector out = op.apply(phi);
        for (int r = 0; r < n2; ++r) {
            rows[r] += std::abs(out.s2[r]);
        }
    }
    const double lifted = *std::max_element(rows.begin(), rows.end());
    double base = 0.0;
    for (int i = 0; i < Q; ++i) {
        double s = 0.0;
        for (int j = 0; j < Q; ++j) {
            s += std::abs(f1_local<double>(i, j, 1.0 / 0.6));
        }
        base = std::max(base, s);
    }
    EXPECT_NEAR(lifted, 2.0 * base, 1e-12);
}

TEST(Operator, SplitEulerStepEqualsLbmStep) {
    const GridSpec g(3, 3, 2);
    const auto mask = solid_mask(g, Sphere{{1.0, 1.0, 0.0}, 0.5});
    const double tau = 0.7;
    const CarlemanOperator op(g, mask, tau);
    SimConfig c;
    c.tau = tau;
    std::mt19937_64 rng(17);
    PopulationField f(g);
    for (long long a = 0; a < g.n(); ++a) {
        if (mask[a]) {
            continue;
        }
        const auto loc = random_populations(Q, rng, 0.01, 0.1);
        double rho = 0.0;
        for (double v : loc) {
            rho += v;
        }
        for (int i = 0; i < Q; ++i) {
            f.at(a, i) = loc[i] / rho;  // unit density makes the cubic equilibrium exact
        }
    }
    // Collision: f + F1 f + F2 f(x)f + F3 f(x)f(x)f, then streaming: (S + I).
    std::vector<double> s_only(static_cast<std::size_t>(g.nq()));
    op.apply_streaming(f.values.data(), s_only.data());
    const auto rhs = op.nonlinear_rhs(f.values);
    std::vector<double> post(f.values.size());
    for (std::size_t k = 0; k < post.size(); ++k) {
        post[k] = f.values[k] + rhs[k] - s_only[k];
    }
    std::vector<double> streamed(post.size());
    op.apply_streaming(post.data(), streamed.data());
    const PopulationField ref = step(f, mask, c);
    // Normalized density is 1 only to a few ulp, and the cubic terms scale that by O(10).
    for (std::size_t k = 0; k < post.size(); ++k) {
        ASSERT_NEAR(post[k] + streamed[k], ref.values[k], 1e-14);
    }
}

TEST(Norms, ValuesAtTau06) {
    const NormReport r = norm_report(0.6);
    EXPECT_NEAR(r.f1_inf, 14.012, 1e-3);
    EXPECT_NEAR(r.f2_inf, 942.222, 1e-3);
    EXPECT_NEAR(r.f3_inf, 12720.0, 1e-3);
    EXPECT_NEAR(r.coefficients[0], 8.407, 1e-3);
    EXPECT_NEAR(r.coefficients[1], 3.481, 1e-3);
    EXPECT_NEAR(r.coefficients[2], 565.333, 1e-3);
    EXPECT_NEAR(r.coefficients[3], 7.333, 1e-3);
    EXPECT_NEAR(r.coefficients[4], 7632.0, 1e-3);
    EXPECT_NEAR(r.coefficients[5], 3.667, 1e-3);
    EXPECT_NEAR(r.bound_one, 6.0 + 32.0 / 0.6, 1e-9);
    EXPECT_NEAR(r.bound_inf, 2.0 + 8208.0 / 0.6, 1e-9);
    EXPECT_NEAR(r.spectral_bound, std::sqrt(12.0 + 49312.0 / 0.6 + 262656.0 / 0.36), 1e-9);
    EXPECT_EQ(std::llround(r.spectral_bound), 901);
}

TEST(Norms, EndpointsOfTauRange) {
    EXPECT_EQ(std::llround(norm_report(1.0).spectral_bound), 559);
    EXPECT_NEAR(norm_report(0.5 + 1e-12).spectral_bound, 1072.0, 1.0);
    EXPECT_THROW(norm_report(0.4), std::invalid_argument);
    EXPECT_THROW(validate_tau(0.5), std::invalid_argument);
}

TEST(Convergence, WindowAtTau06) {
    const ConvergenceWindow w = convergence_window(0.2958, 0.6);
    EXPECT_NEAR(w.t_c_lower, 1.106e-4, 5e-8);
    EXPECT_NEAR(w.t_c_upper, 1.237e-4, 5e-8);
    EXPECT_GE(w.t_c, w.t_c_lower);
    EXPECT_LE(w.t_c, w.t_c_upper);
    const NormReport r = norm_report(0.6);
    EXPECT_DOUBLE_EQ(w.f2_tilde, 2.0 * (r.f2_inf + r.f3_inf));
}

TEST(Convergence, UpperGrowsAsPhiShrinks) {
    double prev = 0.0;
    for (double phi : {1.0, 0.1, 0.01, 0.001}) {
        const double up = convergence_window(phi, 0.6).t_c_upper;
        EXPECT_GT(up, prev);
        prev = up;
    }
}

TEST(Integrators, ZeroStateStaysZero) {
    const GridSpec g(1, 1, 1);
    const CarlemanOperator op(g, {0}, 0.6);
    const PhiVector phi = op.phi_from(std::vector<double>(Q, 0.0));
    const Trajectory t = integrate_truncated(op, phi, 1e-4, 1e-5);
    for (const auto& s : t.sector1) {
        for (double v : s) {
            EXPECT_EQ(v, 0.0);
        }
    }
}

TEST(Integrators, FourthOrderStepHalving) {
    const GridSpec g(1, 1, 1);
    const CarlemanOperator op(g, {0}, 0.6);
    const Populations eq = equilibrium(1.0, {0.04, 0.01, 0.0});
    std::vector<double> f(eq.begin(), eq.end());
    f[0] += 0.01;
    f[5] -= 0.01;
    const double T = 0.4;
    const auto a = integrate_nonlinear(op, f, T, 0.1).sector1.back();
    const auto b = integrate_nonlinear(op, f, T, 0.05).sector1.back();
    const auto c = integrate_nonlinear(op, f, T, 0.025).sector1.back();
    const double ratio = max_diff(a, b) / max_diff(b, c);
    EXPECT_NEAR(ratio, 16.0, 2.0);
}
