#include "clbm/carleman.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <limits>
#include <set>
#include <string>

#include <fmt/format.h>

namespace clbm {

void validate_tau(double tau) {
    if (!(tau > 0.5 && tau <= 1.0)) {
        throw std::invalid_argument(fmt::format("tau = {} outside (0.5, 1]", tau));
    }
}

namespace {

struct Split {
    long long node;
    int dir;
};

Split split(const GridSpec& g, long long mu) {
    if (mu < 0 || mu >= g.nq()) {
        throw std::out_of_range("flat index outside [0, nQ)");
    }
    return {mu / Q, static_cast<int>(mu % Q)};
}

}  // namespace

double s_entry(const GridSpec& g, const std::vector<std::uint8_t>& mask, long long mu_r, long long mu_c) {
    if (static_cast<long long>(mask.size()) != g.n()) {
        throw std::invalid_argument("mask size does not match grid");
    }
    const Split r = split(g, mu_r);
    const Split c = split(g, mu_c);
    if (mask[r.node] != 0 || r.dir == rest_direction) {
        return 0.0;
    }
    const Vec3i& ci = d3q27().vectors[r.dir];
    const long long upstream = g.node_index(g.shifted(g.node(r.node), ci, -1));
    double v = 0.0;
    if (c.node == r.node && c.dir == r.dir) {
        v -= 1.0;
    }
    if (c.node == upstream && c.dir == r.dir && mask[upstream] == 0) {
        v += 1.0;
    }
    if (c.node == r.node && mask[upstream] != 0 && c.dir == d3q27().opposite[r.dir]) {
        v += 1.0;
    }
    return v;
}

double f1_entry(const GridSpec& g, long long mu_r, long long mu_c, double tau) {
    const Split r = split(g, mu_r);
    const Split c = split(g, mu_c);
    if (r.node != c.node) {
        return 0.0;
    }
    return f1_local<double>(r.dir, c.dir, 1.0 / tau);
}

double f2_entry(const GridSpec& g, long long mu_r, long long mu_b, long long mu_c, double tau, Variant variant) {
    const Split r = split(g, mu_r);
    const Split b = split(g, mu_b);
    const Split c = split(g, mu_c);
    if (r.node != b.node || r.node != c.node) {
        return 0.0;
    }
    return variant == Variant::dense ? f2_local_dense<double>(r.dir, b.dir, c.dir, 1.0 / tau)
                                     : f2_local_sparse<double>(r.dir, b.dir, c.dir, 1.0 / tau);
}

double f3_entry(const GridSpec& g, long long mu_r, long long mu_b, long long mu_c, long long mu_d, double tau,
                Variant variant) {
    const Split r = split(g, mu_r);
    const Split b = split(g, mu_b);
    const Split c = split(g, mu_c);
    const Split d = split(g, mu_d);
    if (r.node != b.node || r.node != c.node || r.node != d.node) {
        return 0.0;
    }
    return variant == Variant::dense ? f3_local_dense<double>(r.dir, b.dir, c.dir, d.dir, 1.0 / tau)
                                     : f3_local_sparse<double>(r.dir, b.dir, c.dir, d.dir, 1.0 / tau);
}

void SparseTriples::push(long long r, long long c, double v) {
    if (r < 0 || r >= n_rows || c < 0 || c >= n_cols) {
        throw std::out_of_range("triple index outside matrix shape");
    }
    if (!std::isfinite(v)) {
        throw std::invalid_argument("nonfinite matrix value");
    }
    rows.push_back(r);
    cols.push_back(c);
    values.push_back(v);
}

void SparseTriples::canonicalize() {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return rows[a] != rows[b] ? rows[a] < rows[b] : cols[a] < cols[b];
    });
    std::vector<long long> r2, c2;
    std::vector<double> v2;
    for (std::size_t idx : order) {
        if (!r2.empty() && r2.back() == rows[idx] && c2.back() == cols[idx]) {
            v2.back() += values[idx];
        } else {
            r2.push_back(rows[idx]);
            c2.push_back(cols[idx]);
            v2.push_back(values[idx]);
        }
    }
    rows.clear();
    cols.clear();
    values.clear();
    for (std::size_t k = 0; k < v2.size(); ++k) {
        if (v2[k] != 0.0) {
            rows.push_back(r2[k]);
            cols.push_back(c2[k]);
            values.push_back(v2[k]);
        }
    }
}

double SparseTriples::norm_inf() const {
    std::vector<double> sums(static_cast<std::size_t>(n_rows), 0.0);
    for (std::size_t k = 0; k < values.size(); ++k) {
        sums[rows[k]] += std::abs(values[k]);
    }
    return sums.empty() ? 0.0 : *std::max_element(sums.begin(), sums.end());
}

double SparseTriples::norm_one() const {
    std::vector<std::pair<long long, double>> pairs;
    pairs.reserve(values.size());
    for (std::size_t k = 0; k < values.size(); ++k) {
        pairs.emplace_back(cols[k], std::abs(values[k]));
    }
    std::sort(pairs.begin(), pairs.end());
    double best = 0.0;
    for (std::size_t k = 0; k < pairs.size();) {
        double s = 0.0;
        std::size_t e = k;
        while (e < pairs.size() && pairs[e].first == pairs[k].first) {
            s += pairs[e].second;
            ++e;
        }
        best = std::max(best, s);
        k = e;
    }
    return best;
}

CarlemanOperator::CarlemanOperator(const GridSpec& g, std::vector<std::uint8_t> mask, double tau, Variant variant)
    : grid_(g), mask_(std::move(mask)), tau_(tau), variant_(variant), nq_(g.nq()) {
    validate_tau(tau);
    if (static_cast<long long>(mask_.size()) != g.n()) {
        throw std::invalid_argument("mask size does not match grid");
    }
    stream_source_.assign(static_cast<std::size_t>(nq_), -1);
    for (long long a = 0; a < g.n(); ++a) {
        if (mask_[a] != 0) {
            continue;
        }
        const Node p = g.node(a);
        for (int i = 0; i < Q; ++i) {
            if (i == rest_direction) {
                continue;
            }
            const long long up = g.node_index(g.shifted(p, d3q27().vectors[i], -1));
            stream_source_[a * Q + i] = mask_[up] == 0 ? up * Q + i : a * Q + d3q27().opposite[i];
        }
    }
    const double inv_tau = 1.0 / tau;
    f2_.assign(Q * Q * Q, 0.0);
    f3_.assign(Q * Q * Q * Q, 0.0);
    for (int i = 0; i < Q; ++i) {
        for (int j = 0; j < Q; ++j) {
            f1_[i * Q + j] = f1_local<double>(i, j, inv_tau);
            for (int k = 0; k < Q; ++k) {
                f2_[(i * Q + j) * Q + k] = variant == Variant::dense ? f2_local_dense<double>(i, j, k, inv_tau)
                                                                      : f2_local_sparse<double>(i, j, k, inv_tau);
                if (const double v = f2_[(i * Q + j) * Q + k]; v != 0.0) {
                    nz2_.push_back({i, j, k, 0, v});
                }
                for (int l = 0; l < Q; ++l) {
                    const double v = variant == Variant::dense ? f3_local_dense<double>(i, j, k, l, inv_tau)
                                                               : f3_local_sparse<double>(i, j, k, l, inv_tau);
                    f3_[((i * Q + j) * Q + k) * Q + l] = v;
                    if (v != 0.0) {
                        nz3_.push_back({i, j, k, l, v});
                    }
                }
            }
        }
    }
}

void CarlemanOperator::apply_streaming(const double* x, double* y) const {
    for (long long mu = 0; mu < nq_; ++mu) {
        const long long src = stream_source_[mu];
        y[mu] = src < 0 ? 0.0 : x[src] - x[mu];
    }
}

void CarlemanOperator::apply_f1(const double* x, double* y) const {
    for (long long a = 0; a < grid_.n(); ++a) {
        const double* xl = x + a * Q;
        for (int i = 0; i < Q; ++i) {
            double s = 0.0;
            for (int j = 0; j < Q; ++j) {
                s += f1_[i * Q + j] * xl[j];
            }
            y[a * Q + i] = s;
        }
    }
}

void CarlemanOperator::apply_first(const double* x, double* y) const {
    std::vector<double> tmp(static_cast<std::size_t>(nq_));
    apply_streaming(x, y);
    apply_f1(x, tmp.data());
    for (long long mu = 0; mu < nq_; ++mu) {
        y[mu] += tmp[mu];
    }
}

void CarlemanOperator::apply_f2(const double* v, double* y) const {
    const long long N = nq_;
    for (long long a = 0; a < grid_.n(); ++a) {
        const long long base = a * Q;
        for (int i = 0; i < Q; ++i) {
            double s = 0.0;
            for (int j = 0; j < Q; ++j) {
                const double* row = &f2_[(i * Q + j) * Q];
                const double* col = v + (base + j) * N + base;
                for (int k = 0; k < Q; ++k) {
                    s += row[k] * col[k];
                }
            }
            y[base + i] = s;
        }
    }
}

void CarlemanOperator::apply_f3(const double* v, double* y) const {
    const long long N = nq_;
    for (long long a = 0; a < grid_.n(); ++a) {
        const long long base = a * Q;
        for (int i = 0; i < Q; ++i) {
            double s = 0.0;
            for (int j = 0; j < Q; ++j) {
                for (int k = 0; k < Q; ++k) {
                    const double* row = &f3_[((i * Q + j) * Q + k) * Q];
                    const double* col = v + ((base + j) * N + base + k) * N + base;
                    for (int l = 0; l < Q; ++l) {
                        s += row[l] * col[l];
                    }
                }
            }
            y[base + i] = s;
        }
    }
}

std::vector<double> CarlemanOperator::nonlinear_rhs(const std::vector<double>& f) const {
    if (static_cast<long long>(f.size()) != nq_) {
        throw std::invalid_argument("state length must be nQ");
    }
    std::vector<double> y(static_cast<std::size_t>(nq_));
    apply_first(f.data(), y.data());
    for (long long a = 0; a < grid_.n(); ++a) {
        const double* fl = f.data() + a * Q;
        double* yl = y.data() + a * Q;
        for (const auto& e : nz2_) {
            yl[e.i] += e.v * fl[e.j] * fl[e.k];
        }
        for (const auto& e : nz3_) {
            yl[e.i] += e.v * fl[e.j] * fl[e.k] * fl[e.l];
        }
    }
    return y;
}

std::vector<double> CarlemanOperator::sector1_lazy(const std::vector<double>& f) const {
    if (static_cast<long long>(f.size()) != nq_) {
        throw std::invalid_argument("state length must be nQ");
    }
    std::vector<double> y(static_cast<std::size_t>(nq_));
    apply_first(f.data(), y.data());
    // Only same-node factors meet a nonzero of F2/F3, so each node needs the local slice of phi only.
    std::vector<double> p2(Q * Q), p3(Q * Q * Q);
    for (long long a = 0; a < grid_.n(); ++a) {
        const double* fl = f.data() + a * Q;
        for (int j = 0; j < Q; ++j) {
            for (int k = 0; k < Q; ++k) {
                p2[j * Q + k] = fl[j] * fl[k];
                for (int l = 0; l < Q; ++l) {
                    p3[(j * Q + k) * Q + l] = fl[j] * fl[k] * fl[l];
                }
            }
        }
        for (int i = 0; i < Q; ++i) {
            double s = 0.0;
            const double* r2 = &f2_[i * Q * Q];
            for (int c = 0; c < Q * Q; ++c) {
                s += r2[c] * p2[c];
            }
            const double* r3 = &f3_[i * Q * Q * Q];
            for (int c = 0; c < Q * Q * Q; ++c) {
                s += r3[c] * p3[c];
            }
            y[a * Q + i] += s;
        }
    }
    return y;
}

void CarlemanOperator::check_explicit() const {
    if (nq_ > explicit_phi_cap) {
        throw CapacityError(fmt::format("explicit phi storage needs nQ <= {} (got {}); use sector1_lazy",
                                        explicit_phi_cap, nq_));
    }
}

PhiVector CarlemanOperator::phi_from(const std::vector<double>& f) const {
    check_explicit();
    if (static_cast<long long>(f.size()) != nq_) {
        throw std::invalid_argument("state length must be nQ");
    }
    const std::size_t N = static_cast<std::size_t>(nq_);
    PhiVector phi;
    phi.s1 = f;
    phi.s2.resize(N * N);
    phi.s3.resize(N * N * N);
    for (std::size_t a = 0; a < N; ++a) {
        for (std::size_t b = 0; b < N; ++b) {
            phi.s2[a * N + b] = f[a] * f[b];
            for (std::size_t c = 0; c < N; ++c) {
                phi.s3[(a * N + b) * N + c] = f[a] * f[b] * f[c];
            }
        }
    }
    return phi;
}

namespace {

// out += (op applied along one axis) of a tensor of shape N^order.
template <class Op>
void add_along_axis(const Op& op, const std::vector<double>& in, std::vector<double>& out, std::size_t N, int order,
                    int axis) {
    std::size_t stride = 1;
    for (int k = axis + 1; k < order; ++k) {
        stride *= N;
    }
    std::size_t outer = 1;
    for (int k = 0; k < axis; ++k) {
        outer *= N;
    }
    std::vector<double> x(N), y(N);
    for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t s = 0; s < stride; ++s) {
            const std::size_t base = o * N * stride + s;
            for (std::size_t t = 0; t < N; ++t) {
                x[t] = in[base + t * stride];
            }
            op(x.data(), y.data());
            for (std::size_t t = 0; t < N; ++t) {
                out[base + t * stride] += y[t];
            }
        }
    }
}

}  // namespace

PhiVector CarlemanOperator::apply(const PhiVector& phi) const {
    check_explicit();
    const std::size_t N = static_cast<std::size_t>(nq_);
    if (phi.s1.size() != N || phi.s2.size() != N * N || phi.s3.size() != N * N * N) {
        throw std::invalid_argument("phi sector lengths must be nQ, (nQ)^2, (nQ)^3");
    }
    auto B = [this](const double* x, double* y) { apply_first(x, y); };
    PhiVector out;
    out.s1.assign(N, 0.0);
    out.s2.assign(N * N, 0.0);
    out.s3.assign(N * N * N, 0.0);

    std::vector<double> t1(N);
    apply_first(phi.s1.data(), out.s1.data());
    apply_f2(phi.s2.data(), t1.data());
    for (std::size_t a = 0; a < N; ++a) {
        out.s1[a] += t1[a];
    }
    apply_f3(phi.s3.data(), t1.data());
    for (std::size_t a = 0; a < N; ++a) {
        out.s1[a] += t1[a];
    }

    // (S+F1)^[2] on sector 2
    add_along_axis(B, phi.s2, out.s2, N, 2, 0);
    add_along_axis(B, phi.s2, out.s2, N, 2, 1);
    // F2^[2] = F2 (x) I + I (x) F2 on sector 3
    std::vector<double> g(N * N);
    for (std::size_t b = 0; b < N; ++b) {
        for (std::size_t c = 0; c < N * N; ++c) {
            g[c] = phi.s3[c * N + b];
        }
        apply_f2(g.data(), t1.data());
        for (std::size_t a = 0; a < N; ++a) {
            out.s2[a * N + b] += t1[a];
        }
    }
    for (std::size_t a = 0; a < N; ++a) {
        apply_f2(phi.s3.data() + a * N * N, t1.data());
        for (std::size_t b = 0; b < N; ++b) {
            out.s2[a * N + b] += t1[b];
        }
    }
    // (S+F1)^[3] on sector 3
    for (int axis = 0; axis < 3; ++axis) {
        add_along_axis(B, phi.s3, out.s3, N, 3, axis);
    }
    return out;
}

FirstOrderBlocks assemble_first_order(const GridSpec& g, const std::vector<std::uint8_t>& mask, double tau,
                                      Variant variant, long long cap) {
    if (g.nq() > cap) {
        throw CapacityError(fmt::format(
            "explicit assembly refused: nQ = {} exceeds the cap of {}; use the matrix-free CarlemanOperator instead",
            g.nq(), cap));
    }
    const CarlemanOperator op(g, mask, tau, variant);
    const long long N = g.nq();
    FirstOrderBlocks blocks{g, tau, variant, {}, {}, {}, {}};
    blocks.S.n_rows = blocks.F1.n_rows = blocks.F2.n_rows = blocks.F3.n_rows = N;
    blocks.S.n_cols = blocks.F1.n_cols = N;
    blocks.F2.n_cols = N * N;
    blocks.F3.n_cols = N * N * N;

    std::vector<double> e(static_cast<std::size_t>(N), 0.0), col(static_cast<std::size_t>(N));
    for (long long mu = 0; mu < N; ++mu) {
        // Column mu of S from its action on a one-hot vector.
        e[mu] = 1.0;
        op.apply_streaming(e.data(), col.data());
        e[mu] = 0.0;
        for (long long r = 0; r < N; ++r) {
            if (col[r] != 0.0) {
                blocks.S.push(r, mu, col[r]);
            }
        }
    }
    const double inv_tau = 1.0 / tau;
    for (long long a = 0; a < g.n(); ++a) {
        const long long base = a * Q;
        for (int i = 0; i < Q; ++i) {
            for (int j = 0; j < Q; ++j) {
                if (const double v = f1_local<double>(i, j, inv_tau); v != 0.0) {
                    blocks.F1.push(base + i, base + j, v);
                }
                for (int k = 0; k < Q; ++k) {
                    if (const double v = op.f2_local(i, j, k); v != 0.0) {
                        blocks.F2.push(base + i, kron_index(N, base + j, base + k), v);
                    }
                    for (int l = 0; l < Q; ++l) {
                        if (const double v = op.f3_local(i, j, k, l); v != 0.0) {
                            blocks.F3.push(base + i, kron_index(N, base + j, base + k, base + l), v);
                        }
                    }
                }
            }
        }
    }
    blocks.S.canonicalize();
    blocks.F1.canonicalize();
    blocks.F2.canonicalize();
    blocks.F3.canonicalize();
    return blocks;
}

namespace {

template <class Gen>
BlockCensus census_of(Gen&& gen) {
    std::set<Rational> unique;
    BlockCensus c;
    gen([&](const Rational& v) {
        if (v != Rational(0)) {
            ++c.nonzeros;
            unique.insert(v);
        }
    });
    c.unique_values = static_cast<long long>(unique.size());
    return c;
}

}  // namespace

BlockCensus census_f1(const Rational& tau) {
    const Rational inv = Rational(1) / tau;
    return census_of([&](auto&& sink) {
        for (int i = 0; i < Q; ++i) {
            for (int j = 0; j < Q; ++j) {
                sink(f1_local<Rational>(i, j, inv));
            }
        }
    });
}

BlockCensus census_f2(const Rational& tau, Variant variant) {
    const Rational inv = Rational(1) / tau;
    return census_of([&](auto&& sink) {
        for (int i = 0; i < Q; ++i) {
            for (int j = 0; j < Q; ++j) {
                for (int k = 0; k < Q; ++k) {
                    sink(variant == Variant::dense ? f2_local_dense<Rational>(i, j, k, inv)
                                                   : f2_local_sparse<Rational>(i, j, k, inv));
                }
            }
        }
    });
}

BlockCensus census_f3(const Rational& tau, Variant variant) {
    const Rational inv = Rational(1) / tau;
    return census_of([&](auto&& sink) {
        for (int i = 0; i < Q; ++i) {
            for (int j = 0; j < Q; ++j) {
                for (int k = 0; k < Q; ++k) {
                    for (int l = 0; l < Q; ++l) {
                        sink(variant == Variant::dense ? f3_local_dense<Rational>(i, j, k, l, inv)
                                                       : f3_local_sparse<Rational>(i, j, k, l, inv));
                    }
                }
            }
        }
    });
}

namespace {

struct ExactCoefficients {
    // Dense-block norms at tau = 1: f1_inf, f1_one, f2_inf, f2_one, f3_inf, f3_one.
    std::array<Rational, 6> values;
};

Rational abs_r(const Rational& r) { return r < Rational(0) ? -r : r; }

ExactCoefficients compute_coefficients() {
    const Rational one(1);
    std::array<Rational, Q> row1{}, row2{}, row3{};
    std::vector<Rational> col1(Q), col2(Q * Q), col3(Q * Q * Q);
    for (int i = 0; i < Q; ++i) {
        for (int j = 0; j < Q; ++j) {
            const Rational v1 = abs_r(f1_local<Rational>(i, j, one));
            row1[i] += v1;
            col1[j] += v1;
            for (int k = 0; k < Q; ++k) {
                const Rational v2 = abs_r(f2_local_dense<Rational>(i, j, k, one));
                row2[i] += v2;
                col2[j * Q + k] += v2;
                // The dense F3 entry ignores j, so it repeats -F2(i;k,l)/2 over j.
                for (int l = 0; l < Q; ++l) {
                    const Rational v3 = abs_r(f3_local_dense<Rational>(i, j, k, l, one));
                    row3[i] += v3;
                    col3[(j * Q + k) * Q + l] += v3;
                }
            }
        }
    }
    auto mx = [](const auto& c) { return *std::max_element(c.begin(), c.end()); };
    return {{mx(row1), mx(col1), mx(row2), mx(col2), mx(row3), mx(col3)}};
}

const ExactCoefficients& exact_coefficients() {
    static const ExactCoefficients c = compute_coefficients();
    return c;
}

}  // namespace

NormReport norm_report(double tau) {
    validate_tau(tau);
    const auto& ex = exact_coefficients();
    NormReport r;
    r.tau = tau;
    for (int k = 0; k < 6; ++k) {
        r.coefficients[k] = boost::rational_cast<double>(ex.values[k]);
        const Rational& v = ex.values[k];
        long long fl = v.numerator() / v.denominator();
        r.rounded_up[k] = fl + 1;
    }
    r.f1_inf = r.coefficients[0] / tau;
    r.f1_one = r.coefficients[1] / tau;
    r.f2_inf = r.coefficients[2] / tau;
    r.f2_one = r.coefficients[3] / tau;
    r.f3_inf = r.coefficients[4] / tau;
    r.f3_one = r.coefficients[5] / tau;

    const double s = 2.0;
    auto up = [&](int k) { return static_cast<double>(r.rounded_up[k]) / tau; };
    // Block columns of A for the 1-norm, block rows for the inf-norm; ||B^[i]|| = i ||B||.
    const double b1 = s + up(1);
    r.bound_one = std::max({b1, up(3) + 2.0 * b1, up(5) + 2.0 * up(3) + 3.0 * b1});
    const double bi = s + up(0);
    r.bound_inf = std::max({bi + up(2) + up(4), 2.0 * bi + 2.0 * up(2), 3.0 * bi});
    r.spectral_bound = std::sqrt(r.bound_one * r.bound_inf);
    return r;
}

ConvergenceWindow convergence_window(double phi0_inf, double tau) {
    if (!(phi0_inf > 0.0) || !std::isfinite(phi0_inf)) {
        throw std::invalid_argument("phi0 norm must be positive and finite");
    }
    const NormReport nr = norm_report(tau);
    ConvergenceWindow w;
    w.tau = tau;
    w.phi0_inf = phi0_inf;
    const double s = nr.s_inf;
    const double f2f3 = nr.f2_inf + nr.f3_inf;
    w.t_c_lower = 1.0 / (2.0 * phi0_inf * f2f3 + s + nr.f1_inf + nr.f2_inf);
    w.t_c_upper = 1.0 / (2.0 * phi0_inf * f2f3);
    w.f1_tilde = std::max(s + nr.f1_inf + nr.f2_inf, 2.0 * (s + nr.f1_inf));
    w.f2_tilde = 2.0 * f2f3;
    w.beta0 = phi0_inf * w.f2_tilde / w.f1_tilde;
    w.t_c = std::log(1.0 + 1.0 / w.beta0) / w.f1_tilde;
    return w;
}

double ConvergenceWindow::envelope(double t, int K) const {
    const double e = std::exp(f1_tilde * t);
    const double den = (1.0 + beta0) - beta0 * e;
    if (den <= 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return phi0_inf * e / den * std::pow(beta0 * (e - 1.0), K);
}

namespace {

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) {
        if (!std::isfinite(x)) {
            return std::numeric_limits<double>::infinity();
        }
        m = std::max(m, std::abs(x));
    }
    return m;
}

void axpy(std::vector<double>& y, const std::vector<double>& x, double a) {
    for (std::size_t k = 0; k < y.size(); ++k) {
        y[k] += a * x[k];
    }
}

template <class State, class Rhs, class Norm, class Sector>
Trajectory rk4(State y, double t_end, double step, Rhs&& rhs, Norm&& norm, Sector&& sector1, auto&& combine) {
    if (!(t_end >= 0.0) || !(step > 0.0)) {
        throw std::invalid_argument("t_end must be >= 0 and step > 0");
    }
    const long long steps = static_cast<long long>(std::ceil(t_end / step - 1e-12));
    const double h = steps > 0 ? t_end / static_cast<double>(steps) : 0.0;
    const double limit = 1e8 * (1.0 + norm(y));
    Trajectory tr;
    tr.times.push_back(0.0);
    tr.sector1.push_back(sector1(y));
    for (long long s = 0; s < steps; ++s) {
        const State k1 = rhs(y);
        State y2 = y;
        combine(y2, k1, 0.5 * h);
        const State k2 = rhs(y2);
        State y3 = y;
        combine(y3, k2, 0.5 * h);
        const State k3 = rhs(y3);
        State y4 = y;
        combine(y4, k3, h);
        const State k4 = rhs(y4);
        combine(y, k1, h / 6.0);
        combine(y, k2, h / 3.0);
        combine(y, k3, h / 3.0);
        combine(y, k4, h / 6.0);
        const double nrm = norm(y);
        if (!std::isfinite(nrm) || nrm > limit) {
            throw NumericalError(fmt::format("RK4 blow-up at t = {:.6g} (norm {:.3g})", (s + 1) * h, nrm));
        }
        tr.times.push_back(static_cast<double>(s + 1) * h);
        tr.sector1.push_back(sector1(y));
    }
    return tr;
}

}  // namespace

Trajectory integrate_truncated(const CarlemanOperator& op, const PhiVector& phi0, double t_end, double step) {
    return rk4(
        phi0, t_end, step, [&](const PhiVector& p) { return op.apply(p); },
        [](const PhiVector& p) { return std::max({max_abs(p.s1), max_abs(p.s2), max_abs(p.s3)}); },
        [](const PhiVector& p) { return p.s1; },
        [](PhiVector& y, const PhiVector& k, double a) {
            axpy(y.s1, k.s1, a);
            axpy(y.s2, k.s2, a);
            axpy(y.s3, k.s3, a);
        });
}

Trajectory integrate_nonlinear(const CarlemanOperator& op, const std::vector<double>& f0, double t_end, double step) {
    return rk4(
        f0, t_end, step, [&](const std::vector<double>& f) { return op.nonlinear_rhs(f); },
        [](const std::vector<double>& f) { return max_abs(f); }, [](const std::vector<double>& f) { return f; },
        [](std::vector<double>& y, const std::vector<double>& k, double a) { axpy(y, k, a); });
}

}  // namespace clbm
