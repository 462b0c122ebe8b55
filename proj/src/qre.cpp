#include "clbm/qre.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <fmt/format.h>

#include "clbm/carleman.hpp"

namespace clbm {

namespace {

void require_positive_error(double eps) {
    if (!(eps > 0.0) || !std::isfinite(eps)) {
        throw std::invalid_argument(fmt::format("target error {} must be positive and finite", eps));
    }
}

double log_in(LogBase base, double x) { return base == LogBase::two ? std::log2(x) : std::log(x); }

BlockEncodingCost make_cost(std::string label, double alpha, long long clean, long long persistent, double eps,
                            std::function<double(double)> t_gates) {
    require_positive_error(eps);
    BlockEncodingCost c;
    c.label = std::move(label);
    c.subnormalization = alpha;
    c.clean_ancillae = clean;
    c.persistent_ancillae = persistent;
    c.target_error = eps;
    c.t_gates = std::move(t_gates);
    return c;
}

}  // namespace

BlockEncodingCost cost_f1_bespoke(double eps) {
    return make_cost("F1 bespoke", 1.0 / 257.0, 8, 9, eps, [](double e) { return 465.2 + 13.8 * std::log2(1.0 / e); });
}

BlockEncodingCost cost_f2_bespoke(double eps, LogBase base) {
    return make_cost("F2 bespoke", 3.0 / 13312.0, 6, 22, eps,
                     [base](double e) { return 328.0 + 5.75 * log_in(base, 1.0 / e); });
}

BlockEncodingCost cost_f3_bespoke(double eps, LogBase base) {
    return make_cost("F3 bespoke", 3.0 / 106496.0, 6, 25, eps,
                     [base](double e) { return 340.0 + 5.75 * log_in(base, 1.0 / e); });
}

long long ceil_log2(double x) {
    if (!(x >= 1.0) || !std::isfinite(x)) {
        throw std::invalid_argument(fmt::format("ceil_log2 needs a finite argument >= 1, got {}", x));
    }
    if (x < 9007199254740992.0) {
        const auto v = static_cast<unsigned long long>(std::ceil(x));
        long long bits = 0;
        while ((1ULL << bits) < v) {
            ++bits;
        }
        return bits;
    }
    return static_cast<long long>(std::ceil(std::log2(x)));
}

BlockEncodingCost cost_f_unstructured(FMatrix matrix, double n, double eps) {
    if (!(n >= 1.0)) {
        throw std::invalid_argument("grid node count must be at least 1");
    }
    const long long lq = ceil_log2(Q);
    switch (matrix) {
        case FMatrix::f1:
            return make_cost("F1 unstructured", 1.0 / (1.58950617 * Q), 0, lq + 1, eps,
                             [](double e) { return 838.35 * std::log2(729.0 / e); });
        case FMatrix::f2: {
            const double b = static_cast<double>(ceil_log2(n * n));
            return make_cost("F2 unstructured", 1.0 / ((40.0 / 9.0) * Q), 0, lq + 3, eps, [b](double e) {
                return 8.0 * b + 17457.0 * std::log2(15180.0 / e) - 16.0 + 2.0 * b * (b - 1.0);
            });
        }
        case FMatrix::f3: {
            const double b = static_cast<double>(ceil_log2(n * n * n));
            return make_cost("F3 unstructured", 1.0 / ((20.0 / 9.0) * Q), 0, lq + 3, eps, [b](double e) {
                return 8.0 * b + 471339.0 * std::log2(409860.0 / e) - 16.0 + 2.0 * b * (b - 1.0);
            });
        }
    }
    throw std::invalid_argument("unknown matrix");
}

double streaming_oracle_cost(StreamingGeometry geometry, long long n_p, long long n_prisms) {
    if (n_p < 1) {
        throw std::invalid_argument("n_p must be at least 1");
    }
    const double np = static_cast<double>(n_p);
    if (geometry == StreamingGeometry::sphere) {
        return 12.0 * np * np + 32.0 * np - 52.0;
    }
    if (n_prisms < 1) {
        throw std::invalid_argument("prism count must be at least 1");
    }
    return static_cast<double>(n_prisms) * (72.0 * np - 138.0);
}

double streaming_shift_cost(long long n_p) {
    if (n_p < 1) {
        throw std::invalid_argument("n_p must be at least 1");
    }
    return 12.0 * static_cast<double>(n_p - 1);
}

double streaming_in_out_cost(double n) {
    if (!(n >= 1.0)) {
        throw std::invalid_argument("grid node count must be at least 1");
    }
    const double q = Q;
    const double b = static_cast<double>(ceil_log2(n * q));
    const double logs = static_cast<double>(ceil_log2(n * q) + ceil_log2(std::max(1.0, (n - 1.0) * q)) +
                                            ceil_log2(std::max(1.0, (n - 2.0) * q)));
    return 6.0 * (11.0 * b - 15.0) + 14.0 * logs + 42.0;
}

StreamingCost cost_streaming(StreamingGeometry geometry, double n, long long n_p, long long n_prisms) {
    StreamingCost c;
    c.oracle = streaming_oracle_cost(geometry, n_p, n_prisms);
    c.shift = streaming_shift_cost(n_p);
    c.s_in_out = streaming_in_out_cost(n);
    c.adder_bits = static_cast<double>(ceil_log2(n * Q));
    c.block_encoding = 2.0 * c.oracle + c.shift + 2.0 * c.s_in_out;
    return c;
}

long long position_bits(double nx, double ny, double nz) {
    return std::max({ceil_log2(nx), ceil_log2(ny), ceil_log2(nz)});
}

BlockEncodingCost cost_s_block_encoding(StreamingGeometry geometry, double n, long long n_p, long long n_prisms) {
    const double t = cost_streaming(geometry, n, n_p, n_prisms).block_encoding;
    BlockEncodingCost c;
    c.label = "S";
    c.subnormalization = 1.0;
    c.clean_ancillae = 0;
    c.persistent_ancillae = 1;
    c.target_error = 0.0;
    c.t_gates = [t](double) { return t; };
    return c;
}

BlockEncodingCost combine_sum(const BlockEncodingCost& a, const BlockEncodingCost& b, const std::string& label) {
    const double alpha = std::max(a.subnormalization, b.subnormalization);
    BlockEncodingCost c;
    c.label = label;
    c.subnormalization = 2.0 * alpha;
    c.clean_ancillae = std::max(a.clean_ancillae, b.clean_ancillae);
    c.persistent_ancillae = std::max(a.persistent_ancillae, b.persistent_ancillae) + 1;
    c.target_error = 2.0 * alpha * std::max(a.target_error, b.target_error);
    const double ta = a.t_gate_count();
    const double tb = b.t_gate_count();
    c.t_gates = [ta, tb](double) { return ta + tb; };
    return c;
}

CarlemanCost cost_carleman(double beta, long long a, long long n_qubits_base, int truncation, int blocks,
                           CarlemanConvention convention) {
    if (!(beta > 0.0) || a < 0 || n_qubits_base < 1 || truncation < 1 || blocks < 1) {
        throw std::invalid_argument("invalid Carleman combination parameters");
    }
    const long long lt = ceil_log2(truncation);
    CarlemanCost c;
    c.ancillae = a + 2 * lt;
    if (convention == CarlemanConvention::padded) {
        if (truncation != 3 || blocks != 3) {
            throw std::invalid_argument("the padded Carleman convention is defined for T = D = 3 only");
        }
        c.qubits = 3 * n_qubits_base + a + 16;
        c.subnormalization = 54.0 * beta;
        return c;
    }
    c.qubits = n_qubits_base * truncation + a + 3 * lt + ceil_log2(blocks);
    c.subnormalization = blocks * truncation * (truncation + 1) * beta / 2.0;
    return c;
}

double cost_adder(long long n_bits) {
    if (n_bits < 1) {
        throw std::invalid_argument("adder width must be at least 1");
    }
    return 16.0 * static_cast<double>(n_bits) + 22.0;
}

AmplitudeBounds amplitude_bounds(const LatticeInstance& inst, double body_radius, double eps_rho,
                                 double drag_estimate, double rel_err) {
    if (!(inst.n_f > 0.0) || !(inst.n >= inst.n_f)) {
        throw std::invalid_argument("fluid node count must satisfy 0 < n_f <= n");
    }
    if (!(eps_rho >= 0.0 && eps_rho < 1.0)) {
        throw std::invalid_argument("eps_rho must lie in [0, 1)");
    }
    if (!(rel_err > 0.0)) {
        throw std::invalid_argument("relative error must be positive");
    }
    const double q = Q;
    const double nf = inst.n_f;
    AmplitudeBounds b;
    const double lo1 = nf * std::pow(1.0 - eps_rho / q, 2) / q;
    const double hi1 = nf * std::pow(1.0 + eps_rho, 2);
    b.f_lower = std::sqrt(lo1);
    b.f_upper = std::sqrt(hi1);
    b.phi_min = std::sqrt(lo1 + lo1 * lo1 + lo1 * lo1 * lo1);
    b.phi_max = std::sqrt(hi1 + hi1 * hi1 + hi1 * hi1 * hi1);

    const double V = inst.volume;
    const double r = body_radius;
    const double n = inst.n;
    const double dt = inst.dt;
    b.v_upper = std::sqrt(216.0 * M_PI * std::pow(V, 4.0 / 3.0) * r * r / (dt * dt * std::pow(n, 4.0 / 3.0)));
    b.t_tilde = std::cbrt(n) * dt;
    b.C = std::pow(3.0 * M_PI, 1.5) / std::sqrt(2.0) * std::pow(V, 2.0 / 3.0) * r / b.t_tilde;

    if (!(drag_estimate > 0.0)) {
        b.grover_iterates = std::numeric_limits<double>::infinity();
        b.grover_iterate_bound = std::numeric_limits<double>::infinity();
        b.diagnostics.push_back("drag estimate is not positive; Grover iterate bounds are unbounded");
        return b;
    }
    b.grover_iterates = M_PI * b.v_upper * b.f_upper / (4.0 * drag_estimate * rel_err);
    b.grover_iterate_bound = b.C * std::pow(n, 1.0 / 6.0) / (drag_estimate * rel_err);
    return b;
}

QaeCounts qae_counts(double eps_tilde, double delta, QaeRounding rounding) {
    if (!(eps_tilde > 0.0 && eps_tilde < M_PI / 4.0)) {
        throw std::invalid_argument(fmt::format("eps_tilde = {} outside (0, pi/4)", eps_tilde));
    }
    if (!(delta > 0.0 && delta < 1.0)) {
        throw std::invalid_argument(fmt::format("delta = {} outside (0, 1)", delta));
    }
    const double s = 1.0 - 2.0 * std::sin(M_PI / 14.0);
    const double raw = 32.0 / (s * s) * std::log(2.0 / delta * std::log2(M_PI / (4.0 * eps_tilde)));
    QaeCounts c;
    c.repetitions_raw = raw;
    const double r = rounding == QaeRounding::one_decimal_then_ceil ? std::round(raw * 10.0) / 10.0 : raw;
    c.repetitions = std::max(1LL, static_cast<long long>(std::ceil(r)));
    c.grover_iterates = static_cast<long long>(std::ceil(M_PI / (8.0 * eps_tilde)));
    return c;
}

long long history_block_rows(long long m, long long k, long long p) {
    if (m < 1 || k < 1 || p < 0) {
        throw std::invalid_argument("history system needs m >= 1, k >= 1, p >= 0");
    }
    return m * (k + 1) + p + 1;
}

std::vector<HistoryCell> history_pattern(long long m, long long k, long long p) {
    const long long rows = history_block_rows(m, k, p);
    if (rows > history_pattern_cap) {
        throw CapacityError(fmt::format("history pattern with {} block rows exceeds cap {}", rows, history_pattern_cap));
    }
    std::vector<HistoryCell> cells;
    using K = HistoryCell::Kind;
    cells.push_back({0, 0, K::identity, 0});
    for (long long t = 0; t < m; ++t) {
        const long long s = t * (k + 1);
        for (long long j = 1; j <= k; ++j) {
            cells.push_back({s + j, s + j - 1, K::minus_ah, static_cast<int>(j)});
            cells.push_back({s + j, s + j, K::identity, 0});
        }
        const long long next = s + k + 1;
        for (long long c = s; c <= s + k; ++c) {
            cells.push_back({next, c, K::minus_identity, 0});
        }
        cells.push_back({next, next, K::identity, 0});
    }
    const long long last = m * (k + 1);
    for (long long i = 1; i <= p; ++i) {
        cells.push_back({last + i, last + i - 1, K::minus_identity, 0});
        cells.push_back({last + i, last + i, K::identity, 0});
    }
    return cells;
}

std::vector<std::vector<std::string>> render_history_pattern(long long m, long long k, long long p) {
    const long long rows = history_block_rows(m, k, p);
    std::vector<std::vector<std::string>> grid(rows, std::vector<std::string>(rows));
    for (const auto& c : history_pattern(m, k, p)) {
        std::string token;
        switch (c.kind) {
            case HistoryCell::Kind::identity:
                token = "I";
                break;
            case HistoryCell::Kind::minus_identity:
                token = "-I";
                break;
            case HistoryCell::Kind::minus_ah:
                token = c.j == 1 ? "-Ah" : fmt::format("-Ah/{}", c.j);
                break;
        }
        grid[c.row][c.col] = token;
    }
    return grid;
}

HistoryModel ode_history_model(double block_dim, double h, double T_lattice, long long k, long long p) {
    if (!(h > 0.0) || !(T_lattice > 0.0) || !(block_dim > 0.0)) {
        throw std::invalid_argument("history model needs positive h, T and block dimension");
    }
    HistoryModel hm;
    hm.m = static_cast<long long>(std::ceil(T_lattice / h));
    hm.k = k;
    hm.p = p;
    hm.block_rows = history_block_rows(hm.m, k, p);
    hm.dimension = static_cast<double>(hm.block_rows) * block_dim;
    if (hm.block_rows <= history_pattern_cap) {
        hm.pattern = history_pattern(hm.m, k, p);
    }
    return hm;
}

long long taylor_order(double m, double eps) {
    if (!(m >= 1.0) || !(eps > 0.0 && eps < 1.0)) {
        throw std::invalid_argument("taylor_order needs m >= 1 and eps in (0, 1)");
    }
    const double target = std::log(eps) - std::log(m);
    long long k = 1;
    while (-std::lgamma(static_cast<double>(k) + 2.0) > target) {
        ++k;
    }
    return k;
}

HistorySolution build_and_solve_history_small(const Eigen::MatrixXd& A, const Eigen::VectorXd& phi0,
                                              const Eigen::VectorXd& b, double h, long long m, long long k,
                                              long long p) {
    const long long N = A.rows();
    if (A.cols() != N || phi0.size() != N || b.size() != N) {
        throw std::invalid_argument("A must be square and match phi0 and b");
    }
    const long long rows = history_block_rows(m, k, p);
    if (rows * N > history_solve_cap) {
        throw CapacityError(fmt::format("history system of dimension {} exceeds cap {}", rows * N, history_solve_cap));
    }
    std::vector<Eigen::Triplet<double>> trips;
    for (const auto& c : history_pattern(m, k, p)) {
        const long long r0 = c.row * N;
        const long long c0 = c.col * N;
        switch (c.kind) {
            case HistoryCell::Kind::identity:
                for (long long i = 0; i < N; ++i) {
                    trips.emplace_back(r0 + i, c0 + i, 1.0);
                }
                break;
            case HistoryCell::Kind::minus_identity:
                for (long long i = 0; i < N; ++i) {
                    trips.emplace_back(r0 + i, c0 + i, -1.0);
                }
                break;
            case HistoryCell::Kind::minus_ah: {
                const double s = -h / c.j;
                for (long long i = 0; i < N; ++i) {
                    for (long long j = 0; j < N; ++j) {
                        if (A(i, j) != 0.0) {
                            trips.emplace_back(r0 + i, c0 + j, s * A(i, j));
                        }
                    }
                }
                break;
            }
        }
    }
    const long long dim = rows * N;
    Eigen::SparseMatrix<double> L(dim, dim);
    L.setFromTriplets(trips.begin(), trips.end());
    L.makeCompressed();

    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
    rhs.segment(0, N) = phi0;
    for (long long t = 0; t < m; ++t) {
        rhs.segment((t * (k + 1) + 1) * N, N) = h * b;
    }

    Eigen::SparseLU<Eigen::SparseMatrix<double>> solver;
    solver.compute(L);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("history matrix factorization failed");
    }
    const Eigen::VectorXd x = solver.solve(rhs);
    if (solver.info() != Eigen::Success || !x.allFinite()) {
        throw NumericalError("history solve failed");
    }
    HistorySolution sol;
    sol.blocks.reserve(rows);
    for (long long r = 0; r < rows; ++r) {
        sol.blocks.push_back(x.segment(r * N, N));
    }
    return sol;
}

QlsaModel default_qlsa_model(double c0) {
    QlsaModel model;
    model.id = fmt::format("linear-kappa-log(c0={})", c0);
    model.calls = [c0](const QlsaInputs& in) {
        return c0 * in.block_rows * in.c_max * std::log(1.0 / in.eps_solver);
    };
    return model;
}

double qlsa_call_count(const QlsaModel& model, const QlsaInputs& in) {
    if (!model.calls) {
        throw std::invalid_argument("QLSA model has no call-count function");
    }
    const double c = model.calls(in);
    if (!(c >= 0.0) || !std::isfinite(c)) {
        throw NumericalError(fmt::format("QLSA model '{}' returned invalid call count {}", model.id, c));
    }
    return c;
}

std::array<double, 4> CostModelConfig::allocations() const {
    double sum = 0.0;
    for (double w : allocation_weights) {
        if (!(w > 0.0) || !std::isfinite(w)) {
            throw std::invalid_argument("allocation weights must be positive");
        }
        sum += w;
    }
    if (!(error_budget > 0.0 && error_budget < 1.0)) {
        throw std::invalid_argument("error budget must lie in (0, 1)");
    }
    std::array<double, 4> out{};
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = error_budget * allocation_weights[i] / sum;
    }
    return out;
}

double ResourceEstimate::recompose() const {
    double product = 1.0;
    double leaves = 0.0;
    for (const auto& l : layers) {
        if (l.leaf) {
            leaves += l.calls * l.t_gates_each;
        } else {
            product *= l.calls;
        }
    }
    return product * leaves;
}

double body_radius(const PhysicalInstance& inst) {
    if (inst.kind == InstanceKind::sphere) {
        return inst.sphere_radius;
    }
    return std::sqrt(inst.frontal_area / M_PI);
}

double drag_placeholder(const PhysicalInstance& inst, const LatticeInstance& lat) {
    double cd = 1.0;
    if (inst.kind == InstanceKind::sphere) {
        const double re = inst.reynolds;
        cd = 24.0 / re * (1.0 + 0.15 * std::pow(re, 0.687)) + 0.42 / (1.0 + 42500.0 * std::pow(re, -1.16));
    }
    const double force = 0.5 * inst.density * lat.u * lat.u * inst.frontal_area * cd;
    // F = rho (dx / dt) F_lattice
    return force * lat.dt / (inst.density * lat.dx);
}

ResourceEstimate estimate_instance(const PhysicalInstance& inst, const LatticeInstance& lat,
                                   const CostModelConfig& config) {
    if (!(config.relative_error > 0.0)) {
        throw std::invalid_argument("relative error must be positive");
    }
    if (!(config.delta > 0.0 && config.delta < 1.0)) {
        throw std::invalid_argument("delta must lie in (0, 1)");
    }
    if (!(config.c_max > 0.0)) {
        throw std::invalid_argument("C_max must be positive");
    }
    ResourceEstimate est;
    est.instance_id = inst.id;
    est.model_id = config.qlsa.id;
    est.encoding = config.encoding;
    est.reynolds = lat.reynolds;

    est.spectral_norm_A = config.spectral_norm_A > 0.0 ? config.spectral_norm_A : norm_report(config.tau).spectral_bound;
    est.h = config.h > 0.0 ? config.h : 1.0 / est.spectral_norm_A;
    if (est.h * est.spectral_norm_A > 1.0 + 1e-12) {
        throw std::invalid_argument(fmt::format("h = {} violates h ||A|| <= 1 with ||A|| = {}", est.h,
                                                est.spectral_norm_A));
    }
    est.allocations = config.allocations();
    const double eps_f1 = est.allocations[0];
    const double eps_f2 = est.allocations[1];
    const double eps_f3 = est.allocations[2];
    const double eps_solver = est.allocations[3];

    const long long n_p = position_bits(lat.nx, lat.ny, lat.nz);
    const auto geometry = inst.kind == InstanceKind::sphere ? StreamingGeometry::sphere : StreamingGeometry::prisms;
    const BlockEncodingCost s = cost_s_block_encoding(geometry, lat.n, n_p, config.hull_prisms);
    BlockEncodingCost f1;
    BlockEncodingCost f2;
    BlockEncodingCost f3;
    if (config.encoding == Encoding::bespoke) {
        f1 = cost_f1_bespoke(eps_f1);
        f2 = cost_f2_bespoke(eps_f2, config.bespoke_log_base);
        f3 = cost_f3_bespoke(eps_f3, config.bespoke_log_base);
    } else {
        f1 = cost_f_unstructured(FMatrix::f1, lat.n, eps_f1);
        f2 = cost_f_unstructured(FMatrix::f2, lat.n, eps_f2);
        f3 = cost_f_unstructured(FMatrix::f3, lat.n, eps_f3);
    }
    const BlockEncodingCost sf1 = combine_sum(s, f1, "S+F1");
    const double beta = std::max({sf1.subnormalization, f2.subnormalization, f3.subnormalization});
    const long long a = std::max({sf1.persistent_ancillae, f2.persistent_ancillae, f3.persistent_ancillae});
    est.carleman = cost_carleman(beta, a, ceil_log2(lat.nq), 3, 3, config.carleman_convention);

    const double t_s = s.t_gate_count();
    const double t_f1 = f1.t_gate_count();
    const double t_f2 = f2.t_gate_count();
    const double t_f3 = f3.t_gate_count();
    est.f_encoding_t_gates = t_f1 + t_f2 + t_f3;
    est.carleman_t_gates = t_s + est.f_encoding_t_gates;

    if (config.drag_override) {
        est.drag = *config.drag_override;
    } else {
        est.drag = drag_placeholder(inst, lat);
        est.diagnostics.push_back("drag estimate taken from the correlation placeholder");
    }
    est.bounds = amplitude_bounds(lat, body_radius(inst), config.epsilon_rho, est.drag, config.relative_error);
    if (!std::isfinite(est.bounds.grover_iterates)) {
        throw NumericalError("drag estimate must be positive to size amplitude estimation");
    }
    est.eps_tilde = est.drag * config.relative_error / (2.0 * est.bounds.v_upper * est.bounds.f_upper);
    if (est.eps_tilde >= M_PI / 4.0) {
        est.qae_repetitions = 1.0;
        est.grover_iterates = 0.0;
        est.diagnostics.push_back("target accuracy needs no Grover iterates; one state preparation remains");
    } else {
        const QaeCounts q = qae_counts(est.eps_tilde, config.delta, config.qae_rounding);
        est.qae_repetitions = static_cast<double>(q.repetitions);
        est.grover_iterates = static_cast<double>(q.grover_iterates);
    }
    est.state_preparations = 1.0 + 2.0 * est.grover_iterates;

    const double m_steps = std::ceil(static_cast<double>(lat.T) / est.h);
    const long long k = config.taylor_k > 0 ? config.taylor_k : taylor_order(m_steps, eps_solver);
    const long long p = config.padding_p >= 0 ? config.padding_p : static_cast<long long>(m_steps);
    est.history = ode_history_model(lat.total_dimension, est.h, static_cast<double>(lat.T), k, p);

    QlsaInputs in;
    in.block_rows = static_cast<double>(est.history.block_rows);
    in.c_max = config.c_max;
    in.eps_solver = eps_solver;
    in.m = static_cast<double>(est.history.m);
    in.k = static_cast<double>(k);
    in.p = static_cast<double>(p);
    est.qlsa_calls = qlsa_call_count(config.qlsa, in);

    est.layers = {
        {"qae_repetitions", est.qae_repetitions, 0.0, false},
        {"state_preparations_per_circuit", est.state_preparations, 0.0, false},
        {"qlsa_calls", est.qlsa_calls, 0.0, false},
        {"carleman_block_encoding", 1.0, est.carleman_t_gates, false},
        {"S", 1.0, t_s, true},
        {"F1", 1.0, t_f1, true},
        {"F2", 1.0, t_f2, true},
        {"F3", 1.0, t_f3, true},
    };
    est.t_gate_total = est.recompose();
    est.logical_qubits = est.carleman.qubits + ceil_log2(static_cast<double>(est.history.block_rows)) + 1;
    return est;
}

PowerLawFit fit_power_law(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 2) {
        throw std::invalid_argument("power-law fit needs at least two points");
    }
    const double n = static_cast<double>(points.size());
    double sx = 0.0;
    double sy = 0.0;
    for (const auto& [x, y] : points) {
        if (!(x > 0.0) || !(y > 0.0)) {
            throw std::invalid_argument("power-law fit needs positive data");
        }
        sx += std::log(x);
        sy += std::log(y);
    }
    const double mx = sx / n;
    const double my = sy / n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (const auto& [x, y] : points) {
        const double dx = std::log(x) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(y) - my);
    }
    if (!(sxx > 0.0)) {
        throw std::invalid_argument("power-law fit needs distinct abscissae");
    }
    PowerLawFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss = 0.0;
    for (const auto& [x, y] : points) {
        const double r = std::log(y) - (fit.intercept + fit.slope * std::log(x));
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / n);
    return fit;
}

const char* to_string(Encoding e) { return e == Encoding::bespoke ? "bespoke" : "unstructured"; }

}  // namespace clbm
