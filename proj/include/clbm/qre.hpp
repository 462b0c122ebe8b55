#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "clbm/instances.hpp"

namespace clbm {

enum class LogBase { two, natural };

struct BlockEncodingCost {
    std::string label;
    // Reference subnormalization of each construction.
    double subnormalization = 1.0;
    long long clean_ancillae = 0;
    long long persistent_ancillae = 0;
    double target_error = 0.0;
    std::function<double(double)> t_gates;

    double t_gate_count() const { return t_gates(target_error); }
};

BlockEncodingCost cost_f1_bespoke(double eps);
BlockEncodingCost cost_f2_bespoke(double eps, LogBase base = LogBase::two);
BlockEncodingCost cost_f3_bespoke(double eps, LogBase base = LogBase::two);

enum class FMatrix { f1, f2, f3 };
// n is the number of grid nodes; it may exceed 64-bit range.
BlockEncodingCost cost_f_unstructured(FMatrix matrix, double n, double eps);

// ceil(log2(x)) for x >= 1, exact below 2^53.
long long ceil_log2(double x);

enum class StreamingGeometry { sphere, prisms };

struct StreamingCost {
    double oracle = 0.0;       // O_N
    double shift = 0.0;        // S_shift
    double s_in_out = 0.0;     // S^1 (equal to S^2)
    double adder_bits = 0.0;   // width of the constant adder
    double block_encoding = 0.0;  // 2 O_N + S_shift + S^1 + S^2
};

double streaming_oracle_cost(StreamingGeometry geometry, long long n_p, long long n_prisms = 1);
double streaming_shift_cost(long long n_p);
double streaming_in_out_cost(double n);
StreamingCost cost_streaming(StreamingGeometry geometry, double n, long long n_p, long long n_prisms = 1);
// n_p = max ceil(log2 n_axis).
long long position_bits(double nx, double ny, double nz);
// Streaming matrix as a (1, 1, 0) block encoding.
BlockEncodingCost cost_s_block_encoding(StreamingGeometry geometry, double n, long long n_p, long long n_prisms = 1);

// Sum of two block encodings through a Hadamard state-preparation pair.
BlockEncodingCost combine_sum(const BlockEncodingCost& a, const BlockEncodingCost& b, const std::string& label);

enum class CarlemanConvention { padded, tight };

struct CarlemanCost {
    long long qubits = 0;
    double subnormalization = 0.0;
    long long ancillae = 0;  // a + 2 log2 T
};

CarlemanCost cost_carleman(double beta, long long a, long long n_qubits_base, int truncation = 3, int blocks = 3,
                           CarlemanConvention convention = CarlemanConvention::padded);

double cost_adder(long long n_bits);

struct AmplitudeBounds {
    double f_lower = 0.0;
    double f_upper = 0.0;
    double phi_min = 0.0;
    double phi_max = 0.0;
    double v_upper = 0.0;
    double t_tilde = 0.0;
    double C = 0.0;
    // pi ||v|| ||f|| / (4 F eps) with ||f|| at its upper bound.
    double grover_iterates = 0.0;
    // C n^(1/6) / (F eps)
    double grover_iterate_bound = 0.0;
    std::vector<std::string> diagnostics;
};

AmplitudeBounds amplitude_bounds(const LatticeInstance& inst, double body_radius, double eps_rho,
                                 double drag_estimate, double rel_err);

enum class QaeRounding { one_decimal_then_ceil, ceil };

struct QaeCounts {
    long long repetitions = 0;
    long long grover_iterates = 0;
    double repetitions_raw = 0.0;
};

QaeCounts qae_counts(double eps_tilde, double delta, QaeRounding rounding = QaeRounding::one_decimal_then_ceil);

struct HistoryCell {
    enum class Kind { identity, minus_identity, minus_ah };
    long long row = 0;
    long long col = 0;
    Kind kind = Kind::identity;
    int j = 0;  // Taylor index for minus_ah
};

struct HistoryModel {
    long long m = 0;
    long long k = 0;
    long long p = 0;
    long long block_rows = 0;
    double dimension = 0.0;
    std::vector<HistoryCell> pattern;  // empty above pattern_cap block rows
};

constexpr long long history_pattern_cap = 100000;

long long history_block_rows(long long m, long long k, long long p);
std::vector<HistoryCell> history_pattern(long long m, long long k, long long p);
// Text grid of the block pattern: "I", "-I", "-Ah", "-Ah/j" or "" per cell.
std::vector<std::vector<std::string>> render_history_pattern(long long m, long long k, long long p);
HistoryModel ode_history_model(double block_dim, double h, double T_lattice, long long k, long long p);

// Smallest k with m / (k+1)! <= eps.
long long taylor_order(double m, double eps);

struct HistorySolution {
    std::vector<Eigen::VectorXd> blocks;
};

constexpr long long history_solve_cap = 100000;

HistorySolution build_and_solve_history_small(const Eigen::MatrixXd& A, const Eigen::VectorXd& phi0,
                                              const Eigen::VectorXd& b, double h, long long m, long long k,
                                              long long p);

struct QlsaInputs {
    double block_rows = 0.0;
    double c_max = 1.0;
    double eps_solver = 0.0;
    double m = 0.0;
    double k = 0.0;
    double p = 0.0;
};

struct QlsaModel {
    std::string id;
    std::function<double(const QlsaInputs&)> calls;
};

// calls = c0 * kappa * ln(1 / eps_solver), kappa = block_rows * C_max.
QlsaModel default_qlsa_model(double c0 = 1.0);
double qlsa_call_count(const QlsaModel& model, const QlsaInputs& in);

enum class Encoding { bespoke, unstructured };

struct CostModelConfig {
    Encoding encoding = Encoding::bespoke;
    double tau = 0.6;
    double spectral_norm_A = 0.0;  // 0 selects the norm-report bound at tau
    double h = 0.0;                // 0 selects 1 / spectral_norm_A
    double spectral_abscissa = 0.0;
    double c_max = 1.0;
    double b_norm = 0.0;
    double epsilon_rho = 0.001;
    double relative_error = 0.01;
    double delta = 0.1;
    double error_budget = 0.01;
    // Relative weights for F1, F2, F3 and the linear solver.
    std::array<double, 4> allocation_weights{1.0, 1.0, 1.0, 1.0};
    long long taylor_k = 0;   // 0 selects taylor_order(m, eps_solver)
    long long padding_p = -1;  // -1 selects p = m
    LogBase bespoke_log_base = LogBase::two;
    QaeRounding qae_rounding = QaeRounding::one_decimal_then_ceil;
    CarlemanConvention carleman_convention = CarlemanConvention::padded;
    long long hull_prisms = 1;
    std::optional<double> drag_override;  // lattice-unit drag
    QlsaModel qlsa = default_qlsa_model();

    // Errors for F1, F2, F3 and the solver.
    std::array<double, 4> allocations() const;
};

struct Layer {
    std::string name;
    double calls = 0.0;
    double t_gates_each = 0.0;
    // Leaf layers are summed; the others multiply.
    bool leaf = false;
};

struct ResourceEstimate {
    std::string instance_id;
    std::string model_id;
    Encoding encoding = Encoding::bespoke;
    double reynolds = 0.0;
    long long logical_qubits = 0;
    double t_gate_total = 0.0;
    // QAE repetitions, state preparations per circuit, solver calls, one Carleman encoding per call.
    double qae_repetitions = 0.0;
    double state_preparations = 0.0;
    double grover_iterates = 0.0;
    double qlsa_calls = 0.0;
    double carleman_t_gates = 0.0;
    double f_encoding_t_gates = 0.0;  // F1 + F2 + F3
    std::vector<Layer> layers;
    AmplitudeBounds bounds;
    HistoryModel history;
    CarlemanCost carleman;
    double eps_tilde = 0.0;
    double drag = 0.0;
    double spectral_norm_A = 0.0;
    double h = 0.0;
    std::array<double, 4> allocations{};
    std::vector<std::string> diagnostics;

    // Product of the non-leaf call counts times the summed leaf costs.
    double recompose() const;
};

// Radius used by the drag-vector bound; hulls use the radius of a disc with the frontal area.
double body_radius(const PhysicalInstance& inst);
// Drag in lattice units from a correlation: Clift-Gauvin for spheres, C_d = 1 for hulls.
double drag_placeholder(const PhysicalInstance& inst, const LatticeInstance& lat);

ResourceEstimate estimate_instance(const PhysicalInstance& inst, const LatticeInstance& lat,
                                   const CostModelConfig& config);

struct PowerLawFit {
    double slope = 0.0;
    double intercept = 0.0;  // natural-log intercept
    double residual = 0.0;   // RMS residual in natural log
};

PowerLawFit fit_power_law(const std::vector<std::pair<double, double>>& points);

const char* to_string(Encoding e);

}  // namespace clbm
