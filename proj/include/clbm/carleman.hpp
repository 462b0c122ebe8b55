#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "clbm/lattice.hpp"

namespace clbm {

enum class Variant { dense, sparse };

class CapacityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Weight in the scalar type used for block evaluation.
template <class T>
T weight_as(int i);
template <>
inline double weight_as<double>(int i) { return weight(i); }
template <>
inline Rational weight_as<Rational>(int i) { return weight_exact(i); }

// Per-node collision blocks. Every nonzero of F1/F2/F3 couples variables on a single node,
// and the block is the same at every node.
template <class T>
T f1_local(int i, int j, const T& inv_tau) {
    const T w = weight_as<T>(i);
    return (T(i == j ? -1 : 0) + w + T(3) * w * T(cdot(i, j))) * inv_tau;
}

template <class T>
T f2_local_dense(int i, int j, int k, const T& inv_tau) {
    const T w = weight_as<T>(i);
    return (T(9) * w * T(cdot(i, j) * cdot(i, k)) - T(3) * w * T(cdot(j, k))) * inv_tau;
}

// Canonical columns only (j <= k); repeated factors carry the summed coefficient.
template <class T>
T f2_local_sparse(int i, int j, int k, const T& inv_tau) {
    if (j > k) {
        return T(0);
    }
    const T w = weight_as<T>(i);
    const T t3 = T(9) * w * inv_tau;
    const T t4 = T(-3) * w * inv_tau;
    const int aj = cdot(i, j);
    const int ak = cdot(i, k);
    if (j == k) {
        return t3 * T(aj * aj) + t4 * T(cdot(j, j));
    }
    return t3 * T(2 * aj * ak) + t4 * T(2 * cdot(j, k));
}

// j is the factor contributed by rho.
template <class T>
T f3_local_dense(int i, int j, int k, int l, const T& inv_tau) {
    (void)j;
    const T w = weight_as<T>(i);
    return (T(-9) * w * T(cdot(i, k) * cdot(i, l)) + T(3) * w * T(cdot(k, l))) * inv_tau / T(2);
}

template <class T>
T f3_local_sparse(int i, int j, int k, int l, const T& inv_tau) {
    if (j > k || k > l) {
        return T(0);
    }
    const T w = weight_as<T>(i);
    const T t3 = T(-9) * w * inv_tau / T(2);
    const T t4 = T(3) * w * inv_tau / T(2);
    const int aj = cdot(i, j);
    const int ak = cdot(i, k);
    const int al = cdot(i, l);
    if (j == k && k == l) {
        return t3 * T(aj * aj) + t4 * T(cdot(j, j));
    }
    if (j == k) {
        return t3 * T(aj * aj + 2 * aj * al) + t4 * T(cdot(j, j) + 2 * cdot(j, l));
    }
    if (k == l) {
        return t3 * T(ak * ak + 2 * aj * ak) + t4 * T(cdot(k, k) + 2 * cdot(j, k));
    }
    return t3 * T(2 * (aj * ak + aj * al + ak * al)) + t4 * T(2 * (cdot(j, k) + cdot(j, l) + cdot(k, l)));
}

// Entry functions on flat first-order indices (l1_index layout). Factors on different nodes give 0.
double s_entry(const GridSpec& g, const std::vector<std::uint8_t>& mask, long long mu_r, long long mu_c);
double f1_entry(const GridSpec& g, long long mu_r, long long mu_c, double tau);
double f2_entry(const GridSpec& g, long long mu_r, long long mu_b, long long mu_c, double tau, Variant variant);
double f3_entry(const GridSpec& g, long long mu_r, long long mu_b, long long mu_c, long long mu_d, double tau,
                Variant variant);

struct SparseTriples {
    long long n_rows = 0;
    long long n_cols = 0;
    std::vector<long long> rows;
    std::vector<long long> cols;
    std::vector<double> values;

    void push(long long r, long long c, double v);
    // Sort by (row, col), merge duplicates, drop exact zeros.
    void canonicalize();
    std::size_t nnz() const { return values.size(); }
    double norm_inf() const;
    double norm_one() const;
};

// Tensor columns use Kronecker order: (mu_b, mu_c) -> mu_b * nQ + mu_c, and the cubic analogue.
inline long long kron_index(long long nq, long long a, long long b) { return a * nq + b; }
inline long long kron_index(long long nq, long long a, long long b, long long c) { return (a * nq + b) * nq + c; }

struct FirstOrderBlocks {
    GridSpec grid;
    double tau = 0.6;
    Variant variant = Variant::dense;
    SparseTriples S;
    SparseTriples F1;
    SparseTriples F2;
    SparseTriples F3;
};

constexpr long long default_assembly_cap = 2048;

FirstOrderBlocks assemble_first_order(const GridSpec& g, const std::vector<std::uint8_t>& mask, double tau,
                                      Variant variant, long long cap = default_assembly_cap);

struct BlockCensus {
    long long nonzeros = 0;
    long long unique_values = 0;
};

// Exact-rational census of one per-node block.
BlockCensus census_f1(const Rational& tau);
BlockCensus census_f2(const Rational& tau, Variant variant);
BlockCensus census_f3(const Rational& tau, Variant variant);

struct PhiVector {
    std::vector<double> s1;
    std::vector<double> s2;
    std::vector<double> s3;
};

constexpr long long explicit_phi_cap = 54;

class CarlemanOperator {
public:
    CarlemanOperator(const GridSpec& g, std::vector<std::uint8_t> mask, double tau, Variant variant = Variant::dense);

    const GridSpec& grid() const { return grid_; }
    const std::vector<std::uint8_t>& mask() const { return mask_; }
    double tau() const { return tau_; }
    Variant variant() const { return variant_; }
    long long nq() const { return nq_; }

    // y = S x
    void apply_streaming(const double* x, double* y) const;
    // y = F1 x
    void apply_f1(const double* x, double* y) const;
    // y = (S + F1) x
    void apply_first(const double* x, double* y) const;
    // y = F2 v with v of length (nQ)^2
    void apply_f2(const double* v, double* y) const;
    // y = F3 v with v of length (nQ)^3
    void apply_f3(const double* v, double* y) const;

    // (S + F1) f + F2 f(x)f + F3 f(x)f(x)f, evaluated per node without forming tensor powers.
    std::vector<double> nonlinear_rhs(const std::vector<double>& f) const;

    // Sector 1 of A phi(f) where phi(f) = (f, f(x)f, f(x)f(x)f) is generated lazily entry by entry.
    std::vector<double> sector1_lazy(const std::vector<double>& f) const;

    PhiVector phi_from(const std::vector<double>& f) const;
    PhiVector apply(const PhiVector& phi) const;

    double f2_local(int i, int j, int k) const { return f2_[(i * Q + j) * Q + k]; }
    double f3_local(int i, int j, int k, int l) const { return f3_[((i * Q + j) * Q + k) * Q + l]; }

private:
    void check_explicit() const;

    GridSpec grid_;
    std::vector<std::uint8_t> mask_;
    double tau_;
    Variant variant_;
    long long nq_;
    // For each row: the +1 source column of S or -1 when the row of S is zero.
    std::vector<long long> stream_source_;
    std::array<double, Q * Q> f1_{};
    std::vector<double> f2_;
    std::vector<double> f3_;
    struct NonzeroEntry {
        int i, j, k, l;
        double v;
    };
    std::vector<NonzeroEntry> nz2_;
    std::vector<NonzeroEntry> nz3_;
};

struct NormReport {
    double tau = 0.6;
    double s_inf = 2.0;
    double s_one = 2.0;
    double f1_inf = 0.0;
    double f1_one = 0.0;
    double f2_inf = 0.0;
    double f2_one = 0.0;
    double f3_inf = 0.0;
    double f3_one = 0.0;
    // Norms times tau, in the order f1_inf, f1_one, f2_inf, f2_one, f3_inf, f3_one.
    std::array<double, 6> coefficients{};
    // floor(coefficient) + 1
    std::array<long long, 6> rounded_up{};
    double bound_one = 0.0;
    double bound_inf = 0.0;
    double spectral_bound = 0.0;
};

NormReport norm_report(double tau);
void validate_tau(double tau);

struct ConvergenceWindow {
    double tau = 0.6;
    double phi0_inf = 0.0;
    double t_c_lower = 0.0;
    double t_c_upper = 0.0;
    double t_c = 0.0;
    double beta0 = 0.0;
    double f1_tilde = 0.0;
    double f2_tilde = 0.0;

    // Error envelope for truncation order K.
    double envelope(double t, int K) const;
};

ConvergenceWindow convergence_window(double phi0_inf, double tau);

struct Trajectory {
    std::vector<double> times;
    std::vector<std::vector<double>> sector1;
};

// Classical RK4 on d phi / dt = A phi (explicit phi storage, nQ <= 54).
Trajectory integrate_truncated(const CarlemanOperator& op, const PhiVector& phi0, double t_end, double step);
// Classical RK4 on df/dt = nonlinear_rhs(f).
Trajectory integrate_nonlinear(const CarlemanOperator& op, const std::vector<double>& f0, double t_end, double step);

}  // namespace clbm
