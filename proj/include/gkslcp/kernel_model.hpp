// Two-time operator functions and the GKSL-like memory kernel
//
//   L_{t,t'} rho = g^2 ( -i[H'_{t,t'}, rho] + sum_i L^i rho L^i^dagger - 1/2 {L^i^dagger L^i, rho} )
//               = (B_{t,t'} - Z_{t,t'}) rho
//   B rho = sum_i L^i rho L^i^dagger,   Z rho = W rho + rho W^dagger,
//   W = i H' + 1/2 sum_i L^i^dagger L^i
//
// Every kernel is held in separable form: a finite sum of (scalar profile) x (constant operator).

#pragma once

#include <vector>

#include "gkslcp/operator_core.hpp"
#include "gkslcp/scalar_profile.hpp"
#include "gkslcp/time_grid.hpp"

namespace gkslcp {

struct OperatorTerm {
    ScalarProfile profile;
    Matrix op;
};

/// A(t, t') = sum_k profile_k(t, t') * op_k
class TwoTimeOperatorFunction {
public:
    explicit TwoTimeOperatorFunction(int dim);
    TwoTimeOperatorFunction(int dim, std::vector<OperatorTerm> terms);

    TwoTimeOperatorFunction& add(ScalarProfile profile, Matrix op);

    Matrix operator()(double t, double tp) const;

    int dim() const { return dim_; }
    const std::vector<OperatorTerm>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }
    bool is_convolution() const;

    TwoTimeOperatorFunction adjoint() const;
    TwoTimeOperatorFunction scaled(cplx factor) const;

private:
    int dim_;
    std::vector<OperatorTerm> terms_;
};

TwoTimeOperatorFunction operator+(const TwoTimeOperatorFunction& a, const TwoTimeOperatorFunction& b);
/// Pointwise product A(t,t') B(t,t'), expanded term by term.
TwoTimeOperatorFunction operator*(const TwoTimeOperatorFunction& a, const TwoTimeOperatorFunction& b);

struct SuperopTerm {
    ScalarProfile profile;
    Superop op;
};

/// General two-time superoperator kernel K_{t,t'} = sum_k profile_k(t,t') * S_k.
/// GKSL kernels, their B and Z parts, and non-GKSL kernels (Redfield) all compile to this.
class SuperopKernel {
public:
    explicit SuperopKernel(int dim) : dim_(dim) {}
    SuperopKernel(int dim, std::vector<SuperopTerm> terms);

    SuperopKernel& add(ScalarProfile profile, Superop op);

    Superop operator()(double t, double tp) const;

    int dim() const { return dim_; }
    const std::vector<SuperopTerm>& terms() const { return terms_; }
    bool is_convolution() const;

    SuperopKernel scaled(cplx factor) const;

private:
    int dim_;
    std::vector<SuperopTerm> terms_;
};

SuperopKernel operator+(const SuperopKernel& a, const SuperopKernel& b);

class GKSLKernel {
public:
    GKSLKernel(TwoTimeOperatorFunction hermitian, std::vector<TwoTimeOperatorFunction> lindblad,
               double coupling_g = 1.0);

    static GKSLKernel zero(int dim);

    int dim() const { return hermitian_.dim(); }
    const TwoTimeOperatorFunction& hermitian() const { return hermitian_; }
    const std::vector<TwoTimeOperatorFunction>& lindblad() const { return lindblad_; }
    double coupling_g() const { return g_; }

    GKSLKernel with_coupling(double g) const;

    /// Every Lindblad part is a single c-number profile times a constant operator.
    bool is_c_number() const;
    /// Every profile depends on t - t' only.
    bool is_convolution() const;

    /// Largest max|H' - H'^dagger| over an 8x8 sample of the triangle 0 <= t' <= t <= horizon.
    double hermitian_defect(double horizon) const;

private:
    TwoTimeOperatorFunction hermitian_;
    std::vector<TwoTimeOperatorFunction> lindblad_;
    double g_;
};

/// Superoperator matrix of L_{t,t'} (g^2 included). Throws std::invalid_argument if t' > t.
Superop eval_kernel_superop(const GKSLKernel& k, double t, double tp);

/// The full kernel L = B - Z in separable superoperator form (g^2 included).
SuperopKernel kernel_superop(const GKSLKernel& k);

struct KernelSplit {
    SuperopKernel b_part;          // B_{t,t'}
    TwoTimeOperatorFunction w_op;  // W_{t,t'}
    /// rho -> W rho + rho W^dagger
    SuperopKernel z_part() const;
};

KernelSplit split_kernel(const GKSLKernel& k);

/// Superoperator kernel of rho -> W rho + rho W^dagger.
SuperopKernel z_superop(const TwoTimeOperatorFunction& w);

/// gamma_i(t_m) = g^2 int_0^{t_m} |h_i(t_m, t')|^2 dt' (trapezoid on the grid) for a c-number
/// kernel L^i_{t,t'} = h_i(t,t') L^i. Row i, column m. Throws if the kernel is not c-number.
Eigen::MatrixXd effective_damping_rates(const GKSLKernel& k, const TimeGrid& grid);

/// Composite trapezoid of f(t, s) over the grid nodes s = t_0 .. t_m.
template <typename F>
auto trapezoid_to_node(const F& f, const TimeGrid& grid, int m) {
    const double h = grid.step();
    using R = decltype(f(0.0));
    if (m == 0) return R(0.0);
    R acc = 0.5 * (f(grid.node(0)) + f(grid.node(m)));
    for (int j = 1; j < m; ++j) acc += f(grid.node(j));
    return R(acc * h);
}

}  // namespace gkslcp
