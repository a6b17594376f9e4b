// Shared fixtures for the unit tests: small kernels with known closed forms.
#pragma once

#include <cmath>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "gkslcp/kernel_model.hpp"
#include "gkslcp/operator_core.hpp"

namespace gkslcp::testing {

inline GKSLKernel constant_lindblad(const Matrix& l, double g = 1.0) {
    TwoTimeOperatorFunction lf(static_cast<int>(l.rows()));
    lf.add(ScalarProfile::constant(1.0), l);
    return GKSLKernel(TwoTimeOperatorFunction(static_cast<int>(l.rows())), {lf}, g);
}

/// L_{t,t'} = exp(-kappa (t - t')) sigma_z
inline GKSLKernel dephasing(double kappa = 1.0, double g = 1.0) {
    TwoTimeOperatorFunction lf(2);
    lf.add(ScalarProfile::exponential_decay(kappa), ops::sigma_z());
    return GKSLKernel(TwoTimeOperatorFunction(2), {lf}, g);
}

/// Hamiltonian-only kernel H'_{t,t'} = profile * h.
inline GKSLKernel hamiltonian_only(const Matrix& h, const ScalarProfile& p = ScalarProfile::constant(1.0)) {
    TwoTimeOperatorFunction hf(static_cast<int>(h.rows()));
    hf.add(p, h);
    return GKSLKernel(hf, {}, 1.0);
}

/// Kernel with W = w * identity: H' = Im(w) 1, L = sqrt(2 Re w) 1 (Re w >= 0).
inline GKSLKernel scalar_w(cplx w, int d = 2) {
    TwoTimeOperatorFunction hf(d);
    if (w.imag() != 0.0) hf.add(ScalarProfile::constant(w.imag()), ops::identity(d));
    std::vector<TwoTimeOperatorFunction> ls;
    if (w.real() > 0.0) {
        TwoTimeOperatorFunction lf(d);
        lf.add(ScalarProfile::constant(std::sqrt(2.0 * w.real())), ops::identity(d));
        ls.push_back(lf);
    }
    return GKSLKernel(hf, ls, 1.0);
}

/// Random kernel with smooth profiles, d x d.
inline GKSLKernel random_kernel(int d, std::uint64_t seed, double g = 1.0) {
    std::mt19937_64 rng(seed);
    TwoTimeOperatorFunction hf(d);
    hf.add(ScalarProfile::exponential_decay(0.7), 0.5 * random::hermitian(d, rng));
    TwoTimeOperatorFunction l1(d);
    l1.add(ScalarProfile::constant(1.0), 0.4 * random::complex_normal(d, d, rng));
    l1.add(ScalarProfile::oscillatory(1.3), 0.3 * random::complex_normal(d, d, rng));
    TwoTimeOperatorFunction l2(d);
    l2.add(ScalarProfile::gaussian(1.1), 0.4 * random::complex_normal(d, d, rng));
    return GKSLKernel(hf, {l1, l2}, g);
}

inline Superop expm(const Superop& a) { return a.exp(); }

inline double max_abs(const Matrix& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

}  // namespace gkslcp::testing
