// Quantum dynamical maps of the local and non-local GKSL-like equations
//
//   local:     d/dt Lambda_t = int_0^t K_{t,t'} dt'  Lambda_t      (ODE, classical RK4)
//   nonlocal:  d/dt Lambda_t = int_0^t K_{t,t'} Lambda_{t'} dt'    (Volterra, trapezoid PECE)
//
// Quadrature is composite trapezoid throughout. The RK4 solvers need the effective generator at
// half steps, so they integrate the kernel on the grid refined by two; every solver that is
// compared against another one uses the same quadrature nodes.

#pragma once

#include <string>
#include <vector>

#include "gkslcp/kernel_model.hpp"
#include "gkslcp/time_grid.hpp"

namespace gkslcp {

enum class Family {
    local_full,
    local_B,
    local_Z,
    nonlocal_full,
    nonlocal_B,
    nonlocal_Z,
    series_local_B,
    series_nonlocal_B,
    series_local_full,
    weak_local_Z,
    weak_nonlocal_full,
};

std::string to_string(Family f);
Family family_from_string(const std::string& s);
/// Families whose generator is the full (traceless) kernel. The weak-coupling localized equation is
/// not among them: its -Z part acts on Lambda_t and its B part on Lambda_t', so the trace drifts at O(g^4).
bool is_trace_preserving_family(Family f);

struct MapTrajectory {
    TimeGrid grid;
    Family family{Family::local_full};
    std::vector<Superop> maps;       // one per node, maps[0] = identity
    std::vector<double> tail_norms;  // series families: ||order-N term|| per node
    std::vector<std::string> warnings;

    int dim() const { return operator_dim(maps.front()); }
};

struct OrderedExponential {
    TimeGrid grid;
    std::vector<Matrix> v;      // V_{t_m}
    std::vector<Matrix> v_inv;  // V_{t_m}^{-1}, integrated from its own equation
};

/// G_t = int_0^{t_m} K_{t_m,t'} dt' by composite trapezoid over the grid nodes t_0..t_m.
Superop effective_generator(const SuperopKernel& k, const TimeGrid& grid, int node);
Superop effective_generator(const GKSLKernel& k, const TimeGrid& grid, int node);

/// Local equation with an arbitrary superoperator kernel; `tag` labels the result.
MapTrajectory solve_local(const SuperopKernel& k, const TimeGrid& grid, Family tag);
MapTrajectory solve_local(const GKSLKernel& k, const TimeGrid& grid);
MapTrajectory solve_local_B(const GKSLKernel& k, const TimeGrid& grid);
MapTrajectory solve_local_Z(const GKSLKernel& k, const TimeGrid& grid);

enum class KernelPart { full, B, Z };

MapTrajectory solve_nonlocal(const SuperopKernel& k, const TimeGrid& grid, Family tag);
MapTrajectory solve_nonlocal(const GKSLKernel& k, const TimeGrid& grid, KernelPart part = KernelPart::full);

enum class SeriesPattern {
    local,     // t2 <= t1, t3 <= t1, t4 <= t3, ...
    nonlocal,  // t_{2n} <= t_{2n-1} <= ... <= t1
};

/// Truncated iterated-integral series for the B-only map, orders 0..order.
/// tail_norms[m] holds ||order-th term at t_m||_F.
MapTrajectory series_B(const GKSLKernel& k, const TimeGrid& grid, int order, SeriesPattern pattern);

/// V_t (sum of local-pattern series with the transformed operators V^{-1} L V) V_t^dagger.
MapTrajectory series_local_full(const GKSLKernel& k, const TimeGrid& grid, int order);

/// rho + sum_{n=1}^{order} t^n/n! L^n rho (L^dagger)^n, the exact map of d/dt rho = L rho L^dagger.
Matrix sandwich_exponential_series(const Matrix& l, double t, const Matrix& rho, int order);

/// dV/dt = -(int_0^t W_{t,s} ds) V,  dV^{-1}/dt = V^{-1} (int_0^t W_{t,s} ds), RK4.
OrderedExponential ordered_exponential(const TwoTimeOperatorFunction& w, const TimeGrid& grid);
OrderedExponential ordered_exponential(const GKSLKernel& k, const TimeGrid& grid);

/// rho -> V_t rho V_t^dagger at every node.
MapTrajectory weak_local_Z(const GKSLKernel& k, const TimeGrid& grid);

/// Lambda = V Lambda_hat V^dagger with Lambda_hat driven by V_t^{-1} L^i V_t (local B equation).
MapTrajectory solve_local_full_via_transform(const GKSLKernel& k, const TimeGrid& grid);

/// Weak-coupling localized non-local equation: W acts on Lambda_t, B keeps Lambda_{t'}.
/// Solved as Lambda = V Lambda_bar V^dagger with Lambda_bar driven by V_t^{-1} L^i_{t,t'} V_{t'}.
MapTrajectory weak_coupling_localize(const GKSLKernel& k, const TimeGrid& grid);

/// Same equation integrated directly (memory B term plus local -Z_eff term); cross-check route.
MapTrajectory weak_coupling_direct(const GKSLKernel& k, const TimeGrid& grid);

/// V_{t_m}^{-1} L^i_{t_m,t_j} V_{t_j}
Matrix transformed_lindblad(const GKSLKernel& k, const OrderedExponential& oe, std::size_t i, int m, int j);

/// sup over nodes of ||a_m - b_m||_F; the grids must match.
double sup_distance(const MapTrajectory& a, const MapTrajectory& b);

}  // namespace gkslcp
