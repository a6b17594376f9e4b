// Solver building blocks shared by the propagator and series translation units.
#pragma once

#include <vector>

#include "gkslcp/kernel_model.hpp"
#include "gkslcp/time_grid.hpp"

namespace gkslcp::detail {

/// Effective generator at every node of `grid`.
std::vector<Superop> generator_table(const SuperopKernel& k, const TimeGrid& grid);

/// int_0^{t_m} W_{t_m,s} ds at every node of `grid`.
std::vector<Matrix> operator_integral_table(const TwoTimeOperatorFunction& w, const TimeGrid& grid);

/// Classical RK4 for d/dt Lambda = G_t Lambda; generators are given on the grid refined by two.
std::vector<Superop> rk4_march(const std::vector<Superop>& fine_generators, const TimeGrid& grid);

/// d/dt Lambda_{t_m} = left_m * sum_j w_j K(t_m, t_j) right_j Lambda_{t_j} + local_m Lambda_{t_m}
/// with trapezoid weights w_j; null transforms mean identity, null local means none.
struct MemoryProblem {
    const SuperopKernel* kernel{nullptr};
    const std::vector<Superop>* left{nullptr};
    const std::vector<Superop>* right{nullptr};
    const std::vector<Superop>* local{nullptr};
};

/// Second-order Volterra march: Euler predictor, one trapezoid corrector per step.
std::vector<Superop> volterra_march(const MemoryProblem& p, const TimeGrid& grid);

}  // namespace gkslcp::detail
