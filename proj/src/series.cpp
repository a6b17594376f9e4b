// Iterated-integral series for the B-only maps, evaluated by recursive quadrature on the grid.
#include <cmath>

#include "gkslcp/propagators.hpp"
#include "propagators_internal.hpp"

namespace gkslcp {

namespace {

/// int_0^{t_m} f(s) ds for every node, cumulative trapezoid.
std::vector<Superop> cumulative_trapezoid(const std::vector<Superop>& f, double h) {
    std::vector<Superop> out(f.size(), Superop::Zero(f.front().rows(), f.front().cols()));
    for (std::size_t m = 1; m < f.size(); ++m) out[m] = out[m - 1] + (0.5 * h) * (f[m - 1] + f[m]);
    return out;
}

/// Local nesting: term_n(t) = int_0^t dt1 G_{t1} term_{n-1}(t1), G_{t1} = int_0^{t1} B_{t1,t2} dt2.
std::vector<Superop> next_local_term(const std::vector<Superop>& gen, const std::vector<Superop>& prev, double h) {
    std::vector<Superop> integrand(prev.size());
    for (std::size_t m = 0; m < prev.size(); ++m) integrand[m] = gen[m] * prev[m];
    return cumulative_trapezoid(integrand, h);
}

/// Non-local nesting: term_n(t) = int_0^t dt1 int_0^{t1} dt2 B_{t1,t2} term_{n-1}(t2).
std::vector<Superop> next_nonlocal_term(const SuperopKernel& b, const TimeGrid& grid,
                                        const std::vector<Superop>& prev) {
    const double h = grid.step();
    const Eigen::Index big = prev.front().rows();
    std::vector<Superop> inner(prev.size(), Superop::Zero(big, big));
    std::vector<Superop> partial(b.terms().size(), Superop::Zero(big, big));
    for (int m = 1; m < grid.size(); ++m) {
        const double t = grid.node(m);
        for (auto& p : partial) p.setZero();
        for (int j = 0; j <= m; ++j) {
            const double w = (j == 0 || j == m) ? 0.5 * h : h;
            const Superop& y = prev[static_cast<std::size_t>(j)];
            for (std::size_t q = 0; q < b.terms().size(); ++q) {
                partial[q] += (w * b.terms()[q].profile(t, grid.node(j))) * y;
            }
        }
        Superop acc = Superop::Zero(big, big);
        for (std::size_t q = 0; q < b.terms().size(); ++q) acc.noalias() += b.terms()[q].op * partial[q];
        inner[static_cast<std::size_t>(m)] = std::move(acc);
    }
    return cumulative_trapezoid(inner, h);
}

void accumulate(std::vector<Superop>& sum, const std::vector<Superop>& term) {
    for (std::size_t m = 0; m < sum.size(); ++m) sum[m] += term[m];
}

void record_tail(MapTrajectory& traj, const std::vector<Superop>& last_term) {
    traj.tail_norms.clear();
    for (const auto& t : last_term) traj.tail_norms.push_back(t.norm());
}

}  // namespace

MapTrajectory series_B(const GKSLKernel& k, const TimeGrid& grid, int order, SeriesPattern pattern) {
    if (order < 0) throw std::invalid_argument("series order must be >= 0");
    const SuperopKernel b = split_kernel(k).b_part;
    const double h = grid.step();
    const int d = k.dim();
    std::vector<Superop> term(static_cast<std::size_t>(grid.size()), identity_superop(d));
    std::vector<Superop> sum = term;

    std::vector<Superop> gen;
    if (pattern == SeriesPattern::local) gen = detail::generator_table(b, grid);

    for (int n = 1; n <= order; ++n) {
        term = pattern == SeriesPattern::local ? next_local_term(gen, term, h) : next_nonlocal_term(b, grid, term);
        accumulate(sum, term);
    }
    MapTrajectory traj{grid, pattern == SeriesPattern::local ? Family::series_local_B : Family::series_nonlocal_B,
                       std::move(sum), {}, {}};
    record_tail(traj, term);
    return traj;
}

MapTrajectory series_local_full(const GKSLKernel& k, const TimeGrid& grid, int order) {
    if (order < 0) throw std::invalid_argument("series order must be >= 0");
    const KernelSplit split = split_kernel(k);
    const OrderedExponential oe = ordered_exponential(split.w_op, grid);
    const auto gen_b = detail::generator_table(split.b_part, grid);
    std::vector<Superop> gen_hat(gen_b.size());
    for (std::size_t m = 0; m < gen_b.size(); ++m) {
        gen_hat[m] = conjugation_superop(oe.v_inv[m]) * gen_b[m] * conjugation_superop(oe.v[m]);
    }
    const int d = k.dim();
    std::vector<Superop> term(static_cast<std::size_t>(grid.size()), identity_superop(d));
    std::vector<Superop> sum = term;
    for (int n = 1; n <= order; ++n) {
        term = next_local_term(gen_hat, term, grid.step());
        accumulate(sum, term);
    }
    MapTrajectory traj{grid, Family::series_local_full, {}, {}, {}};
    for (std::size_t m = 0; m < sum.size(); ++m) traj.maps.push_back(conjugation_superop(oe.v[m]) * sum[m]);
    record_tail(traj, term);
    return traj;
}

Matrix sandwich_exponential_series(const Matrix& l, double t, const Matrix& rho, int order) {
    if (order < 0) throw std::invalid_argument("series order must be >= 0");
    if (l.rows() != rho.rows()) throw std::invalid_argument("operator dimensions differ");
    Matrix term = rho;
    Matrix out = rho;
    for (int n = 1; n <= order; ++n) {
        term = (t / n) * (l * term * l.adjoint());
        out += term;
    }
    return out;
}

}  // namespace gkslcp
