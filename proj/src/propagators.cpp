#include "gkslcp/propagators.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "propagators_internal.hpp"

namespace gkslcp {

namespace {

constexpr std::array<std::pair<Family, const char*>, 11> kFamilyNames{{
    {Family::local_full, "local-full"},
    {Family::local_B, "local-B"},
    {Family::local_Z, "local-Z"},
    {Family::nonlocal_full, "nonlocal-full"},
    {Family::nonlocal_B, "nonlocal-B"},
    {Family::nonlocal_Z, "nonlocal-Z"},
    {Family::series_local_B, "series-local-B"},
    {Family::series_nonlocal_B, "series-nonlocal-B"},
    {Family::series_local_full, "series-local-full"},
    {Family::weak_local_Z, "weak-local-Z"},
    {Family::weak_nonlocal_full, "weak-nonlocal-full"},
}};

void step_size_warning(MapTrajectory& traj, double h, double generator_norm) {
    if (h * generator_norm > 1.0) {
        std::ostringstream msg;
        msg << "step-size sanity: h * max||G_t|| = " << h * generator_norm << " > 1";
        traj.warnings.push_back(msg.str());
    }
}

}  // namespace

std::string to_string(Family f) {
    for (const auto& [fam, name] : kFamilyNames) {
        if (fam == f) return name;
    }
    return "unknown";
}

Family family_from_string(const std::string& s) {
    for (const auto& [fam, name] : kFamilyNames) {
        if (s == name) return fam;
    }
    throw std::invalid_argument("unknown trajectory family '" + s + "'");
}

bool is_trace_preserving_family(Family f) {
    switch (f) {
        case Family::local_full:
        case Family::nonlocal_full:
        case Family::series_local_full: return true;
        default: return false;
    }
}

// --- quadrature helpers ------------------------------------------------------

namespace detail {

std::vector<Superop> generator_table(const SuperopKernel& k, const TimeGrid& grid) {
    const Eigen::Index big = static_cast<Eigen::Index>(k.dim()) * k.dim();
    std::vector<Superop> table(static_cast<std::size_t>(grid.size()), Superop::Zero(big, big));
    for (int m = 1; m < grid.size(); ++m) table[static_cast<std::size_t>(m)] = effective_generator(k, grid, m);
    return table;
}

std::vector<Matrix> operator_integral_table(const TwoTimeOperatorFunction& w, const TimeGrid& grid) {
    const int d = w.dim();
    std::vector<Matrix> table(static_cast<std::size_t>(grid.size()), Matrix::Zero(d, d));
    for (int m = 1; m < grid.size(); ++m) {
        const double t = grid.node(m);
        Matrix acc = Matrix::Zero(d, d);
        for (const auto& term : w.terms()) {
            acc += trapezoid_to_node([&](double s) { return term.profile(t, s); }, grid, m) * term.op;
        }
        table[static_cast<std::size_t>(m)] = acc;
    }
    return table;
}

std::vector<Superop> rk4_march(const std::vector<Superop>& fine_generators, const TimeGrid& grid) {
    const double h = grid.step();
    const Eigen::Index big = fine_generators.front().rows();
    std::vector<Superop> maps;
    maps.reserve(static_cast<std::size_t>(grid.size()));
    maps.push_back(Superop::Identity(big, big));
    for (int m = 0; m < grid.steps; ++m) {
        const Superop& lam = maps.back();
        const Superop& g0 = fine_generators[static_cast<std::size_t>(2 * m)];
        const Superop& g1 = fine_generators[static_cast<std::size_t>(2 * m + 1)];
        const Superop& g2 = fine_generators[static_cast<std::size_t>(2 * m + 2)];
        const Superop k1 = g0 * lam;
        const Superop k2 = g1 * (lam + 0.5 * h * k1);
        const Superop k3 = g1 * (lam + 0.5 * h * k2);
        const Superop k4 = g2 * (lam + h * k3);
        maps.push_back(lam + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
    }
    return maps;
}

std::vector<Superop> volterra_march(const MemoryProblem& p, const TimeGrid& grid) {
    const SuperopKernel& k = *p.kernel;
    const double h = grid.step();
    const Eigen::Index big = static_cast<Eigen::Index>(k.dim()) * k.dim();
    const auto n_terms = k.terms().size();
    const auto at = [](const std::vector<Superop>* v, int m) -> const Superop* {
        return v ? &(*v)[static_cast<std::size_t>(m)] : nullptr;
    };

    std::vector<Superop> maps;
    maps.reserve(static_cast<std::size_t>(grid.size()));
    maps.push_back(Superop::Identity(big, big));
    // Y_j = right_j * Lambda_j, the argument of the memory integral
    std::vector<Superop> y;
    y.reserve(static_cast<std::size_t>(grid.size()));
    const auto push_y = [&](int j) {
        const Superop* r = at(p.right, j);
        y.push_back(r ? Superop(*r * maps[static_cast<std::size_t>(j)]) : maps[static_cast<std::size_t>(j)]);
    };
    push_y(0);

    // F = Hist + E * Lambda, where E collects the endpoint trapezoid weight and the local part
    const auto endpoint_operator = [&](int m) {
        const double t = grid.node(m);
        Superop e = (0.5 * h) * k(t, t);
        if (const Superop* r = at(p.right, m)) e = e * *r;
        if (const Superop* l = at(p.left, m)) e = *l * e;
        if (const Superop* loc = at(p.local, m)) e += *loc;
        return e;
    };

    // at t = 0 the memory integral vanishes; only a local part contributes
    Superop f_prev = at(p.local, 0) ? Superop(*at(p.local, 0) * maps[0]) : Superop::Zero(big, big);

    std::vector<Superop> partial(n_terms, Superop::Zero(big, big));
    for (int m = 0; m < grid.steps; ++m) {
        const int next = m + 1;
        const double t = grid.node(next);
        // history: sum_{j<=m} w_j K(t_next, t_j) Y_j with w_0 = h/2, w_j = h
        for (auto& s : partial) s.setZero();
        for (int j = 0; j <= m; ++j) {
            const double w = (j == 0) ? 0.5 * h : h;
            const double tj = grid.node(j);
            const Superop& yj = y[static_cast<std::size_t>(j)];
            for (std::size_t q = 0; q < n_terms; ++q) partial[q] += (w * k.terms()[q].profile(t, tj)) * yj;
        }
        Superop hist = Superop::Zero(big, big);
        for (std::size_t q = 0; q < n_terms; ++q) hist.noalias() += k.terms()[q].op * partial[q];
        if (const Superop* l = at(p.left, next)) hist = *l * hist;
        const Superop e = endpoint_operator(next);

        const Superop& lam = maps.back();
        const Superop predicted = lam + h * f_prev;
        const Superop f_pred = hist + e * predicted;
        Superop corrected = lam + (0.5 * h) * (f_prev + f_pred);
        f_prev = hist + e * corrected;
        maps.push_back(std::move(corrected));
        push_y(next);
    }
    return maps;
}

}  // namespace detail

Superop effective_generator(const SuperopKernel& k, const TimeGrid& grid, int node) {
    if (node < 0 || node > grid.steps) throw std::out_of_range("effective_generator: node outside grid");
    const Eigen::Index big = static_cast<Eigen::Index>(k.dim()) * k.dim();
    Superop g = Superop::Zero(big, big);
    const double t = grid.node(node);
    for (const auto& term : k.terms()) {
        g += trapezoid_to_node([&](double s) { return term.profile(t, s); }, grid, node) * term.op;
    }
    return g;
}

Superop effective_generator(const GKSLKernel& k, const TimeGrid& grid, int node) {
    return effective_generator(kernel_superop(k), grid, node);
}

// --- local (ODE) solvers -----------------------------------------------------

MapTrajectory solve_local(const SuperopKernel& k, const TimeGrid& grid, Family tag) {
    const TimeGrid fine = grid.refined(2);
    const auto gens = detail::generator_table(k, fine);
    MapTrajectory traj{grid, tag, detail::rk4_march(gens, grid), {}, {}};
    double gmax = 0.0;
    for (const auto& g : gens) gmax = std::max(gmax, g.norm());
    step_size_warning(traj, grid.step(), gmax);
    return traj;
}

MapTrajectory solve_local(const GKSLKernel& k, const TimeGrid& grid) {
    return solve_local(kernel_superop(k), grid, Family::local_full);
}

MapTrajectory solve_local_B(const GKSLKernel& k, const TimeGrid& grid) {
    return solve_local(split_kernel(k).b_part, grid, Family::local_B);
}

MapTrajectory solve_local_Z(const GKSLKernel& k, const TimeGrid& grid) {
    return solve_local(split_kernel(k).z_part().scaled(-1.0), grid, Family::local_Z);
}

// --- non-local (Volterra) solvers ---------------------------------------------

MapTrajectory solve_nonlocal(const SuperopKernel& k, const TimeGrid& grid, Family tag) {
    detail::MemoryProblem p;
    p.kernel = &k;
    MapTrajectory traj{grid, tag, detail::volterra_march(p, grid), {}, {}};
    double kmax = 0.0;
    for (int m = 0; m < grid.size(); ++m) {
        kmax = std::max(kmax, effective_generator(k, grid, m).norm());
    }
    step_size_warning(traj, grid.step(), kmax);
    return traj;
}

MapTrajectory solve_nonlocal(const GKSLKernel& k, const TimeGrid& grid, KernelPart part) {
    switch (part) {
        case KernelPart::full: return solve_nonlocal(kernel_superop(k), grid, Family::nonlocal_full);
        case KernelPart::B: return solve_nonlocal(split_kernel(k).b_part, grid, Family::nonlocal_B);
        case KernelPart::Z:
            return solve_nonlocal(split_kernel(k).z_part().scaled(-1.0), grid, Family::nonlocal_Z);
    }
    throw std::invalid_argument("unknown kernel part");
}

// --- ordered exponential and transformed solvers -------------------------------

OrderedExponential ordered_exponential(const TwoTimeOperatorFunction& w, const TimeGrid& grid) {
    const TimeGrid fine = grid.refined(2);
    const auto omega = detail::operator_integral_table(w, fine);
    const double h = grid.step();
    const int d = w.dim();
    OrderedExponential oe{grid, {}, {}};
    oe.v.reserve(static_cast<std::size_t>(grid.size()));
    oe.v_inv.reserve(static_cast<std::size_t>(grid.size()));
    oe.v.push_back(Matrix::Identity(d, d));
    oe.v_inv.push_back(Matrix::Identity(d, d));
    for (int m = 0; m < grid.steps; ++m) {
        const Matrix& o0 = omega[static_cast<std::size_t>(2 * m)];
        const Matrix& o1 = omega[static_cast<std::size_t>(2 * m + 1)];
        const Matrix& o2 = omega[static_cast<std::size_t>(2 * m + 2)];
        const Matrix v = oe.v.back();
        const Matrix vi = oe.v_inv.back();
        const Matrix a1 = -o0 * v;
        const Matrix a2 = -o1 * (v + 0.5 * h * a1);
        const Matrix a3 = -o1 * (v + 0.5 * h * a2);
        const Matrix a4 = -o2 * (v + h * a3);
        oe.v.push_back(v + (h / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4));
        const Matrix b1 = vi * o0;
        const Matrix b2 = (vi + 0.5 * h * b1) * o1;
        const Matrix b3 = (vi + 0.5 * h * b2) * o1;
        const Matrix b4 = (vi + h * b3) * o2;
        oe.v_inv.push_back(vi + (h / 6.0) * (b1 + 2.0 * b2 + 2.0 * b3 + b4));
    }
    return oe;
}

OrderedExponential ordered_exponential(const GKSLKernel& k, const TimeGrid& grid) {
    return ordered_exponential(split_kernel(k).w_op, grid);
}

MapTrajectory weak_local_Z(const GKSLKernel& k, const TimeGrid& grid) {
    const OrderedExponential oe = ordered_exponential(k, grid);
    MapTrajectory traj{grid, Family::weak_local_Z, {}, {}, {}};
    for (const auto& v : oe.v) traj.maps.push_back(conjugation_superop(v));
    return traj;
}

MapTrajectory solve_local_full_via_transform(const GKSLKernel& k, const TimeGrid& grid) {
    const KernelSplit split = split_kernel(k);
    const TimeGrid fine = grid.refined(2);
    const auto gen_b = detail::generator_table(split.b_part, fine);
    const auto omega = detail::operator_integral_table(split.w_op, fine);
    const double h = grid.step();
    const int d = k.dim();

    // joint RK4 on (V, V^{-1}, Lambda_hat) so that the transformed generator
    // V^{-1} (.) V^{-1 dagger} G_B V (.) V^dagger is available at the half steps
    struct State {
        Matrix v, vi;
        Superop lam;
    };
    const auto rhs = [&](const State& s, int fine_index) {
        const Matrix& o = omega[static_cast<std::size_t>(fine_index)];
        const Superop& gb = gen_b[static_cast<std::size_t>(fine_index)];
        const Superop gen_hat = conjugation_superop(s.vi) * gb * conjugation_superop(s.v);
        return State{-o * s.v, s.vi * o, gen_hat * s.lam};
    };
    const auto axpy = [](const State& s, double a, const State& ds) {
        return State{s.v + a * ds.v, s.vi + a * ds.vi, s.lam + a * ds.lam};
    };

    MapTrajectory traj{grid, Family::local_full, {}, {}, {}};
    State s{Matrix::Identity(d, d), Matrix::Identity(d, d), identity_superop(d)};
    traj.maps.push_back(conjugation_superop(s.v) * s.lam);
    for (int m = 0; m < grid.steps; ++m) {
        const State k1 = rhs(s, 2 * m);
        const State k2 = rhs(axpy(s, 0.5 * h, k1), 2 * m + 1);
        const State k3 = rhs(axpy(s, 0.5 * h, k2), 2 * m + 1);
        const State k4 = rhs(axpy(s, h, k3), 2 * m + 2);
        s = State{s.v + (h / 6.0) * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v),
                  s.vi + (h / 6.0) * (k1.vi + 2.0 * k2.vi + 2.0 * k3.vi + k4.vi),
                  s.lam + (h / 6.0) * (k1.lam + 2.0 * k2.lam + 2.0 * k3.lam + k4.lam)};
        traj.maps.push_back(conjugation_superop(s.v) * s.lam);
    }
    return traj;
}

MapTrajectory weak_coupling_localize(const GKSLKernel& k, const TimeGrid& grid) {
    const KernelSplit split = split_kernel(k);
    const OrderedExponential oe = ordered_exponential(split.w_op, grid);
    std::vector<Superop> left;
    std::vector<Superop> right;
    left.reserve(oe.v.size());
    right.reserve(oe.v.size());
    for (std::size_t m = 0; m < oe.v.size(); ++m) {
        left.push_back(conjugation_superop(oe.v_inv[m]));
        right.push_back(conjugation_superop(oe.v[m]));
    }
    detail::MemoryProblem p;
    p.kernel = &split.b_part;
    p.left = &left;
    p.right = &right;
    auto bar = detail::volterra_march(p, grid);
    MapTrajectory traj{grid, Family::weak_nonlocal_full, {}, {}, {}};
    traj.maps.reserve(bar.size());
    for (std::size_t m = 0; m < bar.size(); ++m) traj.maps.push_back(right[m] * bar[m]);
    return traj;
}

MapTrajectory weak_coupling_direct(const GKSLKernel& k, const TimeGrid& grid) {
    const KernelSplit split = split_kernel(k);
    const SuperopKernel minus_z = split.z_part().scaled(-1.0);
    std::vector<Superop> local;
    local.reserve(static_cast<std::size_t>(grid.size()));
    for (int m = 0; m < grid.size(); ++m) local.push_back(effective_generator(minus_z, grid, m));
    detail::MemoryProblem p;
    p.kernel = &split.b_part;
    p.local = &local;
    return MapTrajectory{grid, Family::weak_nonlocal_full, detail::volterra_march(p, grid), {}, {}};
}

Matrix transformed_lindblad(const GKSLKernel& k, const OrderedExponential& oe, std::size_t i, int m, int j) {
    if (i >= k.lindblad().size()) throw std::out_of_range("Lindblad index out of range");
    const double g = k.coupling_g();
    const auto um = static_cast<std::size_t>(m);
    const auto uj = static_cast<std::size_t>(j);
    return g * oe.v_inv.at(um) * k.lindblad()[i](oe.grid.node(m), oe.grid.node(j)) * oe.v.at(uj);
}

double sup_distance(const MapTrajectory& a, const MapTrajectory& b) {
    if (a.maps.size() != b.maps.size()) throw std::invalid_argument("trajectories have different grids");
    double worst = 0.0;
    for (std::size_t m = 0; m < a.maps.size(); ++m) worst = std::max(worst, (a.maps[m] - b.maps[m]).norm());
    return worst;
}

}  // namespace gkslcp
