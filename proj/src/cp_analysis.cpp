#include "gkslcp/cp_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "gkslcp/trajectory_io.hpp"

namespace gkslcp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double condition_number(const Matrix& a) {
    Eigen::JacobiSVD<Matrix> svd(a);
    const auto& s = svd.singularValues();
    const double smin = s(s.size() - 1);
    if (smin == 0.0) return std::numeric_limits<double>::infinity();
    return s(0) / smin;
}

// Canonical shortest round-trip rendering, shared with the JSON writer.
std::string num(double x) { return json(x).dump(); }

}  // namespace

ChoiMatrix choi(const Superop& map) {
    const int d = operator_dim(map);
    Matrix c(d * d, d * d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            for (int a = 0; a < d; ++a) {
                for (int b = 0; b < d; ++b) c(a + d * i, b + d * j) = map(a + d * b, i + d * j);
            }
        }
    }
    return ChoiMatrix{d, std::move(c)};
}

Superop superop_from_choi(const ChoiMatrix& c) {
    const int d = c.dim;
    Superop s(d * d, d * d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            for (int a = 0; a < d; ++a) {
                for (int b = 0; b < d; ++b) s(a + d * b, i + d * j) = c.matrix(a + d * i, b + d * j);
            }
        }
    }
    return s;
}

CPCheck cp_check(const ChoiMatrix& c, double eps_cp) {
    CPCheck out;
    out.threshold = -eps_cp * c.dim;
    try {
        out.lambda_min = hermitian_eig(c.matrix).eigenvalues(0);
    } catch (const NotHermitianError&) {
        // A map that does not preserve Hermiticity cannot be CP.
        out.hermitian = false;
        out.lambda_min = kNaN;
        out.cp = false;
        return out;
    }
    out.cp = out.lambda_min >= out.threshold;
    return out;
}

ChoiWitness choi_witness(const ChoiMatrix& c) {
    const auto eig = hermitian_eig(c.matrix);
    return ChoiWitness{eig.eigenvalues(0), eig.eigenvectors.col(0)};
}

double measure_value(const Superop& map, const Vector& psi, const Vector& phi) {
    const int d = operator_dim(map);
    if (psi.size() != d * d || phi.size() != d * d) throw std::invalid_argument("measure vectors must have d^2 entries");
    const Matrix f = unvectorize(phi);  // f(a, i) = <a, i | Phi>
    const Matrix p = unvectorize(psi);
    cplx acc = 0.0;
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            const Matrix out = gkslcp::apply(map, Matrix(f.col(i) * f.col(j).adjoint()));
            acc += (p.col(i).adjoint() * out * p.col(j))(0, 0);
        }
    }
    return acc.real();
}

MeasureSample measure_sample(const Superop& map, int samples, std::uint64_t seed) {
    if (samples < 1) throw std::invalid_argument("measure_sample needs at least one sample");
    const int d = operator_dim(map);
    std::mt19937_64 rng(seed);
    MeasureSample best;
    best.samples = samples;
    best.seed = seed;
    best.min_value = std::numeric_limits<double>::infinity();
    for (int s = 0; s < samples; ++s) {
        Vector psi = random::unit_vector(d * d, rng);
        Vector phi = random::unit_vector(d * d, rng);
        const double v = measure_value(map, psi, phi);
        if (v < best.min_value) {
            best.min_value = v;
            best.psi = std::move(psi);
            best.phi = std::move(phi);
        }
    }
    return best;
}

KrausSet kraus_extract(const ChoiMatrix& c, double cutoff, double eps_cp) {
    const CPCheck chk = cp_check(c, eps_cp);
    if (!chk.cp) throw NotCPError(chk.lambda_min);
    const auto eig = hermitian_eig(c.matrix);
    const double trace = c.matrix.trace().real();
    KrausSet out;
    for (Eigen::Index k = eig.eigenvalues.size() - 1; k >= 0; --k) {
        const double lambda = eig.eigenvalues(k);
        if (lambda <= cutoff * trace) break;
        out.operators.push_back(std::sqrt(lambda) * unvectorize(eig.eigenvectors.col(k)));
        out.weights.push_back(lambda);
    }
    return out;
}

Superop kraus_reconstruct(const KrausSet& k) {
    if (k.operators.empty()) throw std::invalid_argument("empty Kraus set");
    const int d = static_cast<int>(k.operators.front().rows());
    Superop s = Superop::Zero(d * d, d * d);
    for (const auto& op : k.operators) s += conjugation_superop(op);
    return s;
}

double kraus_completeness_defect(const KrausSet& k) {
    if (k.operators.empty()) throw std::invalid_argument("empty Kraus set");
    const int d = static_cast<int>(k.operators.front().rows());
    Matrix sum = Matrix::Zero(d, d);
    for (const auto& op : k.operators) sum += op.adjoint() * op;
    return (sum - ops::identity(d)).cwiseAbs().maxCoeff();
}

std::string to_string(KrausClause c) {
    switch (c) {
        case KrausClause::none: return "none";
        case KrausClause::singular: return "singular";
        case KrausClause::diagonal: return "diagonal";
        case KrausClause::off_diagonal: return "off-diagonal";
    }
    return "?";
}

KrausConditionResult kraus_condition_check(const KrausSet& k, double tol, double cond_limit) {
    KrausConditionResult r;
    if (k.operators.empty()) throw std::invalid_argument("empty Kraus set");
    for (std::size_t j = 0; j < k.operators.size(); ++j) {
        const double cond = condition_number(k.operators[j]);
        r.max_condition = std::max(r.max_condition, cond);
        if (!(cond <= cond_limit) && r.singular_index < 0) r.singular_index = static_cast<int>(j);
    }
    if (r.singular_index >= 0) {
        r.failed = KrausClause::singular;
        r.diagonal_residual = kNaN;
        r.off_diagonal_residual = kNaN;
        return r;
    }
    const int d = static_cast<int>(k.operators.front().rows());
    for (std::size_t j = 0; j < k.operators.size(); ++j) {
        const auto lu = k.operators[j].partialPivLu();
        for (std::size_t q = 0; q < k.operators.size(); ++q) {
            const Matrix prod = lu.solve(k.operators[q]);
            if (j == q) {
                r.diagonal_residual = std::max(r.diagonal_residual, (prod - ops::identity(d)).norm());
            } else {
                r.off_diagonal_residual = std::max(r.off_diagonal_residual, prod.norm());
            }
        }
    }
    if (r.diagonal_residual > tol) {
        r.failed = KrausClause::diagonal;
    } else if (r.off_diagonal_residual > tol) {
        r.failed = KrausClause::off_diagonal;
    }
    r.holds = r.failed == KrausClause::none;
    return r;
}

std::string to_string(IntervalStatus s) {
    switch (s) {
        case IntervalStatus::cp: return "CP";
        case IntervalStatus::not_cp: return "not-CP";
        case IntervalStatus::indeterminate: return "indeterminate";
    }
    return "?";
}

std::vector<IntervalVerdict> divisibility_check(const MapTrajectory& traj, double eps_cp, double cond_limit) {
    std::vector<IntervalVerdict> out;
    for (std::size_t m = 0; m + 1 < traj.maps.size(); ++m) {
        IntervalVerdict v;
        v.from = static_cast<int>(m);
        const Superop& a = traj.maps[m];
        v.condition = condition_number(a);
        if (!(v.condition <= cond_limit)) {
            v.status = IntervalStatus::indeterminate;
            v.lambda_min = kNaN;
            out.push_back(v);
            continue;
        }
        // X a = b  <=>  a^T X^T = b^T
        const Superop x = a.transpose().partialPivLu().solve(traj.maps[m + 1].transpose()).transpose();
        const CPCheck chk = cp_check(choi(x), eps_cp);
        v.lambda_min = chk.lambda_min;
        v.status = chk.cp ? IntervalStatus::cp : IntervalStatus::not_cp;
        out.push_back(v);
    }
    return out;
}

std::string to_string(WSignConvention c) {
    return c == WSignConvention::nonpositive ? "integrated Re<n|W|n> <= 0" : "integrated Re<n|W|n> >= 0";
}

MapTrajectory solve_nonlocal_z(const TwoTimeOperatorFunction& w, const TimeGrid& grid) {
    return solve_nonlocal(z_superop(w).scaled(-1.0), grid, Family::nonlocal_Z);
}

const SignResolution& resolve_w_sign_convention() {
    static const SignResolution cached = [] {
        const TimeGrid grid(2.0, 200);
        auto probe = [&](double sign, double& lambda_out, double& measure_out) {
            TwoTimeOperatorFunction w(2);
            w.add(ScalarProfile::constant(sign), ops::identity(2));
            const MapTrajectory traj = solve_nonlocal_z(w, grid);
            lambda_out = std::numeric_limits<double>::infinity();
            measure_out = std::numeric_limits<double>::infinity();
            for (const auto& map : traj.maps) {
                lambda_out = std::min(lambda_out, cp_check(choi(map)).lambda_min);
            }
            measure_out = measure_sample(traj.maps.back(), 200, kDefaultSeed).min_value;
        };
        SignResolution r;
        probe(-1.0, r.lambda_min_negative_w, r.measure_min_negative_w);
        probe(+1.0, r.lambda_min_positive_w, r.measure_min_positive_w);
        const double thr = -kDefaultEpsCP * 2;
        const bool neg_ok = r.lambda_min_negative_w >= thr && r.measure_min_negative_w >= thr;
        const bool pos_ok = r.lambda_min_positive_w >= thr && r.measure_min_positive_w >= thr;
        if (neg_ok && !pos_ok) {
            r.convention = WSignConvention::nonpositive;
        } else if (pos_ok && !neg_ok) {
            r.convention = WSignConvention::nonnegative;
        } else {
            throw std::logic_error("scalar W oracle did not separate the two sign readings");
        }
        return r;
    }();
    return cached;
}

WConditionReport w_strict_condition_check(const TwoTimeOperatorFunction& w, const TimeGrid& grid,
                                          const Matrix& basis, double tol) {
    const int d = w.dim();
    if (basis.rows() != d || basis.cols() != d) throw std::invalid_argument("basis must be d x d");
    if ((basis.adjoint() * basis - ops::identity(d)).cwiseAbs().maxCoeff() > 1e-10) {
        throw std::invalid_argument("basis is not orthonormal");
    }
    WConditionReport r;
    const double h = grid.step();
    Eigen::VectorXd outer = Eigen::VectorXd::Zero(d);  // int_0^T of the inner integral
    Eigen::VectorXd inner_prev = Eigen::VectorXd::Zero(d);
    double scale = 0.0;
    double max_uniform_gap = 0.0;
    for (int m = 0; m < grid.size(); ++m) {
        Eigen::VectorXd inner = Eigen::VectorXd::Zero(d);
        for (int j = 0; j <= m; ++j) {
            const Matrix wb = basis.adjoint() * w(grid.node(m), grid.node(j)) * basis;
            scale = std::max(scale, wb.cwiseAbs().maxCoeff());
            for (int a = 0; a < d; ++a) {
                for (int b = 0; b < d; ++b) {
                    if (a != b) r.max_off_diagonal = std::max(r.max_off_diagonal, std::abs(wb(a, b)));
                }
                max_uniform_gap = std::max(max_uniform_gap, std::abs(wb(a, a) - wb(0, 0)));
            }
            if (m > 0) {
                const double wt = (j == 0 || j == m) ? 0.5 * h : h;
                for (int a = 0; a < d; ++a) inner(a) += wt * wb(a, a).real();
            }
        }
        if (m > 0) outer += 0.5 * h * (inner_prev + inner);
        inner_prev = inner;
    }
    const double abs_tol = tol * std::max(1.0, scale);
    r.integrated_diagonal_real.assign(outer.data(), outer.data() + d);
    r.diagonal = r.max_off_diagonal <= abs_tol;
    r.uniform_diagonal = r.diagonal && max_uniform_gap <= abs_tol;
    r.pass_nonpositive = std::all_of(r.integrated_diagonal_real.begin(), r.integrated_diagonal_real.end(),
                                     [&](double x) { return x <= abs_tol; });
    r.pass_nonnegative = std::all_of(r.integrated_diagonal_real.begin(), r.integrated_diagonal_real.end(),
                                     [&](double x) { return x >= -abs_tol; });
    r.resolved = resolve_w_sign_convention().convention;
    r.verdict = r.diagonal && (r.resolved == WSignConvention::nonpositive ? r.pass_nonpositive : r.pass_nonnegative);
    return r;
}

std::optional<ZWitness> z_counterexample(const TwoTimeOperatorFunction& w, const TimeGrid& grid,
                                         const ZCounterexampleOptions& opt) {
    const int d = w.dim();
    // Seed the ansatz with the largest off-diagonal element over the sampled triangle.
    double best = 0.0;
    int l = -1, n = -1;
    double phi_ln = 0.0;
    const int stride = std::max(1, grid.steps / 50);
    for (int m = 0; m < grid.size(); m += stride) {
        for (int j = 0; j <= m; j += stride) {
            const Matrix wm = w(grid.node(m), grid.node(j));
            for (int a = 0; a < d; ++a) {
                for (int b = 0; b < d; ++b) {
                    if (a != b && std::abs(wm(a, b)) > best + 1e-14) {
                        best = std::abs(wm(a, b));
                        l = a;
                        n = b;
                        phi_ln = std::arg(wm(a, b));
                    }
                }
            }
        }
    }
    if (l < 0 || best <= 1e-12) return std::nullopt;

    const MapTrajectory traj = solve_nonlocal_z(w, grid);
    const double threshold = -10.0 * opt.eps_cp;
    const double phase = opt.phase_offset - phi_ln;  // theta_n - theta_l
    for (int m = 1; m < grid.size(); ++m) {
        const Superop& map = traj.maps[static_cast<std::size_t>(m)];
        std::optional<ZWitness> found;
        for (int k = 0; k < d; ++k) {
            const Matrix out = gkslcp::apply(map, ops::ket_bra(d, k, k));
            for (int q = 0; q < opt.amplitude_points; ++q) {
                const double a = (q + 1.0) / (opt.amplitude_points + 1.0);
                Vector psi_sys = Vector::Zero(d);
                psi_sys(n) = a * std::polar(1.0, phase);
                psi_sys(l) = std::sqrt(1.0 - a * a);
                const double value = (psi_sys.adjoint() * out * psi_sys)(0, 0).real();
                if (value < threshold && (!found || value < found->measure)) {
                    ZWitness wit;
                    wit.t = grid.node(m);
                    wit.node = m;
                    wit.measure = value;
                    wit.l = l;
                    wit.n = n;
                    wit.phase = phase;
                    // Embed as product vectors |.>_sys |0>_anc.
                    wit.psi = Vector::Zero(d * d);
                    wit.psi.head(d) = psi_sys;
                    wit.phi = Vector::Zero(d * d);
                    wit.phi(k) = 1.0;
                    found = std::move(wit);
                }
            }
        }
        if (found) {
            found->choi_lambda_min = cp_check(choi(map), opt.eps_cp).lambda_min;
            return found;
        }
    }
    return std::nullopt;
}

bool CPReport::all_cp() const {
    return std::all_of(nodes.begin(), nodes.end(), [](const NodeVerdict& v) { return v.cp; });
}

bool CPReport::all_tp() const {
    return std::all_of(nodes.begin(), nodes.end(), [&](const NodeVerdict& v) { return v.trace_dev <= options.tol_tp; });
}

int CPReport::non_cp_intervals() const {
    return static_cast<int>(std::count_if(nodes.begin(), nodes.end(), [](const NodeVerdict& v) {
        return v.div_status && *v.div_status == IntervalStatus::not_cp;
    }));
}

int CPReport::indeterminate_intervals() const {
    return static_cast<int>(std::count_if(nodes.begin(), nodes.end(), [](const NodeVerdict& v) {
        return v.div_status && *v.div_status == IntervalStatus::indeterminate;
    }));
}

CPReport certify(const MapTrajectory& traj, const CertifyOptions& opt) {
    CPReport r;
    r.family = traj.family;
    r.options = opt;
    r.trace_preserving_family = is_trace_preserving_family(traj.family);
    for (std::size_t m = 0; m < traj.maps.size(); ++m) {
        const CPCheck chk = cp_check(choi(traj.maps[m]), opt.eps_cp);
        NodeVerdict v;
        v.t = traj.grid.node(static_cast<int>(m));
        v.lambda_min = chk.lambda_min;
        v.trace_dev = trace_deviation(traj.maps[m]);
        v.cp = chk.cp;
        r.nodes.push_back(v);
    }
    if (opt.divisibility) {
        for (const auto& iv : divisibility_check(traj, opt.eps_cp, opt.cond_limit)) {
            auto& node = r.nodes[static_cast<std::size_t>(iv.from + 1)];
            node.div_status = iv.status;
            if (iv.status != IntervalStatus::indeterminate) node.div_lambda_min = iv.lambda_min;
        }
    }
    return r;
}

json cp_report_to_json(const CPReport& r) {
    json nodes = json::array();
    for (const auto& v : r.nodes) {
        json n{{"t", v.t},
               {"lambda_min", v.lambda_min},
               {"trace_dev", v.trace_dev},
               {"verdict", v.cp ? "CP" : "not-CP"}};
        n["div_lambda_min"] = v.div_lambda_min ? json(*v.div_lambda_min) : json(nullptr);
        n["div_status"] = v.div_status ? json(to_string(*v.div_status)) : json(nullptr);
        nodes.push_back(std::move(n));
    }
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& v : r.nodes) worst = std::min(worst, v.lambda_min);
    return json{{"family", to_string(r.family)},
                {"tolerances",
                 {{"eps_cp", r.options.eps_cp},
                  {"cp_rule", "lambda_min >= -eps_cp * d"},
                  {"tol_tp", r.options.tol_tp},
                  {"cond_limit", r.options.cond_limit}}},
                {"trace_preserving_family", r.trace_preserving_family},
                {"all_cp", r.all_cp()},
                {"all_tp", r.all_tp()},
                {"min_lambda", worst},
                {"non_cp_intervals", r.non_cp_intervals()},
                {"indeterminate_intervals", r.indeterminate_intervals()},
                {"nodes", std::move(nodes)}};
}

std::string cp_report_csv(const CPReport& r) {
    std::ostringstream out;
    out << "t,lambda_min,trace_dev,div_lambda_min,verdict\n";
    for (const auto& v : r.nodes) {
        out << num(v.t) << ',' << num(v.lambda_min) << ',' << num(v.trace_dev) << ',';
        if (v.div_lambda_min) out << num(*v.div_lambda_min);
        out << ',' << (v.cp ? "CP" : "not-CP") << '\n';
    }
    return out.str();
}

}  // namespace gkslcp
