#include "gkslcp/kernel_model.hpp"

#include <algorithm>
#include <cmath>

namespace gkslcp {

namespace {

void check_dim(int dim) {
    if (dim < kMinDim || dim > kMaxDim) {
        throw std::invalid_argument("dimension " + std::to_string(dim) + " outside supported range [" +
                                    std::to_string(kMinDim) + ", " + std::to_string(kMaxDim) + "]");
    }
}

void check_operator(const Matrix& op, int dim) {
    if (op.rows() != dim || op.cols() != dim) {
        throw std::invalid_argument("operator of size " + std::to_string(op.rows()) + "x" +
                                    std::to_string(op.cols()) + " in a dimension-" + std::to_string(dim) +
                                    " function");
    }
}

}  // namespace

// --- TwoTimeOperatorFunction -------------------------------------------------

TwoTimeOperatorFunction::TwoTimeOperatorFunction(int dim) : dim_(dim) { check_dim(dim); }

TwoTimeOperatorFunction::TwoTimeOperatorFunction(int dim, std::vector<OperatorTerm> terms) : dim_(dim) {
    check_dim(dim);
    for (auto& t : terms) add(std::move(t.profile), std::move(t.op));
}

TwoTimeOperatorFunction& TwoTimeOperatorFunction::add(ScalarProfile profile, Matrix op) {
    check_operator(op, dim_);
    if (!profile.is_zero() && !op.isZero(0.0)) terms_.push_back({std::move(profile), std::move(op)});
    return *this;
}

Matrix TwoTimeOperatorFunction::operator()(double t, double tp) const {
    Matrix out = Matrix::Zero(dim_, dim_);
    for (const auto& term : terms_) out += term.profile(t, tp) * term.op;
    return out;
}

bool TwoTimeOperatorFunction::is_convolution() const {
    return std::all_of(terms_.begin(), terms_.end(), [](const auto& t) { return t.profile.is_convolution(); });
}

TwoTimeOperatorFunction TwoTimeOperatorFunction::adjoint() const {
    TwoTimeOperatorFunction out(dim_);
    for (const auto& t : terms_) out.add(t.profile.conj(), t.op.adjoint());
    return out;
}

TwoTimeOperatorFunction TwoTimeOperatorFunction::scaled(cplx factor) const {
    TwoTimeOperatorFunction out(dim_);
    for (const auto& t : terms_) out.add(t.profile, factor * t.op);
    return out;
}

TwoTimeOperatorFunction operator+(const TwoTimeOperatorFunction& a, const TwoTimeOperatorFunction& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("operator function dimensions differ");
    TwoTimeOperatorFunction out = a;
    for (const auto& t : b.terms()) out.add(t.profile, t.op);
    return out;
}

TwoTimeOperatorFunction operator*(const TwoTimeOperatorFunction& a, const TwoTimeOperatorFunction& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("operator function dimensions differ");
    TwoTimeOperatorFunction out(a.dim());
    for (const auto& x : a.terms()) {
        for (const auto& y : b.terms()) out.add(x.profile * y.profile, x.op * y.op);
    }
    return out;
}

// --- SuperopKernel -----------------------------------------------------------

SuperopKernel::SuperopKernel(int dim, std::vector<SuperopTerm> terms) : dim_(dim) {
    for (auto& t : terms) add(std::move(t.profile), std::move(t.op));
}

SuperopKernel& SuperopKernel::add(ScalarProfile profile, Superop op) {
    const Eigen::Index big = static_cast<Eigen::Index>(dim_) * dim_;
    if (op.rows() != big || op.cols() != big) {
        throw std::invalid_argument("superoperator size does not match kernel dimension");
    }
    if (!profile.is_zero() && !op.isZero(0.0)) terms_.push_back({std::move(profile), std::move(op)});
    return *this;
}

Superop SuperopKernel::operator()(double t, double tp) const {
    const Eigen::Index big = static_cast<Eigen::Index>(dim_) * dim_;
    Superop out = Superop::Zero(big, big);
    for (const auto& term : terms_) out += term.profile(t, tp) * term.op;
    return out;
}

bool SuperopKernel::is_convolution() const {
    return std::all_of(terms_.begin(), terms_.end(), [](const auto& t) { return t.profile.is_convolution(); });
}

SuperopKernel SuperopKernel::scaled(cplx factor) const {
    SuperopKernel out(dim_);
    for (const auto& t : terms_) out.add(t.profile, factor * t.op);
    return out;
}

SuperopKernel operator+(const SuperopKernel& a, const SuperopKernel& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("kernel dimensions differ");
    SuperopKernel out = a;
    for (const auto& t : b.terms()) out.add(t.profile, t.op);
    return out;
}

// --- GKSLKernel --------------------------------------------------------------

GKSLKernel::GKSLKernel(TwoTimeOperatorFunction hermitian, std::vector<TwoTimeOperatorFunction> lindblad,
                       double coupling_g)
    : hermitian_(std::move(hermitian)), lindblad_(std::move(lindblad)), g_(coupling_g) {
    if (!std::isfinite(g_) || g_ < 0.0) throw std::invalid_argument("coupling g must be finite and >= 0");
    for (const auto& l : lindblad_) {
        if (l.dim() != hermitian_.dim()) {
            throw std::invalid_argument("Lindblad part dimension differs from Hermitian part");
        }
    }
}

GKSLKernel GKSLKernel::zero(int dim) { return GKSLKernel(TwoTimeOperatorFunction(dim), {}); }

GKSLKernel GKSLKernel::with_coupling(double g) const {
    GKSLKernel out = *this;
    if (!std::isfinite(g) || g < 0.0) throw std::invalid_argument("coupling g must be finite and >= 0");
    out.g_ = g;
    return out;
}

bool GKSLKernel::is_c_number() const {
    return std::all_of(lindblad_.begin(), lindblad_.end(), [](const auto& l) { return l.terms().size() <= 1; });
}

bool GKSLKernel::is_convolution() const {
    return hermitian_.is_convolution() &&
           std::all_of(lindblad_.begin(), lindblad_.end(), [](const auto& l) { return l.is_convolution(); });
}

double GKSLKernel::hermitian_defect(double horizon) const {
    constexpr int n = 8;
    double worst = 0.0;
    for (int a = 0; a < n; ++a) {
        const double t = horizon * a / (n - 1);
        for (int b = 0; b <= a; ++b) {
            const double tp = horizon * b / (n - 1);
            worst = std::max(worst, gkslcp::hermiticity_defect(hermitian_(t, tp)));
        }
    }
    return worst;
}

// --- superoperator assembly --------------------------------------------------

namespace {

Superop left_mult(const Matrix& a) { return sandwich_superop(a, Matrix::Identity(a.rows(), a.cols())); }
Superop right_mult(const Matrix& b) { return sandwich_superop(Matrix::Identity(b.rows(), b.cols()), b); }

}  // namespace

Superop eval_kernel_superop(const GKSLKernel& k, double t, double tp) {
    if (tp > t) throw std::invalid_argument("kernel evaluated with t' > t");
    const double g2 = k.coupling_g() * k.coupling_g();
    const Matrix h = k.hermitian()(t, tp);
    Superop out = cplx(0.0, -1.0) * (left_mult(h) - right_mult(h));
    for (const auto& part : k.lindblad()) {
        const Matrix l = part(t, tp);
        const Matrix ldl = l.adjoint() * l;
        out += sandwich_superop(l, l.adjoint()) - 0.5 * left_mult(ldl) - 0.5 * right_mult(ldl);
    }
    return g2 * out;
}

SuperopKernel kernel_superop(const GKSLKernel& k) {
    const KernelSplit split = split_kernel(k);
    return split.b_part + split.z_part().scaled(-1.0);
}

SuperopKernel z_superop(const TwoTimeOperatorFunction& w) {
    SuperopKernel z(w.dim());
    for (const auto& term : w.terms()) {
        z.add(term.profile, left_mult(term.op));
        z.add(term.profile.conj(), right_mult(term.op.adjoint()));
    }
    return z;
}

SuperopKernel KernelSplit::z_part() const { return z_superop(w_op); }

KernelSplit split_kernel(const GKSLKernel& k) {
    const int d = k.dim();
    const double g2 = k.coupling_g() * k.coupling_g();
    SuperopKernel b(d);
    TwoTimeOperatorFunction w = k.hermitian().scaled(cplx(0.0, g2));
    for (const auto& part : k.lindblad()) {
        for (const auto& x : part.terms()) {
            for (const auto& y : part.terms()) {
                // p_x conj(p_y) * ( A_x rho A_y^dagger ) and 1/2 p_x conj(p_y) A_y^dagger A_x inside W
                const ScalarProfile coeff = x.profile * y.profile.conj();
                b.add(coeff, g2 * sandwich_superop(x.op, y.op.adjoint()));
                w.add(coeff, 0.5 * g2 * (y.op.adjoint() * x.op));
            }
        }
    }
    return {std::move(b), std::move(w)};
}

Eigen::MatrixXd effective_damping_rates(const GKSLKernel& k, const TimeGrid& grid) {
    if (!k.is_c_number()) {
        throw std::invalid_argument("effective damping rates need a c-number kernel");
    }
    const double g2 = k.coupling_g() * k.coupling_g();
    Eigen::MatrixXd rates = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k.lindblad().size()), grid.size());
    for (std::size_t i = 0; i < k.lindblad().size(); ++i) {
        const auto& terms = k.lindblad()[i].terms();
        if (terms.empty()) continue;
        const ScalarProfile& h = terms.front().profile;
        for (int m = 0; m < grid.size(); ++m) {
            const double t = grid.node(m);
            rates(static_cast<Eigen::Index>(i), m) =
                g2 * trapezoid_to_node([&](double s) { return std::norm(h(t, s)); }, grid, m);
        }
    }
    return rates;
}

}  // namespace gkslcp
