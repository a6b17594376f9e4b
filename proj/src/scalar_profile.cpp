#include "gkslcp/scalar_profile.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace gkslcp {

struct ScalarProfile::Node {
    ProfileKind kind{ProfileKind::constant};
    cplx value{1.0, 0.0};  // constant
    double param{0.0};     // kappa / omega / tau
    std::shared_ptr<const Node> a;
    std::shared_ptr<const Node> b;
    double horizon{0.0};  // tabulated
    Matrix samples;       // tabulated
};

namespace {

using NodePtr = std::shared_ptr<const ScalarProfile::Node>;

bool is_family(ProfileKind k) {
    return k == ProfileKind::constant || k == ProfileKind::exponential_decay ||
           k == ProfileKind::oscillatory || k == ProfileKind::gaussian;
}

cplx eval_family(const ScalarProfile::Node& n, double s) {
    switch (n.kind) {
        case ProfileKind::constant: return n.value;
        case ProfileKind::exponential_decay: return std::exp(-n.param * s);
        case ProfileKind::oscillatory: return std::polar(1.0, n.param * s);
        case ProfileKind::gaussian: {
            const double x = s / n.param;
            return std::exp(-x * x);
        }
        default: throw std::logic_error("eval_family: not a closed-form family");
    }
}

cplx eval_tabulated(const ScalarProfile::Node& n, double t, double tp) {
    const auto last = n.samples.rows() - 1;
    const double h = n.horizon / static_cast<double>(last);
    const double slack = 1e-9 * std::max(1.0, n.horizon);
    if (t < -slack || tp < -slack || t > n.horizon + slack || tp > n.horizon + slack) {
        throw std::out_of_range("tabulated profile evaluated outside [0, " + std::to_string(n.horizon) + "]");
    }
    const double x = std::clamp(t / h, 0.0, static_cast<double>(last));
    const double y = std::clamp(tp / h, 0.0, static_cast<double>(last));
    const auto i = std::min<Eigen::Index>(static_cast<Eigen::Index>(x), last - 1);
    const auto j = std::min<Eigen::Index>(static_cast<Eigen::Index>(y), last - 1);
    const double fx = x - static_cast<double>(i);
    const double fy = y - static_cast<double>(j);
    return (1 - fx) * (1 - fy) * n.samples(i, j) + fx * (1 - fy) * n.samples(i + 1, j) +
           (1 - fx) * fy * n.samples(i, j + 1) + fx * fy * n.samples(i + 1, j + 1);
}

cplx eval(const ScalarProfile::Node& n, double t, double tp) {
    switch (n.kind) {
        case ProfileKind::constant:
        case ProfileKind::exponential_decay:
        case ProfileKind::oscillatory:
        case ProfileKind::gaussian: return eval_family(n, t - tp);
        case ProfileKind::product_separable: return eval_family(*n.a, t) * eval_family(*n.b, tp);
        case ProfileKind::tabulated: return eval_tabulated(n, t, tp);
        case ProfileKind::pointwise_product: return eval(*n.a, t, tp) * eval(*n.b, t, tp);
        case ProfileKind::conjugate: return std::conj(eval(*n.a, t, tp));
    }
    return 0.0;
}

bool convolution(const ScalarProfile::Node& n) {
    switch (n.kind) {
        case ProfileKind::constant:
        case ProfileKind::exponential_decay:
        case ProfileKind::oscillatory:
        case ProfileKind::gaussian: return true;
        case ProfileKind::product_separable: {
            const auto& f = *n.a;
            const auto& g = *n.b;
            if (f.kind == ProfileKind::constant && g.kind == ProfileKind::constant) return true;
            if (f.kind == g.kind && (f.kind == ProfileKind::exponential_decay || f.kind == ProfileKind::oscillatory)) {
                return f.param == -g.param;
            }
            return (f.kind == ProfileKind::constant && f.value == 0.0) ||
                   (g.kind == ProfileKind::constant && g.value == 0.0);
        }
        case ProfileKind::tabulated: {
            const auto n_side = n.samples.rows();
            const double scale = std::max(1.0, n.samples.cwiseAbs().maxCoeff());
            for (Eigen::Index i = 0; i < n_side; ++i) {
                for (Eigen::Index j = 0; j < n_side; ++j) {
                    const Eigen::Index i0 = i - std::min(i, j);
                    const Eigen::Index j0 = j - std::min(i, j);
                    if (std::abs(n.samples(i, j) - n.samples(i0, j0)) > 1e-12 * scale) return false;
                }
            }
            return true;
        }
        case ProfileKind::pointwise_product: return convolution(*n.a) && convolution(*n.b);
        case ProfileKind::conjugate: return convolution(*n.a);
    }
    return false;
}

NodePtr make_constant(cplx v) {
    auto n = std::make_shared<ScalarProfile::Node>();
    n->kind = ProfileKind::constant;
    n->value = v;
    return n;
}

NodePtr make_param(ProfileKind k, double p) {
    auto n = std::make_shared<ScalarProfile::Node>();
    n->kind = k;
    n->param = p;
    return n;
}

void check_finite(double x, const std::string& what) {
    if (!std::isfinite(x)) throw std::invalid_argument(what + " must be finite");
}

double number_field(const json& j, const std::string& key, const std::string& field) {
    if (!j.contains(key)) throw InputError(field + "." + key, "missing required field");
    if (!j.at(key).is_number()) throw InputError(field + "." + key, "must be a number");
    const double v = j.at(key).get<double>();
    if (!std::isfinite(v)) throw InputError(field + "." + key, "must be finite");
    return v;
}

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& field) {
    for (const auto& [key, _] : j.items()) {
        if (!allowed.count(key)) throw InputError(field + "." + key, "unknown key");
    }
}

}  // namespace

std::string to_string(ProfileKind kind) {
    switch (kind) {
        case ProfileKind::constant: return "constant";
        case ProfileKind::exponential_decay: return "exponential_decay";
        case ProfileKind::oscillatory: return "oscillatory";
        case ProfileKind::gaussian: return "gaussian";
        case ProfileKind::product_separable: return "product_separable";
        case ProfileKind::tabulated: return "tabulated";
        case ProfileKind::pointwise_product: return "pointwise_product";
        case ProfileKind::conjugate: return "conjugate";
    }
    return "unknown";
}

ScalarProfile ScalarProfile::constant(cplx value) {
    check_finite(value.real(), "constant value");
    check_finite(value.imag(), "constant value");
    return ScalarProfile(make_constant(value));
}

ScalarProfile ScalarProfile::exponential_decay(double kappa) {
    check_finite(kappa, "kappa");
    return ScalarProfile(make_param(ProfileKind::exponential_decay, kappa));
}

ScalarProfile ScalarProfile::oscillatory(double omega) {
    check_finite(omega, "omega");
    return ScalarProfile(make_param(ProfileKind::oscillatory, omega));
}

ScalarProfile ScalarProfile::gaussian(double tau) {
    check_finite(tau, "tau");
    if (tau <= 0.0) throw std::invalid_argument("gaussian width tau must be positive");
    return ScalarProfile(make_param(ProfileKind::gaussian, tau));
}

ScalarProfile ScalarProfile::separable(const ScalarProfile& f, const ScalarProfile& g) {
    if (!is_family(f.kind()) || !is_family(g.kind())) {
        throw std::invalid_argument("product_separable factors must be constant, exponential_decay, "
                                    "oscillatory or gaussian");
    }
    auto n = std::make_shared<Node>();
    n->kind = ProfileKind::product_separable;
    n->a = f.node_;
    n->b = g.node_;
    return ScalarProfile(std::move(n));
}

ScalarProfile ScalarProfile::tabulated(double horizon, Matrix samples) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw std::invalid_argument("tabulated horizon must be positive");
    }
    if (samples.rows() != samples.cols() || samples.rows() < 2) {
        throw std::invalid_argument("tabulated samples must be square with at least 2x2 entries");
    }
    if (!samples.allFinite()) throw std::invalid_argument("tabulated samples must be finite");
    auto n = std::make_shared<Node>();
    n->kind = ProfileKind::tabulated;
    n->horizon = horizon;
    n->samples = std::move(samples);
    return ScalarProfile(std::move(n));
}

cplx ScalarProfile::operator()(double t, double tp) const { return eval(*node_, t, tp); }

cplx ScalarProfile::single(double s) const {
    if (!is_family(node_->kind)) {
        throw std::logic_error("single-time evaluation is only defined for closed-form families");
    }
    return eval_family(*node_, s);
}

ScalarProfile ScalarProfile::operator*(const ScalarProfile& other) const {
    const Node& x = *node_;
    const Node& y = *other.node_;
    if (x.kind == ProfileKind::constant && y.kind == ProfileKind::constant) {
        return ScalarProfile(make_constant(x.value * y.value));
    }
    if (x.kind == ProfileKind::constant && x.value == 1.0) return other;
    if (y.kind == ProfileKind::constant && y.value == 1.0) return *this;
    if ((x.kind == ProfileKind::constant && x.value == 0.0) || (y.kind == ProfileKind::constant && y.value == 0.0)) {
        return ScalarProfile(make_constant(0.0));
    }
    if (x.kind == y.kind && x.kind == ProfileKind::oscillatory) {
        return ScalarProfile(make_param(ProfileKind::oscillatory, x.param + y.param));
    }
    if (x.kind == y.kind && x.kind == ProfileKind::exponential_decay) {
        return ScalarProfile(make_param(ProfileKind::exponential_decay, x.param + y.param));
    }
    auto n = std::make_shared<Node>();
    n->kind = ProfileKind::pointwise_product;
    n->a = node_;
    n->b = other.node_;
    return ScalarProfile(std::move(n));
}

ScalarProfile ScalarProfile::conj() const {
    const Node& x = *node_;
    switch (x.kind) {
        case ProfileKind::constant: return ScalarProfile(make_constant(std::conj(x.value)));
        case ProfileKind::exponential_decay:
        case ProfileKind::gaussian: return *this;
        case ProfileKind::oscillatory: return ScalarProfile(make_param(ProfileKind::oscillatory, -x.param));
        case ProfileKind::conjugate: return ScalarProfile(x.a);
        case ProfileKind::product_separable: {
            const ScalarProfile f = ScalarProfile(x.a).conj();
            const ScalarProfile g = ScalarProfile(x.b).conj();
            return separable(f, g);
        }
        case ProfileKind::pointwise_product: return ScalarProfile(x.a).conj() * ScalarProfile(x.b).conj();
        case ProfileKind::tabulated: {
            auto n = std::make_shared<Node>(x);
            n->samples = x.samples.conjugate();
            return ScalarProfile(std::move(n));
        }
    }
    return *this;
}

ProfileKind ScalarProfile::kind() const { return node_->kind; }

bool ScalarProfile::is_convolution() const { return convolution(*node_); }

bool ScalarProfile::is_zero() const { return node_->kind == ProfileKind::constant && node_->value == 0.0; }

json ScalarProfile::to_json() const {
    const Node& n = *node_;
    json j{{"kind", to_string(n.kind)}};
    switch (n.kind) {
        case ProfileKind::constant:
            j["value"] = n.value.real();
            if (n.value.imag() != 0.0) j["imag"] = n.value.imag();
            break;
        case ProfileKind::exponential_decay: j["kappa"] = n.param; break;
        case ProfileKind::oscillatory: j["omega"] = n.param; break;
        case ProfileKind::gaussian: j["tau"] = n.param; break;
        case ProfileKind::product_separable:
            j["f"] = ScalarProfile(n.a).to_json();
            j["g"] = ScalarProfile(n.b).to_json();
            break;
        case ProfileKind::tabulated: {
            j["horizon"] = n.horizon;
            json rows = json::array();
            for (Eigen::Index i = 0; i < n.samples.rows(); ++i) {
                json row = json::array();
                for (Eigen::Index k = 0; k < n.samples.cols(); ++k) {
                    row.push_back(json::array({n.samples(i, k).real(), n.samples(i, k).imag()}));
                }
                rows.push_back(std::move(row));
            }
            j["samples"] = std::move(rows);
            break;
        }
        case ProfileKind::pointwise_product:
            j["factors"] = json::array({ScalarProfile(n.a).to_json(), ScalarProfile(n.b).to_json()});
            break;
        case ProfileKind::conjugate: j["of"] = ScalarProfile(n.a).to_json(); break;
    }
    return j;
}

ScalarProfile ScalarProfile::from_json(const json& j, const std::string& field) {
    if (!j.is_object()) throw InputError(field, "profile must be an object");
    if (!j.contains("kind") || !j.at("kind").is_string()) {
        throw InputError(field + ".kind", "missing or non-string profile kind");
    }
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "constant") {
        reject_unknown(j, {"kind", "value", "imag"}, field);
        const double re = number_field(j, "value", field);
        const double im = j.contains("imag") ? number_field(j, "imag", field) : 0.0;
        return constant({re, im});
    }
    if (kind == "exponential_decay") {
        reject_unknown(j, {"kind", "kappa"}, field);
        return exponential_decay(number_field(j, "kappa", field));
    }
    if (kind == "oscillatory") {
        reject_unknown(j, {"kind", "omega"}, field);
        return oscillatory(number_field(j, "omega", field));
    }
    if (kind == "gaussian") {
        reject_unknown(j, {"kind", "tau"}, field);
        const double tau = number_field(j, "tau", field);
        if (tau <= 0.0) throw InputError(field + ".tau", "must be positive");
        return gaussian(tau);
    }
    if (kind == "product_separable") {
        reject_unknown(j, {"kind", "f", "g"}, field);
        if (!j.contains("f")) throw InputError(field + ".f", "missing required field");
        if (!j.contains("g")) throw InputError(field + ".g", "missing required field");
        const auto f = from_json(j.at("f"), field + ".f");
        const auto g = from_json(j.at("g"), field + ".g");
        if (!is_family(f.kind())) throw InputError(field + ".f", "factor must be a closed-form family");
        if (!is_family(g.kind())) throw InputError(field + ".g", "factor must be a closed-form family");
        return separable(f, g);
    }
    if (kind == "tabulated") {
        reject_unknown(j, {"kind", "horizon", "samples"}, field);
        const double horizon = number_field(j, "horizon", field);
        if (horizon <= 0.0) throw InputError(field + ".horizon", "must be positive");
        if (!j.contains("samples") || !j.at("samples").is_array()) {
            throw InputError(field + ".samples", "missing or non-array samples");
        }
        const json& rows = j.at("samples");
        const auto n = static_cast<Eigen::Index>(rows.size());
        if (n < 2) throw InputError(field + ".samples", "need at least 2x2 samples");
        Matrix s(n, n);
        for (Eigen::Index r = 0; r < n; ++r) {
            const json& row = rows[static_cast<std::size_t>(r)];
            const std::string rf = field + ".samples[" + std::to_string(r) + "]";
            if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) {
                throw InputError(rf, "each row must have as many entries as there are rows");
            }
            for (Eigen::Index c = 0; c < n; ++c) {
                const json& e = row[static_cast<std::size_t>(c)];
                if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
                    throw InputError(rf + "[" + std::to_string(c) + "]", "expected [re, im]");
                }
                s(r, c) = cplx(e[0].get<double>(), e[1].get<double>());
            }
        }
        return tabulated(horizon, std::move(s));
    }
    if (kind == "pointwise_product") {
        reject_unknown(j, {"kind", "factors"}, field);
        if (!j.contains("factors") || !j.at("factors").is_array() || j.at("factors").size() != 2) {
            throw InputError(field + ".factors", "expected two factors");
        }
        return from_json(j.at("factors")[0], field + ".factors[0]") *
               from_json(j.at("factors")[1], field + ".factors[1]");
    }
    if (kind == "conjugate") {
        reject_unknown(j, {"kind", "of"}, field);
        if (!j.contains("of")) throw InputError(field + ".of", "missing required field");
        return from_json(j.at("of"), field + ".of").conj();
    }
    throw InputError(field + ".kind", "unknown profile kind \"" + kind + "\"");
}

}  // namespace gkslcp
