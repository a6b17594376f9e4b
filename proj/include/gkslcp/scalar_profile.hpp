// C-number functions of two times (t, t') used as kernel coefficients

#pragma once

#include <memory>
#include <string>

#include "gkslcp/operator_core.hpp"

namespace gkslcp {

enum class ProfileKind {
    constant,           // c
    exponential_decay,  // exp(-kappa (t - t'))
    oscillatory,        // exp(i omega (t - t'))
    gaussian,           // exp(-((t - t') / tau)^2)
    product_separable,  // f(t) g(t'), f and g single-time members of the four families above
    tabulated,          // uniform (t, t') samples, bilinear interpolation
    pointwise_product,  // a(t, t') b(t, t')      (derived kernels)
    conjugate,          // conj(a(t, t'))         (derived kernels)
};

std::string to_string(ProfileKind kind);

/// Immutable scalar profile. Cheap to copy (shared expression node).
class ScalarProfile {
public:
    static ScalarProfile constant(cplx value);
    static ScalarProfile exponential_decay(double kappa);
    static ScalarProfile oscillatory(double omega);
    static ScalarProfile gaussian(double tau);
    /// f(t) * g(t'), where f and g are evaluated as single-time functions
    /// (constant, exp(-kappa s), exp(i omega s), exp(-(s/tau)^2)).
    static ScalarProfile separable(const ScalarProfile& f, const ScalarProfile& g);
    /// samples(i, j) = value at (t_i, t'_j), t_i = i * horizon / (n - 1). Square, n >= 2.
    static ScalarProfile tabulated(double horizon, Matrix samples);

    ScalarProfile() : ScalarProfile(constant(1.0)) {}

    cplx operator()(double t, double tp) const;
    /// Single-time evaluation; only defined for the four closed-form families.
    cplx single(double s) const;

    ScalarProfile operator*(const ScalarProfile& other) const;
    ScalarProfile conj() const;

    ProfileKind kind() const;
    /// True when the value depends on (t - t') only.
    bool is_convolution() const;
    /// True when the profile is identically zero.
    bool is_zero() const;

    json to_json() const;
    static ScalarProfile from_json(const json& j, const std::string& field);

    struct Node;

private:
    explicit ScalarProfile(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const Node> node_;
};

}  // namespace gkslcp
