// Dense operator / superoperator algebra on small Hilbert spaces
//
// Conventions frozen for the whole library (and every file it writes):
//   * vec(A)[i + d*j] = A(i, j)            (column stacking)
//   * a superoperator S acts as vec(S(rho)) = S * vec(rho)
//   * norms are Frobenius unless a function says otherwise

#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "json.hpp"

namespace gkslcp {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;   // d x d operator
using Superop = Eigen::MatrixXcd;  // d^2 x d^2, acts on column-stacked operators
using Vector = Eigen::VectorXcd;
using json = nlohmann::json;

inline constexpr int kMinDim = 2;
inline constexpr int kMaxDim = 8;

/// Thrown for malformed input documents; `field()` names the offending key path.
class InputError : public std::runtime_error {
public:
    InputError(std::string field, const std::string& what)
        : std::runtime_error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Thrown when an operator claimed to be Hermitian is not (within tolerance).
class NotHermitianError : public std::invalid_argument {
public:
    NotHermitianError(double asymmetry, double tol)
        : std::invalid_argument("matrix is not Hermitian: asymmetry " + std::to_string(asymmetry) +
                                " exceeds " + std::to_string(tol)),
          asymmetry_(asymmetry) {}
    double asymmetry() const noexcept { return asymmetry_; }

private:
    double asymmetry_;
};

Vector vectorize(const Matrix& a);
Matrix unvectorize(const Vector& v);

/// Superoperator of rho -> A rho B, i.e. kron(B^T, A) under column stacking.
Superop sandwich_superop(const Matrix& a, const Matrix& b);

/// rho -> A rho A^dagger
inline Superop conjugation_superop(const Matrix& a) { return sandwich_superop(a, a.adjoint()); }

Matrix apply(const Superop& s, const Matrix& rho);

Superop identity_superop(int d);

/// Dimension d of the operators a superoperator acts on; throws if D is not a square.
int operator_dim(const Superop& s);

/// max |A - A^dagger| entrywise
double hermiticity_defect(const Matrix& a);

struct HermitianEigenResult {
    Eigen::VectorXd eigenvalues;  // ascending
    Matrix eigenvectors;          // orthonormal columns
};

/// Eigendecomposition of a Hermitian matrix. The input is symmetrised as (A + A^dagger)/2
/// after checking max|A - A^dagger| <= rel_tol * ||A||_F.
HermitianEigenResult hermitian_eig(const Matrix& a, double rel_tol = 1e-9);

double frobenius_distance(const Matrix& a, const Matrix& b);

namespace ops {
Matrix identity(int d);
Matrix sigma_x();
Matrix sigma_y();
Matrix sigma_z();
/// sigma_minus = |0><1|; it lowers |1> to |0>.
Matrix sigma_minus();
Matrix sigma_plus();
/// |i><j| in dimension d
Matrix ket_bra(int d, int i, int j);
}  // namespace ops

namespace random {
Matrix complex_normal(int rows, int cols, std::mt19937_64& rng);
Matrix hermitian(int d, std::mt19937_64& rng);
/// Random full-rank density matrix (G G^dagger / tr).
Matrix density(int d, std::mt19937_64& rng);
Vector unit_vector(int n, std::mt19937_64& rng);
}  // namespace random

// Matrices serialize as {"dim": n, "data": [[re, im], ...]} in row-major order.
json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const json& j, const std::string& field);

}  // namespace gkslcp
