#include "gkslcp/operator_core.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace gkslcp {

Vector vectorize(const Matrix& a) {
    // Eigen storage is column-major, so a flat copy is exactly column stacking.
    return Eigen::Map<const Vector>(a.data(), a.size());
}

Matrix unvectorize(const Vector& v) {
    const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(v.size()))));
    if (d * d != v.size()) {
        throw std::invalid_argument("unvectorize: length " + std::to_string(v.size()) + " is not a square");
    }
    return Eigen::Map<const Matrix>(v.data(), d, d);
}

Superop sandwich_superop(const Matrix& a, const Matrix& b) {
    if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows()) {
        throw std::invalid_argument("sandwich_superop: operators must be square with equal dimension");
    }
    const Eigen::Index d = a.rows();
    Superop s(d * d, d * d);
    // (A rho B)(i, j) = sum_{k,l} A(i,k) rho(k,l) B(l,j)
    for (Eigen::Index j = 0; j < d; ++j) {
        for (Eigen::Index l = 0; l < d; ++l) {
            const cplx blj = b(l, j);
            for (Eigen::Index i = 0; i < d; ++i) {
                for (Eigen::Index k = 0; k < d; ++k) {
                    s(i + d * j, k + d * l) = a(i, k) * blj;
                }
            }
        }
    }
    return s;
}

Matrix apply(const Superop& s, const Matrix& rho) {
    if (s.cols() != rho.size()) {
        throw std::invalid_argument("apply: superoperator and operator dimensions differ");
    }
    return unvectorize(s * vectorize(rho));
}

Superop identity_superop(int d) { return Superop::Identity(d * d, d * d); }

int operator_dim(const Superop& s) {
    const auto d = static_cast<int>(std::llround(std::sqrt(static_cast<double>(s.rows()))));
    if (s.rows() != s.cols() || static_cast<Eigen::Index>(d) * d != s.rows()) {
        throw std::invalid_argument("superoperator side is not a perfect square");
    }
    return d;
}

double hermiticity_defect(const Matrix& a) {
    if (a.rows() != a.cols()) {
        throw std::invalid_argument("hermiticity_defect: matrix is not square");
    }
    if (a.size() == 0) return 0.0;
    return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

HermitianEigenResult hermitian_eig(const Matrix& a, double rel_tol) {
    const double defect = hermiticity_defect(a);
    const double tol = rel_tol * std::max(a.norm(), 1e-300);
    if (defect > tol) {
        throw NotHermitianError(defect, tol);
    }
    const Matrix sym = 0.5 * (a + a.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("hermitian_eig: eigensolver did not converge");
    }
    return {solver.eigenvalues(), solver.eigenvectors()};
}

double frobenius_distance(const Matrix& a, const Matrix& b) { return (a - b).norm(); }

namespace ops {

Matrix identity(int d) { return Matrix::Identity(d, d); }

Matrix sigma_x() {
    Matrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

Matrix sigma_y() {
    Matrix m(2, 2);
    m << 0, cplx(0, -1), cplx(0, 1), 0;
    return m;
}

Matrix sigma_z() {
    Matrix m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

Matrix sigma_minus() { return ket_bra(2, 0, 1); }

Matrix sigma_plus() { return ket_bra(2, 1, 0); }

Matrix ket_bra(int d, int i, int j) {
    Matrix m = Matrix::Zero(d, d);
    m(i, j) = 1.0;
    return m;
}

}  // namespace ops

namespace random {

Matrix complex_normal(int rows, int cols, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix m(rows, cols);
    // Fill in a fixed order so results depend only on the seed.
    for (int j = 0; j < cols; ++j) {
        for (int i = 0; i < rows; ++i) {
            const double re = normal(rng);
            const double im = normal(rng);
            m(i, j) = cplx(re, im) / std::sqrt(2.0);
        }
    }
    return m;
}

Matrix hermitian(int d, std::mt19937_64& rng) {
    const Matrix g = complex_normal(d, d, rng);
    return 0.5 * (g + g.adjoint());
}

Matrix density(int d, std::mt19937_64& rng) {
    const Matrix g = complex_normal(d, d, rng);
    Matrix rho = g * g.adjoint();
    rho /= rho.trace();
    return 0.5 * (rho + rho.adjoint());
}

Vector unit_vector(int n, std::mt19937_64& rng) {
    Vector v = complex_normal(n, 1, rng);
    return v / v.norm();
}

}  // namespace random

json matrix_to_json(const Matrix& m) {
    if (m.rows() != m.cols()) {
        throw std::invalid_argument("matrix_to_json: only square matrices are serialized");
    }
    json data = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            data.push_back(json::array({m(i, j).real(), m(i, j).imag()}));
        }
    }
    return json{{"dim", m.rows()}, {"data", std::move(data)}};
}

Matrix matrix_from_json(const json& j, const std::string& field) {
    if (!j.is_object()) {
        throw InputError(field, "expected an object with \"dim\" and \"data\"");
    }
    if (!j.contains("dim")) throw InputError(field + ".dim", "missing required field");
    if (!j.contains("data")) throw InputError(field + ".data", "missing required field");
    const json& jd = j.at("dim");
    if (!jd.is_number_integer() || jd.get<long long>() < 1) {
        throw InputError(field + ".dim", "must be a positive integer");
    }
    const auto n = static_cast<Eigen::Index>(jd.get<long long>());
    const json& data = j.at("data");
    if (!data.is_array() || static_cast<Eigen::Index>(data.size()) != n * n) {
        throw InputError(field + ".data", "must hold exactly dim*dim [re, im] pairs");
    }
    Matrix m(n, n);
    for (Eigen::Index k = 0; k < n * n; ++k) {
        const json& e = data[static_cast<std::size_t>(k)];
        if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
            throw InputError(field + ".data[" + std::to_string(k) + "]", "expected [re, im]");
        }
        m(k / n, k % n) = cplx(e[0].get<double>(), e[1].get<double>());
    }
    return m;
}

}  // namespace gkslcp
