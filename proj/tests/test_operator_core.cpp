#include "doctest.h"
#include "test_support.hpp"

using namespace gkslcp;

TEST_CASE("vectorize stacks columns") {
    Vector v = vectorize(ops::identity(2));
    CHECK(v.size() == 4);
    CHECK(v(0) == cplx(1));
    CHECK(v(1) == cplx(0));
    CHECK(v(2) == cplx(0));
    CHECK(v(3) == cplx(1));

    // |0><1| lives in column 1, so it lands at index 0 + 2*1
    Vector e = vectorize(ops::ket_bra(2, 0, 1));
    CHECK(e(0) == cplx(0));
    CHECK(e(1) == cplx(0));
    CHECK(e(2) == cplx(1));
    CHECK(e(3) == cplx(0));
}

TEST_CASE("vectorize round trip is exact") {
    std::mt19937_64 rng(7);
    Matrix a = random::complex_normal(3, 3, rng);
    CHECK(unvectorize(vectorize(a)) == a);
}

TEST_CASE("unvectorize rejects non-square lengths") {
    CHECK_THROWS(unvectorize(Vector::Zero(5)));
}

TEST_CASE("sandwich superoperator") {
    SUBCASE("identity on both sides") {
        CHECK(sandwich_superop(ops::identity(2), ops::identity(2)).isApprox(identity_superop(2)));
    }
    SUBCASE("sigma_z on an off-diagonal element flips its sign") {
        Matrix out = gkslcp::apply(sandwich_superop(ops::sigma_z(), ops::sigma_z()), ops::ket_bra(2, 0, 1));
        CHECK(frobenius_distance(out, -ops::ket_bra(2, 0, 1)) < 1e-15);
    }
    SUBCASE("random d=3 against the triple product") {
        std::mt19937_64 rng(11);
        for (int trial = 0; trial < 5; ++trial) {
            Matrix a = random::complex_normal(3, 3, rng);
            Matrix b = random::complex_normal(3, 3, rng);
            Matrix rho = random::complex_normal(3, 3, rng);
            Matrix direct = a * rho * b;
            CHECK(frobenius_distance(gkslcp::apply(sandwich_superop(a, b), rho), direct) < 1e-12);
        }
    }
    SUBCASE("conjugation is A rho A^dagger") {
        std::mt19937_64 rng(3);
        Matrix a = random::complex_normal(2, 2, rng);
        Matrix rho = random::density(2, rng);
        CHECK(frobenius_distance(gkslcp::apply(conjugation_superop(a), rho), a * rho * a.adjoint()) < 1e-13);
    }
}

TEST_CASE("operator_dim") {
    CHECK(operator_dim(identity_superop(3)) == 3);
    CHECK_THROWS(operator_dim(Superop::Identity(5, 5)));
}

TEST_CASE("hermitian eigendecomposition") {
    SUBCASE("diagonal matrix sorts ascending") {
        Matrix a = Matrix::Zero(2, 2);
        a(0, 0) = 3.0;
        a(1, 1) = -1.0;
        auto r = hermitian_eig(a);
        CHECK(r.eigenvalues(0) == doctest::Approx(-1.0));
        CHECK(r.eigenvalues(1) == doctest::Approx(3.0));
    }
    SUBCASE("Pauli x") {
        auto r = hermitian_eig(ops::sigma_x());
        CHECK(r.eigenvalues(0) == doctest::Approx(-1.0));
        CHECK(r.eigenvalues(1) == doctest::Approx(1.0));
    }
    SUBCASE("random d=4 reconstructs") {
        std::mt19937_64 rng(99);
        Matrix a = random::hermitian(4, rng);
        auto r = hermitian_eig(a);
        Matrix rebuilt = r.eigenvectors * r.eigenvalues.cast<cplx>().asDiagonal() * r.eigenvectors.adjoint();
        CHECK((a - rebuilt).norm() <= 1e-10 * a.norm());
        Matrix gram = r.eigenvectors.adjoint() * r.eigenvectors;
        CHECK(testing::max_abs(gram - Matrix::Identity(4, 4)) <= 1e-10);
    }
    SUBCASE("non-Hermitian input is refused") {
        CHECK_THROWS_AS(hermitian_eig(ops::sigma_plus()), NotHermitianError);
    }
}

TEST_CASE("hermiticity defect") {
    CHECK(hermiticity_defect(ops::sigma_y()) == 0.0);
    CHECK(hermiticity_defect(ops::sigma_minus()) == doctest::Approx(1.0));
}

TEST_CASE("Pauli algebra sanity") {
    CHECK((ops::sigma_x() * ops::sigma_x()).isApprox(ops::identity(2)));
    CHECK((ops::sigma_x() * ops::sigma_y() - ops::sigma_y() * ops::sigma_x())
              .isApprox(cplx(0, 2) * ops::sigma_z()));
    // sigma_minus lowers |1> to |0>
    Vector one = Vector::Zero(2);
    one(1) = 1.0;
    Vector lowered = ops::sigma_minus() * one;
    CHECK(lowered(0) == cplx(1));
    CHECK(ops::sigma_plus().isApprox(ops::sigma_minus().adjoint()));
}

TEST_CASE("random density matrices are states") {
    std::mt19937_64 rng(5);
    Matrix rho = random::density(3, rng);
    CHECK(std::abs(rho.trace() - cplx(1)) < 1e-14);
    CHECK(hermitian_eig(rho).eigenvalues.minCoeff() > 0.0);
    CHECK(random::unit_vector(6, rng).norm() == doctest::Approx(1.0));
}

TEST_CASE("matrix JSON round trip") {
    std::mt19937_64 rng(1);
    Matrix a = random::complex_normal(3, 3, rng);
    CHECK(matrix_from_json(matrix_to_json(a), "m") == a);
}

TEST_CASE("matrix JSON rejects a wrong entry count") {
    json j = matrix_to_json(ops::identity(2));
    j["data"].erase(j["data"].begin());
    try {
        matrix_from_json(j, "op");
        FAIL("expected InputError");
    } catch (const InputError& e) {
        CHECK(e.field().rfind("op", 0) == 0);
    }
}
