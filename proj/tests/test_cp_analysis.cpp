#include "doctest.h"
#include "gkslcp/cp_analysis.hpp"
#include "test_support.hpp"

using namespace gkslcp;

namespace {

Superop transpose_map(int d) {
    Superop p = Superop::Zero(d * d, d * d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) p(i + d * j, j + d * i) = 1.0;
    return p;
}

/// Effective rate gamma(t) = sin(3t): the tabulated kernel 3 cos(3 t') (sigma_z . sigma_z - id).
/// Gamma(t) = (1 - cos 3t)/3 >= 0 keeps every node CP, while gamma < 0 on (pi/3, 2 pi/3)
/// makes the intervals there non-CP.
MapTrajectory sign_changing_dephasing(const TimeGrid& grid) {
    const int n = grid.size();
    Matrix samples(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) samples(i, j) = 3.0 * std::cos(3.0 * grid.node(j));
    SuperopKernel k(2);
    k.add(ScalarProfile::tabulated(grid.horizon, samples),
          sandwich_superop(ops::sigma_z(), ops::sigma_z()) - identity_superop(2));
    return solve_local(k, grid, Family::local_full);
}

TwoTimeOperatorFunction constant_w(const Matrix& op) {
    TwoTimeOperatorFunction w(static_cast<int>(op.rows()));
    w.add(ScalarProfile::constant(1.0), op);
    return w;
}

}  // namespace

TEST_CASE("Choi spectra of elementary maps") {
    SUBCASE("identity has rank one with eigenvalue d") {
        auto r = hermitian_eig(choi(identity_superop(2)).matrix);
        CHECK(r.eigenvalues(3) == doctest::Approx(2.0));
        CHECK(std::abs(r.eigenvalues(2)) < 1e-14);
    }
    SUBCASE("Pauli conjugation") {
        auto r = hermitian_eig(choi(conjugation_superop(ops::sigma_x())).matrix);
        CHECK(r.eigenvalues(3) == doctest::Approx(2.0));
        CHECK(r.eigenvalues(0) > -1e-14);
    }
    SUBCASE("transpose is the canonical non-CP positive map") {
        auto w = choi_witness(choi(transpose_map(2)));
        CHECK(w.lambda_min == doctest::Approx(-1.0));
        CHECK_FALSE(cp_check(choi(transpose_map(2))).cp);
        CHECK(cp_check(choi(identity_superop(2))).cp);
    }
    SUBCASE("Choi of a Kraus map is sum vec(K) vec(K)^dagger") {
        std::mt19937_64 rng(6);
        Matrix k1 = random::complex_normal(3, 3, rng), k2 = random::complex_normal(3, 3, rng);
        Superop map = conjugation_superop(k1) + conjugation_superop(k2);
        Matrix expected = vectorize(k1) * vectorize(k1).adjoint() + vectorize(k2) * vectorize(k2).adjoint();
        CHECK((choi(map).matrix - expected).norm() < 1e-12);
        CHECK((superop_from_choi(choi(map)) - map).norm() < 1e-12);
    }
    SUBCASE("trace preservation shows up as trace d") {
        auto tr = solve_local(testing::random_kernel(3, 4), TimeGrid(1.0, 50));
        CHECK(std::abs(choi(tr.maps.back()).matrix.trace() - cplx(3)) < 1e-8);
        CHECK(hermiticity_defect(choi(tr.maps.back()).matrix) < 1e-10);
    }
}

TEST_CASE("cp_check threshold scales with dimension") {
    Superop tiny_negative = identity_superop(2) + 1e-9 * transpose_map(2);
    auto c = cp_check(choi(tiny_negative));
    CHECK(c.threshold == doctest::Approx(-2e-8));
    CHECK(c.cp);
}

TEST_CASE("measure M") {
    std::mt19937_64 rng(21);
    SUBCASE("identity map gives |<Psi|Phi>|^2") {
        for (int s = 0; s < 10; ++s) {
            Vector psi = random::unit_vector(4, rng), phi = random::unit_vector(4, rng);
            CHECK(measure_value(identity_superop(2), psi, phi) == doctest::Approx(std::norm(psi.dot(phi))));
        }
    }
    SUBCASE("transpose map has negative samples") {
        auto s = measure_sample(transpose_map(2), 1000);
        CHECK(s.min_value < 0.0);
        CHECK(s.seed == kDefaultSeed);
        // the Choi eigenvector is a witness with Phi the maximally entangled vector
        auto w = choi_witness(choi(transpose_map(2)));
        Vector phi = vectorize(ops::identity(2)) / std::sqrt(2.0);
        CHECK(measure_value(transpose_map(2), w.eigenvector, phi) == doctest::Approx(w.lambda_min / 2.0));
    }
    SUBCASE("CP maps never go below the tolerance") {
        auto tr = solve_local(testing::random_kernel(2, 9), TimeGrid(2.0, 100));
        for (int m : {50, 100}) {
            REQUIRE(cp_check(choi(tr.maps[m])).cp);
            CHECK(measure_sample(tr.maps[m], 300, 5).min_value >= -2e-8);
        }
    }
    SUBCASE("fixed seed is reproducible") {
        auto a = measure_sample(transpose_map(2), 50, 99);
        auto b = measure_sample(transpose_map(2), 50, 99);
        CHECK(a.min_value == b.min_value);
        CHECK(a.psi == b.psi);
    }
}

TEST_CASE("Kraus decomposition") {
    SUBCASE("identity map") {
        auto k = kraus_extract(choi(identity_superop(2)));
        REQUIRE(k.operators.size() == 1u);
        Matrix op = k.operators[0];
        cplx phase = op(0, 0) / std::abs(op(0, 0));
        CHECK(testing::max_abs(op / phase - ops::identity(2)) < 1e-12);
    }
    SUBCASE("unitary conjugation") {
        std::mt19937_64 rng(1);
        Matrix u = testing::expm(Superop(cplx(0, 1) * random::hermitian(3, rng)));
        auto k = kraus_extract(choi(conjugation_superop(u)));
        REQUIRE(k.operators.size() == 1u);
        Matrix op = k.operators[0];
        cplx phase = (u.adjoint() * op).trace() / 3.0;
        CHECK(std::abs(std::abs(phase) - 1.0) < 1e-10);
        CHECK(testing::max_abs(op - phase * u) < 1e-10);
    }
    SUBCASE("dephasing map at t = 1") {
        auto tr = solve_local(testing::dephasing(), TimeGrid(1.0, 200));
        auto k = kraus_extract(choi(tr.maps.back()));
        CHECK(k.operators.size() == 2u);
        CHECK((kraus_reconstruct(k) - tr.maps.back()).norm() < 1e-8);
        CHECK(kraus_completeness_defect(k) < 1e-8);
    }
    SUBCASE("non-CP input is refused") {
        CHECK_THROWS_AS(kraus_extract(choi(transpose_map(2))), NotCPError);
    }
}

TEST_CASE("Kraus product condition") {
    SUBCASE("single unitary") {
        KrausSet k{{ops::sigma_y()}, {2.0}};
        CHECK(kraus_condition_check(k).holds);
    }
    SUBCASE("single invertible non-unitary element") {
        Matrix a(2, 2);
        a << 2.0, 1.0, 0.0, 0.5;
        KrausSet k{{a}, {1.0}};
        CHECK(kraus_condition_check(k).holds);
    }
    SUBCASE("two-element dephasing set fails on the cross term") {
        auto tr = solve_local(testing::dephasing(), TimeGrid(1.0, 100));
        auto r = kraus_condition_check(kraus_extract(choi(tr.maps.back())));
        CHECK_FALSE(r.holds);
        CHECK(r.failed == KrausClause::off_diagonal);
        CHECK(r.diagonal_residual < 1e-8);
    }
    SUBCASE("singular element") {
        KrausSet k{{ops::sigma_minus()}, {1.0}};
        auto r = kraus_condition_check(k);
        CHECK_FALSE(r.holds);
        CHECK(r.failed == KrausClause::singular);
        CHECK(r.singular_index == 0);
    }
}

TEST_CASE("CP divisibility") {
    SUBCASE("identity trajectory") {
        auto tr = solve_local(GKSLKernel::zero(2), TimeGrid(1.0, 20));
        for (const auto& v : divisibility_check(tr)) CHECK(v.status == IntervalStatus::cp);
    }
    SUBCASE("exponential dephasing is divisible") {
        auto tr = solve_local(testing::dephasing(), TimeGrid(2.0, 200));
        auto verdicts = divisibility_check(tr);
        CHECK(verdicts.size() == 200u);
        for (const auto& v : verdicts) CHECK(v.status == IntervalStatus::cp);
    }
    SUBCASE("sign-changing rate breaks divisibility but not CP") {
        TimeGrid grid(2.0, 400);
        auto tr = sign_changing_dephasing(grid);
        for (const auto& m : tr.maps) CHECK(cp_check(choi(m)).cp);
        int bad = 0;
        for (const auto& v : divisibility_check(tr)) {
            double mid = grid.node(v.from) + 0.5 * grid.step();
            if (v.status == IntervalStatus::not_cp) {
                ++bad;
                CHECK(std::sin(3.0 * mid) < 0.0);
            }
        }
        CHECK(bad > 0);
        // the coherence factor follows exp(-2 Gamma) with Gamma = (1 - cos 3t)/3
        Matrix out = gkslcp::apply(tr.maps.back(), ops::ket_bra(2, 0, 1));
        CHECK(out(0, 1).real() == doctest::Approx(std::exp(-2.0 * (1.0 - std::cos(6.0)) / 3.0)).epsilon(1e-6));
    }
    SUBCASE("a singular map makes the next interval indeterminate") {
        MapTrajectory tr;
        tr.grid = TimeGrid(1.0, 2);
        tr.maps = {identity_superop(2), Superop::Zero(4, 4), Superop::Zero(4, 4)};
        auto v = divisibility_check(tr);
        CHECK(v[0].status == IntervalStatus::cp);
        CHECK(v[1].status == IntervalStatus::indeterminate);
    }
}

TEST_CASE("certify and its report formats") {
    auto tr = solve_local(testing::dephasing(), TimeGrid(2.0, 100));
    auto r = certify(tr);
    CHECK(r.all_cp());
    CHECK(r.all_tp());
    CHECK(r.non_cp_intervals() == 0);
    CHECK(r.nodes.size() == 101u);
    const std::string csv = cp_report_csv(r);
    CHECK(csv.rfind("t,lambda_min,trace_dev,div_lambda_min,verdict\n", 0) == 0);
    json j = cp_report_to_json(r);
    CHECK(j.at("nodes").size() == 101u);
}

TEST_CASE("W sign convention from the scalar oracle") {
    const auto& s = resolve_w_sign_convention();
    CHECK(s.convention == WSignConvention::nonpositive);
    CHECK(s.lambda_min_positive_w < -1e-3);
    CHECK(s.lambda_min_negative_w > -1e-8);
    CHECK(s.measure_min_positive_w < 0.0);
}

TEST_CASE("strict W condition") {
    TimeGrid grid(2.0, 100);
    Matrix basis = ops::identity(2);
    SUBCASE("scalar profile times identity") {
        TwoTimeOperatorFunction w(2);
        w.add(ScalarProfile::exponential_decay(1.0), -ops::identity(2));
        auto r = w_strict_condition_check(w, grid, basis);
        CHECK(r.diagonal);
        CHECK(r.uniform_diagonal);
        CHECK(r.max_off_diagonal == 0.0);
        CHECK(r.verdict);
    }
    SUBCASE("sigma_x") {
        auto r = w_strict_condition_check(constant_w(ops::sigma_x()), grid, basis);
        CHECK(r.max_off_diagonal == doctest::Approx(1.0));
        CHECK_FALSE(r.verdict);
    }
    SUBCASE("non-uniform diagonal W passes the sign reading yet is not CP") {
        // entries evolve as cosh(sqrt(a_i + a_j) t); cosh(sqrt2 t) cosh(t) < cosh^2(sqrt1.5 t)
        Matrix diag = Matrix::Zero(2, 2);
        diag(0, 0) = -1.0;
        diag(1, 1) = -0.5;
        auto r = w_strict_condition_check(constant_w(diag), grid, basis);
        CHECK(r.diagonal);
        CHECK_FALSE(r.uniform_diagonal);
        CHECK(r.pass_nonpositive);
        auto tr = solve_nonlocal_z(constant_w(diag), grid);
        CHECK(choi_witness(choi(tr.maps.back())).lambda_min < -1e-3);
    }
    SUBCASE("dephasing W is diagonal in the sigma_z basis") {
        auto r = w_strict_condition_check(split_kernel(testing::dephasing()).w_op, grid, basis);
        CHECK(r.diagonal);
    }
}

TEST_CASE("Z counterexample search") {
    TimeGrid grid(2.0, 400);
    SUBCASE("sigma_x") {
        auto w = z_counterexample(constant_w(ops::sigma_x()), grid);
        REQUIRE(w.has_value());
        CHECK(w->measure < -1e-7);
        CHECK(w->choi_lambda_min < -1e-7);
        CHECK(w->t <= 2.0);
        // the reported vectors reproduce the reported value
        auto tr = solve_nonlocal_z(constant_w(ops::sigma_x()), grid);
        CHECK(measure_value(tr.maps[w->node], w->psi, w->phi) == doctest::Approx(w->measure));
    }
    SUBCASE("sigma_plus") {
        auto w = z_counterexample(constant_w(ops::sigma_plus()), grid);
        REQUIRE(w.has_value());
        CHECK(w->measure < -1e-7);
        CHECK(w->choi_lambda_min < -1e-7);
    }
    SUBCASE("diagonal W has nothing to seed the ansatz") {
        TwoTimeOperatorFunction w(2);
        w.add(ScalarProfile::exponential_decay(1.0), -ops::identity(2));
        CHECK_FALSE(z_counterexample(w, grid).has_value());
        for (const auto& m : solve_nonlocal_z(w, grid).maps) CHECK(cp_check(choi(m)).cp);
    }
    SUBCASE("opposite relative phase finds no witness for sigma_x") {
        ZCounterexampleOptions opt;
        opt.phase_offset = 3.14159265358979323846;
        CHECK_FALSE(z_counterexample(constant_w(ops::sigma_x()), grid, opt).has_value());
    }
}
