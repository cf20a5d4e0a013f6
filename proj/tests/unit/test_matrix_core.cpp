#include "generators.hpp"

#include "vinecast/error.hpp"
#include "vinecast/matrix_core.hpp"

#include <doctest.h>

#include <cmath>

using namespace vinecast;

namespace {

// Oracle: explicit triple loop over periods and asset pairs.
Eigen::MatrixXd outer_sum_oracle(const Eigen::MatrixXd& r) {
    const auto d = r.cols();
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index l = 0; l < r.rows(); ++l) {
        for (Eigen::Index i = 0; i < d; ++i) {
            for (Eigen::Index j = 0; j < d; ++j) y(i, j) += r(l, i) * r(l, j);
        }
    }
    return y;
}

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("realized covariance: hand examples") {
    Eigen::MatrixXd orth(2, 2);
    orth << 1, 0, 0, 1;
    IntradayPanel p1(2, {orth});
    CHECK(testgen::max_abs_diff(realized_cov(p1, 0).values(), Eigen::MatrixXd::Identity(2, 2)) == 0.0);

    Eigen::MatrixXd halves(2, 1);
    halves << 0.5, 0.5;
    IntradayPanel p2(1, {halves});
    CHECK(realized_cov(p2, 0)(0, 0) == doctest::Approx(0.5).epsilon(1e-15));

    Eigen::MatrixXd rank1(1, 2);
    rank1 << 1, 2;
    IntradayPanel p3(2, {rank1});
    CHECK(code_of([&] { (void)realized_cov(p3, 0); }) == ErrorCode::SingularRealizedCov);
}

TEST_CASE("realized covariance equals the outer-product oracle on random panels") {
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const int d = 1 + static_cast<int>(rng.below(4));
        const int m = d + static_cast<int>(rng.below(static_cast<std::uint64_t>(11 - d)));
        const Eigen::MatrixXd r = testgen::gaussian_matrix(m, d, rng);
        IntradayPanel panel(d, {r});
        const CovMatrix y = realized_cov(panel, 0);
        CHECK(testgen::max_abs_diff(y.values(), outer_sum_oracle(r)) < 1e-14 * std::max(1.0, y.values().cwiseAbs().maxCoeff()));
    }
}

TEST_CASE("subsampled realized covariance") {
    Rng rng(3);
    const Eigen::MatrixXd fine = testgen::gaussian_matrix(12, 2, rng);
    IntradayPanel panel(2, {fine});

    SUBCASE("one shift equals the coarse grid") {
        const Eigen::MatrixXd coarse = coarse_returns(fine, 3, 0, true);
        IntradayPanel coarse_panel(2, {coarse});
        CHECK(testgen::max_abs_diff(realized_cov_subsampled(panel, 3, 1, 0).values(),
                                    realized_cov(coarse_panel, 0).values()) < 1e-14);
    }
    SUBCASE("two shifts on a four-period day, by hand") {
        Eigen::MatrixXd day(4, 2);
        day << 1, 0, 0, 1, 1, 1, 2, -1;
        IntradayPanel toy(2, {day});
        // Shift 0 sums periods {0,1} and {2,3}; shift 1 keeps only {1,2}.
        Eigen::MatrixXd g0(2, 2);
        g0 << 1, 1, 3, 0;
        Eigen::MatrixXd g1(1, 2);
        g1 << 1, 2;
        const Eigen::MatrixXd expected = 0.5 * (g0.transpose() * g0 + g1.transpose() * g1);
        CHECK(testgen::max_abs_diff(realized_cov_subsampled(toy, 2, 2, 0).values(), expected) < 1e-14);
    }
    SUBCASE("average of the single-grid matrices") {
        Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(2, 2);
        for (int shift = 0; shift < 3; ++shift) {
            IntradayPanel grid(2, {coarse_returns(fine, 3, shift, true)});
            expected += realized_cov(grid, 0).values() / 3.0;
        }
        CHECK(testgen::max_abs_diff(realized_cov_subsampled(panel, 3, 3, 0).values(), expected) < 1e-13);
    }
}

TEST_CASE("split and assemble") {
    Eigen::MatrixXd y(2, 2);
    y << 4, 2, 2, 9;
    const auto [v, r] = split_cov(CovMatrix(y));
    CHECK(v[0] == 4.0);
    CHECK(v[1] == 9.0);
    CHECK(r(0, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(testgen::max_abs_diff(assemble_cov(v, r).values(), y) < 1e-12);

    const auto [vi, ri] = split_cov(CovMatrix(Eigen::MatrixXd::Identity(3, 3)));
    CHECK(testgen::max_abs_diff(ri.values(), Eigen::MatrixXd::Identity(3, 3)) == 0.0);
    CHECK(vi.values().isOnes());

    Eigen::MatrixXd diag = Eigen::Vector2d(4, 9).asDiagonal();
    CHECK(testgen::max_abs_diff(split_cov(CovMatrix(diag)).second.values(), Eigen::MatrixXd::Identity(2, 2)) == 0.0);
}

TEST_CASE("property: assemble(split(Y)) = Y") {
    Rng rng(5);
    for (int trial = 0; trial < 300; ++trial) {
        const int d = 2 + static_cast<int>(rng.below(6));
        const Eigen::MatrixXd y = testgen::random_pd(d, rng);
        const auto [v, r] = split_cov(CovMatrix(y));
        CHECK(testgen::max_abs_diff(assemble_cov(v, r).values(), y) < 1e-12 * y.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("Cholesky decomposition and rebuild") {
    CHECK(testgen::max_abs_diff(cholesky_decompose(CovMatrix(Eigen::MatrixXd::Identity(3, 3))).values(),
                                Eigen::MatrixXd::Identity(3, 3)) == 0.0);
    Eigen::MatrixXd y(2, 2);
    y << 4, 2, 2, 3;
    const UpperTriangular c = cholesky_decompose(CovMatrix(y));
    CHECK(c(0, 0) == 2.0);
    CHECK(c(0, 1) == 1.0);
    CHECK(c(1, 1) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK(c(1, 0) == 0.0);
    CHECK(testgen::max_abs_diff(cholesky_rebuild(c).values(), y) < 1e-14);

    Eigen::MatrixXd singular(2, 2);
    singular << 1, 1, 1, 1;
    CHECK(code_of([&] { (void)CovMatrix(singular); }) == ErrorCode::NotPositiveDefinite);

    Rng rng(9);
    for (int trial = 0; trial < 200; ++trial) {
        const Eigen::MatrixXd m = testgen::random_pd(2 + static_cast<int>(rng.below(6)), rng);
        const UpperTriangular f = cholesky_decompose(CovMatrix(m));
        CHECK((f.values().diagonal().array() > 0.0).all());
        // Independent check against Eigen's lower factor.
        const Eigen::MatrixXd l = Eigen::LLT<Eigen::MatrixXd>(m).matrixL();
        CHECK(testgen::max_abs_diff(f.values(), l.transpose()) < 1e-10 * m.cwiseAbs().maxCoeff());
        CHECK(testgen::max_abs_diff(cholesky_rebuild(f).values(), m) < 1e-12 * m.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("Fisher z") {
    CHECK(fisher_z(0.0) == 0.0);
    CHECK(fisher_z(0.5) == doctest::Approx(0.5 * std::log(3.0)).epsilon(1e-15));
    CHECK(fisher_z_inv(fisher_z(-0.9)) == doctest::Approx(-0.9).epsilon(1e-14));
    CHECK(code_of([] { (void)fisher_z(1.0 - 1e-8); }) == ErrorCode::CorrelationAtBoundary);
    CHECK_NOTHROW((void)fisher_z(1.0 - 2e-7));

    Rng rng(1);
    double prev_z = fisher_z(-0.999);
    for (int k = 0; k < 2000; ++k) {
        const double rho = -0.999 + 1.998 * rng.uniform();
        CHECK(fisher_z(-rho) == -fisher_z(rho));
        CHECK(std::abs(fisher_z_inv(fisher_z(rho)) - rho) < 1e-12);
    }
    for (int k = 1; k <= 1000; ++k) {
        const double rho = -0.999 + 1.998 * k / 1000.0;
        const double z = fisher_z(rho);
        CHECK(z > prev_z);
        prev_z = z;
    }
}

TEST_CASE("type invariants") {
    Eigen::MatrixXd asym(2, 2);
    asym << 1, 0.5, 0.4, 1;
    CHECK(code_of([&] { (void)CovMatrix(asym); }) == ErrorCode::InvalidArgument);

    Eigen::MatrixXd tiny_asym(2, 2);
    tiny_asym << 1, 0.5, 0.5 + 1e-14, 1;
    const CovMatrix sym(tiny_asym);
    CHECK(sym(0, 1) == sym(1, 0));

    Eigen::MatrixXd bad_diag(2, 2);
    bad_diag << 1, 0.2, 0.2, 1.1;
    CHECK_THROWS_AS((void)CorrMatrix(bad_diag), Error);
    CHECK_THROWS_AS((void)VarianceVector(Eigen::Vector2d(1.0, 0.0)), Error);
    Eigen::MatrixXd lower = Eigen::MatrixXd::Identity(2, 2);
    lower(1, 0) = 0.1;
    CHECK_THROWS_AS((void)UpperTriangular(lower), Error);
}
