#include "doctest.h"

#include "tvvar/linalg.hpp"
#include "tvvar/oracle.hpp"
#include "tvvar/random.hpp"

using namespace tvvar;

TEST_CASE("random stream is reproducible and order independent") {
    RandomStream a(42);
    RandomStream b(42);
    for (int i = 0; i < 10; ++i) CHECK(a.next_u64() == b.next_u64());
    const MatrixXd m1 = RandomStream(42).split(3).normal_matrix<double>(4, 5);
    RandomStream root(42);
    (void)root.split(1).normal_matrix<double>(100, 1);
    const MatrixXd m2 = root.split(3).normal_matrix<double>(4, 5);
    CHECK(m1 == m2);
    CHECK(RandomStream(42).split(3).next_u64() != RandomStream(42).split(4).next_u64());
}

TEST_CASE("truncated svd reconstructs a low-rank matrix") {
    RandomStream rng(1);
    const MatrixXd M = rng.normal_matrix<double>(30, 3) * rng.normal_matrix<double>(3, 20);
    const auto svd = truncated_svd(M, 3);
    CHECK(svd.U.cols() == 3);
    CHECK(svd.Vt.rows() == 3);
    const MatrixXd back = svd.U * svd.s.asDiagonal() * svd.Vt;
    CHECK((back - M).norm() <= 1e-12 * M.norm());
    CHECK((svd.U.transpose() * svd.U - MatrixXd::Identity(3, 3)).norm() < 1e-12);
    for (Eigen::Index k = 0; k < 3; ++k) {
        Eigen::Index i = 0;
        svd.U.col(k).cwiseAbs().maxCoeff(&i);
        CHECK(svd.U(i, k) >= 0.0);
    }
}

TEST_CASE("large-matrix path agrees with the dense svd") {
    RandomStream rng(2);
    const MatrixXd M = rng.normal_matrix<double>(1100, 4) * rng.normal_matrix<double>(4, 1050) +
                       1e-3 * rng.normal_matrix<double>(1100, 1050);
    const auto fast = truncated_svd(M, 4);
    Eigen::BDCSVD<MatrixXd> dense(M);
    CHECK((fast.s - dense.singularValues().head(4)).norm() <= 1e-9 * dense.singularValues()(0));
    const MatrixXd again = truncated_svd(M, 4).U;
    CHECK(again == fast.U);
}

TEST_CASE("truncated svd rejects bad ranks and non-finite input") {
    MatrixXd M = MatrixXd::Ones(3, 4);
    CHECK_THROWS_AS(truncated_svd(M, 0), ParameterError);
    CHECK_THROWS_AS(truncated_svd(M, 4), ParameterError);
    M(1, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(truncated_svd(M, 1), DataError);
}

TEST_CASE("pseudo inverse satisfies the Penrose conditions") {
    RandomStream rng(3);
    const MatrixXd A = rng.normal_matrix<double>(6, 2) * rng.normal_matrix<double>(2, 5);
    const MatrixXd P = pseudo_inverse(A);
    CHECK((A * P * A - A).norm() < 1e-10);
    CHECK((P * A * P - P).norm() < 1e-10);
    CHECK(((A * P).transpose() - A * P).norm() < 1e-10);
    CHECK(pseudo_inverse(MatrixXd::Zero(3, 2)).isZero());
}

TEST_CASE("solve_ridge") {
    RandomStream rng(4);
    const MatrixXd B = rng.normal_matrix<double>(5, 5);
    const MatrixXd A = B * B.transpose() + MatrixXd::Identity(5, 5);
    const MatrixXd rhs = rng.normal_matrix<double>(5, 2);
    CHECK((A * solve_ridge(A, rhs, 0.0) - rhs).norm() < 1e-10);

    MatrixXd singular = MatrixXd::Zero(3, 3);
    singular(0, 0) = 1.0;
    CHECK_THROWS_AS(solve_ridge(singular, MatrixXd::Ones(3, 1), 0.0, "update_W"), SingularityError);
    try {
        solve_ridge(singular, MatrixXd::Ones(3, 1), 0.0, "update_W");
    } catch (const SingularityError& e) {
        CHECK(std::string(e.what()).find("update_W") != std::string::npos);
    }
    // the ridge rescues it
    CHECK_NOTHROW(solve_ridge(singular, MatrixXd::Ones(3, 1), 1e-3));
    MatrixXd asym = A;
    asym(0, 1) += 1.0;
    CHECK_THROWS_AS(solve_ridge(asym, rhs, 0.0), ParameterError);
}

TEST_CASE("kronecker kernels match dense materialization") {
    RandomStream rng(5);
    for (int i = 0; i < 25; ++i) {
        const Eigen::Index dN = 1 + static_cast<Eigen::Index>(rng.next_u64() % 9);
        const Eigen::Index R = 1 + static_cast<Eigen::Index>(rng.next_u64() % 4);
        const VectorXd x = rng.normal_matrix<double>(R, 1);
        const MatrixXd V = rng.normal_matrix<double>(dN, R);
        const VectorXd z = rng.normal_matrix<double>(dN, 1);
        CHECK((kron_apply_vt_z(x, V, z) - oracle::dense_vt_z(x, V, z)).cwiseAbs().maxCoeff() < 1e-12);
        const VectorXd y = rng.normal_matrix<double>(R * R, 1);
        CHECK((kron_apply_zx_I(z, x, y, R) - oracle::dense_zx_I(z, x, y, R)).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("kron_apply_vt_z with 1x1 blocks is a product") {
    VectorXd x(1), z(1);
    MatrixXd V(1, 1);
    x << 2.0;
    V << 3.0;
    z << 5.0;
    CHECK(kron_apply_vt_z(x, V, z)(0) == doctest::Approx(30.0));
}

TEST_CASE("conjugate gradient") {
    RandomStream rng(6);
    const MatrixXd B = rng.normal_matrix<double>(8, 8);
    const MatrixXd A = B * B.transpose() + 0.5 * MatrixXd::Identity(8, 8);
    LinearOperator<double> op{8, 8, [&](const VectorXd& v) -> VectorXd { return A * v; }};
    const VectorXd rhs = rng.normal_matrix<double>(8, 1);

    SUBCASE("solves an SPD system") {
        const auto r = conjugate_gradient(op, rhs, VectorXd(VectorXd::Zero(8)), 80);
        CHECK((A * r.x - rhs).norm() <= 1e-9 * rhs.norm());
    }
    SUBCASE("one iteration is a steepest-descent step") {
        const VectorXd x0 = VectorXd::Zero(8);
        const auto r = conjugate_gradient(op, rhs, x0, 1);
        const double alpha = rhs.squaredNorm() / rhs.dot(A * rhs);
        CHECK((r.x - alpha * rhs).norm() < 1e-12);
        CHECK(r.iterations == 1);
    }
    SUBCASE("warm start at the solution exits immediately") {
        const VectorXd sol = A.llt().solve(rhs);
        const auto r = conjugate_gradient(op, rhs, sol, 5);
        CHECK(r.iterations <= 1);
    }
    SUBCASE("negative curvature is a breakdown") {
        LinearOperator<double> neg{8, 8, [&](const VectorXd& v) -> VectorXd { return -A * v; }};
        CHECK_THROWS_AS(conjugate_gradient(neg, rhs, VectorXd(VectorXd::Zero(8)), 3), BreakdownError);
    }
}
