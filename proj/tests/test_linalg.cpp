#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "nrt/linalg.hpp"

using namespace nrt::linalg;
using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST_CASE("svd reconstructs and orders singular values") {
    std::mt19937 rng(1);
    std::normal_distribution<double> g;
    MatrixXd A(30, 20);
    for (int j = 0; j < 20; ++j)
        for (int i = 0; i < 30; ++i) A(i, j) = g(rng);
    const Svd s = svd(A);
    REQUIRE(s.sigma.size() == 20);
    for (int i = 1; i < 20; ++i) CHECK(s.sigma(i) <= s.sigma(i - 1));
    const MatrixXd rec = s.U * s.sigma.asDiagonal() * s.V.transpose();
    CHECK((rec - A).norm() / A.norm() < 1e-13);
    CHECK((s.U.transpose() * s.U - MatrixXd::Identity(20, 20)).norm() < 1e-12);
    CHECK((s.V.transpose() * s.V - MatrixXd::Identity(20, 20)).norm() < 1e-12);
}

TEST_CASE("minimum-norm solve on a rank-deficient system") {
    MatrixXd A = MatrixXd::Zero(2, 2);
    A(0, 0) = 1.0;
    VectorXd b(2);
    b << 1.0, 1.0;
    const Svd s = svd(A);
    int rank = -1;
    const VectorXd x = s.solve(b, 1e-12, &rank);
    CHECK(rank == 1);
    CHECK(x(0) == doctest::Approx(1.0));
    CHECK(x(1) == doctest::Approx(0.0));

    const auto ls = tsvd_lstsq(A, b, 1e-12);
    CHECK(ls.rank == 1);
    CHECK((ls.X.col(0) - x).norm() < 1e-14);
}

TEST_CASE("tsvd_lstsq matches svd-based solve and Eigen least squares") {
    std::mt19937 rng(7);
    std::normal_distribution<double> g;
    for (int it = 0; it < 5; ++it) {
        const int m = 40, n = 25;
        MatrixXd A(m, n);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < m; ++i) A(i, j) = g(rng);
        MatrixXd B(m, 3);
        for (int j = 0; j < 3; ++j)
            for (int i = 0; i < m; ++i) B(i, j) = g(rng);

        const auto ls = tsvd_lstsq(A, B, 1e-12);
        const MatrixXd X2 = svd(A).solve(B, 1e-12);
        CHECK((ls.X - X2).norm() / X2.norm() < 1e-11);

        const MatrixXd X3 = A.completeOrthogonalDecomposition().solve(B);
        CHECK((ls.X - X3).norm() / X3.norm() < 1e-10);
    }
}

TEST_CASE("cutoff truncation discards small singular directions") {
    MatrixXd A = MatrixXd::Zero(3, 3);
    A(0, 0) = 1.0;
    A(1, 1) = 1e-3;
    A(2, 2) = 1e-9;
    VectorXd b = VectorXd::Ones(3);
    const Svd s = svd(A);
    CHECK(s.rank_at(1e-6) == 2);
    const VectorXd x = s.solve(b, 1e-6);
    CHECK(x(0) == doctest::Approx(1.0));
    CHECK(x(1) == doctest::Approx(1e3));
    CHECK(x(2) == doctest::Approx(0.0));
}

TEST_CASE("zero right-hand side gives zero solution") {
    std::mt19937 rng(3);
    std::normal_distribution<double> g;
    MatrixXd A(10, 6);
    for (int j = 0; j < 6; ++j)
        for (int i = 0; i < 10; ++i) A(i, j) = g(rng);
    const auto ls = tsvd_lstsq(A, VectorXd::Zero(10), 1e-12);
    CHECK(ls.X.norm() == 0.0);
}
