#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nrt/boundary_operators.hpp"
#include "nrt/disk_dtn.hpp"

using namespace nrt;

namespace {
constexpr double kPi = std::numbers::pi;

Eigen::VectorXd random_vec(int n, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> g;
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = g(rng);
    return v;
}

// smooth space-time density on a boundary grid, zero at t = T
Eigen::MatrixXd smooth_density(const ParamBoundary& b, const TimeGrid& g,
                               unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double a0 = u(rng), a1 = u(rng), b1 = u(rng), a2 = u(rng);
    Eigen::MatrixXd phi(b.size(), g.nt);
    for (int i = 0; i < b.size(); ++i) {
        const double th = b.thetas[i];
        const double sp = a0 + a1 * std::cos(th) + b1 * std::sin(th) +
                          a2 * std::cos(2.0 * th);
        for (int k = 0; k < g.nt; ++k) {
            const double t = g.node(k);
            phi(i, k) = sp * std::sin(kPi * t / g.T);  // vanishes at t = 0, T
        }
    }
    return phi;
}
}  // namespace

TEST_CASE("bessel zeros and Rayleigh sums") {
    const auto z0 = bessel_j_zeros(0, 60);
    CHECK(z0[0] == doctest::Approx(2.404825557695773).epsilon(1e-12));
    CHECK(z0[1] == doctest::Approx(5.520078110286311).epsilon(1e-12));
    const auto z3 = bessel_j_zeros(3, 60);
    CHECK(z3[0] == doctest::Approx(6.380161895923984).epsilon(1e-10));
    for (int m : {0, 3}) {
        const auto z = m == 0 ? z0 : z3;
        double s1 = 0.0;
        for (double j : z) s1 += 1.0 / (j * j);
        // partial Rayleigh sum approaches 1/(4(m+1)) from below
        CHECK(s1 < 1.0 / (4.0 * (m + 1)));
        CHECK(1.0 / (4.0 * (m + 1)) - s1 < 2e-3);
    }
}

TEST_CASE("adjoint: involution, inner-product identity, unit weights") {
    std::mt19937 rng(5);
    std::normal_distribution<double> g;
    const ParamBoundary src = discretize(RadialShape({0.2, 0.0}, 0.4), 8);
    const ParamBoundary tgt = discretize(RadialShape({0, 0}, 1.0), 12);
    const TimeGrid grid(1.0, 4);
    DenseOperator op;
    op.source = OperatorMeta{src, {}, grid, st_weights(src, grid)};
    op.target = OperatorMeta{tgt, {}, grid, st_weights(tgt, grid)};
    op.entries.resize(tgt.size() * grid.nt, src.size() * grid.nt);
    for (Eigen::Index i = 0; i < op.entries.rows(); ++i)
        for (Eigen::Index j = 0; j < op.entries.cols(); ++j)
            op.entries(i, j) = g(rng);

    const DenseOperator adj = adjoint(op);
    const DenseOperator adj2 = adjoint(adj);
    CHECK((adj2.entries - op.entries).cwiseAbs().maxCoeff() < 1e-12);

    // <A u, v>_tgt = <u, A* v>_src for random pairs
    for (int it = 0; it < 100; ++it) {
        const Eigen::VectorXd u = random_vec(op.entries.cols(), 100 + it);
        const Eigen::VectorXd v = random_vec(op.entries.rows(), 300 + it);
        const double lhs =
            (op.entries * u).cwiseProduct(op.target.weights).dot(v);
        const double rhs =
            u.cwiseProduct(op.source.weights).dot(adj.entries * v);
        CHECK(std::abs(lhs - rhs) <=
              1e-10 * (std::abs(lhs) + std::abs(rhs) + 1.0));
    }

    DenseOperator flat = op;
    flat.source.weights.setOnes();
    flat.target.weights.setOnes();
    const DenseOperator adjf = adjoint(flat);
    CHECK((adjf.entries - op.entries.transpose()).norm() == 0.0);
}

TEST_CASE("single layer: causality, zero density, single-entry value") {
    const ParamBoundary src = discretize(RadialShape({0.3, 0.0}, 0.25), 8);
    const ParamBoundary tgt = discretize(RadialShape({0, 0}, 1.0), 12);
    const TimeGrid grid(1.0, 6);
    const DenseOperator op = assemble_single_layer(src, tgt, grid);

    // strict block-lower-triangular in time (s >= t blocks vanish)
    for (int i = 0; i < tgt.size(); ++i)
        for (int k = 0; k < grid.nt; ++k)
            for (int j = 0; j < src.size(); ++j)
                for (int l = k; l < grid.nt; ++l)
                    CHECK(op.entries(i * grid.nt + k, j * grid.nt + l) == 0.0);

    CHECK((op.entries * Eigen::VectorXd::Zero(op.entries.cols())).norm() == 0.0);

    // one-node density: field value = w * tau * Phi at the target
    Eigen::VectorXd e = Eigen::VectorXd::Zero(op.entries.cols());
    const int j = 3, l = 1;
    e(j * grid.nt + l) = 1.0;
    const Eigen::VectorXd field = op.entries * e;
    const int i = 5, k = 4;
    const double expect = src.weights[j] * grid.weight() *
                          kernel::phi(tgt.nodes[i], grid.node(k), src.nodes[j],
                                      grid.node(l));
    CHECK(field(i * grid.nt + k) == doctest::Approx(expect).epsilon(1e-14));

    // overlapping curves rejected
    CHECK_THROWS_AS(assemble_single_layer(tgt, tgt, grid), std::invalid_argument);
}

TEST_CASE("K: anti-causality, target checks, backward heat equation") {
    const ParamBoundary omega = discretize(RadialShape({0, 0}, 1.0), 24);
    const TimeGrid grid(1.0, 10);
    const std::vector<Vec2> targets = {{0.2, 0.1}, {-0.3, 0.4}, {0.5, -0.2}};
    const DenseOperator K = assemble_K(omega, targets, grid);

    // block-upper-triangular: columns whose hat support lies in the past
    // vanish (the diagonal block remains, hats couple one step back)
    for (size_t i = 0; i < targets.size(); ++i)
        for (int k = 0; k < grid.nt; ++k)
            for (int j = 0; j < omega.size(); ++j)
                for (int l = 0; l < k; ++l)
                    CHECK(K.entries(i * grid.nt + k, j * grid.nt + l) == 0.0);

    CHECK((K.entries * Eigen::VectorXd::Zero(K.entries.cols())).norm() == 0.0);

    CHECK_THROWS_AS(assemble_K(omega, std::vector<Vec2>{{1.5, 0.0}}, grid),
                    std::invalid_argument);
    CHECK_THROWS_AS(assemble_K(omega, std::vector<Vec2>{{1.0, 0.0}}, grid),
                    std::invalid_argument);

    // (d_t + Lap_x) K[phi] = 0 at interior points by finite differences
    const Eigen::VectorXd phi = flatten(smooth_density(omega, grid, 3));
    const double hs = 1e-4;
    const Vec2 z(0.25, -0.15);
    const double t = 0.42;
    const double dtn = grid.T / grid.nt;
    auto kval = [&](const Vec2& p, double tt) {
        double acc = 0.0;
        for (int j = 0; j < omega.size(); ++j)
            for (int l = 0; l < grid.nt; ++l)
                acc += omega.weights[j] *
                       kernel::k_hat_normal(omega.nodes[j], omega.normals[j],
                                            p, tt, (l + 0.5) * dtn, dtn,
                                            grid.T) *
                       phi(j * grid.nt + l);
        return acc;
    };
    const double dt = (kval(z, t + hs) - kval(z, t - hs)) / (2 * hs);
    double lap = 0.0;
    for (int c2 = 0; c2 < 2; ++c2) {
        Vec2 e = Vec2::Zero();
        e(c2) = hs;
        lap += (kval(z + e, t) - 2 * kval(z, t) + kval(z - e, t)) / (hs * hs);
    }
    CHECK(std::abs(dt + lap) / (std::abs(dt) + std::abs(lap) + 1e-12) < 1e-4);

    // K[phi](., T) -> 0: entries of the last time row involve only the tail
    // of the final hat, which carries vanishing mass
    double last_row = 0.0;
    for (int j = 0; j < omega.size(); ++j)
        last_row = std::max(last_row,
                            std::abs(kval(z, grid.T - 1e-9)));
    CHECK(last_row < 1e-12);

    // flux variant agrees with finite differences of the value kernel
    const ParamBoundary inner = discretize(RadialShape({0.1, 0.0}, 0.4), 12);
    const DenseOperator Kf = assemble_K_flux(omega, inner, grid);
    const Eigen::VectorXd kf = Kf.entries * phi;
    const int ii = 4, kk = 6;
    const double fd =
        (kval(inner.nodes[ii] + hs * inner.normals[ii], grid.node(kk)) -
         kval(inner.nodes[ii] - hs * inner.normals[ii], grid.node(kk))) /
        (2 * hs);
    CHECK(kf(ii * grid.nt + kk) == doctest::Approx(fd).epsilon(1e-5));
}

TEST_CASE("jump relation: zero density and decreasing interior-limit error") {
    const ParamBoundary omega = discretize(RadialShape({0, 0}, 1.0), 64);
    const TimeGrid grid(1.0, 16);

    const auto zero_err = jump_relation_check(
        omega, grid, Eigen::MatrixXd::Zero(64, 16), {0.1, 0.05});
    for (double e : zero_err) CHECK(e == 0.0);

    // constant-in-space density with a bump time profile
    Eigen::MatrixXd phi(64, 16);
    for (int i = 0; i < 64; ++i)
        for (int k = 0; k < 16; ++k) {
            const double s = std::sin(kPi * grid.node(k) / grid.T);
            phi(i, k) = s * s;
        }
    const auto errs = jump_relation_check(omega, grid, phi, {0.2, 0.1, 0.05});
    CHECK(errs[1] < errs[0]);
    CHECK(errs[2] < errs[1]);
    CHECK(errs[2] < 0.10);  // coarse-grid level; 5% at n=128 in acceptance
}

TEST_CASE("disk corrector requires a disk") {
    const ParamBoundary peanut =
        discretize(RadialShape({0, 0}, 1.0, {{2, -0.2, 0.0}}), 16);
    const TimeGrid grid(1.0, 4);
    CHECK_THROWS_AS(DiskCorrector(peanut, grid), std::invalid_argument);
}

TEST_CASE("R operator: basics and Green property") {
    const ParamBoundary omega = discretize(RadialShape({0, 0}, 1.0), 32);
    const TimeGrid grid(1.0, 16);
    const DiskCorrector corr(omega, grid, 16, 60);
    const RadialShape G({0.1, 0.0}, 0.5);
    const auto R = assemble_R(G, 16, corr, RKernel::green, true);

    CHECK(R.op.entries.rows() == 32 * 16);
    CHECK(R.op.entries.cols() == 16 * 16);
    // R phi = 0 for phi = 0
    CHECK((R.op.entries * Eigen::VectorXd::Zero(16 * 16)).norm() == 0.0);
    // Green-function property: per-column trace residual small
    CHECK(R.col_residual.maxCoeff() < 2e-4);  // n = 32 bandlimit level

    // free-space ablation differs measurably
    const auto Rf = assemble_R(G, 16, corr, RKernel::free_space, false);
    CHECK((R.op.entries - Rf.op.entries).norm() / Rf.op.entries.norm() > 0.2);

    // G not inside Omega rejected
    CHECK_THROWS_AS(assemble_R(RadialShape({0.8, 0.0}, 0.5), 16, corr),
                    std::invalid_argument);

    // MFS corrector realizes the same operator within its fit accuracy
    const GreenCorrector mfs(omega, grid);
    const auto Rm = assemble_R(G, 16, mfs, RKernel::green, true);
    CHECK((Rm.op.entries - R.op.entries).norm() / R.op.entries.norm() < 0.05);
    CHECK(Rm.col_residual.maxCoeff() < 0.05);
}

TEST_CASE("dense range probe: zero target and non-increasing residuals") {
    const ParamBoundary omega = discretize(RadialShape({0, 0}, 1.0), 24);
    const ParamBoundary E = discretize(RadialShape({0.0, 0.0}, 0.45), 16);
    const TimeGrid grid(1.0, 8);

    const std::vector<int> sizes = {1, 2, 4, 8, 16, 32};
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(16 * 8);
    const auto fit0 = dense_range_probe(omega, E, grid, zero, sizes);
    for (Eigen::Index i = 0; i < fit0.residuals.size(); ++i)
        CHECK(fit0.residuals(i) == 0.0);

    // target: probe field Phi(z,s;x,t) on (dE)_T for z outside E
    const Vec2 z(0.7, 0.1);
    const double s = 0.8;
    Eigen::VectorXd target(16 * 8);
    for (int i = 0; i < 16; ++i)
        for (int k = 0; k < 8; ++k)
            target(i * 8 + k) =
                kernel::phi(z, s, E.nodes[i], grid.node(k));
    const auto fit = dense_range_probe(omega, E, grid, target, sizes);
    for (Eigen::Index i = 1; i < fit.residuals.size(); ++i)
        CHECK(fit.residuals(i) <= fit.residuals(i - 1) + 1e-12);
    CHECK(fit.residuals(fit.residuals.size() - 1) < fit.residuals(0));
}

TEST_CASE("operator action self-converges under grid refinement") {
    // fixed smooth density, action evaluated at matching nodes
    const RadialShape Gs({0.2, 0.0}, 0.4);
    const RadialShape Os({0, 0}, 1.0);
    const TimeGrid grid(1.0, 8);
    auto action_norm = [&](int n) {
        const ParamBoundary src = discretize(Gs, n);
        const ParamBoundary tgt = discretize(Os, 16);
        const DenseOperator op = assemble_single_layer(src, tgt, grid);
        Eigen::VectorXd phi(n * grid.nt);
        for (int j = 0; j < n; ++j)
            for (int l = 0; l < grid.nt; ++l)
                phi(j * grid.nt + l) =
                    std::cos(src.thetas[j]) * grid.node(l);
        return (op.entries * phi).eval();
    };
    const Eigen::VectorXd a64 = action_norm(64);
    const Eigen::VectorXd a128 = action_norm(128);
    CHECK((a64 - a128).norm() / a128.norm() < 1e-3);
}
