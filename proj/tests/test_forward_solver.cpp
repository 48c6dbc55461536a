#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <functional>
#include <random>

#include "nrt/forward_solver.hpp"

using namespace nrt;

namespace {

constexpr double kPi = std::numbers::pi;

// Known caloric field: hat-ladder point sources outside the solution domain
// on both sides, with a smooth coefficient envelope in time. Seeds are fixed
// so expected values are frozen.
MFSBasis oracle_field(double outer_radius, std::optional<double> inner_radius,
                      const Vec2& inner_center, double T, unsigned seed) {
    MFSBasis b;
    std::mt19937 rng(seed);
    std::normal_distribution<double> g;
    std::vector<double> coeffs;
    const int nl = 16;
    auto envelope = [&](double amp, double ph, int l) {
        const double s = (l + 0.5) / nl;
        return amp * std::sin(kPi * s) * std::sin(kPi * s) *
               std::cos(2.0 * kPi * s + ph);
    };
    for (int j = 0; j < 6; ++j) {
        const double th = 2.0 * kPi * j / 6 + 0.3;
        const double amp = g(rng), ph = g(rng);
        for (int l = 0; l < nl; ++l) {
            b.sources.push_back({Vec2(outer_radius * std::cos(th),
                                      outer_radius * std::sin(th)),
                                 (l + 0.5) * T / nl, T / nl, SourceProfile::hat});
            coeffs.push_back(envelope(amp, ph, l));
        }
    }
    if (inner_radius) {
        for (int j = 0; j < 4; ++j) {
            const double th = 2.0 * kPi * j / 4 + 0.1;
            const double amp = 0.5 * g(rng), ph = g(rng);
            for (int l = 0; l < nl; ++l) {
                b.sources.push_back(
                    {inner_center + Vec2(*inner_radius * std::cos(th),
                                         *inner_radius * std::sin(th)),
                     (l + 0.5) * T / nl, T / nl, SourceProfile::hat});
                coeffs.push_back(envelope(amp, ph, l));
            }
        }
    }
    b.coeffs = Eigen::Map<Eigen::VectorXd>(coeffs.data(), coeffs.size());
    return b;
}

Eigen::MatrixXd trace_matrix(const MFSBasis& f, const ParamBoundary& bd,
                             const TimeGrid& grid) {
    Eigen::MatrixXd m(bd.size(), grid.nt);
    for (int i = 0; i < bd.size(); ++i)
        for (int k = 0; k < grid.nt; ++k)
            m(i, k) = f.eval(bd.nodes[i], grid.node(k));
    return m;
}

double weighted_rel_err(const Eigen::MatrixXd& got, const Eigen::MatrixXd& want,
                        const ParamBoundary& bd, const TimeGrid& grid) {
    const Eigen::VectorXd w = st_weights(bd, grid);
    const Eigen::VectorXd d = flatten(got - want);
    const Eigen::VectorXd r = flatten(want);
    const double num = std::sqrt(d.cwiseProduct(d).dot(w));
    const double den = std::sqrt(r.cwiseProduct(r).dot(w));
    return num / den;
}

}  // namespace

TEST_CASE("time grid midpoints") {
    const TimeGrid g(1.0, 4);
    CHECK(g.node(0) == doctest::Approx(0.125));
    CHECK(g.node(3) == doctest::Approx(0.875));
    double sum = 0.0;
    for (int k = 0; k < g.nt; ++k) sum += g.weight();
    CHECK(sum == doctest::Approx(g.T));
    CHECK(g.node(0) > 0.0);
    CHECK(g.node(g.nt - 1) < g.T);
}

TEST_CASE("boundary_data_g: ramp, bump, custom validation") {
    const ParamBoundary bd = discretize(RadialShape({0, 0}, 1.0), 8);
    const TimeGrid grid(1.0, 4);
    const auto ramp = boundary_data_g({BoundaryDataKind::ramp, {}, {}}, bd, grid);
    for (int i = 0; i < 8; ++i) {
        CHECK(ramp(i, 0) == doctest::Approx(0.125));
        CHECK(ramp(i, 1) == doctest::Approx(0.375));
        CHECK(ramp(i, 2) == doctest::Approx(0.625));
        CHECK(ramp(i, 3) == doctest::Approx(0.875));
    }
    // ramp at t = T/2 is 0.5 everywhere
    const TimeGrid g2(1.0, 3);  // middle node is exactly T/2
    const auto r2 = boundary_data_g({BoundaryDataKind::ramp, {}, {}}, bd, g2);
    for (int i = 0; i < 8; ++i) CHECK(r2(i, 1) == doctest::Approx(0.5));

    const auto bump = boundary_data_g({BoundaryDataKind::bump, {}, {}}, bd, grid);
    // sin^2 profile is symmetric about T/2 and vanishes at both ends
    for (int i = 0; i < 8; ++i) {
        CHECK(bump(i, 0) == doctest::Approx(bump(i, 3)));
        CHECK(bump(i, 1) == doctest::Approx(bump(i, 2)));
        CHECK(bump(i, 0) == doctest::Approx(std::pow(std::sin(kPi * 0.125), 2)));
    }

    // custom with nonzero constant term violates g(.,0) = 0
    BoundaryDataSpec bad{BoundaryDataKind::custom, {}, {1.0, 0.5}};
    CHECK_THROWS_AS(boundary_data_g(bad, bd, grid), std::invalid_argument);
    BoundaryDataSpec ok{BoundaryDataKind::custom, {{1, 0.3, 0.0}}, {0.0, 1.0}};
    const auto cg = boundary_data_g(ok, bd, grid);
    CHECK(cg(0, 0) == doctest::Approx((1.0 + 0.3) * 0.125));
}

TEST_CASE("manufactured solution: background flux recovery") {
    const RadialShape omega({0, 0}, 1.0);
    const ParamBoundary bd = discretize(omega, 48);
    const TimeGrid grid(1.0, 24);
    const MFSBasis oracle = oracle_field(1.8, std::nullopt, {0, 0}, grid.T, 42);

    const auto sol = solve_background(
        bd, [&](int i, double t) { return oracle.eval(bd.nodes[i], t); }, grid);
    CHECK(sol.diag.rel_residual < 1e-3);
    CHECK(sol.diag.ok);

    Eigen::MatrixXd want(bd.size(), grid.nt);
    for (int i = 0; i < bd.size(); ++i)
        for (int k = 0; k < grid.nt; ++k)
            want(i, k) = oracle.eval_normal_deriv(bd.nodes[i], grid.node(k),
                                                  bd.normals[i]);
    CHECK(weighted_rel_err(sol.cauchy.neumann, want, bd, grid) < 1e-3);

    // the matrix-data path (spline time interpolation) agrees with the
    // analytic-data path for smooth data
    const Eigen::MatrixXd g = trace_matrix(oracle, bd, grid);
    const auto sol2 = solve_background(bd, g, grid);
    CHECK(weighted_rel_err(sol2.cauchy.neumann, want, bd, grid) < 2e-3);
}

TEST_CASE("g = 0 gives the zero field") {
    const ParamBoundary bd = discretize(RadialShape({0, 0}, 1.0), 16);
    const TimeGrid grid(1.0, 8);
    const auto sol = solve_background(bd, Eigen::MatrixXd::Zero(16, 8), grid);
    CHECK(sol.basis.coeffs.norm() == 0.0);
    CHECK(sol.cauchy.neumann.norm() == 0.0);
    CHECK(sol.diag.rel_residual == 0.0);
}

TEST_CASE("cavity solve: boundary residual and geometry rejection") {
    const ParamBoundary omega = discretize(RadialShape({0, 0}, 1.0), 32);
    const ParamBoundary cavity = discretize(RadialShape({0.3, 0.0}, 0.25), 16);
    const TimeGrid grid(1.0, 16);
    const auto g = boundary_fn({BoundaryDataKind::ramp, {}, {}}, omega, grid);
    const auto sol = solve_direct(omega, cavity, g, grid);
    CHECK(sol.diag.rel_residual < 8e-3);

    // the cavity condition u = 0 holds on the cavity boundary at the scale
    // of the solve residual
    double cav_max = 0.0;
    for (int i = 0; i < cavity.size(); ++i)
        for (int k = 0; k < grid.nt; ++k)
            cav_max = std::max(cav_max, std::abs(sol.basis.eval(
                                            cavity.nodes[i], grid.node(k))));
    CHECK(cav_max < 2.5e-2);

    const ParamBoundary outside = discretize(RadialShape({0.9, 0.0}, 0.3), 16);
    CHECK_THROWS_AS(solve_direct(omega, outside, g, grid), std::invalid_argument);
}

TEST_CASE("interior values match a two-sided oracle") {
    // oracle with sources outside Omega and inside the cavity; the solver is
    // given the oracle traces on both boundaries and must reproduce the
    // field in between
    const RadialShape omega_s({0, 0}, 1.0);
    const RadialShape cavity_s({0.3, 0.0}, 0.25);
    const ParamBoundary omega = discretize(omega_s, 40);
    const ParamBoundary cavity = discretize(cavity_s, 24);
    const TimeGrid grid(1.0, 20);
    const MFSBasis oracle = oracle_field(1.8, 0.08, {0.3, 0.0}, grid.T, 9);

    const auto sol = solve_direct(
        omega, cavity,
        [&](int i, double t) { return oracle.eval(omega.nodes[i], t); }, grid,
        {},
        [&](int i, double t) { return oracle.eval(cavity.nodes[i], t); });
    CHECK(sol.diag.rel_residual < 5e-3);

    std::mt19937 rng(17);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    int checked = 0;
    double worst = 0.0, scale = 0.0;
    std::vector<std::pair<Vec2, double>> pts;
    while (checked < 100) {
        const Vec2 p(u(rng), u(rng));
        if (p.norm() > 0.9) continue;                      // inside Omega
        if ((p - Vec2(0.3, 0.0)).norm() < 0.3) continue;   // outside cavity
        const double t = 0.2 + 0.6 * std::abs(u(rng));
        pts.push_back({p, t});
        scale = std::max(scale, std::abs(oracle.eval(p, t)));
        ++checked;
    }
    for (const auto& [p, t] : pts)
        worst = std::max(worst,
                         std::abs(sol.basis.eval(p, t) - oracle.eval(p, t)));
    CHECK(worst / scale < 3e-3);
}

TEST_CASE("cauchy_of_w: zero dirichlet, zero for no cavity, nonzero with cavity") {
    const ParamBoundary omega = discretize(RadialShape({0, 0}, 1.0), 24);
    const ParamBoundary cavity = discretize(RadialShape({0.3, 0.0}, 0.25), 12);
    const TimeGrid grid(1.0, 8);
    const auto g = boundary_data_g({BoundaryDataKind::ramp, {}, {}}, omega, grid);

    const auto direct = solve_direct(omega, cavity, g, grid);
    const auto background = solve_background(omega, g, grid);

    const CauchyData w = cauchy_of_w(direct.cauchy, background.cauchy);
    CHECK(w.dirichlet.norm() == 0.0);  // enforced exactly
    CHECK(w.neumann.norm() > 1e-4);    // cavity leaves a flux signature

    // no cavity: identical solves, w vanishes identically
    const auto direct2 = solve_background(omega, g, grid);
    const CauchyData w0 = cauchy_of_w(direct2.cauchy, background.cauchy);
    CHECK(w0.neumann.norm() == 0.0);

    const TimeGrid other(1.0, 16);
    const auto bg2 = solve_background(omega, boundary_data_g({BoundaryDataKind::ramp, {}, {}}, omega, other), other);
    CHECK_THROWS_AS(cauchy_of_w(direct.cauchy, bg2.cauchy), std::invalid_argument);
}

TEST_CASE("field evaluation: directional derivatives and log variant") {
    const MFSBasis f = oracle_field(1.5, 0.2, {0.0, 0.0}, 1.0, 23);
    const Vec2 p(0.6, 0.1);
    const double t = 0.7;
    const Vec2 h = Vec2(0.3, 1.0).normalized();

    MFSBasis zero = f;
    zero.coeffs.setZero();
    const auto zd = zero.eval_directional_derivs(p, t, h, 3);
    for (double v : zd) CHECK(v == 0.0);

    const auto d = f.eval_directional_derivs(p, t, h, 3);
    CHECK(d[0] == doctest::Approx(f.eval(p, t)).epsilon(1e-14));

    // finite differences along h (4th order stencil)
    const double step = 4e-3;
    std::function<double(const Vec2&, int)> fd = [&](const Vec2& zz, int mm) -> double {
        if (mm == 0) return f.eval(zz, t);
        auto fv = [&](double a) { return fd(zz + a * h, mm - 1); };
        return (-fv(2 * step) + 8 * fv(step) - 8 * fv(-step) + fv(-2 * step)) /
               (12.0 * step);
    };
    for (int m = 1; m <= 3; ++m) {
        const double want = fd(p, m);
        CHECK(std::abs(d[m] - want) / std::abs(want) < 1e-5);
    }

    // log-domain evaluation agrees with the linear one
    for (int m : {0, 1, 2, 5}) {
        const auto dm = f.eval_directional_derivs(p, t, h, m);
        const auto lv = f.eval_directional_deriv_log(p, t, h, m);
        CHECK(lv.sign == (dm[m] > 0 ? 1.0 : -1.0));
        CHECK(lv.log_abs == doctest::Approx(std::log(std::abs(dm[m]))).epsilon(1e-9));
    }
}

TEST_CASE("append_scaled composes difference fields") {
    const MFSBasis a = oracle_field(1.5, std::nullopt, {0, 0}, 1.0, 5);
    const MFSBasis b = oracle_field(1.9, std::nullopt, {0, 0}, 1.0, 6);
    MFSBasis w = a;
    w.append_scaled(b, -1.0);
    const Vec2 p(0.3, -0.2);
    CHECK(w.eval(p, 0.5) == doctest::Approx(a.eval(p, 0.5) - b.eval(p, 0.5)).epsilon(1e-13));
}

TEST_CASE("MFS fields satisfy the heat equation pointwise") {
    const MFSBasis f = oracle_field(1.6, 0.15, {0.2, 0.1}, 1.0, 31);
    const double hs = 1e-4;
    for (const Vec2 p : {Vec2(0.5, 0.3), Vec2(-0.4, 0.2), Vec2(0.0, -0.6)}) {
        const double t = 0.55;
        const double dt = (f.eval(p, t + hs) - f.eval(p, t - hs)) / (2 * hs);
        double lap = 0.0;
        for (int c = 0; c < 2; ++c) {
            Vec2 e = Vec2::Zero();
            e(c) = hs;
            lap += (f.eval(p + e, t) - 2 * f.eval(p, t) + f.eval(p - e, t)) / (hs * hs);
        }
        CHECK(std::abs(dt - lap) / (std::abs(dt) + std::abs(lap) + 1e-30) < 1e-5);
    }
}

TEST_CASE("causality: restriction to (0, T/2) is stable") {
    const ParamBoundary omega = discretize(RadialShape({0, 0}, 1.0), 24);
    const TimeGrid full(1.0, 16), half(0.5, 8);  // shared midpoints on (0, T/2)
    const MFSBasis oracle = oracle_field(1.8, std::nullopt, {0, 0}, 1.0, 77);
    auto gfn = [&](int i, double t) { return oracle.eval(omega.nodes[i], t); };

    const auto sol_full = solve_background(omega, gfn, full);
    const auto sol_half = solve_background(omega, gfn, half);

    // Cauchy data on the first half coincide within solver tolerance
    const Eigen::MatrixXd nf = sol_full.cauchy.neumann.leftCols(8);
    const Eigen::MatrixXd nh = sol_half.cauchy.neumann;
    const double rel = (nf - nh).norm() / nh.norm();
    CHECK(rel < 20.0 * std::max(sol_full.diag.rel_residual,
                                sol_half.diag.rel_residual));
}

TEST_CASE("boundary residual decreases under space-time refinement") {
    const RadialShape omega_s({0, 0}, 1.0);
    const MFSBasis oracle = oracle_field(1.8, std::nullopt, {0, 0}, 1.0, 12);
    std::vector<double> residuals;
    for (auto [n, nt] : std::vector<std::pair<int, int>>{{12, 8}, {24, 16}, {48, 32}}) {
        const ParamBoundary bd = discretize(omega_s, n);
        const TimeGrid grid(1.0, nt);
        const auto sol = solve_background(
            bd, [&](int i, double t) { return oracle.eval(bd.nodes[i], t); },
            grid);
        residuals.push_back(sol.diag.rel_residual);
    }
    CHECK(residuals[1] < residuals[0]);
    CHECK(residuals[2] < residuals[1]);
}
