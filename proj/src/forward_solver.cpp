#include "nrt/forward_solver.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>

#include "nrt/linalg.hpp"

namespace nrt {

namespace {

std::vector<MFSSource> sources_on(const RadialShape& shape, double factor,
                                  int n_space, const TimeGrid& grid) {
    const RadialShape curve = shape.scaled(factor);
    std::vector<MFSSource> out;
    out.reserve(static_cast<size_t>(n_space) * grid.nt);
    const double dtheta = 2.0 * std::numbers::pi / n_space;
    const double dt = grid.T / grid.nt;
    for (int j = 0; j < n_space; ++j) {
        const Vec2 p = curve.point(j * dtheta);
        // hat nodes on the uniform midpoint grid of [0, T); the half-offset
        // leaves density freedom at sigma = T, which the flux at late times
        // needs
        for (int l = 0; l < grid.nt; ++l)
            out.push_back({p, (l + 0.5) * dt, dt, SourceProfile::hat});
    }
    return out;
}

}  // namespace

double source_eval(const MFSSource& s, const Vec2& x, double t) {
    switch (s.profile) {
        case SourceProfile::impulse:
            return kernel::phi(x, t, s.point, s.time);
        case SourceProfile::slab:
            return kernel::phi_box((x - s.point).squaredNorm(),
                                   std::max(t - s.time - s.width, 0.0),
                                   t - s.time);
        case SourceProfile::hat:
            return kernel::phi_hat(x, t, s.point, s.time, s.width);
    }
    return 0.0;
}

Vec2 source_grad(const MFSSource& s, const Vec2& x, double t) {
    switch (s.profile) {
        case SourceProfile::impulse:
            return kernel::grad_y_phi(x, t, s.point, s.time);
        case SourceProfile::slab:
            return kernel::grad_phi_box(x, t, s.point, s.time,
                                        s.time + s.width);
        case SourceProfile::hat:
            return kernel::grad_phi_hat(x, t, s.point, s.time, s.width);
    }
    return Vec2::Zero();
}

double MFSBasis::eval(const Vec2& x, double t) const {
    double v = 0.0;
    for (size_t j = 0; j < sources.size(); ++j)
        v += coeffs(j) * source_eval(sources[j], x, t);
    return v;
}

Vec2 MFSBasis::eval_grad(const Vec2& x, double t) const {
    Vec2 v = Vec2::Zero();
    for (size_t j = 0; j < sources.size(); ++j)
        v += coeffs(j) * source_grad(sources[j], x, t);
    return v;
}

double MFSBasis::eval_normal_deriv(const Vec2& x, double t,
                                   const Vec2& nu) const {
    return eval_grad(x, t).dot(nu);
}

std::vector<double> MFSBasis::eval_directional_derivs(const Vec2& x, double t,
                                                      const Vec2& h,
                                                      int m_max) const {
    std::vector<double> acc(m_max + 1, 0.0);
    for (size_t j = 0; j < sources.size(); ++j) {
        const MFSSource& s = sources[j];
        std::vector<double> d;
        switch (s.profile) {
            case SourceProfile::impulse:
                d = kernel::directional_derivs(h, m_max, x, t, s.point, s.time);
                break;
            case SourceProfile::slab:
                d = kernel::phi_box_derivs(h, m_max, x, t, s.point, s.time,
                                           s.time + s.width);
                break;
            case SourceProfile::hat:
                d = kernel::phi_hat_derivs(h, m_max, x, t, s.point, s.time,
                                           s.width);
                break;
        }
        for (int m = 0; m <= m_max; ++m) acc[m] += coeffs(j) * d[m];
    }
    return acc;
}

kernel::LogVal MFSBasis::eval_directional_deriv_log(const Vec2& x, double t,
                                                    const Vec2& h,
                                                    int m) const {
    // Box-source magnitudes stay within double range for m <= 60 at the
    // distances the diagnostics probe, so the linear sum suffices here.
    const double v = eval_directional_derivs(x, t, h, m)[m];
    if (v == 0.0) return {-std::numeric_limits<double>::infinity(), 0.0};
    return {std::log(std::abs(v)), v > 0.0 ? 1.0 : -1.0};
}

void MFSBasis::append_scaled(const MFSBasis& other, double factor) {
    const Eigen::Index n0 = coeffs.size();
    sources.insert(sources.end(), other.sources.begin(), other.sources.end());
    coeffs.conservativeResize(n0 + other.coeffs.size());
    coeffs.tail(other.coeffs.size()) = factor * other.coeffs;
}

Eigen::MatrixXd boundary_data_g(const BoundaryDataSpec& spec,
                                const ParamBoundary& boundary,
                                const TimeGrid& grid) {
    const int n = boundary.size();
    Eigen::MatrixXd g(n, grid.nt);
    auto profile = [&](double t) -> double {
        switch (spec.kind) {
            case BoundaryDataKind::ramp:
                return t / grid.T;
            case BoundaryDataKind::bump: {
                const double s = std::sin(std::numbers::pi * t / grid.T);
                return s * s;
            }
            case BoundaryDataKind::custom: {
                // time_poly[j] multiplies (t/T)^j
                double v = 0.0, p = 1.0;
                for (size_t j = 0; j < spec.time_poly.size(); ++j) {
                    v += spec.time_poly[j] * p;
                    p *= t / grid.T;
                }
                return v;
            }
        }
        return 0.0;
    };
    if (spec.kind == BoundaryDataKind::custom && !spec.time_poly.empty() &&
        spec.time_poly[0] != 0.0)
        throw std::invalid_argument("boundary_data_g: g(.,0) != 0");
    for (int i = 0; i < n; ++i) {
        double sp = 1.0;
        if (spec.kind == BoundaryDataKind::custom) {
            const double th = boundary.thetas[i];
            for (const auto& t : spec.spatial)
                sp += t.a * std::cos(t.k * th) + t.b * std::sin(t.k * th);
        }
        for (int k = 0; k < grid.nt; ++k) g(i, k) = sp * profile(grid.node(k));
    }
    return g;
}

Eigen::VectorXd st_weights(const ParamBoundary& b, const TimeGrid& g) {
    Eigen::VectorXd w(static_cast<Eigen::Index>(b.size()) * g.nt);
    for (int i = 0; i < b.size(); ++i)
        for (int k = 0; k < g.nt; ++k)
            w(static_cast<Eigen::Index>(i) * g.nt + k) =
                b.weights[i] * g.weight();
    return w;
}

Eigen::VectorXd flatten(const Eigen::MatrixXd& field) {
    Eigen::VectorXd v(field.size());
    for (Eigen::Index i = 0; i < field.rows(); ++i)
        for (Eigen::Index k = 0; k < field.cols(); ++k)
            v(i * field.cols() + k) = field(i, k);
    return v;
}

Eigen::MatrixXd unflatten(const Eigen::VectorXd& v, int n, int nt) {
    if (v.size() != static_cast<Eigen::Index>(n) * nt)
        throw std::invalid_argument("unflatten: size mismatch");
    Eigen::MatrixXd m(n, nt);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < nt; ++k) m(i, k) = v(static_cast<Eigen::Index>(i) * nt + k);
    return m;
}

CauchyData trace_on(const MFSBasis& basis, const ParamBoundary& boundary,
                    const TimeGrid& grid) {
    CauchyData cd{boundary, grid, Eigen::MatrixXd(boundary.size(), grid.nt),
                  Eigen::MatrixXd(boundary.size(), grid.nt)};
    for (int i = 0; i < boundary.size(); ++i) {
        for (int k = 0; k < grid.nt; ++k) {
            const double t = grid.node(k);
            cd.dirichlet(i, k) = basis.eval(boundary.nodes[i], t);
            cd.neumann(i, k) =
                basis.eval_normal_deriv(boundary.nodes[i], t, boundary.normals[i]);
        }
    }
    return cd;
}

BoundaryFn boundary_fn(const BoundaryDataSpec& spec,
                       const ParamBoundary& boundary, const TimeGrid& grid) {
    // validate once (also rejects a nonzero constant term)
    boundary_data_g(spec, boundary, grid);
    const double T = grid.T;
    std::vector<double> thetas = boundary.thetas;
    return [spec, thetas, T](int node, double t) -> double {
        double profile = 0.0;
        switch (spec.kind) {
            case BoundaryDataKind::ramp:
                profile = t / T;
                break;
            case BoundaryDataKind::bump: {
                const double s = std::sin(std::numbers::pi * t / T);
                profile = s * s;
                break;
            }
            case BoundaryDataKind::custom: {
                double p = 1.0;
                for (size_t j = 0; j < spec.time_poly.size(); ++j) {
                    profile += spec.time_poly[j] * p;
                    p *= t / T;
                }
                break;
            }
        }
        double sp = 1.0;
        if (spec.kind == BoundaryDataKind::custom)
            for (const auto& trm : spec.spatial)
                sp += trm.a * std::cos(trm.k * thetas[node]) +
                      trm.b * std::sin(trm.k * thetas[node]);
        return sp * profile;
    };
}

BoundaryFn boundary_fn(const Eigen::MatrixXd& g, const TimeGrid& grid) {
    // per-node natural cubic spline through (0, 0) and the data nodes
    const int n = static_cast<int>(g.rows());
    const int nt = grid.nt;
    std::vector<double> knots(nt + 1);
    knots[0] = 0.0;
    for (int k = 0; k < nt; ++k) knots[k + 1] = grid.node(k);
    // second derivatives per node series (natural ends), standard tridiagonal
    auto spline_m = std::make_shared<Eigen::MatrixXd>(n, nt + 1);
    auto values = std::make_shared<Eigen::MatrixXd>(n, nt + 1);
    for (int i = 0; i < n; ++i) {
        (*values)(i, 0) = 0.0;
        for (int k = 0; k < nt; ++k) (*values)(i, k + 1) = g(i, k);
    }
    const int m = nt + 1;
    Eigen::VectorXd a(m), bb(m), c(m), d(m);
    for (int i = 0; i < n; ++i) {
        a.setZero(); bb.setZero(); c.setZero(); d.setZero();
        bb(0) = 1.0; bb(m - 1) = 1.0;
        for (int j = 1; j < m - 1; ++j) {
            const double h0 = knots[j] - knots[j - 1];
            const double h1 = knots[j + 1] - knots[j];
            a(j) = h0 / 6.0;
            bb(j) = (h0 + h1) / 3.0;
            c(j) = h1 / 6.0;
            d(j) = ((*values)(i, j + 1) - (*values)(i, j)) / h1 -
                   ((*values)(i, j) - (*values)(i, j - 1)) / h0;
        }
        // Thomas sweep
        for (int j = 1; j < m; ++j) {
            const double w = a(j) / bb(j - 1);
            bb(j) -= w * c(j - 1);
            d(j) -= w * d(j - 1);
        }
        (*spline_m)(i, m - 1) = d(m - 1) / bb(m - 1);
        for (int j = m - 2; j >= 0; --j)
            (*spline_m)(i, j) = (d(j) - c(j) * (*spline_m)(i, j + 1)) / bb(j);
    }
    return [spline_m, values, knots](int node, double t) -> double {
        const int m = static_cast<int>(knots.size());
        int j = static_cast<int>(std::upper_bound(knots.begin(), knots.end(), t) -
                                 knots.begin()) - 1;
        j = std::clamp(j, 0, m - 2);
        const double h = knots[j + 1] - knots[j];
        const double A = (knots[j + 1] - t) / h;
        const double B = (t - knots[j]) / h;
        return A * (*values)(node, j) + B * (*values)(node, j + 1) +
               ((A * A * A - A) * (*spline_m)(node, j) +
                (B * B * B - B) * (*spline_m)(node, j + 1)) * h * h / 6.0;
    };
}

ForwardSolution solve_direct(const ParamBoundary& omega,
                             const std::optional<ParamBoundary>& cavity,
                             const BoundaryFn& g, const TimeGrid& grid,
                             const SolveParams& params,
                             const BoundaryFn& cavity_data) {
    if (cavity && !shape_inclusion(cavity->shape, omega.shape))
        throw std::invalid_argument("solve_direct: cavity not strictly inside");

    MFSBasis basis;
    {
        auto s = sources_on(omega.shape, params.omega_source_factor,
                            omega.size(), grid);
        basis.sources = std::move(s);
        if (cavity) {
            auto c = sources_on(cavity->shape, params.cavity_source_factor,
                                cavity->size(), grid);
            basis.sources.insert(basis.sources.end(), c.begin(), c.end());
        }
    }

    // collocation on a time grid refined beyond the data grid; rows scaled by
    // sqrt(quadrature weight) so the residual is a boundary-L2 one
    const TimeGrid cgrid(grid.T, grid.nt * std::max(1, params.collocation_refine));
    const int nct = cgrid.nt;
    const int n_rows_outer = omega.size() * nct;
    const int n_rows_cav = cavity ? cavity->size() * nct : 0;
    const int rows = n_rows_outer + n_rows_cav;
    const int cols = static_cast<int>(basis.sources.size());
    Eigen::MatrixXd A(rows, cols);
    Eigen::VectorXd b(rows);

    auto fill_rows = [&](const ParamBoundary& bd, int row0) {
        for (int i = 0; i < bd.size(); ++i) {
            for (int k = 0; k < nct; ++k) {
                const int r = row0 + i * nct + k;
                const double t = cgrid.node(k);
                const double sw = std::sqrt(bd.weights[i] * cgrid.weight());
                for (int j = 0; j < cols; ++j)
                    A(r, j) = sw * source_eval(basis.sources[j], bd.nodes[i], t);
            }
        }
    };
    fill_rows(omega, 0);
    if (cavity) fill_rows(*cavity, n_rows_outer);

    for (int i = 0; i < omega.size(); ++i)
        for (int k = 0; k < nct; ++k)
            b(i * nct + k) =
                std::sqrt(omega.weights[i] * cgrid.weight()) * g(i, cgrid.node(k));
    b.tail(n_rows_cav).setZero();
    if (cavity && cavity_data)
        for (int i = 0; i < cavity->size(); ++i)
            for (int k = 0; k < nct; ++k)
                b(n_rows_outer + i * nct + k) =
                    std::sqrt(cavity->weights[i] * cgrid.weight()) *
                    cavity_data(i, cgrid.node(k));

    const auto ls = linalg::tsvd_lstsq(A, b, params.svd_cutoff);
    basis.coeffs = ls.X.col(0);

    SolveDiagnostics diag;
    diag.rank = ls.rank;
    diag.sigma_max = ls.sigma.size() ? ls.sigma(0) : 0.0;
    const double bnorm = b.norm();
    diag.rel_residual = bnorm > 0.0 ? (A * basis.coeffs - b).norm() / bnorm : 0.0;
    diag.ok = diag.rel_residual <= params.residual_tol;

    CauchyData cauchy = trace_on(basis, omega, grid);
    for (int i = 0; i < omega.size(); ++i)  // carries the prescribed trace
        for (int k = 0; k < grid.nt; ++k)
            cauchy.dirichlet(i, k) = g(i, grid.node(k));
    return ForwardSolution{std::move(basis), std::move(cauchy), diag};
}

ForwardSolution solve_direct(const ParamBoundary& omega,
                             const std::optional<ParamBoundary>& cavity,
                             const Eigen::MatrixXd& g, const TimeGrid& grid,
                             const SolveParams& params) {
    if (g.rows() != omega.size() || g.cols() != grid.nt)
        throw std::invalid_argument("solve_direct: g shape mismatch");
    return solve_direct(omega, cavity, boundary_fn(g, grid), grid, params);
}

ForwardSolution solve_background(const ParamBoundary& omega,
                                 const BoundaryFn& g, const TimeGrid& grid,
                                 const SolveParams& params) {
    return solve_direct(omega, std::nullopt, g, grid, params);
}

ForwardSolution solve_background(const ParamBoundary& omega,
                                 const Eigen::MatrixXd& g, const TimeGrid& grid,
                                 const SolveParams& params) {
    return solve_direct(omega, std::nullopt, g, grid, params);
}

CauchyData cauchy_of_w(const CauchyData& direct, const CauchyData& background) {
    if (direct.boundary.size() != background.boundary.size() ||
        !(direct.grid == background.grid))
        throw std::invalid_argument("cauchy_of_w: grid mismatch");
    CauchyData w{direct.boundary, direct.grid,
                 Eigen::MatrixXd::Zero(direct.boundary.size(), direct.grid.nt),
                 direct.neumann - background.neumann};
    return w;
}

}  // namespace nrt
