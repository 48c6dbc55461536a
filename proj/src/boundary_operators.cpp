#include "nrt/boundary_operators.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "nrt/disk_dtn.hpp"
#include "nrt/heat_kernel.hpp"

#include <complex>
#include <unsupported/Eigen/FFT>

namespace nrt {

namespace {

double min_pair_distance(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& p : a)
        for (const auto& q : b) d = std::min(d, (p - q).norm());
    return d;
}

OperatorMeta boundary_meta(const ParamBoundary& b, const TimeGrid& g) {
    return {b, {}, g, st_weights(b, g)};
}

OperatorMeta point_meta(const std::vector<Vec2>& pts, const TimeGrid& g) {
    return {std::nullopt, pts, g,
            Eigen::VectorXd::Ones(static_cast<Eigen::Index>(pts.size()) * g.nt)};
}

void check_targets_inside(const ParamBoundary& omega,
                          const std::vector<Vec2>& targets) {
    for (const auto& p : targets)
        if (!omega.shape.contains(p))
            throw std::invalid_argument(
                "assemble_K: target on or outside the source curve");
}

}  // namespace

DenseOperator adjoint(const DenseOperator& op) {
    DenseOperator a;
    a.entries = op.source.weights.cwiseInverse().asDiagonal() *
                op.entries.transpose() * op.target.weights.asDiagonal();
    a.source = op.target;
    a.target = op.source;
    return a;
}

DenseOperator assemble_single_layer(const ParamBoundary& src,
                                    const ParamBoundary& tgt,
                                    const TimeGrid& grid) {
    if (min_pair_distance(src.nodes, tgt.nodes) <= 1e-12)
        throw std::invalid_argument("assemble_single_layer: curves overlap");
    DenseOperator op;
    op.source = boundary_meta(src, grid);
    op.target = boundary_meta(tgt, grid);
    const int nt = grid.nt;
    op.entries.resize(static_cast<Eigen::Index>(tgt.size()) * nt,
                      static_cast<Eigen::Index>(src.size()) * nt);
    for (int i = 0; i < tgt.size(); ++i)
        for (int k = 0; k < nt; ++k) {
            const double t = grid.node(k);
            for (int j = 0; j < src.size(); ++j) {
                const double wq = src.weights[j] * grid.weight();
                for (int l = 0; l < nt; ++l)
                    op.entries(i * nt + k, j * nt + l) =
                        kernel::phi(tgt.nodes[i], t, src.nodes[j], grid.node(l)) * wq;
            }
        }
    return op;
}

DenseOperator assemble_single_layer(const ParamBoundary& src,
                                    const std::vector<Vec2>& tgt,
                                    const TimeGrid& grid) {
    if (min_pair_distance(src.nodes, tgt) <= 1e-12)
        throw std::invalid_argument("assemble_single_layer: targets touch curve");
    DenseOperator op;
    op.source = boundary_meta(src, grid);
    op.target = point_meta(tgt, grid);
    const int nt = grid.nt;
    op.entries.resize(static_cast<Eigen::Index>(tgt.size()) * nt,
                      static_cast<Eigen::Index>(src.size()) * nt);
    for (size_t i = 0; i < tgt.size(); ++i)
        for (int k = 0; k < nt; ++k) {
            const double t = grid.node(k);
            for (int j = 0; j < src.size(); ++j) {
                const double wq = src.weights[j] * grid.weight();
                for (int l = 0; l < nt; ++l)
                    op.entries(i * nt + k, j * nt + l) =
                        kernel::phi(tgt[i], t, src.nodes[j], grid.node(l)) * wq;
            }
        }
    return op;
}

DenseOperator assemble_single_layer_flux(const ParamBoundary& src,
                                         const ParamBoundary& tgt,
                                         const TimeGrid& grid) {
    if (min_pair_distance(src.nodes, tgt.nodes) <= 1e-12)
        throw std::invalid_argument("assemble_single_layer_flux: curves overlap");
    DenseOperator op;
    op.source = boundary_meta(src, grid);
    op.target = boundary_meta(tgt, grid);
    const int nt = grid.nt;
    op.entries.resize(static_cast<Eigen::Index>(tgt.size()) * nt,
                      static_cast<Eigen::Index>(src.size()) * nt);
    for (int i = 0; i < tgt.size(); ++i)
        for (int k = 0; k < nt; ++k) {
            const double t = grid.node(k);
            for (int j = 0; j < src.size(); ++j) {
                const double wq = src.weights[j] * grid.weight();
                for (int l = 0; l < nt; ++l)
                    op.entries(i * nt + k, j * nt + l) =
                        kernel::normal_deriv_phi(tgt.nodes[i], t, src.nodes[j],
                                                 grid.node(l), tgt.normals[i]) *
                        wq;
            }
        }
    return op;
}

namespace {

// Shared core for K-type assemblies: hat-in-time density columns integrated
// exactly, entry = w_y int hat_l(s) del_{nu(y)} Phi(y,s;x,t) ds. Anti-causal:
// zero once the hat support lies entirely in the past.
Eigen::MatrixXd k_entries(const ParamBoundary& omega,
                          const std::vector<Vec2>& targets,
                          const TimeGrid& grid) {
    const int nt = grid.nt;
    const double dt = grid.T / nt;
    Eigen::MatrixXd m(static_cast<Eigen::Index>(targets.size()) * nt,
                      static_cast<Eigen::Index>(omega.size()) * nt);
    for (size_t i = 0; i < targets.size(); ++i)
        for (int k = 0; k < nt; ++k) {
            const double t = grid.node(k);
            for (int j = 0; j < omega.size(); ++j)
                for (int l = 0; l < nt; ++l)
                    m(i * nt + k, j * nt + l) =
                        omega.weights[j] *
                        kernel::k_hat_normal(omega.nodes[j], omega.normals[j],
                                             targets[i], t, (l + 0.5) * dt, dt,
                                             grid.T);
        }
    return m;
}

}  // namespace

DenseOperator assemble_K(const ParamBoundary& omega,
                         const std::vector<Vec2>& targets,
                         const TimeGrid& grid) {
    check_targets_inside(omega, targets);
    DenseOperator op;
    op.source = boundary_meta(omega, grid);
    op.target = point_meta(targets, grid);
    op.entries = k_entries(omega, targets, grid);
    return op;
}

DenseOperator assemble_K(const ParamBoundary& omega, const ParamBoundary& tgt,
                         const TimeGrid& grid) {
    check_targets_inside(omega, tgt.nodes);
    DenseOperator op;
    op.source = boundary_meta(omega, grid);
    op.target = boundary_meta(tgt, grid);
    op.entries = k_entries(omega, tgt.nodes, grid);
    return op;
}

DenseOperator assemble_K_flux(const ParamBoundary& omega,
                              const ParamBoundary& tgt, const TimeGrid& grid) {
    check_targets_inside(omega, tgt.nodes);
    DenseOperator op;
    op.source = boundary_meta(omega, grid);
    op.target = boundary_meta(tgt, grid);
    const int nt = grid.nt;
    const double dt = grid.T / nt;
    op.entries.resize(static_cast<Eigen::Index>(tgt.size()) * nt,
                      static_cast<Eigen::Index>(omega.size()) * nt);
    for (int i = 0; i < tgt.size(); ++i)
        for (int k = 0; k < nt; ++k) {
            const double t = grid.node(k);
            for (int j = 0; j < omega.size(); ++j)
                for (int l = 0; l < nt; ++l)
                    op.entries(i * nt + k, j * nt + l) =
                        omega.weights[j] *
                        kernel::k_hat_normal_flux(
                            omega.nodes[j], omega.normals[j], tgt.nodes[i],
                            tgt.normals[i], t, (l + 0.5) * dt, dt, grid.T);
        }
    return op;
}

DenseOperator assemble_calK(const ParamBoundary& omega, const TimeGrid& grid) {
    DenseOperator op;
    op.source = boundary_meta(omega, grid);
    op.target = boundary_meta(omega, grid);
    op.entries = k_entries(omega, omega.nodes, grid);
    return op;
}

Eigen::MatrixXd trace_of_K(const ParamBoundary& omega, const TimeGrid& grid,
                           bool) {
    // boundary trace via the jump relation; the hat-exact time integration
    // makes the on-surface kernel smooth, so plain nodal quadrature suffices
    Eigen::MatrixXd m = assemble_calK(omega, grid).entries;
    const int nt = grid.nt;
    for (int i = 0; i < omega.size(); ++i)
        for (int k = 0; k < nt; ++k)
            m(i * nt + k, i * nt + k) += -0.5;
    return m;
}

// ---------------------------------------------------------------------------

GreenCorrector::GreenCorrector(const ParamBoundary& omega, const TimeGrid& grid,
                               const SolveParams& params)
    : omega_(omega), grid_(grid),
      cgrid_(grid.T, grid.nt * std::max(1, params.collocation_refine)),
      cutoff_(params.svd_cutoff) {
    const RadialShape src_curve = omega.shape.scaled(params.omega_source_factor);
    const double dtheta = 2.0 * std::numbers::pi / omega.size();
    const double dt = grid.T / grid.nt;
    for (int j = 0; j < omega.size(); ++j) {
        const Vec2 p = src_curve.point(j * dtheta);
        for (int l = 0; l < grid.nt; ++l)
            sources_.push_back({p, (l + 0.5) * dt, dt, SourceProfile::hat});
    }
    const Eigen::Index rows =
        static_cast<Eigen::Index>(omega.size()) * cgrid_.nt;
    const Eigen::Index cols = static_cast<Eigen::Index>(sources_.size());
    A_.resize(rows, cols);
    N_.resize(static_cast<Eigen::Index>(omega.size()) * grid.nt, cols);
    sqrt_w_ = st_weights(omega, cgrid_).cwiseSqrt();
    for (int i = 0; i < omega.size(); ++i) {
        for (int k = 0; k < cgrid_.nt; ++k) {
            const Eigen::Index r = static_cast<Eigen::Index>(i) * cgrid_.nt + k;
            const double t = cgrid_.node(k);
            for (Eigen::Index j = 0; j < cols; ++j)
                A_(r, j) = sqrt_w_(r) * source_eval(sources_[j], omega.nodes[i], t);
        }
        for (int k = 0; k < grid.nt; ++k) {
            const Eigen::Index r = static_cast<Eigen::Index>(i) * grid.nt + k;
            const double t = grid.node(k);
            for (Eigen::Index j = 0; j < cols; ++j)
                N_(r, j) = source_grad(sources_[j], omega.nodes[i], t)
                               .dot(omega.normals[i]);
        }
    }
    svd_ = linalg::svd(A_);
}

CorrectionResult GreenCorrector::correct(const Eigen::MatrixXd& traces) const {
    if (traces.rows() != A_.rows())
        throw std::invalid_argument(
            "GreenCorrector: expected traces on the refined collocation grid");
    const Eigen::MatrixXd rhs = sqrt_w_.asDiagonal() * traces;
    const Eigen::MatrixXd C = svd_.solve(rhs, cutoff_);
    CorrectionResult res;
    res.flux = N_ * C;
    res.col_residual.resize(traces.cols());
    const Eigen::MatrixXd mis = A_ * C - rhs;
    for (Eigen::Index j = 0; j < traces.cols(); ++j) {
        const double denom = rhs.col(j).norm();
        res.col_residual(j) = denom > 0.0 ? mis.col(j).norm() / denom : 0.0;
    }
    return res;
}

CorrectionResult GreenCorrector::column_flux(const ParamBoundary& gb,
                                             bool) const {
    const double dt = grid_.T / grid_.nt;
    Eigen::MatrixXd trace(
        static_cast<Eigen::Index>(omega_.size()) * cgrid_.nt,
        static_cast<Eigen::Index>(gb.size()) * grid_.nt);
    for (int i = 0; i < omega_.size(); ++i)
        for (int k = 0; k < cgrid_.nt; ++k) {
            const double t = cgrid_.node(k);
            for (int j = 0; j < gb.size(); ++j)
                for (int l = 0; l < grid_.nt; ++l)
                    trace(i * cgrid_.nt + k, j * grid_.nt + l) =
                        gb.weights[j] * kernel::phi_hat(omega_.nodes[i], t,
                                                        gb.nodes[j],
                                                        (l + 0.5) * dt, dt);
        }
    return correct(trace);
}

// ---------------------------------------------------------------------------

DiskCorrector::DiskCorrector(const ParamBoundary& omega, const TimeGrid& grid,
                             int fine_per_dt, int n_modes)
    : omega_(omega), grid_(grid) {
    if (!omega.shape.terms().empty())
        throw std::invalid_argument("DiskCorrector: Omega must be a disk");
    dtn_ = std::make_shared<DiskDtN>(omega.shape.radius0(), grid.T,
                                     omega.size(), grid.nt, fine_per_dt,
                                     n_modes);
}

CorrectionResult DiskCorrector::column_flux(const ParamBoundary& gb,
                                            bool with_residual) const {
    const int n = omega_.size();
    const int nt = grid_.nt;
    const double dt = grid_.T / nt;
    const int nf = dtn_->fine_count();
    const double h = dtn_->fine_step();
    const int fpd = nf / nt;
    CorrectionResult res;
    res.flux.resize(static_cast<Eigen::Index>(n) * nt,
                    static_cast<Eigen::Index>(gb.size()) * nt);
    res.col_residual =
        Eigen::VectorXd::Zero(static_cast<Eigen::Index>(gb.size()) * nt);

    // fine verification grid for the bandlimit residual (doubled theta nodes)
    const int nv = 2 * n;
    std::vector<Vec2> vnodes(nv);
    const Vec2 c = omega_.shape.center();
    const double R = omega_.shape.radius0();
    for (int i = 0; i < nv; ++i) {
        const double th = 2.0 * std::numbers::pi * i / nv;
        vnodes[i] = c + R * Vec2(std::cos(th), std::sin(th));
    }

    Eigen::MatrixXd f(n, nf + 1), fp(n, nf + 1), fpp(n, nf + 1);
    Eigen::MatrixXd fs(n, nf + 1), fps(n, nf + 1), fpps(n, nf + 1);
    Eigen::FFT<double> fft;
    for (int j = 0; j < gb.size(); ++j) {
        // base column (l = 0); columns l >= 1 are time translates of l = 1,
        // and l = 1 itself reuses the unclipped all-l shape
        for (int base = 0; base < 2; ++base) {
            Eigen::MatrixXd& bf = base == 0 ? f : fs;
            Eigen::MatrixXd& bfp = base == 0 ? fp : fps;
            Eigen::MatrixXd& bfpp = base == 0 ? fpp : fpps;
            for (int i = 0; i < n; ++i)
                for (int q = 0; q <= nf; ++q) {
                    const auto jet = kernel::phi_hat_time_jet(
                        omega_.nodes[i], q * h, gb.nodes[j],
                        (base + 0.5) * dt, dt);
                    bf(i, q) = gb.weights[j] * jet.v;
                    bfp(i, q) = gb.weights[j] * jet.dv;
                    bfpp(i, q) = gb.weights[j] * jet.ddv;
                }
        }
        // the DtN map is time-invariant, so column l >= 1 fluxes are shifted
        // copies of column 1
        const Eigen::MatrixXd flux0 = dtn_->flux(f, fp, fpp);
        const Eigen::MatrixXd flux1 = dtn_->flux(fs, fps, fpps);
        for (int l = 0; l < nt; ++l) {
            Eigen::MatrixXd fl = Eigen::MatrixXd::Zero(n, nt);
            if (l == 0) fl = flux0;
            else fl.rightCols(nt - (l - 1)) = flux1.leftCols(nt - (l - 1));
            res.flux.col(static_cast<Eigen::Index>(j) * nt + l) = flatten(fl);
        }
        if (with_residual) {
            // bandlimit representation error of the column trace, measured by
            // reconstructing on a doubled theta grid; shifted columns share
            // the value of column 1
            auto band_residual = [&](const Eigen::MatrixXd& cf, int l) {
                double num = 0.0, den = 0.0;
                std::vector<double> in(n);
                std::vector<std::complex<double>> spec(n);
                for (int k = 0; k < nt; ++k) {
                    const int q = (2 * k + 1) * fpd / 2;
                    for (int i = 0; i < n; ++i) in[i] = cf(i, q);
                    fft.fwd(spec, in);
                    const double t = grid_.node(k);
                    for (int i = 0; i < nv; ++i) {
                        const double th = 2.0 * std::numbers::pi * i / nv;
                        std::complex<double> rec(0.0, 0.0);
                        for (int m = 0; m <= n / 2; ++m) {
                            const double fac = (m == 0 || m == n / 2) ? 1.0 : 2.0;
                            rec += fac * spec[m] *
                                   std::exp(std::complex<double>(0.0, m * th));
                        }
                        const double vrec = rec.real() / n;
                        const double vdir =
                            gb.weights[j] * kernel::phi_hat(vnodes[i], t,
                                                            gb.nodes[j],
                                                            (l + 0.5) * dt, dt);
                        num += (vrec - vdir) * (vrec - vdir);
                        den += vdir * vdir;
                    }
                }
                return den > 0.0 ? std::sqrt(num / den) : 0.0;
            };
            const double r0 = band_residual(f, 0);
            const double r1 = band_residual(fs, 1);
            res.col_residual(static_cast<Eigen::Index>(j) * nt) = r0;
            for (int l = 1; l < nt; ++l)
                res.col_residual(static_cast<Eigen::Index>(j) * nt + l) = r1;
        }
    }
    return res;
}

RAssembly assemble_R(const RadialShape& G, int n_G, const OmegaCorrector& corr,
                     RKernel kind, bool with_residual) {
    if (!shape_inclusion(G, corr.omega().shape))
        throw std::invalid_argument("assemble_R: G not strictly inside Omega");
    const ParamBoundary gb = discretize(G, n_G);
    const TimeGrid& grid = corr.grid();
    const ParamBoundary& om = corr.omega();
    const int nt = grid.nt;
    const double dt = grid.T / nt;

    // flux of the hat-density single layer on the data grid
    RAssembly out;
    out.op.source = OperatorMeta{gb, {}, grid, st_weights(gb, grid)};
    out.op.target = OperatorMeta{om, {}, grid, st_weights(om, grid)};
    out.op.entries.resize(static_cast<Eigen::Index>(om.size()) * nt,
                          static_cast<Eigen::Index>(gb.size()) * nt);
    for (int i = 0; i < om.size(); ++i)
        for (int k = 0; k < nt; ++k) {
            const double t = grid.node(k);
            for (int j = 0; j < gb.size(); ++j)
                for (int l = 0; l < nt; ++l)
                    out.op.entries(i * nt + k, j * nt + l) =
                        gb.weights[j] *
                        kernel::grad_phi_hat(om.nodes[i], t, gb.nodes[j],
                                             (l + 0.5) * dt, dt)
                            .dot(om.normals[i]);
        }
    if (kind == RKernel::free_space) {
        out.col_residual = Eigen::VectorXd::Zero(out.op.entries.cols());
        return out;
    }
    const auto corrres = corr.column_flux(gb, with_residual);
    out.op.entries -= corrres.flux;
    out.col_residual = corrres.col_residual;
    return out;
}

// ---------------------------------------------------------------------------

std::vector<double> jump_relation_check(const ParamBoundary& omega,
                                        const TimeGrid& grid,
                                        const Eigen::MatrixXd& phi,
                                        const std::vector<double>& eps_list) {
    const Eigen::VectorXd phivec = flatten(phi);
    const double scale = phivec.cwiseAbs().maxCoeff();
    if (scale == 0.0) return std::vector<double>(eps_list.size(), 0.0);
    const Eigen::VectorXd on_boundary =
        trace_of_K(omega, grid, /*corner_correction=*/false) * phivec;
    std::vector<double> errs;
    errs.reserve(eps_list.size());
    for (double eps : eps_list) {
        std::vector<Vec2> targets(omega.size());
        for (int i = 0; i < omega.size(); ++i)
            targets[i] = omega.nodes[i] - eps * omega.normals[i];
        const Eigen::VectorXd inner =
            assemble_K(omega, targets, grid).entries * phivec;
        errs.push_back((inner - on_boundary).cwiseAbs().maxCoeff() / scale);
    }
    return errs;
}

Eigen::MatrixXd density_modes(const ParamBoundary& omega, const TimeGrid& grid,
                              int n_modes) {
    const int nt = grid.nt;
    const Eigen::Index rows = static_cast<Eigen::Index>(omega.size()) * nt;
    Eigen::MatrixXd B(rows, n_modes);
    // modes ordered by total order: (spatial harmonic order) + (time order q)
    int col = 0;
    for (int total = 0; col < n_modes; ++total) {
        for (int sp = 0; sp <= total && col < n_modes; ++sp) {
            const int q = total - sp + 1;  // time frequency, >= 1
            // spatial functions of order sp: sp = 0 -> 1; else cos/sin pair
            for (int variant = 0; variant < (sp == 0 ? 1 : 2) && col < n_modes;
                 ++variant) {
                for (int i = 0; i < omega.size(); ++i) {
                    const double th = omega.thetas[i];
                    const double sv = sp == 0 ? 1.0
                                     : variant == 0 ? std::cos(sp * th)
                                                    : std::sin(sp * th);
                    for (int k = 0; k < nt; ++k)
                        B(static_cast<Eigen::Index>(i) * nt + k, col) =
                            sv * std::sin(q * std::numbers::pi *
                                          grid.node(k) / grid.T);
                }
                ++col;
            }
        }
    }
    return B;
}

DenseRangeFit dense_range_probe(const ParamBoundary& omega,
                                const ParamBoundary& E, const TimeGrid& grid,
                                const Eigen::VectorXd& target,
                                const std::vector<int>& basis_sizes) {
    if (basis_sizes.empty())
        throw std::invalid_argument("dense_range_probe: no basis sizes");
    const DenseOperator K = assemble_K(omega, E, grid);
    if (target.size() != K.entries.rows())
        throw std::invalid_argument("dense_range_probe: target size mismatch");
    const int n_max = *std::max_element(basis_sizes.begin(), basis_sizes.end());
    const Eigen::MatrixXd B = density_modes(omega, grid, n_max);
    const Eigen::VectorXd sw = st_weights(E, grid).cwiseSqrt();
    const Eigen::MatrixXd M = sw.asDiagonal() * (K.entries * B);
    const Eigen::VectorXd tw = sw.asDiagonal() * target;
    const double tnorm = tw.norm();

    DenseRangeFit fit;
    fit.basis_sizes = basis_sizes;
    fit.residuals.resize(basis_sizes.size());
    Eigen::VectorXd coef_full;
    for (size_t s = 0; s < basis_sizes.size(); ++s) {
        const int n = basis_sizes[s];
        if (n < 1 || n > n_max)
            throw std::invalid_argument("dense_range_probe: bad basis size");
        const auto ls = linalg::tsvd_lstsq(M.leftCols(n), tw, 1e-12);
        const double r = (M.leftCols(n) * ls.X.col(0) - tw).norm();
        fit.residuals(s) = tnorm > 0.0 ? r / tnorm : 0.0;
        if (n == n_max) coef_full = ls.X.col(0);
    }
    if (coef_full.size() == 0) {
        const auto ls = linalg::tsvd_lstsq(M.leftCols(n_max), tw, 1e-12);
        coef_full = ls.X.col(0);
    }
    fit.density = B.leftCols(coef_full.size()) * coef_full;
    fit.fitted = K.entries * fit.density;
    return fit;
}

}  // namespace nrt
