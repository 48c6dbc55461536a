#ifndef NRT_FORWARD_SOLVER_HPP
#define NRT_FORWARD_SOLVER_HPP

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nrt/geometry.hpp"
#include "nrt/heat_kernel.hpp"
#include "nrt/time_grid.hpp"

// Synthetic Cauchy data by space-time MFS collocation: fields are sums of
// time-integrated heat kernels (kernel::phi_box) with source points placed
// off the physical curves (outside Omega on a dilated copy, inside the
// cavity on a shrunk copy) and source slabs tiling [0, T) on a uniform grid.
// Every basis field satisfies the heat equation and the zero initial
// condition exactly; boundary conditions hold in truncated-SVD least
// squares. Impulsive (width = 0) sources are fields of Phi itself.

namespace nrt {

enum class SourceProfile { impulse, slab, hat };

struct MFSSource {
    Vec2 point;
    double time;         // impulse time / slab start / hat node
    double width = 0.0;  // slab length or hat half-support; 0 for impulses
    SourceProfile profile = SourceProfile::impulse;
};

double source_eval(const MFSSource& s, const Vec2& x, double t);
Vec2 source_grad(const MFSSource& s, const Vec2& x, double t);

struct MFSBasis {
    std::vector<MFSSource> sources;
    Eigen::VectorXd coeffs;

    double eval(const Vec2& x, double t) const;
    Vec2 eval_grad(const Vec2& x, double t) const;
    double eval_normal_deriv(const Vec2& x, double t, const Vec2& nu) const;

    // (h.grad)^m of the field for m = 0..m_max; index 0 equals eval.
    std::vector<double> eval_directional_derivs(const Vec2& x, double t,
                                                const Vec2& h, int m_max) const;
    // Log-domain variant for factorial-scaled diagnostics.
    kernel::LogVal eval_directional_deriv_log(const Vec2& x, double t,
                                              const Vec2& h, int m) const;

    // this += factor * other (source lists concatenate); used to form w = u - mu.
    void append_scaled(const MFSBasis& other, double factor);
};

struct CauchyData {
    ParamBoundary boundary;
    TimeGrid grid;
    Eigen::MatrixXd dirichlet;  // n x nt
    Eigen::MatrixXd neumann;    // n x nt
};

// ---------------------------------------------------------------------------

enum class BoundaryDataKind { ramp, bump, custom };

struct BoundaryDataSpec {
    BoundaryDataKind kind = BoundaryDataKind::ramp;
    // custom: g(x,t) = (1 + sum a_k cos(k th) + b_k sin(k th)) * profile(t)
    // with profile(t) = sum_j c_j (t/T)^j, c_0 = 0 enforced (g(.,0) = 0).
    std::vector<FourierTerm> spatial;
    std::vector<double> time_poly;
};

Eigen::MatrixXd boundary_data_g(const BoundaryDataSpec& spec,
                                const ParamBoundary& boundary,
                                const TimeGrid& grid);

struct SolveParams {
    double omega_source_factor = 1.4;
    double cavity_source_factor = 0.6;
    double svd_cutoff = 1e-12;
    double residual_tol = 1e-2;  // ill-conditioning report threshold
    int collocation_refine = 2;  // time-collocation oversampling factor
};

struct SolveDiagnostics {
    double rel_residual = 0.0;  // weighted L2 boundary mismatch / |g|
    int rank = 0;
    double sigma_max = 0.0;
    bool ok = true;
};

struct ForwardSolution {
    MFSBasis basis;
    CauchyData cauchy;  // on the outer boundary
    SolveDiagnostics diag;
};

// Boundary data as a function of (node index, time); collocation happens on
// a time grid finer than the data grid, so the solver needs g off the data
// nodes. Analytic data kinds evaluate exactly; matrix data is interpolated
// by a cubic spline anchored at g(.,0) = 0.
using BoundaryFn = std::function<double(int node, double t)>;

BoundaryFn boundary_fn(const BoundaryDataSpec& spec,
                       const ParamBoundary& boundary, const TimeGrid& grid);
BoundaryFn boundary_fn(const Eigen::MatrixXd& g, const TimeGrid& grid);

// Problem with cavity: field caloric in Omega \ cavity, = g on the outer
// boundary, = 0 on the cavity boundary, = 0 at t = 0. Throws if the cavity
// is not strictly inside Omega. cavity_data overrides the homogeneous cavity
// condition (manufactured-solution testing).
ForwardSolution solve_direct(const ParamBoundary& omega,
                             const std::optional<ParamBoundary>& cavity,
                             const BoundaryFn& g, const TimeGrid& grid,
                             const SolveParams& params = {},
                             const BoundaryFn& cavity_data = {});
ForwardSolution solve_direct(const ParamBoundary& omega,
                             const std::optional<ParamBoundary>& cavity,
                             const Eigen::MatrixXd& g, const TimeGrid& grid,
                             const SolveParams& params = {});

// Cavity-free background field.
ForwardSolution solve_background(const ParamBoundary& omega,
                                 const BoundaryFn& g, const TimeGrid& grid,
                                 const SolveParams& params = {});
ForwardSolution solve_background(const ParamBoundary& omega,
                                 const Eigen::MatrixXd& g, const TimeGrid& grid,
                                 const SolveParams& params = {});

// Cauchy data of w = u - mu on the outer boundary: the Dirichlet part is
// identically zero (w vanishes there by construction, not by subtraction).
CauchyData cauchy_of_w(const CauchyData& direct, const CauchyData& background);

// Evaluate the trace and flux of a basis field on a boundary/time grid.
CauchyData trace_on(const MFSBasis& basis, const ParamBoundary& boundary,
                    const TimeGrid& grid);

// Quadrature weight vector over (node, time) samples, node-major.
Eigen::VectorXd st_weights(const ParamBoundary& b, const TimeGrid& g);

// Flatten/unflatten node-major (n x nt) fields.
Eigen::VectorXd flatten(const Eigen::MatrixXd& field);
Eigen::MatrixXd unflatten(const Eigen::VectorXd& v, int n, int nt);

}  // namespace nrt

#endif
