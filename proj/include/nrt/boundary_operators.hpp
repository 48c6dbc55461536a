#ifndef NRT_BOUNDARY_OPERATORS_HPP
#define NRT_BOUNDARY_OPERATORS_HPP

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <vector>

#include "nrt/forward_solver.hpp"
#include "nrt/geometry.hpp"
#include "nrt/linalg.hpp"
#include "nrt/time_grid.hpp"

// Dense space-time matrices for the layer-potential operators. All norms and
// inner products on boundary fields are quadrature-weighted discrete L2
// surrogates over (node, time) samples; adjoints are taken consistently with
// those weights. Time quadrature is plain midpoint: for spatially disjoint
// curves the kernels vanish to all orders at the time diagonal, so no
// special treatment is needed there.

namespace nrt {

struct OperatorMeta {
    std::optional<ParamBoundary> boundary;
    std::vector<Vec2> points;  // raw target points when boundary is absent
    TimeGrid grid;
    Eigen::VectorXd weights;   // per (node, time) sample, node-major
};

struct DenseOperator {
    Eigen::MatrixXd entries;
    OperatorMeta source;
    OperatorMeta target;
};

// Weight-consistent adjoint: entries* = W_src^{-1} entries^T W_tgt, so
// <A u, v>_tgt = <u, A* v>_src holds exactly in the discrete inner products.
DenseOperator adjoint(const DenseOperator& op);

// Single-layer potential from a source curve evaluated at disjoint targets:
// entry[(x,t),(y,s)] = Phi(x,t;y,s) w_y tau. Block-lower-triangular in time.
DenseOperator assemble_single_layer(const ParamBoundary& src,
                                    const ParamBoundary& tgt,
                                    const TimeGrid& grid);
DenseOperator assemble_single_layer(const ParamBoundary& src,
                                    const std::vector<Vec2>& tgt,
                                    const TimeGrid& grid);

// Flux of the single layer on a disjoint target curve:
// entry = del_{nu(x)} Phi(x,t;y,s) w_y tau.
DenseOperator assemble_single_layer_flux(const ParamBoundary& src,
                                         const ParamBoundary& tgt,
                                         const TimeGrid& grid);

// K[phi](x,t) = int_t^T int_dOmega del_{nu(y)} Phi(y,s;x,t) phi(y,s) with
// phi interpreted as hat-in-time nodal densities, integrated exactly in
// time: anti-causal (a column vanishes once its hat lies in the past), a
// backward caloric field vanishing at t = T. Targets must lie strictly
// inside the source curve.
DenseOperator assemble_K(const ParamBoundary& omega,
                         const std::vector<Vec2>& targets,
                         const TimeGrid& grid);
DenseOperator assemble_K(const ParamBoundary& omega, const ParamBoundary& tgt,
                         const TimeGrid& grid);

// nu(x) . grad_x K[phi] on an interior target curve.
DenseOperator assemble_K_flux(const ParamBoundary& omega,
                              const ParamBoundary& tgt, const TimeGrid& grid);

// On-surface principal-value quadrature of the double-layer part of K
// (targets = source nodes; the time diagonal vanishes by causality).
DenseOperator assemble_calK(const ParamBoundary& omega, const TimeGrid& grid);

// Boundary trace of K via the jump relation K = calK - phi/2. The hat-exact
// time integration resolves the trace limit, so no corner treatment is
// needed (the flag is retained for signature stability and ignored).
Eigen::MatrixXd trace_of_K(const ParamBoundary& omega, const TimeGrid& grid,
                           bool corner_correction = true);

// ---------------------------------------------------------------------------
// R operator: flux on the outer boundary of the Omega-Green-function single
// layer from a test curve. Columns are hat-in-time nodal densities on
// (dG)_T. The Dirichlet Green function is realized by a correction that
// cancels the trace of the free-space single layer on the outer boundary;
// two realizations are provided.

struct CorrectionResult {
    Eigen::MatrixXd flux;          // n*nt x ncols, on the data grid
    Eigen::VectorXd col_residual;  // relative trace residual per column
};

class OmegaCorrector {
public:
    virtual ~OmegaCorrector() = default;
    // Correction flux for every hat-density column of the test boundary.
    virtual CorrectionResult column_flux(const ParamBoundary& gb,
                                         bool with_residual = true) const = 0;
    virtual const ParamBoundary& omega() const = 0;
    virtual const TimeGrid& grid() const = 0;
};

// MFS realization: works for any star-shaped Omega; the correction field is
// itself a hat-ladder MFS fit, so the trace residual is limited by the
// P1-in-time approximation (~1e-3 at default resolutions).
class GreenCorrector : public OmegaCorrector {
public:
    GreenCorrector(const ParamBoundary& omega, const TimeGrid& grid,
                   const SolveParams& params = {});

    // For each column of `traces` (Dirichlet data sampled on the refined
    // collocation grid), the flux of the Omega-caloric field with that trace
    // and zero initial value, evaluated on the data grid.
    CorrectionResult correct(const Eigen::MatrixXd& traces) const;

    CorrectionResult column_flux(const ParamBoundary& gb,
                                 bool with_residual = true) const override;
    const ParamBoundary& omega() const override { return omega_; }
    const TimeGrid& grid() const override { return grid_; }
    const TimeGrid& collocation_grid() const { return cgrid_; }

private:
    ParamBoundary omega_;
    TimeGrid grid_;
    TimeGrid cgrid_;
    std::vector<MFSSource> sources_;
    Eigen::MatrixXd A_;  // row-weighted collocation matrix
    linalg::Svd svd_;
    Eigen::MatrixXd N_;  // flux evaluation matrix
    Eigen::VectorXd sqrt_w_;
    double cutoff_;
};

// Spectral realization for a disk Omega: theta-Fourier modes with the exact
// heat Dirichlet-to-Neumann map per mode. The per-column residual is the
// theta-bandlimit representation error of the column trace measured on a
// doubled node grid.
class DiskCorrector : public OmegaCorrector {
public:
    DiskCorrector(const ParamBoundary& omega, const TimeGrid& grid,
                  int fine_per_dt = 16, int n_modes = 80);

    CorrectionResult column_flux(const ParamBoundary& gb,
                                 bool with_residual = true) const override;
    const ParamBoundary& omega() const override { return omega_; }
    const TimeGrid& grid() const override { return grid_; }

private:
    ParamBoundary omega_;
    TimeGrid grid_;
    std::shared_ptr<class DiskDtN> dtn_;
};

enum class RKernel { green, free_space };

struct RAssembly {
    DenseOperator op;
    Eigen::VectorXd col_residual;  // trace residual of the correction per column
};

// R maps hat-density coefficients on (dG)_T to fluxes on (dOmega)_T.
// Requires G strictly inside Omega.
RAssembly assemble_R(const RadialShape& G, int n_G, const OmegaCorrector& corr,
                     RKernel kind = RKernel::green, bool with_residual = true);

// ---------------------------------------------------------------------------

// Interior double-layer limit vs jump formula: evaluates K[phi] at x - eps nu
// and compares with calK[phi] - phi/2 on the boundary. Returns, per eps, the
// max absolute mismatch over all samples divided by max |phi|.
std::vector<double> jump_relation_check(const ParamBoundary& omega,
                                        const TimeGrid& grid,
                                        const Eigen::MatrixXd& phi,
                                        const std::vector<double>& eps_list);

// Least-squares fit of K[phi] to a target field on (dE)_T over nested sets of
// time-bandlimited density modes on (dOmega)_T. Residuals are relative to the
// weighted norm of the target.
struct DenseRangeFit {
    Eigen::VectorXd residuals;    // one per basis size
    std::vector<int> basis_sizes;
    Eigen::VectorXd density;      // full-basis density on (dOmega)_T
    Eigen::VectorXd fitted;       // K[density] on (dE)_T
};

DenseRangeFit dense_range_probe(const ParamBoundary& omega,
                                const ParamBoundary& E, const TimeGrid& grid,
                                const Eigen::VectorXd& target,
                                const std::vector<int>& basis_sizes);

// Density modes used by dense_range_probe: tensor products of low spatial
// harmonics and sin(q pi t / T) time profiles, ordered by total order.
Eigen::MatrixXd density_modes(const ParamBoundary& omega, const TimeGrid& grid,
                              int n_modes);

}  // namespace nrt

#endif
