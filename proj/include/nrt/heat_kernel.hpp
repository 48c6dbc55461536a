#ifndef NRT_HEAT_KERNEL_HPP
#define NRT_HEAT_KERNEL_HPP

#include <Eigen/Dense>
#include <vector>

// Fundamental solution of the heat equation,
//   Phi(y,s;x,t) = (4 pi (s-t))^(-d/2) exp(-|y-x|^2 / (4(s-t))),  s > t,
// with Phi = 0 for s <= t (causality is part of the kernel, not an error).
// Directional derivatives in the first spatial argument come from the
// physicists' Hermite recurrence in the scaled variable
// xi = ((z-x).h) / (2 sqrt(s-t)):
//   (h.grad_z)^m Phi = (-1)^m (2 sqrt(s-t))^(-m) H_m(xi) Phi.

namespace nrt::kernel {

using Vec2 = Eigen::Vector2d;

inline constexpr int kMaxDerivOrder = 60;  // factorial overflow guard

// Scalar core: r2 = |y-x|^2, tau = s-t, d in {2,3}.
double phi(double r2, double tau, int d);

double phi(const Vec2& y, double s, const Vec2& x, double t);
double phi3(const Eigen::Vector3d& y, double s, const Eigen::Vector3d& x,
            double t);

// grad_y Phi(y,s;x,t) = Phi * (x-y) / (2(s-t)); zero vector for s <= t.
Vec2 grad_y_phi(const Vec2& y, double s, const Vec2& x, double t);
Eigen::Vector3d grad_y_phi3(const Eigen::Vector3d& y, double s,
                            const Eigen::Vector3d& x, double t);

// nu . grad_y Phi for a unit normal nu at y.
double normal_deriv_phi(const Vec2& y, double s, const Vec2& x, double t,
                        const Vec2& nu);

// (h.grad_z)^m Phi(z,s;x,t) for |h| = 1, m <= kMaxDerivOrder.
double directional_deriv_m(const Vec2& h, int m, const Vec2& z, double s,
                           const Vec2& x, double t);

// All orders 0..m_max at once (one Hermite recurrence pass).
std::vector<double> directional_derivs(const Vec2& h, int m_max, const Vec2& z,
                                       double s, const Vec2& x, double t);

// Mixed derivative del_u^a del_v^b Phi(z,s;x,t) where u is the coordinate
// along h and v along the left-perpendicular of h. Used for spatial
// gradients of directional-derivative fields.
double mixed_deriv(int a, int b, const Vec2& h, const Vec2& z, double s,
                   const Vec2& x, double t);

// Log-domain magnitude and sign of one Hermite-scaled summand; used by the
// Taylor blow-up machinery where factorial scales would overflow.
struct LogVal {
    double log_abs;  // -inf when the value is exactly 0
    double sign;     // -1, 0, +1
};
LogVal directional_deriv_log(const Vec2& h, int m, const Vec2& z, double s,
                             const Vec2& x, double t);

// (h.grad_z)^m [del_{nu(x)} Phi(z,s;x,t)]: the normal derivative acts on the
// second spatial argument, the directional derivatives on the first. Since
// (z-x).nu is linear in z this is a two-term Hermite expression.
double directional_deriv_of_normal(const Vec2& h, int m, const Vec2& z,
                                   double s, const Vec2& x, double t,
                                   const Vec2& nu);

// nu(x) . grad_x [ del_{nu(y)} Phi(y,s;x,t) ]  (kernel of the normal
// derivative of the double layer; smooth for disjoint curves).
double grad_x_normal_deriv_phi(const Vec2& y, double s, const Vec2& x,
                               double t, const Vec2& nu_y, const Vec2& nu_x);

// ---------------------------------------------------------------------------
// Time-integrated kernel (d = 2): the heat kernel integrated over a source
// time slab,
//   B(x,t;y,[a,b)) = int_a^min(b,t) Phi(x,t;y,sigma) dsigma
//                  = (1/4pi) [ E1(r^2/(4 tau_hi)) - E1(r^2/(4 tau_lo)) ],
// with tau_hi = t-a, tau_lo = max(t-b, 0) and E1 the exponential integral
// (the tau_lo term drops when the slab is still active). Caloric in (x,t)
// off the source point, identically zero for t <= a, and log-singular in
// space at y once active. Spatial derivatives of every order are elementary:
// each E1 endpoint differentiates into P(u,v) exp(-c r^2) / r^(2k) terms.

// Value; r2 = |x-y|^2, time lags tau_lo <= tau_hi as above.
double phi_box(double r2, double tau_lo, double tau_hi);

// grad_x of the box kernel.
Vec2 grad_phi_box(const Vec2& x, double t, const Vec2& y, double a, double b);

// (h.grad_x)^m of the box kernel for m = 0..m_max.
std::vector<double> phi_box_derivs(const Vec2& h, int m_max, const Vec2& x,
                                   double t, const Vec2& y, double a, double b);

// Hat-profile kernel: Phi integrated against the piecewise-linear hat with
// node at sigma = node, support [node - dt, node + dt] clipped at 0. The
// sigma-linear moment integrates to tau exp(-c r^2) and r^2 E1(c r^2) terms,
// so values, gradients and derivatives of every order stay elementary.
double phi_hat(const Vec2& x, double t, const Vec2& y, double node, double dt);
Vec2 grad_phi_hat(const Vec2& x, double t, const Vec2& y, double node,
                  double dt);
std::vector<double> phi_hat_derivs(const Vec2& h, int m_max, const Vec2& x,
                                   double t, const Vec2& y, double node,
                                   double dt);

// Value and first two time derivatives at once (spectral boundary solves
// consume trace histories with exact derivatives).
struct HatTimeJet {
    double v = 0.0, dv = 0.0, ddv = 0.0;
};
HatTimeJet phi_hat_time_jet(const Vec2& x, double t, const Vec2& y,
                            double node, double dt);

// Anti-causal hat kernels for the K operator: the source density lives at
// future times s > t,
//   int hat_node(s) Phi(y,s;x,t) ds,
// together with del_{nu(y)} and nu(x).grad_x del_{nu(y)} of it. Exact in
// time, so the double-layer trace limit is resolved without corner
// treatment: as y -> x on a curve the flux kernel tends to -kappa/(4 pi).
// Hat supports are clipped at t_max so K[phi](., t_max) = 0 holds exactly.
double k_hat_normal(const Vec2& y, const Vec2& nu_y, const Vec2& x, double t,
                    double node, double dt, double t_max);
double k_hat_normal_flux(const Vec2& y, const Vec2& nu_y, const Vec2& x,
                         const Vec2& nu_x, double t, double node, double dt,
                         double t_max);

}  // namespace nrt::kernel

#endif
