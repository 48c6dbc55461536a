#include "nrt/heat_kernel.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace nrt::kernel {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_order(int m) {
    if (m < 0) throw std::invalid_argument("derivative order must be >= 0");
    if (m > kMaxDerivOrder)
        throw std::invalid_argument("derivative order exceeds overflow guard (60)");
}

void check_unit(const Vec2& h) {
    if (std::abs(h.norm() - 1.0) > 1e-12)
        throw std::invalid_argument("direction must be a unit vector");
}

}  // namespace

double phi(double r2, double tau, int d) {
    if (d != 2 && d != 3) throw std::invalid_argument("phi: d must be 2 or 3");
    if (tau <= 0.0) return 0.0;
    const double pref = (d == 2) ? 1.0 / (4.0 * kPi * tau)
                                 : std::pow(4.0 * kPi * tau, -1.5);
    const double v = pref * std::exp(-r2 / (4.0 * tau));
    return (v < 1e-300) ? 0.0 : v;  // flush underflow
}

double phi(const Vec2& y, double s, const Vec2& x, double t) {
    return phi((y - x).squaredNorm(), s - t, 2);
}

double phi3(const Eigen::Vector3d& y, double s, const Eigen::Vector3d& x,
            double t) {
    return phi((y - x).squaredNorm(), s - t, 3);
}

Vec2 grad_y_phi(const Vec2& y, double s, const Vec2& x, double t) {
    const double tau = s - t;
    if (tau <= 0.0) return Vec2::Zero();
    return phi(y, s, x, t) * (x - y) / (2.0 * tau);
}

Eigen::Vector3d grad_y_phi3(const Eigen::Vector3d& y, double s,
                            const Eigen::Vector3d& x, double t) {
    const double tau = s - t;
    if (tau <= 0.0) return Eigen::Vector3d::Zero();
    return phi3(y, s, x, t) * (x - y) / (2.0 * tau);
}

double normal_deriv_phi(const Vec2& y, double s, const Vec2& x, double t,
                        const Vec2& nu) {
    return grad_y_phi(y, s, x, t).dot(nu);
}

std::vector<double> directional_derivs(const Vec2& h, int m_max, const Vec2& z,
                                       double s, const Vec2& x, double t) {
    check_order(m_max);
    check_unit(h);
    std::vector<double> out(m_max + 1, 0.0);
    const double tau = s - t;
    if (tau <= 0.0) return out;
    const double p = phi(z, s, x, t);
    if (p == 0.0) return out;
    const double inv = -1.0 / (2.0 * std::sqrt(tau));  // (-1)^m (2 sqrt(tau))^-m
    const double xi = (z - x).dot(h) / (2.0 * std::sqrt(tau));
    double hm1 = 0.0, hm = 1.0;  // H_{-1}, H_0
    double scale = 1.0;
    out[0] = p;
    for (int m = 1; m <= m_max; ++m) {
        const double hn = 2.0 * xi * hm - 2.0 * (m - 1) * hm1;
        hm1 = hm;
        hm = hn;
        scale *= inv;
        out[m] = scale * hm * p;
    }
    return out;
}

double directional_deriv_m(const Vec2& h, int m, const Vec2& z, double s,
                           const Vec2& x, double t) {
    return directional_derivs(h, m, z, s, x, t)[m];
}

double mixed_deriv(int a, int b, const Vec2& h, const Vec2& z, double s,
                   const Vec2& x, double t) {
    check_order(a + b);
    check_unit(h);
    const double tau = s - t;
    if (tau <= 0.0) return 0.0;
    const double p = phi(z, s, x, t);
    if (p == 0.0) return 0.0;
    const Vec2 hperp(-h.y(), h.x());
    const double rt = 2.0 * std::sqrt(tau);
    const double xu = (z - x).dot(h) / rt;
    const double xv = (z - x).dot(hperp) / rt;
    auto hermite = [](int n, double xi) {
        double hm1 = 0.0, hm = 1.0;
        for (int k = 1; k <= n; ++k) {
            const double hn = 2.0 * xi * hm - 2.0 * (k - 1) * hm1;
            hm1 = hm;
            hm = hn;
        }
        return hm;
    };
    const double sgn = ((a + b) % 2 == 0) ? 1.0 : -1.0;
    return sgn * std::pow(rt, -(a + b)) * hermite(a, xu) * hermite(b, xv) * p;
}

LogVal directional_deriv_log(const Vec2& h, int m, const Vec2& z, double s,
                             const Vec2& x, double t) {
    check_order(m);
    check_unit(h);
    const double tau = s - t;
    if (tau <= 0.0) return {kNegInf, 0.0};
    const double r2 = (z - x).squaredNorm();
    const double log_phi = -std::log(4.0 * kPi * tau) - r2 / (4.0 * tau);
    const double rt = 2.0 * std::sqrt(tau);
    const double xi = (z - x).dot(h) / rt;
    // scale-tracked Hermite recurrence: |values| kept within double range
    double hm1 = 0.0, hm = 1.0, log_scale = 0.0;
    for (int k = 1; k <= m; ++k) {
        double hn = 2.0 * xi * hm - 2.0 * (k - 1) * hm1;
        hm1 = hm;
        hm = hn;
        const double mag = std::max(std::abs(hm), std::abs(hm1));
        if (mag > 1e150) {
            hm /= 1e150;
            hm1 /= 1e150;
            log_scale += std::log(1e150);
        }
    }
    if (hm == 0.0) return {kNegInf, 0.0};
    const double sign_h = (hm > 0.0) ? 1.0 : -1.0;
    const double sign = (m % 2 == 0) ? sign_h : -sign_h;
    return {std::log(std::abs(hm)) + log_scale - m * std::log(rt) + log_phi,
            sign};
}

double directional_deriv_of_normal(const Vec2& h, int m, const Vec2& z,
                                   double s, const Vec2& x, double t,
                                   const Vec2& nu) {
    check_order(m);
    const double tau = s - t;
    if (tau <= 0.0) return 0.0;
    // Leibniz on Phi * ((z-x).nu): the linear factor differentiates once.
    const auto d = directional_derivs(h, m, z, s, x, t);
    const double lin = (z - x).dot(nu);
    double v = lin * d[m];
    if (m >= 1) v += m * h.dot(nu) * d[m - 1];
    return v / (2.0 * tau);
}

double grad_x_normal_deriv_phi(const Vec2& y, double s, const Vec2& x,
                               double t, const Vec2& nu_y, const Vec2& nu_x) {
    const double tau = s - t;
    if (tau <= 0.0) return 0.0;
    const double p = phi(y, s, x, t);
    if (p == 0.0) return 0.0;
    const Vec2 d = x - y;
    return p / (2.0 * tau) *
           (nu_x.dot(nu_y) - d.dot(nu_x) * d.dot(nu_y) / (2.0 * tau));
}

// ---------------------------------------------------------------------------
// box kernel

namespace {

double exp_int_e1(double x) {
    if (x > 700.0) return 0.0;
    return -std::expint(-x);  // E1(x) = -Ei(-x), x > 0
}

// D^m of (1/4pi) E1(c r^2) in the u-coordinate (along h), r^2 = u^2 + v^2.
// For m >= 1 this is -(1/2pi) d_u^(m-1) [ u g / r^2 ] with g = exp(-c r^2);
// d_u^p (g / r^2) expands by Leibniz over the ladders
//   R_j = d_u^j (1/r^2):  r^2 R_j = -2 j u R_{j-1} - j (j-1) R_{j-2}
//   G_i = d_u^i g      :  G_i = (-1)^i c^(i/2) H_i(sqrt(c) u) g.
void endpoint_derivs(double u, double v, double c, int m_max, double* out) {
    const double r2 = u * u + v * v;
    const double q = c * r2;
    const double g = (q > 700.0) ? 0.0 : std::exp(-q);
    out[0] = exp_int_e1(q) / (4.0 * kPi);
    if (m_max == 0) return;
    if (g == 0.0) {
        for (int m = 1; m <= m_max; ++m) out[m] = 0.0;
        return;
    }
    const int p_max = m_max - 1;
    std::vector<double> R(p_max + 1), G(p_max + 1), F(p_max + 1);
    R[0] = 1.0 / r2;
    if (p_max >= 1) R[1] = -2.0 * u / (r2 * r2);
    for (int j = 2; j <= p_max; ++j)
        R[j] = -(2.0 * j * u * R[j - 1] + j * (j - 1.0) * R[j - 2]) / r2;
    const double sc = std::sqrt(c);
    const double xi = sc * u;
    double hm1 = 0.0, hm = 1.0;
    for (int i = 0; i <= p_max; ++i) {
        if (i >= 1) {
            const double hn = 2.0 * xi * hm - 2.0 * (i - 1) * hm1;
            hm1 = hm;
            hm = hn;
        }
        const double sgn = (i % 2 == 0) ? 1.0 : -1.0;
        G[i] = sgn * std::pow(sc, i) * hm * g;
    }
    for (int p = 0; p <= p_max; ++p) {
        double s = 0.0, binom = 1.0;
        for (int j = 0; j <= p; ++j) {
            s += binom * R[j] * G[p - j];
            binom *= static_cast<double>(p - j) / (j + 1.0);
        }
        F[p] = s;
    }
    for (int m = 1; m <= m_max; ++m) {
        double val = u * F[m - 1];
        if (m >= 2) val += (m - 1.0) * F[m - 2];
        out[m] = -val / (2.0 * kPi);
    }
}

}  // namespace

double phi_box(double r2, double tau_lo, double tau_hi) {
    if (tau_hi <= 0.0) return 0.0;
    double v = exp_int_e1(r2 / (4.0 * tau_hi));
    if (tau_lo > 0.0) v -= exp_int_e1(r2 / (4.0 * tau_lo));
    return v / (4.0 * kPi);
}

Vec2 grad_phi_box(const Vec2& x, double t, const Vec2& y, double a, double b) {
    const double tau_hi = t - a;
    if (tau_hi <= 0.0) return Vec2::Zero();
    const double tau_lo = std::max(t - b, 0.0);
    const Vec2 d = x - y;
    const double r2 = d.squaredNorm();
    double s = (r2 / (4.0 * tau_hi) > 700.0) ? 0.0 : std::exp(-r2 / (4.0 * tau_hi));
    if (tau_lo > 0.0 && r2 / (4.0 * tau_lo) <= 700.0)
        s -= std::exp(-r2 / (4.0 * tau_lo));
    return -d * s / (2.0 * kPi * r2);
}

std::vector<double> phi_box_derivs(const Vec2& h, int m_max, const Vec2& x,
                                   double t, const Vec2& y, double a,
                                   double b) {
    check_order(m_max);
    check_unit(h);
    std::vector<double> out(m_max + 1, 0.0);
    const double tau_hi = t - a;
    if (tau_hi <= 0.0) return out;
    const double tau_lo = std::max(t - b, 0.0);
    const Vec2 d = x - y;
    const double u = d.dot(h);
    const double v = d.x() * (-h.y()) + d.y() * h.x();
    std::vector<double> e(m_max + 1);
    endpoint_derivs(u, v, 1.0 / (4.0 * tau_hi), m_max, e.data());
    for (int m = 0; m <= m_max; ++m) out[m] = e[m];
    if (tau_lo > 0.0) {
        endpoint_derivs(u, v, 1.0 / (4.0 * tau_lo), m_max, e.data());
        for (int m = 0; m <= m_max; ++m) out[m] -= e[m];
    }
    return out;
}

// ---------------------------------------------------------------------------
// hat kernel

namespace {

// Antiderivative (in the upper time lag) of the sigma-moment:
//   F(tau) = (1/4pi) [ tau exp(-r^2/4tau) - (r^2/4) E1(r^2/4tau) ],
// so that int_{tau_lo}^{tau_hi} exp(-r^2/4tau)/(4pi) dtau = F(tau_hi)-F(tau_lo)
// and int sigma Phi dsigma = t * phi_box - (F(tau_hi) - F(tau_lo)).
double sigma_moment_F(double r2, double tau) {
    if (tau <= 0.0) return 0.0;
    const double q = r2 / (4.0 * tau);
    const double e = (q > 700.0) ? 0.0 : std::exp(-q);
    return (tau * e - (r2 / 4.0) * exp_int_e1(q)) / (4.0 * kPi);
}

// D^m of F at one endpoint: the Gaussian ladder plus the quadratic-factor
// Leibniz expansion of r^2 E1(c r^2) over the E1 ladder.
void sigma_moment_F_derivs(double u, double v, double tau, int m_max,
                           double* out) {
    if (tau <= 0.0) {
        for (int m = 0; m <= m_max; ++m) out[m] = 0.0;
        return;
    }
    const double c = 1.0 / (4.0 * tau);
    const double r2 = u * u + v * v;
    // E1 ladder (with its 1/4pi folded in)
    std::vector<double> e1(m_max + 1);
    endpoint_derivs(u, v, c, m_max, e1.data());
    // Gaussian ladder
    const double q = c * r2;
    const double g = (q > 700.0) ? 0.0 : std::exp(-q);
    std::vector<double> gl(m_max + 1);
    {
        const double sc = std::sqrt(c);
        const double xi = sc * u;
        double hm1 = 0.0, hm = 1.0;
        for (int i = 0; i <= m_max; ++i) {
            if (i >= 1) {
                const double hn = 2.0 * xi * hm - 2.0 * (i - 1) * hm1;
                hm1 = hm;
                hm = hn;
            }
            gl[i] = ((i % 2 == 0) ? 1.0 : -1.0) * std::pow(sc, i) * hm * g;
        }
    }
    for (int m = 0; m <= m_max; ++m) {
        double quad = r2 * e1[m];
        if (m >= 1) quad += 2.0 * m * u * e1[m - 1];
        if (m >= 2) quad += m * (m - 1.0) * e1[m - 2];
        out[m] = tau * gl[m] / (4.0 * kPi) - quad / 4.0;
    }
}

// One linear-profile slab: int_{alpha}^{min(beta,t)} (p + q sigma) Phi dsigma.
struct SlabCoef {
    double alpha, beta, p, q;
};

std::vector<SlabCoef> hat_slabs(double node, double dt) {
    // support clipped at sigma = 0: fields vanish identically at t = 0
    std::vector<SlabCoef> s;
    if (node > 0.0)
        s.push_back({std::max(node - dt, 0.0), node, (dt - node) / dt, 1.0 / dt});
    s.push_back({node, node + dt, (node + dt) / dt, -1.0 / dt});
    return s;
}

}  // namespace

double phi_hat(const Vec2& x, double t, const Vec2& y, double node,
               double dt) {
    const double r2 = (x - y).squaredNorm();
    double v = 0.0;
    for (const auto& s : hat_slabs(node, dt)) {
        const double tau_hi = t - s.alpha;
        if (tau_hi <= 0.0) continue;
        const double tau_lo = std::max(t - s.beta, 0.0);
        const double i0 = phi_box(r2, tau_lo, tau_hi);
        const double i1 =
            t * i0 - (sigma_moment_F(r2, tau_hi) - sigma_moment_F(r2, tau_lo));
        v += s.p * i0 + s.q * i1;
    }
    return v;
}

Vec2 grad_phi_hat(const Vec2& x, double t, const Vec2& y, double node,
                  double dt) {
    const Vec2 d = x - y;
    const double r2 = d.squaredNorm();
    Vec2 acc = Vec2::Zero();
    for (const auto& s : hat_slabs(node, dt)) {
        const double tau_hi = t - s.alpha;
        if (tau_hi <= 0.0) continue;
        const double tau_lo = std::max(t - s.beta, 0.0);
        auto expq = [&](double tau) {
            if (tau <= 0.0) return 0.0;
            const double q = r2 / (4.0 * tau);
            return (q > 700.0) ? 0.0 : std::exp(-q);
        };
        const Vec2 g0 = -d * (expq(tau_hi) - expq(tau_lo)) / (2.0 * kPi * r2);
        // grad F(tau) = -(x-y) E1(r^2/4tau) / (8 pi)
        auto e1q = [&](double tau) {
            return tau <= 0.0 ? 0.0 : exp_int_e1(r2 / (4.0 * tau));
        };
        const Vec2 g1 =
            t * g0 + d * (e1q(tau_hi) - e1q(tau_lo)) / (8.0 * kPi);
        acc += s.p * g0 + s.q * g1;
    }
    return acc;
}

HatTimeJet phi_hat_time_jet(const Vec2& x, double t, const Vec2& y,
                            double node, double dt) {
    // Endpoint pieces per slab: I0 = E1(q)/4pi with q = r^2/(4 tau),
    //   d/dt I0  = exp(-q)/(4 pi tau),
    //   d2/dt2 I0 = exp(-q)(q - 1)/(4 pi tau^2);
    // I1 = t I0 - (F(tau_hi) - F(tau_lo)) with dF/dt = exp(-q)/4pi,
    //   d2F/dt2 = exp(-q) q / (4 pi tau).
    const double r2 = (x - y).squaredNorm();
    auto expq = [&](double tau) {
        if (tau <= 0.0) return 0.0;
        const double q = r2 / (4.0 * tau);
        return (q > 700.0) ? 0.0 : std::exp(-q);
    };
    HatTimeJet out;
    for (const auto& s : hat_slabs(node, dt)) {
        const double tau_hi = t - s.alpha;
        if (tau_hi <= 0.0) continue;
        const double tau_lo = std::max(t - s.beta, 0.0);
        const double ehi = expq(tau_hi), elo = expq(tau_lo);
        const double qhi = r2 / (4.0 * tau_hi);
        const double qlo = tau_lo > 0.0 ? r2 / (4.0 * tau_lo) : 0.0;
        const double i0 = phi_box(r2, tau_lo, tau_hi);
        const double di0 =
            (ehi / tau_hi - (tau_lo > 0.0 ? elo / tau_lo : 0.0)) / (4.0 * kPi);
        const double ddi0 = (ehi * (qhi - 1.0) / (tau_hi * tau_hi) -
                             (tau_lo > 0.0 ? elo * (qlo - 1.0) / (tau_lo * tau_lo)
                                           : 0.0)) /
                            (4.0 * kPi);
        const double dF = (ehi - elo) / (4.0 * kPi);
        const double ddF = (ehi * qhi / tau_hi -
                            (tau_lo > 0.0 ? elo * qlo / tau_lo : 0.0)) /
                           (4.0 * kPi);
        const double i1 =
            t * i0 - (sigma_moment_F(r2, tau_hi) - sigma_moment_F(r2, tau_lo));
        const double di1 = i0 + t * di0 - dF;
        const double ddi1 = 2.0 * di0 + t * ddi0 - ddF;
        out.v += s.p * i0 + s.q * i1;
        out.dv += s.p * di0 + s.q * di1;
        out.ddv += s.p * ddi0 + s.q * ddi1;
    }
    return out;
}

std::vector<double> phi_hat_derivs(const Vec2& h, int m_max, const Vec2& x,
                                   double t, const Vec2& y, double node,
                                   double dt) {
    check_order(m_max);
    check_unit(h);
    std::vector<double> out(m_max + 1, 0.0);
    const Vec2 d = x - y;
    const double u = d.dot(h);
    const double v = d.x() * (-h.y()) + d.y() * h.x();
    std::vector<double> e(m_max + 1), f(m_max + 1), i0(m_max + 1);
    for (const auto& s : hat_slabs(node, dt)) {
        const double tau_hi = t - s.alpha;
        if (tau_hi <= 0.0) continue;
        const double tau_lo = std::max(t - s.beta, 0.0);
        endpoint_derivs(u, v, 1.0 / (4.0 * tau_hi), m_max, i0.data());
        if (tau_lo > 0.0) {
            endpoint_derivs(u, v, 1.0 / (4.0 * tau_lo), m_max, e.data());
            for (int m = 0; m <= m_max; ++m) i0[m] -= e[m];
        }
        sigma_moment_F_derivs(u, v, tau_hi, m_max, f.data());
        if (tau_lo > 0.0) {
            sigma_moment_F_derivs(u, v, tau_lo, m_max, e.data());
            for (int m = 0; m <= m_max; ++m) f[m] -= e[m];
        }
        for (int m = 0; m <= m_max; ++m)
            out[m] += s.p * i0[m] + s.q * (t * i0[m] - f[m]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// anti-causal hat kernels (K operator)

namespace {

// radial derivatives (in r^2) of the box primitives over a tau-window:
//   B0 = int Phi d tau = (1/4pi)(E1(q_hi) - E1(q_lo)),  q = r^2/(4 tau),
//   B1 = int tau Phi d tau = F(tau_hi) - F(tau_lo).
struct RadialJet {
    double v = 0.0, d1 = 0.0, d2 = 0.0;  // value, d/dr2, d2/d(r2)^2
};

RadialJet b0_jet(double r2, double tau_lo, double tau_hi) {
    RadialJet out;
    auto add = [&](double tau, double sign) {
        if (tau <= 0.0) return;
        const double q = r2 / (4.0 * tau);
        const double E1 = exp_int_e1(q);
        const double g = (q > 700.0) ? 0.0 : std::exp(-q);
        out.v += sign * E1 / (4.0 * kPi);
        out.d1 += sign * (-g / r2) / (4.0 * kPi);
        out.d2 += sign * (g / (4.0 * tau) / r2 + g / (r2 * r2)) / (4.0 * kPi);
    };
    add(tau_hi, 1.0);
    add(tau_lo, -1.0);
    return out;
}

RadialJet b1_jet(double r2, double tau_lo, double tau_hi) {
    RadialJet out;
    auto add = [&](double tau, double sign) {
        if (tau <= 0.0) return;
        const double q = r2 / (4.0 * tau);
        const double E1 = exp_int_e1(q);
        const double g = (q > 700.0) ? 0.0 : std::exp(-q);
        out.v += sign * (tau * g - (r2 / 4.0) * E1) / (4.0 * kPi);
        out.d1 += sign * (-E1 / (16.0 * kPi));
        out.d2 += sign * (g / (16.0 * kPi * r2));
    };
    add(tau_hi, 1.0);
    add(tau_lo, -1.0);
    return out;
}

}  // namespace

double k_hat_normal(const Vec2& y, const Vec2& nu_y, const Vec2& x, double t,
                    double node, double dt, double t_max) {
    const Vec2 rv = y - x;
    const double r2 = rv.squaredNorm();
    if (r2 == 0.0) return 0.0;
    double acc = 0.0;
    for (const auto& s : hat_slabs(node, dt)) {
        const double beta = std::min(s.beta, t_max);
        if (beta <= t || beta <= s.alpha) continue;
        const double tau_lo = std::max(s.alpha - t, 0.0);
        const double tau_hi = beta - t;
        const RadialJet b0 = b0_jet(r2, tau_lo, tau_hi);
        const RadialJet b1 = b1_jet(r2, tau_lo, tau_hi);
        // density in s: p + q s = (p + q t) + q tau
        const double v1 = 2.0 * rv.dot(nu_y);  // nu_y . grad_y r^2
        acc += (s.p + s.q * t) * b0.d1 * v1 + s.q * b1.d1 * v1;
    }
    return acc;
}

double k_hat_normal_flux(const Vec2& y, const Vec2& nu_y, const Vec2& x,
                         const Vec2& nu_x, double t, double node, double dt,
                         double t_max) {
    const Vec2 rv = y - x;
    const double r2 = rv.squaredNorm();
    if (r2 == 0.0) return 0.0;
    double acc = 0.0;
    for (const auto& s : hat_slabs(node, dt)) {
        const double beta = std::min(s.beta, t_max);
        if (beta <= t || beta <= s.alpha) continue;
        const double tau_lo = std::max(s.alpha - t, 0.0);
        const double tau_hi = beta - t;
        const RadialJet b0 = b0_jet(r2, tau_lo, tau_hi);
        const RadialJet b1 = b1_jet(r2, tau_lo, tau_hi);
        // nu_x . grad_x [ nu_y . grad_y b(r^2) ]
        //   = -2 b' (nu_x.nu_y) - 4 b'' (rv.nu_y)(rv.nu_x)
        const double dot = nu_x.dot(nu_y);
        const double ry = rv.dot(nu_y), rx = rv.dot(nu_x);
        const double f0 = -2.0 * b0.d1 * dot - 4.0 * b0.d2 * ry * rx;
        const double f1 = -2.0 * b1.d1 * dot - 4.0 * b1.d2 * ry * rx;
        acc += (s.p + s.q * t) * f0 + s.q * f1;
    }
    return acc;
}

}  // namespace nrt::kernel
