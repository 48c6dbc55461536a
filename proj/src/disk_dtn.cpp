#include "nrt/disk_dtn.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include <unsupported/Eigen/FFT>

namespace nrt {

namespace {

double bessel_j(int m, double x) { return std::cyl_bessel_j(m, x); }

double bessel_j_deriv(int m, double x) {
    if (m == 0) return -bessel_j(1, x);
    return 0.5 * (bessel_j(m - 1, x) - bessel_j(m + 1, x));
}

// Exponential-integrator moments mu_p = lambda int_0^h e^{-lambda(h-xi)}
// (xi/h)^p dxi, p = 0..5, stable for all lambda h > 0.
void expint_moments(double lh, double mu[6]) {
    if (lh < 1e-3) {
        // series in lh: mu_p = lh (1/(p+1) - lh/(p+2) + lh^2/(2(p+3)) - ...)
        for (int p = 0; p <= 5; ++p)
            mu[p] = lh * (1.0 / (p + 1) - lh / (p + 2) + lh * lh / (2.0 * (p + 3)) -
                          lh * lh * lh / (6.0 * (p + 4)));
        return;
    }
    mu[0] = -std::expm1(-lh);
    for (int p = 1; p <= 5; ++p) mu[p] = 1.0 - p * mu[p - 1] / lh;
}

}  // namespace

std::vector<double> bessel_j_zeros(int m, int K) {
    std::vector<double> zeros;
    zeros.reserve(K);
    // march in steps small enough to bracket every zero, then bisect+Newton
    double x = (m == 0) ? 2.0 : m + 1.8557 * std::cbrt(static_cast<double>(m));
    double step = 0.25;
    double prev = bessel_j(m, x);
    while (static_cast<int>(zeros.size()) < K) {
        double x2 = x + step;
        double cur = bessel_j(m, x2);
        if (prev == 0.0) prev = 1e-300;
        if (prev * cur < 0.0) {
            double lo = x, hi = x2;
            for (int it = 0; it < 80; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double v = bessel_j(m, mid);
                if (v * bessel_j(m, lo) <= 0.0) hi = mid;
                else lo = mid;
            }
            double z = 0.5 * (lo + hi);
            for (int it = 0; it < 4; ++it)
                z -= bessel_j(m, z) / bessel_j_deriv(m, z);
            zeros.push_back(z);
        }
        x = x2;
        prev = cur;
    }
    return zeros;
}

DiskDtN::DiskDtN(double radius, double T, int n_theta, int nt_data,
                 int fine_per_dt, int K)
    : radius_(radius), T_(T), n_theta_(n_theta), nt_data_(nt_data),
      fine_per_dt_(fine_per_dt), K_(K) {
    if (!(radius > 0.0) || n_theta < 4 || nt_data < 1 || fine_per_dt < 2)
        throw std::invalid_argument("DiskDtN: bad parameters");
    const int m_max = n_theta_ / 2;
    const double h = fine_step();
    lambda_.resize(m_max + 1);
    w0_.resize(m_max + 1);
    w1_.resize(m_max + 1);
    w2_.resize(m_max + 1);
    w3_.resize(m_max + 1);
    w4_.resize(m_max + 1);
    w5_.resize(m_max + 1);
    decay_.resize(m_max + 1);
    s1_tail_.resize(m_max + 1);
    s2_tail_.resize(m_max + 1);
    const double R2 = radius_ * radius_;
    for (int m = 0; m <= m_max; ++m) {
        const auto zeros = bessel_j_zeros(m, K_);
        double s1 = 0.0, s2 = 0.0;
        lambda_[m].resize(K_);
        w0_[m].resize(K_);
        w1_[m].resize(K_);
        w2_[m].resize(K_);
        w3_[m].resize(K_);
        w4_[m].resize(K_);
        w5_[m].resize(K_);
        decay_[m].resize(K_);
        for (int k = 0; k < K_; ++k) {
            const double lam_unit = zeros[k] * zeros[k];  // unit-disk eigenvalue
            const double lam = lam_unit / R2;             // physical time scale
            lambda_[m][k] = lam;
            s1 += 1.0 / lam_unit;
            s2 += 1.0 / (lam_unit * lam_unit);
            const double lh = lam * h;
            decay_[m][k] = std::exp(-lh);
            double mu[6];
            expint_moments(lh, mu);
            // quintic Hermite basis in s = xi/h (value, h f', h^2 f'' at ends)
            w0_[m][k] = mu[0] - 10.0 * mu[3] + 15.0 * mu[4] - 6.0 * mu[5];
            w1_[m][k] = mu[1] - 6.0 * mu[3] + 8.0 * mu[4] - 3.0 * mu[5];
            w2_[m][k] = 0.5 * mu[2] - 1.5 * mu[3] + 1.5 * mu[4] - 0.5 * mu[5];
            w3_[m][k] = 10.0 * mu[3] - 15.0 * mu[4] + 6.0 * mu[5];
            w4_[m][k] = -4.0 * mu[3] + 7.0 * mu[4] - 3.0 * mu[5];
            w5_[m][k] = 0.5 * mu[3] - mu[4] + 0.5 * mu[5];
        }
        s1_tail_[m] = 1.0 / (4.0 * (m + 1.0)) - s1;
        s2_tail_[m] = 1.0 / (16.0 * (m + 1.0) * (m + 1.0) * (m + 2.0)) - s2;
    }
}

Eigen::MatrixXd DiskDtN::flux(const Eigen::MatrixXd& f,
                              const Eigen::MatrixXd& fp,
                              const Eigen::MatrixXd& fpp) const {
    const int nf = fine_count();
    if (f.rows() != n_theta_ || f.cols() != nf + 1 || fp.rows() != n_theta_ ||
        fp.cols() != nf + 1 || fpp.rows() != n_theta_ || fpp.cols() != nf + 1)
        throw std::invalid_argument("DiskDtN::flux: sample shape mismatch");

    using Cplx = std::complex<double>;
    const int n = n_theta_;
    const int m_max = n / 2;
    const double h = fine_step();
    const double R2 = radius_ * radius_;
    const double R4 = R2 * R2;

    // theta-FFT of the trace jets at every fine sample
    Eigen::FFT<double> fft;
    Eigen::MatrixXcd fm(n, nf + 1), fpm(n, nf + 1), fppm(n, nf + 1);
    {
        std::vector<double> in(n);
        std::vector<Cplx> out(n);
        for (int q = 0; q <= nf; ++q) {
            for (int i = 0; i < n; ++i) in[i] = f(i, q);
            fft.fwd(out, in);
            for (int i = 0; i < n; ++i) fm(i, q) = out[i];
            for (int i = 0; i < n; ++i) in[i] = fp(i, q);
            fft.fwd(out, in);
            for (int i = 0; i < n; ++i) fpm(i, q) = out[i];
            for (int i = 0; i < n; ++i) in[i] = fpp(i, q);
            fft.fwd(out, in);
            for (int i = 0; i < n; ++i) fppm(i, q) = out[i];
        }
    }

    // per mode: steady + integrated K modes + Rayleigh tails, at data times
    Eigen::MatrixXcd flux_m = Eigen::MatrixXcd::Zero(n, nt_data_);
    std::vector<Cplx> g(K_);
    for (int m = 0; m <= m_max; ++m) {
        std::fill(g.begin(), g.end(), Cplx(0.0, 0.0));
        int data_k = 0;
        Eigen::RowVectorXcd acc = Eigen::RowVectorXcd::Zero(nt_data_);
        for (int q = 0; q < nf && data_k < nt_data_; ++q) {
            // advance all K Duhamel modes across [q, q+1]
            for (int k = 0; k < K_; ++k)
                g[k] = decay_[m][k] * g[k] + w0_[m][k] * fm(m, q) +
                       w1_[m][k] * h * fpm(m, q) +
                       w2_[m][k] * h * h * fppm(m, q) +
                       w3_[m][k] * fm(m, q + 1) +
                       w4_[m][k] * h * fpm(m, q + 1) +
                       w5_[m][k] * h * h * fppm(m, q + 1);
            // data midpoint reached at fine index q+1 = (k+0.5)*fine_per_dt
            const int idx = q + 1;
            if (idx * 2 == (2 * data_k + 1) * fine_per_dt_) {
                Cplx s = static_cast<double>(m) * fm(m, idx);
                for (int k = 0; k < K_; ++k) s += 2.0 * (fm(m, idx) - g[k]);
                s += 2.0 * s1_tail_[m] * R2 * fpm(m, idx);
                s -= 2.0 * s2_tail_[m] * R4 * fppm(m, idx);
                acc(data_k) = s / radius_;
                ++data_k;
            }
        }
        flux_m.row(m) = acc;
        if (m > 0 && m < m_max) flux_m.row(n - m) = acc.conjugate();
        if (m == m_max && n % 2 == 0) flux_m.row(m) = acc;  // Nyquist, real
    }

    // inverse FFT back to nodal values
    Eigen::MatrixXd out(n, nt_data_);
    {
        std::vector<Cplx> in(n), res(n);
        for (int k = 0; k < nt_data_; ++k) {
            for (int i = 0; i < n; ++i) in[i] = flux_m(i, k);
            fft.inv(res, in);
            for (int i = 0; i < n; ++i) out(i, k) = res[i].real();
        }
    }
    return out;
}

}  // namespace nrt
