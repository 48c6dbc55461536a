#ifndef NRT_DISK_DTN_HPP
#define NRT_DISK_DTN_HPP

#include <Eigen/Dense>
#include <vector>

// Heat Dirichlet-to-Neumann map of a disk, per theta-Fourier mode. For mode
// m with boundary data f_m(t), f_m(0) = 0, the outward flux of the interior
// caloric extension is (unit disk)
//
//   flux_m = m f_m + 2 sum_k (f_m - g_mk) + 2 S1 f_m' - 2 S2 f_m'',
//
// where g_mk(t) = lambda_mk int_0^t exp(-lambda_mk (t-s)) f_m(s) ds over the
// Bessel eigenvalues lambda_mk = j_mk^2, the first K modes are integrated
// exactly (exponential integrator on a fine grid with Hermite-cubic data),
// and the k > K tail is resummed through the Rayleigh sums
//   sum_k j_mk^-2 = 1/(4(m+1)),   sum_k j_mk^-4 = 1/(16(m+1)^2(m+2)).
// Everything scales to radius R by x -> x/R, t -> t/R^2.

namespace nrt {

// First K positive zeros of the Bessel function J_m.
std::vector<double> bessel_j_zeros(int m, int K);

class DiskDtN {
public:
    // n_theta equispaced boundary nodes, data midpoints on (0,T]/nt_data,
    // trace histories sampled on the uniform fine grid with fine_per_dt
    // samples per data step (fine index q <-> time q*T/(nt_data*fine_per_dt)).
    DiskDtN(double radius, double T, int n_theta, int nt_data,
            int fine_per_dt = 16, int K = 80);

    // f, fp, fpp: n_theta x (fine_count()+1) trace value/derivative samples.
    // Returns the outward flux at the data midpoints, n_theta x nt_data.
    Eigen::MatrixXd flux(const Eigen::MatrixXd& f, const Eigen::MatrixXd& fp,
                         const Eigen::MatrixXd& fpp) const;

    int fine_count() const { return nt_data_ * fine_per_dt_; }
    double fine_step() const { return T_ / fine_count(); }
    int n_theta() const { return n_theta_; }

private:
    double radius_, T_;
    int n_theta_, nt_data_, fine_per_dt_, K_;
    // per (m, k): eigenvalue and quintic-Hermite step weights
    std::vector<std::vector<double>> lambda_;  // [m][k]
    std::vector<std::vector<double>> w0_, w1_, w2_, w3_, w4_, w5_;
    std::vector<std::vector<double>> decay_;   // exp(-lambda h)
    std::vector<double> s1_tail_, s2_tail_;        // Rayleigh tails past K
};

}  // namespace nrt

#endif
