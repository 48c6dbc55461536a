#ifndef NRT_LINALG_HPP
#define NRT_LINALG_HPP

#include <Eigen/Dense>

// Thin wrappers over LAPACK's divide-and-conquer SVD routines with Eigen
// fallbacks. All least-squares solves in this project are truncated-SVD
// (minimum-norm) solves with a relative singular value cutoff.

namespace nrt::linalg {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Svd {
    MatrixXd U;      // m x k, k = min(m,n)
    VectorXd sigma;  // descending
    MatrixXd V;      // n x k

    // Minimum-norm least-squares solve keeping sigma_i >= rel_cutoff * sigma_0.
    MatrixXd solve(const MatrixXd& B, double rel_cutoff, int* rank = nullptr) const;
    int rank_at(double rel_cutoff) const;
};

Svd svd(const MatrixXd& A);

struct LstsqResult {
    MatrixXd X;
    VectorXd sigma;
    int rank = 0;
};

// dgelsd: truncated-SVD least squares, cheaper than a full SVD when only the
// solution is needed.
LstsqResult tsvd_lstsq(const MatrixXd& A, const MatrixXd& B, double rel_cutoff);

}  // namespace nrt::linalg

#endif
