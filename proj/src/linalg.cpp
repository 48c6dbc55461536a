#include "nrt/linalg.hpp"

#include <lapacke.h>

#include <stdexcept>

namespace nrt::linalg {

Svd svd(const MatrixXd& A) {
    const lapack_int m = static_cast<lapack_int>(A.rows());
    const lapack_int n = static_cast<lapack_int>(A.cols());
    const lapack_int k = std::min(m, n);
    Svd out;
    out.U.resize(m, k);
    out.sigma.resize(k);
    MatrixXd VT(k, n);
    MatrixXd work = A;
    const lapack_int info =
        LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'S', m, n, work.data(), m,
                       out.sigma.data(), out.U.data(), m, VT.data(), k);
    if (info == 0) {
        out.V = VT.transpose();
        return out;
    }
    // rare non-convergence: fall back to Eigen
    Eigen::BDCSVD<MatrixXd> s(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    out.U = s.matrixU();
    out.sigma = s.singularValues();
    out.V = s.matrixV();
    return out;
}

int Svd::rank_at(double rel_cutoff) const {
    if (sigma.size() == 0 || sigma(0) <= 0.0) return 0;
    const double thr = rel_cutoff * sigma(0);
    int r = 0;
    while (r < sigma.size() && sigma(r) > thr) ++r;
    return r;
}

MatrixXd Svd::solve(const MatrixXd& B, double rel_cutoff, int* rank) const {
    const int r = rank_at(rel_cutoff);
    if (rank) *rank = r;
    if (r == 0) return MatrixXd::Zero(V.rows(), B.cols());
    const MatrixXd C = U.leftCols(r).transpose() * B;
    return V.leftCols(r) * sigma.head(r).cwiseInverse().asDiagonal() * C;
}

LstsqResult tsvd_lstsq(const MatrixXd& A, const MatrixXd& B, double rel_cutoff) {
    const lapack_int m = static_cast<lapack_int>(A.rows());
    const lapack_int n = static_cast<lapack_int>(A.cols());
    const lapack_int nrhs = static_cast<lapack_int>(B.cols());
    if (B.rows() != m) throw std::invalid_argument("tsvd_lstsq: shape mismatch");
    MatrixXd Aw = A;
    MatrixXd Bw(std::max(m, n), nrhs);
    Bw.topRows(m) = B;
    LstsqResult out;
    out.sigma.resize(std::min(m, n));
    lapack_int rank = 0;
    const lapack_int info = LAPACKE_dgelsd(
        LAPACK_COL_MAJOR, m, n, nrhs, Aw.data(), m, Bw.data(),
        static_cast<lapack_int>(Bw.rows()), out.sigma.data(), rel_cutoff, &rank);
    if (info != 0) {
        const Svd s = svd(A);
        int r = 0;
        out.X = s.solve(B, rel_cutoff, &r);
        out.sigma = s.sigma;
        out.rank = r;
        return out;
    }
    out.X = Bw.topRows(n);
    out.rank = static_cast<int>(rank);
    return out;
}

}  // namespace nrt::linalg
