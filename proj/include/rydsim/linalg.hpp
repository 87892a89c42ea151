#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <complex>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "rydsim/errors.hpp"

namespace rydsim {

struct ThinSvd {
    Eigen::MatrixXcd u;   // m x k
    Eigen::VectorXd s;    // k
    Eigen::MatrixXcd vt;  // k x n
};

// Thin SVD via LAPACK's divide-and-conquer zgesdd (much faster than Eigen's
// Jacobi for the bond-dimension-sized dense blocks we feed it), with a
// fallback to Eigen's BDCSVD on the rare non-convergence.
inline ThinSvd svd_thin(Eigen::MatrixXcd a) {
    const lapack_int m = static_cast<lapack_int>(a.rows());
    const lapack_int n = static_cast<lapack_int>(a.cols());
    const lapack_int k = std::min(m, n);
    if (k == 0) throw ShapeError("svd_thin: empty matrix");
    ThinSvd out;
    out.u.resize(m, k);
    out.s.resize(k);
    out.vt.resize(k, n);
    const lapack_int info = LAPACKE_zgesdd(
        LAPACK_COL_MAJOR, 'S', m, n, a.data(), m, out.s.data(), out.u.data(), m, out.vt.data(), k);
    if (info != 0) {
        Eigen::BDCSVD<Eigen::MatrixXcd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
        out.u = svd.matrixU();
        out.s = svd.singularValues();
        out.vt = svd.matrixV().adjoint();
    }
    return out;
}

inline Eigen::VectorXd svd_values(Eigen::MatrixXcd a) {
    const lapack_int m = static_cast<lapack_int>(a.rows());
    const lapack_int n = static_cast<lapack_int>(a.cols());
    const lapack_int k = std::min(m, n);
    if (k == 0) throw ShapeError("svd_values: empty matrix");
    Eigen::VectorXd s(k);
    const lapack_int info =
        LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'N', m, n, a.data(), m, s.data(), nullptr, m, nullptr, k);
    if (info != 0) {
        Eigen::BDCSVD<Eigen::MatrixXcd> svd(a);
        s = svd.singularValues();
    }
    return s;
}

}  // namespace rydsim
