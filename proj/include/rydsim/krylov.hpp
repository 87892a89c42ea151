#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <string>

#include "rydsim/errors.hpp"
#include "rydsim/hamiltonian.hpp"

namespace rydsim {

struct KrylovOptions {
    int m_max = 20;            // largest Krylov dimension to build
    double tol = 1e-10;        // residual target for exp(-iH dt) |psi>
    double memory_cap_bytes = 1.5e9;
};

struct KrylovResult {
    int dim_used = 0;
    double residual = 0.0;
};

// psi <- exp(-i * H(omega, delta) * dt) * psi via a Lanczos subspace with full
// reorthogonalization.  The subspace grows until the a-posteriori residual
// beta_{j+1} * |[exp(-i dt T_j)]_{j,1}| drops below tol (or the recursion
// terminates exactly).  Hermiticity of H is what makes the tridiagonal
// recursion valid; it holds for every mode by construction.
inline KrylovResult krylov_expm_apply(const HamiltonianOperator& h, double omega, double delta,
                                      double dt, Eigen::VectorXcd& psi,
                                      const KrylovOptions& opt = {}) {
    using cd = std::complex<double>;
    const Eigen::Index dim = psi.size();
    if (dim == 0) throw ShapeError("krylov: empty state");
    const int m = static_cast<int>(std::min<Eigen::Index>(opt.m_max, dim));
    const double est_bytes = static_cast<double>(dim) * (m + 2) * 16.0;
    if (est_bytes > opt.memory_cap_bytes)
        throw ResourceError("krylov: workspace estimate " + std::to_string(est_bytes / 1e9) +
                            " GB exceeds cap " + std::to_string(opt.memory_cap_bytes / 1e9) + " GB");

    Eigen::MatrixXcd v(dim, m);
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(m + 1);  // beta[j] links v_{j-1}, v_j
    Eigen::VectorXcd w(dim);

    const double nrm0 = psi.norm();
    if (!(nrm0 > 0.0)) throw NumericError("krylov: zero state");
    v.col(0) = psi / nrm0;

    auto small_exp_e1 = [&](int j) -> Eigen::VectorXcd {
        // exp(-i dt T_j) e_1 for the leading j x j tridiagonal block.
        Eigen::MatrixXd t = Eigen::MatrixXd::Zero(j, j);
        for (int i = 0; i < j; ++i) {
            t(i, i) = alpha[i];
            if (i + 1 < j) t(i, i + 1) = t(i + 1, i) = beta[i + 1];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
        Eigen::VectorXcd phase(j);
        for (int i = 0; i < j; ++i)
            phase[i] = std::exp(cd(0.0, -dt * es.eigenvalues()[i]));
        Eigen::VectorXd q1 = es.eigenvectors().row(0).transpose();
        return es.eigenvectors() * (phase.array() * q1.cast<cd>().array()).matrix();
    };

    double residual = 0.0;
    for (int j = 0; j < m; ++j) {
        h.apply(omega, delta, v.col(j), w);
        alpha[j] = v.col(j).dot(w).real();
        w -= alpha[j] * v.col(j);
        if (j > 0) w -= beta[j] * v.col(j - 1);
        // Full reorthogonalization keeps the basis numerically orthonormal.
        for (int i = 0; i <= j; ++i) w -= v.col(i).dot(w) * v.col(i);
        beta[j + 1] = w.norm();

        const bool breakdown = beta[j + 1] < 1e-14;
        Eigen::VectorXcd u = small_exp_e1(j + 1);
        residual = breakdown ? 0.0 : beta[j + 1] * std::abs(u[j]);
        if (breakdown || residual < opt.tol || j + 1 == m) {
            if (!breakdown && residual >= opt.tol && j + 1 == m)
                throw ConvergenceError("krylov: residual " + std::to_string(residual) +
                                       " above tol " + std::to_string(opt.tol) + " at m_max " +
                                       std::to_string(m));
            psi = nrm0 * (v.leftCols(j + 1) * u);
            return {j + 1, residual};
        }
        v.col(j + 1) = w / beta[j + 1];
    }
    throw ConvergenceError("krylov: unreachable");
}

}  // namespace rydsim
