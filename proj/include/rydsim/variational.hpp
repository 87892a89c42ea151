#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rydsim/errors.hpp"

namespace rydsim {

// Two analytic companions to the full quench dynamics: a chain partitioned
// into independent two-atom dimers, and a staggered bond-dimension-2 ansatz
// |Psi(theta_a, theta_b)> whose time-dependent variational equations capture
// the crystal-order oscillation.

struct DimerState {
    double t_us = 0.0;
    double p_rg = 1.0, p_gg = 0.0, p_gr = 0.0;
};

// Resonantly driven blockaded pair starting from |r,g>.  The pair flips to
// |g,r> after sqrt(2)*pi/Omega, a factor sqrt(2) slower than a free spin.
inline DimerState dimer_populations(double t_us, double omega) {
    if (!(omega > 0.0)) throw ValidationError("dimer_populations: omega must be positive");
    const double c = std::cos(omega * t_us / std::numbers::sqrt2);
    DimerState d;
    d.t_us = t_us;
    d.p_rg = 0.25 * (1.0 + c) * (1.0 + c);
    d.p_gg = 0.5 * (1.0 - c * c);
    d.p_gr = 0.25 * (1.0 - c) * (1.0 - c);
    return d;
}

struct AnsatzAngles {
    double tau = 0.0;  // dimensionless time Omega*t
    double theta_a = 0.0;
    double theta_b = 0.0;
};

namespace detail {

// The variational equations, written with sec(x)*cos^2(x) simplified to
// cos(x) so the only true singularities are the tan() poles.
inline std::array<double, 2> eom_rhs(double a, double b, double tau) {
    const double ca = std::cos(a), cb = std::cos(b);
    if (std::abs(ca) < 1e-6 || std::abs(cb) < 1e-6)
        throw SingularityError("variational flow hits a sec singularity at tau=" +
                               std::to_string(tau));
    return {-0.5 * (std::sin(a) * ca * ca * std::tan(b) + cb),
            -0.5 * (std::sin(b) * cb * cb * std::tan(a) + ca)};
}

}  // namespace detail

// Fourth-order integration of the staggered equations of motion in
// dimensionless time tau = Omega*t (the equations carry no explicit Omega).
// The crystal point (pi/2, 0) and its inverse (0, pi/2) sit on a removable
// 0*inf of the flow; those two starts hop off by the local series
//   theta_lin = pi/2 - tau/2,  theta_quad = -tau^2/12 + tau^4/1440,
// whose O(tau^5) error is below the integrator's own order.  Any other point
// within 1e-6 of a tan() pole is rejected as singular.
inline std::vector<AnsatzAngles> integrate_eom(double theta_a0, double theta_b0, double omega,
                                               double t_end_us, double dt_us) {
    if (!(omega > 0.0)) throw ValidationError("integrate_eom: omega must be positive");
    if (!(dt_us > 0.0) || !(t_end_us >= dt_us))
        throw ValidationError("integrate_eom: need 0 < dt <= t_end");
    if (!std::isfinite(theta_a0) || !std::isfinite(theta_b0))
        throw ValidationError("integrate_eom: angles must be finite");

    const double tau_end = omega * t_end_us;
    const long n = std::lround(std::ceil(tau_end / (omega * dt_us) - 1e-9));
    const double h = tau_end / static_cast<double>(n);

    std::vector<AnsatzAngles> series;
    series.reserve(static_cast<std::size_t>(n) + 1);
    series.push_back({0.0, theta_a0, theta_b0});

    const double half_pi = std::numbers::pi / 2.0;
    const bool crystal = std::abs(theta_a0 - half_pi) < 1e-9 && std::abs(theta_b0) < 1e-9;
    const bool inverted = std::abs(theta_b0 - half_pi) < 1e-9 && std::abs(theta_a0) < 1e-9;

    double a = theta_a0, b = theta_b0;
    long k0 = 0;
    if (crystal || inverted) {
        const double lin = half_pi - h / 2.0;
        const double quad = -h * h / 12.0 + h * h * h * h / 1440.0;
        a = crystal ? lin : quad;
        b = crystal ? quad : lin;
        series.push_back({h, a, b});
        k0 = 1;
    }
    for (long k = k0; k < n; ++k) {
        const double tau = k * h;
        const auto k1 = detail::eom_rhs(a, b, tau);
        const auto k2 = detail::eom_rhs(a + 0.5 * h * k1[0], b + 0.5 * h * k1[1], tau + 0.5 * h);
        const auto k3 = detail::eom_rhs(a + 0.5 * h * k2[0], b + 0.5 * h * k2[1], tau + 0.5 * h);
        const auto k4 = detail::eom_rhs(a + h * k3[0], b + h * k3[1], tau + h);
        a += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
        b += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
        series.push_back({(k + 1) * h, a, b});
    }
    return series;
}

struct AnsatzObservables {
    double density_odd = 0.0;   // theta_a sublattice
    double density_even = 0.0;  // theta_b sublattice
    double dw_density = 0.0;    // bulk walls per bond
};

namespace detail {

// Double-layer transfer matrix of one ansatz site with an occupation weight
// (w_g, w_r) inserted; (1,1) gives the plain norm transfer.
inline Eigen::Matrix4cd ansatz_transfer(double theta, double w_g, double w_r) {
    using cd = std::complex<double>;
    Eigen::Matrix2cd ag = Eigen::Matrix2cd::Zero(), ar = Eigen::Matrix2cd::Zero();
    ag(0, 0) = std::cos(theta);
    ag(1, 0) = 1.0;
    ar(0, 1) = cd(0.0, std::sin(theta));
    Eigen::Matrix4cd t = Eigen::Matrix4cd::Zero();
    for (int r1 = 0; r1 < 2; ++r1)
        for (int c1 = 0; c1 < 2; ++c1)
            for (int r2 = 0; r2 < 2; ++r2)
                for (int c2 = 0; c2 < 2; ++c2)
                    t(2 * r1 + r2, 2 * c1 + c2) = w_g * std::conj(ag(r1, c1)) * ag(r2, c2) +
                                                  w_r * std::conj(ar(r1, c1)) * ar(r2, c2);
    return t;
}

inline double real_checked(std::complex<double> z, const char* what) {
    if (std::abs(z.imag()) > 1e-9)
        throw NumericError(std::string(what) + ": expectation has imaginary part");
    return z.real();
}

}  // namespace detail

// Bulk densities of the infinite staggered ansatz from the leading
// eigenvector pair of the two-site transfer matrix.
inline AnsatzObservables ansatz_observables(double theta_a, double theta_b) {
    if (!std::isfinite(theta_a) || !std::isfinite(theta_b))
        throw ValidationError("ansatz_observables: angles must be finite");
    using cd = std::complex<double>;
    const Eigen::Matrix4cd ta = detail::ansatz_transfer(theta_a, 1.0, 1.0);
    const Eigen::Matrix4cd tb = detail::ansatz_transfer(theta_b, 1.0, 1.0);
    const Eigen::Matrix4cd t = ta * tb;

    Eigen::ComplexEigenSolver<Eigen::Matrix4cd> es(t);
    if (es.info() != Eigen::Success) throw NumericError("ansatz_observables: eigensolve failed");
    std::array<double, 4> mag;
    int lead = 0;
    for (int k = 0; k < 4; ++k) {
        mag[k] = std::abs(es.eigenvalues()[k]);
        if (mag[k] > mag[lead]) lead = k;
    }
    double second = -1.0;
    for (int k = 0; k < 4; ++k)
        if (k != lead) second = std::max(second, mag[k]);
    if (mag[lead] - second <= 1e-12 * std::max(mag[lead], 1.0))
        throw DegeneracyError("ansatz_observables: leading transfer eigenvalue is degenerate");
    const cd lam = es.eigenvalues()[lead];
    const Eigen::Vector4cd r = es.eigenvectors().col(lead);

    Eigen::ComplexEigenSolver<Eigen::Matrix4cd> esl(t.transpose());
    if (esl.info() != Eigen::Success) throw NumericError("ansatz_observables: eigensolve failed");
    int lft = 0;
    for (int k = 0; k < 4; ++k)
        if (std::abs(esl.eigenvalues()[k] - lam) < std::abs(esl.eigenvalues()[lft] - lam)) lft = k;
    const Eigen::Vector4cd l = esl.eigenvectors().col(lft);
    const cd lr = (l.transpose() * r).value();
    if (std::abs(lr) < 1e-10)
        throw DegeneracyError("ansatz_observables: transfer matrix is not diagonalizable");

    const Eigen::Matrix4cd na = detail::ansatz_transfer(theta_a, 0.0, 1.0);
    const Eigen::Matrix4cd nb = detail::ansatz_transfer(theta_b, 0.0, 1.0);
    const Eigen::Matrix4cd ga = detail::ansatz_transfer(theta_a, 1.0, 0.0);
    const Eigen::Matrix4cd gb = detail::ansatz_transfer(theta_b, 1.0, 0.0);

    auto expect1 = [&](const Eigen::Matrix4cd& cell) {
        return (l.transpose() * cell * r).value() / (lam * lr);
    };
    AnsatzObservables out;
    out.density_odd = detail::real_checked(expect1(na * tb), "density_odd");
    out.density_even = detail::real_checked(expect1(ta * nb), "density_even");

    const cd eq_ab = expect1(na * nb + ga * gb);
    const cd eq_ba = (l.transpose() * (ta * nb) * (na * tb) * r).value() / (lam * lam * lr) +
                     (l.transpose() * (ta * gb) * (ga * tb) * r).value() / (lam * lam * lr);
    out.dw_density = detail::real_checked(0.5 * (eq_ab + eq_ba), "dw_density");
    return out;
}

// Angular frequency of the staggered order underlying an even signal such as
// the wall density, which touches its minimum at both the crystal and the
// inverted crystal: the order parameter completes one cycle per TWO signal
// extrema spacings, so the frequency is pi (not 2*pi) over the first-to-third
// extremum distance.  Extrema are refined by a local parabola.
inline double oscillation_frequency(const std::vector<double>& t, const std::vector<double>& v) {
    if (t.size() != v.size() || t.size() < 5)
        throw ValidationError("oscillation_frequency: need matching series of length >= 5");
    std::vector<double> ext;
    for (std::size_t i = 1; i + 1 < v.size() && ext.size() < 3; ++i) {
        if ((v[i] - v[i - 1]) * (v[i + 1] - v[i]) >= 0.0) continue;
        const double d2 = v[i - 1] - 2.0 * v[i] + v[i + 1];
        const double hh = 0.5 * (t[i + 1] - t[i - 1]);
        double ts = t[i];
        if (std::abs(d2) > 1e-300) ts += 0.5 * hh * (v[i - 1] - v[i + 1]) / d2;
        ext.push_back(ts);
    }
    if (ext.size() < 3)
        throw NumericError("oscillation_frequency: fewer than three extrema in the signal");
    return std::numbers::pi / (ext[2] - ext[0]);
}

}  // namespace rydsim
