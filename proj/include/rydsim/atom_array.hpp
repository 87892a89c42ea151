#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "rydsim/errors.hpp"

namespace rydsim {

// Pairwise van der Waals couplings V_ij = c6 / |x_i - x_j|^6 for a 1D chain.
// c6 is in rad/us * um^6, positions in um, so V is in rad/us.
inline Eigen::MatrixXd build_interactions(const std::vector<double>& positions_um, double c6) {
    const int n = static_cast<int>(positions_um.size());
    if (n < 1) throw ValidationError("build_interactions: need at least one atom");
    if (!(c6 > 0.0)) throw ValidationError("build_interactions: c6 must be positive (repulsive)");
    for (int i = 0; i + 1 < n; ++i) {
        if (!(positions_um[i + 1] > positions_um[i]))
            throw ValidationError("build_interactions: positions must be strictly increasing "
                                  "(degenerate geometry at index " + std::to_string(i + 1) + ")");
    }
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double r = positions_um[j] - positions_um[i];
            const double r3 = r * r * r;
            v(i, j) = v(j, i) = c6 / (r3 * r3);
        }
    return v;
}

class AtomArray {
public:
    AtomArray(std::vector<double> positions_um, double c6)
        : positions_(std::move(positions_um)), c6_(c6), v_(build_interactions(positions_, c6)) {}

    static AtomArray uniform_chain(int n_atoms, double spacing_um, double c6) {
        if (n_atoms < 1) throw ValidationError("uniform_chain: n_atoms must be >= 1");
        if (!(spacing_um > 0.0)) throw ValidationError("uniform_chain: spacing must be positive");
        std::vector<double> x(n_atoms);
        for (int i = 0; i < n_atoms; ++i) x[i] = i * spacing_um;
        return AtomArray(std::move(x), c6);
    }

    // c6 from a quoted nearest-neighbour coupling at a given spacing.
    static double c6_from_nn(double v_nn_rad_us, double spacing_um) {
        if (!(v_nn_rad_us > 0.0) || !(spacing_um > 0.0))
            throw ValidationError("c6_from_nn: v_nn and spacing must be positive");
        const double a3 = spacing_um * spacing_um * spacing_um;
        return v_nn_rad_us * a3 * a3;
    }

    int n_atoms() const { return static_cast<int>(positions_.size()); }
    const std::vector<double>& positions_um() const { return positions_; }
    double c6() const { return c6_; }
    const Eigen::MatrixXd& interactions() const { return v_; }
    double v(int i, int j) const { return v_(i, j); }

private:
    std::vector<double> positions_;
    double c6_;
    Eigen::MatrixXd v_;
};

// Distance at which the interaction equals the drive: V(R_b) = omega.
inline double blockade_radius(double c6, double omega_rad_us) {
    if (!(c6 > 0.0) || !(omega_rad_us > 0.0))
        throw ValidationError("blockade_radius: c6 and omega must be positive");
    return std::pow(c6 / omega_rad_us, 1.0 / 6.0);
}

}  // namespace rydsim
