#pragma once

#include <Eigen/Dense>
#include <bit>
#include <cstdint>
#include <vector>

#include "rydsim/atom_array.hpp"
#include "rydsim/basis.hpp"
#include "rydsim/errors.hpp"

namespace rydsim {

// Which Hilbert space / interaction content the Hamiltonian uses.
//   full:                 2^N product space, every pairwise 1/r^6 coupling.
//   constrained_nn:       blockade subspace, no residual interactions (the
//                         nearest-neighbour coupling is treated as infinite).
//   constrained_with_tail: blockade subspace plus the diagonal van der Waals
//                         tail V_ij for |i-j| >= 2.
enum class HamiltonianMode { full, constrained_nn, constrained_with_tail };

inline bool mode_is_constrained(HamiltonianMode m) { return m != HamiltonianMode::full; }

// H(omega, delta) = (omega/2) sum_i sigma_x^i - delta sum_i n_i + interactions,
// with sigma_x flips projected onto the basis (blocked flips have no target).
// Drive and detuning enter only through apply(), so one operator serves an
// entire time-dependent schedule.
class HamiltonianOperator {
public:
    HamiltonianOperator(const AtomArray& array, HamiltonianMode mode, const BasisSet& basis)
        : basis_(&basis), mode_(mode) {
        if (array.n_atoms() != basis.n_atoms())
            throw ShapeError("hamiltonian: atom array and basis sizes differ");
        if (mode_is_constrained(mode) != basis.constrained())
            throw ValidationError("hamiltonian: mode/basis constraint mismatch");
        const int n = basis.n_atoms();
        const std::size_t dim = basis.size();
        n_exc_.resize(dim);
        diag_interaction_.assign(dim, 0.0);
        for (std::size_t k = 0; k < dim; ++k) {
            const ConfigWord w = basis.state(k);
            n_exc_[k] = static_cast<std::int8_t>(excitation_count(w));
            if (mode != HamiltonianMode::constrained_nn)
                diag_interaction_[k] = interaction_energy(w, array, mode);
        }
        flips_.assign(static_cast<std::size_t>(n) * dim, -1);
        for (int site = 1; site <= n; ++site) {
            const int p = n - site;
            ConfigWord nbr_mask = 0;
            if (site > 1) nbr_mask |= 1ull << (p + 1);
            if (site < n) nbr_mask |= 1ull << (p - 1);
            std::int32_t* row = flips_.data() + static_cast<std::size_t>(site - 1) * dim;
            for (std::size_t k = 0; k < dim; ++k) {
                const ConfigWord w = basis.state(k);
                if (mode_is_constrained(mode) && (w & nbr_mask) != 0) continue;
                const ConfigWord target = w ^ (1ull << p);
                if (mode_is_constrained(mode)) {
                    auto idx = basis.index_of(target);
                    row[k] = static_cast<std::int32_t>(*idx);
                } else {
                    row[k] = static_cast<std::int32_t>(target);
                }
            }
        }
    }

    const BasisSet& basis() const { return *basis_; }
    HamiltonianMode mode() const { return mode_; }

    // out = H(omega, delta) * in
    void apply(double omega, double delta, const Eigen::VectorXcd& in,
               Eigen::VectorXcd& out) const {
        const std::size_t dim = basis_->size();
        if (static_cast<std::size_t>(in.size()) != dim)
            throw ShapeError("hamiltonian apply: state dimension mismatch");
        out.resize(in.size());
        for (std::size_t k = 0; k < dim; ++k)
            out[k] = (diag_interaction_[k] - delta * n_exc_[k]) * in[k];
        const double half_omega = 0.5 * omega;
        if (half_omega != 0.0) {
            const int n = basis_->n_atoms();
            for (int s = 0; s < n; ++s) {
                const std::int32_t* row = flips_.data() + static_cast<std::size_t>(s) * dim;
                for (std::size_t k = 0; k < dim; ++k) {
                    const std::int32_t j = row[k];
                    if (j >= 0) out[k] += half_omega * in[j];
                }
            }
        }
    }

    Eigen::VectorXcd apply(double omega, double delta, const Eigen::VectorXcd& in) const {
        Eigen::VectorXcd out;
        apply(omega, delta, in, out);
        return out;
    }

    // Dense matrix, for small spaces and cross-checks.
    Eigen::MatrixXcd dense(double omega, double delta) const {
        const std::size_t dim = basis_->size();
        Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
        for (std::size_t k = 0; k < dim; ++k)
            h(k, k) = diag_interaction_[k] - delta * n_exc_[k];
        const int n = basis_->n_atoms();
        for (int s = 0; s < n; ++s) {
            const std::int32_t* row = flips_.data() + static_cast<std::size_t>(s) * dim;
            for (std::size_t k = 0; k < dim; ++k)
                if (row[k] >= 0) h(k, row[k]) += 0.5 * omega;
        }
        return h;
    }

    double diagonal_interaction(std::size_t k) const { return diag_interaction_[k]; }
    int excitations(std::size_t k) const { return n_exc_[k]; }

private:
    static double interaction_energy(ConfigWord w, const AtomArray& array, HamiltonianMode mode) {
        const int n = array.n_atoms();
        double e = 0.0;
        std::vector<int> sites;
        sites.reserve(std::popcount(w));
        for (int site = 1; site <= n; ++site)
            if (config_bit(w, n, site)) sites.push_back(site);
        const int min_sep = (mode == HamiltonianMode::constrained_with_tail) ? 2 : 1;
        for (std::size_t a = 0; a < sites.size(); ++a)
            for (std::size_t b = a + 1; b < sites.size(); ++b)
                if (sites[b] - sites[a] >= min_sep) e += array.v(sites[a] - 1, sites[b] - 1);
        return e;
    }

    const BasisSet* basis_;
    HamiltonianMode mode_;
    std::vector<std::int8_t> n_exc_;
    std::vector<double> diag_interaction_;
    std::vector<std::int32_t> flips_;
};

}  // namespace rydsim
