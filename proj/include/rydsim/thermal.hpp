#pragma once

// Classical thermal ensemble for the blockaded chain, evaluated with
// two-site blocked transfer matrices: partition function, observables,
// domain-wall counting statistics, detection-dressed expectations and
// inverse-temperature calibration.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "observables.hpp"
#include "units.hpp"

namespace rydsim {

// H_cl = -delta sum n_i + v1 sum n_i n_{i+1} + v2 sum n_i n_{i+2};
// the all-ground configuration sits at energy zero. beta is the inverse
// temperature in time units (energies are rad/us).
struct ThermalModel {
    int n_atoms;
    double delta;  // rad/us
    double v1;     // rad/us, nearest neighbour
    double v2;     // rad/us, next-nearest neighbour
    double beta;   // us/rad

    ThermalModel(int n_atoms_, double delta_, double v1_, double v2_, double beta_)
        : n_atoms(n_atoms_), delta(delta_), v1(v1_), v2(v2_), beta(beta_) {
        if (n_atoms < 1) throw ValidationError("ThermalModel: need at least one atom");
        if (!std::isfinite(delta) || !std::isfinite(v1) || !std::isfinite(v2) ||
            !std::isfinite(beta))
            throw ValidationError("ThermalModel: parameters must be finite");
        if (!(v2 >= 0.0 && v1 >= v2))
            throw ValidationError("ThermalModel: couplings must satisfy v1 >= v2 >= 0");
        if (!(beta > 0.0)) throw ValidationError("ThermalModel: beta must be positive");
    }
};

namespace detail {

// Sites are grouped in blocks of two so both couplings become
// nearest-neighbour in block space and a single 4x4 (or 16x16 dressed)
// kernel covers the chain. An odd chain gets a phantom site pinned to
// ground that carries no couplings and is excluded from all counting.
struct BlockLayout {
    int n_sites = 0;
    int n_blocks = 0;

    static BlockLayout of(int n_sites) { return {n_sites, (n_sites + 1) / 2}; }
    int site_a(int m) const { return 2 * m + 1; }  // 1-based
    int site_b(int m) const { return 2 * m + 2; }
    bool b_real(int m) const { return site_b(m) <= n_sites; }
};

// Occupation bits of a block state. Classical blocks store (a, b);
// dressed blocks store (true_a, obs_a, true_b, obs_b).
struct BitView {
    int dim = 0;
    int a_shift = 0;
    int b_shift = 0;
    int a(int s) const { return (s >> a_shift) & 1; }
    int b(int s) const { return (s >> b_shift) & 1; }
};
inline constexpr BitView classical_view{4, 1, 0};
inline constexpr BitView dressed_true_view{16, 3, 1};
inline constexpr BitView dressed_obs_view{16, 2, 0};

// Energy carried by one block: on-site terms plus the intra-block pair.
inline double block_energy(const ThermalModel& mo, const BlockLayout& lay, int m, int na,
                           int nb) {
    double e = -mo.delta * na;
    if (lay.b_real(m)) e += -mo.delta * nb + mo.v1 * (na * nb);
    return e;
}

// Couplings that straddle blocks m and m+1: the (b, a') neighbour pair
// and the two distance-2 pairs (a, a'), (b, b').
inline double bond_energy(const ThermalModel& mo, const BlockLayout& lay, int m, int na,
                          int nb, int na2, int nb2) {
    double e = mo.v1 * (nb * na2) + mo.v2 * (na * na2);
    if (lay.b_real(m + 1)) e += mo.v2 * (nb * nb2);
    return e;
}

// Left-to-right contraction with per-step rescaling; the value is
// tail * exp(log_scale). Used for the phase-twisted counting sums.
struct LogScaled {
    double log_scale = 0.0;
    std::complex<double> tail;
};

inline LogScaled contract_complex(const std::vector<Eigen::VectorXcd>& site_w,
                                  const std::vector<Eigen::MatrixXcd>& bond_w) {
    Eigen::VectorXcd v = site_w[0];
    double log_scale = 0.0;
    for (std::size_t m = 0;; ++m) {
        const double c = v.cwiseAbs().maxCoeff();
        if (!std::isfinite(c))
            throw NumericError("transfer contraction: non-finite weight encountered");
        if (c == 0.0) return {0.0, {0.0, 0.0}};
        v /= c;
        log_scale += std::log(c);
        if (m + 1 == site_w.size()) break;
        v = (v.transpose() * bond_w[m]).transpose().cwiseProduct(site_w[m + 1]);
    }
    return {log_scale, v.sum()};
}

// Open-boundary transfer chain over nonnegative block weights with
// cached left/right environments. Expectation ratios are formed inside
// a single environment frame, so the rescaling factors drop out.
class RealBlockChain {
   public:
    RealBlockChain(std::vector<Eigen::VectorXd> site_w, std::vector<Eigen::MatrixXd> bond_w,
                   double log_offset = 0.0)
        : site_w_(std::move(site_w)), bond_w_(std::move(bond_w)) {
        const int m = n_blocks();
        if (m == 0) throw ShapeError("transfer chain: no blocks");
        if (static_cast<int>(bond_w_.size()) != m - 1)
            throw ShapeError("transfer chain: need one bond matrix between adjacent blocks");
        lenv_.resize(m);
        renv_.resize(m);
        double llog = 0.0;
        for (int k = 0; k < m; ++k) {
            Eigen::VectorXd v =
                (k == 0) ? site_w_[0]
                         : Eigen::VectorXd((lenv_[k - 1].transpose() * bond_w_[k - 1])
                                               .transpose()
                                               .cwiseProduct(site_w_[k]));
            llog += std::log(rescale(v));
            lenv_[k] = std::move(v);
        }
        for (int k = m - 1; k >= 0; --k) {
            Eigen::VectorXd v;
            if (k == m - 1)
                v = Eigen::VectorXd::Ones(dim());
            else
                v = bond_w_[k] * renv_[k + 1].cwiseProduct(site_w_[k + 1]);
            rescale(v);
            renv_[k] = std::move(v);
        }
        log_z_ = llog + std::log(lenv_[m - 1].sum()) + log_offset;
        if (!std::isfinite(log_z_))
            throw NumericError("transfer contraction: log partition function not finite");
    }

    int n_blocks() const { return static_cast<int>(site_w_.size()); }
    int dim() const { return static_cast<int>(site_w_[0].size()); }
    double log_z() const { return log_z_; }
    const std::vector<Eigen::VectorXd>& site_weights() const { return site_w_; }
    const std::vector<Eigen::MatrixXd>& bond_weights() const { return bond_w_; }

    // <f> for a diagonal factor living on block m.
    double expect_site(int m, const Eigen::VectorXd& f) const {
        const Eigen::VectorXd lr = lenv_[m].cwiseProduct(renv_[m]);
        return lr.cwiseProduct(f).sum() / lr.sum();
    }

    // <f> for a factor on the bond between blocks m and m+1.
    double expect_bond(int m, const Eigen::MatrixXd& f) const {
        const Eigen::VectorXd r = site_w_[m + 1].cwiseProduct(renv_[m + 1]);
        const double den = lenv_[m].transpose() * bond_w_[m] * r;
        const double num = lenv_[m].transpose() * bond_w_[m].cwiseProduct(f) * r;
        return num / den;
    }

    // <f1 f2> for diagonal factors on blocks m1 < m2; numerator and
    // denominator walk together and share every rescaling.
    double expect_pair(int m1, const Eigen::VectorXd& f1, int m2,
                       const Eigen::VectorXd& f2) const {
        Eigen::VectorXd num = lenv_[m1].cwiseProduct(f1);
        Eigen::VectorXd den = lenv_[m1];
        for (int k = m1 + 1; k <= m2; ++k) {
            num = (num.transpose() * bond_w_[k - 1]).transpose().cwiseProduct(site_w_[k]);
            den = (den.transpose() * bond_w_[k - 1]).transpose().cwiseProduct(site_w_[k]);
            const double c = den.maxCoeff();
            num /= c;
            den /= c;
        }
        return num.cwiseProduct(f2).cwiseProduct(renv_[m2]).sum() /
               den.cwiseProduct(renv_[m2]).sum();
    }

   private:
    static double rescale(Eigen::VectorXd& v) {
        const double c = v.maxCoeff();
        if (!std::isfinite(c))
            throw NumericError("transfer contraction: non-finite weight encountered");
        if (c <= 0.0) throw NumericError("transfer contraction: partition weight vanished");
        v /= c;
        return c;
    }

    std::vector<Eigen::VectorXd> site_w_;
    std::vector<Eigen::MatrixXd> bond_w_;
    std::vector<Eigen::VectorXd> lenv_, renv_;
    double log_z_ = 0.0;
};

// A contracted chain plus the views describing where the Boltzmann
// weight and the measured occupations live.
struct ChainBundle {
    ThermalModel model;
    BlockLayout lay;
    BitView obs_view;   // bits observables read
    BitView true_view;  // bits the energy reads
    RealBlockChain chain;
};

// Detection confusion factor: probability of reading `o` given `t`.
inline double confusion(double f_g, double f_r, int t, int o) {
    if (t == 0) return o == 0 ? f_g : 1.0 - f_g;
    return o == 1 ? f_r : 1.0 - f_r;
}

// Block weights for the classical (f = 1) or dressed chain. Site
// exponents are shifted blockwise before exponentiating, so arbitrarily
// large beta*delta stays representable; the shifts accumulate into the
// log-partition offset. dim = 4 selects the bare chain, 16 the joint
// (true, observed) chain.
inline ChainBundle make_chain(const ThermalModel& mo, int dim, double f_g, double f_r) {
    const BlockLayout lay = BlockLayout::of(mo.n_atoms);
    const BitView tv = (dim == 4) ? classical_view : dressed_true_view;
    const BitView ov = (dim == 4) ? classical_view : dressed_obs_view;
    std::vector<Eigen::VectorXd> site_w(lay.n_blocks);
    std::vector<Eigen::MatrixXd> bond_w(lay.n_blocks > 0 ? lay.n_blocks - 1 : 0);
    double log_offset = 0.0;
    for (int m = 0; m < lay.n_blocks; ++m) {
        Eigen::VectorXd expo(dim), lam(dim);
        std::vector<bool> allowed(dim);
        double shift = -std::numeric_limits<double>::infinity();
        for (int s = 0; s < dim; ++s) {
            const int ta = tv.a(s), tb = tv.b(s);
            const int oa = ov.a(s), ob = ov.b(s);
            // the phantom site of an odd chain is pinned to ground
            allowed[s] = lay.b_real(m) || (tb == 0 && ob == 0);
            if (!allowed[s]) continue;
            expo[s] = -mo.beta * block_energy(mo, lay, m, ta, tb);
            lam[s] = 1.0;
            if (dim == 16) {
                lam[s] = confusion(f_g, f_r, ta, oa);
                if (lay.b_real(m)) lam[s] *= confusion(f_g, f_r, tb, ob);
            }
            shift = std::max(shift, expo[s]);
        }
        site_w[m] = Eigen::VectorXd::Zero(dim);
        for (int s = 0; s < dim; ++s)
            if (allowed[s]) site_w[m][s] = lam[s] * std::exp(expo[s] - shift);
        log_offset += shift;
    }
    for (int m = 0; m + 1 < lay.n_blocks; ++m) {
        Eigen::MatrixXd b(dim, dim);
        for (int s = 0; s < dim; ++s)
            for (int s2 = 0; s2 < dim; ++s2)
                b(s, s2) = std::exp(-mo.beta * bond_energy(mo, lay, m, tv.a(s), tv.b(s),
                                                           tv.a(s2), tv.b(s2)));
        bond_w[m] = std::move(b);
    }
    return {mo, lay, ov, tv,
            RealBlockChain(std::move(site_w), std::move(bond_w), log_offset)};
}

inline ChainBundle make_classical(const ThermalModel& mo) { return make_chain(mo, 4, 1.0, 1.0); }

inline ChainBundle make_dressed(const ThermalModel& mo, double f_g, double f_r) {
    if (!(f_g > 0.5 && f_g <= 1.0) || !(f_r > 0.5 && f_r <= 1.0))
        throw ValidationError("detection fidelities must lie in (0.5, 1]");
    return make_chain(mo, 16, f_g, f_r);
}

// n at one site, as a diagonal factor on its block.
inline Eigen::VectorXd number_factor(const BitView& v, int site) {
    Eigen::VectorXd f(v.dim);
    const bool is_a = (site % 2 == 1);
    for (int s = 0; s < v.dim; ++s) f[s] = is_a ? v.a(s) : v.b(s);
    return f;
}

// Per-block share of the domain-wall count: the intra-block aligned
// pair plus the two chain-edge terms (1 - n).
inline Eigen::VectorXd wall_site_factor(const BitView& v, const BlockLayout& lay, int m) {
    Eigen::VectorXd f(v.dim);
    const int sa = lay.site_a(m), sb = lay.site_b(m);
    for (int s = 0; s < v.dim; ++s) {
        const int a = v.a(s), b = v.b(s);
        double val = 0.0;
        if (sb <= lay.n_sites && a == b) val += 1.0;
        if (sa == 1) val += 1.0 - a;
        if (sa == lay.n_sites) val += 1.0 - a;
        if (sb == lay.n_sites) val += 1.0 - b;
        f[s] = val;
    }
    return f;
}

// The aligned pair straddling a bond; the same matrix serves every bond.
inline Eigen::MatrixXd wall_bond_factor(const BitView& v) {
    Eigen::MatrixXd f(v.dim, v.dim);
    for (int s = 0; s < v.dim; ++s)
        for (int s2 = 0; s2 < v.dim; ++s2) f(s, s2) = (v.b(s) == v.a(s2)) ? 1.0 : 0.0;
    return f;
}

inline double chain_mean_walls(const ChainBundle& cb) {
    double d = 0.0;
    for (int m = 0; m < cb.lay.n_blocks; ++m)
        d += cb.chain.expect_site(m, wall_site_factor(cb.obs_view, cb.lay, m));
    const Eigen::MatrixXd fb = wall_bond_factor(cb.obs_view);
    for (int m = 0; m + 1 < cb.lay.n_blocks; ++m) d += cb.chain.expect_bond(m, fb);
    return d;
}

inline Eigen::VectorXd chain_densities(const ChainBundle& cb) {
    Eigen::VectorXd dens(cb.lay.n_sites);
    for (int i = 1; i <= cb.lay.n_sites; ++i)
        dens[i - 1] = cb.chain.expect_site((i - 1) / 2, number_factor(cb.obs_view, i));
    return dens;
}

inline double chain_pair_density(const ChainBundle& cb, int i, int j) {
    const int mi = (i - 1) / 2, mj = (j - 1) / 2;
    const Eigen::VectorXd fi = number_factor(cb.obs_view, i);
    const Eigen::VectorXd fj = number_factor(cb.obs_view, j);
    if (mi == mj) return cb.chain.expect_site(mi, fi.cwiseProduct(fj));
    return cb.chain.expect_pair(mi, fi, mj, fj);
}

// Distance-averaged connected correlations, entry d = 0..d_max.
inline Eigen::VectorXd chain_g2(const ChainBundle& cb, int d_max) {
    const int n = cb.lay.n_sites;
    const Eigen::VectorXd dens = chain_densities(cb);
    const int d_hi = std::min(d_max, n - 1);
    Eigen::VectorXd g2 = Eigen::VectorXd::Zero(d_hi + 1);
    for (int i = 0; i < n; ++i) g2[0] += dens[i] - dens[i] * dens[i];
    g2[0] /= n;
    for (int d = 1; d <= d_hi; ++d) {
        double acc = 0.0;
        for (int i = 1; i + d <= n; ++i)
            acc += chain_pair_density(cb, i, i + d) - dens[i - 1] * dens[i + d - 1];
        g2[d] = acc / (n - d);
    }
    return g2;
}

inline double chain_energy(const ChainBundle& cb) {
    const ThermalModel& mo = cb.model;
    double e = 0.0;
    for (int m = 0; m < cb.lay.n_blocks; ++m) {
        Eigen::VectorXd f(cb.true_view.dim);
        for (int s = 0; s < cb.true_view.dim; ++s)
            f[s] = block_energy(mo, cb.lay, m, cb.true_view.a(s), cb.true_view.b(s));
        e += cb.chain.expect_site(m, f);
    }
    for (int m = 0; m + 1 < cb.lay.n_blocks; ++m) {
        Eigen::MatrixXd f(cb.true_view.dim, cb.true_view.dim);
        for (int s = 0; s < cb.true_view.dim; ++s)
            for (int s2 = 0; s2 < cb.true_view.dim; ++s2)
                f(s, s2) = bond_energy(mo, cb.lay, m, cb.true_view.a(s), cb.true_view.b(s),
                                       cb.true_view.a(s2), cb.true_view.b(s2));
        e += cb.chain.expect_bond(m, f);
    }
    return e;
}

// Wall-count distribution p_n as the discrete Fourier inversion of
// phase-twisted partition sums: each term the wall count picks up also
// multiplies the weight by exp(-i 2 pi k / (N+2)).
inline Eigen::VectorXd chain_fcs(const ChainBundle& cb) {
    const int n_out = cb.lay.n_sites + 2;
    const int nb = cb.lay.n_blocks;
    std::vector<Eigen::VectorXd> wall_site(nb);
    for (int m = 0; m < nb; ++m) wall_site[m] = wall_site_factor(cb.obs_view, cb.lay, m);
    const Eigen::MatrixXd wall_bond = wall_bond_factor(cb.obs_view);

    std::vector<std::complex<double>> ratio(n_out);
    LogScaled z0;
    std::vector<Eigen::VectorXcd> sw(nb);
    std::vector<Eigen::MatrixXcd> bw(nb > 0 ? nb - 1 : 0);
    const int dim = cb.obs_view.dim;
    for (int k = 0; k < n_out; ++k) {
        const double phi = -two_pi * k / n_out;
        for (int m = 0; m < nb; ++m) {
            const Eigen::VectorXd& w = cb.chain.site_weights()[m];
            sw[m].resize(dim);
            for (int s = 0; s < dim; ++s)
                sw[m][s] = w[s] * std::polar(1.0, phi * wall_site[m][s]);
        }
        for (int m = 0; m + 1 < nb; ++m) {
            const Eigen::MatrixXd& b = cb.chain.bond_weights()[m];
            bw[m].resize(dim, dim);
            for (int s = 0; s < dim; ++s)
                for (int s2 = 0; s2 < dim; ++s2)
                    bw[m](s, s2) = b(s, s2) * std::polar(1.0, phi * wall_bond(s, s2));
        }
        const LogScaled z = contract_complex(sw, bw);
        if (k == 0) {
            z0 = z;
            ratio[0] = 1.0;
        } else {
            ratio[k] = (z.tail / z0.tail) * std::exp(z.log_scale - z0.log_scale);
        }
    }

    Eigen::VectorXd p(n_out);
    for (int n = 0; n < n_out; ++n) {
        std::complex<double> acc = 0.0;
        for (int k = 0; k < n_out; ++k)
            acc += std::polar(1.0, two_pi * double(k) * n / n_out) * ratio[k];
        acc /= double(n_out);
        if (std::abs(acc.imag()) > 1e-8)
            throw NumericError("wall statistics: imaginary residue " +
                               std::to_string(acc.imag()) + " at count " + std::to_string(n));
        double re = acc.real();
        if (re < -1e-8)
            throw NumericError("wall statistics: negative probability " + std::to_string(re) +
                               " at count " + std::to_string(n));
        if (std::abs(re) < 1e-10) re = 0.0;
        p[n] = std::max(re, 0.0);
    }
    return p;
}

}  // namespace detail

inline double log_partition(const ThermalModel& mo) {
    return detail::make_classical(mo).chain.log_z();
}

struct ThermalObservables {
    double log_z = 0.0;
    double energy = 0.0;            // rad/us
    double free_energy = 0.0;       // rad/us
    double entropy_per_atom = 0.0;  // k_B units
    double mean_walls = 0.0;
    double mean_density = 0.0;
    Eigen::VectorXd densities;  // per site
    Eigen::VectorXd g2;         // distance-averaged, entry d = 0..d_max
};

inline ThermalObservables thermal_observables(const ThermalModel& mo, int d_max = 12) {
    if (d_max < 0) throw ValidationError("thermal_observables: d_max must be nonnegative");
    const detail::ChainBundle cb = detail::make_classical(mo);
    ThermalObservables out;
    out.log_z = cb.chain.log_z();
    out.energy = detail::chain_energy(cb);
    out.free_energy = -out.log_z / mo.beta;
    out.entropy_per_atom = mo.beta * (out.energy - out.free_energy) / mo.n_atoms;
    out.mean_walls = detail::chain_mean_walls(cb);
    out.densities = detail::chain_densities(cb);
    out.mean_density = out.densities.mean();
    out.g2 = detail::chain_g2(cb, d_max);
    return out;
}

inline DwDistribution domain_wall_fcs(const ThermalModel& mo) {
    DwDistribution d;
    d.p = detail::chain_fcs(detail::make_classical(mo));
    d.n_shots = 0;
    return d;
}

// Expectations over the joint (true, observed) chain: the Boltzmann
// weight acts on the true occupations, per-site readout confusion links
// them to the observed ones, and every observable reads the latter.
struct DressedObservables {
    double mean_walls = 0.0;
    double mean_density = 0.0;
    Eigen::VectorXd densities;
    Eigen::VectorXd g2;
    DwDistribution fcs;
};

inline DressedObservables dressed_observables(const ThermalModel& mo, double f_g, double f_r,
                                              int d_max = 12, bool with_fcs = true) {
    if (d_max < 0) throw ValidationError("dressed_observables: d_max must be nonnegative");
    const detail::ChainBundle cb = detail::make_dressed(mo, f_g, f_r);
    DressedObservables out;
    out.mean_walls = detail::chain_mean_walls(cb);
    out.densities = detail::chain_densities(cb);
    out.mean_density = out.densities.mean();
    out.g2 = detail::chain_g2(cb, d_max);
    if (with_fcs) {
        out.fcs.p = detail::chain_fcs(cb);
        out.fcs.n_shots = 0;
    }
    return out;
}

struct BetaCalibration {
    double beta = 0.0;
    double mean_walls = 0.0;  // achieved dressed wall count
    int iterations = 0;
};

// Find beta such that the dressed mean wall count hits `target_walls`,
// by bisection in log(beta); the count is monotone in beta. Pass
// f_g = f_r = 1 to calibrate against bare counts.
inline BetaCalibration calibrate_beta(int n_atoms, double delta, double v1, double v2,
                                      double f_g, double f_r, double target_walls,
                                      double tol_walls = 1e-4) {
    const double scale = std::max(std::abs(delta), v1);
    if (!(scale > 0.0))
        throw ValidationError("calibrate_beta: need a nonzero energy scale");
    const auto walls = [&](double beta) {
        const ThermalModel mo(n_atoms, delta, v1, v2, beta);
        return detail::chain_mean_walls(detail::make_dressed(mo, f_g, f_r));
    };
    double b_lo = 1e-8 / scale, b_hi = 1e3 / scale;
    const double w_lo = walls(b_lo), w_hi = walls(b_hi);
    const double w_min = std::min(w_lo, w_hi), w_max = std::max(w_lo, w_hi);
    if (!(target_walls >= w_min - tol_walls && target_walls <= w_max + tol_walls))
        throw ValidationError("calibrate_beta: target " + std::to_string(target_walls) +
                              " outside achievable range [" + std::to_string(w_min) + ", " +
                              std::to_string(w_max) + "]");
    const bool decreasing = w_lo > w_hi;
    int it = 0;
    while (std::log(b_hi / b_lo) > 1e-9 && it < 200) {
        const double b_mid = std::sqrt(b_lo * b_hi);
        const double w_mid = walls(b_mid);
        const bool go_up = decreasing ? (w_mid > target_walls) : (w_mid < target_walls);
        if (go_up)
            b_lo = b_mid;
        else
            b_hi = b_mid;
        ++it;
    }
    BetaCalibration out;
    out.beta = std::sqrt(b_lo * b_hi);
    out.mean_walls = walls(out.beta);
    out.iterations = it;
    if (std::abs(out.mean_walls - target_walls) > std::max(tol_walls, 1e-10 * target_walls))
        throw ConvergenceError("calibrate_beta: bisection stalled at wall count " +
                               std::to_string(out.mean_walls) + " for target " +
                               std::to_string(target_walls));
    return out;
}

}  // namespace rydsim
