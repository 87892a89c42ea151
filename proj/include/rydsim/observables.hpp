#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <unordered_map>
#include <vector>

#include "rydsim/basis.hpp"
#include "rydsim/errors.hpp"
#include "rydsim/linalg.hpp"
#include "rydsim/propagate.hpp"
#include "rydsim/rng.hpp"
#include "rydsim/units.hpp"

namespace rydsim {

// ---------- exact (statevector) observables ----------

inline Eigen::VectorXd site_densities(const StateVector& psi) {
    const int n = psi.n_atoms();
    Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
    for (Eigen::Index k = 0; k < psi.amp.size(); ++k) {
        const double p = std::norm(psi.amp[k]);
        if (p == 0.0) continue;
        ConfigWord w = psi.basis->state(k);
        while (w) {
            const int bit = std::countr_zero(w);
            d[n - 1 - bit] += p;
            w &= w - 1;
        }
    }
    return d;
}

inline double prob_of_config(const StateVector& psi, ConfigWord w) {
    auto idx = psi.basis->index_of(w);
    return idx ? std::norm(psi.amp[*idx]) : 0.0;
}

inline double prob_ground_config(const StateVector& psi) { return prob_of_config(psi, 0); }

inline double prob_multi_excitation(const StateVector& psi) {
    double p = 0.0;
    for (Eigen::Index k = 0; k < psi.amp.size(); ++k)
        if (excitation_count(psi.basis->state(k)) >= 2) p += std::norm(psi.amp[k]);
    return p;
}

inline double prob_any_excitation(const StateVector& psi) {
    return 1.0 - prob_of_config(psi, 0);
}

inline double prob_blockade_violation(const StateVector& psi) {
    double p = 0.0;
    for (Eigen::Index k = 0; k < psi.amp.size(); ++k)
        if (violates_blockade(psi.basis->state(k))) p += std::norm(psi.amp[k]);
    return p;
}

struct DwMoments {
    double mean = 0.0;
    double variance = 0.0;
    double density = 0.0;  // mean / (N + 1)
};

inline DwMoments dw_moments(const StateVector& psi) {
    double m1 = 0.0, m2 = 0.0;
    const int n = psi.n_atoms();
    for (Eigen::Index k = 0; k < psi.amp.size(); ++k) {
        const double p = std::norm(psi.amp[k]);
        if (p == 0.0) continue;
        const int d = count_domain_walls(psi.basis->state(k), n);
        m1 += p * d;
        m2 += p * d * d;
    }
    return {m1, m2 - m1 * m1, m1 / (n + 1)};
}

// Exact full-counting distribution p_n, n = 0..N+1 (diagonal projector sums).
inline Eigen::VectorXd dw_distribution(const StateVector& psi) {
    const int n = psi.n_atoms();
    Eigen::VectorXd p = Eigen::VectorXd::Zero(n + 2);
    for (Eigen::Index k = 0; k < psi.amp.size(); ++k)
        p[count_domain_walls(psi.basis->state(k), n)] += std::norm(psi.amp[k]);
    return p;
}

// Connected density-density correlations g2(i,j) = <n_i n_j> - <n_i><n_j>.
inline Eigen::MatrixXd g2_matrix(const StateVector& psi) {
    const int n = psi.n_atoms();
    Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
    Eigen::MatrixXd nn = Eigen::MatrixXd::Zero(n, n);
    std::vector<int> sites;
    for (Eigen::Index k = 0; k < psi.amp.size(); ++k) {
        const double p = std::norm(psi.amp[k]);
        if (p == 0.0) continue;
        ConfigWord w = psi.basis->state(k);
        sites.clear();
        while (w) {
            sites.push_back(n - 1 - std::countr_zero(w));
            w &= w - 1;
        }
        for (int a : sites) {
            d[a] += p;
            for (int b : sites) nn(a, b) += p;
        }
    }
    return nn - d * d.transpose();
}

// Distance-averaged correlations, entry d for distance d = 0..N-1.
inline Eigen::VectorXd g2_of_distance(const Eigen::MatrixXd& g2) {
    const int n = static_cast<int>(g2.rows());
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
    for (int d = 0; d < n; ++d) {
        double s = 0.0;
        for (int i = 0; i + d < n; ++i) s += g2(i, i + d);
        out[d] = s / (n - d);
    }
    return out;
}

// Bipartite entanglement entropy (nats) across the cut after site `cut`.
inline double half_chain_entropy(const StateVector& psi, int cut) {
    const int n = psi.n_atoms();
    if (cut < 1 || cut >= n) throw ValidationError("half_chain_entropy: cut must be in [1, N-1]");
    const bool constrained = psi.basis->constrained();
    const BasisSet left = BasisSet::enumerate(cut, constrained);
    const BasisSet right = BasisSet::enumerate(n - cut, constrained);
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(left.size(), right.size());
    const int rbits = n - cut;
    for (Eigen::Index k = 0; k < psi.amp.size(); ++k) {
        if (psi.amp[k] == std::complex<double>(0.0, 0.0)) continue;
        const ConfigWord w = psi.basis->state(k);
        const ConfigWord wl = w >> rbits;
        const ConfigWord wr = w & ((1ull << rbits) - 1ull);
        m(*left.index_of(wl), *right.index_of(wr)) = psi.amp[k];
    }
    const Eigen::VectorXd s = svd_values(std::move(m));
    double ent = 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        const double p = s[i] * s[i];
        if (p > 1e-16) ent -= p * std::log(p);
    }
    return ent;
}

// ---------- shots ----------

struct ShotSet {
    int n_atoms = 0;
    std::vector<ConfigWord> shots;

    std::size_t size() const { return shots.size(); }
};

inline ShotSet sample_shots(const StateVector& psi, std::size_t n_shots, Rng& rng) {
    const Eigen::Index dim = psi.amp.size();
    std::vector<double> cdf(dim);
    double acc = 0.0;
    for (Eigen::Index k = 0; k < dim; ++k) {
        acc += std::norm(psi.amp[k]);
        cdf[k] = acc;
    }
    ShotSet out;
    out.n_atoms = psi.n_atoms();
    out.shots.reserve(n_shots);
    for (std::size_t i = 0; i < n_shots; ++i) {
        const double u = rng.uniform() * acc;
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        const Eigen::Index k = std::min<Eigen::Index>(it - cdf.begin(), dim - 1);
        out.shots.push_back(psi.basis->state(k));
    }
    return out;
}

inline Eigen::VectorXd shot_site_densities(const ShotSet& shots) {
    if (shots.shots.empty()) throw ValidationError("shot_site_densities: empty shot set");
    const int n = shots.n_atoms;
    Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
    for (ConfigWord w : shots.shots)
        while (w) {
            d[n - 1 - std::countr_zero(w)] += 1.0;
            w &= w - 1;
        }
    return d / static_cast<double>(shots.size());
}

struct DwDistribution {
    Eigen::VectorXd p;        // index = wall count, 0..N+1
    std::size_t n_shots = 0;  // 0 marks an exact (non-sampled) distribution

    double mean() const {
        double m = 0.0;
        for (Eigen::Index k = 0; k < p.size(); ++k) m += k * p[k];
        return m;
    }
    double variance() const {
        double m = mean(), m2 = 0.0;
        for (Eigen::Index k = 0; k < p.size(); ++k) m2 += double(k) * k * p[k];
        return m2 - m * m;
    }
};

inline DwDistribution dw_histogram(const ShotSet& shots) {
    if (shots.shots.empty()) throw ValidationError("dw_histogram: empty shot set");
    DwDistribution d;
    d.p = Eigen::VectorXd::Zero(shots.n_atoms + 2);
    for (ConfigWord w : shots.shots) d.p[count_domain_walls(w, shots.n_atoms)] += 1.0;
    d.p /= static_cast<double>(shots.size());
    d.n_shots = shots.size();
    return d;
}

inline Eigen::MatrixXd g2_matrix(const ShotSet& shots) {
    if (shots.shots.empty()) throw ValidationError("g2_matrix: empty shot set");
    const int n = shots.n_atoms;
    Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
    Eigen::MatrixXd nn = Eigen::MatrixXd::Zero(n, n);
    std::vector<int> sites;
    for (ConfigWord w : shots.shots) {
        sites.clear();
        while (w) {
            sites.push_back(n - 1 - std::countr_zero(w));
            w &= w - 1;
        }
        for (int a : sites) {
            d[a] += 1.0;
            for (int b : sites) nn(a, b) += 1.0;
        }
    }
    const double m = static_cast<double>(shots.size());
    return nn / m - (d / m) * (d / m).transpose();
}

struct HistogramEntry {
    ConfigWord word;
    std::size_t count;
};

inline std::vector<HistogramEntry> state_histogram(const ShotSet& shots, std::size_t top_k) {
    std::unordered_map<ConfigWord, std::size_t> counts;
    for (ConfigWord w : shots.shots) ++counts[w];
    std::vector<HistogramEntry> all;
    all.reserve(counts.size());
    for (auto& [w, c] : counts) all.push_back({w, c});
    std::sort(all.begin(), all.end(), [](const HistogramEntry& a, const HistogramEntry& b) {
        return a.count != b.count ? a.count > b.count : a.word < b.word;
    });
    if (all.size() > top_k) all.resize(top_k);
    return all;
}

// ---------- fits ----------

struct CorrelationFit {
    double xi = 0.0;          // decay length, sites
    double amplitude = 0.0;   // |g2| extrapolated to d = 0
    double rms_residual = 0.0;
    bool alternating_sign = true;  // false flags model mismatch; fit still valid on |g2|
    int n_points = 0;
};

// Least-squares fit of |g2|(d) ~ A exp(-d/xi) on distances [1, d_max].
inline CorrelationFit fit_correlation_length(const Eigen::VectorXd& g2d, int d_max = 12,
                                             double noise_floor = 1e-9) {
    std::vector<double> ds, ls;
    bool alternating = true;
    const int d_hi = std::min<int>(d_max, static_cast<int>(g2d.size()) - 1);
    for (int d = 1; d <= d_hi; ++d) {
        if (std::abs(g2d[d]) <= noise_floor) continue;
        ds.push_back(d);
        ls.push_back(std::log(std::abs(g2d[d])));
        const int expect = (d % 2 == 1) ? -1 : +1;
        if (g2d[d] * expect < 0.0) alternating = false;
    }
    if (ds.size() < 4)
        throw NumericError("correlation fit: fewer than 4 usable distance points above the noise floor");
    const int n = static_cast<int>(ds.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        sx += ds[i];
        sy += ls[i];
        sxx += ds[i] * ds[i];
        sxy += ds[i] * ls[i];
    }
    const double denom = n * sxx - sx * sx;
    const double slope = (n * sxy - sx * sy) / denom;
    const double intercept = (sy - slope * sx) / n;
    if (slope >= 0.0)
        throw NumericError("correlation fit: correlations do not decay with distance");
    double ss = 0.0;
    for (int i = 0; i < n; ++i) {
        const double r = ls[i] - (intercept + slope * ds[i]);
        ss += r * r;
    }
    CorrelationFit fit;
    fit.xi = -1.0 / slope;
    fit.amplitude = std::exp(intercept);
    fit.rms_residual = std::sqrt(ss / n);
    fit.alternating_sign = alternating;
    fit.n_points = n;
    return fit;
}

struct OscillationFit {
    double period = 0.0;            // of the underlying revival cycle
    double angular_frequency = 0.0; // 2*pi / period
    double decay_time = std::numeric_limits<double>::infinity();
    std::vector<double> extrema_times, extrema_values;
    double mean_level = 0.0;
};

// Extrema of a sampled signal, parabolic-refined through each interior
// sign change of the discrete derivative.
inline void locate_extrema(const std::vector<double>& ts, const std::vector<double>& ys,
                           std::vector<double>& t_ext, std::vector<double>& y_ext) {
    t_ext.clear();
    y_ext.clear();
    const std::size_t n = ts.size();
    if (n != ys.size() || n < 3) throw ShapeError("locate_extrema: need matched series, length >= 3");
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double dl = ys[i] - ys[i - 1];
        const double dr = ys[i + 1] - ys[i];
        if (dl == 0.0 && dr == 0.0) continue;
        if ((dl > 0.0 && dr < 0.0) || (dl < 0.0 && dr > 0.0)) {
            // Vertex of the parabola through the three neighbouring samples.
            const double t0 = ts[i - 1], t1 = ts[i], t2 = ts[i + 1];
            const double y0 = ys[i - 1], y1 = ys[i], y2 = ys[i + 1];
            const double d01 = (y1 - y0) / (t1 - t0);
            const double d12 = (y2 - y1) / (t2 - t1);
            const double curv = (d12 - d01) / (t2 - t0);
            double tv = t1, yv = y1;
            if (curv != 0.0) {
                tv = 0.5 * (t0 + t1 - d01 / curv);
                const double a = curv, b = d01 - a * (t0 + t1);
                const double c = y0 - (a * t0 + b) * t0;
                yv = (a * tv + b) * tv + c;
            }
            t_ext.push_back(tv);
            y_ext.push_back(yv);
        }
    }
}

// Frequency of a crystal-revival signal.  The ordered and anti-ordered
// configurations both sit at domain-wall minima, so the measured trace runs
// through two extrema pairs per revival: successive like extrema are half a
// revival period apart, and the first three extrema span exactly half of one.
inline OscillationFit fit_revival_frequency(const std::vector<double>& ts,
                                            const std::vector<double>& ys) {
    OscillationFit fit;
    std::vector<double> te, ye;
    locate_extrema(ts, ys, te, ye);
    if (te.size() < 3)
        throw NumericError("revival fit: fewer than three extrema in the signal");
    fit.extrema_times = te;
    fit.extrema_values = ye;
    fit.period = 2.0 * (te[2] - te[0]);
    fit.angular_frequency = two_pi / fit.period;
    double mean = 0.0;
    for (double y : ys) mean += y;
    mean /= static_cast<double>(ys.size());
    fit.mean_level = mean;
    // Envelope decay from extremum deviations about the mean level.
    std::vector<double> lt, lv;
    for (std::size_t k = 0; k < te.size(); ++k) {
        const double dev = std::abs(ye[k] - mean);
        if (dev > 1e-12) {
            lt.push_back(te[k]);
            lv.push_back(std::log(dev));
        }
    }
    if (lt.size() >= 3) {
        const int n = static_cast<int>(lt.size());
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (int i = 0; i < n; ++i) {
            sx += lt[i];
            sy += lv[i];
            sxx += lt[i] * lt[i];
            sxy += lt[i] * lv[i];
        }
        const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        if (slope < -1e-12) fit.decay_time = -1.0 / slope;
    }
    return fit;
}

// Plain signal frequency (first three extrema span one full period).
inline OscillationFit fit_signal_frequency(const std::vector<double>& ts,
                                           const std::vector<double>& ys) {
    OscillationFit fit = fit_revival_frequency(ts, ys);
    fit.period *= 0.5;
    fit.angular_frequency *= 2.0;
    return fit;
}

}  // namespace rydsim
