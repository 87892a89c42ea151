#pragma once

// Readout-error modelling: the per-site confusion channel, wall-count
// response matrices, bootstrap uncertainties, maximum-likelihood
// recovery of the parent wall distribution, and the closed-form
// correction of a measured crystal probability.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "basis.hpp"
#include "errors.hpp"
#include "observables.hpp"
#include "rng.hpp"

namespace rydsim {

// Independent per-site readout: a ground atom reads out as ground with
// probability f_g, a Rydberg atom as Rydberg with probability f_r.
struct DetectionModel {
    double f_g;
    double f_r;

    DetectionModel(double f_g_, double f_r_) : f_g(f_g_), f_r(f_r_) {
        if (!(f_g > 0.5 && f_g <= 1.0) || !(f_r > 0.5 && f_r <= 1.0))
            throw ValidationError("DetectionModel: fidelities must lie in (0.5, 1]");
    }

    // probability of reading `o` when the atom is in `t`
    double confusion(int t, int o) const {
        if (t == 0) return o == 0 ? f_g : 1.0 - f_g;
        return o == 1 ? f_r : 1.0 - f_r;
    }
};

// ---------- channel ----------

inline ConfigWord apply_channel(ConfigWord w, int n_atoms, const DetectionModel& dm,
                                Rng& rng) {
    ConfigWord out = 0;
    for (int i = 1; i <= n_atoms; ++i) {
        const int t = config_bit(w, n_atoms, i);
        const double p_flip = t ? 1.0 - dm.f_r : 1.0 - dm.f_g;
        const int o = rng.bernoulli(p_flip) ? 1 - t : t;
        out = (out << 1) | ConfigWord(o);
    }
    return out;
}

inline ShotSet apply_channel(const ShotSet& in, const DetectionModel& dm,
                             std::uint64_t seed) {
    Rng rng = substream(seed, "detection channel");
    ShotSet out;
    out.n_atoms = in.n_atoms;
    out.shots.reserve(in.shots.size());
    for (ConfigWord w : in.shots) out.shots.push_back(apply_channel(w, in.n_atoms, dm, rng));
    return out;
}

// Exact wall-count distribution of the channel output for one true
// configuration, by dynamic programming over (previous observed bit,
// walls so far).
inline Eigen::VectorXd channel_wall_distribution(ConfigWord w, int n_atoms,
                                                 const DetectionModel& dm) {
    const int nc = n_atoms + 2;
    Eigen::MatrixXd dp = Eigen::MatrixXd::Zero(2, nc);
    {
        const int t = config_bit(w, n_atoms, 1);
        for (int o = 0; o < 2; ++o) dp(o, 1 - o) += dm.confusion(t, o);
    }
    Eigen::MatrixXd next(2, nc);
    for (int i = 2; i <= n_atoms; ++i) {
        const int t = config_bit(w, n_atoms, i);
        next.setZero();
        for (int prev = 0; prev < 2; ++prev)
            for (int c = 0; c < nc - 1; ++c) {
                if (dp(prev, c) == 0.0) continue;
                for (int o = 0; o < 2; ++o)
                    next(o, c + (o == prev ? 1 : 0)) += dp(prev, c) * dm.confusion(t, o);
            }
        dp.swap(next);
    }
    Eigen::VectorXd out = Eigen::VectorXd::Zero(nc);
    for (int prev = 0; prev < 2; ++prev)
        for (int c = 0; c < nc; ++c) {
            const int k = c + (1 - prev);
            if (dp(prev, c) != 0.0) out[k] += dp(prev, c);
        }
    return out;
}

// ---------- representative wall configurations ----------

// The reconstruction ensemble: all configurations with exactly l walls
// in which every defect is isolated (no three consecutive equal sites).
// Such a chain is a sequence of alternating runs of length 1 or 2, so a
// class is fixed by the first state and the run count r, holding
// C(r, n - r) members (choose which runs have length 2).

namespace detail {

inline bool has_triple(ConfigWord w, int n_atoms) {
    const ConfigWord mask = (n_atoms >= 64) ? ~ConfigWord(0) : ((ConfigWord(1) << n_atoms) - 1);
    const ConfigWord ones = w & mask;
    const ConfigWord zeros = ~w & mask;
    return ((ones & (ones >> 1) & (ones >> 2)) != 0) ||
           ((zeros & (zeros >> 1) & (zeros >> 2)) != 0);
}

inline double binom(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    k = std::min(k, n - k);
    double b = 1.0;
    for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
    return b;
}

struct RunClass {
    int first_state;  // state of the leading run
    int n_runs;
    double weight;  // number of member configurations
};

// walls carried by a (first_state, n_runs) class on n sites
inline int class_walls(int n_sites, int first_state, int n_runs) {
    const int last_state = first_state ^ ((n_runs - 1) & 1);
    return (n_sites - n_runs) + (1 - first_state) + (1 - last_state);
}

inline std::vector<RunClass> wall_classes(int n_atoms, int n_walls) {
    std::vector<RunClass> out;
    for (int r = (n_atoms + 1) / 2; r <= n_atoms; ++r)
        for (int s = 0; s < 2; ++s)
            if (class_walls(n_atoms, s, r) == n_walls)
                out.push_back({s, r, binom(r, n_atoms - r)});
    return out;
}

inline ConfigWord config_from_runs(int first_state, const std::vector<char>& two_run) {
    ConfigWord w = 0;
    for (std::size_t i = 0; i < two_run.size(); ++i) {
        const ConfigWord s = ConfigWord(first_state ^ (int(i) & 1));
        w = (w << 1) | s;
        if (two_run[i]) w = (w << 1) | s;
    }
    return w;
}

}  // namespace detail

// Uniform sample from the representative ensemble.
inline ConfigWord sample_wall_config(int n_atoms, int n_walls, Rng& rng) {
    const std::vector<detail::RunClass> classes = detail::wall_classes(n_atoms, n_walls);
    if (classes.empty())
        throw ShapeError("sample_wall_config: no configuration of " +
                         std::to_string(n_atoms) + " atoms carries " +
                         std::to_string(n_walls) + " isolated walls");
    double total = 0.0;
    for (const auto& c : classes) total += c.weight;
    double u = rng.uniform() * total;
    const detail::RunClass* pick = &classes.back();
    for (const auto& c : classes) {
        if (u < c.weight) {
            pick = &c;
            break;
        }
        u -= c.weight;
    }
    const int r = pick->n_runs, m = n_atoms - r;
    // Floyd's uniform m-subset of the r runs
    std::vector<char> two_run(r, 0);
    for (int j = r - m; j < r; ++j) {
        const int t = int(rng.index(std::uint64_t(j) + 1));
        if (two_run[t])
            two_run[j] = 1;
        else
            two_run[t] = 1;
    }
    return detail::config_from_runs(pick->first_state, two_run);
}

// All representative configurations (filter scan; meant for small N).
inline std::vector<ConfigWord> enumerate_wall_configs(int n_atoms, int n_walls) {
    if (n_atoms > 24)
        throw ResourceError("enumerate_wall_configs: exhaustive scan limited to 24 atoms");
    std::vector<ConfigWord> out;
    for (ConfigWord w = 0; w < (ConfigWord(1) << n_atoms); ++w)
        if (count_domain_walls(w, n_atoms) == n_walls && !detail::has_triple(w, n_atoms))
            out.push_back(w);
    return out;
}

// ---------- response matrix ----------

// m(row, col) = p(observed walls = observed_counts[row] | the chain held
// initial_counts[col] walls), averaged over the representative ensemble.
struct ResponseMatrix {
    int n_atoms = 0;
    std::vector<int> observed_counts;  // row labels, full parity range
    std::vector<int> initial_counts;   // column labels, feasible counts
    Eigen::MatrixXd m;
    std::string method;     // "exact" or "monte_carlo"
    long n_samples = 0;     // per column; 0 for exact
};

namespace detail {

inline std::vector<int> parity_counts(int n_atoms) {
    std::vector<int> out;
    for (int k = (n_atoms - 1) % 2; k <= n_atoms + 1; k += 2) out.push_back(k);
    return out;
}

inline std::vector<int> feasible_counts(int n_atoms, int max_initial_walls) {
    std::vector<int> all;
    for (int l : parity_counts(n_atoms))
        if (!wall_classes(n_atoms, l).empty()) all.push_back(l);
    if (max_initial_walls < 0) return all;
    if (std::find(all.begin(), all.end(), max_initial_walls) == all.end())
        throw ShapeError("response matrix: no configuration of " + std::to_string(n_atoms) +
                         " atoms carries " + std::to_string(max_initial_walls) +
                         " isolated walls");
    std::vector<int> out;
    for (int l : all)
        if (l <= max_initial_walls) out.push_back(l);
    return out;
}

}  // namespace detail

inline ResponseMatrix build_response_matrix_exact(int n_atoms, const DetectionModel& dm,
                                                  int max_initial_walls = -1) {
    if (n_atoms > 14)
        throw ValidationError("response matrix: exact enumeration limited to 14 atoms");
    ResponseMatrix rm;
    rm.n_atoms = n_atoms;
    rm.observed_counts = detail::parity_counts(n_atoms);
    rm.initial_counts = detail::feasible_counts(n_atoms, max_initial_walls);
    rm.method = "exact";
    rm.m.resize(rm.observed_counts.size(), rm.initial_counts.size());
    for (std::size_t col = 0; col < rm.initial_counts.size(); ++col) {
        const std::vector<ConfigWord> members =
            enumerate_wall_configs(n_atoms, rm.initial_counts[col]);
        Eigen::VectorXd dist = Eigen::VectorXd::Zero(n_atoms + 2);
        for (ConfigWord w : members) dist += channel_wall_distribution(w, n_atoms, dm);
        dist /= double(members.size());
        for (std::size_t row = 0; row < rm.observed_counts.size(); ++row)
            rm.m(row, col) = dist[rm.observed_counts[row]];
    }
    return rm;
}

inline ResponseMatrix build_response_matrix_mc(int n_atoms, const DetectionModel& dm,
                                               long samples, std::uint64_t seed,
                                               int max_initial_walls = -1) {
    if (samples < 1) throw ValidationError("response matrix: need at least one sample");
    ResponseMatrix rm;
    rm.n_atoms = n_atoms;
    rm.observed_counts = detail::parity_counts(n_atoms);
    rm.initial_counts = detail::feasible_counts(n_atoms, max_initial_walls);
    rm.method = "monte_carlo";
    rm.n_samples = samples;
    rm.m.resize(rm.observed_counts.size(), rm.initial_counts.size());
    for (std::size_t col = 0; col < rm.initial_counts.size(); ++col) {
        const int l = rm.initial_counts[col];
        Rng rng = substream(seed, "response column " + std::to_string(l));
        Eigen::VectorXd hist = Eigen::VectorXd::Zero(n_atoms + 2);
        for (long s = 0; s < samples; ++s) {
            const ConfigWord w = sample_wall_config(n_atoms, l, rng);
            const ConfigWord o = apply_channel(w, n_atoms, dm, rng);
            hist[count_domain_walls(o, n_atoms)] += 1.0;
        }
        hist /= double(samples);
        for (std::size_t row = 0; row < rm.observed_counts.size(); ++row)
            rm.m(row, col) = hist[rm.observed_counts[row]];
    }
    return rm;
}

// ---------- bootstrap ----------

// 68% central-interval half-widths of each bin under multinomial
// resampling at n_shots per resample.
inline Eigen::VectorXd bootstrap_sigma(const DwDistribution& observed, long n_shots,
                                       int n_resamples, std::uint64_t seed) {
    if (n_shots < 1) throw ValidationError("bootstrap_sigma: need n_shots >= 1");
    if (n_resamples < 2) throw ValidationError("bootstrap_sigma: need at least 2 resamples");
    const int bins = int(observed.p.size());
    std::vector<double> cdf(bins);
    double acc = 0.0;
    for (int k = 0; k < bins; ++k) {
        acc += observed.p[k];
        cdf[k] = acc;
    }
    if (std::abs(acc - 1.0) > 1e-6)
        throw ValidationError("bootstrap_sigma: distribution does not sum to one");
    Rng rng = substream(seed, "bootstrap");
    Eigen::MatrixXd draws(n_resamples, bins);
    std::vector<double> counts(bins);
    for (int r = 0; r < n_resamples; ++r) {
        std::fill(counts.begin(), counts.end(), 0.0);
        for (long s = 0; s < n_shots; ++s) {
            const double u = rng.uniform() * acc;
            const int k =
                int(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
            counts[std::min(k, bins - 1)] += 1.0;
        }
        for (int k = 0; k < bins; ++k) draws(r, k) = counts[k] / double(n_shots);
    }
    const auto quantile = [&](std::vector<double>& v, double q) {
        const double pos = q * (v.size() - 1);
        const std::size_t lo = std::size_t(pos);
        const double frac = pos - double(lo);
        if (lo + 1 >= v.size()) return v.back();
        return v[lo] + frac * (v[lo + 1] - v[lo]);
    };
    Eigen::VectorXd sigma(bins);
    std::vector<double> col(n_resamples);
    for (int k = 0; k < bins; ++k) {
        for (int r = 0; r < n_resamples; ++r) col[r] = draws(r, k);
        std::sort(col.begin(), col.end());
        sigma[k] = 0.5 * (quantile(col, 0.84) - quantile(col, 0.16));
    }
    return sigma;
}

// ---------- parent reconstruction ----------

namespace detail {

inline Eigen::VectorXd project_simplex(const Eigen::VectorXd& v) {
    const int n = int(v.size());
    std::vector<double> u(v.data(), v.data() + n);
    std::sort(u.begin(), u.end(), std::greater<double>());
    double css = 0.0, tau = 0.0;
    for (int j = 0; j < n; ++j) {
        css += u[j];
        const double t = (css - 1.0) / (j + 1);
        if (u[j] - t > 0.0) tau = t;
    }
    return (v.array() - tau).cwiseMax(0.0);
}

}  // namespace detail

struct Reconstruction {
    DwDistribution parent;  // full-length, zeros off the column support
    double cost = 0.0;
    bool restarts_agree = true;
    double max_tv_spread = 0.0;
    std::vector<Eigen::VectorXd> restart_parents;  // reduced to column support
    std::vector<double> restart_costs;
};

// Weighted least squares over the probability simplex: minimize
// sum_k ((W_o - M P)_k / sigma_k)^2 by accelerated projected gradient,
// keeping the best of n_restarts random starts.
inline Reconstruction reconstruct_parent(const DwDistribution& observed,
                                         const Eigen::VectorXd& sigma,
                                         const ResponseMatrix& rm, int n_restarts,
                                         std::uint64_t seed) {
    const int full = rm.n_atoms + 2;
    if (int(observed.p.size()) != full || int(sigma.size()) != full)
        throw ShapeError("reconstruct_parent: distribution and sigma must span counts 0..N+1");
    if (n_restarts < 1) throw ValidationError("reconstruct_parent: need at least one restart");
    const int rows = int(rm.observed_counts.size());
    const int cols = int(rm.initial_counts.size());
    Eigen::VectorXd wo(rows), sg(rows);
    for (int k = 0; k < rows; ++k) {
        wo[k] = observed.p[rm.observed_counts[k]];
        sg[k] = sigma[rm.observed_counts[k]];
        if (observed.n_shots > 0)
            sg[k] = std::max(sg[k], 0.5 / double(observed.n_shots));
        if (!(sg[k] > 0.0))
            throw ValidationError(
                "reconstruct_parent: sigma must be positive (supply shot count for the floor)");
    }
    const Eigen::MatrixXd b_mat = sg.cwiseInverse().asDiagonal() * rm.m;
    const Eigen::VectorXd b_vec = wo.cwiseQuotient(sg);
    const Eigen::MatrixXd h = b_mat.transpose() * b_mat;
    const Eigen::VectorXd c = b_mat.transpose() * b_vec;
    const double lip =
        2.0 * Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(h).eigenvalues().maxCoeff();
    if (!(lip > 0.0)) throw NumericError("reconstruct_parent: degenerate response matrix");
    const double step = 1.0 / lip;
    const auto cost_of = [&](const Eigen::VectorXd& p) {
        return (b_vec - b_mat * p).squaredNorm();
    };

    Rng rng = substream(seed, "parent reconstruction");
    Reconstruction out;
    out.restart_parents.reserve(n_restarts);
    out.restart_costs.reserve(n_restarts);
    for (int rs = 0; rs < n_restarts; ++rs) {
        Eigen::VectorXd x(cols);
        for (int i = 0; i < cols; ++i) x[i] = rng.exponential();
        x /= x.sum();
        Eigen::VectorXd y = x;
        double t = 1.0, fx = cost_of(x);
        for (int it = 0; it < 20000; ++it) {
            const Eigen::VectorXd grad = 2.0 * (h * y - c);
            Eigen::VectorXd xn = detail::project_simplex(y - step * grad);
            double fn = cost_of(xn);
            if (fn > fx) {  // momentum overshoot: restart from the last iterate
                y = x;
                t = 1.0;
                xn = detail::project_simplex(y - step * (2.0 * (h * y - c)));
                fn = cost_of(xn);
            }
            const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
            const Eigen::VectorXd diff = xn - x;
            y = xn + ((t - 1.0) / tn) * diff;
            t = tn;
            const bool settled = diff.cwiseAbs().maxCoeff() < 1e-15;
            x = std::move(xn);
            fx = fn;
            if (settled) break;
        }
        out.restart_parents.push_back(x);
        out.restart_costs.push_back(fx);
    }
    int best = 0;
    for (int rs = 1; rs < n_restarts; ++rs)
        if (out.restart_costs[rs] < out.restart_costs[best]) best = rs;
    for (int rs = 0; rs < n_restarts; ++rs) {
        const double tv =
            0.5 * (out.restart_parents[rs] - out.restart_parents[best]).lpNorm<1>();
        out.max_tv_spread = std::max(out.max_tv_spread, tv);
    }
    out.restarts_agree = out.max_tv_spread <= 1e-3;
    out.cost = out.restart_costs[best];
    out.parent.p = Eigen::VectorXd::Zero(full);
    for (int i = 0; i < cols; ++i)
        out.parent.p[rm.initial_counts[i]] = out.restart_parents[best][i];
    out.parent.n_shots = 0;
    return out;
}

// ---------- crystal-probability correction ----------

struct CorrectedProb {
    double value = 0.0;
    bool clipped = false;
};

// Detecting the perfect crystal requires every one of the (N+1)/2
// Rydberg and (N-1)/2 ground atoms to read out correctly.
inline CorrectedProb correct_ground_state_prob(double p_exp, int n_atoms,
                                               const DetectionModel& dm) {
    if (n_atoms < 1 || n_atoms % 2 == 0)
        throw ValidationError("correct_ground_state_prob: crystal convention needs odd N");
    if (!(p_exp >= 0.0 && p_exp <= 1.0))
        throw ValidationError("correct_ground_state_prob: probability outside [0, 1]");
    const double p_detect = std::pow(dm.f_r, (n_atoms + 1) / 2) *
                            std::pow(dm.f_g, (n_atoms - 1) / 2);
    CorrectedProb out;
    out.value = p_exp / p_detect;
    if (out.value > 1.0) {
        out.value = 1.0;
        out.clipped = true;
    }
    return out;
}

}  // namespace rydsim
