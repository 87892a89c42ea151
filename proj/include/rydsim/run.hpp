#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "rydsim/atom_array.hpp"
#include "rydsim/basis.hpp"
#include "rydsim/config.hpp"
#include "rydsim/detection.hpp"
#include "rydsim/errors.hpp"
#include "rydsim/fft.hpp"
#include "rydsim/hamiltonian.hpp"
#include "rydsim/io.hpp"
#include "rydsim/mps.hpp"
#include "rydsim/observables.hpp"
#include "rydsim/propagate.hpp"
#include "rydsim/pulse.hpp"
#include "rydsim/rng.hpp"
#include "rydsim/tebd.hpp"
#include "rydsim/thermal.hpp"
#include "rydsim/units.hpp"
#include "rydsim/variational.hpp"
#include "rydsim/version.hpp"

namespace rydsim {

// Orchestration: turn a validated ExperimentConfig into output files.  All
// file contents are built in memory first and written together at the end, so
// a failing run leaves no partial outputs.  Every stochastic component draws
// from a named substream of the single root seed.

struct RunArtifacts {
    nlohmann::json summary;
    std::vector<std::filesystem::path> files;
};

namespace detail {

inline PulseSchedule schedule_from_config(const ScheduleConfig& s) {
    const double w0 = mhz_to_rad_us(s.omega_mhz);
    if (s.type == "constant")
        return PulseSchedule::constant(w0, mhz_to_rad_us(s.delta_mhz), s.duration_us);
    PulseSchedule ramp =
        s.type == "cubic"
            ? PulseSchedule::cubic_sweep(w0, mhz_to_rad_us(s.a), mhz_to_rad_us(s.b),
                                         mhz_to_rad_us(s.c), s.t0_us,
                                         mhz_to_rad_us(s.delta_min_mhz),
                                         mhz_to_rad_us(s.delta_max_mhz), s.duration_us)
            // the tangent rate b is 1/us, not an energy: only a and c scale
            : PulseSchedule::tangent_sweep(w0, mhz_to_rad_us(s.a), s.b, mhz_to_rad_us(s.c),
                                           s.t0_us, mhz_to_rad_us(s.delta_min_mhz),
                                           mhz_to_rad_us(s.delta_max_mhz), s.duration_us);
    return s.hold_us > 0.0 ? PulseSchedule::quench(ramp, s.hold_us) : ramp;
}

inline AtomArray array_from_config(const ModelConfig& m) {
    return AtomArray::uniform_chain(
        m.n_atoms, m.spacing_um,
        AtomArray::c6_from_nn(mhz_to_rad_us(m.v_nn_mhz), m.spacing_um));
}

inline HamiltonianMode mode_from_backend(Backend b) {
    switch (b) {
        case Backend::exact_full: return HamiltonianMode::full;
        case Backend::exact_constrained: return HamiltonianMode::constrained_nn;
        case Backend::constrained_with_tail: return HamiltonianMode::constrained_with_tail;
        case Backend::mps: break;
    }
    throw ValidationError("no exact Hamiltonian mode for the mps backend");
}

inline std::string shots_to_text(const ShotSet& s) {
    std::string out;
    out.reserve(s.shots.size() * (s.n_atoms + 1));
    for (ConfigWord w : s.shots) {
        out += config_to_string(w, s.n_atoms);
        out += '\n';
    }
    return out;
}

inline nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
    nlohmann::json a = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

// Pending output files: content is assembled up front, written only when the
// whole run has succeeded.
class OutputBatch {
public:
    explicit OutputBatch(std::filesystem::path dir) : dir_(std::move(dir)) {}

    void add(const std::string& name, std::string content) {
        names_.push_back(name);
        contents_.push_back(std::move(content));
    }
    const std::vector<std::string>& names() const { return names_; }

    std::vector<std::filesystem::path> write_all() const {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec && !std::filesystem::is_directory(dir_))
            throw ResourceError("cannot create output directory " + dir_.string());
        std::vector<std::filesystem::path> files;
        for (std::size_t i = 0; i < names_.size(); ++i) {
            const auto p = dir_ / names_[i];
            write_text_file(p, contents_[i]);
            files.push_back(p);
        }
        return files;
    }

private:
    std::filesystem::path dir_;
    std::vector<std::string> names_;
    std::vector<std::string> contents_;
};

// ---------- rabi ----------

inline nlohmann::json run_rabi(const ExperimentConfig& cfg, OutputBatch& out) {
    const int n_max = cfg.model.n_atoms;
    if (n_max > 8)
        throw ResourceError("rabi: ladder of chains is meant for small N, requested " +
                            std::to_string(n_max));
    const PulseSchedule sched = schedule_from_config(cfg.schedule);
    const auto sample_times =
        uniform_sample_times(cfg.schedule.duration_us, cfg.numerics.sample_dt_us);
    PropagateOptions popt;
    popt.dt_us = cfg.numerics.dt_us;
    popt.krylov.m_max = cfg.numerics.krylov_dim;

    std::vector<std::string> cols = {"t_us"};
    for (int k = 1; k <= n_max; ++k) {
        cols.push_back("p_ground_n" + std::to_string(k));
        cols.push_back("p_multi_n" + std::to_string(k));
    }
    const std::size_t n_rows = sample_times.size() + 1;
    std::vector<std::vector<double>> rows(n_rows, std::vector<double>(cols.size(), 0.0));
    rows[0][0] = 0.0;
    for (std::size_t i = 0; i < sample_times.size(); ++i) rows[i + 1][0] = sample_times[i];

    nlohmann::json metrics;
    double freq_n1 = 0.0;
    for (int k = 1; k <= n_max; ++k) {
        const AtomArray arr = AtomArray::uniform_chain(
            k, cfg.model.spacing_um,
            AtomArray::c6_from_nn(mhz_to_rad_us(cfg.model.v_nn_mhz), cfg.model.spacing_um));
        const bool constrained = cfg.backend != Backend::exact_full;
        const BasisSet basis = BasisSet::enumerate(k, constrained);
        const HamiltonianOperator ham(arr, mode_from_backend(cfg.backend), basis);
        StateVector psi = state_from_config(basis, 0);
        std::size_t row = 0;
        std::vector<double> p_ground;
        p_ground.reserve(n_rows);
        run_schedule(ham, sched, psi, popt, sample_times, [&](double, const StateVector& s) {
            rows[row][1 + 2 * (k - 1)] = prob_ground_config(s);
            rows[row][2 + 2 * (k - 1)] = prob_multi_excitation(s);
            p_ground.push_back(prob_ground_config(s));
            ++row;
        });
        const double w = fft_peak_frequency(sample_times.front(), p_ground);
        const double f_mhz = rad_us_to_mhz(w);
        metrics["fft_freq_mhz_n" + std::to_string(k)] = f_mhz;
        if (k == 1) freq_n1 = f_mhz;
        else if (freq_n1 > 0.0)
            metrics["collective_enhancement_n" + std::to_string(k)] = f_mhz / freq_n1;
    }

    CsvWriter csv(cols);
    for (const auto& r : rows) csv.add_row(r);
    out.add(cfg.output.trajectory_csv, csv.str());
    return metrics;
}

// ---------- sweep / quench ----------

struct OverlaySeries {
    bool active = false;
    std::vector<AnsatzAngles> angles;  // on its own fine tau grid
    double omega = 0.0;

    // linear interpolation on the integration grid
    AnsatzAngles at(double t_us) const {
        const double tau = omega * t_us;
        const double h = angles[1].tau;
        const double x = std::clamp(tau / h, 0.0, double(angles.size() - 1));
        const std::size_t i = std::min<std::size_t>(std::size_t(x), angles.size() - 2);
        const double f = x - double(i);
        return {tau, (1.0 - f) * angles[i].theta_a + f * angles[i + 1].theta_a,
                (1.0 - f) * angles[i].theta_b + f * angles[i + 1].theta_b};
    }
};

inline void append_overlay_columns(std::vector<std::string>& cols) {
    for (const char* c : {"model_theta_a", "model_theta_b", "model_density_odd",
                          "model_density_even", "model_dw_density", "dimer_p_rg", "dimer_p_gg",
                          "dimer_p_gr"})
        cols.push_back(c);
}

inline void append_overlay_values(const OverlaySeries& ov, double t_us, double omega_rad,
                                  std::vector<double>& row) {
    const AnsatzAngles a = ov.at(t_us);
    const AnsatzObservables obs = ansatz_observables(a.theta_a, a.theta_b);
    const DimerState d = dimer_populations(t_us, omega_rad);
    row.push_back(a.theta_a);
    row.push_back(a.theta_b);
    row.push_back(obs.density_odd);
    row.push_back(obs.density_even);
    row.push_back(obs.dw_density);
    row.push_back(d.p_rg);
    row.push_back(d.p_gg);
    row.push_back(d.p_gr);
}

inline OverlaySeries make_overlay(const ExperimentConfig& cfg) {
    OverlaySeries ov;
    if (!cfg.schedule.variational_overlay) return ov;
    ov.active = true;
    ov.omega = mhz_to_rad_us(cfg.schedule.omega_mhz);
    if (!(ov.omega > 0.0))
        throw ValidationError("variational_overlay needs a nonzero drive");
    // tau step 0.002 keeps the integration clear of the secant poles the
    // trajectory brushes at each crystal inversion
    const double dt = 0.002 / ov.omega;
    ov.angles = integrate_eom(std::numbers::pi / 2.0, 0.0, ov.omega,
                              std::max(cfg.schedule.duration_us, 2.0 * dt), dt);
    return ov;
}

inline nlohmann::json run_dynamics_exact(const ExperimentConfig& cfg, OutputBatch& out) {
    const int n = cfg.model.n_atoms;
    const AtomArray arr = array_from_config(cfg.model);
    const HamiltonianMode mode = mode_from_backend(cfg.backend);
    const BasisSet basis = BasisSet::enumerate(n, mode_is_constrained(mode));
    const HamiltonianOperator ham(arr, mode, basis);
    const PulseSchedule sched = schedule_from_config(cfg.schedule);
    const ConfigWord w0 = (cfg.kind == ExperimentKind::quench && cfg.schedule.initial == "crystal")
                              ? crystal_word(n)
                              : 0;
    StateVector psi = state_from_config(basis, w0);
    const auto sample_times = uniform_sample_times(sched.duration_us(), cfg.numerics.sample_dt_us);
    PropagateOptions popt;
    popt.dt_us = cfg.numerics.dt_us;
    popt.krylov.m_max = cfg.numerics.krylov_dim;

    const int auto_cap = mode == HamiltonianMode::full ? 16 : 25;
    const bool with_entropy = cfg.numerics.entropy == 1 ||
                              (cfg.numerics.entropy == -1 && n >= 2 && n <= auto_cap);
    const OverlaySeries overlay = make_overlay(cfg);
    const ConfigWord z2 = crystal_word(n);

    std::vector<std::string> cols = {"t_us",   "omega_mhz",  "delta_mhz", "dw_mean",
                                     "dw_var", "dw_density", "p_z2"};
    if (with_entropy) cols.push_back("entropy_half_nats");
    for (int s = 1; s <= n; ++s) cols.push_back("n_" + std::to_string(s));
    if (overlay.active) append_overlay_columns(cols);

    CsvWriter csv(cols);
    std::vector<double> ts_list, dw_list;
    run_schedule(ham, sched, psi, popt, sample_times, [&](double t, const StateVector& s) {
        const DwMoments dw = dw_moments(s);
        std::vector<double> row = {t,
                                   rad_us_to_mhz(sched.omega(t)),
                                   rad_us_to_mhz(sched.delta(t)),
                                   dw.mean,
                                   dw.variance,
                                   dw.density,
                                   prob_of_config(s, z2)};
        if (with_entropy) row.push_back(n >= 2 ? half_chain_entropy(s, n / 2) : 0.0);
        const Eigen::VectorXd dens = site_densities(s);
        for (int k = 0; k < n; ++k) row.push_back(dens[k]);
        if (overlay.active) append_overlay_values(overlay, t, overlay.omega, row);
        csv.add_row(row);
        ts_list.push_back(t);
        dw_list.push_back(dw.density);
    });

    nlohmann::json metrics;
    metrics["final_dw_mean"] = csv.rows().back()[3];
    metrics["final_dw_density"] = csv.rows().back()[5];
    metrics["final_p_z2"] = csv.rows().back()[6];
    if (cfg.kind == ExperimentKind::quench && cfg.schedule.initial == "crystal") {
        try {
            const OscillationFit fit = fit_revival_frequency(ts_list, dw_list);
            metrics["oscillation"] = {
                {"angular_frequency_rad_us", fit.angular_frequency},
                {"period_us", fit.period},
                {"decay_time_us", std::isfinite(fit.decay_time) ? fit.decay_time : -1.0},
                {"omega_over_frequency",
                 mhz_to_rad_us(cfg.schedule.omega_mhz) / fit.angular_frequency}};
        } catch (const NumericError& e) {
            metrics["oscillation_fit_error"] = e.what();
        }
    }

    out.add(cfg.output.trajectory_csv, csv.str());
    if (cfg.sampling.n_shots > 0) {
        Rng rng = substream(cfg.sampling.seed, "shot sampling");
        ShotSet shots = sample_shots(psi, std::size_t(cfg.sampling.n_shots), rng);
        if (cfg.detection.present) {
            const DetectionModel dm(cfg.detection.f_g, cfg.detection.f_r);
            shots = apply_channel(shots, dm, cfg.sampling.seed);
        }
        const DwDistribution hist = dw_histogram(shots);
        metrics["shots_mean_dw"] = hist.mean();
        out.add(cfg.output.shots_file, shots_to_text(shots));
    }
    return metrics;
}

inline nlohmann::json run_dynamics_mps(const ExperimentConfig& cfg, OutputBatch& out) {
    const int n = cfg.model.n_atoms;
    const AtomArray arr = array_from_config(cfg.model);
    const PulseSchedule sched = schedule_from_config(cfg.schedule);
    const ConfigWord w0 = (cfg.kind == ExperimentKind::quench && cfg.schedule.initial == "crystal")
                              ? crystal_word(n)
                              : 0;
    MpsState m = mps_from_product(n, w0);
    const MpsState z2 = mps_from_product(n, crystal_word(n));
    const auto sample_times = uniform_sample_times(sched.duration_us(), cfg.numerics.sample_dt_us);

    TebdOptions topt;
    topt.dt_us = cfg.numerics.dt_us;
    topt.d_max = cfg.numerics.d_max;
    topt.trunc_eps = cfg.numerics.trunc_eps;
    topt.step_trunc_ceiling = cfg.numerics.step_trunc_ceiling;

    std::vector<int> cuts = cfg.numerics.entropy_cuts;
    if (cuts.empty() && n >= 2) cuts = {n / 4, n / 2, (3 * n) / 4};
    std::set<int> cut_set;
    for (int c : cuts) {
        if (c < 1 || c >= n)
            throw ValidationError("numerics.entropy_cuts: cut " + std::to_string(c) +
                                  " outside [1, " + std::to_string(n - 1) + "]");
        cut_set.insert(c);
    }
    cuts.assign(cut_set.begin(), cut_set.end());

    const OverlaySeries overlay = make_overlay(cfg);
    std::vector<std::string> cols = {"t_us",   "omega_mhz",  "delta_mhz", "dw_mean",
                                     "dw_var", "dw_density", "p_z2",      "bond_dim_max"};
    for (int c : cuts) cols.push_back("S_cut" + std::to_string(c) + "_nats");
    for (int s = 1; s <= n; ++s) cols.push_back("n_" + std::to_string(s));
    if (overlay.active) append_overlay_columns(cols);

    CsvWriter csv(cols);
    std::vector<double> ts_list, dw_list;
    const TebdRunInfo info = tebd_run(
        m, arr, sched, topt, sample_times, [&](double t, MpsState& s, const TebdRunInfo&) {
            const WallMoments wm = wall_moments(s);
            std::vector<double> row = {t,
                                       rad_us_to_mhz(sched.omega(t)),
                                       rad_us_to_mhz(sched.delta(t)),
                                       wm.mean,
                                       wm.variance,
                                       wm.mean / (n + 1),
                                       std::norm(mps_overlap(z2, s)),
                                       double(s.max_bond_dim())};
            for (int c : cuts) row.push_back(entanglement_entropy(s, c));
            const Eigen::VectorXd dens = mps_site_densities(s);
            for (int k = 0; k < n; ++k) row.push_back(dens[k]);
            if (overlay.active) append_overlay_values(overlay, t, overlay.omega, row);
            csv.add_row(row);
            ts_list.push_back(t);
            dw_list.push_back(wm.mean / (n + 1));
        });

    nlohmann::json metrics;
    metrics["final_dw_mean"] = csv.rows().back()[3];
    metrics["final_dw_density"] = csv.rows().back()[5];
    metrics["final_p_z2"] = csv.rows().back()[6];
    metrics["max_bond_dim"] = info.max_bond_dim;
    metrics["total_truncation"] = info.total_truncation;
    metrics["max_step_truncation"] = info.max_step_truncation;
    if (cfg.kind == ExperimentKind::quench && cfg.schedule.initial == "crystal") {
        try {
            const OscillationFit fit = fit_revival_frequency(ts_list, dw_list);
            metrics["oscillation"] = {
                {"angular_frequency_rad_us", fit.angular_frequency},
                {"period_us", fit.period},
                {"omega_over_frequency",
                 mhz_to_rad_us(cfg.schedule.omega_mhz) / fit.angular_frequency}};
        } catch (const NumericError& e) {
            metrics["oscillation_fit_error"] = e.what();
        }
    }

    out.add(cfg.output.trajectory_csv, csv.str());
    if (cfg.sampling.n_shots > 0) {
        Rng rng = substream(cfg.sampling.seed, "shot sampling");
        ShotSet shots = mps_sample_shots(m, std::size_t(cfg.sampling.n_shots), rng);
        if (cfg.detection.present) {
            const DetectionModel dm(cfg.detection.f_g, cfg.detection.f_r);
            shots = apply_channel(shots, dm, cfg.sampling.seed);
        }
        const DwDistribution hist = dw_histogram(shots);
        metrics["shots_mean_dw"] = hist.mean();
        out.add(cfg.output.shots_file, shots_to_text(shots));
    }
    return metrics;
}

// ---------- thermal ----------

inline nlohmann::json run_thermal(const ExperimentConfig& cfg, OutputBatch& out) {
    const EnsembleConfig& e = cfg.ensemble;
    const int n = cfg.model.n_atoms;
    const double delta = mhz_to_rad_us(e.delta_mhz);
    const double v1 = mhz_to_rad_us(e.v1_mhz);
    const double v2 = mhz_to_rad_us(e.v2_mhz);
    const double f_g = cfg.detection.f_g, f_r = cfg.detection.f_r;

    double beta = 0.0;
    nlohmann::json calibration;
    if (e.has_beta) {
        beta = e.beta_times_delta / delta;
    } else {
        const BetaCalibration cal =
            calibrate_beta(n, delta, v1, v2, f_g, f_r, e.target_dressed_walls);
        beta = cal.beta;
        calibration = {{"target_dressed_walls", e.target_dressed_walls},
                       {"achieved_dressed_walls", cal.mean_walls},
                       {"iterations", cal.iterations}};
    }

    const ThermalModel mo(n, delta, v1, v2, beta);
    const ThermalObservables obs = thermal_observables(mo);
    const DwDistribution fcs = domain_wall_fcs(mo);
    const CorrelationFit fit = fit_correlation_length(obs.g2);
    const DressedObservables dressed = dressed_observables(mo, f_g, f_r);

    nlohmann::json result;
    result["n_atoms"] = n;
    result["delta_mhz"] = e.delta_mhz;
    result["v1_mhz"] = e.v1_mhz;
    result["v2_mhz"] = e.v2_mhz;
    result["beta"] = beta;
    result["beta_times_delta"] = beta * delta;
    result["s_per_atom"] = obs.entropy_per_atom;
    result["mean_dw"] = obs.mean_walls;
    result["mean_density"] = obs.mean_density;
    result["xi_th"] = fit.xi;
    result["xi_fit_rms_residual"] = fit.rms_residual;
    result["log_z"] = obs.log_z;
    result["energy_rad_us"] = obs.energy;
    result["fcs"] = vector_to_json(fcs.p);
    result["densities"] = vector_to_json(obs.densities);
    result["dressed"] = {{"f_g", f_g},
                         {"f_r", f_r},
                         {"mean_dw", dressed.mean_walls},
                         {"mean_density", dressed.mean_density},
                         {"fcs", vector_to_json(dressed.fcs.p)}};
    if (!calibration.is_null()) result["calibration"] = calibration;
    out.add(cfg.output.result_json, result.dump(2) + "\n");

    nlohmann::json metrics = {{"beta_times_delta", beta * delta},
                              {"s_per_atom", obs.entropy_per_atom},
                              {"mean_dw", obs.mean_walls},
                              {"dressed_mean_dw", dressed.mean_walls},
                              {"xi_th", fit.xi}};
    return metrics;
}

// ---------- reconstruct ----------

inline nlohmann::json run_reconstruct(const ExperimentConfig& cfg, OutputBatch& out) {
    const ReconstructionConfig& r = cfg.reconstruction;
    const int n = cfg.model.n_atoms;
    const double delta = mhz_to_rad_us(r.delta_mhz);
    const double beta = r.beta_times_delta / delta;
    const ThermalModel mo(n, delta, mhz_to_rad_us(r.v1_mhz), mhz_to_rad_us(r.v2_mhz), beta);
    const DwDistribution truth = domain_wall_fcs(mo);
    const DetectionModel dm(cfg.detection.f_g, cfg.detection.f_r);
    const long n_shots = cfg.sampling.n_shots;
    const std::uint64_t seed = cfg.sampling.seed;

    // closed loop: draw wall counts from the parent, realize a representative
    // configuration, push it through the readout channel, histogram the result
    Rng parent_rng = substream(seed, "parent sampling");
    Rng chan_rng = substream(seed, "detection channel");
    Eigen::VectorXd hist = Eigen::VectorXd::Zero(n + 2);
    for (long s = 0; s < n_shots; ++s) {
        const double u = parent_rng.uniform();
        double acc = 0.0;
        int walls = int(truth.p.size()) - 1;
        for (int k = 0; k < int(truth.p.size()); ++k) {
            acc += truth.p[k];
            if (u < acc) {
                walls = k;
                break;
            }
        }
        const ConfigWord w = sample_wall_config(n, walls, parent_rng);
        const ConfigWord o = apply_channel(w, n, dm, chan_rng);
        hist[count_domain_walls(o, n)] += 1.0;
    }
    DwDistribution observed;
    observed.p = hist / double(n_shots);
    observed.n_shots = std::size_t(n_shots);

    const Eigen::VectorXd sigma =
        bootstrap_sigma(observed, n_shots, r.bootstrap_resamples, seed);
    const bool exact = r.response_method == "exact" ||
                       (r.response_method == "auto" && n <= 14);
    const ResponseMatrix rm =
        exact ? build_response_matrix_exact(n, dm)
              : build_response_matrix_mc(n, dm, r.response_samples, seed);
    const Reconstruction rec = reconstruct_parent(observed, sigma, rm, r.n_restarts, seed);

    const double tv = 0.5 * (rec.parent.p - truth.p).cwiseAbs().sum();
    nlohmann::json result;
    result["n_atoms"] = n;
    result["observed"] = vector_to_json(observed.p);
    result["sigma"] = vector_to_json(sigma);
    result["parent"] = vector_to_json(rec.parent.p);
    result["true_parent"] = vector_to_json(truth.p);
    result["cost"] = rec.cost;
    result["restarts_agree"] = rec.restarts_agree;
    result["max_tv_spread"] = rec.max_tv_spread;
    result["tv_error"] = tv;
    result["mean_observed"] = observed.mean();
    result["mean_parent"] = rec.parent.mean();
    result["mean_true"] = truth.mean();
    result["n_shots"] = n_shots;
    result["response"] = {{"method", rm.method}, {"n_samples", rm.n_samples}};
    out.add(cfg.output.result_json, result.dump(2) + "\n");

    return nlohmann::json{{"tv_error", tv},
                          {"cost", rec.cost},
                          {"restarts_agree", rec.restarts_agree},
                          {"mean_observed", observed.mean()},
                          {"mean_parent", rec.parent.mean()}};
}

}  // namespace detail

inline RunArtifacts run_experiment(const ExperimentConfig& cfg,
                                   const std::filesystem::path& out_dir) {
    const auto t0 = std::chrono::steady_clock::now();
    detail::OutputBatch batch(out_dir);
    nlohmann::json metrics;
    switch (cfg.kind) {
        case ExperimentKind::rabi: metrics = detail::run_rabi(cfg, batch); break;
        case ExperimentKind::sweep:
        case ExperimentKind::quench:
            metrics = cfg.backend == Backend::mps ? detail::run_dynamics_mps(cfg, batch)
                                                  : detail::run_dynamics_exact(cfg, batch);
            break;
        case ExperimentKind::thermal: metrics = detail::run_thermal(cfg, batch); break;
        case ExperimentKind::reconstruct: metrics = detail::run_reconstruct(cfg, batch); break;
    }

    RunArtifacts art;
    art.summary["experiment"] = to_string(cfg.kind);
    art.summary["version"] = version_string;
    art.summary["config"] = cfg.echo;
    art.summary["metrics"] = metrics;
    nlohmann::json outs = nlohmann::json::object();
    for (const auto& name : batch.names()) {
        if (name == cfg.output.trajectory_csv) outs["trajectory_csv"] = name;
        else if (name == cfg.output.shots_file) outs["shots_file"] = name;
        else if (name == cfg.output.result_json) outs["result_json"] = name;
    }
    outs["summary_json"] = cfg.output.summary_json;
    art.summary["outputs"] = outs;
    const auto t1 = std::chrono::steady_clock::now();
    // wall clock is the one summary field exempt from byte-for-byte
    // reproducibility
    art.summary["wall_clock_s"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count() / 1000.0;
    batch.add(cfg.output.summary_json, art.summary.dump(2) + "\n");
    art.files = batch.write_all();
    return art;
}

}  // namespace rydsim
