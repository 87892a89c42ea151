#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <vector>

#include "rydsim/basis.hpp"
#include "rydsim/errors.hpp"
#include "rydsim/hamiltonian.hpp"
#include "rydsim/krylov.hpp"
#include "rydsim/pulse.hpp"

namespace rydsim {

struct StateVector {
    const BasisSet* basis = nullptr;
    Eigen::VectorXcd amp;

    int n_atoms() const { return basis->n_atoms(); }
    double norm() const { return amp.norm(); }
};

inline StateVector state_from_config(const BasisSet& basis, ConfigWord w) {
    auto idx = basis.index_of(w);
    if (!idx)
        throw ValidationError("state_from_config: configuration " +
                              config_to_string(w, basis.n_atoms()) +
                              " violates the blockade constraint");
    StateVector psi;
    psi.basis = &basis;
    psi.amp = Eigen::VectorXcd::Zero(basis.size());
    psi.amp[*idx] = 1.0;
    return psi;
}

struct PropagateOptions {
    double dt_us = 0.005;      // target step; spans are subdivided uniformly
    KrylovOptions krylov{};
    double norm_drift_tol = 1e-8;
};

// Advance psi from t0 to t1 under the schedule.  Each step freezes (omega,
// delta) at its midpoint, second-order accurate in dt for smooth ramps and
// exact when the parameters are constant.
inline void evolve_span(const HamiltonianOperator& h, const PulseSchedule& sched, double t0,
                        double t1, StateVector& psi, const PropagateOptions& opt) {
    if (t1 < t0) throw ValidationError("evolve_span: t1 < t0");
    if (t1 == t0) return;
    if (!(opt.dt_us > 0.0)) throw ValidationError("evolve_span: dt must be positive");
    const int n_steps = std::max(1, static_cast<int>(std::ceil((t1 - t0) / opt.dt_us - 1e-12)));
    const double h_step = (t1 - t0) / n_steps;
    for (int k = 0; k < n_steps; ++k) {
        const double tm = t0 + (k + 0.5) * h_step;
        krylov_expm_apply(h, sched.omega(tm), sched.delta(tm), h_step, psi.amp, opt.krylov);
        const double drift = std::abs(psi.norm() - 1.0);
        if (drift >= opt.norm_drift_tol)
            throw NumericError("evolve_span: norm drift " + std::to_string(drift) +
                               " at t=" + std::to_string(t0 + (k + 1) * h_step));
        psi.amp /= psi.norm();
    }
}

// Evolve across the full schedule, invoking the observer at t=0 and at each
// requested sample time (strictly increasing, within the schedule window).
inline void run_schedule(const HamiltonianOperator& h, const PulseSchedule& sched,
                         StateVector& psi, const PropagateOptions& opt,
                         const std::vector<double>& sample_times,
                         const std::function<void(double, const StateVector&)>& observer) {
    double t = 0.0;
    observer(0.0, psi);
    for (double ts : sample_times) {
        if (ts < t - 1e-12) throw ValidationError("run_schedule: sample times must increase");
        if (ts > sched.duration_us() + 1e-9)
            throw ValidationError("run_schedule: sample time beyond schedule duration");
        if (ts > t) {
            evolve_span(h, sched, t, ts, psi, opt);
            t = ts;
        }
        observer(t, psi);
    }
}

inline std::vector<double> uniform_sample_times(double t_end, double sample_dt) {
    if (!(sample_dt > 0.0) || !(t_end > 0.0))
        throw ValidationError("uniform_sample_times: need positive t_end and sample_dt");
    std::vector<double> ts;
    const int n = static_cast<int>(std::round(t_end / sample_dt));
    for (int k = 1; k <= n; ++k) ts.push_back(t_end * k / n);
    return ts;
}

}  // namespace rydsim
