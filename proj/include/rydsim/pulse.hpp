#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

#include "rydsim/errors.hpp"

namespace rydsim {

// Drive schedule (Omega(t), Delta(t)) over a finite window.  Omega is a square
// pulse: Omega0 inside [0, duration], 0 outside.  Delta follows the sweep shape
// with its argument clamped to the window.  A quench schedule is a prepared
// sweep followed by a hold at Delta = 0 with the drive kept on.
class PulseSchedule {
public:
    enum class Kind { constant, cubic, tangent, quench };

    static PulseSchedule constant(double omega0, double delta0, double duration_us) {
        PulseSchedule s;
        s.kind_ = Kind::constant;
        s.omega0_ = omega0;
        s.c_ = delta0;
        s.duration_ = duration_us;
        s.validate_common();
        return s;
    }

    // delta(t) = clip(a*(t-t0)^3 + b*(t-t0) + c, delta_min, delta_max)
    static PulseSchedule cubic_sweep(double omega0, double a, double b, double c, double t0,
                                     double delta_min, double delta_max, double duration_us) {
        PulseSchedule s;
        s.kind_ = Kind::cubic;
        s.omega0_ = omega0;
        s.a_ = a;
        s.b_ = b;
        s.c_ = c;
        s.t0_ = t0;
        s.delta_min_ = delta_min;
        s.delta_max_ = delta_max;
        s.duration_ = duration_us;
        s.validate_common();
        s.validate_window();
        if (a < 0.0 || b < 0.0)
            throw ValidationError("cubic_sweep: a and b must be >= 0 so the ramp is nondecreasing");
        return s;
    }

    // delta(t) = clip(a*tan(b*(t-t0)) + c, delta_min, delta_max); the tangent
    // argument must stay inside (-pi/2, pi/2) over the whole window.
    static PulseSchedule tangent_sweep(double omega0, double a, double b, double c, double t0,
                                       double delta_min, double delta_max, double duration_us) {
        PulseSchedule s;
        s.kind_ = Kind::tangent;
        s.omega0_ = omega0;
        s.a_ = a;
        s.b_ = b;
        s.c_ = c;
        s.t0_ = t0;
        s.delta_min_ = delta_min;
        s.delta_max_ = delta_max;
        s.duration_ = duration_us;
        s.validate_common();
        s.validate_window();
        if (a * b < 0.0)
            throw ValidationError("tangent_sweep: a*b must be >= 0 so the ramp is nondecreasing");
        const double half_pi = std::numbers::pi / 2.0;
        for (double t : {0.0, duration_us}) {
            const double arg = b * (t - t0);
            if (!(std::abs(arg) < half_pi))
                throw ValidationError("tangent_sweep: tan argument leaves (-pi/2, pi/2) inside the window");
        }
        return s;
    }

    // Prep schedule followed by a hold of the bare drive: Delta jumps to 0 at
    // prep.duration() and stays there for hold_us while Omega stays at omega0.
    static PulseSchedule quench(const PulseSchedule& prep, double hold_us) {
        if (prep.kind_ == Kind::quench) throw ValidationError("quench: prep is already a quench");
        if (!(hold_us >= 0.0)) throw ValidationError("quench: hold must be >= 0");
        PulseSchedule s;
        s.kind_ = Kind::quench;
        s.omega0_ = prep.omega0_;
        s.duration_ = prep.duration_ + hold_us;
        s.prep_ = std::make_shared<PulseSchedule>(prep);
        return s;
    }

    Kind kind() const { return kind_; }
    double duration_us() const { return duration_; }
    double omega0() const { return omega0_; }
    double prep_duration_us() const { return prep_ ? prep_->duration_ : 0.0; }

    double omega(double t) const {
        if (t < 0.0 || t > duration_) return 0.0;
        return omega0_;
    }

    double delta(double t) const {
        switch (kind_) {
            case Kind::constant:
                return c_;
            case Kind::cubic: {
                const double u = std::clamp(t, 0.0, duration_) - t0_;
                return std::clamp(a_ * u * u * u + b_ * u + c_, delta_min_, delta_max_);
            }
            case Kind::tangent: {
                const double u = std::clamp(t, 0.0, duration_) - t0_;
                return std::clamp(a_ * std::tan(b_ * u) + c_, delta_min_, delta_max_);
            }
            case Kind::quench:
                return t < prep_->duration_ ? prep_->delta(t) : 0.0;
        }
        return 0.0;
    }

    // Piecewise-linear lookup table, (t, omega, delta) triples on a uniform grid.
    struct Sample {
        double t_us, omega, delta;
    };
    std::vector<Sample> sample_table(double grid_dt_us = 1e-3) const {
        if (!(grid_dt_us > 0.0)) throw ValidationError("sample_table: grid step must be positive");
        std::vector<Sample> out;
        const int n = std::max(1, static_cast<int>(std::ceil(duration_ / grid_dt_us)));
        out.reserve(n + 1);
        for (int k = 0; k <= n; ++k) {
            const double t = duration_ * k / n;
            out.push_back({t, omega(t), delta(t)});
        }
        return out;
    }

private:
    PulseSchedule() = default;

    void validate_common() const {
        if (!(duration_ > 0.0)) throw ValidationError("schedule: duration must be positive");
        if (!(omega0_ >= 0.0)) throw ValidationError("schedule: omega0 must be >= 0");
    }
    void validate_window() const {
        if (!(delta_min_ < delta_max_))
            throw ValidationError("schedule: delta_min must be below delta_max");
    }

    Kind kind_ = Kind::constant;
    double duration_ = 0.0;
    double omega0_ = 0.0;
    double a_ = 0.0, b_ = 0.0, c_ = 0.0, t0_ = 0.0;
    double delta_min_ = 0.0, delta_max_ = 0.0;
    std::shared_ptr<const PulseSchedule> prep_;
};

}  // namespace rydsim
