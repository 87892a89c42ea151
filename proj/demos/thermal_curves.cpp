// Entropy, wall count, and correlation length of the thermal crystal ensemble
// as the inverse temperature varies, 51 atoms.

#include <cstdio>

#include "rydsim/thermal.hpp"
#include "rydsim/units.hpp"

int main() {
    using namespace rydsim;
    const int n = 51;
    const double delta = mhz_to_rad_us(14.0);
    const double v1 = mhz_to_rad_us(24.0);
    const double v2 = mhz_to_rad_us(0.38);
    std::printf("%8s %10s %10s %10s\n", "beta*D", "s/kB", "<walls>", "xi");
    for (double bd : {1.0, 2.0, 3.0, 3.44, 4.0, 5.0, 6.0}) {
        const ThermalModel mo(n, delta, v1, v2, bd / delta);
        const ThermalObservables obs = thermal_observables(mo);
        const CorrelationFit fit = fit_correlation_length(obs.g2);
        std::printf("%8.2f %10.4f %10.4f %10.4f\n", bd, obs.entropy_per_atom, obs.mean_walls,
                    fit.xi);
    }
    return 0;
}
