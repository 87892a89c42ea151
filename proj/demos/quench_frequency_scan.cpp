// Size dependence of the post-quench density-wave revival frequency.
// Builds each chain directly against the library, no config files involved.

#include <cstdio>
#include <vector>

#include "rydsim/atom_array.hpp"
#include "rydsim/basis.hpp"
#include "rydsim/hamiltonian.hpp"
#include "rydsim/observables.hpp"
#include "rydsim/propagate.hpp"
#include "rydsim/pulse.hpp"
#include "rydsim/units.hpp"

int main() {
    using namespace rydsim;
    const double omega = mhz_to_rad_us(2.0);
    const double t_end = 2.5;
    std::printf("%4s %10s %14s %12s\n", "N", "dim", "freq (rad/us)", "Omega/freq");
    for (int n = 5; n <= 13; n += 2) {
        const AtomArray arr =
            AtomArray::uniform_chain(n, 5.74, AtomArray::c6_from_nn(mhz_to_rad_us(24.0), 5.74));
        const BasisSet basis = BasisSet::enumerate(n, true);
        const HamiltonianOperator ham(arr, HamiltonianMode::constrained_nn, basis);
        const PulseSchedule sched = PulseSchedule::constant(omega, 0.0, t_end);
        StateVector psi = state_from_config(basis, crystal_word(n));
        PropagateOptions opt;
        std::vector<double> ts, dw;
        run_schedule(ham, sched, psi, opt, uniform_sample_times(t_end, 0.01),
                     [&](double t, const StateVector& s) {
                         ts.push_back(t);
                         dw.push_back(dw_moments(s).density);
                     });
        const OscillationFit fit = fit_revival_frequency(ts, dw);
        std::printf("%4d %10zu %14.5f %12.4f\n", n, basis.size(), fit.angular_frequency,
                    omega / fit.angular_frequency);
    }
    return 0;
}
