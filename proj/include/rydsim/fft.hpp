#pragma once

#include <cmath>
#include <vector>

#include <fftw3.h>

#include "rydsim/errors.hpp"
#include "rydsim/units.hpp"

namespace rydsim {

// Angular frequency of the dominant non-DC spectral peak of a uniformly
// sampled real signal.  Hann window plus parabolic interpolation of the log
// magnitude around the peak bin gives a few-1e-4 relative accuracy for clean
// oscillations, well inside the tolerances we quote.
inline double fft_peak_frequency(double sample_dt, const std::vector<double>& ys) {
    const std::size_t n = ys.size();
    if (n < 8) throw ShapeError("fft_peak_frequency: need at least 8 samples");
    if (!(sample_dt > 0.0)) throw ValidationError("fft_peak_frequency: dt must be positive");
    double mean = 0.0;
    for (double y : ys) mean += y;
    mean /= static_cast<double>(n);

    std::vector<double> in(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double hann = 0.5 - 0.5 * std::cos(two_pi * i / (n - 1));
        in[i] = (ys[i] - mean) * hann;
    }
    const std::size_t nf = n / 2 + 1;
    std::vector<fftw_complex> out(nf);
    fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(), out.data(), FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);

    std::size_t peak = 1;
    double peak_mag = -1.0;
    for (std::size_t k = 1; k < nf; ++k) {
        const double mag = out[k][0] * out[k][0] + out[k][1] * out[k][1];
        if (mag > peak_mag) {
            peak_mag = mag;
            peak = k;
        }
    }
    if (peak_mag <= 0.0) throw NumericError("fft_peak_frequency: signal has no non-DC content");

    double kf = static_cast<double>(peak);
    if (peak > 1 && peak + 1 < nf) {
        auto lm = [&](std::size_t k) {
            const double m = out[k][0] * out[k][0] + out[k][1] * out[k][1];
            return 0.5 * std::log(std::max(m, 1e-300));
        };
        const double l0 = lm(peak - 1), l1 = lm(peak), l2 = lm(peak + 1);
        const double denom = l0 - 2.0 * l1 + l2;
        if (denom < 0.0) kf += 0.5 * (l0 - l2) / denom;
    }
    return two_pi * kf / (static_cast<double>(n) * sample_dt);
}

}  // namespace rydsim
