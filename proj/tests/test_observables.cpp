#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <random>

#include "rydsim/fft.hpp"
#include "rydsim/observables.hpp"
#include "rydsim/units.hpp"

using namespace rydsim;
using cd = std::complex<double>;

namespace {

StateVector random_state(const BasisSet& basis, unsigned seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    StateVector psi;
    psi.basis = &basis;
    psi.amp.resize(basis.size());
    for (Eigen::Index k = 0; k < psi.amp.size(); ++k) psi.amp[k] = cd(u(gen), u(gen));
    psi.amp.normalize();
    return psi;
}

}  // namespace

TEST_CASE("site densities and correlations match brute-force sums", "[observables]") {
    const BasisSet basis = BasisSet::enumerate(8, false);
    const StateVector psi = random_state(basis, 3);
    const int n = 8;

    Eigen::VectorXd d_ref = Eigen::VectorXd::Zero(n);
    Eigen::MatrixXd nn_ref = Eigen::MatrixXd::Zero(n, n);
    double m1 = 0.0, m2 = 0.0;
    Eigen::VectorXd dist_ref = Eigen::VectorXd::Zero(n + 2);
    for (std::size_t k = 0; k < basis.size(); ++k) {
        const double p = std::norm(psi.amp[k]);
        const ConfigWord w = basis.state(k);
        for (int i = 1; i <= n; ++i)
            if (config_bit(w, n, i)) {
                d_ref[i - 1] += p;
                for (int j = 1; j <= n; ++j)
                    if (config_bit(w, n, j)) nn_ref(i - 1, j - 1) += p;
            }
        const int dw = count_domain_walls(w, n);
        m1 += p * dw;
        m2 += p * dw * dw;
        dist_ref[dw] += p;
    }

    REQUIRE((site_densities(psi) - d_ref).cwiseAbs().maxCoeff() < 1e-12);
    const Eigen::MatrixXd g2 = g2_matrix(psi);
    REQUIRE((g2 - (nn_ref - d_ref * d_ref.transpose())).cwiseAbs().maxCoeff() < 1e-12);
    REQUIRE((g2 - g2.transpose()).cwiseAbs().maxCoeff() < 1e-14);
    for (int i = 0; i < n; ++i)
        REQUIRE(g2(i, i) == Catch::Approx(d_ref[i] * (1 - d_ref[i])).margin(1e-12));

    const DwMoments m = dw_moments(psi);
    REQUIRE(m.mean == Catch::Approx(m1).margin(1e-12));
    REQUIRE(m.variance == Catch::Approx(m2 - m1 * m1).margin(1e-12));
    REQUIRE(m.density == Catch::Approx(m1 / (n + 1)).margin(1e-12));

    const Eigen::VectorXd dist = dw_distribution(psi);
    REQUIRE((dist - dist_ref).cwiseAbs().maxCoeff() < 1e-12);
    REQUIRE(dist.sum() == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("distribution moments agree with direct moments", "[observables]") {
    const BasisSet basis = BasisSet::enumerate(9, true);
    const StateVector psi = random_state(basis, 17);
    const Eigen::VectorXd p = dw_distribution(psi);
    DwDistribution d{p, 0};
    const DwMoments m = dw_moments(psi);
    REQUIRE(d.mean() == Catch::Approx(m.mean).margin(1e-12));
    REQUIRE(d.variance() == Catch::Approx(m.variance).margin(1e-12));
}

TEST_CASE("excitation statistics on simple states", "[observables]") {
    const BasisSet basis = BasisSet::enumerate(4, false);
    StateVector psi;
    psi.basis = &basis;
    psi.amp = Eigen::VectorXcd::Zero(basis.size());
    // (|0000> + |1010> + |0011>)/sqrt3
    psi.amp[0b0000] = psi.amp[0b1010] = psi.amp[0b0011] = 1.0 / std::sqrt(3.0);
    REQUIRE(prob_ground_config(psi) == Catch::Approx(1.0 / 3).margin(1e-12));
    REQUIRE(prob_any_excitation(psi) == Catch::Approx(2.0 / 3).margin(1e-12));
    REQUIRE(prob_multi_excitation(psi) == Catch::Approx(2.0 / 3).margin(1e-12));
    REQUIRE(prob_blockade_violation(psi) == Catch::Approx(1.0 / 3).margin(1e-12));
    REQUIRE(prob_of_config(psi, 0b1010) == Catch::Approx(1.0 / 3).margin(1e-12));
}

TEST_CASE("half-chain entropy of product and Bell-like states", "[observables]") {
    const BasisSet basis = BasisSet::enumerate(2, true);
    StateVector prod = state_from_config(basis, config_from_string("10"));
    REQUIRE(half_chain_entropy(prod, 1) == Catch::Approx(0.0).margin(1e-12));

    StateVector bell;
    bell.basis = &basis;
    bell.amp = Eigen::VectorXcd::Zero(basis.size());
    bell.amp[basis.index_of(config_from_string("10")).value()] = 1.0 / std::sqrt(2.0);
    bell.amp[basis.index_of(config_from_string("01")).value()] = 1.0 / std::sqrt(2.0);
    REQUIRE(half_chain_entropy(bell, 1) == Catch::Approx(std::log(2.0)).epsilon(1e-9));

    REQUIRE_THROWS_AS(half_chain_entropy(bell, 0), ValidationError);
    REQUIRE_THROWS_AS(half_chain_entropy(bell, 2), ValidationError);
}

TEST_CASE("constrained and full-space entropies agree on embedded states", "[observables]") {
    const BasisSet cons = BasisSet::enumerate(8, true);
    const BasisSet full = BasisSet::enumerate(8, false);
    const StateVector psi = random_state(cons, 23);
    StateVector embedded;
    embedded.basis = &full;
    embedded.amp = Eigen::VectorXcd::Zero(full.size());
    for (std::size_t k = 0; k < cons.size(); ++k) embedded.amp[cons.state(k)] = psi.amp[k];
    for (int cut = 1; cut < 8; ++cut)
        REQUIRE(half_chain_entropy(psi, cut) ==
                Catch::Approx(half_chain_entropy(embedded, cut)).margin(1e-10));
}

TEST_CASE("entropy is symmetric for reflection-symmetric states", "[observables]") {
    const BasisSet basis = BasisSet::enumerate(9, true);
    // Symmetrize a random state under spatial reflection.
    StateVector psi = random_state(basis, 31);
    auto reflect = [&](ConfigWord w) {
        ConfigWord r = 0;
        for (int i = 0; i < 9; ++i)
            if ((w >> i) & 1ull) r |= 1ull << (8 - i);
        return r;
    };
    Eigen::VectorXcd sym = psi.amp;
    for (std::size_t k = 0; k < basis.size(); ++k)
        sym[k] = psi.amp[k] + psi.amp[basis.index_of(reflect(basis.state(k))).value()];
    psi.amp = sym.normalized();
    for (int cut = 1; cut <= 4; ++cut)
        REQUIRE(half_chain_entropy(psi, cut) ==
                Catch::Approx(half_chain_entropy(psi, 9 - cut)).margin(1e-6));
}

TEST_CASE("shot sampling reproduces the underlying distribution", "[observables]") {
    const BasisSet basis = BasisSet::enumerate(7, true);
    const StateVector psi = random_state(basis, 41);
    Rng rng(substream(1234, "sampling"));
    const ShotSet shots = sample_shots(psi, 20000, rng);
    REQUIRE(shots.size() == 20000);
    REQUIRE(shots.n_atoms == 7);

    const Eigen::VectorXd exact_d = site_densities(psi);
    const Eigen::VectorXd got_d = shot_site_densities(shots);
    for (int i = 0; i < 7; ++i) {
        const double sigma = std::sqrt(exact_d[i] * (1 - exact_d[i]) / 20000.0);
        REQUIRE(std::abs(got_d[i] - exact_d[i]) < 5.0 * sigma + 1e-9);
    }

    const Eigen::VectorXd exact_p = dw_distribution(psi);
    const DwDistribution hist = dw_histogram(shots);
    double tv = 0.0;
    for (Eigen::Index k = 0; k < exact_p.size(); ++k) tv += std::abs(hist.p[k] - exact_p[k]);
    REQUIRE(tv / 2.0 < 0.02);

    // Determinism: the same seed reproduces the same words.
    Rng rng2(substream(1234, "sampling"));
    const ShotSet again = sample_shots(psi, 20000, rng2);
    REQUIRE(again.shots == shots.shots);
}

TEST_CASE("empirical g2 approaches the exact correlations", "[observables]") {
    const BasisSet basis = BasisSet::enumerate(6, true);
    const StateVector psi = random_state(basis, 57);
    Rng rng(substream(99, "sampling"));
    const ShotSet shots = sample_shots(psi, 50000, rng);
    const Eigen::MatrixXd exact = g2_matrix(psi);
    const Eigen::MatrixXd got = g2_matrix(shots);
    REQUIRE((got - exact).cwiseAbs().maxCoeff() < 0.012);
}

TEST_CASE("state histogram ranks configurations by frequency", "[observables]") {
    ShotSet shots;
    shots.n_atoms = 3;
    shots.shots = {5, 5, 5, 2, 2, 0, 7};
    const auto top = state_histogram(shots, 2);
    REQUIRE(top.size() == 2);
    REQUIRE(top[0].word == 5);
    REQUIRE(top[0].count == 3);
    REQUIRE(top[1].word == 2);
}

TEST_CASE("correlation-length fit recovers a synthetic decay", "[observables]") {
    const double xi = 3.5, amp = 0.21;
    Eigen::VectorXd g2d(13);
    for (int d = 0; d < 13; ++d)
        g2d[d] = amp * std::pow(-1.0, d) * std::exp(-d / xi);
    const CorrelationFit fit = fit_correlation_length(g2d, 12);
    REQUIRE(fit.xi == Catch::Approx(xi).epsilon(1e-9));
    REQUIRE(fit.amplitude == Catch::Approx(amp).epsilon(1e-9));
    REQUIRE(fit.alternating_sign);
    REQUIRE(fit.rms_residual < 1e-10);
    REQUIRE(fit.n_points == 12);

    // Non-alternating decay is flagged but still fitted.
    Eigen::VectorXd mono(13);
    for (int d = 0; d < 13; ++d) mono[d] = amp * std::exp(-d / xi);
    const CorrelationFit fit2 = fit_correlation_length(mono, 12);
    REQUIRE_FALSE(fit2.alternating_sign);
    REQUIRE(fit2.xi == Catch::Approx(xi).epsilon(1e-9));
}

TEST_CASE("correlation-length fit rejects noise", "[observables]") {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::VectorXd noise(13);
    for (int d = 0; d < 13; ++d) noise[d] = 1e-3 * u(gen);
    bool rejected = false;
    try {
        const CorrelationFit fit = fit_correlation_length(noise, 12);
        rejected = fit.rms_residual > 0.5 || !fit.alternating_sign;
    } catch (const NumericError&) {
        rejected = true;
    }
    REQUIRE(rejected);

    Eigen::VectorXd few = Eigen::VectorXd::Zero(13);
    few[1] = 0.1;
    few[2] = -0.05;
    REQUIRE_THROWS_AS(fit_correlation_length(few, 12), NumericError);
}

TEST_CASE("revival-frequency extraction from a staggered signal", "[observables]") {
    // Signal with the crystal-quench structure: minima at both the ordered
    // and anti-ordered passes, i.e. signal period = half the revival period.
    const double w_rev = mhz_to_rad_us(2.0) / 1.38;
    std::vector<double> ts, ys;
    for (int k = 0; k <= 4000; ++k) {
        const double t = 4.0 * k / 4000.0;
        ts.push_back(t);
        // Dominant component at twice the revival frequency (two dips per
        // cycle) plus a weak component making alternating minima inequivalent.
        ys.push_back(0.5 - 0.3 * std::cos(2.0 * w_rev * t) - 0.02 * std::cos(w_rev * t));
    }
    const OscillationFit fit = fit_revival_frequency(ts, ys);
    REQUIRE(fit.angular_frequency == Catch::Approx(w_rev).epsilon(0.02));
}

TEST_CASE("plain signal frequency and decay extraction", "[observables]") {
    const double w = 4.1, tau = 2.7;
    std::vector<double> ts, ys;
    for (int k = 0; k <= 6000; ++k) {
        const double t = 6.0 * k / 6000.0;
        ts.push_back(t);
        ys.push_back(0.5 + 0.3 * std::cos(w * t) * std::exp(-t / tau));
    }
    const OscillationFit fit = fit_signal_frequency(ts, ys);
    REQUIRE(fit.angular_frequency == Catch::Approx(w).epsilon(0.01));
    REQUIRE(fit.decay_time == Catch::Approx(tau).epsilon(0.15));

    std::vector<double> flat(100, 1.0), tflat(100);
    for (int i = 0; i < 100; ++i) tflat[i] = i;
    REQUIRE_THROWS_AS(fit_signal_frequency(tflat, flat), NumericError);
}

TEST_CASE("fft peak frequency resolves a clean tone", "[observables]") {
    const double f_mhz = 2.0 * std::sqrt(2.0);
    const double w = mhz_to_rad_us(f_mhz);
    const double dt = 0.01;
    std::vector<double> ys;
    for (int k = 0; k < 5000; ++k) ys.push_back(0.4 + 0.5 * std::cos(w * k * dt + 0.3));
    const double got = fft_peak_frequency(dt, ys);
    REQUIRE(got == Catch::Approx(w).epsilon(2e-3));
    REQUIRE_THROWS_AS(fft_peak_frequency(0.0, ys), ValidationError);
}
