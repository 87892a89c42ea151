#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "rydsim/mps.hpp"
#include "rydsim/tebd.hpp"
#include "rydsim/units.hpp"

using namespace rydsim;
using cd = std::complex<double>;

namespace {

AtomArray standard_chain(int n, double spacing = 5.74, double v_nn_mhz = 24.0) {
    return AtomArray::uniform_chain(n, spacing,
                                    AtomArray::c6_from_nn(mhz_to_rad_us(v_nn_mhz), spacing));
}

int site_bit(ConfigWord w, int n, int s /*0-based*/) { return (w >> (n - 1 - s)) & 1 ? 1 : 0; }

// Dense Hamiltonian with interactions truncated to nearest and next-nearest
// neighbours, matching what the Trotterized evolution implements.  Real
// symmetric in the occupation basis.
Eigen::MatrixXd dense_h_r2(int n, double omega, double delta, const AtomArray& arr) {
    const int dim = 1 << n;
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
    for (int w = 0; w < dim; ++w) {
        double e = 0.0;
        for (int s = 0; s < n; ++s) {
            if (!site_bit(w, n, s)) continue;
            e -= delta;
            if (s + 1 < n && site_bit(w, n, s + 1)) e += arr.v(s, s + 1);
            if (s + 2 < n && site_bit(w, n, s + 2)) e += arr.v(s, s + 2);
        }
        h(w, w) = e;
        for (int s = 0; s < n; ++s) h(w, w ^ (1 << (n - 1 - s))) += 0.5 * omega;
    }
    return h;
}

Eigen::VectorXcd dense_expm_apply(const Eigen::MatrixXd& h, double dt,
                                  const Eigen::VectorXcd& psi) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    Eigen::VectorXcd ph(es.eigenvalues().size());
    for (Eigen::Index k = 0; k < ph.size(); ++k) ph[k] = std::polar(1.0, -dt * es.eigenvalues()[k]);
    const Eigen::MatrixXd& v = es.eigenvectors();
    return v * (ph.asDiagonal() * (v.transpose() * psi));
}

// midpoint-frozen stepping of the dense range-2 Hamiltonian
Eigen::VectorXcd dense_evolve_r2(int n, const AtomArray& arr, const PulseSchedule& sched,
                                 double t_end, double dt, Eigen::VectorXcd psi) {
    const int steps = static_cast<int>(std::ceil(t_end / dt - 1e-9));
    const double h = t_end / steps;
    for (int k = 0; k < steps; ++k) {
        const double tm = (k + 0.5) * h;
        psi = dense_expm_apply(dense_h_r2(n, sched.omega(tm), sched.delta(tm), arr), h, psi);
    }
    return psi;
}

Eigen::VectorXd dense_densities(const Eigen::VectorXcd& psi, int n) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
    for (int w = 0; w < (1 << n); ++w) {
        const double p = std::norm(psi[w]);
        for (int s = 0; s < n; ++s)
            if (site_bit(w, n, s)) out[s] += p;
    }
    return out;
}

Eigen::VectorXcd random_amps(int n, unsigned seed, bool flat = false) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> ud;
    Eigen::VectorXcd v(1 << n);
    for (Eigen::Index k = 0; k < v.size(); ++k) {
        if (flat)  // magnitudes bounded away from zero, for sampling statistics
            v[k] = std::polar(0.5 + ud(gen), 2.0 * std::numbers::pi * ud(gen));
        else v[k] = cd(nd(gen), nd(gen));
    }
    v.normalize();
    return v;
}

StateVector make_state(const BasisSet& basis, Eigen::VectorXcd amps) {
    StateVector psi;
    psi.basis = &basis;
    psi.amp = std::move(amps);
    return psi;
}

Eigen::Matrix4cd random_unitary4(std::mt19937_64& gen) {
    std::normal_distribution<double> nd;
    Eigen::Matrix4cd a;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) a(r, c) = cd(nd(gen), nd(gen));
    Eigen::HouseholderQR<Eigen::Matrix4cd> qr(a);
    return qr.householderQ() * Eigen::Matrix4cd::Identity();
}

Eigen::VectorXcd dense_apply_two_site(const Eigen::VectorXcd& psi, int n, int i,
                                      const Eigen::Matrix4cd& g) {
    const int sl = n - 1 - i, sr = n - 2 - i;
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(psi.size());
    for (int w = 0; w < (1 << n); ++w) {
        const int p = (w >> sl) & 1, q = (w >> sr) & 1;
        const int base = w & ~(1 << sl) & ~(1 << sr);
        for (int pp = 0; pp < 2; ++pp)
            for (int qq = 0; qq < 2; ++qq)
                out[w] += g(p * 2 + q, pp * 2 + qq) * psi[base | (pp << sl) | (qq << sr)];
    }
    return out;
}

double max_density_dev(MpsState& m, const Eigen::VectorXcd& exact) {
    const Eigen::VectorXd d_mps = mps_site_densities(m);
    const Eigen::VectorXd d_ref = dense_densities(exact, m.n_atoms);
    return (d_mps - d_ref).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("product-state MPS basics", "[mps]") {
    const int n = 7;
    const ConfigWord w = crystal_word(n);
    MpsState m = mps_from_product(n, w);
    CHECK(m.max_bond_dim() == 1);
    CHECK(m.norm() == Catch::Approx(1.0));
    for (int cut = 1; cut < n; ++cut) CHECK(entanglement_entropy(m, cut) < 1e-12);

    Eigen::VectorXd dens = mps_site_densities(m);
    for (int s = 0; s < n; ++s)
        CHECK(dens[s] == Catch::Approx(site_bit(w, n, s)).margin(1e-14));

    const BasisSet full = BasisSet::enumerate(n, false);
    StateVector psi = statevector_from_mps(m, full);
    for (Eigen::Index k = 0; k < psi.amp.size(); ++k)
        CHECK(std::abs(psi.amp[k] - (ConfigWord(k) == w ? 1.0 : 0.0)) < 1e-14);

    const auto wm = wall_moments(m);
    CHECK(wm.mean == Catch::Approx(0.0).margin(1e-12));
    CHECK(wm.variance == Catch::Approx(0.0).margin(1e-12));

    MpsState g = mps_from_product(5, 0);
    const auto wg = wall_moments(g);
    CHECK(wg.mean == Catch::Approx(6.0));
    CHECK(wg.variance == Catch::Approx(0.0).margin(1e-12));

    CHECK_THROWS_AS(mps_from_product(3, 0b1000), ShapeError);
    CHECK_THROWS_AS(entanglement_entropy(m, 0), ValidationError);
    CHECK_THROWS_AS(entanglement_entropy(m, n), ValidationError);
}

TEST_CASE("statevector round trip and canonical moves", "[mps]") {
    const int n = 8;
    const BasisSet full = BasisSet::enumerate(n, false);
    const Eigen::VectorXcd amps = random_amps(n, 11);
    MpsState m = mps_from_statevector(make_state(full, amps));

    StateVector back = statevector_from_mps(m, full);
    CHECK((back.amp - amps).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::abs(mps_overlap(m, m) - 1.0) < 1e-12);

    // moving the center is exact and restores left/right orthonormality
    move_center(m, 0);
    for (int i = 1; i < n; ++i) {
        Eigen::MatrixXcd bb = Eigen::MatrixXcd::Zero(m.site[i][0].rows(), m.site[i][0].rows());
        for (int p = 0; p < 2; ++p) bb += m.site[i][p] * m.site[i][p].adjoint();
        CHECK((bb - Eigen::MatrixXcd::Identity(bb.rows(), bb.cols())).cwiseAbs().maxCoeff() <
              1e-12);
    }
    move_center(m, n - 1);
    for (int i = 0; i < n - 1; ++i) {
        Eigen::MatrixXcd aa = Eigen::MatrixXcd::Zero(m.site[i][0].cols(), m.site[i][0].cols());
        for (int p = 0; p < 2; ++p) aa += m.site[i][p].adjoint() * m.site[i][p];
        CHECK((aa - Eigen::MatrixXcd::Identity(aa.rows(), aa.cols())).cwiseAbs().maxCoeff() <
              1e-12);
    }
    back = statevector_from_mps(m, full);
    CHECK((back.amp - amps).cwiseAbs().maxCoeff() < 1e-12);

    // densities agree with the dense form
    Eigen::VectorXd dens = mps_site_densities(m);
    CHECK((dens - dense_densities(amps, n)).cwiseAbs().maxCoeff() < 1e-12);

    // maximally entangled pair carries ln 2 across the cut
    const BasisSet two = BasisSet::enumerate(2, false);
    Eigen::VectorXcd bell = Eigen::VectorXcd::Zero(4);
    bell[1] = bell[2] = 1.0 / std::sqrt(2.0);
    MpsState mb = mps_from_statevector(make_state(two, bell));
    CHECK(entanglement_entropy(mb, 1) == Catch::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("two-site gates match the dense operator", "[mps]") {
    const int n = 6;
    const BasisSet full = BasisSet::enumerate(n, false);
    Eigen::VectorXcd amps = random_amps(n, 21);
    MpsState m = mps_from_statevector(make_state(full, amps));

    std::mt19937_64 gen(77);
    std::uniform_int_distribution<int> bond(0, n - 2);
    for (int k = 0; k < 12; ++k) {
        const int i = bond(gen);
        const Eigen::Matrix4cd u = random_unitary4(gen);
        apply_two_site_gate(m, i, u, 0, 1e-14, k % 2 == 0);
        amps = dense_apply_two_site(amps, n, i, u);
    }
    StateVector got = statevector_from_mps(m, full);
    CHECK((got.amp - amps).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(std::abs(m.norm() - 1.0) < 1e-12);
}

TEST_CASE("wall moments match enumeration", "[mps]") {
    const int n = 7;
    const BasisSet full = BasisSet::enumerate(n, false);
    for (unsigned seed : {3u, 5u, 9u}) {
        const Eigen::VectorXcd amps = random_amps(n, seed);
        MpsState m = mps_from_statevector(make_state(full, amps));
        double d1 = 0.0, d2 = 0.0;
        for (int w = 0; w < (1 << n); ++w) {
            const double p = std::norm(amps[w]);
            const int d = count_domain_walls(w, n);
            d1 += p * d;
            d2 += p * d * d;
        }
        const auto wm = wall_moments(m);
        CHECK(wm.mean == Catch::Approx(d1).margin(1e-10));
        CHECK(wm.variance == Catch::Approx(d2 - d1 * d1).margin(1e-10));
    }
}

TEST_CASE("configuration sampling follows the Born rule", "[mps]") {
    const int n = 6;
    const BasisSet full = BasisSet::enumerate(n, false);
    const Eigen::VectorXcd amps = random_amps(n, 31, /*flat=*/true);
    MpsState m = mps_from_statevector(make_state(full, amps));

    const std::size_t n_shots = 50000;
    Rng rng(2024);
    ShotSet shots = mps_sample_shots(m, n_shots, rng);
    REQUIRE(shots.size() == n_shots);

    std::vector<double> counts(1 << n, 0.0);
    for (ConfigWord w : shots.shots) counts[w] += 1.0;
    double chi2 = 0.0;
    for (int w = 0; w < (1 << n); ++w) {
        const double e = n_shots * std::norm(amps[w]);
        chi2 += (counts[w] - e) * (counts[w] - e) / e;
    }
    const double dof = (1 << n) - 1;
    CHECK(chi2 < dof + 5.0 * std::sqrt(2.0 * dof));

    Rng r1(99), r2(99), r3(100);
    MpsState m1 = m, m2 = m, m3 = m;
    ShotSet a = mps_sample_shots(m1, 50, r1);
    ShotSet b = mps_sample_shots(m2, 50, r2);
    ShotSet c = mps_sample_shots(m3, 50, r3);
    CHECK(a.shots == b.shots);
    CHECK(a.shots != c.shots);
}

TEST_CASE("Trotterized evolution matches dense propagation", "[mps]") {
    const int n = 7;
    const AtomArray arr = standard_chain(n);
    const double omega = mhz_to_rad_us(2.0);
    const BasisSet full = BasisSet::enumerate(n, false);

    SECTION("resonant drive from the ordered state") {
        const double t_end = 0.8;
        const auto sched = PulseSchedule::constant(omega, 0.0, t_end);
        TebdOptions opt;
        opt.dt_us = 0.004 / omega;
        opt.d_max = 64;
        MpsState m = mps_from_product(n, crystal_word(n));
        TebdRunInfo info = tebd_run(m, arr, sched, opt, {t_end}, [](double, MpsState&,
                                                                    const TebdRunInfo&) {});
        CHECK(info.max_norm_drift < 1e-6);

        Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(1 << n);
        psi[crystal_word(n)] = 1.0;
        psi = dense_expm_apply(dense_h_r2(n, omega, 0.0, arr), t_end, psi);
        CHECK(max_density_dev(m, psi) < 1e-3);

        StateVector got = statevector_from_mps(m, full);
        CHECK(std::abs(psi.dot(got.amp)) > 1.0 - 1e-5);
    }

    SECTION("detuning sweep from the empty state") {
        const double t_end = 0.6;
        const double d0 = mhz_to_rad_us(4.0);
        const auto sched = PulseSchedule::cubic_sweep(omega, 0.0, 2.0 * d0 / t_end, 0.0,
                                                      t_end / 2.0, -d0, d0, t_end);
        TebdOptions opt;
        opt.dt_us = 0.004 / omega;
        opt.d_max = 64;
        MpsState m = mps_from_product(n, 0);
        tebd_run(m, arr, sched, opt, {t_end}, [](double, MpsState&, const TebdRunInfo&) {});

        Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(1 << n);
        psi[0] = 1.0;
        psi = dense_evolve_r2(n, arr, sched, t_end, 5e-4, psi);
        CHECK(max_density_dev(m, psi) < 1e-3);
    }
}

TEST_CASE("halving the step reduces the error fourfold", "[mps]") {
    const int n = 6;
    const AtomArray arr = standard_chain(n);
    const double omega = mhz_to_rad_us(2.0);
    const double t_end = 0.4;
    const auto sched = PulseSchedule::constant(omega, mhz_to_rad_us(1.0), t_end);

    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(1 << n);
    psi[crystal_word(n)] = 1.0;
    psi = dense_expm_apply(dense_h_r2(n, omega, mhz_to_rad_us(1.0), arr), t_end, psi);

    auto run_err = [&](double dt) {
        TebdOptions opt;
        opt.dt_us = dt;
        opt.d_max = 0;
        opt.trunc_eps = 1e-14;
        MpsState m = mps_from_product(n, crystal_word(n));
        tebd_run(m, arr, sched, opt, {t_end}, [](double, MpsState&, const TebdRunInfo&) {});
        return max_density_dev(m, psi);
    };
    const double e1 = run_err(0.03 / omega);
    const double e2 = run_err(0.015 / omega);
    INFO("e1=" << e1 << " e2=" << e2 << " ratio=" << e1 / e2);
    CHECK(e1 / e2 > 2.8);
    CHECK(e1 / e2 < 5.5);
}

TEST_CASE("larger bond caps never hurt", "[mps]") {
    const int n = 13;
    const AtomArray arr = standard_chain(n);
    const double omega = mhz_to_rad_us(2.0);
    const double t_end = 0.3;
    const auto sched = PulseSchedule::constant(omega, 0.0, t_end);

    auto run_dens = [&](int d_max) {
        TebdOptions opt;
        opt.dt_us = 0.02 / omega;
        opt.d_max = d_max;
        opt.trunc_eps = d_max == 0 ? 1e-14 : 1e-12;
        opt.step_trunc_ceiling = 1.0;  // let heavy truncation through, we measure it
        MpsState m = mps_from_product(n, crystal_word(n));
        TebdRunInfo info = tebd_run(m, arr, sched, opt, {t_end},
                                    [](double, MpsState&, const TebdRunInfo&) {});
        if (d_max > 0) CHECK(info.max_bond_dim <= d_max);
        return mps_site_densities(m);
    };

    const Eigen::VectorXd ref = run_dens(0);
    double prev = 1e9;
    for (int d : {2, 4, 8, 16, 32}) {
        const double err = (run_dens(d) - ref).cwiseAbs().maxCoeff();
        INFO("d_max=" << d << " err=" << err);
        CHECK(err <= prev * 1.02 + 1e-12);
        prev = err;
    }
    CHECK(prev < 1e-6);  // d=32 is almost exact at this size
}

TEST_CASE("entanglement entropy is reflection symmetric and quench-ordered", "[mps]") {
    const AtomArray arr9 = standard_chain(9);
    const double omega = mhz_to_rad_us(2.0);
    const double t_end = 0.4;
    const auto sched = PulseSchedule::constant(omega, 0.0, t_end);

    // the odd/even layer split is itself slightly asymmetric under reflection
    // (O and E swap roles), so the residual asymmetry scales as dt^2 and needs
    // a resolved step to sit below 1e-6
    TebdOptions opt;
    opt.dt_us = 0.008 / omega;
    opt.d_max = 0;
    opt.trunc_eps = 1e-14;
    MpsState m = mps_from_product(9, crystal_word(9));
    tebd_run(m, arr9, sched, opt, {t_end}, [](double, MpsState&, const TebdRunInfo&) {});
    for (int cut = 1; cut < 9; ++cut) {
        const double s1 = entanglement_entropy(m, cut);
        const double s2 = entanglement_entropy(m, 9 - cut);
        CHECK(std::abs(s1 - s2) < 1e-6);
    }

    // the ordered initial state thermalizes slowly: its half-chain entropy
    // stays below the empty state's after the same resonant quench
    const int n = 13;
    const AtomArray arr = standard_chain(n);
    const double t_q = 0.5;
    const auto quench = PulseSchedule::constant(omega, 0.0, t_q);
    auto final_entropy = [&](ConfigWord w0) {
        MpsState s = mps_from_product(n, w0);
        tebd_run(s, arr, quench, opt, {t_q}, [](double, MpsState&, const TebdRunInfo&) {});
        return entanglement_entropy(s, n / 2);
    };
    const double s_crystal = final_entropy(crystal_word(n));
    const double s_empty = final_entropy(0);
    INFO("crystal " << s_crystal << " vs empty " << s_empty);
    CHECK(s_crystal < s_empty);
}

TEST_CASE("truncation ceiling aborts under-resolved runs", "[mps]") {
    const int n = 12;
    const AtomArray arr = standard_chain(n);
    const double omega = mhz_to_rad_us(2.0);
    const auto sched = PulseSchedule::constant(omega, 0.0, 0.5);

    TebdOptions opt;
    opt.dt_us = 0.02 / omega;
    opt.d_max = 2;
    MpsState m = mps_from_product(n, 0);
    CHECK_THROWS_AS(tebd_run(m, arr, sched, opt, {0.5},
                             [](double, MpsState&, const TebdRunInfo&) {}),
                    AccuracyError);

    // with the ceiling lifted the same run finishes and reports its loss
    opt.step_trunc_ceiling = 1.0;
    MpsState m2 = mps_from_product(n, 0);
    TebdRunInfo info = tebd_run(m2, arr, sched, opt, {0.5},
                                [](double, MpsState&, const TebdRunInfo&) {});
    CHECK(info.max_step_truncation > 1e-4);
    CHECK(info.max_bond_dim == 2);
}

TEST_CASE("schedule runner contract", "[mps]") {
    const int n = 5;
    const AtomArray arr = standard_chain(n);
    const double omega = mhz_to_rad_us(2.0);
    const auto sched = PulseSchedule::constant(omega, 0.0, 1.0);
    TebdOptions opt;
    opt.dt_us = 0.01;
    opt.d_max = 16;

    MpsState m = mps_from_product(n, crystal_word(n));
    std::vector<double> seen;
    TebdRunInfo info = tebd_run(m, arr, sched, opt, {0.25, 0.5},
                                [&](double t, MpsState&, const TebdRunInfo&) {
                                    seen.push_back(t);
                                });
    REQUIRE(seen == std::vector<double>{0.0, 0.25, 0.5});
    CHECK(info.n_steps == 50);

    MpsState m2 = mps_from_product(n, crystal_word(n));
    CHECK_THROWS_AS(tebd_run(m2, arr, sched, opt, {0.5, 0.25},
                             [](double, MpsState&, const TebdRunInfo&) {}),
                    ValidationError);
    CHECK_THROWS_AS(tebd_run(m2, arr, sched, opt, {2.0},
                             [](double, MpsState&, const TebdRunInfo&) {}),
                    ValidationError);
    CHECK_THROWS_AS(tebd_run(m2, arr, PulseSchedule::constant(omega, 0.0, 1.0),
                             TebdOptions{}, {0.5},
                             [](double, MpsState&, const TebdRunInfo&) {}),
                    ValidationError);
}
