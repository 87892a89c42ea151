#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "rydsim/basis.hpp"
#include "rydsim/errors.hpp"
#include "rydsim/linalg.hpp"
#include "rydsim/observables.hpp"
#include "rydsim/propagate.hpp"
#include "rydsim/rng.hpp"

namespace rydsim {

// Matrix-product state for a chain of two-level atoms.  site[i][p] is the
// (D_left x D_right) matrix for physical occupation p in {0, 1} at site i
// (0-based; site 0 is atom 1).  The state is kept center-canonical: sites
// left of `center` are left-orthonormal, sites right of it right-orthonormal,
// so the norm lives entirely in the center tensor.  All mutating operations
// in this header preserve that gauge.
struct MpsState {
    int n_atoms = 0;
    std::vector<std::array<Eigen::MatrixXcd, 2>> site;
    int center = 0;

    // bond b sits between sites b and b+1, b in [0, n_atoms-2]
    int bond_dim(int b) const { return static_cast<int>(site[b][0].cols()); }

    int max_bond_dim() const {
        int d = 1;
        for (int b = 0; b + 1 < n_atoms; ++b) d = std::max(d, bond_dim(b));
        return d;
    }

    double norm() const {
        double s2 = 0.0;
        for (const auto& t : site[center]) s2 += t.squaredNorm();
        return std::sqrt(s2);
    }
};

namespace detail {

// Flatten (bond, phys) -> rows alpha*2 + p, i.e. bond index slow.  This
// matches the bit order of the dense amplitude vector (atom 1 = most
// significant bit), so statevector reshapes line up without permutations.
inline Eigen::MatrixXcd stack_left(const std::array<Eigen::MatrixXcd, 2>& t) {
    const Eigen::Index dl = t[0].rows(), dr = t[0].cols();
    Eigen::MatrixXcd m(dl * 2, dr);
    for (int p = 0; p < 2; ++p)
        for (Eigen::Index a = 0; a < dl; ++a) m.row(a * 2 + p) = t[p].row(a);
    return m;
}

inline void unstack_left(const Eigen::MatrixXcd& m, std::array<Eigen::MatrixXcd, 2>& t) {
    const Eigen::Index dl = m.rows() / 2, dr = m.cols();
    for (int p = 0; p < 2; ++p) {
        t[p].resize(dl, dr);
        for (Eigen::Index a = 0; a < dl; ++a) t[p].row(a) = m.row(a * 2 + p);
    }
}

// Flatten (phys, bond) -> cols p*dr + beta, phys slow: plain horizontal stack.
inline Eigen::MatrixXcd stack_right(const std::array<Eigen::MatrixXcd, 2>& t) {
    Eigen::MatrixXcd m(t[0].rows(), t[0].cols() * 2);
    m << t[0], t[1];
    return m;
}

inline void unstack_right(const Eigen::MatrixXcd& m, std::array<Eigen::MatrixXcd, 2>& t) {
    const Eigen::Index dl = m.rows(), dr = m.cols() / 2;
    t[0] = m.leftCols(dr);
    t[1] = m.rightCols(dr);
}

struct ThinQr {
    Eigen::MatrixXcd q;  // m x k, orthonormal columns
    Eigen::MatrixXcd r;  // k x n, upper triangular
};

inline ThinQr qr_thin(const Eigen::MatrixXcd& m) {
    const Eigen::Index k = std::min(m.rows(), m.cols());
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(m);
    ThinQr out;
    out.q = qr.householderQ() * Eigen::MatrixXcd::Identity(m.rows(), k);
    out.r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    return out;
}

}  // namespace detail

inline void shift_center_right(MpsState& m) {
    const int c = m.center;
    if (c + 1 >= m.n_atoms) throw ShapeError("shift_center_right: center already at last site");
    auto qr = detail::qr_thin(detail::stack_left(m.site[c]));
    detail::unstack_left(qr.q, m.site[c]);
    for (auto& t : m.site[c + 1]) t = (qr.r * t).eval();
    m.center = c + 1;
}

inline void shift_center_left(MpsState& m) {
    const int c = m.center;
    if (c == 0) throw ShapeError("shift_center_left: center already at first site");
    // LQ via QR of the adjoint: M = L Q with row-orthonormal Q
    auto qr = detail::qr_thin(detail::stack_right(m.site[c]).adjoint());
    detail::unstack_right(qr.q.adjoint(), m.site[c]);
    const Eigen::MatrixXcd l = qr.r.adjoint();
    for (auto& t : m.site[c - 1]) t = (t * l).eval();
    m.center = c - 1;
}

inline void move_center(MpsState& m, int to) {
    if (to < 0 || to >= m.n_atoms) throw ValidationError("move_center: site out of range");
    while (m.center < to) shift_center_right(m);
    while (m.center > to) shift_center_left(m);
}

inline MpsState mps_from_product(int n_atoms, ConfigWord w) {
    if (n_atoms < 1 || n_atoms > 63) throw ValidationError("mps_from_product: bad atom count");
    if (w >> n_atoms) throw ShapeError("mps_from_product: word has bits beyond n_atoms");
    MpsState m;
    m.n_atoms = n_atoms;
    m.site.resize(n_atoms);
    for (int i = 0; i < n_atoms; ++i) {
        const int bit = config_bit(w, n_atoms, i + 1) ? 1 : 0;
        m.site[i][bit] = Eigen::MatrixXcd::Ones(1, 1);
        m.site[i][1 - bit] = Eigen::MatrixXcd::Zero(1, 1);
    }
    m.center = 0;
    return m;
}

// Exact (up to numerical rank) decomposition of a dense amplitude vector into
// an MPS by successive SVDs.  Constrained-basis states are embedded in the
// full product space first.  Intended for small n; cost ~ 2^n.
inline MpsState mps_from_statevector(const StateVector& psi, int d_max = 0) {
    const int n = psi.n_atoms();
    if (n > 24) throw ResourceError("mps_from_statevector: more than 24 atoms");
    const std::size_t dim = std::size_t{1} << n;
    Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dim));
    for (std::size_t k = 0; k < psi.basis->size(); ++k)
        amps[static_cast<Eigen::Index>(psi.basis->state(k))] = psi.amp[k];

    MpsState m;
    m.n_atoms = n;
    m.site.resize(n);
    // cur(alpha, rest): bond index alpha against the remaining sites' bits
    Eigen::MatrixXcd cur = amps.transpose();  // 1 x 2^n
    for (int i = 0; i + 1 < n; ++i) {
        const Eigen::Index dl = cur.rows();
        const Eigen::Index rest = cur.cols() / 2;
        Eigen::MatrixXcd th(dl * 2, rest);
        for (int p = 0; p < 2; ++p)
            for (Eigen::Index a = 0; a < dl; ++a)
                th.row(a * 2 + p) = cur.row(a).segment(p * rest, rest);
        auto sv = svd_thin(th);
        Eigen::Index k = sv.s.size();
        while (k > 1 && sv.s[k - 1] <= 1e-14 * sv.s[0]) --k;
        if (d_max > 0) k = std::min<Eigen::Index>(k, d_max);
        detail::unstack_left(sv.u.leftCols(k), m.site[i]);
        cur = sv.s.head(k).asDiagonal() * sv.vt.topRows(k);
    }
    m.site[n - 1][0] = cur.col(0);
    m.site[n - 1][1] = cur.col(1);
    m.center = n - 1;
    return m;
}

inline StateVector statevector_from_mps(const MpsState& m, const BasisSet& basis) {
    if (basis.n_atoms() != m.n_atoms)
        throw ShapeError("statevector_from_mps: basis atom count mismatch");
    if (basis.constrained())
        throw ValidationError("statevector_from_mps: need a full product basis");
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Ones(1, 1);
    for (int i = 0; i < m.n_atoms; ++i) {
        const Eigen::Index rows = acc.rows(), dr = m.site[i][0].cols();
        Eigen::MatrixXcd nxt(rows * 2, dr);
        for (int p = 0; p < 2; ++p) {
            const Eigen::MatrixXcd blk = acc * m.site[i][p];
            for (Eigen::Index s = 0; s < rows; ++s) nxt.row(s * 2 + p) = blk.row(s);
        }
        acc = std::move(nxt);
    }
    StateVector psi;
    psi.basis = &basis;
    psi.amp = acc.col(0);
    return psi;
}

inline std::complex<double> mps_overlap(const MpsState& a, const MpsState& b) {
    if (a.n_atoms != b.n_atoms) throw ShapeError("mps_overlap: atom count mismatch");
    Eigen::MatrixXcd e = Eigen::MatrixXcd::Ones(1, 1);
    for (int i = 0; i < a.n_atoms; ++i) {
        Eigen::MatrixXcd nxt = Eigen::MatrixXcd::Zero(a.site[i][0].cols(), b.site[i][0].cols());
        for (int p = 0; p < 2; ++p) nxt += a.site[i][p].adjoint() * e * b.site[i][p];
        e = std::move(nxt);
    }
    return e(0, 0);
}

struct GateResult {
    double discarded = 0.0;  // relative Schmidt weight dropped at this bond
    int bond_dim = 0;
};

// Apply a two-site gate at sites (i, i+1).  gate is 4x4 in the basis
// |p_i p_{i+1}> with row index p_i*2 + p_{i+1}.  The split is truncated to
// d_max singular values (0 = unlimited) and further trimmed while the
// discarded relative weight stays below trunc_eps; kept values are
// renormalized.  center_right chooses which site carries the weight after
// the split (pick the direction the sweep is moving).
inline GateResult apply_two_site_gate(MpsState& m, int i, const Eigen::Matrix4cd& gate,
                                      int d_max, double trunc_eps, bool center_right) {
    if (i < 0 || i + 1 >= m.n_atoms) throw ValidationError("apply_two_site_gate: bad bond index");
    if (m.center < i) move_center(m, i);
    else if (m.center > i + 1) move_center(m, i + 1);

    const Eigen::Index dl = m.site[i][0].rows();
    const Eigen::Index dr = m.site[i + 1][0].cols();

    std::array<std::array<Eigen::MatrixXcd, 2>, 2> th;
    for (int p = 0; p < 2; ++p)
        for (int q = 0; q < 2; ++q) th[p][q] = m.site[i][p] * m.site[i + 1][q];

    std::array<std::array<Eigen::MatrixXcd, 2>, 2> tg;
    for (int p = 0; p < 2; ++p)
        for (int q = 0; q < 2; ++q) {
            tg[p][q] = Eigen::MatrixXcd::Zero(dl, dr);
            for (int pp = 0; pp < 2; ++pp)
                for (int qq = 0; qq < 2; ++qq) {
                    const std::complex<double> g = gate(p * 2 + q, pp * 2 + qq);
                    if (g != 0.0) tg[p][q] += g * th[pp][qq];
                }
        }

    Eigen::MatrixXcd big(dl * 2, 2 * dr);
    for (int p = 0; p < 2; ++p)
        for (Eigen::Index a = 0; a < dl; ++a)
            for (int q = 0; q < 2; ++q) big.block(a * 2 + p, q * dr, 1, dr) = tg[p][q].row(a);

    auto sv = svd_thin(big);
    const Eigen::Index nsv = sv.s.size();
    const double total = sv.s.squaredNorm();
    if (!(total > 0.0)) throw NumericError("apply_two_site_gate: zero state after gate");

    Eigen::Index k = nsv;
    if (d_max > 0) k = std::min<Eigen::Index>(k, d_max);
    double dropped = sv.s.tail(nsv - k).squaredNorm();
    while (k > 1 && dropped + sv.s[k - 1] * sv.s[k - 1] <= trunc_eps * total) {
        dropped += sv.s[k - 1] * sv.s[k - 1];
        --k;
    }
    const double kept = total - dropped;
    const Eigen::VectorXd s = sv.s.head(k) / std::sqrt(kept);

    std::array<Eigen::MatrixXcd, 2> left, right;
    detail::unstack_left(sv.u.leftCols(k), left);
    detail::unstack_right(sv.vt.topRows(k), right);
    if (center_right) {
        m.site[i] = std::move(left);
        for (auto& t : right) t = (s.asDiagonal() * t).eval();
        m.site[i + 1] = std::move(right);
        m.center = i + 1;
    } else {
        for (auto& t : left) t = (t * s.asDiagonal()).eval();
        m.site[i] = std::move(left);
        m.site[i + 1] = std::move(right);
        m.center = i;
    }
    return {dropped / total, static_cast<int>(k)};
}

// von Neumann entropy, in nats, of the left block across the cut after site
// `cut` (1-based: cut in [1, n-1] splits sites 1..cut from cut+1..n).
inline double entanglement_entropy(MpsState& m, int cut) {
    if (cut < 1 || cut >= m.n_atoms) throw ValidationError("entanglement_entropy: bad cut");
    move_center(m, cut - 1);
    const Eigen::VectorXd s = svd_values(detail::stack_left(m.site[cut - 1]));
    const double total = s.squaredNorm();
    double ent = 0.0;
    for (Eigen::Index j = 0; j < s.size(); ++j) {
        const double p = s[j] * s[j] / total;
        if (p > 1e-300) ent -= p * std::log(p);
    }
    return ent;
}

inline Eigen::VectorXd mps_site_densities(MpsState& m) {
    move_center(m, 0);
    Eigen::VectorXd out(m.n_atoms);
    for (int i = 0; i < m.n_atoms; ++i) {
        const double w1 = m.site[i][1].squaredNorm();
        const double w0 = m.site[i][0].squaredNorm();
        out[i] = w1 / (w0 + w1);
        if (i + 1 < m.n_atoms) shift_center_right(m);
    }
    return out;
}

// ---------- diagonal MPOs (domain-wall counting) ----------

namespace detail {

struct DiagMpoTerm {
    int from = 0, to = 0;
    Eigen::Vector2d diag;  // per-occupation coefficient
};

struct DiagMpo {
    int width = 0;
    std::vector<std::vector<DiagMpoTerm>> site_terms;  // per site
};

// MPO for the wall count D = sum_i [n_i == n_{i+1}] + (1-n_1) + (1-n_N),
// written as (N-1)/2 + (1/2) sum m_i m_{i+1} + edge terms with m = 2n - 1.
// Bond states: 0 = not started, 1 = m/2 pending, 2 = finished.
inline DiagMpo wall_mpo(int n) {
    DiagMpo mpo;
    mpo.width = 3;
    mpo.site_terms.resize(n);
    const double c = n > 1 ? (n - 1) / (2.0 * n) : 0.0;
    for (int i = 0; i < n; ++i) {
        auto& t = mpo.site_terms[i];
        t.push_back({0, 0, {1.0, 1.0}});
        t.push_back({2, 2, {1.0, 1.0}});
        if (i + 1 < n) t.push_back({0, 1, {-0.5, 0.5}});
        if (i > 0) t.push_back({1, 2, {-1.0, 1.0}});
        Eigen::Vector2d one{c, c};
        if (i == 0) one[0] += 1.0;
        if (i == n - 1) one[0] += 1.0;
        t.push_back({0, 2, one});
    }
    return mpo;
}

inline DiagMpo mpo_square(const DiagMpo& a) {
    DiagMpo out;
    out.width = a.width * a.width;
    out.site_terms.resize(a.site_terms.size());
    for (std::size_t i = 0; i < a.site_terms.size(); ++i)
        for (const auto& t1 : a.site_terms[i])
            for (const auto& t2 : a.site_terms[i])
                out.site_terms[i].push_back({t1.from * a.width + t2.from,
                                             t1.to * a.width + t2.to,
                                             t1.diag.cwiseProduct(t2.diag)});
    return out;
}

inline double diag_mpo_expect(const MpsState& m, const DiagMpo& mpo) {
    std::vector<Eigen::MatrixXcd> env(mpo.width);
    env[0] = Eigen::MatrixXcd::Ones(1, 1);
    for (int i = 0; i < m.n_atoms; ++i) {
        std::vector<Eigen::MatrixXcd> nxt(mpo.width);
        for (const auto& t : mpo.site_terms[i]) {
            if (env[t.from].size() == 0) continue;
            Eigen::MatrixXcd add;
            for (int p = 0; p < 2; ++p) {
                if (t.diag[p] == 0.0) continue;
                Eigen::MatrixXcd c =
                    t.diag[p] * (m.site[i][p].adjoint() * (env[t.from] * m.site[i][p]));
                if (add.size() == 0) add = std::move(c);
                else add += c;
            }
            if (add.size() == 0) continue;
            if (nxt[t.to].size() == 0) nxt[t.to] = std::move(add);
            else nxt[t.to] += add;
        }
        env = std::move(nxt);
    }
    if (env[mpo.width - 1].size() == 0) return 0.0;
    const double n2 = m.norm();
    return env[mpo.width - 1](0, 0).real() / (n2 * n2);
}

}  // namespace detail

struct WallMoments {
    double mean = 0.0;
    double variance = 0.0;
};

inline WallMoments wall_moments(const MpsState& m) {
    const auto mpo = detail::wall_mpo(m.n_atoms);
    const double d1 = detail::diag_mpo_expect(m, mpo);
    const double d2 = detail::diag_mpo_expect(m, detail::mpo_square(mpo));
    return {d1, std::max(0.0, d2 - d1 * d1)};
}

// ---------- sampling ----------

inline ConfigWord mps_sample(MpsState& m, Rng& rng) {
    move_center(m, 0);
    Eigen::RowVectorXcd v = Eigen::RowVectorXcd::Ones(1);
    ConfigWord w = 0;
    for (int i = 0; i < m.n_atoms; ++i) {
        Eigen::RowVectorXcd v1 = v * m.site[i][1];
        Eigen::RowVectorXcd v0 = v * m.site[i][0];
        const double w1 = v1.squaredNorm(), w0 = v0.squaredNorm();
        const bool bit = rng.bernoulli(w1 / (w0 + w1));
        v = bit ? (v1 / std::sqrt(w1)) : (v0 / std::sqrt(w0));
        w = (w << 1) | static_cast<ConfigWord>(bit);
    }
    return w;
}

inline ShotSet mps_sample_shots(MpsState& m, std::size_t n_shots, Rng& rng) {
    ShotSet s;
    s.n_atoms = m.n_atoms;
    s.shots.reserve(n_shots);
    for (std::size_t k = 0; k < n_shots; ++k) s.shots.push_back(mps_sample(m, rng));
    return s;
}

}  // namespace rydsim
