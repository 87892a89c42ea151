#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rydsim/errors.hpp"

namespace rydsim {

// A classical configuration of N two-level atoms packed into a word: atom 1
// (leftmost site) sits at the most significant of the low N bits, bit value 1
// means |r>.  With that packing, ascending word order equals lexicographic
// order over (s_1, ..., s_N), and adjacent sites occupy adjacent bits.
using ConfigWord = std::uint64_t;

inline bool config_bit(ConfigWord w, int n_atoms, int site_1based) {
    return (w >> (n_atoms - site_1based)) & 1ull;
}

inline int excitation_count(ConfigWord w) { return std::popcount(w); }

inline bool violates_blockade(ConfigWord w) { return (w & (w >> 1)) != 0; }

inline std::string config_to_string(ConfigWord w, int n_atoms) {
    std::string s(n_atoms, '0');
    for (int i = 1; i <= n_atoms; ++i)
        if (config_bit(w, n_atoms, i)) s[i - 1] = '1';
    return s;
}

inline ConfigWord config_from_string(const std::string& s) {
    if (s.empty() || s.size() > 63) throw ShapeError("config string length must be in [1, 63]");
    ConfigWord w = 0;
    for (char c : s) {
        if (c != '0' && c != '1') throw ValidationError("config string must be over {0,1}");
        w = (w << 1) | (c == '1' ? 1ull : 0ull);
    }
    return w;
}

// Perfectly ordered configuration |101010...>, excited on odd sites.
inline ConfigWord crystal_word(int n_atoms) {
    ConfigWord w = 0;
    for (int i = 0; i < n_atoms; ++i) w = (w << 1) | (i % 2 == 0 ? 1ull : 0ull);
    return w;
}

// Domain-wall count: adjacent like pairs plus one wall for each edge in |g>.
// Identically congruent to N-1 mod 2, so odd chains carry even counts.
inline int count_domain_walls(ConfigWord w, int n_atoms) {
    const int n = n_atoms;
    int same = 0;
    if (n >= 2) {
        const ConfigWord mask = (n >= 64) ? ~0ull : ((1ull << (n - 1)) - 1ull);
        const int differing = std::popcount((w ^ (w >> 1)) & mask);
        same = (n - 1) - differing;
    }
    const int n_first = static_cast<int>((w >> (n - 1)) & 1ull);
    const int n_last = static_cast<int>(w & 1ull);
    return same + (1 - n_first) + (1 - n_last);
}

inline std::uint64_t fibonacci(int k) {
    if (k < 1) throw ValidationError("fibonacci: k must be >= 1");
    std::uint64_t a = 1, b = 1;  // F(1), F(2)
    for (int i = 3; i <= k; ++i) {
        std::uint64_t c = a + b;
        a = b;
        b = c;
    }
    return k == 1 ? 1 : b;
}

// Enumerated Hilbert-space basis, either the full 2^N product space or the
// blockade-constrained subspace with no two adjacent excitations (dimension
// F(N+2), the Fibonacci growth phi^N that makes N=51 exact treatment hopeless).
class BasisSet {
public:
    static constexpr int max_constrained_atoms = 28;
    static constexpr int max_full_atoms = 20;

    static BasisSet enumerate(int n_atoms, bool constrained) {
        if (n_atoms < 1) throw ValidationError("basis: n_atoms must be >= 1");
        if (constrained && n_atoms > max_constrained_atoms)
            throw ResourceError("constrained basis capped at " +
                                std::to_string(max_constrained_atoms) + " atoms, requested " +
                                std::to_string(n_atoms));
        if (!constrained && n_atoms > max_full_atoms)
            throw ResourceError("full basis capped at " + std::to_string(max_full_atoms) +
                                " atoms, requested " + std::to_string(n_atoms));
        BasisSet b;
        b.n_atoms_ = n_atoms;
        b.constrained_ = constrained;
        if (constrained) {
            b.states_.reserve(fibonacci(n_atoms + 2));
            ConfigWord prefix = 0;
            b.emit_constrained(prefix, n_atoms, false);
        }
        return b;
    }

    int n_atoms() const { return n_atoms_; }
    bool constrained() const { return constrained_; }

    std::size_t size() const {
        return constrained_ ? states_.size() : (std::size_t{1} << n_atoms_);
    }

    ConfigWord state(std::size_t k) const {
        return constrained_ ? states_[k] : static_cast<ConfigWord>(k);
    }

    std::optional<std::size_t> index_of(ConfigWord w) const {
        if (w >> n_atoms_) throw ShapeError("index_of: word has bits beyond n_atoms");
        if (!constrained_) return static_cast<std::size_t>(w);
        auto it = std::lower_bound(states_.begin(), states_.end(), w);
        if (it == states_.end() || *it != w) return std::nullopt;
        return static_cast<std::size_t>(it - states_.begin());
    }

private:
    void emit_constrained(ConfigWord prefix, int remaining, bool last_r) {
        if (remaining == 0) {
            states_.push_back(prefix);
            return;
        }
        emit_constrained(prefix << 1, remaining - 1, false);
        if (!last_r) emit_constrained((prefix << 1) | 1ull, remaining - 1, true);
    }

    int n_atoms_ = 0;
    bool constrained_ = false;
    std::vector<ConfigWord> states_;
};

}  // namespace rydsim
