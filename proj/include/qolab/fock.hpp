#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include "qolab/lattice.hpp"

namespace qolab {

using cplx = std::complex<double>;

/// Deformation parameter of the oscillator algebra, restricted to the
/// unitary regime 0 < q < 1 where (a^-)^dag = a^+ in the orthonormal basis.
struct ModelParams {
    double q = 0.5;
};

inline void validate(const ModelParams& p) {
    if (!(p.q > 0.0 && p.q < 1.0)) throw std::invalid_argument("ModelParams: q must lie in (0,1)");
}

/// Multi-mode occupation number state in canonical sparse form:
/// (mode index, count) pairs sorted by mode index, counts >= 1 only.
/// Ordering is lexicographic over the implied dense count vector.
struct Occupation {
    std::vector<std::pair<int, int>> n;  // sorted by first, second >= 1

    int count(int mode) const {
        for (const auto& [m, c] : n)
            if (m == mode) return c;
        return 0;
    }

    int total() const {
        int t = 0;
        for (const auto& [m, c] : n) t += c;
        return t;
    }

    /// Returns the occupation with `mode` changed by dn (dn = +1/-1).
    /// Canonical form is preserved; dropping below zero is a logic error.
    Occupation with(int mode, int dn) const {
        Occupation out;
        out.n.reserve(n.size() + 1);
        bool placed = false;
        for (const auto& [m, c] : n) {
            if (m == mode) {
                int nc = c + dn;
                if (nc < 0) throw std::logic_error("Occupation: count below zero");
                if (nc > 0) out.n.push_back({m, nc});
                placed = true;
            } else {
                if (!placed && mode < m && dn > 0) {
                    out.n.push_back({mode, dn});
                    placed = true;
                }
                out.n.push_back({m, c});
            }
        }
        if (!placed) {
            if (dn < 0) throw std::logic_error("Occupation: lowering an empty mode");
            if (dn > 0) out.n.push_back({mode, dn});
        }
        return out;
    }

    friend bool operator==(const Occupation&, const Occupation&) = default;

    // lexicographic over the dense count vector: first differing mode decides
    friend bool operator<(const Occupation& a, const Occupation& b) {
        size_t i = 0, j = 0;
        while (i < a.n.size() && j < b.n.size()) {
            if (a.n[i].first < b.n[j].first) return false;  // a occupied where b is empty
            if (b.n[j].first < a.n[i].first) return true;
            if (a.n[i].second != b.n[j].second) return a.n[i].second < b.n[j].second;
            ++i, ++j;
        }
        return j < b.n.size();
    }
};

inline Occupation vacuum_occupation() { return {}; }

/// Conserved charge pair (Q1, Q3) = (sum n1 + n2, sum n3 + n2).
struct SectorCharge {
    int Q1 = 0;
    int Q3 = 0;

    friend bool operator==(const SectorCharge&, const SectorCharge&) = default;
    friend auto operator<=>(const SectorCharge& a, const SectorCharge& b) {
        return std::pair{a.Q1, a.Q3} <=> std::pair{b.Q1, b.Q3};
    }
};

inline SectorCharge charges(const TorusConfig& cfg, const Occupation& occ) {
    SectorCharge ch;
    const int m2 = cfg.M * cfg.M;
    for (const auto& [mode, c] : occ.n) {
        int family = mode / m2 + 1;
        if (family == 1) ch.Q1 += c;
        else if (family == 2) { ch.Q1 += c; ch.Q3 += c; }
        else ch.Q3 += c;
    }
    return ch;
}

/// Sparse state: occupation -> complex amplitude.
struct StateVec {
    std::map<Occupation, cplx> amp;

    StateVec& add(const Occupation& occ, cplx a) {
        auto [it, fresh] = amp.try_emplace(occ, a);
        if (!fresh) it->second += a;
        return *this;
    }

    StateVec& operator+=(const StateVec& o) {
        for (const auto& [occ, a] : o.amp) add(occ, a);
        return *this;
    }

    StateVec& operator*=(cplx s) {
        for (auto& [occ, a] : amp) a *= s;
        return *this;
    }

    /// Drop amplitudes below eps in magnitude (canonical form upkeep).
    StateVec& prune(double eps = 1e-14) {
        for (auto it = amp.begin(); it != amp.end();)
            it = std::abs(it->second) < eps ? amp.erase(it) : std::next(it);
        return *this;
    }
};

inline StateVec vacuum_state() {
    StateVec s;
    s.amp[vacuum_occupation()] = 1.0;
    return s;
}

/// <a|b> with the convention conjugate-linear in the first argument.
inline cplx inner(const StateVec& a, const StateVec& b) {
    // walk the smaller map
    const StateVec& small = a.amp.size() <= b.amp.size() ? a : b;
    const StateVec& large = a.amp.size() <= b.amp.size() ? b : a;
    cplx r = 0.0;
    for (const auto& [occ, v] : small.amp) {
        auto it = large.amp.find(occ);
        if (it == large.amp.end()) continue;
        r += (&small == &a) ? std::conj(v) * it->second : std::conj(it->second) * v;
    }
    return r;
}

inline double norm(const StateVec& s) { return std::sqrt(std::abs(inner(s, s))); }

/// a^+ on every component: a^+|n> = sqrt(1 - q^{2(n+1)}) |n+1>.
inline StateVec apply_raise(const TorusConfig& cfg, const ModelParams& p, const ModeId& mode,
                            const StateVec& s) {
    const int idx = mode_index(cfg, mode);
    StateVec out;
    for (const auto& [occ, a] : s.amp) {
        int n = occ.count(idx);
        out.add(occ.with(idx, +1), a * std::sqrt(1.0 - std::pow(p.q, 2.0 * (n + 1))));
    }
    return out;
}

/// a^- on every component: a^-|n> = sqrt(1 - q^{2n}) |n-1>, a^-|0> = 0.
inline StateVec apply_lower(const TorusConfig& cfg, const ModelParams& p, const ModeId& mode,
                            const StateVec& s) {
    const int idx = mode_index(cfg, mode);
    StateVec out;
    for (const auto& [occ, a] : s.amp) {
        int n = occ.count(idx);
        if (n == 0) continue;
        out.add(occ.with(idx, -1), a * std::sqrt(1.0 - std::pow(p.q, 2.0 * n)));
    }
    return out;
}

/// Diagonal k (primed = false) or k' (primed = true):
/// k|n> = q^{n + 1/2}|n>,  k'|n> = -q^{n + 1/2}|n>.
inline StateVec apply_k(const TorusConfig& cfg, const ModelParams& p, const ModeId& mode,
                        const StateVec& s, bool primed = false) {
    const int idx = mode_index(cfg, mode);
    StateVec out;
    for (const auto& [occ, a] : s.amp) {
        double ev = std::pow(p.q, occ.count(idx) + 0.5);
        out.amp[occ] = a * (primed ? -ev : ev);
    }
    return out;
}

/// Ordered basis of one conserved-charge sector.
struct SectorBasis {
    SectorCharge charge;
    std::vector<Occupation> states;       // canonical (lexicographic) order
    std::map<Occupation, int> index_of;

    int dim() const { return static_cast<int>(states.size()); }

    int index(const Occupation& occ) const {
        auto it = index_of.find(occ);
        if (it == index_of.end()) throw std::out_of_range("SectorBasis: state not in sector");
        return it->second;
    }
};

namespace detail {

inline unsigned long long compositions_count(int total, int slots) {
    // C(total + slots - 1, slots - 1), capped well above any desk-scale use
    unsigned long long r = 1;
    for (int i = 1; i <= slots - 1; ++i) {
        r = r * (total + i) / i;
        if (r > (1ull << 62)) return 1ull << 62;
    }
    return r;
}

/// Enumerate sparse count-vectors of `total` quanta over modes
/// [first_mode, first_mode + slots), appending to each a continuation call.
template <typename F>
void for_each_composition(int total, int first_mode, int slots,
                          std::vector<std::pair<int, int>>& prefix, F&& fn) {
    if (slots == 0) {
        if (total == 0) fn(prefix);
        return;
    }
    if (slots == 1) {
        if (total > 0) {
            prefix.push_back({first_mode, total});
            fn(prefix);
            prefix.pop_back();
        } else {
            fn(prefix);
        }
        return;
    }
    for (int c = 0; c <= total; ++c) {
        if (c > 0) prefix.push_back({first_mode, c});
        for_each_composition(total - c, first_mode + 1, slots - 1, prefix, fn);
        if (c > 0) prefix.pop_back();
    }
}

}  // namespace detail

/// Number of occupation states in sector (Q1, Q3) without materializing them.
inline unsigned long long sector_count(const TorusConfig& cfg, const SectorCharge& ch) {
    const int m2 = cfg.M * cfg.M;
    unsigned long long total = 0;
    for (int s = 0; s <= std::min(ch.Q1, ch.Q3); ++s)
        total += detail::compositions_count(s, m2) *
                 detail::compositions_count(ch.Q1 - s, m2) *
                 detail::compositions_count(ch.Q3 - s, m2);
    return total;
}

/// Enumerate sector (Q1, Q3) in canonical order. Throws when the dimension
/// exceeds `cap` (resource guard; the caller sees the count in the message).
inline SectorBasis enumerate_sector(const TorusConfig& cfg, const SectorCharge& ch,
                                    std::size_t cap = 50000) {
    validate(cfg);
    if (ch.Q1 < 0 || ch.Q3 < 0) throw std::invalid_argument("enumerate_sector: negative charge");
    const auto count = sector_count(cfg, ch);
    if (count > cap)
        throw std::length_error("enumerate_sector: sector dimension " + std::to_string(count) +
                                " exceeds cap " + std::to_string(cap));

    const int m2 = cfg.M * cfg.M;
    SectorBasis basis;
    basis.charge = ch;
    basis.states.reserve(count);

    std::vector<std::pair<int, int>> work;
    for (int s = 0; s <= std::min(ch.Q1, ch.Q3); ++s) {
        detail::for_each_composition(ch.Q1 - s, 0, m2, work, [&](auto& pre1) {
            detail::for_each_composition(s, m2, m2, pre1, [&](auto& pre2) {
                detail::for_each_composition(ch.Q3 - s, 2 * m2, m2, pre2, [&](auto& full) {
                    basis.states.push_back(Occupation{full});
                });
            });
        });
    }
    std::sort(basis.states.begin(), basis.states.end());
    for (int i = 0; i < basis.dim(); ++i) basis.index_of[basis.states[i]] = i;
    return basis;
}

}  // namespace qolab
