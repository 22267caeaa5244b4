#pragma once

#include <algorithm>
#include <array>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace qolab {

/// Square M x M torus. All vertex arithmetic is mod M on both axes.
struct TorusConfig {
    int M = 2;
};

inline void validate(const TorusConfig& cfg) {
    if (cfg.M < 2) throw std::invalid_argument("TorusConfig: M must be >= 2");
}

inline int mod(int a, int m) {
    int r = a % m;
    return r < 0 ? r + m : r;
}

/// Lattice site (k, l) = k*e1 + l*e3, both coordinates reduced to [0, M).
struct Vertex {
    int k = 0;
    int l = 0;

    friend bool operator==(const Vertex&, const Vertex&) = default;
};

/// Order consistent with the mode ordering (family, l, k): l major, k minor.
inline bool vertex_less(const Vertex& a, const Vertex& b) {
    return a.l != b.l ? a.l < b.l : a.k < b.k;
}

enum class Axis { E1, E3 };  // e1 shifts k, e3 shifts l

inline Vertex shift(const TorusConfig& cfg, Vertex v, Axis e, int steps = 1) {
    if (e == Axis::E1) v.k = mod(v.k + steps, cfg.M);
    else               v.l = mod(v.l + steps, cfg.M);
    return v;
}

/// v + a*e1 + b*e3 reduced mod M.
inline Vertex translate(const TorusConfig& cfg, Vertex v, int a, int b) {
    return Vertex{mod(v.k + a, cfg.M), mod(v.l + b, cfg.M)};
}

/// One oscillator mode: family 1, 2 or 3 attached to a vertex.
struct ModeId {
    int family = 1;  // 1, 2 or 3
    Vertex v;

    friend bool operator==(const ModeId&, const ModeId&) = default;
};

/// Linear index realizing the canonical (family, l, k) mode order.
inline int mode_index(const TorusConfig& cfg, const ModeId& m) {
    return (m.family - 1) * cfg.M * cfg.M + m.v.l * cfg.M + m.v.k;
}

inline ModeId mode_from_index(const TorusConfig& cfg, int idx) {
    const int m2 = cfg.M * cfg.M;
    return ModeId{idx / m2 + 1, Vertex{(idx % m2) % cfg.M, (idx % m2) / cfg.M}};
}

inline int mode_count(const TorusConfig& cfg) { return 3 * cfg.M * cfg.M; }

enum class GeometryClass { Coincident, Line, Grid, Generic };

inline const char* to_string(GeometryClass c) {
    switch (c) {
        case GeometryClass::Coincident: return "coincident";
        case GeometryClass::Line: return "line";
        case GeometryClass::Grid: return "grid";
        case GeometryClass::Generic: return "generic";
    }
    return "generic";
}

/// Classified placement of N base vertices.
///
/// For Line and Grid the placement is a full Cartesian product
/// {n_list} x {m_list}; axes are canonicalized so K = |n_list| >= L = |m_list|
/// (a line is the L = 1 case, kept as its own class). `axes_swapped` records
/// whether e1/e3 roles were exchanged to achieve K >= L.
struct Geometry {
    GeometryClass cls = GeometryClass::Generic;
    std::vector<Vertex> positions;   // as given, order preserved
    std::vector<int> n_list;         // sorted distinct first-axis coordinates
    std::vector<int> m_list;         // sorted distinct second-axis coordinates
    bool axes_swapped = false;
    int K = 0;
    int L = 0;
};

/// Classify base positions as coincident / line / grid(K>=L) / generic.
inline Geometry classify_geometry(const TorusConfig& cfg, const std::vector<Vertex>& pos) {
    validate(cfg);
    if (pos.empty()) throw std::invalid_argument("classify_geometry: empty position list");
    for (const auto& p : pos)
        if (p.k < 0 || p.k >= cfg.M || p.l < 0 || p.l >= cfg.M)
            throw std::invalid_argument("classify_geometry: vertex out of range");

    Geometry g;
    g.positions = pos;

    bool all_same = std::all_of(pos.begin(), pos.end(), [&](const Vertex& p) { return p == pos[0]; });
    if (all_same) {
        g.cls = GeometryClass::Coincident;
        g.n_list = {pos[0].k};
        g.m_list = {pos[0].l};
        g.K = g.L = 1;
        return g;
    }

    std::set<int> ks, ls;
    std::set<std::pair<int, int>> uniq;
    for (const auto& p : pos) {
        ks.insert(p.k);
        ls.insert(p.l);
        uniq.insert({p.k, p.l});
    }
    // product structure requires all points distinct and the full K x L grid
    if (uniq.size() == pos.size() && uniq.size() == ks.size() * ls.size()) {
        g.n_list.assign(ks.begin(), ks.end());
        g.m_list.assign(ls.begin(), ls.end());
        if (g.n_list.size() < g.m_list.size()) {
            std::swap(g.n_list, g.m_list);
            g.axes_swapped = true;
        }
        g.K = static_cast<int>(g.n_list.size());
        g.L = static_cast<int>(g.m_list.size());
        g.cls = g.L == 1 ? GeometryClass::Line : GeometryClass::Grid;
        return g;
    }

    g.cls = GeometryClass::Generic;
    g.n_list.assign(ks.begin(), ks.end());
    g.m_list.assign(ls.begin(), ls.end());
    g.K = static_cast<int>(g.n_list.size());
    g.L = static_cast<int>(g.m_list.size());
    return g;
}

/// One entry of a break schedule: distance from the anchor along one axis,
/// with the provenance needed to map it back to a grid slot.
struct Delta {
    int delta = 0;      // in 1..M-1
    Axis axis = Axis::E1;  // E1: horizontal (n-list) difference, E3: vertical
    int src = 0;        // index into the (re-anchored) n_list or m_list
};

/// Sorted break positions of the coefficient chain anchored at
/// (n_list[0], m_list[0]). Lists must already be re-anchored (lifted) so that
/// entries increase from the anchor; coordinates may exceed M by up to M-1.
struct DeltaSchedule {
    std::vector<Delta> deltas;  // strictly increasing in delta
};

/// Rotate a sorted coordinate list so entry `start` comes first, lifting the
/// wrapped-around entries by M: {a_s, .., a_end, a_0 + M, .., a_{s-1} + M}.
inline std::vector<int> cyclic_reanchor(const std::vector<int>& list, int start, int M) {
    const int n = static_cast<int>(list.size());
    if (start < 0 || start >= n) throw std::invalid_argument("cyclic_reanchor: bad start index");
    std::vector<int> out;
    out.reserve(n);
    for (int i = start; i < n; ++i) out.push_back(list[i]);
    for (int i = 0; i < start; ++i) out.push_back(list[i] + M);
    return out;
}

/// Build the break schedule for the chain anchored at (n_list[0], m_list[0]).
/// Throws on a degenerate placement where a horizontal and a vertical
/// difference coincide (the chain segments would merge).
inline DeltaSchedule delta_schedule(const TorusConfig& cfg,
                                    const std::vector<int>& n_list,
                                    const std::vector<int>& m_list) {
    validate(cfg);
    if (n_list.empty() || m_list.empty())
        throw std::invalid_argument("delta_schedule: empty coordinate list");
    DeltaSchedule s;
    for (int j = 1; j < static_cast<int>(n_list.size()); ++j) {
        int d = n_list[j] - n_list[0];
        if (d <= 0 || d >= cfg.M) throw std::invalid_argument("delta_schedule: n-list not ascending within one period");
        s.deltas.push_back({d, Axis::E1, j});
    }
    for (int j = 1; j < static_cast<int>(m_list.size()); ++j) {
        int d = m_list[j] - m_list[0];
        if (d <= 0 || d >= cfg.M) throw std::invalid_argument("delta_schedule: m-list not ascending within one period");
        s.deltas.push_back({d, Axis::E3, j});
    }
    std::sort(s.deltas.begin(), s.deltas.end(), [](const Delta& a, const Delta& b) { return a.delta < b.delta; });
    for (size_t i = 1; i < s.deltas.size(); ++i)
        if (s.deltas[i].delta == s.deltas[i - 1].delta)
            throw std::invalid_argument("delta_schedule: degenerate placement, equal horizontal and vertical differences");
    return s;
}

}  // namespace qolab
