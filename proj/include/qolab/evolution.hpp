#pragma once

#include <Eigen/Dense>
#include <cblas.h>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "qolab/fock.hpp"
#include "qolab/lattice.hpp"

namespace qolab {

/// Dense matrix of the evolution operator restricted to one charge sector,
/// expressed in the canonical sector basis.
struct EvolutionBlock {
    SectorCharge charge;
    SectorBasis basis;
    Eigen::MatrixXcd U;

    int dim() const { return basis.dim(); }
};

namespace detail {

// One (occupation, coefficient) contribution of an operator term.
struct Contribution {
    Occupation occ;
    double coeff;
};

inline double raise_factor(double q, int n_before) { return std::sqrt(1.0 - std::pow(q, 2.0 * (n_before + 1))); }
inline double lower_factor(double q, int n_before) { return std::sqrt(1.0 - std::pow(q, 2.0 * n_before)); }
inline double k_eigen(double q, int n) { return std::pow(q, n + 0.5); }

/// Image of one sector basis state under the conjugated partner of the
/// family-1 lowering: k_{3,w+e3} a+_{1,w+e1} + k_{1,w+e1} a+_{2,w} a-_{3,w+e3}.
inline void family1_partner(const TorusConfig& cfg, const ModelParams& p, Vertex w,
                            const Occupation& occ, std::vector<Contribution>& out) {
    const Vertex y = shift(cfg, w, Axis::E1);
    const Vertex z = shift(cfg, w, Axis::E3);
    const int i1y = mode_index(cfg, {1, y});
    const int i2w = mode_index(cfg, {2, w});
    const int i3z = mode_index(cfg, {3, z});

    out.push_back({occ.with(i1y, +1),
                   raise_factor(p.q, occ.count(i1y)) * k_eigen(p.q, occ.count(i3z))});
    if (int n3 = occ.count(i3z); n3 > 0)
        out.push_back({occ.with(i3z, -1).with(i2w, +1),
                       lower_factor(p.q, n3) * raise_factor(p.q, occ.count(i2w)) *
                           k_eigen(p.q, occ.count(i1y))});
}

/// Partner of the family-3 lowering:
/// k'_{1,w+e1} a+_{3,w+e3} + k'_{3,w+e3} a+_{2,w} a-_{1,w+e1}.
inline void family3_partner(const TorusConfig& cfg, const ModelParams& p, Vertex w,
                            const Occupation& occ, std::vector<Contribution>& out) {
    const Vertex y = shift(cfg, w, Axis::E1);
    const Vertex z = shift(cfg, w, Axis::E3);
    const int i1y = mode_index(cfg, {1, y});
    const int i2w = mode_index(cfg, {2, w});
    const int i3z = mode_index(cfg, {3, z});

    out.push_back({occ.with(i3z, +1),
                   -raise_factor(p.q, occ.count(i3z)) * k_eigen(p.q, occ.count(i1y))});
    if (int n1 = occ.count(i1y); n1 > 0)
        out.push_back({occ.with(i1y, -1).with(i2w, +1),
                       -lower_factor(p.q, n1) * raise_factor(p.q, occ.count(i2w)) *
                           k_eigen(p.q, occ.count(i3z))});
}

/// Partner of the family-2 lowering:
/// a+_{1,w+e1} a+_{3,w+e3} + k_{1,w+e1} k'_{3,w+e3} a+_{2,w}.
inline void family2_partner(const TorusConfig& cfg, const ModelParams& p, Vertex w,
                            const Occupation& occ, std::vector<Contribution>& out) {
    const Vertex y = shift(cfg, w, Axis::E1);
    const Vertex z = shift(cfg, w, Axis::E3);
    const int i1y = mode_index(cfg, {1, y});
    const int i2w = mode_index(cfg, {2, w});
    const int i3z = mode_index(cfg, {3, z});

    out.push_back({occ.with(i1y, +1).with(i3z, +1),
                   raise_factor(p.q, occ.count(i1y)) * raise_factor(p.q, occ.count(i3z))});
    out.push_back({occ.with(i2w, +1),
                   -raise_factor(p.q, occ.count(i2w)) * k_eigen(p.q, occ.count(i1y)) *
                       k_eigen(p.q, occ.count(i3z))});
}

/// One admissible way to peel a quantum off a sector state.
struct Lowering {
    int family;      // 1, 2 or 3
    Vertex w;
    Occupation rest;           // state with one quantum removed
    double c;                  // decomposition constant: |state> = (1/c) LHS-op |rest>
    SectorCharge rest_charge;  // sector of `rest`
};

inline Lowering make_lowering(const TorusConfig& cfg, const ModelParams& p,
                              const Occupation& occ, int family, Vertex w) {
    const int iw = mode_index(cfg, {family, w});
    const int n = occ.count(iw);
    const int n2 = occ.count(mode_index(cfg, {2, w}));
    Lowering lo;
    lo.family = family;
    lo.w = w;
    lo.rest = occ.with(iw, -1);
    lo.rest_charge = charges(cfg, lo.rest);
    if (family == 1)      lo.c =  k_eigen(p.q, n2) * lower_factor(p.q, n);
    else if (family == 3) lo.c = -k_eigen(p.q, n2) * lower_factor(p.q, n);
    else                  lo.c =  lower_factor(p.q, n);
    return lo;
}

/// All admissible lowerings in priority order: family 1 at the smallest
/// occupied vertex first, then family 3, then family 2; vertices scanned in
/// the canonical (l, k) order within a family.
inline std::vector<Lowering> lowerings(const TorusConfig& cfg, const ModelParams& p,
                                       const Occupation& occ) {
    std::vector<Lowering> out;
    const int m2 = cfg.M * cfg.M;
    for (int family : {1, 3, 2})
        for (int j = 0; j < m2; ++j) {
            int idx = (family - 1) * m2 + j;
            if (occ.count(idx) > 0)
                out.push_back(make_lowering(cfg, p, occ, family, mode_from_index(cfg, idx).v));
        }
    return out;
}

inline void apply_partner(const TorusConfig& cfg, const ModelParams& p, const Lowering& lo,
                          const Occupation& occ, std::vector<Contribution>& out) {
    if (lo.family == 1)      family1_partner(cfg, p, lo.w, occ, out);
    else if (lo.family == 3) family3_partner(cfg, p, lo.w, occ, out);
    else                     family2_partner(cfg, p, lo.w, occ, out);
}

}  // namespace detail

/// Builds evolution blocks sector by sector, reusing lower sectors. The
/// operator is pinned by its conjugation action on the three raising
/// families together with the vacuum fixed point; each sector column is
/// obtained by peeling one quantum and pushing the partner operator through
/// the already-built lower sector.
class EvolutionBuilder {
  public:
    EvolutionBuilder(TorusConfig cfg, ModelParams params, std::size_t cap = 50000)
        : cfg_(cfg), params_(params), cap_(cap) {
        validate(cfg_);
        validate(params_);
    }

    const TorusConfig& config() const { return cfg_; }
    const ModelParams& params() const { return params_; }

    /// Dense block for one sector; cached across calls.
    const EvolutionBlock& block(const SectorCharge& ch) {
        auto it = blocks_.find(ch);
        if (it != blocks_.end()) return it->second;
        if (ch.Q1 < 0 || ch.Q3 < 0) throw std::invalid_argument("EvolutionBuilder: negative charge");

        EvolutionBlock blk;
        blk.charge = ch;
        blk.basis = enumerate_sector(cfg_, ch, cap_);
        const int d = blk.basis.dim();
        blk.U = Eigen::MatrixXcd::Zero(d, d);

        if (ch == SectorCharge{0, 0}) {
            blk.U(0, 0) = 1.0;
            return blocks_.emplace(ch, std::move(blk)).first->second;
        }

        for (int j = 0; j < d; ++j) {
            auto los = detail::lowerings(cfg_, params_, blk.basis.states[j]);
            write_column(blk, j, los.front());
        }
        return blocks_.emplace(ch, std::move(blk)).first->second;
    }

    /// Rebuild column `j` of sector `ch` using lowering choice `pick`
    /// (index into the admissible list). Used for consistency probes.
    Eigen::VectorXcd column_via(const SectorCharge& ch, int j, std::size_t pick) {
        const EvolutionBlock& blk = block(ch);
        auto los = detail::lowerings(cfg_, params_, blk.basis.states[j]);
        if (pick >= los.size()) throw std::out_of_range("column_via: no such lowering");
        EvolutionBlock tmp;
        tmp.charge = ch;
        tmp.basis = blk.basis;
        tmp.U = Eigen::MatrixXcd::Zero(blk.dim(), blk.dim());
        write_column(tmp, j, los[pick]);
        return tmp.U.col(j);
    }

    /// Number of admissible lowerings for basis state `j` of sector `ch`.
    std::size_t lowering_count(const SectorCharge& ch, int j) {
        const EvolutionBlock& blk = block(ch);
        return detail::lowerings(cfg_, params_, blk.basis.states[j]).size();
    }

  private:
    void write_column(EvolutionBlock& blk, int j, const detail::Lowering& lo) {
        const EvolutionBlock& lower = block(lo.rest_charge);
        const int li = lower.basis.index(lo.rest);
        std::vector<detail::Contribution> contribs;
        for (int r = 0; r < lower.dim(); ++r) {
            const cplx a = lower.U(r, li);
            if (a == 0.0) continue;
            contribs.clear();
            detail::apply_partner(cfg_, params_, lo, lower.basis.states[r], contribs);
            for (const auto& c : contribs)
                blk.U(blk.basis.index(c.occ), j) += a * (c.coeff / lo.c);
        }
    }

    TorusConfig cfg_;
    ModelParams params_;
    std::size_t cap_;
    std::map<SectorCharge, EvolutionBlock> blocks_;
};

/// Convenience wrapper: build one sector block from scratch.
inline EvolutionBlock build_evolution(const TorusConfig& cfg, const ModelParams& p,
                                      const SectorCharge& ch, std::size_t cap = 50000) {
    EvolutionBuilder b(cfg, p, cap);
    return b.block(ch);
}

/// Apply a sector block to a sparse state. The state must be supported
/// entirely inside the block's sector.
inline StateVec apply_evolution(const EvolutionBlock& blk, const StateVec& s) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(blk.dim());
    for (const auto& [occ, a] : s.amp) v(blk.basis.index(occ)) += a;
    Eigen::VectorXcd w = blk.U * v;
    StateVec out;
    for (int i = 0; i < blk.dim(); ++i)
        if (w(i) != 0.0) out.amp[blk.basis.states[i]] = w(i);
    return out;
}

/// Max-norm defect of U^dag U - I for one block (BLAS-backed).
inline double unitarity_defect(const EvolutionBlock& blk) {
    const int n = blk.dim();
    Eigen::MatrixXcd G(n, n);
    const cplx one(1.0, 0.0), zero(0.0, 0.0);
    cblas_zgemm(CblasColMajor, CblasConjTrans, CblasNoTrans, n, n, n, &one, blk.U.data(), n,
                blk.U.data(), n, &zero, G.data(), n);
    G.diagonal().array() -= 1.0;
    return G.cwiseAbs().maxCoeff();
}

/// Largest column deviation when `samples` random columns of the sector are
/// rebuilt through an alternative admissible lowering. The overdetermined
/// conjugation relations force every path to agree; the returned defect
/// measures how well the numerics realize that.
inline double check_path_consistency(EvolutionBuilder& builder, const SectorCharge& ch,
                                     int samples, std::uint64_t seed = 42) {
    const EvolutionBlock& blk = builder.block(ch);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> col(0, blk.dim() - 1);
    double worst = 0.0;
    for (int t = 0; t < samples; ++t) {
        int j = col(rng);
        std::size_t nlo = builder.lowering_count(ch, j);
        if (nlo < 2) continue;
        std::size_t pick = 1 + rng() % (nlo - 1);
        Eigen::VectorXcd alt = builder.column_via(ch, j, pick);
        worst = std::max(worst, (alt - blk.U.col(j)).cwiseAbs().maxCoeff());
    }
    return worst;
}

/// Evaluates single evolution columns without materializing sector matrices;
/// used where a sector is too large to store densely. Memoized per state.
class SparseEvolution {
  public:
    SparseEvolution(TorusConfig cfg, ModelParams params) : cfg_(cfg), params_(params) {
        validate(cfg_);
        validate(params_);
    }

    /// U applied to one occupation basis state, as a sparse state.
    const StateVec& column(const Occupation& occ) {
        auto it = memo_.find(occ);
        if (it != memo_.end()) return it->second;

        StateVec result;
        if (occ == vacuum_occupation()) {
            result = vacuum_state();
        } else {
            auto lo = detail::lowerings(cfg_, params_, occ).front();
            const StateVec& below = column(lo.rest);
            std::vector<detail::Contribution> contribs;
            for (const auto& [ro, ra] : below.amp) {
                contribs.clear();
                detail::apply_partner(cfg_, params_, lo, ro, contribs);
                for (const auto& c : contribs) result.add(c.occ, ra * (c.coeff / lo.c));
            }
        }
        return memo_.emplace(occ, std::move(result)).first->second;
    }

    /// U applied to a sparse state.
    StateVec apply(const StateVec& s) {
        StateVec out;
        for (const auto& [occ, a] : s.amp) {
            StateVec scaled = column(occ);
            scaled *= a;
            out += scaled;
        }
        return out;
    }

  private:
    TorusConfig cfg_;
    ModelParams params_;
    std::map<Occupation, StateVec> memo_;
};

}  // namespace qolab
