#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "qolab/evolution.hpp"
#include "qolab/spectral.hpp"

namespace qolab {

// ---------------------------------------------------------------------------
// one-particle plane-wave states
// ---------------------------------------------------------------------------

/// A+_v(u) |vac>: an impurity at v plus a photon-pair tail along the two
/// axes, weighted by g(u) u^{-k}.  u need not satisfy the drift equation; the
/// state is an eigenstate of U exactly when it does.
inline StateVec one_particle_state(const TorusConfig& cfg, const ModelParams& p, Vertex v,
                                   cplx u) {
    const cplx g = (1.0 + p.q * u) / (1.0 - p.q * p.q);
    const StateVec vac = vacuum_state();
    StateVec out = apply_raise(cfg, p, {2, v}, vac);
    for (int k = 1; k <= cfg.M; ++k) {
        StateVec pair = apply_raise(cfg, p, {1, shift(cfg, v, Axis::E1, k)}, vac);
        pair = apply_raise(cfg, p, {3, shift(cfg, v, Axis::E3, k)}, pair);
        pair *= g * std::pow(u, -k);
        out += pair;
    }
    return out.prune();
}

/// ||U psi - lambda psi|| / ||psi||
inline double eigen_residual(const EvolutionBlock& blk, const StateVec& psi, cplx lambda) {
    const double nrm = norm(psi);
    if (nrm == 0.0) throw std::invalid_argument("eigen_residual: zero state");
    StateVec r = apply_evolution(blk, psi);
    StateVec scaled = psi;
    scaled *= -lambda;
    r += scaled;
    return norm(r) / nrm;
}

// ---------------------------------------------------------------------------
// multi-particle wave-function system
// ---------------------------------------------------------------------------
//
// For anchors v_1..v_N and spectral parameters u_1..u_N the trial state is a
// sum over parameter assignments (permutations) of products of one-particle
// tails whose per-step weights come from piecewise tables.  Each anchor's
// table has break positions determined by the other anchors; segment values
// between breaks are unknowns, pinned at both ends:
//   first segment:  alpha(u) = (1+qu)/(1-q^2)
//   last segment:   beta(u)  = (q+u) u^M / (1-q^2)
// Matching conditions across breaks (chain equations) plus a pairing
// condition for diagonally offset anchors close the system; they are
// satisfiable exactly when the parameters solve the conjectured spectral
// family of the anchor geometry.

using Assignment = std::vector<int>;  // anchor slot -> index into the u list

struct AnchorBreaks {
    std::vector<int> delta;  // sorted break positions in 1..M-1
    std::vector<int> other;  // anchor index that caused each break
};

struct DiagonalPair {
    int a = 0, b = 0;    // anchor indices, a < b
    int da = 0, db = 0;  // table positions entering the pairing condition
};

struct AppendixSystem {
    TorusConfig cfg;
    ModelParams params;
    GeometryClass kind = GeometryClass::Line;
    std::vector<Vertex> anchors;
    std::vector<cplx> u;

    std::vector<Assignment> assignments;  // lexicographic, [0] = identity
    std::map<Assignment, int> assignment_lookup;
    std::vector<AnchorBreaks> breaks;  // per anchor
    std::vector<DiagonalPair> pairs;

    // unknown layout: [ C(assignment 0..P-1) | interior segment values ],
    // gauge C(identity) = 1
    std::vector<int> interior_base;
    int unknown_count = 0;

    int n_anchors() const { return static_cast<int>(anchors.size()); }
    int c_count() const { return static_cast<int>(assignments.size()); }

    int assignment_index(const Assignment& a) const {
        auto it = assignment_lookup.find(a);
        if (it == assignment_lookup.end())
            throw std::logic_error("appendix system: unknown assignment");
        return it->second;
    }

    cplx alpha(cplx uu) const { return (1.0 + params.q * uu) / (1.0 - params.q * params.q); }
    cplx beta(cplx uu) const {
        return (params.q + uu) * std::pow(uu, cfg.M) / (1.0 - params.q * params.q);
    }

    cplx u_at(int anchor, int iu) const { return u[assignments[iu][anchor]]; }

    int interior_index(int anchor, int iu, int seg) const {
        const int nb = static_cast<int>(breaks[anchor].delta.size());
        return c_count() + interior_base[anchor] + iu * (nb - 1) + (seg - 1);
    }

    /// Table value of anchor's tail at displacement k (1..M) under assignment
    /// iu, reading interior segments from z.
    cplx table_value(int anchor, int iu, int k, const Eigen::VectorXcd& z) const {
        const auto& d = breaks[anchor].delta;
        const int nb = static_cast<int>(d.size());
        const int seg = static_cast<int>(std::lower_bound(d.begin(), d.end(), k) - d.begin());
        const cplx uu = u_at(anchor, iu);
        if (seg == 0) return alpha(uu);
        if (seg == nb) return beta(uu);
        return z(interior_index(anchor, iu, seg));
    }

    int equation_count() const {
        int n = 0;
        for (int a = 0; a < n_anchors(); ++a)
            n += c_count() * std::max<int>(1, static_cast<int>(breaks[a].delta.size()));
        n += static_cast<int>(pairs.size()) * (c_count() / 2);
        return n;
    }

    /// Residuals of all matching and pairing conditions, each divided by a
    /// fixed scale so the magnitudes are comparable across equations.
    Eigen::VectorXcd residual(const Eigen::VectorXcd& z) const {
        std::vector<cplx> out;
        out.reserve(static_cast<std::size_t>(equation_count()));
        const double q = params.q;
        for (int a = 0; a < n_anchors(); ++a) {
            const auto& br = breaks[a];
            const int nb = static_cast<int>(br.delta.size());
            for (int iu = 0; iu < c_count(); ++iu) {
                const cplx C = z(iu);
                const cplx ua = u_at(a, iu);
                if (nb == 0) {
                    const double s =
                        std::max({1.0, std::abs(alpha(ua)), std::abs(beta(ua))});
                    out.push_back(C * (beta(ua) - alpha(ua)) / s);
                    continue;
                }
                for (int j = 1; j <= nb; ++j) {
                    const int other = br.other[j - 1];
                    const cplx uo = u_at(other, iu);
                    Assignment swapped = assignments[iu];
                    std::swap(swapped[a], swapped[other]);
                    const int iu2 = assignment_index(swapped);
                    const cplx S = kernel_S_u(q, uo, ua);
                    const cplx K = (q + ua) * (1.0 + q * ua) / (q * (ua - uo));
                    const cplx w = std::pow(ua / uo, br.delta[j - 1]) * K;
                    const cplx gj = (j == nb) ? beta(ua) : z(interior_index(a, iu, j));
                    const cplx gjm = (j == 1) ? alpha(ua) : z(interior_index(a, iu, j - 1));
                    const cplx gjm2 =
                        (j == 1) ? alpha(u_at(a, iu2)) : z(interior_index(a, iu2, j - 1));
                    const double s = std::max({1.0, std::abs(S), std::abs(w)});
                    out.push_back((C * gj - S * C * gjm + w * z(iu2) * gjm2) / s);
                }
            }
        }
        for (const auto& pr : pairs) {
            std::vector<char> seen(static_cast<std::size_t>(c_count()), 0);
            for (int iu = 0; iu < c_count(); ++iu) {
                if (seen[static_cast<std::size_t>(iu)]) continue;
                Assignment swapped = assignments[iu];
                std::swap(swapped[pr.a], swapped[pr.b]);
                const int iu2 = assignment_index(swapped);
                seen[static_cast<std::size_t>(iu)] = 1;
                seen[static_cast<std::size_t>(iu2)] = 1;
                auto term = [&](int ii) {
                    return z(ii) * table_value(pr.a, ii, pr.da, z) *
                           table_value(pr.b, ii, pr.db, z) *
                           std::pow(u_at(pr.a, ii), -pr.da) *
                           std::pow(u_at(pr.b, ii), -pr.db);
                };
                auto phase = [&](int ii) {
                    return std::abs(std::pow(u_at(pr.a, ii), -pr.da) *
                                    std::pow(u_at(pr.b, ii), -pr.db));
                };
                const double s = std::max({1.0, phase(iu), phase(iu2)});
                out.push_back((term(iu) + term(iu2)) / s);
            }
        }
        return Eigen::Map<Eigen::VectorXcd>(out.data(), static_cast<long>(out.size()));
    }
};

inline AppendixSystem build_appendix_system(const TorusConfig& cfg, const ModelParams& p,
                                            const std::vector<Vertex>& anchors,
                                            const std::vector<cplx>& u) {
    const int N = static_cast<int>(anchors.size());
    if (N < 1 || N > 4)
        throw std::invalid_argument("appendix system: 1 to 4 anchors supported");
    if (static_cast<int>(u.size()) != N)
        throw std::invalid_argument("appendix system: need one parameter per anchor");
    for (int i = 0; i < N; ++i)
        for (int j = i + 1; j < N; ++j)
            if (std::abs(u[i] - u[j]) < 1e-9)
                throw std::invalid_argument(
                    "appendix system: spectral parameters must be distinct");

    AppendixSystem sys;
    sys.cfg = cfg;
    sys.params = p;
    sys.anchors = anchors;
    sys.u = u;

    const Geometry geom = classify_geometry(cfg, anchors);
    sys.kind = geom.cls;
    if (geom.cls == GeometryClass::Generic)
        throw std::invalid_argument(
            "appendix system: generic anchor sets have no table construction");
    if (geom.cls == GeometryClass::Coincident && N > 1)
        throw std::invalid_argument(
            "appendix system: coincident anchors are handled by the direct construction");

    Assignment id(static_cast<std::size_t>(N));
    std::iota(id.begin(), id.end(), 0);
    Assignment perm = id;
    do {
        sys.assignment_lookup.emplace(perm, static_cast<int>(sys.assignments.size()));
        sys.assignments.push_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));

    sys.breaks.resize(static_cast<std::size_t>(N));
    const int M = cfg.M;
    for (int a = 0; a < N; ++a) {
        std::vector<std::pair<int, int>> ds;  // (break position, causing anchor)
        for (int b = 0; b < N; ++b) {
            if (b == a) continue;
            const int dn = ((anchors[static_cast<std::size_t>(b)].k -
                             anchors[static_cast<std::size_t>(a)].k) %
                                M +
                            M) %
                           M;
            const int dm = ((anchors[static_cast<std::size_t>(b)].l -
                             anchors[static_cast<std::size_t>(a)].l) %
                                M +
                            M) %
                           M;
            if (dn == 0 && dm == 0)
                throw std::invalid_argument("appendix system: repeated anchor");
            if (dm == 0) {
                ds.emplace_back(dn, b);
            } else if (dn == 0) {
                ds.emplace_back(dm, b);
            } else if (a < b) {
                sys.pairs.push_back({a, b, dm, (M - dn) % M});
                sys.pairs.push_back({a, b, dn, (M - dm) % M});
            }
        }
        std::sort(ds.begin(), ds.end());
        for (std::size_t i = 1; i < ds.size(); ++i)
            if (ds[i].first == ds[i - 1].first)
                throw std::invalid_argument("appendix system: degenerate break schedule");
        for (auto& [d, b] : ds) {
            sys.breaks[static_cast<std::size_t>(a)].delta.push_back(d);
            sys.breaks[static_cast<std::size_t>(a)].other.push_back(b);
        }
    }
    for (const auto& pr : sys.pairs)
        if (pr.da == 0 || pr.db == 0)
            throw std::invalid_argument("appendix system: degenerate pairing offset");

    sys.interior_base.resize(static_cast<std::size_t>(N), 0);
    int interiors = 0;
    for (int a = 0; a < N; ++a) {
        sys.interior_base[static_cast<std::size_t>(a)] = interiors;
        const int nb = static_cast<int>(sys.breaks[static_cast<std::size_t>(a)].delta.size());
        interiors += sys.c_count() * std::max(0, nb - 1);
    }
    sys.unknown_count = sys.c_count() + interiors;
    return sys;
}

// ---------------------------------------------------------------------------
// coefficient solve
// ---------------------------------------------------------------------------

struct AnsatzCoefficients {
    Eigen::VectorXcd z;          // full unknown vector, z(0) = C(identity) = 1
    Eigen::VectorXd conditions;  // |each scaled residual| at the optimum
    double condition_norm = std::numeric_limits<double>::infinity();
    int rank_deficiency = 0;  // small singular values of the Jacobian at the optimum
    bool converged = false;
};

/// Least-squares solve of the matching conditions under the gauge C(id) = 1.
/// The chain equations are linear in the C's once interior values are fixed,
/// so the first start seeds interiors by continuation from the break-free
/// table; random restarts follow.
inline AnsatzCoefficients solve_coefficients(const AppendixSystem& sys,
                                             std::uint64_t seed = 42) {
    AnsatzCoefficients out;
    const int nz = sys.unknown_count;
    const int nv = nz - 1;

    auto assemble = [&](const Eigen::VectorXcd& y) {
        Eigen::VectorXcd z(nz);
        z(0) = 1.0;
        for (int i = 0; i < nv; ++i) z(i + 1) = y(i);
        return z;
    };

    auto finish = [&](const Eigen::VectorXcd& zf) {
        out.z = zf;
        Eigen::VectorXcd r = sys.residual(out.z);
        out.conditions = r.cwiseAbs();
        out.condition_norm = out.conditions.size() ? out.conditions.maxCoeff() : 0.0;
        out.converged = out.condition_norm < 1e-8;
    };

    if (nv == 0) {
        finish(assemble(Eigen::VectorXcd()));
        out.converged = true;
        return out;
    }

    ResidualFn f = [&](const Eigen::VectorXcd& y) { return sys.residual(assemble(y)); };

    std::vector<Eigen::VectorXcd> starts;
    {
        Eigen::VectorXcd y0 = Eigen::VectorXcd::Ones(nv);
        for (int a = 0; a < sys.n_anchors(); ++a) {
            const int nb = static_cast<int>(sys.breaks[static_cast<std::size_t>(a)].delta.size());
            for (int iu = 0; iu < sys.c_count(); ++iu)
                for (int j = 1; j < nb; ++j)
                    y0(sys.interior_index(a, iu, j) - 1) = sys.alpha(sys.u_at(a, iu));
        }
        starts.push_back(y0);
        starts.push_back(Eigen::VectorXcd::Ones(nv));
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> box(-1.0, 1.0);
    for (int t = 0; t < 6; ++t) {
        Eigen::VectorXcd y(nv);
        for (int i = 0; i < nv; ++i) y(i) = cplx(box(rng), box(rng));
        starts.push_back(y);
    }

    LeastSquaresResult best;
    for (const auto& s : starts) {
        LeastSquaresResult r = least_squares_solve(f, s, 150);
        if (r.residual_norm < best.residual_norm) best = r;
        if (best.residual_norm < 1e-13) break;
    }

    finish(assemble(best.z));

    Eigen::MatrixXcd J(out.conditions.size(), nv);
    for (int j = 0; j < nv; ++j) {
        Eigen::VectorXcd yp = best.z, ym = best.z;
        yp(j) += 1e-7;
        ym(j) -= 1e-7;
        J.col(j) = (f(yp) - f(ym)) / 2e-7;
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(J);
    const auto& sv = svd.singularValues();
    if (sv.size() > 0) {
        const double cutoff = 1e-8 * std::max(1.0, sv(0));
        for (int i = 0; i < sv.size(); ++i)
            if (sv(i) < cutoff) ++out.rank_deficiency;
    }
    return out;
}

// ---------------------------------------------------------------------------
// state construction
// ---------------------------------------------------------------------------

struct BetheState {
    StateVec psi;
    cplx lambda{};                          // predicted eigenvalue, product of the u's
    std::vector<Occupation> special_sites;  // occupations whose amplitude was fit
};

namespace detail {

inline Eigen::VectorXcd to_dense(const SectorBasis& basis, const StateVec& s) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(basis.dim());
    for (const auto& [occ, a] : s.amp) v(basis.index(occ)) = a;
    return v;
}

/// Fit amplitudes along `directions` so that (U - lambda) annihilates
/// known + directions * w.  A vanishing known part makes the problem
/// homogeneous; the smallest right singular vector is used instead.
inline Eigen::VectorXcd fit_special_amplitudes(const EvolutionBlock& blk, cplx lambda,
                                               const Eigen::VectorXcd& known,
                                               const Eigen::MatrixXcd& directions) {
    Eigen::MatrixXcd A(directions.rows(), directions.cols());
    for (long c = 0; c < directions.cols(); ++c)
        A.col(c) = blk.U * directions.col(c) - lambda * directions.col(c);
    if (known.norm() > 1e-14) {
        Eigen::VectorXcd b = -(blk.U * known - lambda * known);
        return A.colPivHouseholderQr().solve(b);
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A, Eigen::ComputeThinV);
    return svd.matrixV().col(directions.cols() - 1);
}

}  // namespace detail

/// Expand the trial state from the solved tables.  Terms that would put two
/// quanta on one mode are collected as special occupations; with an evolution
/// block their amplitudes are fit by least squares against (U - lambda),
/// without one they stay at zero.
inline BetheState construct_state(const TorusConfig& cfg, const ModelParams& p,
                                  const AppendixSystem& sys, const AnsatzCoefficients& co,
                                  const EvolutionBlock* blk = nullptr) {
    const int N = sys.n_anchors();
    const int M = cfg.M;
    BetheState out;
    out.lambda = 1.0;
    for (const auto& uu : sys.u) out.lambda *= uu;

    const StateVec vac = vacuum_state();
    std::map<Occupation, char> specials;
    for (int iu = 0; iu < sys.c_count(); ++iu) {
        const cplx C = co.z(iu);
        std::vector<int> choice(static_cast<std::size_t>(N), 0);  // 0 = impurity
        for (;;) {
            cplx amp = C;
            std::vector<ModeId> modes;
            for (int i = 0; i < N; ++i) {
                const Vertex v = sys.anchors[static_cast<std::size_t>(i)];
                const int k = choice[static_cast<std::size_t>(i)];
                if (k == 0) {
                    modes.push_back({2, v});
                } else {
                    amp *= sys.table_value(i, iu, k, co.z) * std::pow(sys.u_at(i, iu), -k);
                    modes.push_back({1, shift(cfg, v, Axis::E1, k)});
                    modes.push_back({3, shift(cfg, v, Axis::E3, k)});
                }
            }
            std::map<int, int> counts;
            bool collision = false;
            for (const auto& m : modes)
                if (++counts[mode_index(cfg, m)] >= 2) collision = true;
            // equal nonzero displacements put the two tails in contact; those
            // amplitudes obey a drift ladder the static tables cannot encode
            for (int i = 0; i < N && !collision; ++i)
                for (int j = i + 1; j < N; ++j)
                    if (choice[static_cast<std::size_t>(i)] >= 1 &&
                        choice[static_cast<std::size_t>(i)] ==
                            choice[static_cast<std::size_t>(j)])
                        collision = true;
            if (collision) {
                Occupation occ;
                for (const auto& [mi, c] : counts) occ.n.push_back({mi, c});
                specials.emplace(occ, 0);
            } else {
                StateVec term = vac;
                for (const auto& m : modes) term = apply_raise(cfg, p, m, term);
                term *= amp;
                out.psi += term;
            }
            std::size_t i = 0;
            while (i < choice.size() && ++choice[i] > M) choice[i++] = 0;
            if (i == choice.size()) break;
        }
    }
    out.psi.prune();

    for (const auto& kv : specials) out.special_sites.push_back(kv.first);
    if (!out.special_sites.empty() && blk != nullptr) {
        Eigen::VectorXcd known = detail::to_dense(blk->basis, out.psi);
        Eigen::MatrixXcd dirs = Eigen::MatrixXcd::Zero(
            blk->U.rows(), static_cast<long>(out.special_sites.size()));
        for (std::size_t s = 0; s < out.special_sites.size(); ++s)
            dirs(blk->basis.index(out.special_sites[s]), static_cast<long>(s)) = 1.0;
        Eigen::VectorXcd w = detail::fit_special_amplitudes(*blk, out.lambda, known, dirs);
        for (std::size_t s = 0; s < out.special_sites.size(); ++s)
            out.psi.add(out.special_sites[s], w(static_cast<long>(s)));
        out.psi.prune();
    }
    return out;
}

/// Two particles sharing one anchor.  Separated-pair components carry the
/// symmetrized product amplitudes with one relative exchange coefficient;
/// that coefficient and every amplitude on a shared vertex or doubly
/// occupied mode are fit against (U - lambda).  The evolution block is
/// required because the fit has no closed form.
inline BetheState construct_coincident_pair(const TorusConfig& cfg, const ModelParams& p,
                                            Vertex v, cplx u1, cplx u2,
                                            const EvolutionBlock& blk) {
    if (std::abs(u1 - u2) < 1e-9)
        throw std::invalid_argument("coincident pair: spectral parameters must be distinct");
    const int M = cfg.M;
    BetheState out;
    out.lambda = u1 * u2;
    const cplx g1 = (1.0 + p.q * u1) / (1.0 - p.q * p.q);
    const cplx g2 = (1.0 + p.q * u2) / (1.0 - p.q * p.q);

    const StateVec vac = vacuum_state();
    auto pair_pair = [&](int d1, int d2, cplx amp) {
        StateVec t = apply_raise(cfg, p, {1, shift(cfg, v, Axis::E1, d1)}, vac);
        t = apply_raise(cfg, p, {3, shift(cfg, v, Axis::E3, d1)}, t);
        t = apply_raise(cfg, p, {1, shift(cfg, v, Axis::E1, d2)}, t);
        t = apply_raise(cfg, p, {3, shift(cfg, v, Axis::E3, d2)}, t);
        t *= amp;
        return t;
    };

    StateVec direct, exchanged;
    for (int d1 = 1; d1 < M; ++d1)
        for (int d2 = d1 + 1; d2 < M; ++d2) {
            direct += pair_pair(d1, d2, g1 * std::pow(u1, -d1) * g2 * std::pow(u2, -d2));
            exchanged += pair_pair(d1, d2, g1 * std::pow(u1, -d2) * g2 * std::pow(u2, -d1));
        }
    direct.prune();
    exchanged.prune();

    auto occ_of = [&](std::initializer_list<ModeId> ms) {
        std::map<int, int> counts;
        for (const auto& m : ms) ++counts[mode_index(cfg, m)];
        Occupation o;
        for (const auto& [mi, c] : counts) o.n.push_back({mi, c});
        return o;
    };

    std::vector<Occupation> free_sites;
    free_sites.push_back(occ_of({{2, v}, {2, v}}));
    for (int d = 1; d <= M; ++d)
        free_sites.push_back(occ_of(
            {{2, v}, {1, shift(cfg, v, Axis::E1, d)}, {3, shift(cfg, v, Axis::E3, d)}}));
    for (int d = 1; d <= M; ++d)
        free_sites.push_back(occ_of({{1, shift(cfg, v, Axis::E1, d)},
                                     {1, shift(cfg, v, Axis::E1, d)},
                                     {3, shift(cfg, v, Axis::E3, d)},
                                     {3, shift(cfg, v, Axis::E3, d)}}));
    for (int d = 1; d < M; ++d)
        free_sites.push_back(occ_of({{1, v},
                                     {3, v},
                                     {1, shift(cfg, v, Axis::E1, d)},
                                     {3, shift(cfg, v, Axis::E3, d)}}));

    // the eigenstate is sought as the null direction of (U - lambda) inside
    // the span of the symmetrized products and the free amplitudes; this
    // stays well posed when direct and exchanged parts collapse onto the
    // same occupation
    const long nf = static_cast<long>(free_sites.size());
    Eigen::MatrixXcd span = Eigen::MatrixXcd::Zero(blk.U.rows(), nf + 2);
    span.col(0) = detail::to_dense(blk.basis, direct);
    span.col(1) = detail::to_dense(blk.basis, exchanged);
    for (long s = 0; s < nf; ++s)
        span(blk.basis.index(free_sites[static_cast<std::size_t>(s)]), s + 2) = 1.0;

    Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(span);
    qr.setThreshold(1e-12);
    const long rank = qr.rank();
    Eigen::MatrixXcd Q =
        qr.householderQ() * Eigen::MatrixXcd::Identity(blk.U.rows(), rank);
    Eigen::MatrixXcd A = blk.U * Q - out.lambda * Q;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A, Eigen::ComputeThinV);
    Eigen::VectorXcd y = svd.matrixV().col(rank - 1);
    Eigen::VectorXcd psi = Q * y;

    out.psi = StateVec{};
    for (int i = 0; i < blk.dim(); ++i)
        if (std::abs(psi(i)) > 1e-14) out.psi.add(blk.basis.states[static_cast<std::size_t>(i)], psi(i));
    out.psi.prune();
    out.special_sites = std::move(free_sites);
    return out;
}

}  // namespace qolab
