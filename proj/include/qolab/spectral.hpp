#pragma once

// Spectral side of the laboratory: rapidity lifts, the two-particle kernel,
// the elementary symmetric functions built from it, one-particle eigenvalues,
// and a seeded Newton multistart for the conjectured spectral equations.

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "qolab/lattice.hpp"
#include "qolab/laurent.hpp"

namespace qolab {

using cplx = std::complex<double>;

inline cplx lift_x(double q, cplx u) { return (q + u) / (1.0 + q * u); }

inline cplx lift_X(double q, int M, cplx u) { return std::pow(u, M) * lift_x(q, u); }

// kernel in rapidity shape variables
inline cplx kernel_S(double q, cplx xi, cplx xj) {
    return (xi / q - q * xj) / (xi - xj);
}

// same kernel written directly in the u variables
inline cplx kernel_S_u(double q, cplx ui, cplx uj) {
    return (q + ui + q * q * ui + q * ui * uj) / (q * (ui - uj));
}

inline Eigen::MatrixXcd kernel_matrix(double q, const std::vector<cplx>& x) {
    const int N = static_cast<int>(x.size());
    Eigen::MatrixXcd S(N, N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) S(i, j) = i == j ? cplx(0.0) : kernel_S(q, x[i], x[j]);
    return S;
}

// F_n = sum over n-element index sets I of prod_{i in I} X_i prod_{i in I, j not in I} S_ij
inline cplx elementary_F(const std::vector<cplx>& X, const Eigen::MatrixXcd& S, int n) {
    const int N = static_cast<int>(X.size());
    if (n < 0 || n > N) return 0.0;
    cplx total = 0.0;
    for (unsigned mask = 0; mask < (1u << N); ++mask) {
        if (std::popcount(mask) != n) continue;
        cplx term = 1.0;
        for (int i = 0; i < N; ++i) {
            if (!(mask >> i & 1)) continue;
            term *= X[i];
            for (int j = 0; j < N; ++j)
                if (!(mask >> j & 1)) term *= S(i, j);
        }
        total += term;
    }
    return total;
}

// roots of u^{M+1} + q u^M - q u - 1 = 0, the one-particle eigenvalues;
// u = 1 is always among them
inline std::vector<cplx> one_particle_roots(double q, int M) {
    const int deg = M + 1;
    // companion matrix of the monic polynomial
    Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(deg, deg);
    std::vector<double> coeff(deg, 0.0);  // c_0 .. c_{deg-1}
    coeff[0] = -1.0;
    coeff[1] = -q;
    coeff[M] = q;
    for (int i = 1; i < deg; ++i) C(i, i - 1) = 1.0;
    for (int i = 0; i < deg; ++i) C(i, deg - 1) = -coeff[i];
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(C, false);
    std::vector<cplx> roots(es.eigenvalues().data(), es.eigenvalues().data() + deg);

    auto p = [&](cplx u) {
        cplx v = 0.0;
        for (int i = deg; i >= 0; --i) v = v * u + (i == deg ? 1.0 : coeff[i]);
        return v;
    };
    auto dp = [&](cplx u) {
        cplx v = 0.0;
        for (int i = deg; i >= 1; --i)
            v = v * u + static_cast<double>(i) * (i == deg ? 1.0 : coeff[i]);
        return v;
    };
    for (auto& u : roots)
        for (int it = 0; it < 4; ++it) u -= p(u) / dp(u);

    std::sort(roots.begin(), roots.end(), [](cplx a, cplx b) {
        if (a.real() != b.real()) return a.real() > b.real();
        return a.imag() < b.imag();
    });
    return roots;
}

// conjectured right-hand sides P_1..P_N for the spectral equations of a
// position geometry (P_0 = 1 is omitted)
inline std::vector<double> conjectured_rhs(const Geometry& g, int N, double q) {
    std::vector<double> P(N);
    switch (g.cls) {
        case GeometryClass::Line:
            for (int n = 1; n <= N; ++n) P[n - 1] = static_cast<double>(binomial(N, n));
            break;
        case GeometryClass::Coincident:
        case GeometryClass::Generic:
            for (int n = 1; n <= N; ++n) P[n - 1] = conjectured_generic(N, n).eval(q);
            break;
        case GeometryClass::Grid: {
            if (N != g.K * g.L) throw std::invalid_argument("grid wants N = K*L particles");
            auto coeffs = conjectured_grid(g.K, g.L);
            for (int n = 1; n <= N; ++n) P[n - 1] = coeffs[n].eval(q);
            break;
        }
    }
    return P;
}

// ---- seeded Newton multistart -------------------------------------------

using ResidualFn = std::function<Eigen::VectorXcd(const Eigen::VectorXcd&)>;

struct SolveOptions {
    int attempts = 400;
    int max_iter = 80;
    double tol = 1e-11;
    double dedup_eps = 1e-6;
    double radius = 2.5;
    std::uint64_t seed = 42;
    // whether the system is invariant under permuting the unknowns; when set,
    // solutions are canonically sorted and deduplicated as multisets
    bool symmetric = true;
    std::vector<Eigen::VectorXcd> seeded_starts;  // tried before random ones
};

namespace detail {

inline double res_norm(const Eigen::VectorXcd& r) {
    double n = r.norm();
    return std::isfinite(n) ? n : std::numeric_limits<double>::infinity();
}

// central difference in a real direction equals the complex derivative for
// holomorphic residuals
inline Eigen::MatrixXcd numeric_jacobian(const ResidualFn& f, const Eigen::VectorXcd& z,
                                         double h = 1e-7) {
    const int n = static_cast<int>(z.size());
    Eigen::MatrixXcd J(n, n);
    for (int j = 0; j < n; ++j) {
        Eigen::VectorXcd zp = z, zm = z;
        zp(j) += h;
        zm(j) -= h;
        J.col(j) = (f(zp) - f(zm)) / (2.0 * h);
    }
    return J;
}

inline Eigen::VectorXcd sorted_components(Eigen::VectorXcd z) {
    std::sort(z.data(), z.data() + z.size(), [](cplx a, cplx b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return z;
}

// equality of component multisets via greedy matching; robust against sort
// order flips between nearly equal components
inline bool same_multiset(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b, double eps) {
    const int n = static_cast<int>(a.size());
    std::vector<bool> used(n, false);
    for (int i = 0; i < n; ++i) {
        bool found = false;
        for (int j = 0; j < n; ++j) {
            if (used[j] || std::abs(a(i) - b(j)) >= eps) continue;
            used[j] = true;
            found = true;
            break;
        }
        if (!found) return false;
    }
    return true;
}

}  // namespace detail

inline std::optional<Eigen::VectorXcd> newton_solve(const ResidualFn& f, Eigen::VectorXcd z,
                                                    const SolveOptions& opt = {}) {
    double r = detail::res_norm(f(z));
    if (!std::isfinite(r)) return std::nullopt;
    // keep iterating past the acceptance tolerance while steps still improve,
    // so converged solutions are polished to machine precision
    for (int it = 0; it < opt.max_iter; ++it) {
        if (r <= 1e-15) break;
        Eigen::MatrixXcd J = detail::numeric_jacobian(f, z);
        if (!J.allFinite()) return std::nullopt;
        Eigen::VectorXcd dz = J.colPivHouseholderQr().solve(-f(z));
        if (!dz.allFinite()) return std::nullopt;
        double lambda = 1.0;
        bool accepted = false;
        for (int bt = 0; bt < 14; ++bt, lambda *= 0.5) {
            Eigen::VectorXcd zn = z + lambda * dz;
            double rn = detail::res_norm(f(zn));
            if (rn < r) {
                z = std::move(zn);
                r = rn;
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
    }
    return r <= opt.tol ? std::optional(z) : std::nullopt;
}

struct MultistartStats {
    int starts = 0;     // starts attempted
    int converged = 0;  // starts that reached a solution (duplicates included)
};

// All distinct solutions found from seeded plus random starts, deduplicated
// up to permutation of the components and sorted canonically.
inline std::vector<Eigen::VectorXcd> multistart_solve(const ResidualFn& f, int n,
                                                      const SolveOptions& opt = {},
                                                      MultistartStats* stats = nullptr) {
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> coord(-opt.radius, opt.radius);
    std::vector<Eigen::VectorXcd> sols;

    auto consider = [&](const Eigen::VectorXcd& start) {
        if (stats != nullptr) ++stats->starts;
        auto sol = newton_solve(f, start, opt);
        if (!sol) return;
        if (stats != nullptr) ++stats->converged;
        Eigen::VectorXcd canon = opt.symmetric ? detail::sorted_components(*sol) : *sol;
        for (const auto& s : sols) {
            bool dup = opt.symmetric ? detail::same_multiset(s, canon, opt.dedup_eps)
                                     : (s - canon).cwiseAbs().maxCoeff() < opt.dedup_eps;
            if (dup) return;
        }
        sols.push_back(std::move(canon));
    };

    for (const auto& s : opt.seeded_starts) consider(s);
    for (int a = 0; a < opt.attempts; ++a) {
        Eigen::VectorXcd start(n);
        for (int i = 0; i < n; ++i) start(i) = cplx(coord(rng), coord(rng));
        consider(start);
    }

    std::sort(sols.begin(), sols.end(), [](const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
        for (int i = 0; i < a.size(); ++i) {
            if (a(i).real() != b(i).real()) return a(i).real() < b(i).real();
            if (a(i).imag() != b(i).imag()) return a(i).imag() < b(i).imag();
        }
        return false;
    });
    return sols;
}

// damped Gauss-Newton for overdetermined holomorphic residuals; returns the
// best point found, converged or not
struct LeastSquaresResult {
    Eigen::VectorXcd z;
    double residual_norm = std::numeric_limits<double>::infinity();
};

inline LeastSquaresResult least_squares_solve(const ResidualFn& f, Eigen::VectorXcd z,
                                              int max_iter = 120) {
    LeastSquaresResult best{z, detail::res_norm(f(z))};
    if (!std::isfinite(best.residual_norm)) return best;
    double r = best.residual_norm;
    for (int it = 0; it < max_iter; ++it) {
        if (r <= 1e-15) break;
        Eigen::VectorXcd F = f(z);
        const int n = static_cast<int>(z.size());
        Eigen::MatrixXcd J(F.size(), n);
        for (int j = 0; j < n; ++j) {
            Eigen::VectorXcd zp = z, zm = z;
            zp(j) += 1e-7;
            zm(j) -= 1e-7;
            J.col(j) = (f(zp) - f(zm)) / 2e-7;
        }
        if (!J.allFinite()) break;
        Eigen::VectorXcd dz = J.colPivHouseholderQr().solve(-F);
        if (!dz.allFinite()) break;
        double lambda = 1.0;
        bool accepted = false;
        for (int bt = 0; bt < 16; ++bt, lambda *= 0.5) {
            Eigen::VectorXcd zn = z + lambda * dz;
            double rn = detail::res_norm(f(zn));
            if (rn < r) {
                z = std::move(zn);
                r = rn;
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
        if (r < best.residual_norm) best = {z, r};
    }
    return best;
}

// residual of the spectral system in the u parametrization:
// F_n(X(u), S(x(u))) - P_n for n = 1..N
inline ResidualFn system_residual_u(double q, int M, std::vector<double> rhs) {
    return [q, M, rhs = std::move(rhs)](const Eigen::VectorXcd& u) {
        const int N = static_cast<int>(u.size());
        std::vector<cplx> x(N), X(N);
        for (int i = 0; i < N; ++i) {
            x[i] = lift_x(q, u(i));
            X[i] = std::pow(u(i), M) * x[i];
        }
        Eigen::MatrixXcd S = kernel_matrix(q, x);
        Eigen::VectorXcd r(N);
        for (int n = 1; n <= N; ++n) r(n - 1) = elementary_F(X, S, n) - rhs[n - 1];
        return r;
    };
}

// residual with the shape variables x frozen and the X_i as free unknowns
inline ResidualFn system_residual_X(double q, std::vector<cplx> x, std::vector<double> rhs) {
    Eigen::MatrixXcd S = kernel_matrix(q, x);
    return [S = std::move(S), rhs = std::move(rhs)](const Eigen::VectorXcd& Xv) {
        const int N = static_cast<int>(Xv.size());
        std::vector<cplx> X(Xv.data(), Xv.data() + N);
        Eigen::VectorXcd r(N);
        for (int n = 1; n <= N; ++n) r(n - 1) = elementary_F(X, S, n) - rhs[n - 1];
        return r;
    };
}

// closed form of the two-particle system at frozen shapes:
// X1 S12 + X2 S21 = P1, X1 X2 = P2
inline std::array<std::array<cplx, 2>, 2> x_free_two_particle(cplx S12, cplx S21, cplx P1,
                                                              cplx P2) {
    cplx disc = std::sqrt(P1 * P1 - 4.0 * S12 * S21 * P2);
    if (std::abs(P1 + disc) < std::abs(P1 - disc)) disc = -disc;
    cplx X1a = (P1 + disc) / (2.0 * S12);
    cplx X1b = P2 * S21 / (S12 * X1a);  // product of the roots is P2 S21/S12
    return {{{X1a, P2 / X1a}, {X1b, P2 / X1b}}};
}

// ---- branches and duality -------------------------------------------------

inline std::vector<cplx> xxz_branch_X(const Eigen::MatrixXcd& S) {
    const int N = static_cast<int>(S.rows());
    std::vector<cplx> X(N, 1.0);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
            if (j != i) X[i] *= S(j, i) / S(i, j);
    return X;
}

// involution exchanging the free branch with the XXZ branch
inline std::vector<cplx> dual_X(const std::vector<cplx>& X, const Eigen::MatrixXcd& S) {
    std::vector<cplx> d = xxz_branch_X(S);
    for (std::size_t i = 0; i < X.size(); ++i) d[i] /= X[i];
    return d;
}

inline cplx predicted_eigenvalue(const std::vector<cplx>& u) {
    cplx p = 1.0;
    for (cplx v : u) p *= v;
    return p;
}

}  // namespace qolab
