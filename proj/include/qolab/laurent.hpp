#pragma once

// Exact Laurent polynomials in the coupling q, used for the conjectured
// right-hand sides of the spectral equations. Coefficients stay integer, so
// predicted values can be evaluated to full double precision at any q.

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace qolab {

struct LaurentPoly {
    // exponent -> coefficient; zero coefficients are never stored
    std::map<int, std::int64_t> c;

    static LaurentPoly zero() { return {}; }
    static LaurentPoly one() { return monomial(0, 1); }
    static LaurentPoly monomial(int exp, std::int64_t coeff) {
        LaurentPoly p;
        if (coeff != 0) p.c[exp] = coeff;
        return p;
    }

    bool operator==(const LaurentPoly& o) const = default;

    LaurentPoly& operator+=(const LaurentPoly& o) {
        for (const auto& [e, a] : o.c) {
            auto it = c.find(e);
            if (it == c.end()) {
                c[e] = a;
            } else if ((it->second += a) == 0) {
                c.erase(it);
            }
        }
        return *this;
    }

    friend LaurentPoly operator+(LaurentPoly a, const LaurentPoly& b) { return a += b; }

    friend LaurentPoly operator*(const LaurentPoly& a, const LaurentPoly& b) {
        LaurentPoly r;
        for (const auto& [ea, ca] : a.c)
            for (const auto& [eb, cb] : b.c) {
                auto it = r.c.find(ea + eb);
                if (it == r.c.end()) {
                    r.c[ea + eb] = ca * cb;
                } else if ((it->second += ca * cb) == 0) {
                    r.c.erase(it);
                }
            }
        return r;
    }

    // multiply by q^shift
    LaurentPoly shifted(int shift) const {
        LaurentPoly r;
        for (const auto& [e, a] : c) r.c[e + shift] = a;
        return r;
    }

    double eval(double q) const {
        double s = 0.0;
        for (const auto& [e, a] : c) s += static_cast<double>(a) * std::pow(q, e);
        return s;
    }

    std::string str() const {
        if (c.empty()) return "0";
        std::string s;
        for (const auto& [e, a] : c) {
            if (!s.empty()) s += a < 0 ? " - " : " + ";
            else if (a < 0) s += "-";
            std::int64_t m = a < 0 ? -a : a;
            if (m != 1 || e == 0) s += std::to_string(m);
            if (e != 0) {
                if (m != 1) s += "*";
                s += "q";
                if (e != 1) s += "^" + std::to_string(e);
            }
        }
        return s;
    }
};

// Coefficients of z^0..z^n in prod_j (1 + q^{e_j} z): elementary symmetric
// polynomials of the monomials q^{e_j}.
inline std::vector<LaurentPoly> binomial_product(const std::vector<int>& exps) {
    std::vector<LaurentPoly> coeff(exps.size() + 1);
    coeff[0] = LaurentPoly::one();
    std::size_t used = 0;
    for (int e : exps) {
        ++used;
        for (std::size_t n = used; n >= 1; --n)
            coeff[n] += coeff[n - 1].shifted(e);
    }
    return coeff;
}

inline std::int64_t binomial(int N, int n) {
    if (n < 0 || n > N) return 0;
    std::int64_t r = 1;
    for (int i = 1; i <= n; ++i) r = r * (N - n + i) / i;
    return r;
}

// Gaussian binomial [N choose n] in the variable q^2, via the ladder product
// prod_{j=0}^{N-1} (1 + q^{1-N+2j} z) = sum_n q^{-n(N-n)} [N choose n]_{q^2} z^n.
inline LaurentPoly gaussian_binomial_q2(int N, int n) {
    if (n < 0 || n > N) return LaurentPoly::zero();
    std::vector<int> exps;
    for (int j = 0; j < N; ++j) exps.push_back(1 - N + 2 * j);
    return binomial_product(exps)[n].shifted(n * (N - n));
}

// Conjectured values, by interaction geometry of the particle positions.

inline LaurentPoly conjectured_line(int N, int n) {
    return LaurentPoly::monomial(0, binomial(N, n));
}

// shared by coincident positions and generic position sets
inline LaurentPoly conjectured_generic(int N, int n) {
    return gaussian_binomial_q2(N, n).shifted(-n * (N - n));
}

// K x L grid, K >= L: coefficients of the K-th power of the L-ladder product
inline std::vector<LaurentPoly> conjectured_grid(int K, int L) {
    if (K < L || L < 1) throw std::invalid_argument("grid wants K >= L >= 1");
    std::vector<int> exps;
    for (int copy = 0; copy < K; ++copy)
        for (int j = 0; j < L; ++j) exps.push_back(1 - L + 2 * j);
    return binomial_product(exps);
}

}  // namespace qolab
