// The conjectured spectral values organize by anchor geometry into Laurent
// polynomial families. This prints them for N = 4 and shows the collapse to
// plain binomial coefficients as q -> 1.

#include <cstdio>

#include "qolab/laurent.hpp"

int main() {
    using namespace qolab;
    const int N = 4;

    std::printf("N = %d families by anchor geometry:\n\n", N);
    for (int n = 0; n <= N; ++n)
        std::printf("  P_%d   line: %-4s   generic: %s\n", n,
                    conjectured_line(N, n).str().c_str(),
                    conjectured_generic(N, n).str().c_str());

    const auto grid = conjectured_grid(2, 2);
    std::printf("\n  2 x 2 grid:\n");
    for (int n = 0; n <= N; ++n) std::printf("  P_%d = %s\n", n, grid[n].str().c_str());

    const double qq = 1.0 - 1e-6;
    std::printf("\nat q = %.7f all three return to the binomials:\n", qq);
    for (int n = 0; n <= N; ++n)
        std::printf("  n=%d:  line %g   generic %.6f   grid %.6f   C(%d,%d) = %lld\n", n,
                    conjectured_line(N, n).eval(qq), conjectured_generic(N, n).eval(qq),
                    grid[n].eval(qq), N, n, static_cast<long long>(binomial(N, n)));

    std::printf("\na K x 1 grid is the line family itself:\n");
    const auto flat = conjectured_grid(3, 1);
    for (int n = 0; n <= 3; ++n)
        std::printf("  K=3, n=%d: grid %s == line %s\n", n, flat[n].str().c_str(),
                    conjectured_line(3, n).str().c_str());
    return 0;
}
