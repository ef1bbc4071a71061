#include "matrix.hpp"
#include <cmath>
#include <iostream>
#include <optional>

namespace {

// Returns the index of the largest pivot candidate at or below row k.
std::size_t pivot_row(const la::Matrix& m, std::size_t k) {
    std::size_t best = k;
    for (std::size_t r = k + 1; r < m.rows(); ++r)
        if (std::fabs(m(r, k)) > std::fabs(m(best, k))) best = r;
    return best;
}

void swap_rows(la::Matrix& m, std::size_t a, std::size_t b) {
    for (std::size_t c = 0; c < m.cols(); ++c) std::swap(m(a, c), m(b, c));
}

}  // namespace

/// Solves A x = b by Gaussian elimination with partial pivoting.
/// Returns nothing when A is singular.
std::optional<std::vector<double>> solve(la::Matrix a, std::vector<double> b) {
    const std::size_t n = a.rows();
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t p = pivot_row(a, k);
        if (std::fabs(a(p, k)) < 1e-12) return std::nullopt;
        if (p != k) {
            swap_rows(a, p, k);
            std::swap(b[p], b[k]);
        }
        for (std::size_t r = k + 1; r < n; ++r) {
            const double f = a(r, k) / a(k, k);
            for (std::size_t c = k; c < n; ++c) a(r, c) -= f * a(k, c);
            b[r] -= f * b[k];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t c = i + 1; c < n; ++c) s -= a(i, c) * x[c];
        x[i] = s / a(i, i);
    }
    return x;
}

int main() {
    la::Matrix a(2, 2);
    a(0, 0) = 2; a(0, 1) = 1;
    a(1, 0) = 1; a(1, 1) = 3;
    auto x = solve(a, {3, 5});  /* expect (0.8, 1.4) */
    if (!x) {
        std::cerr << "singular\n";
        return 1;
    }
    std::cout << (*x)[0] << " " << (*x)[1] << "\n";
    return 0;
}
