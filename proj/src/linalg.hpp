#pragma once

// Small dense solvers for the weighted least-squares systems in the
// attribution methods. Row-major throughout.

#include <cmath>
#include <cstddef>
#include <vector>

namespace flowrank::detail {

// Accumulates G = A' diag(w) A + ridge*I and B = A' diag(w) Y.
// A is [n x p], Y is [n x q]. `ridge_skip_first` leaves the first diagonal
// entry unregularized (intercept column).
inline void weighted_normal_equations(const std::vector<double>& a, const std::vector<double>& y,
                                      const std::vector<double>& w, std::size_t n, std::size_t p,
                                      std::size_t q, double ridge, bool ridge_skip_first,
                                      std::vector<double>& g, std::vector<double>& b) {
    g.assign(p * p, 0.0);
    b.assign(p * q, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* ai = a.data() + i * p;
        const double* yi = y.data() + i * q;
        const double wi = w[i];
        for (std::size_t j = 0; j < p; ++j) {
            const double waj = wi * ai[j];
            if (waj == 0.0) continue;
            double* gj = g.data() + j * p;
            for (std::size_t l = j; l < p; ++l) gj[l] += waj * ai[l];
            double* bj = b.data() + j * q;
            for (std::size_t k = 0; k < q; ++k) bj[k] += waj * yi[k];
        }
    }
    for (std::size_t j = 0; j < p; ++j)
        for (std::size_t l = 0; l < j; ++l) g[j * p + l] = g[l * p + j];
    for (std::size_t j = ridge_skip_first ? 1 : 0; j < p; ++j) g[j * p + j] += ridge;
}

// Solves G X = B in place by Gaussian elimination with partial pivoting.
// G is [p x p], B is [p x q]; on success B holds X. Returns false when the
// system is numerically singular.
inline bool solve_linear(std::vector<double>& g, std::vector<double>& b, std::size_t p,
                         std::size_t q) {
    double scale = 0.0;
    for (double v : g) scale = std::max(scale, std::abs(v));
    const double tiny = scale > 0.0 ? scale * 1e-13 : 1e-300;

    for (std::size_t col = 0; col < p; ++col) {
        std::size_t piv = col;
        double best = std::abs(g[col * p + col]);
        for (std::size_t r = col + 1; r < p; ++r) {
            const double v = std::abs(g[r * p + col]);
            if (v > best) {
                best = v;
                piv = r;
            }
        }
        if (best <= tiny) return false;
        if (piv != col) {
            for (std::size_t j = 0; j < p; ++j) std::swap(g[col * p + j], g[piv * p + j]);
            for (std::size_t k = 0; k < q; ++k) std::swap(b[col * q + k], b[piv * q + k]);
        }
        const double d = g[col * p + col];
        for (std::size_t r = col + 1; r < p; ++r) {
            const double factor = g[r * p + col] / d;
            if (factor == 0.0) continue;
            for (std::size_t j = col; j < p; ++j) g[r * p + j] -= factor * g[col * p + j];
            for (std::size_t k = 0; k < q; ++k) b[r * q + k] -= factor * b[col * q + k];
        }
    }
    for (std::size_t col = p; col-- > 0;) {
        for (std::size_t k = 0; k < q; ++k) {
            double s = b[col * q + k];
            for (std::size_t j = col + 1; j < p; ++j) s -= g[col * p + j] * b[j * q + k];
            b[col * q + k] = s / g[col * p + col];
        }
    }
    return true;
}

}  // namespace flowrank::detail
