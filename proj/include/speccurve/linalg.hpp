// Minimal dense complex linear algebra for the small Newton systems and
// period-normalization solves (partial pivoting, condition estimate).
#pragma once

#include <vector>

#include "complex_util.hpp"

namespace speccurve {

struct LinearSolveResult {
    std::vector<cplx> x;
    double condition_estimate; // max/min pivot magnitude ratio
};

/// Solve A x = b for a dense n x n complex matrix (row-major) with partial
/// pivoting. Throws NumericalError on an exactly singular pivot.
inline LinearSolveResult solve_dense(std::vector<cplx> A, std::vector<cplx> b) {
    const std::size_t n = b.size();
    double max_piv = 0.0, min_piv = std::numeric_limits<double>::infinity();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(A[r * n + col]) > std::abs(A[piv * n + col])) piv = r;
        if (piv != col) {
            for (std::size_t c = 0; c < n; ++c) std::swap(A[col * n + c], A[piv * n + c]);
            std::swap(b[col], b[piv]);
        }
        double pmag = std::abs(A[col * n + col]);
        if (pmag == 0.0) throw NumericalError("solve_dense: singular matrix");
        max_piv = std::max(max_piv, pmag);
        min_piv = std::min(min_piv, pmag);
        for (std::size_t r = col + 1; r < n; ++r) {
            cplx f = A[r * n + col] / A[col * n + col];
            if (f == cplx(0.0)) continue;
            A[r * n + col] = 0.0;
            for (std::size_t c = col + 1; c < n; ++c) A[r * n + c] -= f * A[col * n + c];
            b[r] -= f * b[col];
        }
    }
    std::vector<cplx> x(n);
    for (std::size_t i = n; i-- > 0;) {
        cplx acc = b[i];
        for (std::size_t c = i + 1; c < n; ++c) acc -= A[i * n + c] * x[c];
        x[i] = acc / A[i * n + i];
    }
    return {std::move(x), max_piv / min_piv};
}

} // namespace speccurve
