#pragma once

// Small dense row-major helpers. Dimensions in this project stay below a few
// hundred, so plain loops with a fixed summation order are used; the order
// matters for bit-reproducible trajectories.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "skewrnn/errors.hpp"

namespace skewrnn {

using State = std::vector<double>;

inline double dot(std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(std::span<const double> a)
{
    return std::sqrt(dot(a, a));
}

/// out = M x for a row-major n x n matrix.
inline void matvec(std::span<const double> m, std::size_t n, std::span<const double> x, std::span<double> out)
{
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = m.data() + i * n;
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += row[j] * x[j];
        out[i] = s;
    }
}

inline std::vector<double> matmul(std::span<const double> a, std::span<const double> b, std::size_t n)
{
    std::vector<double> c(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < n; ++k) {
            const double aik = a[i * n + k];
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) c[i * n + j] += aik * b[k * n + j];
        }
    }
    return c;
}

inline double inf_norm(std::span<const double> m, std::size_t n)
{
    double best = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += std::abs(m[i * n + j]);
        best = std::max(best, s);
    }
    return best;
}

/// Eigenvalues of a real symmetric matrix by the cyclic Jacobi method,
/// returned in ascending order. Only the upper triangle is read.
inline std::vector<double> symmetric_eigenvalues(std::vector<double> a, std::size_t n, int max_sweeps = 100)
{
    auto at = [&](std::size_t i, std::size_t j) -> double& { return a[i * n + j]; };

    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) at(j, i) = at(i, j);

    double total = 0.0;
    for (double v : a) total += v * v;

    bool converged = n <= 1;
    for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += at(p, q) * at(p, q);
        if (off <= 1e-32 * total || off == 0.0) {
            converged = true;
            break;
        }

        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = at(p, q);
                if (apq == 0.0) continue;
                const double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
                double t;
                if (std::abs(theta) > 1e150) {
                    t = 0.5 / theta;
                } else {
                    t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                    if (theta < 0.0) t = -t;
                }
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = at(k, p);
                    const double akq = at(k, q);
                    at(k, p) = c * akp - s * akq;
                    at(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = at(p, k);
                    const double aqk = at(q, k);
                    at(p, k) = c * apk - s * aqk;
                    at(q, k) = s * apk + c * aqk;
                }
                at(p, q) = 0.0;
                at(q, p) = 0.0;
            }
        }
    }
    if (!converged) throw NumericalError("symmetric_eigenvalues: Jacobi iteration did not converge");

    std::vector<double> eig(n);
    for (std::size_t i = 0; i < n; ++i) eig[i] = at(i, i);
    std::sort(eig.begin(), eig.end());
    return eig;
}

} // namespace skewrnn
