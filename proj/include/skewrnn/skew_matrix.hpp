#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "skewrnn/errors.hpp"
#include "skewrnn/linalg.hpp"
#include "skewrnn/random.hpp"

namespace skewrnn {

struct RandomGaussian {
    double stddev;
    std::uint64_t seed;
    bool operator==(const RandomGaussian&) const = default;
};

/// Strictly-lower entries drawn from Uniform(-bound, bound), bound = 1/dim.
struct RandomUniformScaled {
    double bound;
    std::uint64_t seed;
    bool operator==(const RandomUniformScaled&) const = default;
};

struct BlockDiagonal {
    std::vector<double> freqs;
    bool operator==(const BlockDiagonal&) const = default;
};

struct Explicit {
    bool operator==(const Explicit&) const = default;
};

using MatrixOrigin = std::variant<RandomGaussian, RandomUniformScaled, BlockDiagonal, Explicit>;

/// Real n x n matrix with A == -A^T holding exactly. Only the strictly lower
/// triangle is ever supplied; the upper triangle is its negated mirror.
class SkewMatrix {
public:
    /// The 1 x 1 zero matrix.
    SkewMatrix() : SkewMatrix(1, std::vector<double>{0.0}, Explicit{}) {}

    /// Builds from a full row-major matrix. The input must already be
    /// exactly skew-symmetric; nothing is symmetrized silently.
    static SkewMatrix from_entries(std::size_t dim, std::vector<double> entries, MatrixOrigin origin = Explicit{})
    {
        if (dim == 0) throw ConfigError("SkewMatrix: dimension must be positive");
        if (entries.size() != dim * dim) {
            throw DimensionError("SkewMatrix: expected " + std::to_string(dim * dim) + " entries, got " +
                                 std::to_string(entries.size()));
        }
        for (std::size_t i = 0; i < dim; ++i) {
            for (std::size_t j = i; j < dim; ++j) {
                const double a = entries[i * dim + j];
                const double b = entries[j * dim + i];
                if (!std::isfinite(a) || a != -b) {
                    throw ConfigError("SkewMatrix: entries (" + std::to_string(i) + "," + std::to_string(j) +
                                      ") and (" + std::to_string(j) + "," + std::to_string(i) +
                                      ") are not exact negatives");
                }
            }
        }
        return SkewMatrix(dim, std::move(entries), std::move(origin));
    }

    /// `fill(i, j)` is called once per strictly-lower position in row-major
    /// order (i > j).
    template <class Fill>
    static SkewMatrix from_lower(std::size_t dim, Fill&& fill, MatrixOrigin origin)
    {
        if (dim == 0) throw ConfigError("SkewMatrix: dimension must be positive");
        std::vector<double> e(dim * dim, 0.0);
        for (std::size_t i = 1; i < dim; ++i) {
            for (std::size_t j = 0; j < i; ++j) {
                const double v = fill(i, j);
                e[i * dim + j] = v;
                e[j * dim + i] = -v;
            }
        }
        return SkewMatrix(dim, std::move(e), std::move(origin));
    }

    std::size_t dim() const noexcept { return dim_; }
    double operator()(std::size_t i, std::size_t j) const { return entries_[i * dim_ + j]; }
    std::span<const double> entries() const noexcept { return entries_; }
    const MatrixOrigin& origin() const noexcept { return origin_; }

    bool is_block_diagonal() const noexcept { return std::holds_alternative<BlockDiagonal>(origin_); }

    void apply(std::span<const double> x, std::span<double> out) const { matvec(entries_, dim_, x, out); }

    State apply(std::span<const double> x) const
    {
        require_same_dim(dim_, x.size(), "SkewMatrix::apply");
        State out(dim_);
        apply(x, out);
        return out;
    }

    /// factor * A. Negation commutes with scaling in IEEE arithmetic, so the
    /// result stays exactly skew. Block-diagonal origins keep scaled freqs.
    SkewMatrix scaled(double factor) const
    {
        std::vector<double> e(entries_);
        for (double& v : e) v *= factor;
        MatrixOrigin origin = Explicit{};
        if (const auto* block = std::get_if<BlockDiagonal>(&origin_)) {
            BlockDiagonal b = *block;
            for (double& w : b.freqs) w *= factor;
            origin = std::move(b);
        }
        return SkewMatrix(dim_, std::move(e), std::move(origin));
    }

    bool operator==(const SkewMatrix&) const = default;

private:
    SkewMatrix(std::size_t dim, std::vector<double> entries, MatrixOrigin origin)
        : dim_(dim), entries_(std::move(entries)), origin_(std::move(origin))
    {
    }

    std::size_t dim_;
    std::vector<double> entries_;
    MatrixOrigin origin_;
};

/// Strictly-lower entries i.i.d. Normal(0, stddev^2), drawn row by row from
/// the matrix stream of `seed`.
inline SkewMatrix make_random_skew(std::size_t dim, double stddev, std::uint64_t seed)
{
    if (dim == 0) throw ConfigError("make_random_skew: dim must be >= 1");
    if (!(stddev > 0.0) || !std::isfinite(stddev)) throw ConfigError("make_random_skew: std must be positive");
    Rng rng(seed, Stream::Matrix);
    return SkewMatrix::from_lower(
        dim, [&](std::size_t, std::size_t) { return rng.normal(stddev); }, RandomGaussian{stddev, seed});
}

inline SkewMatrix make_random_skew_uniform_scaled(std::size_t dim, std::uint64_t seed)
{
    if (dim == 0) throw ConfigError("make_random_skew_uniform_scaled: dim must be >= 1");
    const double bound = 1.0 / static_cast<double>(dim);
    Rng rng(seed, Stream::Matrix);
    return SkewMatrix::from_lower(
        dim, [&](std::size_t, std::size_t) { return rng.uniform_symmetric(bound); },
        RandomUniformScaled{bound, seed});
}

/// diag([[0,-w1],[w1,0]], ..., [[0,-wd],[wd,0]]).
inline SkewMatrix make_block_diagonal(std::span<const double> freqs)
{
    if (freqs.empty()) throw ConfigError("make_block_diagonal: frequency list is empty");
    for (double w : freqs)
        if (!std::isfinite(w)) throw ConfigError("make_block_diagonal: non-finite frequency");
    const std::size_t n = 2 * freqs.size();
    return SkewMatrix::from_lower(
        n,
        [&](std::size_t i, std::size_t j) { return (i % 2 == 1 && j == i - 1) ? freqs[i / 2] : 0.0; },
        BlockDiagonal{std::vector<double>(freqs.begin(), freqs.end())});
}

inline SkewMatrix make_block_diagonal(std::initializer_list<double> freqs)
{
    return make_block_diagonal(std::span<const double>(freqs.begin(), freqs.size()));
}

struct EigenFrequencies {
    std::vector<double> omegas; // ascending, one per rotation pair
    std::size_t zero_modes = 0;
};

/// Spectrum of A as {+-i w} from the eigenvalues of the symmetric PSD matrix
/// -A^2 = A^T A, each of which appears twice.
inline EigenFrequencies eigen_frequencies(const SkewMatrix& a, double pair_tol = 1e-8)
{
    const std::size_t n = a.dim();
    std::vector<double> neg_sq = matmul(a.entries(), a.entries(), n);
    for (double& v : neg_sq) v = -v;

    std::vector<double> lambda = symmetric_eigenvalues(std::move(neg_sq), n);
    const double lmax = lambda.empty() ? 0.0 : std::max(lambda.back(), 0.0);
    const double floor = 4.0 * std::numeric_limits<double>::epsilon() * lmax * static_cast<double>(n);
    for (double& l : lambda)
        if (l < floor) l = 0.0;

    EigenFrequencies out;
    std::size_t start = 0;
    if (n % 2 == 1) {
        out.zero_modes = 1;
        start = 1;
    }
    for (std::size_t i = start; i + 1 < n; i += 2) {
        const double l0 = lambda[i];
        const double l1 = lambda[i + 1];
        if (std::abs(l1 - l0) > pair_tol * std::max({l0, l1, 1e-8 * lmax})) {
            throw NumericalError("eigen_frequencies: eigenvalues of -A^2 do not pair up (" + std::to_string(l0) +
                                 " vs " + std::to_string(l1) + ")");
        }
        out.omegas.push_back(std::sqrt(0.5 * (l0 + l1)));
    }
    return out;
}

/// Eigenvalues of A as (re, im) pairs: (0, +-w) per rotation pair plus the
/// zero modes.
inline std::vector<std::pair<double, double>> skew_eigenvalues(const EigenFrequencies& f)
{
    std::vector<std::pair<double, double>> eigs;
    for (std::size_t k = 0; k < f.zero_modes; ++k) eigs.emplace_back(0.0, 0.0);
    for (double w : f.omegas) {
        eigs.emplace_back(0.0, w);
        eigs.emplace_back(0.0, -w);
    }
    return eigs;
}

/// e^{tA} x0. Block-diagonal matrices use exact per-block rotations; other
/// matrices use Taylor series with scaling and squaring.
inline State skew_expm_apply(const SkewMatrix& a, double t, std::span<const double> x0)
{
    const std::size_t n = a.dim();
    require_same_dim(n, x0.size(), "skew_expm_apply");
    State out(x0.begin(), x0.end());
    if (t == 0.0) return out;

    if (const auto* block = std::get_if<BlockDiagonal>(&a.origin())) {
        for (std::size_t i = 0; i < block->freqs.size(); ++i) {
            const double angle = block->freqs[i] * t;
            const double c = std::cos(angle);
            const double s = std::sin(angle);
            const double u = x0[2 * i];
            const double v = x0[2 * i + 1];
            out[2 * i] = c * u - s * v;
            out[2 * i + 1] = s * u + c * v;
        }
        return out;
    }

    std::vector<double> m(a.entries().begin(), a.entries().end());
    for (double& v : m) v *= t;
    const double norm = inf_norm(m, n);
    int squarings = 0;
    if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
    const double scale = std::ldexp(1.0, -squarings);
    for (double& v : m) v *= scale;

    std::vector<double> result(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) result[i * n + i] = 1.0;
    std::vector<double> term = result;
    for (int k = 1; k < 40; ++k) {
        term = matmul(term, m, n);
        const double inv_k = 1.0 / static_cast<double>(k);
        for (double& v : term) v *= inv_k;
        for (std::size_t i = 0; i < n * n; ++i) result[i] += term[i];
        if (inf_norm(term, n) <= 1e-18) break;
    }
    for (int s = 0; s < squarings; ++s) result = matmul(result, result, n);

    matvec(result, n, x0, out);
    return out;
}

} // namespace skewrnn
