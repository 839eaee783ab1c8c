#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <variant>
#include <vector>

#include "skewrnn/dynamics.hpp"
#include "skewrnn/errors.hpp"
#include "skewrnn/linalg.hpp"

namespace skewrnn {

/// H(x) = ||x||^2 / 2. Conserved by the linear flow of any skew matrix.
struct QuadraticNorm {
    bool operator==(const QuadraticNorm&) const = default;
};

/// H(x) = (1/w) log(cosh(w x1) cosh(w x2)). Conserved by x' = tanh(Ax) for
/// A = [[0,-w],[w,0]].
struct TanhLog2D {
    double omega;
    bool operator==(const TanhLog2D&) const = default;
};

/// Sum of TanhLog2D terms over consecutive coordinate pairs. Conserved by
/// x' = tanh(Ax) for block-diagonal A.
struct TanhLogBlockDiag {
    std::vector<double> freqs;
    bool operator==(const TanhLogBlockDiag&) const = default;
};

using InvariantSpec = std::variant<QuadraticNorm, TanhLog2D, TanhLogBlockDiag>;

/// log(cosh(a)) without overflow. Small |a| goes through
/// log1p(2 sinh^2(a/2)) so the result stays positive and accurate near 0;
/// large |a| uses |a| + log1p(e^{-2|a|}) - log 2.
inline double log_cosh(double a) noexcept
{
    const double m = std::abs(a);
    if (m < 1.0) {
        const double s = std::sinh(0.5 * m);
        return std::log1p(2.0 * s * s);
    }
    return m + std::log1p(std::exp(-2.0 * m)) - std::numbers::ln2;
}

namespace detail {

inline double pair_term(double omega, double u, double v)
{
    return (log_cosh(omega * u) + log_cosh(omega * v)) / omega;
}

inline void check_invariant(const InvariantSpec& spec, std::size_t dim)
{
    if (const auto* s = std::get_if<TanhLog2D>(&spec)) {
        require_same_dim(2, dim, "TanhLog2D invariant");
        if (s->omega == 0.0 || !std::isfinite(s->omega)) throw ConfigError("TanhLog2D: omega must be non-zero");
    } else if (const auto* b = std::get_if<TanhLogBlockDiag>(&spec)) {
        require_same_dim(2 * b->freqs.size(), dim, "TanhLogBlockDiag invariant");
        if (b->freqs.empty()) throw ConfigError("TanhLogBlockDiag: empty frequency list");
        for (double w : b->freqs)
            if (w == 0.0 || !std::isfinite(w)) throw ConfigError("TanhLogBlockDiag: frequencies must be non-zero");
    }
}

inline double eval_unchecked(const InvariantSpec& spec, std::span<const double> x)
{
    if (std::holds_alternative<QuadraticNorm>(spec)) return 0.5 * dot(x, x);
    if (const auto* s = std::get_if<TanhLog2D>(&spec)) return pair_term(s->omega, x[0], x[1]);
    const auto& freqs = std::get<TanhLogBlockDiag>(spec).freqs;
    double h = 0.0;
    for (std::size_t i = 0; i < freqs.size(); ++i) h += pair_term(freqs[i], x[2 * i], x[2 * i + 1]);
    return h;
}

} // namespace detail

inline double eval_invariant(const InvariantSpec& spec, std::span<const double> x)
{
    detail::check_invariant(spec, x.size());
    return detail::eval_unchecked(spec, x);
}

/// Gradient of H: x for QuadraticNorm, tanh(w_i x_j) for the log-cosh forms.
inline State invariant_gradient(const InvariantSpec& spec, std::span<const double> x)
{
    detail::check_invariant(spec, x.size());
    State g(x.begin(), x.end());
    if (const auto* s = std::get_if<TanhLog2D>(&spec)) {
        g[0] = std::tanh(s->omega * x[0]);
        g[1] = std::tanh(s->omega * x[1]);
    } else if (const auto* b = std::get_if<TanhLogBlockDiag>(&spec)) {
        for (std::size_t i = 0; i < b->freqs.size(); ++i) {
            g[2 * i] = std::tanh(b->freqs[i] * x[2 * i]);
            g[2 * i + 1] = std::tanh(b->freqs[i] * x[2 * i + 1]);
        }
    }
    return g;
}

/// The conserved quantity matching a simulation setup, when one is known:
/// log-cosh forms for tanh on block-diagonal (or any 2-D) matrices, the
/// quadratic norm for the identity activation. Returns QuadraticNorm as a
/// drift diagnostic otherwise.
inline InvariantSpec natural_invariant(const SkewMatrix& a, Activation kind)
{
    if (kind == Activation::Tanh) {
        if (a.dim() == 2 && a(1, 0) != 0.0) return TanhLog2D{a(1, 0)};
        if (const auto* b = std::get_if<BlockDiagonal>(&a.origin())) {
            if (std::none_of(b->freqs.begin(), b->freqs.end(), [](double w) { return w == 0.0; }))
                return TanhLogBlockDiag{b->freqs};
        }
    }
    return QuadraticNorm{};
}

struct InvariantTrace {
    std::vector<double> times;
    std::vector<double> values;
    double abs_drift = 0.0;
    double rel_drift = 0.0;
};

inline InvariantTrace invariant_trace(const InvariantSpec& spec, const Trajectory& traj)
{
    InvariantTrace out;
    if (traj.states.empty()) return out;
    detail::check_invariant(spec, traj.dim());
    out.times = traj.times;
    out.values.reserve(traj.size());
    for (const auto& s : traj.states) out.values.push_back(detail::eval_unchecked(spec, s));
    const double h0 = out.values.front();
    for (double v : out.values) out.abs_drift = std::max(out.abs_drift, std::abs(v - h0));
    out.rel_drift = out.abs_drift / std::max(std::abs(h0), 1e-300);
    return out;
}

struct LevelPoint {
    double theta;
    double x1;
    double x2;
};

/// Points on {H = level} for the 2-D log-cosh invariant, one per angle of a
/// uniform grid over [0, 2 pi). Along each ray H is strictly increasing in
/// the radius, so the radius is found by bisection.
inline std::vector<LevelPoint> trace_level_set(const TanhLog2D& spec, double level, std::size_t num_points)
{
    if (!(level > 0.0) || !std::isfinite(level)) throw ConfigError("trace_level_set: level must be positive");
    if (num_points == 0) throw ConfigError("trace_level_set: num_points must be positive");
    if (spec.omega == 0.0) throw ConfigError("trace_level_set: omega must be non-zero");
    // A negative omega flips the sign of H; the level set of the magnitude is
    // the same curve.
    const double w = std::abs(spec.omega);

    std::vector<LevelPoint> pts;
    pts.reserve(num_points);
    for (std::size_t k = 0; k < num_points; ++k) {
        const double theta = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(num_points);
        const double c = std::cos(theta);
        const double s = std::sin(theta);
        auto h = [&](double r) { return detail::pair_term(w, r * c, r * s); };

        double lo = 0.0;
        double hi = 1.0;
        while (h(hi) < level) {
            lo = hi;
            hi *= 2.0;
        }
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            (h(mid) < level ? lo : hi) = mid;
        }
        const double r = std::abs(h(lo) - level) <= std::abs(h(hi) - level) ? lo : hi;
        pts.push_back({theta, r * c, r * s});
    }
    return pts;
}

struct OrbitReturn {
    bool found = false;
    std::size_t index = 0;
    double time = 0.0;
    double distance = std::numeric_limits<double>::infinity(); // closest approach when not found
};

/// First sample within `tolerance` of the initial state after the trajectory
/// has moved farther than `leave_radius` from it, searched up to `max_time`.
inline OrbitReturn find_orbit_return(const Trajectory& traj, double tolerance, double leave_radius, double max_time)
{
    OrbitReturn out;
    if (traj.states.empty()) return out;
    const State& x0 = traj.states.front();
    bool left = false;
    State diff(x0.size());
    for (std::size_t k = 1; k < traj.size() && traj.times[k] <= max_time; ++k) {
        for (std::size_t i = 0; i < x0.size(); ++i) diff[i] = traj.states[k][i] - x0[i];
        const double d = norm2(diff);
        if (!left) {
            left = d > leave_radius;
            continue;
        }
        if (d < out.distance) {
            out.distance = d;
            out.index = k;
            out.time = traj.times[k];
        }
        if (d <= tolerance) {
            out.found = true;
            return out;
        }
    }
    return out;
}

} // namespace skewrnn
