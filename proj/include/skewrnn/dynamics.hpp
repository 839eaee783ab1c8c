#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "skewrnn/activation.hpp"
#include "skewrnn/errors.hpp"
#include "skewrnn/linalg.hpp"
#include "skewrnn/skew_matrix.hpp"

namespace skewrnn {

enum class Integrator { ForwardEuler, RK4 };

constexpr std::string_view to_string(Integrator i) noexcept
{
    return i == Integrator::ForwardEuler ? "euler" : "rk4";
}

inline Integrator parse_integrator(std::string_view name)
{
    if (name == "euler" || name == "forward_euler") return Integrator::ForwardEuler;
    if (name == "rk4") return Integrator::RK4;
    throw ConfigError("unknown integrator '" + std::string(name) + "' (expected euler or rk4)");
}

/// Full-resolution recording up to 1e5 steps, every 10th sample above.
constexpr std::size_t default_record_stride(std::size_t steps) noexcept
{
    return steps <= 100000 ? 1 : 10;
}

struct SimulationConfig {
    SkewMatrix matrix;
    Activation activation = Activation::Tanh;
    State x0;
    double tau = 0.001;
    std::size_t steps = 100000;
    double divergence_threshold = 100.0;
    Integrator integrator = Integrator::ForwardEuler;
    std::size_t record_stride = 1;

    void validate() const
    {
        require_same_dim(matrix.dim(), x0.size(), "SimulationConfig x0");
        if (!(tau > 0.0) || !std::isfinite(tau)) throw ConfigError("SimulationConfig: tau must be positive");
        if (steps == 0) throw ConfigError("SimulationConfig: steps must be >= 1");
        if (record_stride == 0) throw ConfigError("SimulationConfig: record_stride must be >= 1");
        if (!(divergence_threshold > 0.0)) throw ConfigError("SimulationConfig: divergence_threshold must be positive");
        for (double v : x0)
            if (!std::isfinite(v)) throw ConfigError("SimulationConfig: x0 must be finite");
        if (norm2(x0) >= divergence_threshold)
            throw ConfigError("SimulationConfig: initial state already meets the divergence threshold");
    }
};

struct Completed {
    bool operator==(const Completed&) const = default;
};

/// `step` is the step whose result met ||x|| >= threshold; `last_state` is
/// the state before it (also the final recorded sample); `trigger_norm` is
/// the norm of the state that met the condition.
struct Diverged {
    std::size_t step = 0;
    State last_state;
    double trigger_norm = 0.0;
    bool operator==(const Diverged&) const = default;
};

using Termination = std::variant<Completed, Diverged>;

struct Trajectory {
    std::vector<double> times;
    std::vector<State> states;
    Termination termination = Completed{};
    double threshold = 0.0;

    std::size_t size() const noexcept { return states.size(); }
    std::size_t dim() const noexcept { return states.empty() ? 0 : states.front().size(); }
    bool diverged() const noexcept { return std::holds_alternative<Diverged>(termination); }

    /// Samples of one state component.
    std::vector<double> component(std::size_t index) const
    {
        std::vector<double> out;
        out.reserve(states.size());
        for (const auto& s : states) out.push_back(s.at(index));
        return out;
    }

    bool operator==(const Trajectory&) const = default;
};

/// out = sigma(A x).
inline void vector_field(const SkewMatrix& a, Activation kind, std::span<const double> x, std::span<double> out)
{
    a.apply(x, out);
    apply_vec_inplace(kind, out);
}

inline State vector_field(const SkewMatrix& a, Activation kind, std::span<const double> x)
{
    require_same_dim(a.dim(), x.size(), "vector_field");
    State out(x.size());
    vector_field(a, kind, x, out);
    return out;
}

/// Reusable scratch buffers for repeated stepping without allocation.
class Stepper {
public:
    Stepper(const SkewMatrix& a, Activation kind, Integrator method)
        : a_(a), kind_(kind), method_(method), k1_(a.dim()), k2_(a.dim()), k3_(a.dim()), k4_(a.dim()),
          tmp_(a.dim())
    {
    }

    /// Advances x in place by one step of size tau.
    void step(std::span<double> x, double tau)
    {
        const std::size_t n = x.size();
        if (method_ == Integrator::ForwardEuler) {
            vector_field(a_, kind_, x, k1_);
            for (std::size_t i = 0; i < n; ++i) x[i] += tau * k1_[i];
            return;
        }
        const double half = 0.5 * tau;
        vector_field(a_, kind_, x, k1_);
        for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + half * k1_[i];
        vector_field(a_, kind_, tmp_, k2_);
        for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + half * k2_[i];
        vector_field(a_, kind_, tmp_, k3_);
        for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + tau * k3_[i];
        vector_field(a_, kind_, tmp_, k4_);
        const double sixth = tau / 6.0;
        for (std::size_t i = 0; i < n; ++i) x[i] += sixth * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
    }

private:
    const SkewMatrix& a_;
    Activation kind_;
    Integrator method_;
    State k1_, k2_, k3_, k4_, tmp_;
};

inline State step_euler(const SkewMatrix& a, Activation kind, std::span<const double> x, double tau)
{
    require_same_dim(a.dim(), x.size(), "step_euler");
    State out(x.begin(), x.end());
    Stepper(a, kind, Integrator::ForwardEuler).step(out, tau);
    return out;
}

inline State step_rk4(const SkewMatrix& a, Activation kind, std::span<const double> x, double tau)
{
    require_same_dim(a.dim(), x.size(), "step_rk4");
    State out(x.begin(), x.end());
    Stepper(a, kind, Integrator::RK4).step(out, tau);
    return out;
}

/// Integrates the free dynamics from cfg.x0. After every step the Euclidean
/// norm is compared against the threshold (>=); on a hit the run stops and
/// the last state below the threshold is reported. Sample k sits at time
/// k * tau; x0 and the final state are always recorded.
inline Trajectory simulate(const SimulationConfig& cfg)
{
    cfg.validate();
    Trajectory traj;
    traj.threshold = cfg.divergence_threshold;
    const std::size_t expected = cfg.steps / cfg.record_stride + 2;
    traj.times.reserve(expected);
    traj.states.reserve(expected);

    State x = cfg.x0;
    State next(x.size());
    traj.times.push_back(0.0);
    traj.states.push_back(x);

    Stepper stepper(cfg.matrix, cfg.activation, cfg.integrator);
    std::size_t last_recorded = 0;
    for (std::size_t k = 1; k <= cfg.steps; ++k) {
        next = x;
        stepper.step(next, cfg.tau);
        const double n = norm2(next);
        if (!(n < cfg.divergence_threshold)) {
            if (last_recorded != k - 1) {
                traj.times.push_back(static_cast<double>(k - 1) * cfg.tau);
                traj.states.push_back(x);
            }
            traj.termination = Diverged{k, x, n};
            return traj;
        }
        x.swap(next);
        if (k % cfg.record_stride == 0 || k == cfg.steps) {
            traj.times.push_back(static_cast<double>(k) * cfg.tau);
            traj.states.push_back(x);
            last_recorded = k;
        }
    }
    return traj;
}

} // namespace skewrnn
