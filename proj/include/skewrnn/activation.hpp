#pragma once

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <string_view>

#include "skewrnn/errors.hpp"
#include "skewrnn/linalg.hpp"

namespace skewrnn {

enum class Activation { Identity, Tanh, HardTanh, Sigmoid, Relu };

inline constexpr std::array<Activation, 5> kAllActivations = {
    Activation::Identity, Activation::Tanh, Activation::HardTanh, Activation::Sigmoid, Activation::Relu};

constexpr bool is_odd(Activation k) noexcept
{
    return k == Activation::Identity || k == Activation::Tanh || k == Activation::HardTanh;
}

constexpr bool is_bounded(Activation k) noexcept
{
    return k == Activation::Tanh || k == Activation::HardTanh || k == Activation::Sigmoid;
}

constexpr std::string_view to_string(Activation k) noexcept
{
    switch (k) {
    case Activation::Identity: return "identity";
    case Activation::Tanh: return "tanh";
    case Activation::HardTanh: return "hardtanh";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Relu: return "relu";
    }
    return "?";
}

inline Activation parse_activation(std::string_view name)
{
    for (Activation k : kAllActivations)
        if (to_string(k) == name) return k;
    throw ConfigError("unknown activation '" + std::string(name) +
                      "' (expected identity, tanh, hardtanh, sigmoid or relu)");
}

/// Unchecked scalar evaluation, used in the integrator inner loops.
inline double activate(Activation k, double a) noexcept
{
    switch (k) {
    case Activation::Identity: return a;
    case Activation::Tanh: return std::tanh(a);
    case Activation::HardTanh:
        // |a| == 1 takes the linear branch.
        if (std::abs(a) <= 1.0) return a;
        return a > 0.0 ? 1.0 : -1.0;
    case Activation::Sigmoid: return 1.0 / (1.0 + std::exp(-a));
    case Activation::Relu: return a > 0.0 ? a : 0.0;
    }
    return a;
}

inline double apply_scalar(Activation k, double a)
{
    if (std::isnan(a)) throw ConfigError("activation: NaN input");
    return activate(k, a);
}

inline void apply_vec_inplace(Activation k, std::span<double> v) noexcept
{
    if (k == Activation::Identity) return;
    for (double& x : v) x = activate(k, x);
}

inline State apply_vec(Activation k, std::span<const double> v)
{
    State out(v.begin(), v.end());
    for (double& x : out) x = apply_scalar(k, x);
    return out;
}

} // namespace skewrnn
