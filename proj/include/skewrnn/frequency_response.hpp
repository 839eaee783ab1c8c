#pragma once

#include <cmath>
#include <numbers>

#include "skewrnn/activation.hpp"
#include "skewrnn/dynamics.hpp"
#include "skewrnn/errors.hpp"
#include "skewrnn/spectral.hpp"

namespace skewrnn {

/// Configuration for a 2-D oscillator tuned to `freq_hz`.
///
/// Frequencies are temporal: the rotation block carries w = 2 pi f. The
/// weight multiplier is compensated: the base block holds w / w_m and is
/// multiplied by w_m, so the effective matrix is always block(w) and the
/// linear-regime frequency stays f. The template's initial state is divided
/// by w_m, which shrinks the pre-activations by the same factor and keeps a
/// saturating activation in its linear range for larger w. The template's
/// matrix is replaced.
inline SimulationConfig frequency_response_config(double freq_hz, Activation activation, double w_m,
                                                  const SimulationConfig& tmpl)
{
    if (!(freq_hz > 0.0) || !std::isfinite(freq_hz))
        throw ConfigError("frequency_response: frequency must be positive");
    if (!(w_m > 0.0) || !std::isfinite(w_m)) throw ConfigError("frequency_response: w_m must be positive");
    require_same_dim(2, tmpl.x0.size(), "frequency_response template x0");

    const double omega = 2.0 * std::numbers::pi * freq_hz;
    SimulationConfig cfg = tmpl;
    cfg.matrix = make_block_diagonal({omega / w_m}).scaled(w_m);
    cfg.activation = activation;
    for (double& v : cfg.x0) v /= w_m;
    return cfg;
}

/// Amplitude spectrum of x1 for the tuned oscillator. The sample rate is the
/// recording rate 1 / (tau * record_stride).
inline SpectrumReport frequency_response_experiment(double freq_hz, Activation activation, double w_m,
                                                    const SimulationConfig& tmpl)
{
    const SimulationConfig cfg = frequency_response_config(freq_hz, activation, w_m, tmpl);
    const Trajectory traj = simulate(cfg);
    const auto x1 = traj.component(0);
    return amplitude_spectrum(x1, 1.0 / (cfg.tau * static_cast<double>(cfg.record_stride)), 0);
}

} // namespace skewrnn
