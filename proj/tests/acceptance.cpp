// Acceptance gate: one PASS/FAIL line per criterion with the measured value
// and its tolerance. Exit status is non-zero if any criterion fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "skewrnn/experiments.hpp"
#include "skewrnn/frequency_response.hpp"
#include "skewrnn/invariants.hpp"
#include "skewrnn/stability.hpp"

using namespace skewrnn;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

SimulationConfig rotation(Activation act, State x0, Integrator method, std::size_t steps = 10000)
{
    SimulationConfig cfg{SkewMatrix::from_entries(2, {0, -1, 1, 0}), act, std::move(x0)};
    cfg.tau = 0.001;
    cfg.steps = steps;
    cfg.integrator = method;
    cfg.record_stride = 1;
    return cfg;
}

double max_gap(const Trajectory& a, const Trajectory& b)
{
    double m = 0.0;
    for (std::size_t k = 0; k < std::min(a.size(), b.size()); ++k)
        for (std::size_t i = 0; i < a.dim(); ++i) m = std::max(m, std::abs(a.states[k][i] - b.states[k][i]));
    return m;
}

Outcome norm_conservation()
{
    const auto t0 = std::chrono::steady_clock::now();
    const auto traj = simulate(rotation(Activation::Identity, {1, 0}, Integrator::RK4));
    double dev = 0.0;
    for (const auto& s : traj.states) dev = std::max(dev, std::abs(norm2(s) - 1.0));
    const double secs = seconds_since(t0);
    return {dev <= 1e-8 && secs < 1.0, fmt("max |‖x‖-1| = %.3e (tol 1e-8), %.3f s (limit 1 s)", dev, secs)};
}

Outcome euler_growth()
{
    const auto traj = simulate(rotation(Activation::Identity, {1, 0}, Integrator::ForwardEuler));
    const double n2 = dot(traj.states.back(), traj.states.back());
    const double expected = std::pow(1.0 + 1e-6, 1e4);
    const double rel = std::abs(n2 - expected) / expected;
    return {rel <= 1e-9, fmt("‖x_10000‖² = %.15f vs %.15f, rel err %.3e (tol 1e-9)", n2, expected, rel)};
}

Outcome tanh_invariant_2d()
{
    const auto t0 = std::chrono::steady_clock::now();
    const auto traj = simulate(rotation(Activation::Tanh, {2, 0}, Integrator::RK4));
    const auto tr = invariant_trace(TanhLog2D{1.0}, traj);
    const double secs = seconds_since(t0);
    return {tr.rel_drift <= 1e-6 && secs < 1.0,
            fmt("rel drift %.3e (tol 1e-6), %.3f s (limit 1 s)", tr.rel_drift, secs)};
}

Outcome tanh_invariant_block()
{
    const std::vector<double> freqs{1.0, 2.7, 0.5};
    Rng rng(2024, Stream::State);
    State x0(6);
    for (double& v : x0) v = rng.normal(1.0);
    SimulationConfig cfg{make_block_diagonal(freqs), Activation::Tanh, x0};
    cfg.steps = 10000;
    cfg.integrator = Integrator::RK4;
    const auto tr = invariant_trace(TanhLogBlockDiag{freqs}, simulate(cfg));

    const TanhLogBlockDiag spec{freqs};
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        State x(6);
        for (double& v : x) v = rng.uniform_symmetric(5.0);
        worst = std::max(worst, std::abs(dot(invariant_gradient(spec, x), vector_field(cfg.matrix, Activation::Tanh, x))));
    }
    return {tr.rel_drift <= 1e-6 && worst <= 1e-12,
            fmt("rel drift %.3e (tol 1e-6); max |∇H·f| over 1e4 points %.3e (tol 1e-12)", tr.rel_drift, worst)};
}

Outcome orbit_closure()
{
    const auto traj = simulate(rotation(Activation::Tanh, {1.5, 0}, Integrator::RK4, 20000));
    const auto ret = find_orbit_return(traj, 1e-3, 0.75, 20.0);

    const TanhLog2D spec{1.0};
    const double level = eval_invariant(spec, std::vector<double>{1.5, 0.0});
    double worst = 0.0;
    for (const auto& p : trace_level_set(spec, level, 720))
        worst = std::max(worst, std::abs(eval_invariant(spec, std::vector<double>{p.x1, p.x2}) - level));
    return {ret.found && worst <= 1e-10,
            fmt("return at t = %.3f, distance %.3e (tol 1e-3, window 20 s); level-set max |H-level| %.3e (tol 1e-10)",
                ret.time, ret.distance, worst)};
}

Outcome stability_trichotomy()
{
    const bool a = classify_stability({{-1, 0}, {-2, 0}}).cls == StabilityClass::AsymptoticallyStable;
    const bool m = classify_stability(SkewMatrix::from_entries(2, {0, -1, 1, 0})).cls == StabilityClass::MarginallyStable;
    const bool u = classify_stability({{1, 0}, {-1, 0}}).cls == StabilityClass::Unstable;
    std::size_t marginal = 0;
    double worst = 0.0;
    for (std::uint64_t i = 0; i < 100; ++i) {
        const std::size_t dim = 2 + i % 39;
        const auto r = classify_stability(make_random_skew(dim, 1.0, run_seed(7, i)));
        marginal += r.cls == StabilityClass::MarginallyStable;
        for (const auto& e : r.eigen_summary) worst = std::max(worst, std::abs(e.re));
    }
    return {a && m && u && marginal == 100 && worst <= 1e-9,
            fmt("diag(-1,-2) %s, rotation %s, diag(1,-1) %s; random skew marginal %zu/100, max |Re| %.1e (tol 1e-9)",
                a ? "asymptotic" : "WRONG", m ? "marginal" : "WRONG", u ? "unstable" : "WRONG", marginal, worst)};
}

Outcome protocol_grid()
{
    const auto t0 = std::chrono::steady_clock::now();
    PresetOverrides o; // 3 seeds, 1e5 steps, tau 0.001, threshold 100
    std::size_t saturating = 0, saturating_diverged = 0, relu = 0, relu_diverged = 0;
    std::array<std::size_t, 3> relu_by_seed{};
    for (PresetName p : {PresetName::Fig1Grid, PresetName::Fig2NonOdd}) {
        for (const auto& run : build_preset(p, o).sweep) {
            const bool div = simulate(run.config).diverged();
            const auto act = run.config.activation;
            if (act == Activation::Tanh || act == Activation::HardTanh) {
                ++saturating;
                saturating_diverged += div;
            } else if (act == Activation::Relu) {
                ++relu;
                relu_diverged += div;
                relu_by_seed[run.metadata.at("seed_index").get<std::size_t>()] += div;
            }
        }
    }
    const double secs = seconds_since(t0);
    return {saturating_diverged == 0 && relu_diverged >= 1 && secs < 30.0,
            fmt("tanh/hardtanh stops %zu/%zu (need 0); relu stops %zu/%zu (need >= 1 over the seed set; "
                "by seed %zu/%zu/%zu); %.2f s (limit 30 s)",
                saturating_diverged, saturating, relu_diverged, relu, relu_by_seed[0], relu_by_seed[1],
                relu_by_seed[2], secs)};
}

Outcome saturation_equivalence()
{
    // Identical draws per seed for every activation; pointwise gaps over the
    // first 1e4 steps.
    double saturated = 0.0, linear = 0.0;
    for (std::size_t s = 0; s < 3; ++s) {
        const std::uint64_t seed = run_seed(42, s);
        auto cfg = [&](double w, double x, Activation act) {
            auto c = detail::gaussian_2d(w, x, seed, act, 10000);
            c.record_stride = 1;
            return c;
        };
        saturated = std::max(saturated, max_gap(simulate(cfg(10, 10, Activation::Tanh)),
                                                simulate(cfg(10, 10, Activation::HardTanh))));
        const auto id = simulate(cfg(0.1, 0.1, Activation::Identity));
        const auto th = simulate(cfg(0.1, 0.1, Activation::Tanh));
        const auto ht = simulate(cfg(0.1, 0.1, Activation::HardTanh));
        linear = std::max({linear, max_gap(id, th), max_gap(id, ht), max_gap(th, ht)});
    }
    return {saturated <= 1e-3 && linear <= 1e-3,
            fmt("saturated (w=10, x=10) tanh vs hardtanh max gap %.3e (tol 1e-3); "
                "linear (w=0.1, x=0.1) max pairwise gap %.3e (tol 1e-3)",
                saturated, linear)};
}

Outcome line_spectrum()
{
    const auto tmpl = fig3_template();
    std::size_t linear_ok = 0;
    std::array<std::size_t, 3> matches{};
    for (double f : kFig3Frequencies) {
        const auto lin = frequency_response_experiment(f, Activation::Identity, 1.0, tmpl);
        const double bin = lin.sample_rate_hz / static_cast<double>(lin.signal_length);
        linear_ok += std::abs(peak_frequency(lin) - f) <= bin + 1e-9;
        for (std::size_t m = 0; m < kFig3WeightMultipliers.size(); ++m) {
            const auto r = frequency_response_experiment(f, Activation::HardTanh, kFig3WeightMultipliers[m], tmpl);
            const auto d = static_cast<long>(peak_bin(r.amplitude)) - static_cast<long>(peak_bin(lin.amplitude));
            matches[m] += std::abs(d) <= 1;
        }
    }
    return {linear_ok == 5 && matches[2] == 5 && matches[1] > matches[0],
            fmt("linear argmax within one bin %zu/5; hardtanh matches linear argmax: w_m=10 %zu/5, "
                "w_m=25 %zu/5, w_m=50 %zu/5 (need 5/5 at 50, 25 > 10)",
                linear_ok, matches[0], matches[1], matches[2])};
}

Outcome euler_order()
{
    const auto a = make_block_diagonal({1.0});
    const State x0{1.0, 0.0};
    const auto exact = skew_expm_apply(a, 1.0, x0);
    auto error = [&](double tau) {
        SimulationConfig cfg{a, Activation::Identity, x0};
        cfg.tau = tau;
        cfg.steps = static_cast<std::size_t>(std::llround(1.0 / tau));
        const auto x = simulate(cfg).states.back();
        return std::hypot(x[0] - exact[0], x[1] - exact[1]);
    };
    const double e1 = error(0.01), e2 = error(0.005);
    const double factor = e1 / e2;
    return {factor >= 1.8 && factor <= 2.2,
            fmt("error(tau=0.01) %.4e, error(tau=0.005) %.4e, factor %.4f (need [1.8, 2.2])", e1, e2, factor)};
}

} // namespace

int main()
{
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"norm conservation (linear skew, RK4)", norm_conservation},
        {"Euler norm growth (closed form)", euler_growth},
        {"tanh invariant conservation, 2-D", tanh_invariant_2d},
        {"tanh invariant conservation, block-diagonal 6-D", tanh_invariant_block},
        {"orbit closure and level sets", orbit_closure},
        {"stability trichotomy", stability_trichotomy},
        {"phase-grid protocol (divergence stops)", protocol_grid},
        {"saturation equivalence", saturation_equivalence},
        {"line spectrum and w_m band widening", line_spectrum},
        {"Euler convergence order", euler_order},
    };
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("%s  %-48s %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
