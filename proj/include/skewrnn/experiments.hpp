#pragma once

#include <algorithm>
#include <array>
#include <optional>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <json.hpp>

#include "skewrnn/config.hpp"
#include "skewrnn/dynamics.hpp"
#include "skewrnn/frequency_response.hpp"
#include "skewrnn/invariants.hpp"
#include "skewrnn/io.hpp"
#include "skewrnn/random.hpp"
#include "skewrnn/spectral.hpp"

namespace skewrnn {

inline constexpr std::string_view kToolVersion = "0.1.0";

enum class PresetName { Fig1Grid, Fig2NonOdd, Fig3Spectra, Fig4HighDim, Custom };

constexpr std::string_view to_string(PresetName p) noexcept
{
    switch (p) {
    case PresetName::Fig1Grid: return "fig1";
    case PresetName::Fig2NonOdd: return "fig2";
    case PresetName::Fig3Spectra: return "fig3";
    case PresetName::Fig4HighDim: return "fig4";
    case PresetName::Custom: return "custom";
    }
    return "?";
}

inline PresetName parse_preset(std::string_view name)
{
    for (auto p : {PresetName::Fig1Grid, PresetName::Fig2NonOdd, PresetName::Fig3Spectra, PresetName::Fig4HighDim,
                   PresetName::Custom})
        if (to_string(p) == name) return p;
    throw ConfigError("unknown preset '" + std::string(name) + "' (expected fig1, fig2, fig3, fig4 or custom)");
}

enum class Analysis { Invariant, Spectrum, Stft, None };

constexpr std::string_view to_string(Analysis a) noexcept
{
    switch (a) {
    case Analysis::Invariant: return "invariant";
    case Analysis::Spectrum: return "spectrum";
    case Analysis::Stft: return "stft";
    case Analysis::None: return "none";
    }
    return "?";
}

inline Analysis parse_analysis(std::string_view name)
{
    for (auto a : {Analysis::Invariant, Analysis::Spectrum, Analysis::Stft, Analysis::None})
        if (to_string(a) == name) return a;
    throw ConfigError("unknown analysis '" + std::string(name) + "'");
}

/// One simulation in a sweep plus the analysis run on its trajectory.
struct RunSpec {
    std::string name;
    SimulationConfig config;
    Analysis analysis = Analysis::Invariant;
    std::size_t component = 0; // 0-based state index analysed
    std::size_t window_len = 4096;
    std::size_t hop = 1024;
    std::size_t output_stride = 1; // decimation of the trajectory CSV only
    bool reference_rk4 = false;    // also integrate with RK4 and report the excess norm growth
    nlohmann::json metadata = nlohmann::json::object();
};

struct ExperimentPreset {
    PresetName name = PresetName::Custom;
    std::vector<RunSpec> sweep;
    std::filesystem::path output_dir;
    std::uint64_t global_seed = 0;

    /// Every run valid and file names unique.
    void validate() const
    {
        std::set<std::string> names;
        for (const auto& r : sweep) {
            r.config.validate();
            if (r.name.empty()) throw ConfigError("run with empty name");
            if (r.name.find_first_of("/\\") != std::string::npos)
                throw ConfigError("run name '" + r.name + "' must not contain path separators");
            if (!names.insert(r.name).second) throw ConfigError("duplicate run name '" + r.name + "'");
            if (r.component >= r.config.matrix.dim())
                throw ConfigError("run '" + r.name + "': component out of range");
            if (r.output_stride == 0) throw ConfigError("run '" + r.name + "': output_stride must be >= 1");
        }
    }
};

struct PresetOverrides {
    std::uint64_t global_seed = 42;
    std::size_t seeds = 3;
    std::filesystem::path output_dir = "out";
    std::optional<std::size_t> steps;
    std::string config_text; // Custom preset source
};

namespace detail {

inline std::string format_tag(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

/// Matrix Normal(0, w^2) and state Normal(0, x^2) for one grid cell. The
/// same seed is used for every activation in a cell.
inline SimulationConfig gaussian_2d(double w, double x, std::uint64_t seed, Activation act, std::size_t steps)
{
    SkewMatrix a = make_random_skew(2, w, seed);
    Rng rng(seed, Stream::State);
    State x0{rng.normal(x), rng.normal(x)};
    SimulationConfig cfg{std::move(a), act, std::move(x0)};
    cfg.tau = 0.001;
    cfg.steps = steps;
    cfg.divergence_threshold = 100.0;
    cfg.integrator = Integrator::ForwardEuler;
    cfg.record_stride = 10;
    return cfg;
}

inline std::vector<RunSpec> phase_grid(std::string_view prefix, std::span<const Activation> acts,
                                       const PresetOverrides& o)
{
    std::vector<RunSpec> runs;
    const std::size_t steps = o.steps.value_or(100000);
    for (double w : {0.1, 1.0, 10.0}) {
        for (double x : {1.0, 10.0}) {
            for (std::size_t s = 0; s < o.seeds; ++s) {
                const std::uint64_t seed = run_seed(o.global_seed, s);
                for (Activation act : acts) {
                    RunSpec r;
                    r.name = std::string(prefix) + "_w" + format_tag(w) + "_x" + format_tag(x) + "_s" +
                             std::to_string(s) + "_" + std::string(to_string(act));
                    r.config = gaussian_2d(w, x, seed, act, steps);
                    r.analysis = Analysis::Invariant;
                    r.metadata = {{"w_std", w}, {"x_std", x}, {"seed_index", s}, {"seed", seed}};
                    runs.push_back(std::move(r));
                }
            }
        }
    }
    return runs;
}

} // namespace detail

inline constexpr std::array<double, 5> kFig3Frequencies = {5.0, 10.0, 15.0, 20.0, 25.0};
inline constexpr std::array<double, 3> kFig3WeightMultipliers = {10.0, 25.0, 50.0};
inline constexpr std::array<std::size_t, 3> kFig4Dims = {2, 20, 40};

/// Template for the tuned 2-D oscillators: RK4 at 1 kHz, 1e5 recorded
/// samples, x0 = (0.3, 0).
inline SimulationConfig fig3_template(std::size_t samples = 100000)
{
    SimulationConfig t{make_block_diagonal({1.0}), Activation::Identity, State{0.3, 0.0}};
    t.tau = 0.001;
    t.steps = samples - 1;
    t.divergence_threshold = 100.0;
    t.integrator = Integrator::RK4;
    t.record_stride = 1;
    return t;
}

inline std::vector<RunSpec> runs_from_config(const ConfigFile& file, std::uint64_t global_seed)
{
    static const std::set<std::string, std::less<>> known = {
        "name",   "matrix",    "dim",          "std",        "freqs",     "entries",
        "seed",   "x0",        "x0_std",       "activation", "integrator", "tau",
        "steps",  "divergence_threshold", "record_stride", "analysis", "component", "window_len",
        "hop",    "output_stride"};
    auto check = [&](const KeyValues& kv) {
        for (const auto& [k, v] : kv)
            if (!known.contains(k)) throw ConfigError("unknown config key '" + k + "'");
    };
    check(file.defaults);

    std::vector<KeyValues> runs = file.runs;
    if (runs.empty()) runs.emplace_back(); // defaults alone describe one run
    std::vector<RunSpec> out;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        check(runs[i]);
        KeyReader r(runs[i], file.defaults);
        const std::uint64_t seed = r.integer("seed", run_seed(global_seed, i));
        RunSpec spec;
        spec.name = r.str("name", "run" + std::to_string(i));
        spec.config = simulation_from_keys(r, seed);
        spec.analysis = parse_analysis(r.str("analysis", "invariant"));
        const auto component = r.integer("component", 1);
        if (component == 0) throw ConfigError("component is 1-based");
        spec.component = static_cast<std::size_t>(component - 1);
        spec.window_len = static_cast<std::size_t>(r.integer("window_len", 4096));
        spec.hop = static_cast<std::size_t>(r.integer("hop", 1024));
        spec.output_stride = static_cast<std::size_t>(r.integer("output_stride", 1));
        spec.metadata = {{"seed", seed}};
        out.push_back(std::move(spec));
    }
    return out;
}

inline ExperimentPreset build_preset(PresetName name, const PresetOverrides& o = {})
{
    ExperimentPreset p;
    p.name = name;
    p.output_dir = o.output_dir;
    p.global_seed = o.global_seed;
    switch (name) {
    case PresetName::Fig1Grid: {
        constexpr std::array acts = {Activation::Identity, Activation::Tanh, Activation::HardTanh};
        p.sweep = detail::phase_grid("fig1", acts, o);
        break;
    }
    case PresetName::Fig2NonOdd: {
        constexpr std::array acts = {Activation::Identity, Activation::Sigmoid, Activation::Relu};
        p.sweep = detail::phase_grid("fig2", acts, o);
        break;
    }
    case PresetName::Fig3Spectra: {
        const SimulationConfig tmpl = fig3_template(o.steps ? *o.steps + 1 : 100000);
        auto add = [&](double f, Activation act, double w_m) {
            RunSpec r;
            r.name = "fig3_f" + detail::format_tag(f) + "_" + std::string(to_string(act)) + "_wm" +
                     detail::format_tag(w_m);
            r.config = frequency_response_config(f, act, w_m, tmpl);
            r.analysis = Analysis::Spectrum;
            r.metadata = {{"freq_hz", f}, {"w_m", w_m}, {"x0_scaled_by", 1.0 / w_m}};
            p.sweep.push_back(std::move(r));
        };
        for (double f : kFig3Frequencies) {
            add(f, Activation::Identity, 1.0);
            add(f, Activation::Tanh, 1.0);
            for (double w_m : kFig3WeightMultipliers) add(f, Activation::HardTanh, w_m);
        }
        break;
    }
    case PresetName::Fig4HighDim: {
        const std::size_t steps = o.steps.value_or(100000);
        for (std::size_t dim : kFig4Dims) {
            for (std::size_t s = 0; s < o.seeds; ++s) {
                const std::uint64_t seed = run_seed(o.global_seed, s);
                Rng rng(seed, Stream::State);
                State x0(dim);
                for (double& v : x0) v = rng.normal(1.0);
                RunSpec r;
                r.name = "fig4_n" + std::to_string(dim) + "_s" + std::to_string(s);
                r.config = SimulationConfig{make_random_skew_uniform_scaled(dim, seed), Activation::Tanh, x0};
                r.config.tau = 0.001;
                r.config.steps = steps;
                r.config.divergence_threshold = 100.0;
                r.config.integrator = Integrator::ForwardEuler;
                r.config.record_stride = 1;
                r.analysis = Analysis::Stft;
                r.window_len = 4096;
                r.hop = 1024;
                r.output_stride = 10;
                r.reference_rk4 = true;
                r.metadata = {{"dim", dim}, {"seed_index", s}, {"seed", seed}};
                p.sweep.push_back(std::move(r));
            }
        }
        break;
    }
    case PresetName::Custom:
        p.sweep = runs_from_config(parse_config(o.config_text), o.global_seed);
        break;
    }
    p.validate();
    return p;
}

/// FNV-1a 64 over the canonical JSON of a run. nlohmann's float formatting
/// is its own (shortest round-trip), so digests agree across platforms.
inline std::string config_digest(const RunSpec& r)
{
    nlohmann::json j = io::config_to_json(r.config);
    j["analysis"] = to_string(r.analysis);
    j["component"] = r.component;
    j["window_len"] = r.window_len;
    j["hop"] = r.hop;
    j["output_stride"] = r.output_stride;
    j["reference_rk4"] = r.reference_rk4;
    const std::string text = j.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

struct RunRecord {
    std::string name;
    std::string digest;
    std::vector<std::string> outputs;
    std::string status = "ok"; // ok | failed
    std::string error;
    bool diverged = false;
    std::size_t diverged_step = 0;
    double wall_time_s = 0.0;
    nlohmann::json summary = nlohmann::json::object();
    nlohmann::json metadata = nlohmann::json::object();
};

struct RunManifest {
    std::string preset;
    std::string tool_version{kToolVersion};
    std::uint64_t global_seed = 0;
    std::vector<RunRecord> runs;

    std::size_t failed() const
    {
        return static_cast<std::size_t>(std::count_if(runs.begin(), runs.end(), [](const RunRecord& r) {
            return r.status != "ok";
        }));
    }
};

inline nlohmann::json manifest_to_json(const RunManifest& m)
{
    nlohmann::json runs = nlohmann::json::array();
    for (const auto& r : m.runs) {
        nlohmann::json j = {{"name", r.name},
                            {"config_digest", r.digest},
                            {"outputs", r.outputs},
                            {"status", r.status},
                            {"termination", r.diverged ? "diverged" : "completed"},
                            {"wall_time_s", r.wall_time_s},
                            {"summary", r.summary},
                            {"metadata", r.metadata}};
        j["step"] = r.diverged ? nlohmann::json(r.diverged_step) : nlohmann::json(nullptr);
        if (!r.error.empty()) j["error"] = r.error;
        runs.push_back(std::move(j));
    }
    return {{"preset", m.preset}, {"tool_version", m.tool_version}, {"global_seed", m.global_seed}, {"runs", runs}};
}

namespace detail {

inline double final_norm(const Trajectory& t)
{
    return t.states.empty() ? 0.0 : norm2(t.states.back());
}

/// Simulates one run, writes its files, fills the record. Throws on I/O.
inline void execute_run(const RunSpec& spec, const std::filesystem::path& dir, RunRecord& rec)
{
    const Trajectory traj = simulate(spec.config);
    rec.diverged = traj.diverged();
    if (const auto* d = std::get_if<Diverged>(&traj.termination)) rec.diverged_step = d->step;

    const double n0 = norm2(spec.config.x0);
    rec.summary = {{"initial_norm", n0},
                   {"final_norm", final_norm(traj)},
                   {"relative_norm_growth", (final_norm(traj) - n0) / n0},
                   {"samples", traj.size()}};
    if (spec.reference_rk4 && spec.config.integrator != Integrator::RK4) {
        // Norm growth attributable to the integrator: final norm relative to
        // an RK4 run of the same configuration.
        SimulationConfig ref = spec.config;
        ref.integrator = Integrator::RK4;
        const Trajectory ref_traj = simulate(ref);
        if (!traj.diverged() && !ref_traj.diverged())
            rec.summary["excess_norm_growth"] = final_norm(traj) / final_norm(ref_traj) - 1.0;
    }

    auto put = [&](const std::string& file, std::string_view content) {
        io::write_file_atomic(dir / file, content);
        rec.outputs.push_back(file);
    };
    put(spec.name + ".traj.csv", io::trajectory_csv(traj, spec.output_stride));

    const double fs = 1.0 / (spec.config.tau * static_cast<double>(spec.config.record_stride));
    switch (spec.analysis) {
    case Analysis::Invariant: {
        const InvariantSpec inv = natural_invariant(spec.config.matrix, spec.config.activation);
        const InvariantTrace trace = invariant_trace(inv, traj);
        rec.summary["invariant"] = std::holds_alternative<QuadraticNorm>(inv) ? "quadratic_norm" : "tanh_log";
        rec.summary["invariant_rel_drift"] = trace.rel_drift;
        put(spec.name + ".invariant.csv", io::invariant_csv(trace));
        break;
    }
    case Analysis::Spectrum: {
        const auto signal = traj.component(spec.component);
        const SpectrumReport rep = amplitude_spectrum(signal, fs, spec.component);
        rec.summary["peak_hz"] = peak_frequency(rep);
        put(spec.name + ".spectrum.csv", io::spectrum_csv(rep));
        break;
    }
    case Analysis::Stft: {
        const auto signal = traj.component(spec.component);
        put(spec.name + ".series.csv", io::series_csv(traj.times, signal, "x" + std::to_string(spec.component + 1)));
        const std::size_t window = std::min(spec.window_len, signal.size());
        const StftReport rep = stft(signal, fs, window, std::min(spec.hop, window));
        put(spec.name + ".stft.csv", io::stft_csv(rep));
        break;
    }
    case Analysis::None: break;
    }

    // Sidecar goes last: its presence with a matching digest marks the run
    // complete for resume.
    rec.outputs.push_back(spec.name + ".json");
    nlohmann::json side = io::sidecar_json(spec.config, traj);
    side["name"] = spec.name;
    side["digest"] = rec.digest;
    side["metadata"] = spec.metadata;
    side["summary"] = rec.summary;
    side["outputs"] = rec.outputs;
    io::write_file_atomic(dir / rec.outputs.back(), side.dump(2));
}

/// Rebuilds a record from files left by an earlier sweep, if they are all
/// present and the sidecar matches the run's digest.
inline bool resume_run(const RunSpec& spec, const std::filesystem::path& dir, RunRecord& rec)
{
    const auto side_path = dir / (spec.name + ".json");
    if (!std::filesystem::exists(side_path)) return false;
    nlohmann::json side;
    try {
        side = nlohmann::json::parse(io::read_file(side_path));
    } catch (const std::exception&) {
        return false;
    }
    if (side.value("digest", std::string{}) != rec.digest || !side.contains("outputs")) return false;
    auto outputs = side.at("outputs").get<std::vector<std::string>>();
    for (const auto& f : outputs)
        if (!std::filesystem::exists(dir / f)) return false;
    rec.outputs = std::move(outputs);
    rec.diverged = side.at("termination") == "diverged";
    if (rec.diverged) rec.diverged_step = side.at("step").get<std::size_t>();
    rec.summary = side.value("summary", nlohmann::json::object());
    return true;
}

} // namespace detail

struct RunOptions {
    std::size_t workers = 1;
    bool resume = false;
};

/// Executes every run of the preset (up to `workers` at a time), writes the
/// data files and `manifest.json` into the output directory. A failing run
/// is recorded and the sweep continues.
inline RunManifest run_experiment(const ExperimentPreset& preset, const RunOptions& opts = {})
{
    preset.validate();
    std::error_code ec;
    std::filesystem::create_directories(preset.output_dir, ec);
    if (ec) throw IoError("cannot create " + preset.output_dir.string() + ": " + ec.message());

    RunManifest manifest;
    manifest.preset = std::string(to_string(preset.name));
    manifest.global_seed = preset.global_seed;
    manifest.runs.resize(preset.sweep.size());

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < preset.sweep.size(); i = next++) {
            const RunSpec& spec = preset.sweep[i];
            RunRecord& rec = manifest.runs[i];
            rec.name = spec.name;
            rec.digest = config_digest(spec);
            rec.metadata = spec.metadata;
            if (opts.resume && detail::resume_run(spec, preset.output_dir, rec)) continue;
            const auto start = std::chrono::steady_clock::now();
            try {
                detail::execute_run(spec, preset.output_dir, rec);
            } catch (const std::exception& e) {
                rec.status = "failed";
                rec.error = e.what();
            }
            rec.wall_time_s =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        }
    };

    const std::size_t n_workers = std::clamp<std::size_t>(opts.workers, 1, std::max<std::size_t>(1, preset.sweep.size()));
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    }

    io::write_file_atomic(preset.output_dir / "manifest.json", manifest_to_json(manifest).dump(2));
    return manifest;
}

} // namespace skewrnn
