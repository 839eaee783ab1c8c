// skewrnn command-line front end.
//
// Exit codes: 0 success, 1 unexpected failure, 2 configuration error,
// 3 I/O error, 4 divergence stop in single-run mode, 5 sweep finished with
// failed runs.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "skewrnn/config.hpp"
#include "skewrnn/experiments.hpp"
#include "skewrnn/invariants.hpp"
#include "skewrnn/io.hpp"
#include "skewrnn/spectral.hpp"
#include "skewrnn/stability.hpp"

namespace fs = std::filesystem;
using namespace skewrnn;

namespace {

enum ExitCode : int { kOk = 0, kFailure = 1, kConfig = 2, kIo = 3, kDiverged = 4, kSweepFailed = 5 };

struct Common {
    std::string config;
    std::string out;
    std::uint64_t seed = 42;
    std::size_t workers = 1;
    std::vector<std::string> sets;
};

/// Config file text plus `--set key=value` lines appended to every run.
ConfigFile load_config(const Common& c)
{
    ConfigFile file = c.config.empty() ? ConfigFile{} : parse_config(io::read_file(c.config));
    for (const auto& kv : c.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
        const std::string key = kv.substr(0, eq);
        const std::string value = kv.substr(eq + 1);
        if (file.runs.empty()) file.runs.emplace_back();
        for (auto& run : file.runs) run[key] = value;
    }
    return file;
}

void emit(const std::string& out, const std::string& content)
{
    if (out.empty() || out == "-") {
        std::cout << content;
    } else {
        io::write_file_atomic(out, content);
    }
}

/// Trajectory from --input CSV, or simulated from the first configured run.
Trajectory trajectory_input(const std::string& input, const Common& c, double& sample_rate)
{
    if (!input.empty()) {
        Trajectory t = io::trajectory_from_csv(io::read_file(input));
        if (sample_rate <= 0.0) {
            if (t.size() < 2 || !(t.times[1] > t.times[0]))
                throw ConfigError("cannot infer sample rate from " + input + "; pass --sample-rate");
            sample_rate = 1.0 / (t.times[1] - t.times[0]);
        }
        return t;
    }
    auto runs = runs_from_config(load_config(c), c.seed);
    const auto& cfg = runs.front().config;
    if (sample_rate <= 0.0) sample_rate = 1.0 / (cfg.tau * static_cast<double>(cfg.record_stride));
    return simulate(cfg);
}

int cmd_simulate(const Common& c)
{
    ExperimentPreset preset;
    preset.name = PresetName::Custom;
    preset.global_seed = c.seed;
    preset.sweep = runs_from_config(load_config(c), c.seed);
    preset.output_dir = c.out.empty() ? fs::path(".") : fs::path(c.out);
    const RunManifest m = run_experiment(preset, {c.workers, false});
    bool diverged = false;
    for (const auto& r : m.runs) {
        if (r.status != "ok") {
            std::cerr << r.name << ": " << r.error << '\n';
            return kIo;
        }
        std::cout << r.name << ": " << (r.diverged ? "diverged at step " + std::to_string(r.diverged_step) : "completed")
                  << '\n';
        diverged = diverged || r.diverged;
    }
    return diverged ? kDiverged : kOk;
}

int cmd_preset(const Common& c, const std::string& name, std::size_t seeds, std::optional<std::size_t> steps,
               bool resume)
{
    PresetOverrides o;
    o.global_seed = c.seed;
    o.seeds = seeds;
    o.steps = steps;
    o.output_dir = c.out.empty() ? fs::path("out") / name : fs::path(c.out);
    const PresetName p = parse_preset(name);
    if (p == PresetName::Custom) {
        if (c.config.empty()) throw ConfigError("preset custom requires --config");
        o.config_text = io::read_file(c.config);
    }
    const ExperimentPreset preset = build_preset(p, o);
    const RunManifest m = run_experiment(preset, {c.workers, resume});
    std::size_t diverged = 0;
    for (const auto& r : m.runs) diverged += r.diverged ? 1 : 0;
    std::cout << "preset " << name << ": " << m.runs.size() << " runs, " << diverged << " diverged, " << m.failed()
              << " failed -> " << (preset.output_dir / "manifest.json").string() << '\n';
    for (const auto& r : m.runs)
        if (r.status != "ok") std::cerr << r.name << ": " << r.error << '\n';
    return m.failed() ? kSweepFailed : kOk;
}

std::vector<Eigenvalue> parse_eigs(const std::string& text)
{
    // "re:im,re:im,..."
    std::vector<Eigenvalue> eigs;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find(',', pos);
        if (end == std::string::npos) end = text.size();
        const std::string item = text.substr(pos, end - pos);
        const auto colon = item.find(':');
        try {
            if (colon == std::string::npos) {
                eigs.push_back({std::stod(item), 0.0});
            } else {
                eigs.push_back({std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1))});
            }
        } catch (const std::logic_error&) {
            throw ConfigError("--eigs: cannot parse '" + item + "'");
        }
        pos = end + 1;
    }
    return eigs;
}

int cmd_classify(const Common& c, const std::string& matrix_path, const std::string& eigs_text, double tol)
{
    StabilityReport report;
    if (!eigs_text.empty()) {
        const auto eigs = parse_eigs(eigs_text);
        report = classify_stability(std::span<const Eigenvalue>(eigs), tol);
    } else {
        SkewMatrix a;
        if (!matrix_path.empty()) {
            auto j = nlohmann::json::parse(io::read_file(matrix_path));
            if (j.contains("config")) j = j.at("config").at("matrix"); // run sidecar
            a = io::matrix_from_json(j);
        } else {
            a = runs_from_config(load_config(c), c.seed).front().config.matrix;
        }
        report = classify_stability(a, tol);
    }
    emit(c.out, io::stability_to_json(report).dump(2) + "\n");
    return kOk;
}

int cmd_invariant(const Common& c, const std::string& input, const std::string& kind, double omega,
                  const std::vector<double>& freqs)
{
    double fs_unused = 1.0;
    const Trajectory t = trajectory_input(input, c, fs_unused);
    InvariantSpec spec = QuadraticNorm{};
    if (kind == "tanhlog2d") {
        spec = TanhLog2D{omega};
    } else if (kind == "tanhlogblock") {
        spec = TanhLogBlockDiag{freqs};
    } else if (kind != "quadratic") {
        throw ConfigError("unknown invariant kind '" + kind + "' (quadratic, tanhlog2d, tanhlogblock)");
    }
    const InvariantTrace trace = invariant_trace(spec, t);
    emit(c.out, io::invariant_csv(trace));
    std::cerr << "abs_drift " << trace.abs_drift << " rel_drift " << trace.rel_drift << '\n';
    return kOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Free dynamics of recurrent networks with skew-symmetric weights"};
    app.require_subcommand(1);

    Common common;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", common.config, "Run configuration file");
        sub->add_option("--out", common.out, "Output directory or file ('-' for stdout)");
        sub->add_option("--seed", common.seed, "Global seed");
        sub->add_option("--workers", common.workers, "Parallel runs")->check(CLI::PositiveNumber);
        sub->add_option("--set", common.sets, "Override a config key for every run (key=value)");
    };

    auto* simulate_cmd = app.add_subcommand("simulate", "Simulate the configured runs and write trajectories");
    add_common(simulate_cmd);

    std::string input;
    std::size_t component = 1;
    double sample_rate = 0.0;
    auto add_signal = [&](CLI::App* sub) {
        sub->add_option("--input", input, "Trajectory CSV (t,x1,...,xn); simulates --config when absent");
        sub->add_option("--component", component, "1-based state component")->check(CLI::PositiveNumber);
        sub->add_option("--sample-rate", sample_rate, "Sample rate in Hz (default: from the time column)");
    };

    auto* spectrum_cmd = app.add_subcommand("spectrum", "Amplitude spectrum of one state component");
    add_common(spectrum_cmd);
    add_signal(spectrum_cmd);

    std::size_t window_len = 4096;
    std::size_t hop = 1024;
    auto* stft_cmd = app.add_subcommand("stft", "Short-time Fourier transform of one state component");
    add_common(stft_cmd);
    add_signal(stft_cmd);
    stft_cmd->add_option("--window", window_len, "Hann window length in samples");
    stft_cmd->add_option("--hop", hop, "Hop in samples");

    std::string matrix_path;
    std::string eigs_text;
    double tol = kImagAxisTolerance;
    auto* classify_cmd = app.add_subcommand("classify", "Linear stability class of a skew matrix or eigenvalue list");
    add_common(classify_cmd);
    classify_cmd->add_option("--matrix", matrix_path, "Matrix JSON {dim, entries, origin} or a run sidecar");
    classify_cmd->add_option("--eigs", eigs_text, "Eigenvalues as re:im,re:im,...");
    classify_cmd->add_option("--tol", tol, "Imaginary-axis band on real parts");

    std::string inv_kind = "quadratic";
    double omega = 1.0;
    std::vector<double> freqs;
    auto* invariant_cmd = app.add_subcommand("invariant", "Conserved quantity along a trajectory (CSV t,H)");
    add_common(invariant_cmd);
    invariant_cmd->add_option("--input", input, "Trajectory CSV; simulates --config when absent");
    invariant_cmd->add_option("--kind", inv_kind, "quadratic | tanhlog2d | tanhlogblock");
    invariant_cmd->add_option("--omega", omega, "Block frequency for tanhlog2d");
    invariant_cmd->add_option("--freqs", freqs, "Block frequencies for tanhlogblock")->delimiter(',');

    double level = 1.0;
    std::size_t points = 360;
    auto* levelset_cmd = app.add_subcommand("levelset", "Level curve of the 2-D log-cosh invariant (CSV theta,x1,x2)");
    add_common(levelset_cmd);
    levelset_cmd->add_option("--omega", omega, "Block frequency");
    levelset_cmd->add_option("--level", level, "Level (> 0)");
    levelset_cmd->add_option("--points", points, "Number of angles")->check(CLI::PositiveNumber);

    std::string preset_name;
    std::size_t seeds = 3;
    std::optional<std::size_t> steps;
    bool resume = false;
    auto* preset_cmd = app.add_subcommand("preset", "Run an experiment campaign and write its manifest");
    add_common(preset_cmd);
    preset_cmd->add_option("--preset", preset_name, "fig1 | fig2 | fig3 | fig4 | custom")->required();
    preset_cmd->add_option("--seeds", seeds, "Seeds per grid cell")->check(CLI::PositiveNumber);
    preset_cmd->add_option("--steps", steps, "Override the step count");
    preset_cmd->add_flag("--resume", resume, "Skip runs whose outputs already exist");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kConfig;
    }

    try {
        if (*simulate_cmd) return cmd_simulate(common);
        if (*spectrum_cmd) {
            const Trajectory t = trajectory_input(input, common, sample_rate);
            if (component > t.dim()) throw ConfigError("--component out of range");
            const auto report = amplitude_spectrum(t.component(component - 1), sample_rate, component - 1);
            emit(common.out, io::spectrum_csv(report));
            std::cerr << "peak " << peak_frequency(report) << " Hz\n";
            return kOk;
        }
        if (*stft_cmd) {
            const Trajectory t = trajectory_input(input, common, sample_rate);
            if (component > t.dim()) throw ConfigError("--component out of range");
            emit(common.out, io::stft_csv(stft(t.component(component - 1), sample_rate, window_len, hop)));
            return kOk;
        }
        if (*classify_cmd) return cmd_classify(common, matrix_path, eigs_text, tol);
        if (*invariant_cmd) return cmd_invariant(common, input, inv_kind, omega, freqs);
        if (*levelset_cmd) {
            emit(common.out, io::level_set_csv(trace_level_set(TanhLog2D{omega}, level, points)));
            return kOk;
        }
        if (*preset_cmd) return cmd_preset(common, preset_name, seeds, steps, resume);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return kIo;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFailure;
    }
    return kFailure;
}
