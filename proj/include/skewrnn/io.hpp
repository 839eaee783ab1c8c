#pragma once

// Data products: CSV tables with 17 significant digits and JSON documents.

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "skewrnn/dynamics.hpp"
#include "skewrnn/errors.hpp"
#include "skewrnn/invariants.hpp"
#include "skewrnn/skew_matrix.hpp"
#include "skewrnn/spectral.hpp"
#include "skewrnn/stability.hpp"

namespace skewrnn::io {

using json = nlohmann::json;

inline void append_double(std::string& out, double v)
{
    char buf[32];
    const int len = std::snprintf(buf, sizeof buf, "%.17g", v);
    out.append(buf, static_cast<std::size_t>(len));
}

/// Writes to `<path>.tmp` and renames over `path`, so readers never observe
/// a partially written file.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view content)
{
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot open " + tmp.string() + " for writing");
        f.write(content.data(), static_cast<std::streamsize>(content.size()));
        f.flush();
        if (!f) throw IoError("write failed: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("rename " + tmp.string() + " -> " + path.string() + ": " + ec.message());
}

inline std::string read_file(const std::filesystem::path& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// ---------------------------------------------------------------- matrices

inline json origin_to_json(const MatrixOrigin& origin)
{
    return std::visit(
        [](const auto& o) -> json {
            using T = std::decay_t<decltype(o)>;
            if constexpr (std::is_same_v<T, RandomGaussian>) {
                return {{"kind", "random_gaussian"}, {"std", o.stddev}, {"seed", o.seed}};
            } else if constexpr (std::is_same_v<T, RandomUniformScaled>) {
                return {{"kind", "uniform_scaled"}, {"bound", o.bound}, {"seed", o.seed}};
            } else if constexpr (std::is_same_v<T, BlockDiagonal>) {
                return {{"kind", "block_diagonal"}, {"freqs", o.freqs}};
            } else {
                return {{"kind", "explicit"}};
            }
        },
        origin);
}

inline json matrix_to_json(const SkewMatrix& a)
{
    return {{"dim", a.dim()},
            {"entries", std::vector<double>(a.entries().begin(), a.entries().end())},
            {"origin", origin_to_json(a.origin())}};
}

/// Parses {dim, entries, origin}. Entries must be exactly skew; a
/// block-diagonal origin must also match its freqs entry for entry.
inline SkewMatrix matrix_from_json(const json& j)
{
    try {
        const auto dim = j.at("dim").get<std::size_t>();
        auto entries = j.at("entries").get<std::vector<double>>();
        MatrixOrigin origin = Explicit{};
        if (j.contains("origin")) {
            const auto& o = j.at("origin");
            const auto kind = o.at("kind").get<std::string>();
            if (kind == "random_gaussian") {
                origin = RandomGaussian{o.at("std").get<double>(), o.at("seed").get<std::uint64_t>()};
            } else if (kind == "uniform_scaled") {
                origin = RandomUniformScaled{o.at("bound").get<double>(), o.at("seed").get<std::uint64_t>()};
            } else if (kind == "block_diagonal") {
                const auto freqs = o.at("freqs").get<std::vector<double>>();
                const auto expected = make_block_diagonal(freqs);
                if (!std::ranges::equal(expected.entries(), entries))
                    throw ConfigError("matrix json: entries do not match block_diagonal freqs");
                origin = BlockDiagonal{freqs};
            } else if (kind != "explicit") {
                throw ConfigError("matrix json: unknown origin kind '" + kind + "'");
            }
        }
        return SkewMatrix::from_entries(dim, std::move(entries), std::move(origin));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("matrix json: ") + e.what());
    }
}

// ------------------------------------------------------------ trajectories

inline std::string trajectory_csv(const Trajectory& traj, std::size_t stride = 1)
{
    std::string out = "t";
    for (std::size_t i = 1; i <= traj.dim(); ++i) out += ",x" + std::to_string(i);
    out += '\n';
    out.reserve(out.size() + traj.size() / stride * (traj.dim() + 1) * 24);
    const std::size_t n = traj.size();
    for (std::size_t k = 0; k < n; ++k) {
        if (k % stride != 0 && k + 1 != n) continue;
        append_double(out, traj.times[k]);
        for (double v : traj.states[k]) {
            out += ',';
            append_double(out, v);
        }
        out += '\n';
    }
    return out;
}

/// Parses a numeric CSV with a single header line.
inline std::vector<std::vector<double>> read_numeric_csv(std::string_view text, std::vector<std::string>* header = nullptr)
{
    std::vector<std::vector<double>> rows;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        pos = end + 1;
        ++line_no;
        if (line.empty()) continue;
        if (line_no == 1) {
            if (header) {
                std::size_t p = 0;
                while (p <= line.size()) {
                    std::size_t c = line.find(',', p);
                    if (c == std::string_view::npos) c = line.size();
                    header->emplace_back(line.substr(p, c - p));
                    p = c + 1;
                }
            }
            continue;
        }
        std::vector<double> row;
        const char* p = line.data();
        const char* last = line.data() + line.size();
        while (p <= last) {
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(p, last, v);
            if (ec != std::errc()) throw IoError("csv line " + std::to_string(line_no) + ": bad number");
            row.push_back(v);
            if (ptr == last) break;
            if (*ptr != ',') throw IoError("csv line " + std::to_string(line_no) + ": expected ','");
            p = ptr + 1;
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw IoError("csv line " + std::to_string(line_no) + ": inconsistent column count");
        rows.push_back(std::move(row));
    }
    return rows;
}

/// Reads a `t,x1,...,xn` trajectory table. Termination is left as Completed.
inline Trajectory trajectory_from_csv(std::string_view text)
{
    std::vector<std::string> header;
    auto rows = read_numeric_csv(text, &header);
    if (header.empty() || header.front() != "t") throw IoError("trajectory csv: header must start with 't'");
    Trajectory traj;
    for (auto& r : rows) {
        if (r.size() < 2) throw IoError("trajectory csv: need at least one state column");
        traj.times.push_back(r.front());
        traj.states.emplace_back(r.begin() + 1, r.end());
    }
    return traj;
}

inline json termination_to_json(const Trajectory& traj)
{
    json j;
    j["threshold"] = traj.threshold;
    if (const auto* d = std::get_if<Diverged>(&traj.termination)) {
        j["termination"] = "diverged";
        j["step"] = d->step;
        j["last_state"] = d->last_state;
        j["trigger_norm"] = d->trigger_norm;
    } else {
        j["termination"] = "completed";
        j["step"] = nullptr;
    }
    return j;
}

inline json config_to_json(const SimulationConfig& cfg)
{
    return {{"matrix", matrix_to_json(cfg.matrix)},
            {"activation", to_string(cfg.activation)},
            {"integrator", to_string(cfg.integrator)},
            {"x0", cfg.x0},
            {"tau", cfg.tau},
            {"steps", cfg.steps},
            {"divergence_threshold", cfg.divergence_threshold},
            {"record_stride", cfg.record_stride}};
}

/// Sidecar written next to a trajectory CSV: termination metadata plus the
/// configuration that produced it.
inline json sidecar_json(const SimulationConfig& cfg, const Trajectory& traj)
{
    json j = termination_to_json(traj);
    j["config"] = config_to_json(cfg);
    return j;
}

// ----------------------------------------------------------------- analysis

inline std::string invariant_csv(const InvariantTrace& trace)
{
    std::string out = "t,H\n";
    for (std::size_t k = 0; k < trace.values.size(); ++k) {
        append_double(out, trace.times[k]);
        out += ',';
        append_double(out, trace.values[k]);
        out += '\n';
    }
    return out;
}

inline std::string spectrum_csv(const SpectrumReport& r)
{
    std::string out = "freq_hz,amplitude\n";
    for (std::size_t k = 0; k < r.freqs_hz.size(); ++k) {
        append_double(out, r.freqs_hz[k]);
        out += ',';
        append_double(out, r.amplitude[k]);
        out += '\n';
    }
    return out;
}

/// Long form: one row per (time, frequency) cell.
inline std::string stft_csv(const StftReport& r)
{
    std::string out = "t,freq_hz,magnitude\n";
    for (std::size_t i = 0; i < r.times_s.size(); ++i) {
        for (std::size_t k = 0; k < r.freqs_hz.size(); ++k) {
            append_double(out, r.times_s[i]);
            out += ',';
            append_double(out, r.freqs_hz[k]);
            out += ',';
            append_double(out, r.magnitude[i][k]);
            out += '\n';
        }
    }
    return out;
}

inline std::string series_csv(std::span<const double> times, std::span<const double> values, std::string_view column)
{
    std::string out = "t,";
    out += column;
    out += '\n';
    for (std::size_t k = 0; k < values.size(); ++k) {
        append_double(out, times[k]);
        out += ',';
        append_double(out, values[k]);
        out += '\n';
    }
    return out;
}

inline std::string level_set_csv(std::span<const LevelPoint> pts)
{
    std::string out = "theta,x1,x2\n";
    for (const auto& p : pts) {
        append_double(out, p.theta);
        out += ',';
        append_double(out, p.x1);
        out += ',';
        append_double(out, p.x2);
        out += '\n';
    }
    return out;
}

inline json stability_to_json(const StabilityReport& r)
{
    json eigs = json::array();
    for (const auto& e : r.eigen_summary) eigs.push_back({{"re", e.re}, {"im", e.im}});
    return {{"class", to_string(r.cls)}, {"eigenvalues", eigs}, {"notes", r.notes}};
}

} // namespace skewrnn::io
