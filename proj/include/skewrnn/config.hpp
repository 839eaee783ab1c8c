#pragma once

// Run configuration files.
//
// A flat key/value text format. Lines are `key = value`; `#` starts a
// comment. A `[defaults]` section supplies keys for every run; each `[run]`
// section starts a new run. Keys outside any section count as defaults.
// List values are comma separated.
//
//   [defaults]
//   tau = 0.001
//   steps = 100000
//
//   [run]
//   name = ring
//   matrix = block_diagonal
//   freqs = 1, 2.7
//   activation = tanh
//   x0 = 1, 0, 0.5, 0
//
// Recognised keys (see RunSpec / SimulationConfig):
//   name, matrix (random_gaussian | uniform_scaled | block_diagonal |
//   explicit), dim, std, freqs, entries, seed, x0, x0_std, activation,
//   integrator (euler | rk4), tau, steps, divergence_threshold,
//   record_stride, analysis (invariant | spectrum | stft | none),
//   component (1-based), window_len, hop, output_stride.

#include <charconv>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "skewrnn/activation.hpp"
#include "skewrnn/dynamics.hpp"
#include "skewrnn/errors.hpp"
#include "skewrnn/random.hpp"
#include "skewrnn/skew_matrix.hpp"

namespace skewrnn {

using KeyValues = std::map<std::string, std::string, std::less<>>;

struct ConfigFile {
    KeyValues defaults;
    std::vector<KeyValues> runs;
};

namespace detail {

inline std::string_view trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

} // namespace detail

inline ConfigFile parse_config(std::string_view text)
{
    ConfigFile cfg;
    KeyValues* current = &cfg.defaults;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const std::string where = "config line " + std::to_string(line_no);
        if (line.front() == '[') {
            if (line == "[defaults]") {
                current = &cfg.defaults;
            } else if (line == "[run]") {
                current = &cfg.runs.emplace_back();
            } else {
                throw ConfigError(where + ": unknown section " + std::string(line));
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError(where + ": expected key = value");
        const std::string key(detail::trim(line.substr(0, eq)));
        const std::string value(detail::trim(line.substr(eq + 1)));
        if (key.empty()) throw ConfigError(where + ": empty key");
        if (current->contains(key)) throw ConfigError(where + ": duplicate key '" + key + "'");
        (*current)[key] = value;
    }
    return cfg;
}

/// Reads typed values from one run's keys with defaults layered beneath.
class KeyReader {
public:
    KeyReader(const KeyValues& run, const KeyValues& defaults) : run_(run), defaults_(defaults) {}

    std::optional<std::string> raw(std::string_view key) const
    {
        if (auto it = run_.find(key); it != run_.end()) return it->second;
        if (auto it = defaults_.find(key); it != defaults_.end()) return it->second;
        return std::nullopt;
    }

    bool has(std::string_view key) const { return raw(key).has_value(); }

    std::string str(std::string_view key, std::string_view fallback) const
    {
        auto v = raw(key);
        return v ? *v : std::string(fallback);
    }

    double real(std::string_view key, double fallback) const
    {
        auto v = raw(key);
        return v ? parse_real(key, *v) : fallback;
    }

    std::uint64_t integer(std::string_view key, std::uint64_t fallback) const
    {
        auto v = raw(key);
        if (!v) return fallback;
        std::uint64_t out = 0;
        auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
        if (ec != std::errc() || ptr != v->data() + v->size())
            throw ConfigError("key '" + std::string(key) + "': expected a non-negative integer, got '" + *v + "'");
        return out;
    }

    std::vector<double> reals(std::string_view key) const
    {
        auto v = raw(key);
        if (!v) throw ConfigError("missing key '" + std::string(key) + "'");
        std::vector<double> out;
        std::string_view rest = *v;
        while (true) {
            const auto comma = rest.find(',');
            out.push_back(parse_real(key, std::string(detail::trim(rest.substr(0, comma)))));
            if (comma == std::string_view::npos) break;
            rest = rest.substr(comma + 1);
        }
        return out;
    }

private:
    static double parse_real(std::string_view key, const std::string& s)
    {
        double out = 0.0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
        if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
            throw ConfigError("key '" + std::string(key) + "': expected a number, got '" + s + "'");
        return out;
    }

    const KeyValues& run_;
    const KeyValues& defaults_;
};

/// Builds the matrix named by the `matrix` key.
inline SkewMatrix matrix_from_keys(const KeyReader& r, std::uint64_t seed)
{
    const std::string kind = r.str("matrix", "random_gaussian");
    if (kind == "block_diagonal") return make_block_diagonal(r.reals("freqs"));
    const auto dim = static_cast<std::size_t>(r.integer("dim", 2));
    if (kind == "random_gaussian") return make_random_skew(dim, r.real("std", 1.0), seed);
    if (kind == "uniform_scaled") return make_random_skew_uniform_scaled(dim, seed);
    if (kind == "explicit") return SkewMatrix::from_entries(dim, r.reals("entries"));
    throw ConfigError("unknown matrix kind '" + kind + "'");
}

/// Explicit `x0` list, or Normal(0, x0_std^2) components drawn from the state
/// stream of `seed`.
inline State initial_state_from_keys(const KeyReader& r, std::size_t dim, std::uint64_t seed)
{
    if (r.has("x0")) return r.reals("x0");
    const double std_dev = r.real("x0_std", 1.0);
    if (!(std_dev > 0.0)) throw ConfigError("x0_std must be positive");
    Rng rng(seed, Stream::State);
    State x(dim);
    for (double& v : x) v = rng.normal(std_dev);
    return x;
}

inline SimulationConfig simulation_from_keys(const KeyReader& r, std::uint64_t seed)
{
    SkewMatrix a = matrix_from_keys(r, seed);
    State x0 = initial_state_from_keys(r, a.dim(), seed);
    const auto steps = static_cast<std::size_t>(r.integer("steps", 100000));
    SimulationConfig cfg{std::move(a), parse_activation(r.str("activation", "tanh")), std::move(x0)};
    cfg.tau = r.real("tau", 0.001);
    cfg.steps = steps;
    cfg.divergence_threshold = r.real("divergence_threshold", 100.0);
    cfg.integrator = parse_integrator(r.str("integrator", "euler"));
    cfg.record_stride = static_cast<std::size_t>(r.integer("record_stride", default_record_stride(steps)));
    cfg.validate();
    return cfg;
}

} // namespace skewrnn
