#pragma once

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <numbers>
#include <numeric>
#include <span>
#include <vector>

#include "skewrnn/errors.hpp"

namespace skewrnn {

struct SpectrumReport {
    std::vector<double> freqs_hz;
    std::vector<double> amplitude;
    double sample_rate_hz = 0.0;
    std::size_t source_component = 0;
    std::size_t signal_length = 0;
};

struct StftReport {
    std::vector<double> times_s;
    std::vector<double> freqs_hz;
    std::vector<std::vector<double>> magnitude; // [time][freq]
    std::size_t window_len = 0;
    std::size_t hop = 0;
};

namespace detail {

// The FFTW planner is not thread safe; execution of an existing plan on
// distinct arrays is.
inline std::mutex& fftw_planner_mutex()
{
    static std::mutex m;
    return m;
}

struct FftwFree {
    void operator()(void* p) const noexcept { fftw_free(p); }
};

/// Real-to-complex transform of fixed length n, reusable across frames.
class RealFft {
public:
    explicit RealFft(std::size_t n)
        : n_(n), in_(fftw_alloc_real(n)), out_(fftw_alloc_complex(n / 2 + 1))
    {
        if (!in_ || !out_) throw std::bad_alloc();
        std::lock_guard lock(fftw_planner_mutex());
        plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_.get(), reinterpret_cast<fftw_complex*>(out_.get()),
                                     FFTW_ESTIMATE);
        if (!plan_) throw NumericalError("fftw: plan creation failed");
    }
    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;
    ~RealFft()
    {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(plan_);
    }

    std::size_t size() const noexcept { return n_; }
    std::span<double> input() noexcept { return {in_.get(), n_}; }

    /// Runs the transform on input() and returns |X_k| for k = 0..n/2.
    void magnitudes(std::span<double> out)
    {
        fftw_execute(plan_);
        const auto* c = reinterpret_cast<const fftw_complex*>(out_.get());
        for (std::size_t k = 0; k <= n_ / 2; ++k) out[k] = std::hypot(c[k][0], c[k][1]);
    }

private:
    std::size_t n_;
    std::unique_ptr<double, FftwFree> in_;
    std::unique_ptr<fftw_complex, FftwFree> out_;
    fftw_plan plan_ = nullptr;
};

inline void require_finite(std::span<const double> s, const char* what)
{
    for (double v : s)
        if (!std::isfinite(v)) throw ConfigError(std::string(what) + ": signal contains non-finite samples");
}

inline double mean(std::span<const double> s)
{
    if (s.empty()) return 0.0;
    return std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
}

} // namespace detail

/// One-sided DFT magnitude of the mean-removed signal, rectangular window.
/// Interior bins are scaled by 2/N and the DC/Nyquist bins by 1/N, so a unit
/// amplitude sinusoid centred on a bin reads 1.0.
inline SpectrumReport amplitude_spectrum(std::span<const double> signal, double sample_rate_hz,
                                         std::size_t source_component = 0)
{
    if (signal.size() < 16) throw ConfigError("amplitude_spectrum: signal needs at least 16 samples");
    if (!(sample_rate_hz > 0.0)) throw ConfigError("amplitude_spectrum: sample rate must be positive");
    detail::require_finite(signal, "amplitude_spectrum");

    const std::size_t n = signal.size();
    detail::RealFft fft(n);
    const double mu = detail::mean(signal);
    auto in = fft.input();
    for (std::size_t i = 0; i < n; ++i) in[i] = signal[i] - mu;

    SpectrumReport r;
    r.sample_rate_hz = sample_rate_hz;
    r.source_component = source_component;
    r.signal_length = n;
    r.amplitude.resize(n / 2 + 1);
    fft.magnitudes(r.amplitude);
    r.freqs_hz.resize(n / 2 + 1);
    const double nd = static_cast<double>(n);
    for (std::size_t k = 0; k <= n / 2; ++k) {
        r.freqs_hz[k] = static_cast<double>(k) * sample_rate_hz / nd;
        const bool edge = k == 0 || (n % 2 == 0 && k == n / 2);
        r.amplitude[k] *= (edge ? 1.0 : 2.0) / nd;
    }
    return r;
}

/// Periodic Hann window of length n.
inline std::vector<double> hann_window(std::size_t n)
{
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i)
        w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
    return w;
}

/// Hann-windowed short-time magnitudes of the mean-removed signal. Frames
/// start at multiples of `hop` and must fit entirely inside the signal; each
/// frame is stamped with its centre time. Magnitudes are scaled by 2/sum(w)
/// so a stationary unit sinusoid reads about 1.0.
inline StftReport stft(std::span<const double> signal, double sample_rate_hz, std::size_t window_len,
                       std::size_t hop)
{
    if (window_len < 2) throw ConfigError("stft: window_len must be >= 2");
    if (window_len > signal.size()) throw ConfigError("stft: window longer than signal");
    if (hop == 0 || hop > window_len) throw ConfigError("stft: hop must be in [1, window_len]");
    if (!(sample_rate_hz > 0.0)) throw ConfigError("stft: sample rate must be positive");
    detail::require_finite(signal, "stft");

    const auto window = hann_window(window_len);
    const double gain = 2.0 / std::accumulate(window.begin(), window.end(), 0.0);
    const double mu = detail::mean(signal);

    StftReport r;
    r.window_len = window_len;
    r.hop = hop;
    const std::size_t bins = window_len / 2 + 1;
    r.freqs_hz.resize(bins);
    for (std::size_t k = 0; k < bins; ++k)
        r.freqs_hz[k] = static_cast<double>(k) * sample_rate_hz / static_cast<double>(window_len);

    detail::RealFft fft(window_len);
    auto in = fft.input();
    for (std::size_t start = 0; start + window_len <= signal.size(); start += hop) {
        for (std::size_t i = 0; i < window_len; ++i) in[i] = (signal[start + i] - mu) * window[i];
        std::vector<double> mags(bins);
        fft.magnitudes(mags);
        for (double& m : mags) m *= gain;
        r.magnitude.push_back(std::move(mags));
        r.times_s.push_back((static_cast<double>(start) + 0.5 * static_cast<double>(window_len)) / sample_rate_hz);
    }
    return r;
}

/// Index of the largest amplitude, DC excluded.
inline std::size_t peak_bin(std::span<const double> amplitude)
{
    if (amplitude.size() < 2) return 0;
    return static_cast<std::size_t>(std::max_element(amplitude.begin() + 1, amplitude.end()) - amplitude.begin());
}

inline double peak_frequency(const SpectrumReport& r)
{
    return r.freqs_hz[peak_bin(r.amplitude)];
}

/// Ratio of the dominant peak to the largest local maximum outside the
/// dominant peak's lobe (the contiguous region where amplitude falls
/// monotonically away from it). Infinite for a perfect line.
inline double peak_dominance(const SpectrumReport& r)
{
    const auto& a = r.amplitude;
    const std::size_t p = peak_bin(a);
    std::size_t lo = p;
    while (lo > 1 && a[lo - 1] <= a[lo]) --lo;
    std::size_t hi = p;
    while (hi + 1 < a.size() && a[hi + 1] <= a[hi]) ++hi;
    double second = 0.0;
    for (std::size_t k = 1; k < a.size(); ++k) {
        if (k >= lo && k <= hi) continue;
        second = std::max(second, a[k]);
    }
    return second == 0.0 ? std::numeric_limits<double>::infinity() : a[p] / second;
}

/// Cosine similarity of two amplitude spectra of equal length.
inline double spectral_correlation(const SpectrumReport& a, const SpectrumReport& b)
{
    if (a.amplitude.size() != b.amplitude.size()) throw DimensionError("spectral_correlation: length mismatch");
    double ab = 0.0, aa = 0.0, bb = 0.0;
    for (std::size_t k = 1; k < a.amplitude.size(); ++k) {
        ab += a.amplitude[k] * b.amplitude[k];
        aa += a.amplitude[k] * a.amplitude[k];
        bb += b.amplitude[k] * b.amplitude[k];
    }
    if (aa == 0.0 || bb == 0.0) return 0.0;
    return ab / std::sqrt(aa * bb);
}

} // namespace skewrnn
