#pragma once

#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "skewrnn/errors.hpp"
#include "skewrnn/skew_matrix.hpp"

namespace skewrnn {

enum class StabilityClass { AsymptoticallyStable, MarginallyStable, Unstable };

constexpr std::string_view to_string(StabilityClass c) noexcept
{
    switch (c) {
    case StabilityClass::AsymptoticallyStable: return "asymptotically_stable";
    case StabilityClass::MarginallyStable: return "marginally_stable";
    case StabilityClass::Unstable: return "unstable";
    }
    return "?";
}

struct Eigenvalue {
    double re = 0.0;
    double im = 0.0;
    bool operator==(const Eigenvalue&) const = default;
};

struct StabilityReport {
    StabilityClass cls = StabilityClass::MarginallyStable;
    std::vector<Eigenvalue> eigen_summary;
    std::string notes;
};

inline constexpr double kImagAxisTolerance = 1e-9;

/// Linear stability from the eigenvalues of the state matrix. Real parts
/// within `tol` of zero count as lying on the imaginary axis.
///
/// Only valid for normal matrices (skew-symmetric ones in particular): there
/// algebraic and geometric multiplicities coincide, so eigenvalues on the
/// imaginary axis never carry Jordan blocks and the marginal case needs no
/// further check.
inline StabilityReport classify_stability(std::span<const Eigenvalue> eigs, double tol = kImagAxisTolerance)
{
    if (eigs.empty()) throw ConfigError("classify_stability: empty eigenvalue list");
    if (!(tol > 0.0)) throw ConfigError("classify_stability: tolerance must be positive");

    bool any_positive = false;
    bool all_negative = true;
    for (const auto& e : eigs) {
        if (!std::isfinite(e.re) || !std::isfinite(e.im)) throw ConfigError("classify_stability: non-finite eigenvalue");
        if (e.re > tol) any_positive = true;
        if (!(e.re < -tol)) all_negative = false;
    }

    StabilityReport r;
    r.eigen_summary.assign(eigs.begin(), eigs.end());
    if (any_positive) {
        r.cls = StabilityClass::Unstable;
    } else if (all_negative) {
        r.cls = StabilityClass::AsymptoticallyStable;
    } else {
        r.cls = StabilityClass::MarginallyStable;
    }
    r.notes = "assumes a normal state matrix (algebraic == geometric multiplicity for every eigenvalue); "
              "imaginary-axis band |Re| <= " +
              std::to_string(tol);
    return r;
}

inline StabilityReport classify_stability(std::initializer_list<Eigenvalue> eigs, double tol = kImagAxisTolerance)
{
    return classify_stability(std::span<const Eigenvalue>(eigs.begin(), eigs.size()), tol);
}

/// Eigenvalues of a skew matrix via eigen_frequencies: (0, +-w) per pair and
/// (0, 0) for each zero mode.
inline std::vector<Eigenvalue> eigenvalues_of(const SkewMatrix& a)
{
    std::vector<Eigenvalue> out;
    for (auto [re, im] : skew_eigenvalues(eigen_frequencies(a))) out.push_back({re, im});
    return out;
}

inline StabilityReport classify_stability(const SkewMatrix& a, double tol = kImagAxisTolerance)
{
    const auto eigs = eigenvalues_of(a);
    return classify_stability(std::span<const Eigenvalue>(eigs), tol);
}

} // namespace skewrnn
