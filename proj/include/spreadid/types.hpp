// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <string_view>

#include <Eigen/Dense>

namespace spreadid {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

/// Every random draw in the library goes through an explicitly seeded engine.
using Rng = std::mt19937_64;

inline constexpr double kPi = 3.14159265358979323846;

/// Relative singular-value threshold used for all exact-rank decisions.
inline constexpr double kRankEps = 1e-10;

/// Subset budget for exhaustive enumerations (spark, P0 oracle).
inline constexpr double kEnumerationBudget = 1e7;

/// e^{j 2 pi num / den}, with the numerator reduced modulo den first.
inline cplx unit_phase(std::int64_t num, std::int64_t den) {
    std::int64_t r = num % den;
    if (r < 0) r += den;
    const double a = 2.0 * kPi * static_cast<double>(r) / static_cast<double>(den);
    return {std::cos(a), std::sin(a)};
}

/// Circularly-symmetric complex Gaussian with total variance `variance`.
inline cplx complex_gaussian(Rng& rng, double variance = 1.0) {
    std::normal_distribution<double> n(0.0, std::sqrt(variance / 2.0));
    const double re = n(rng);
    const double im = n(rng);
    return {re, im};
}

inline std::int64_t positive_mod(std::int64_t a, std::int64_t m) {
    const std::int64_t r = a % m;
    return r < 0 ? r + m : r;
}

/// Warnings (non-prime L, selections beyond identifiability) go through a
/// process-wide sink. Defaults to stderr.
using WarningSink = std::function<void(std::string_view)>;
void set_warning_sink(WarningSink sink);
void warn(std::string_view message);

}  // namespace spreadid
