// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>

#include "spreadid/model.hpp"
#include "spreadid/probing.hpp"

namespace spreadid {

/// Discrete stability proxy: alpha = sigma_min(A_Gamma)/sqrt(T*L),
/// beta = sigma_max(A_Gamma)/sqrt(T*L). alpha is exactly 0 when |Gamma| > L.
struct StabilityBounds {
    double alpha = 0.0;
    double beta = 0.0;
    int gamma_card = 0;
};

StabilityBounds stability_bounds(const MeasurementMatrix& A, const SupportSet& support,
                                 const GridParams& grid);

/// 2 * gamma_card < L + K. Throws ValidationError unless 1 <= K <= min(gamma_card, L).
bool uniqueness_guaranteed(int gamma_card, int L, int K);

/// Two disjoint supports with A_Gamma B_Gamma = A_Gamma' B_Gamma', both built
/// from a K-dimensional null space of A restricted to L+K columns.
struct AmbiguityWitness {
    SupportSet gamma;
    CMatrix B_gamma;
    SupportSet gamma_prime;
    CMatrix B_gamma_prime;
};

/// Picks Phi (|Phi| = L+K) at random, takes a null-space basis B_Phi of A_Phi,
/// puts K independent rows of B_Phi plus the next smallest-index rows into
/// Gamma' (default size ceil((L+K)/2)) and the rest into Gamma, with
/// B_Gamma = -B_Phi restricted to Gamma. `prime_card` overrides |Gamma'| to
/// build instances past the boundary; it must lie in [K, L].
/// Throws NumericalError when A_Phi does not have a K-dimensional null space.
AmbiguityWitness ambiguous_instance(const MeasurementMatrix& A, int K, Rng& rng,
                                    std::optional<int> prime_card = std::nullopt);

/// ||S_hat - S_true||_F^2 / ||S_true||_F^2 on full L^2-row layouts.
double relative_sq_error(const CMatrix& S_hat_full, const CMatrix& S_true_full);

}  // namespace spreadid
