// SPDX-License-Identifier: Apache-2.0
#include "spreadid/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "spreadid/errors.hpp"
#include "spreadid/linalg.hpp"

namespace spreadid {

StabilityBounds stability_bounds(const MeasurementMatrix& A, const SupportSet& support,
                                 const GridParams& grid) {
    if (support.empty()) throw ValidationError("stability_bounds: empty support");
    if (grid.L() != A.L()) throw ValidationError("stability_bounds: L mismatch");
    const CMatrix sub = column_submatrix(A, support);
    const RVector s = linalg::singular_values(sub);
    const double scale = 1.0 / std::sqrt(grid.tau_max());
    StabilityBounds out;
    out.gamma_card = static_cast<int>(support.size());
    out.beta = s(0) * scale;
    // More columns than rows: the infimum over unit vectors is attained on the null space.
    out.alpha = sub.cols() > sub.rows() ? 0.0 : s(s.size() - 1) * scale;
    return out;
}

bool uniqueness_guaranteed(int gamma_card, int L, int K) {
    if (K < 1 || K > std::min(gamma_card, L)) {
        throw ValidationError("uniqueness_guaranteed: K = " + std::to_string(K) +
                              " outside [1, min(|Gamma|, L)]");
    }
    return 2 * gamma_card < L + K;
}

AmbiguityWitness ambiguous_instance(const MeasurementMatrix& A, int K, Rng& rng,
                                    std::optional<int> prime_card) {
    const int L = A.L();
    if (K < 1 || K > L) throw ValidationError("ambiguous_instance: K must lie in [1, L]");
    const int phi_card = L + K;
    if (L * L < phi_card) throw ValidationError("ambiguous_instance: L^2 < L + K");
    const int first_card = prime_card.value_or((phi_card + 1) / 2);
    if (first_card < K || first_card > L) {
        throw ValidationError("ambiguous_instance: |Gamma'| must lie in [K, L]");
    }

    std::vector<int> all(static_cast<std::size_t>(L) * L);
    std::iota(all.begin(), all.end(), 0);
    std::vector<int> phi;
    std::sample(all.begin(), all.end(), std::back_inserter(phi), phi_card, rng);

    CMatrix A_phi(L, phi_card);
    for (int j = 0; j < phi_card; ++j) A_phi.col(j) = A.matrix().col(phi[static_cast<std::size_t>(j)]);
    const CMatrix B_phi = linalg::null_space(A_phi, kRankEps);
    if (B_phi.cols() != K) {
        throw NumericalError("ambiguous_instance: null space of A_Phi has dimension " +
                             std::to_string(B_phi.cols()) + ", expected K = " + std::to_string(K) +
                             " (A is not full spark)");
    }

    // Greedy pass in index order for K independent rows of B_Phi.
    std::vector<int> prime_rows;
    CMatrix picked(0, K);
    for (int i = 0; i < phi_card && static_cast<int>(prime_rows.size()) < K; ++i) {
        CMatrix trial(picked.rows() + 1, K);
        trial.topRows(picked.rows()) = picked;
        trial.row(picked.rows()) = B_phi.row(i);
        if (linalg::numerical_rank(trial, kRankEps) == trial.rows()) {
            picked = trial;
            prime_rows.push_back(i);
        }
    }
    if (static_cast<int>(prime_rows.size()) < K) {
        throw NumericalError("ambiguous_instance: null-space basis has rank below K");
    }
    for (int i = 0; i < phi_card && static_cast<int>(prime_rows.size()) < first_card; ++i) {
        if (std::find(prime_rows.begin(), prime_rows.end(), i) == prime_rows.end()) prime_rows.push_back(i);
    }

    std::vector<std::pair<int, int>> prime;  // (column index, row of B_phi)
    std::vector<std::pair<int, int>> rest;
    for (int i = 0; i < phi_card; ++i) {
        const bool in_prime = std::find(prime_rows.begin(), prime_rows.end(), i) != prime_rows.end();
        (in_prime ? prime : rest).emplace_back(phi[static_cast<std::size_t>(i)], i);
    }
    std::sort(prime.begin(), prime.end());
    std::sort(rest.begin(), rest.end());

    AmbiguityWitness w;
    std::vector<int> idx;
    w.B_gamma_prime.resize(static_cast<Eigen::Index>(prime.size()), K);
    for (std::size_t i = 0; i < prime.size(); ++i) {
        idx.push_back(prime[i].first);
        w.B_gamma_prime.row(static_cast<Eigen::Index>(i)) = B_phi.row(prime[i].second);
    }
    w.gamma_prime = SupportSet::from_indices(L, idx);
    idx.clear();
    w.B_gamma.resize(static_cast<Eigen::Index>(rest.size()), K);
    for (std::size_t i = 0; i < rest.size(); ++i) {
        idx.push_back(rest[i].first);
        w.B_gamma.row(static_cast<Eigen::Index>(i)) = -B_phi.row(rest[i].second);
    }
    w.gamma = SupportSet::from_indices(L, idx);
    return w;
}

double relative_sq_error(const CMatrix& S_hat_full, const CMatrix& S_true_full) {
    if (S_hat_full.rows() != S_true_full.rows() || S_hat_full.cols() != S_true_full.cols()) {
        throw ValidationError("relative_sq_error: shape mismatch");
    }
    const double truth = S_true_full.squaredNorm();
    if (truth == 0.0) throw ValidationError("relative_sq_error: zero ground truth");
    return (S_hat_full - S_true_full).squaredNorm() / truth;
}

}  // namespace spreadid
