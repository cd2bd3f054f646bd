// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "spreadid/model.hpp"
#include "spreadid/pipeline.hpp"
#include "spreadid/probing.hpp"

namespace spreadid {

/// Keep columns whose normalized noise-subspace projection is <= delta.
struct MusicThreshold {
    double delta = 1e-6;
};
/// Keep the k columns with the smallest scores (ties: smaller column index).
struct MusicTopK {
    int k = 1;
};
using MusicSelection = std::variant<MusicThreshold, MusicTopK>;

enum class RankRule {
    relative,     // sigma_i > rank_tol * sigma_max
    noise_floor,  // lambda_i > 10 * median(trailing half of lambda)
};

enum class SolverKind { music, omp, oracle };
const char* to_string(SolverKind kind);
SolverKind parse_solver_kind(std::string_view name);

struct SolverOptions {
    double rank_tol = 1e-8;
    RankRule rank_rule = RankRule::relative;
    /// Forces the signal-subspace dimension instead of estimating it.
    std::optional<int> signal_dim;
    MusicSelection music = MusicThreshold{};
    double omp_residual_tol = 1e-10;
    /// Defaults to the number of rows of the system.
    std::optional<int> omp_max_support;
    double reconstruction_tol = 1e-10;
    /// Defaults to the number of rows of the system.
    std::optional<int> oracle_max_cardinality;
    double oracle_tol = 1e-9;

    /// Throws ValidationError for non-positive tolerances or bad counts.
    void validate(int L) const;
};

struct Diagnostics {
    RVector singular_values;
    /// MUSIC: ||U_n^H a_j|| / ||a_j||; OMP: last correlation sweep.
    RVector column_scores;
    double residual_fro = 0.0;
    /// Set by the P0 oracle only.
    std::optional<bool> unique;
    /// OMP residual norms, starting with ||Z||_F.
    std::vector<double> residual_history;
    int iterations = 0;
    /// Zak-domain rows read by a compressive recovery.
    std::vector<int> zak_rows_used;
    std::vector<std::string> warnings;
    bool failed = false;
    std::string failure;
};

struct RecoveryResult {
    SupportSet support_hat;
    /// |support_hat| x E*D, rows in ascending k*L+m order.
    CMatrix S_hat;
    int rank_hat = 0;
    Diagnostics diagnostics;
};

/// Number of singular values of Z above rank_tol * sigma_max.
int estimate_rank(const MeasurementEnsemble& Z, double rank_tol);
int estimate_rank(const CMatrix& Z, double rank_tol);
/// Eigenvalues of Z Z^H above 10x the median of the trailing half.
int estimate_rank_noise_floor(const CMatrix& Z);

RecoveryResult mmv_music(const MeasurementEnsemble& Z, const MeasurementMatrix& A,
                         const SolverOptions& opts);
RecoveryResult mmv_omp(const MeasurementEnsemble& Z, const MeasurementMatrix& A,
                       const SolverOptions& opts);
/// Exhaustive minimum-cardinality search. Throws BudgetError when
/// C(L^2, max_cardinality) exceeds kEnumerationBudget.
RecoveryResult p0_oracle(const MeasurementEnsemble& Z, const MeasurementMatrix& A,
                         int max_cardinality, double tol);

/// Least-squares S_Gamma for Z = A_Gamma S_Gamma (minimum norm if |Gamma| > L).
CMatrix reconstruct(const MeasurementEnsemble& Z, const MeasurementMatrix& A,
                    const SupportSet& support, double tol = 1e-10);

/// Inverse of pack_unknowns restricted to the recovered rows.
DiscreteSpreadingFunction spreading_from_result(const RecoveryResult& result,
                                                const GridParams& grid);

/// Restricts Z and A to the rows in omega, finds the support there, then
/// refits S_hat on the full system.
RecoveryResult compressive_recover(const MeasurementEnsemble& Z, const MeasurementMatrix& A,
                                   const RowSubset& omega, SolverKind solver,
                                   const SolverOptions& opts);

/// Dispatches to mmv_music, mmv_omp or p0_oracle.
RecoveryResult recover(const MeasurementEnsemble& Z, const MeasurementMatrix& A, SolverKind solver,
                       const SolverOptions& opts);

/// Places the rows of S_sub at their k*L+m positions in an L^2-row matrix.
CMatrix expand_rows(const CMatrix& S_sub, const SupportSet& support);

namespace detail {

// Matrix-level solver cores; `A` may be a row-restricted measurement matrix.
RecoveryResult music(const CMatrix& Z, const CMatrix& A, int L, const SolverOptions& opts);
RecoveryResult omp(const CMatrix& Z, const CMatrix& A, int L, const SolverOptions& opts);
RecoveryResult oracle(const CMatrix& Z, const CMatrix& A, int L, int max_cardinality, double tol);

}  // namespace detail

}  // namespace spreadid
