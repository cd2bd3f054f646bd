// SPDX-License-Identifier: Apache-2.0
#include "spreadid/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "spreadid/errors.hpp"
#include "spreadid/linalg.hpp"

namespace spreadid {

namespace {

// Replaces a wide Z by an L x L factor with the same Gram matrix Z Z^H.
// Every solver here only depends on Z through its column space and the
// values a^H P Z Z^H P a, so this is exact and keeps per-iteration cost
// independent of E*D.
CMatrix compress_columns(const CMatrix& Z) {
    if (Z.cols() <= Z.rows()) return Z;
    Eigen::HouseholderQR<CMatrix> qr(Z.adjoint());
    const CMatrix R = qr.matrixQR().topRows(Z.rows()).triangularView<Eigen::Upper>();
    return R.adjoint();
}

void check_shapes(const CMatrix& Z, const CMatrix& A, int L) {
    if (A.cols() != static_cast<Eigen::Index>(L) * L) {
        throw ValidationError("solver: measurement matrix must have L^2 columns");
    }
    if (Z.rows() != A.rows()) {
        throw ValidationError("solver: Z has " + std::to_string(Z.rows()) + " rows, A has " +
                              std::to_string(A.rows()));
    }
}

RVector column_norms(const CMatrix& A) {
    RVector n(A.cols());
    for (Eigen::Index j = 0; j < A.cols(); ++j) n(j) = A.col(j).norm();
    return n;
}

CMatrix reconstruct_matrix(const CMatrix& Z, const CMatrix& A, const SupportSet& support,
                           double tol, std::vector<std::string>* warnings) {
    if (support.empty()) return CMatrix(0, Z.cols());
    if (static_cast<Eigen::Index>(support.size()) > A.rows()) {
        const std::string msg = "reconstruct: |Gamma| = " + std::to_string(support.size()) +
                                " exceeds the row count; returning the minimum-norm solution";
        if (warnings != nullptr) warnings->push_back(msg);
    }
    return linalg::least_squares(column_submatrix(A, support), Z, tol);
}

void finish(RecoveryResult& out, const CMatrix& Z, const CMatrix& A, double tol) {
    out.S_hat = reconstruct_matrix(Z, A, out.support_hat, tol, &out.diagnostics.warnings);
    if (out.support_hat.empty()) {
        out.diagnostics.residual_fro = Z.norm();
    } else {
        out.diagnostics.residual_fro = (Z - column_submatrix(A, out.support_hat) * out.S_hat).norm();
    }
}

}  // namespace

const char* to_string(SolverKind kind) {
    switch (kind) {
        case SolverKind::music: return "music";
        case SolverKind::omp: return "omp";
        case SolverKind::oracle: return "oracle";
    }
    return "music";
}

SolverKind parse_solver_kind(std::string_view name) {
    if (name == "music") return SolverKind::music;
    if (name == "omp") return SolverKind::omp;
    if (name == "oracle") return SolverKind::oracle;
    throw ValidationError("unknown solver '" + std::string(name) + "' (expected music, omp or oracle)");
}

void SolverOptions::validate(int L) const {
    if (!(rank_tol > 0.0)) throw ValidationError("solver options: rank_tol must be positive");
    if (!(omp_residual_tol > 0.0)) throw ValidationError("solver options: omp residual_tol must be positive");
    if (!(reconstruction_tol > 0.0)) throw ValidationError("solver options: reconstruction_tol must be positive");
    if (!(oracle_tol > 0.0)) throw ValidationError("solver options: oracle tol must be positive");
    if (signal_dim && (*signal_dim < 0 || *signal_dim > L)) {
        throw ValidationError("solver options: signal_dim must lie in [0, L]");
    }
    if (const auto* t = std::get_if<MusicThreshold>(&music); t != nullptr && !(t->delta > 0.0)) {
        throw ValidationError("solver options: music threshold must be positive");
    }
    if (const auto* k = std::get_if<MusicTopK>(&music); k != nullptr && (k->k < 0 || k->k > L * L)) {
        throw ValidationError("solver options: music top_k must lie in [0, L^2]");
    }
    if (omp_max_support && (*omp_max_support < 0 || *omp_max_support > L * L)) {
        throw ValidationError("solver options: omp max_support must lie in [0, L^2]");
    }
    if (oracle_max_cardinality && *oracle_max_cardinality < 0) {
        throw ValidationError("solver options: oracle max_cardinality must be non-negative");
    }
}

int estimate_rank(const CMatrix& Z, double rank_tol) { return linalg::numerical_rank(Z, rank_tol); }

int estimate_rank(const MeasurementEnsemble& Z, double rank_tol) {
    if (Z.Z.size() == 0) throw ValidationError("estimate_rank: empty measurement matrix");
    return estimate_rank(Z.Z, rank_tol);
}

int estimate_rank_noise_floor(const CMatrix& Z) {
    const RVector s = linalg::singular_values(Z);
    const Eigen::Index L = Z.rows();
    std::vector<double> lambda(static_cast<std::size_t>(L), 0.0);
    for (Eigen::Index i = 0; i < s.size() && i < L; ++i) lambda[static_cast<std::size_t>(i)] = s(i) * s(i);
    if (lambda.empty() || lambda[0] == 0.0) return 0;
    const std::size_t half = std::max<std::size_t>(1, lambda.size() / 2);
    std::vector<double> tail(lambda.end() - static_cast<std::ptrdiff_t>(half), lambda.end());
    std::sort(tail.begin(), tail.end());
    const double median = tail.size() % 2 == 1
                              ? tail[tail.size() / 2]
                              : 0.5 * (tail[tail.size() / 2 - 1] + tail[tail.size() / 2]);
    const double threshold = 10.0 * median;
    return static_cast<int>(std::count_if(lambda.begin(), lambda.end(),
                                          [&](double v) { return v > threshold; }));
}

namespace detail {

RecoveryResult music(const CMatrix& Zfull, const CMatrix& A, int L, const SolverOptions& opts) {
    check_shapes(Zfull, A, L);
    opts.validate(L);
    const Eigen::Index rows = A.rows();
    const CMatrix Z = compress_columns(Zfull);

    RecoveryResult out;
    out.support_hat = SupportSet(L, {});
    out.S_hat = CMatrix(0, Zfull.cols());

    Eigen::JacobiSVD<CMatrix, Eigen::ColPivHouseholderQRPreconditioner> svd(Z, Eigen::ComputeFullU);
    out.diagnostics.singular_values = svd.singularValues();
    int rank = 0;
    if (opts.signal_dim) {
        rank = std::min<int>(*opts.signal_dim, static_cast<int>(rows));
    } else if (opts.rank_rule == RankRule::noise_floor) {
        rank = estimate_rank_noise_floor(Z);
    } else {
        rank = linalg::numerical_rank(Z, opts.rank_tol);
    }
    out.rank_hat = rank;

    if (rank >= rows) {
        out.diagnostics.failed = true;
        out.diagnostics.failure = "no noise subspace: estimated rank equals the row count";
        out.diagnostics.residual_fro = Zfull.norm();
        return out;
    }

    const CMatrix noise = svd.matrixU().rightCols(rows - rank);
    const RVector norms = column_norms(A);
    const CMatrix proj = noise.adjoint() * A;
    RVector scores(A.cols());
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
        scores(j) = norms(j) > 0.0 ? proj.col(j).norm() / norms(j) : 1.0;
    }
    out.diagnostics.column_scores = scores;

    std::vector<int> chosen;
    if (const auto* t = std::get_if<MusicThreshold>(&opts.music)) {
        for (Eigen::Index j = 0; j < scores.size(); ++j) {
            if (scores(j) <= t->delta) chosen.push_back(static_cast<int>(j));
        }
    } else {
        const int k = std::get<MusicTopK>(opts.music).k;
        if (k > rows) {
            out.diagnostics.warnings.push_back("music: top_k = " + std::to_string(k) +
                                               " exceeds the row count (beyond identifiability)");
        }
        std::vector<int> order(static_cast<std::size_t>(scores.size()));
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return scores(a) < scores(b); });
        chosen.assign(order.begin(), order.begin() + k);
    }
    out.support_hat = SupportSet::from_indices(L, std::move(chosen));
    finish(out, Zfull, A, opts.reconstruction_tol);
    return out;
}

RecoveryResult omp(const CMatrix& Zfull, const CMatrix& A, int L, const SolverOptions& opts) {
    check_shapes(Zfull, A, L);
    opts.validate(L);
    const Eigen::Index rows = A.rows();
    const CMatrix Z = compress_columns(Zfull);
    const int max_support = opts.omp_max_support.value_or(static_cast<int>(rows));

    RecoveryResult out;
    if (max_support > rows) {
        out.diagnostics.warnings.push_back("omp: max_support = " + std::to_string(max_support) +
                                           " exceeds the row count (beyond the guarantee regime)");
    }

    const RVector norms = column_norms(A);
    const double z_norm = Z.norm();
    std::vector<int> selected;
    std::vector<char> taken(static_cast<std::size_t>(A.cols()), 0);
    CMatrix R = Z;
    double r_norm = z_norm;
    out.diagnostics.residual_history.push_back(r_norm);
    RVector scores = RVector::Zero(A.cols());

    while (r_norm > opts.omp_residual_tol * z_norm && static_cast<int>(selected.size()) < max_support &&
           static_cast<Eigen::Index>(selected.size()) < A.cols()) {
        const CMatrix corr = A.adjoint() * R;
        int best = -1;
        double best_score = -1.0;
        for (Eigen::Index j = 0; j < A.cols(); ++j) {
            scores(j) = norms(j) > 0.0 ? corr.row(j).norm() / norms(j) : 0.0;
            if (!taken[static_cast<std::size_t>(j)] && scores(j) > best_score) {
                best_score = scores(j);
                best = static_cast<int>(j);
            }
        }
        selected.push_back(best);
        taken[static_cast<std::size_t>(best)] = 1;

        CMatrix As(rows, static_cast<Eigen::Index>(selected.size()));
        for (std::size_t i = 0; i < selected.size(); ++i) As.col(static_cast<Eigen::Index>(i)) = A.col(selected[i]);
        R = Z - As * linalg::least_squares(As, Z, opts.reconstruction_tol);
        r_norm = R.norm();
        out.diagnostics.residual_history.push_back(r_norm);
        ++out.diagnostics.iterations;
    }
    out.diagnostics.column_scores = scores;
    out.support_hat = SupportSet::from_indices(L, std::move(selected));
    out.rank_hat = linalg::numerical_rank(Z, opts.rank_tol);
    out.diagnostics.singular_values = linalg::singular_values(Z);
    finish(out, Zfull, A, opts.reconstruction_tol);
    return out;
}

RecoveryResult oracle(const CMatrix& Zfull, const CMatrix& A, int L, int max_cardinality, double tol) {
    check_shapes(Zfull, A, L);
    if (max_cardinality < 0) throw ValidationError("p0_oracle: max_cardinality must be >= 0");
    if (!(tol > 0.0)) throw ValidationError("p0_oracle: tol must be positive");
    const int cols = static_cast<int>(A.cols());
    const int top = std::min(max_cardinality, cols);
    if (linalg::binomial(cols, top) > kEnumerationBudget) {
        throw BudgetError("p0_oracle: C(" + std::to_string(cols) + ", " + std::to_string(top) +
                          ") supports exceeds the enumeration budget");
    }
    const CMatrix Z = compress_columns(Zfull);
    const double bound = tol * Z.norm();

    RecoveryResult out;
    out.support_hat = SupportSet(L, {});
    out.rank_hat = linalg::numerical_rank(Z);
    out.diagnostics.singular_values = linalg::singular_values(Z);

    if (Z.norm() == 0.0) {
        out.diagnostics.unique = true;
        out.S_hat = CMatrix::Zero(0, Zfull.cols());
        return out;
    }

    CMatrix sub(A.rows(), 0);
    for (int k = 1; k <= top; ++k) {
        std::vector<int> first;
        int consistent = 0;
        sub.resize(A.rows(), k);
        linalg::for_each_combination(cols, k, [&](const std::vector<int>& idx) {
            for (int j = 0; j < k; ++j) sub.col(j) = A.col(idx[static_cast<std::size_t>(j)]);
            if (linalg::projection_residual(sub, Z) <= bound) {
                if (consistent == 0) first = idx;
                ++consistent;
            }
            return consistent < 2;
        });
        ++out.diagnostics.iterations;
        if (consistent > 0) {
            out.support_hat = SupportSet::from_indices(L, first);
            out.diagnostics.unique = consistent == 1;
            finish(out, Zfull, A, kRankEps);
            return out;
        }
    }
    out.diagnostics.failed = true;
    out.diagnostics.failure = "no consistent support with at most " + std::to_string(top) + " cells";
    out.diagnostics.residual_fro = Zfull.norm();
    out.S_hat = CMatrix(0, Zfull.cols());
    return out;
}

}  // namespace detail

namespace {

void check_pair(const MeasurementEnsemble& Z, const MeasurementMatrix& A) {
    if (Z.grid.L() != A.L()) throw ValidationError("solver: Z and A disagree on L");
}

}  // namespace

RecoveryResult mmv_music(const MeasurementEnsemble& Z, const MeasurementMatrix& A,
                         const SolverOptions& opts) {
    check_pair(Z, A);
    return detail::music(Z.Z, A.matrix(), A.L(), opts);
}

RecoveryResult mmv_omp(const MeasurementEnsemble& Z, const MeasurementMatrix& A,
                       const SolverOptions& opts) {
    check_pair(Z, A);
    return detail::omp(Z.Z, A.matrix(), A.L(), opts);
}

RecoveryResult p0_oracle(const MeasurementEnsemble& Z, const MeasurementMatrix& A, int max_cardinality,
                         double tol) {
    check_pair(Z, A);
    return detail::oracle(Z.Z, A.matrix(), A.L(), max_cardinality, tol);
}

CMatrix reconstruct(const MeasurementEnsemble& Z, const MeasurementMatrix& A, const SupportSet& support,
                    double tol) {
    check_pair(Z, A);
    std::vector<std::string> warnings;
    CMatrix S = reconstruct_matrix(Z.Z, A.matrix(), support, tol, &warnings);
    for (const auto& w : warnings) warn(w);
    return S;
}

CMatrix expand_rows(const CMatrix& S_sub, const SupportSet& support) {
    const int L = support.L();
    if (S_sub.rows() != static_cast<Eigen::Index>(support.size())) {
        throw ValidationError("expand_rows: row count differs from |support|");
    }
    CMatrix S = CMatrix::Zero(static_cast<Eigen::Index>(L) * L, S_sub.cols());
    const std::vector<int> idx = support.indices();
    for (std::size_t i = 0; i < idx.size(); ++i) S.row(idx[i]) = S_sub.row(static_cast<Eigen::Index>(i));
    return S;
}

DiscreteSpreadingFunction spreading_from_result(const RecoveryResult& result, const GridParams& grid) {
    if (result.support_hat.L() != grid.L() && !result.support_hat.empty()) {
        throw ValidationError("spreading_from_result: L mismatch");
    }
    if (result.support_hat.empty()) return DiscreteSpreadingFunction::zero(grid);
    if (result.S_hat.cols() != grid.samples_per_cell()) {
        throw ValidationError("spreading_from_result: S_hat must have E*D columns");
    }
    return unpack_unknowns(expand_rows(result.S_hat, result.support_hat), grid, result.support_hat);
}

RecoveryResult recover(const MeasurementEnsemble& Z, const MeasurementMatrix& A, SolverKind solver,
                       const SolverOptions& opts) {
    switch (solver) {
        case SolverKind::music: return mmv_music(Z, A, opts);
        case SolverKind::omp: return mmv_omp(Z, A, opts);
        case SolverKind::oracle:
            opts.validate(A.L());
            return p0_oracle(Z, A, opts.oracle_max_cardinality.value_or(A.L()), opts.oracle_tol);
    }
    throw ValidationError("recover: unknown solver");
}

RecoveryResult compressive_recover(const MeasurementEnsemble& Z, const MeasurementMatrix& A,
                                   const RowSubset& omega, SolverKind solver,
                                   const SolverOptions& opts) {
    check_pair(Z, A);
    if (omega.L() != A.L()) throw ValidationError("compressive_recover: row subset L mismatch");
    const int L = A.L();
    const int P = omega.size();
    const CMatrix Zo = row_submatrix(Z.Z, omega);
    const CMatrix Ao = row_submatrix(A.matrix(), omega);

    RecoveryResult out;
    switch (solver) {
        case SolverKind::music: {
            const int k = opts.signal_dim.value_or(estimate_rank(Zo, opts.rank_tol));
            if (P < k + 1) {
                throw NumericalError("compressive_recover: insufficient rows for subspace method (P = " +
                                     std::to_string(P) + ", rank = " + std::to_string(k) + ")");
            }
            out = detail::music(Zo, Ao, L, opts);
            break;
        }
        case SolverKind::omp: out = detail::omp(Zo, Ao, L, opts); break;
        case SolverKind::oracle:
            out = detail::oracle(Zo, Ao, L, opts.oracle_max_cardinality.value_or(P), opts.oracle_tol);
            break;
    }
    if (!out.support_hat.empty()) {
        out.S_hat = reconstruct_matrix(Z.Z, A.matrix(), out.support_hat, opts.reconstruction_tol,
                                       &out.diagnostics.warnings);
        out.diagnostics.residual_fro =
            (Z.Z - column_submatrix(A.matrix(), out.support_hat) * out.S_hat).norm();
    }
    const int E = Z.grid.E();
    for (int p : omega.rows()) {
        for (int n = 0; n < E; ++n) out.diagnostics.zak_rows_used.push_back(n + E * p);
    }
    std::sort(out.diagnostics.zak_rows_used.begin(), out.diagnostics.zak_rows_used.end());
    return out;
}

}  // namespace spreadid
