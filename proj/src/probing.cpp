// SPDX-License-Identifier: Apache-2.0
#include "spreadid/probing.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "spreadid/errors.hpp"
#include "spreadid/linalg.hpp"

namespace spreadid {

const char* to_string(ProbingKind kind) {
    switch (kind) {
        case ProbingKind::random_disc: return "random-disc";
        case ProbingKind::alltop: return "alltop";
        case ProbingKind::custom: return "custom";
    }
    return "custom";
}

ProbingKind parse_probing_kind(std::string_view name) {
    if (name == "random-disc" || name == "random_disc") return ProbingKind::random_disc;
    if (name == "alltop") return ProbingKind::alltop;
    if (name == "custom") return ProbingKind::custom;
    throw ValidationError("unknown probing family '" + std::string(name) +
                          "' (expected alltop or random-disc)");
}

ProbingSequence::ProbingSequence(CVector c, ProbingKind kind) : c_(std::move(c)), kind_(kind) {
    if (c_.size() == 0) throw ValidationError("probing sequence: empty");
    if (c_.isZero(0.0)) throw ValidationError("probing sequence: all-zero");
}

ProbingSequence alltop(int L) {
    if (L < 1) throw ValidationError("alltop: L must be >= 1");
    if (L < 5 || !is_prime(L)) {
        warn("alltop: L = " + std::to_string(L) +
             " is below 5 or not prime; the Welch-bound coherence property does not hold");
    }
    CVector c(L);
    const double scale = 1.0 / std::sqrt(static_cast<double>(L));
    for (int i = 0; i < L; ++i) {
        const std::int64_t ii = i;
        const std::int64_t cube = ((ii * ii) % L) * ii % L;
        c(i) = scale * unit_phase(cube, L);
    }
    return ProbingSequence(std::move(c), ProbingKind::alltop);
}

ProbingSequence random_disc(int L, Rng& rng) {
    if (L < 1) throw ValidationError("random_disc: L must be >= 1");
    std::uniform_real_distribution<double> u(0.0, 1.0);
    CVector c(L);
    for (int i = 0; i < L; ++i) {
        const double radius = std::sqrt(u(rng));
        const double angle = 2.0 * kPi * u(rng);
        c(i) = std::polar(radius, angle);
    }
    if (c.isZero(0.0)) c(0) = 1.0;  // probability zero
    return ProbingSequence(std::move(c), ProbingKind::random_disc);
}

MeasurementMatrix::MeasurementMatrix(ProbingSequence source) : source_(std::move(source)) {
    const int L = source_.L();
    A_.resize(L, static_cast<Eigen::Index>(L) * L);
    for (int k = 0; k < L; ++k) {
        for (int m = 0; m < L; ++m) {
            for (int p = 0; p < L; ++p) {
                A_(p, k * L + m) = source_.at(k - p) * unit_phase(static_cast<std::int64_t>(p) * m, L);
            }
        }
    }
}

MeasurementMatrix build_matrix(const ProbingSequence& c) { return MeasurementMatrix(c); }

RowSubset::RowSubset(int L, std::vector<int> rows) : L_(L), rows_(std::move(rows)) {
    if (rows_.empty() || static_cast<int>(rows_.size()) > L) {
        throw ValidationError("row subset: cardinality must lie in [1, L]");
    }
    std::vector<int> sorted = rows_;
    std::sort(sorted.begin(), sorted.end());
    if (sorted.front() < 0 || sorted.back() >= L) {
        throw ValidationError("row subset: index outside [0, L)");
    }
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw ValidationError("row subset: duplicate row index");
    }
}

RowSubset RowSubset::prefix(int L, int P) {
    std::vector<int> rows;
    for (int i = 0; i < P; ++i) rows.push_back(i);
    return RowSubset(L, std::move(rows));
}

CMatrix column_submatrix(const CMatrix& A, const SupportSet& support) {
    const std::vector<int> idx = support.indices();
    CMatrix out(A.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t j = 0; j < idx.size(); ++j) {
        if (idx[j] >= A.cols()) throw ValidationError("column_submatrix: support exceeds matrix width");
        out.col(static_cast<Eigen::Index>(j)) = A.col(idx[j]);
    }
    return out;
}

CMatrix column_submatrix(const MeasurementMatrix& A, const SupportSet& support) {
    if (support.L() != A.L()) throw ValidationError("column_submatrix: L mismatch");
    return column_submatrix(A.matrix(), support);
}

CMatrix row_submatrix(const CMatrix& A, const RowSubset& omega) {
    if (omega.L() != A.rows()) throw ValidationError("row_submatrix: L mismatch");
    CMatrix out(omega.size(), A.cols());
    for (int i = 0; i < omega.size(); ++i) out.row(i) = A.row(omega.rows()[static_cast<std::size_t>(i)]);
    return out;
}

CMatrix row_submatrix(const MeasurementMatrix& A, const RowSubset& omega) {
    return row_submatrix(A.matrix(), omega);
}

std::optional<int> spark_exhaustive(const CMatrix& M, int max_cardinality) {
    const int cols = static_cast<int>(M.cols());
    if (max_cardinality < 1) throw ValidationError("spark_exhaustive: max_cardinality must be >= 1");
    const int top = std::min(max_cardinality, cols);
    if (linalg::binomial(cols, top) > kEnumerationBudget) {
        throw BudgetError("spark_exhaustive: C(" + std::to_string(cols) + ", " +
                          std::to_string(top) + ") subsets exceeds the enumeration budget");
    }
    CMatrix sub(M.rows(), 0);
    for (int k = 1; k <= top; ++k) {
        bool dependent = false;
        sub.resize(M.rows(), k);
        linalg::for_each_combination(cols, k, [&](const std::vector<int>& idx) {
            for (int j = 0; j < k; ++j) sub.col(j) = M.col(idx[static_cast<std::size_t>(j)]);
            if (k > M.rows()) {
                dependent = true;
            } else {
                const RVector s = linalg::singular_values(sub);
                dependent = s(0) == 0.0 || s(s.size() - 1) <= kRankEps * s(0);
            }
            return !dependent;
        });
        if (dependent) return k;
    }
    return std::nullopt;
}

}  // namespace spreadid
