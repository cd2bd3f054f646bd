// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <vector>

#include "spreadid/model.hpp"
#include "spreadid/types.hpp"

namespace spreadid {

enum class ProbingKind { random_disc, alltop, custom };

const char* to_string(ProbingKind kind);
ProbingKind parse_probing_kind(std::string_view name);

/// Coefficients c_0..c_{L-1} of the L-periodic impulse-train probing signal.
class ProbingSequence {
public:
    /// Throws ValidationError on an empty or all-zero vector.
    ProbingSequence(CVector c, ProbingKind kind = ProbingKind::custom);

    int L() const { return static_cast<int>(c_.size()); }
    const CVector& coefficients() const { return c_; }
    ProbingKind kind() const { return kind_; }
    /// c_{i mod L}, for any integer i.
    cplx at(std::int64_t i) const { return c_(positive_mod(i, c_.size())); }

private:
    CVector c_;
    ProbingKind kind_;
};

/// (1/sqrt(L)) e^{j 2 pi i^3 / L}. Warns when L < 5 or L is not prime.
ProbingSequence alltop(int L);

/// Entries i.i.d. uniform on the closed complex unit disc.
ProbingSequence random_disc(int L, Rng& rng);

/// L x L^2 matrix whose column k*L+m is the time-frequency shift
/// p -> c_{k-p} e^{j 2 pi p m / L}.
class MeasurementMatrix {
public:
    explicit MeasurementMatrix(ProbingSequence source);

    int L() const { return source_.L(); }
    const CMatrix& matrix() const { return A_; }
    const ProbingSequence& source() const { return source_; }

private:
    ProbingSequence source_;
    CMatrix A_;
};

MeasurementMatrix build_matrix(const ProbingSequence& c);

/// Ordered subset Omega of the L row indices.
class RowSubset {
public:
    RowSubset(int L, std::vector<int> rows);
    static RowSubset prefix(int L, int P);
    static RowSubset all(int L) { return prefix(L, L); }

    int L() const { return L_; }
    int size() const { return static_cast<int>(rows_.size()); }
    const std::vector<int>& rows() const { return rows_; }

private:
    int L_;
    std::vector<int> rows_;
};

/// Columns of A indexed by Gamma, in ascending k*L+m order.
CMatrix column_submatrix(const MeasurementMatrix& A, const SupportSet& support);
CMatrix column_submatrix(const CMatrix& A, const SupportSet& support);

/// Rows of A in the order listed by Omega.
CMatrix row_submatrix(const MeasurementMatrix& A, const RowSubset& omega);
CMatrix row_submatrix(const CMatrix& A, const RowSubset& omega);

/// Smallest number of linearly dependent columns of M, or std::nullopt if every
/// subset of at most `max_cardinality` columns is independent. A subset is
/// dependent when sigma_min <= kRankEps * sigma_max. Throws BudgetError when
/// C(cols, max_cardinality) exceeds kEnumerationBudget.
std::optional<int> spark_exhaustive(const CMatrix& M, int max_cardinality);

}  // namespace spreadid
