// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <vector>

#include "spreadid/types.hpp"

namespace spreadid::linalg {

/// Singular values in descending order. Empty matrices give an empty vector.
RVector singular_values(const CMatrix& M);

/// Number of singular values strictly above tol * sigma_max (0 for M = 0).
int numerical_rank(const CMatrix& M, double tol = kRankEps);

/// Minimum-norm least-squares solution of A X = B via complete orthogonal
/// decomposition with the given relative rank threshold.
CMatrix least_squares(const CMatrix& A, const CMatrix& B, double tol = kRankEps);

/// Orthonormal basis of the null space of A (columns), using singular vectors
/// whose singular values fall at or below tol * sigma_max.
CMatrix null_space(const CMatrix& A, double tol = kRankEps);

/// ||B - P_A B||_F where P_A is the orthogonal projector onto range(A).
double projection_residual(const CMatrix& A, const CMatrix& B);

/// Binomial coefficient as a double (exact for the ranges used here).
double binomial(int n, int k);

/// Calls visit(subset) for every k-subset of {0..n-1} in lexicographic order.
/// Stops early when visit returns false. Returns false if stopped early.
bool for_each_combination(int n, int k, const std::function<bool(const std::vector<int>&)>& visit);

}  // namespace spreadid::linalg
