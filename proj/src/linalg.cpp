// SPDX-License-Identifier: Apache-2.0
#include "spreadid/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace spreadid::linalg {

RVector singular_values(const CMatrix& M) {
    if (M.size() == 0) return RVector();
    // The QR preconditioner handles wide matrices (L x E*D) without forming M*M^H.
    Eigen::JacobiSVD<CMatrix, Eigen::ColPivHouseholderQRPreconditioner> svd(M);
    return svd.singularValues();
}

int numerical_rank(const CMatrix& M, double tol) {
    const RVector s = singular_values(M);
    if (s.size() == 0 || s(0) == 0.0) return 0;
    int rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s(i) > tol * s(0)) ++rank;
    }
    return rank;
}

CMatrix least_squares(const CMatrix& A, const CMatrix& B, double tol) {
    if (A.cols() == 0) return CMatrix(0, B.cols());
    Eigen::CompleteOrthogonalDecomposition<CMatrix> cod;
    cod.setThreshold(tol);
    cod.compute(A);
    return cod.solve(B);
}

CMatrix null_space(const CMatrix& A, double tol) {
    const Eigen::Index n = A.cols();
    if (n == 0) return CMatrix(0, 0);
    Eigen::JacobiSVD<CMatrix> svd(A, Eigen::ComputeFullV);
    const RVector& s = svd.singularValues();
    const double smax = s.size() > 0 ? s(0) : 0.0;
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (smax > 0.0 && s(i) > tol * smax) ++rank;
    }
    return svd.matrixV().rightCols(n - rank);
}

double projection_residual(const CMatrix& A, const CMatrix& B) {
    if (A.cols() == 0) return B.norm();
    Eigen::ColPivHouseholderQR<CMatrix> qr(A);
    qr.setThreshold(kRankEps);
    const Eigen::Index rank = qr.rank();
    if (rank == 0) return B.norm();
    const CMatrix Q = qr.householderQ() * CMatrix::Identity(A.rows(), rank);
    return (B - Q * (Q.adjoint() * B)).norm();
}

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    k = std::min(k, n - k);
    double out = 1.0;
    for (int i = 1; i <= k; ++i) out = out * static_cast<double>(n - k + i) / i;
    return std::round(out);
}

bool for_each_combination(int n, int k,
                          const std::function<bool(const std::vector<int>&)>& visit) {
    if (k < 0 || k > n) return true;
    std::vector<int> idx(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
    while (true) {
        if (!visit(idx)) return false;
        int i = k - 1;
        while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i) --i;
        if (i < 0) return true;
        ++idx[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < k; ++j) {
            idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
        }
    }
}

}  // namespace spreadid::linalg
