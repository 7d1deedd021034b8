#pragma once

#include <algorithm>
#include <cmath>
#include <ostream>
#include <vector>

#include "kclust/common.hpp"

namespace kclust {

struct EigenBasis {
    Matrix U;            // n x r, orthonormal columns
    Vector eigenvalues;  // r values, descending

    int r() const { return static_cast<int>(U.cols()); }
};

struct Rotation {
    Matrix O;  // r x r orthogonal
    bool rank_deficient = false;
};

/// Eigenvectors of the r algebraically largest eigenvalues of a symmetric M.
inline EigenBasis top_eigenvectors(const Matrix& M, int r) {
    const int n = static_cast<int>(M.rows());
    require(M.cols() == n, "matrix must be square");
    require(r >= 1 && r <= n, "need 1 <= r <= n");
    Eigen::SelfAdjointEigenSolver<Matrix> es(M);
    if (es.info() != Eigen::Success)
        throw NumericalError("symmetric eigensolve failed");
    EigenBasis basis;
    basis.U = Matrix(n, r);
    basis.eigenvalues = Vector(r);
    // Eigen returns ascending order
    for (int j = 0; j < r; ++j) {
        basis.U.col(j) = es.eigenvectors().col(n - 1 - j);
        basis.eigenvalues(j) = es.eigenvalues()(n - 1 - j);
    }
    return basis;
}

/// Eigenvectors of the r largest-magnitude eigenvalues; this is the
/// singular-vector choice for possibly indefinite (centered) kernels.
inline EigenBasis top_singular_vectors(const Matrix& M, int r) {
    const int n = static_cast<int>(M.rows());
    require(M.cols() == n, "matrix must be square");
    require(r >= 1 && r <= n, "need 1 <= r <= n");
    Eigen::SelfAdjointEigenSolver<Matrix> es(M);
    if (es.info() != Eigen::Success)
        throw NumericalError("symmetric eigensolve failed");
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return std::abs(es.eigenvalues()(a)) > std::abs(es.eigenvalues()(b));
    });
    EigenBasis basis;
    basis.U = Matrix(n, r);
    basis.eigenvalues = Vector(r);
    for (int j = 0; j < r; ++j) {
        basis.U.col(j) = es.eigenvectors().col(order[j]);
        basis.eigenvalues(j) = std::abs(es.eigenvalues()(order[j]));
    }
    return basis;
}

/// Orthogonal O minimizing ||U_hat - U O||_F (polar factor of U^T U_hat).
inline Rotation procrustes_align(const EigenBasis& u_hat, const EigenBasis& u) {
    require(u_hat.U.rows() == u.U.rows() && u_hat.U.cols() == u.U.cols(),
            "basis shape mismatch");
    Matrix M = u.U.transpose() * u_hat.U;
    Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Rotation rot;
    rot.O = svd.matrixU() * svd.matrixV().transpose();
    double smin = svd.singularValues().minCoeff();
    // still a minimizer, but no longer the unique one
    rot.rank_deficient = smin < 1e-12;
    return rot;
}

inline double aligned_distance(const EigenBasis& u_hat, const EigenBasis& u,
                               const Rotation& rot) {
    return (u_hat.U - u.U * rot.O).norm();
}

/// 2^{3/2} ||perturbation||_F / (lambda_r - lambda_{r+1}).
inline double davis_kahan_bound(double fro_dist, double lambda_r,
                                double lambda_r1) {
    require(fro_dist >= 0.0, "distance must be nonnegative");
    require(lambda_r > lambda_r1, "eigengap must be positive");
    return 2.0 * std::sqrt(2.0) * fro_dist / (lambda_r - lambda_r1);
}

/// CSV export: n rows, r eigenvector columns; eigenvalues in the header.
inline void write_basis_csv(const EigenBasis& basis, std::ostream& os) {
    os.precision(17);
    for (int j = 0; j < basis.r(); ++j)
        os << "u" << j << (j + 1 < basis.r() ? "," : "");
    os << "\n# eigenvalues:";
    for (int j = 0; j < basis.r(); ++j) os << " " << basis.eigenvalues(j);
    os << "\n";
    for (int i = 0; i < basis.U.rows(); ++i) {
        for (int j = 0; j < basis.r(); ++j)
            os << basis.U(i, j) << (j + 1 < basis.r() ? "," : "");
        os << "\n";
    }
}

}  // namespace kclust
