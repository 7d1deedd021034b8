#pragma once

#include <cmath>
#include <ostream>

#include <json.hpp>

#include "kclust/common.hpp"
#include "kclust/kernel.hpp"

namespace kclust {

struct AdmmParams {
    double penalty = 0.0;       // 0 -> default n / ||K||_F
    int max_iter = 5000;
    double tol_primal = 1e-5;   // relative primal residual
    double tol_dual = 1e-5;     // relative dual residual
    std::ostream* telemetry = nullptr;  // JSON-lines per iteration

    void validate() const {
        require(penalty >= 0.0, "penalty must be nonnegative");
        require(max_iter >= 1, "max_iter must be >= 1");
        require(tol_primal > 0.0 && tol_dual > 0.0, "tolerances must be positive");
    }
};

struct SdpSolution {
    Matrix X_hat;
    double objective = 0.0;      // <K, X_hat>
    int iterations = 0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    bool converged = false;
};

/// Nearest PSD matrix in Frobenius norm: clip negative eigenvalues.
inline Matrix project_psd(const Matrix& M) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(M);
    if (es.info() != Eigen::Success)
        throw NumericalError("psd projection: eigensolve failed");
    Vector lam = es.eigenvalues().cwiseMax(0.0);
    return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

namespace detail {

/// Exact projection onto the symmetric affine set
/// {X = X^T : diag(X) = 1, X 1 = (n/r) 1}, via the closed-form KKT solve for
/// the multipliers of the row-sum and diagonal constraints.
inline Matrix project_affine(const Matrix& M, int r) {
    const int n = static_cast<int>(M.rows());
    require(n >= 3, "affine projection needs n >= 3");
    const double b = static_cast<double>(n) / r;
    Vector t = M.rowwise().sum() - Vector::Constant(n, b) - M.diagonal() +
               Vector::Ones(n);
    double S = t.sum() / (2.0 * n - 2.0);
    Vector u = (t.array() - S) / (n - 2.0);
    Vector v = M.diagonal() - Vector::Ones(n) - 2.0 * u;
    Matrix X = M;
    X.noalias() -= u * Matrix::Ones(1, n);
    X.noalias() -= Matrix::Ones(n, 1) * u.transpose();
    X.diagonal() -= v;
    return X;
}

}  // namespace detail

/// Dykstra projection onto {X >= 0, diag(X) = 1, X 1 = (n/r) 1}.
inline Matrix project_polytope(const Matrix& M, int r, int max_sub_iter = 2000,
                               double tol = 1e-10) {
    const int n = static_cast<int>(M.rows());
    require(M.cols() == n, "matrix must be square");
    require(r >= 1 && n % r == 0, "r must divide n");
    Matrix X = 0.5 * (M + M.transpose());
    Matrix P = Matrix::Zero(n, n);  // Dykstra correction for the cone half-step
    for (int it = 0; it < max_sub_iter; ++it) {
        Matrix Yc = (X + P).cwiseMax(0.0);
        P = X + P - Yc;
        Matrix X_prev = X;
        X = detail::project_affine(Yc, r);
        // feasibility alone is not enough: a feasible iterate can still be far
        // from the nearest point, so also require the iterate to stall
        double res = std::max(std::max(0.0, -X.minCoeff()),
                              (X - X_prev).cwiseAbs().maxCoeff());
        // clamping residual-scale negatives keeps row sums within 1e-8*n
        if (res < tol) return X.cwiseMax(0.0);
    }
    double neg = std::max(0.0, -X.minCoeff());
    if (neg > 1e-6)
        throw NumericalError("polytope projection did not converge, residual " +
                             std::to_string(neg));
    return X.cwiseMax(0.0);
}

/// SDP-1 by two-block ADMM:
///   maximize <K, X>  s.t.  X psd, X >= 0, X 1 = (n/r) 1, diag(X) = 1.
/// X-block: psd cone, Z-block: polytope, scaled dual U.
inline SdpSolution solve_sdp1(const KernelMatrix& km, int r,
                              const AdmmParams& params = {}) {
    params.validate();
    const int n = km.n();
    require(r >= 2, "r must be >= 2");
    require(n % r == 0, "r must divide n");
    require((km.K - km.K.transpose()).cwiseAbs().maxCoeff() < 1e-9,
            "K must be symmetric");

    double rho = params.penalty > 0.0 ? params.penalty
                                      : static_cast<double>(n) / km.K.norm();

    Matrix Z = Matrix::Constant(n, n, 1.0 / r);
    Z.diagonal().setOnes();
    Z = project_polytope(Z, r);
    Matrix X = Z;
    Matrix U = Matrix::Zero(n, n);

    SdpSolution sol;
    const double scale = std::max(1.0, Z.norm());
    for (int it = 1; it <= params.max_iter; ++it) {
        X = project_psd(Z - U + km.K / rho);
        Matrix Z_prev = Z;
        Z = project_polytope(X + U, r);
        U += X - Z;

        double denom = std::max({X.norm(), Z.norm(), scale});
        sol.primal_residual = (X - Z).norm() / denom;
        sol.dual_residual = rho * (Z - Z_prev).norm() / denom;
        sol.iterations = it;
        if (params.telemetry) {
            (*params.telemetry)
                << "{\"iteration\":" << it
                << ",\"objective\":" << (km.K.array() * Z.array()).sum()
                << ",\"primal_residual\":" << sol.primal_residual
                << ",\"dual_residual\":" << sol.dual_residual << "}\n";
        }
        if (sol.primal_residual < params.tol_primal &&
            sol.dual_residual < params.tol_dual) {
            sol.converged = true;
            break;
        }
    }
    // Z satisfies the polytope constraints exactly; psd holds within the
    // primal residual
    sol.X_hat = Z;
    sol.objective = (km.K.array() * sol.X_hat.array()).sum();
    return sol;
}

/// Entrywise threshold at 0.5; integral matrix used for exact-recovery checks.
inline Matrix round_clustering(const Matrix& X) {
    return (X.array() >= 0.5).cast<double>();
}

}  // namespace kclust
