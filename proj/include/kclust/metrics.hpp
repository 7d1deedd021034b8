#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "kclust/common.hpp"
#include "kclust/kernel.hpp"
#include "kclust/kmeans.hpp"
#include "kclust/model.hpp"
#include "kclust/sdp.hpp"
#include "kclust/spectral.hpp"

namespace kclust {

/// Entrywise l1 distance sum_ij |A_ij - B_ij|.
inline double l1_distance(const Matrix& A, const Matrix& B) {
    require(A.rows() == B.rows() && A.cols() == B.cols(), "shape mismatch");
    return (A - B).cwiseAbs().sum();
}

namespace detail {

inline Matrix confusion(const std::vector<int>& pred,
                        const std::vector<int>& truth,
                        const std::vector<int>& subset, int r) {
    Matrix C = Matrix::Zero(r, r);
    for (int i : subset) {
        require(pred[i] >= 0 && pred[i] < r, "pred label out of range");
        require(truth[i] >= 0 && truth[i] < r, "truth label out of range");
        C(pred[i], truth[i]) += 1.0;
    }
    return C;
}

// Hungarian algorithm (potentials formulation), min-cost square assignment.
inline double min_cost_assignment(const Matrix& cost) {
    const int n = static_cast<int>(cost.rows());
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, std::numeric_limits<double>::infinity());
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            int i0 = p[j0], j1 = 0;
            double delta = std::numeric_limits<double>::infinity();
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    double total = 0.0;
    for (int j = 1; j <= n; ++j)
        if (p[j] != 0) total += cost(p[j] - 1, j - 1);
    return total;
}

}  // namespace detail

/// Best-permutation inlier accuracy: max over label permutations of the
/// fraction of correctly clustered inliers. Exhaustive for r <= 10, optimal
/// assignment above (same optimum).
inline double inlier_accuracy(const std::vector<int>& pred,
                              const std::vector<int>& truth,
                              const std::vector<int>& inliers, int r) {
    require(!inliers.empty(), "inlier set must be nonempty");
    Matrix C = detail::confusion(pred, truth, inliers, r);
    double best = 0.0;
    if (r <= 10) {
        std::vector<int> perm(r);
        std::iota(perm.begin(), perm.end(), 0);
        do {
            double correct = 0.0;
            for (int k = 0; k < r; ++k) correct += C(k, perm[k]);
            best = std::max(best, correct);
        } while (std::next_permutation(perm.begin(), perm.end()));
    } else {
        best = -detail::min_cost_assignment(-C);
    }
    return best / static_cast<double>(inliers.size());
}

/// Number of distinct predicted labels among inliers.
inline int inlier_cluster_count(const std::vector<int>& pred,
                                const std::vector<int>& inliers) {
    std::vector<int> seen;
    for (int i : inliers)
        if (std::find(seen.begin(), seen.end(), pred[i]) == seen.end())
            seen.push_back(pred[i]);
    return static_cast<int>(seen.size());
}

struct BoundCheck {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    bool applicable = true;
    bool pass = true;
};

inline BoundCheck make_check(std::string name, double lhs, double rhs,
                             double slack = 1e-9) {
    BoundCheck c;
    c.name = std::move(name);
    c.lhs = lhs;
    c.rhs = rhs;
    c.pass = lhs <= rhs + slack;
    return c;
}

/// Everything one pipeline run on synthetic data produces that the
/// inequality checkers need.
struct RunArtifacts {
    KernelMatrix K;       // empirical kernel
    KernelMatrix Ktilde;  // population kernel
    Matrix X_hat;         // SDP solution
    Matrix X0;            // ground-truth clustering matrix
    EigenBasis U_hat;     // top-r eigenvectors of X_hat
    EigenBasis U;         // top-r eigenvectors of X0
    Rotation rot;         // Procrustes alignment of U_hat to U
    KMeansResult km;      // k-means on rows of U_hat
    MembershipMatrix Z;
    double gamma_min = 0.0;
    int m = 0;
    int n = 0;
    int r = 0;
};

/// Labels back out of a membership matrix.
inline std::vector<int> label_vector(const MembershipMatrix& Z) {
    std::vector<int> labels(Z.Z.rows());
    for (int i = 0; i < Z.Z.rows(); ++i) {
        int k = 0;
        Z.Z.row(i).maxCoeff(&k);
        labels[i] = k;
    }
    return labels;
}

/// Finite-sample inequality checks: the l1 deviation bound, the eigenvector
/// perturbation bound, and the misclustered-set cardinality bound.
inline std::vector<BoundCheck> check_consistency_bounds(const RunArtifacts& a) {
    std::vector<BoundCheck> checks;
    const double nr = static_cast<double>(a.n) / a.r;
    const double l1 = l1_distance(a.X0, a.X_hat);
    const double scale_slack = 1e-9 + 1e-6 * a.n * a.n;

    // l1 consistency: ||X0 - Xhat||_1 <= 2 <K - Ktilde, Xhat - X0> / gamma_min
    if (a.gamma_min > 0.0) {
        double inner =
            ((a.K.K - a.Ktilde.K).array() * (a.X_hat - a.X0).array()).sum();
        checks.push_back(
            make_check("l1_deviation", l1, 2.0 * inner / a.gamma_min,
                       scale_slack / a.gamma_min));
    } else {
        BoundCheck c;
        c.name = "l1_deviation";
        c.applicable = false;
        checks.push_back(c);
    }

    // eigenvector bound: ||Uhat - U O||_F <= 2^{3/2} ||Xhat - X0||_F / (n/r)
    double aligned = aligned_distance(a.U_hat, a.U, a.rot);
    checks.push_back(make_check("eigenvector_fro",
                                aligned,
                                2.0 * std::sqrt(2.0) * (a.X_hat - a.X0).norm() / nr));
    // weaker chained form through the l1 norm
    checks.push_back(
        make_check("eigenvector_l1", aligned, std::sqrt(8.0 * l1) / nr));

    // misclustered cardinality: |M| <= (8n/r) ||Uhat - U O||_F^2
    Matrix nu = population_centroids(a.U, label_vector(a.Z), a.r);
    auto mis = misclustered_set(a.km, a.Z, nu, a.rot);
    checks.push_back(make_check("misclustered_cardinality",
                                static_cast<double>(mis.size()),
                                8.0 * nr * aligned * aligned));
    return checks;
}

struct EvalReport {
    double inlier_accuracy = 0.0;
    double all_accuracy = 0.0;  // debugging only, never gates
    double l1_error = 0.0;
    int misclustered_count = 0;
    int inlier_cluster_count = 0;
    std::vector<BoundCheck> bound_checks;
};

inline void to_json(nlohmann::json& j, const BoundCheck& c) {
    j = nlohmann::json{{"name", c.name},
                       {"lhs", c.lhs},
                       {"rhs", c.rhs},
                       {"applicable", c.applicable},
                       {"pass", c.pass}};
}

inline void to_json(nlohmann::json& j, const EvalReport& r) {
    j = nlohmann::json{{"inlier_accuracy", r.inlier_accuracy},
                       {"all_accuracy", r.all_accuracy},
                       {"l1_error", r.l1_error},
                       {"misclustered_count", r.misclustered_count},
                       {"inlier_cluster_count", r.inlier_cluster_count},
                       {"bound_checks", r.bound_checks}};
}

}  // namespace kclust
