#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "kclust/common.hpp"
#include "kclust/model.hpp"
#include "kclust/spectral.hpp"

namespace kclust {

struct KMeansResult {
    std::vector<int> labels;
    Matrix centroids;  // k x d
    double loss = 0.0;
    int restart_index = 0;
};

namespace detail {

// assignment tie-break: lowest centroid index wins
inline void assign_points(const Matrix& W, const Matrix& C,
                          std::vector<int>& labels) {
    const int n = static_cast<int>(W.rows());
    const int k = static_cast<int>(C.rows());
    for (int i = 0; i < n; ++i) {
        int best = 0;
        double best_d = (W.row(i) - C.row(0)).squaredNorm();
        for (int g = 1; g < k; ++g) {
            double d = (W.row(i) - C.row(g)).squaredNorm();
            if (d < best_d - 1e-15) {
                best_d = d;
                best = g;
            }
        }
        labels[i] = best;
    }
}

inline double wcss(const Matrix& W, const Matrix& C,
                   const std::vector<int>& labels) {
    double loss = 0.0;
    for (int i = 0; i < W.rows(); ++i)
        loss += (W.row(i) - C.row(labels[i])).squaredNorm();
    return loss;
}

// distance-weighted (k-means++ style) seeding
inline Matrix seed_centroids(const Matrix& W, int k, SplitMix64& rng) {
    const int n = static_cast<int>(W.rows());
    Matrix C(k, W.cols());
    int first = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(n));
    C.row(0) = W.row(first);
    Vector d2 = (W.rowwise() - C.row(0)).rowwise().squaredNorm();
    for (int g = 1; g < k; ++g) {
        double total = d2.sum();
        int pick = 0;
        if (total <= 0.0) {
            pick = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(n));
        } else {
            double target = rng.next_double() * total, acc = 0.0;
            for (int i = 0; i < n; ++i) {
                acc += d2(i);
                if (acc >= target) {
                    pick = i;
                    break;
                }
            }
        }
        C.row(g) = W.row(pick);
        d2 = d2.cwiseMin((W.rowwise() - C.row(g)).rowwise().squaredNorm());
    }
    return C;
}

}  // namespace detail

/// Lloyd's algorithm, best of `restarts` independent runs (lowest
/// within-cluster sum of squares). Empty clusters are re-seeded at the point
/// farthest from its assigned centroid.
inline KMeansResult lloyd(const Matrix& W, int k, int restarts,
                          std::uint64_t seed, int max_iter = 300) {
    const int n = static_cast<int>(W.rows());
    require(k >= 1 && k <= n, "need 1 <= k <= n");
    require(restarts >= 1, "restarts must be >= 1");

    KMeansResult best;
    best.loss = std::numeric_limits<double>::infinity();
    std::vector<int> labels(n);
    for (int rep = 0; rep < restarts; ++rep) {
        SplitMix64 rng(SplitMix64::derive(seed, static_cast<std::uint64_t>(rep)));
        Matrix C = detail::seed_centroids(W, k, rng);
        double prev_loss = std::numeric_limits<double>::infinity();
        for (int it = 0; it < max_iter; ++it) {
            detail::assign_points(W, C, labels);
            std::vector<int> counts(k, 0);
            Matrix sums = Matrix::Zero(k, W.cols());
            for (int i = 0; i < n; ++i) {
                counts[labels[i]] += 1;
                sums.row(labels[i]) += W.row(i);
            }
            for (int g = 0; g < k; ++g) {
                if (counts[g] > 0) {
                    C.row(g) = sums.row(g) / counts[g];
                } else {
                    // farthest point from its current centroid
                    int far = 0;
                    double far_d = -1.0;
                    for (int i = 0; i < n; ++i) {
                        double d = (W.row(i) - C.row(labels[i])).squaredNorm();
                        if (d > far_d) {
                            far_d = d;
                            far = i;
                        }
                    }
                    C.row(g) = W.row(far);
                    labels[far] = g;
                }
            }
            detail::assign_points(W, C, labels);
            double loss = detail::wcss(W, C, labels);
            if (loss >= prev_loss - 1e-12) break;
            prev_loss = loss;
        }
        // guarantee k nonempty clusters even for coincident points: move the
        // farthest point of a multi-member cluster into each empty one (its
        // cost drops to zero, so the loss never increases)
        std::vector<int> counts(k, 0);
        for (int lab : labels) counts[lab] += 1;
        for (int g = 0; g < k; ++g) {
            if (counts[g] > 0) continue;
            int far = -1;
            double far_d = -1.0;
            for (int i = 0; i < n; ++i) {
                if (counts[labels[i]] < 2) continue;
                double d = (W.row(i) - C.row(labels[i])).squaredNorm();
                if (d > far_d) {
                    far_d = d;
                    far = i;
                }
            }
            counts[labels[far]] -= 1;
            counts[g] += 1;
            C.row(g) = W.row(far);
            labels[far] = g;
        }
        double loss = detail::wcss(W, C, labels);
        if (loss < best.loss) {
            best.loss = loss;
            best.labels = labels;
            best.centroids = C;
            best.restart_index = rep;
        }
    }
    return best;
}

/// Indices whose assigned centroid deviates from the aligned population
/// centroid row (Z nu O)_i by at least sqrt(r/(2n)).
inline std::vector<int> misclustered_set(const KMeansResult& result,
                                         const MembershipMatrix& Z,
                                         const Matrix& nu, const Rotation& rot) {
    const int n = static_cast<int>(Z.Z.rows());
    const int r = static_cast<int>(Z.Z.cols());
    require(static_cast<int>(result.labels.size()) == n, "label count mismatch");
    require(nu.rows() == r && nu.cols() == result.centroids.cols(),
            "nu shape mismatch");
    const Matrix ref = Z.Z * nu * rot.O;
    const double threshold = std::sqrt(static_cast<double>(r) / (2.0 * n));
    std::vector<int> mis;
    for (int i = 0; i < n; ++i) {
        Eigen::RowVectorXd ci = result.centroids.row(result.labels[i]);
        if ((ci - ref.row(i)).norm() >= threshold) mis.push_back(i);
    }
    return mis;
}

/// Population centroid coefficients nu (r x r) from a blockwise-constant
/// basis U = Z nu: row of U for any member of each cluster.
inline Matrix population_centroids(const EigenBasis& basis,
                                   const std::vector<int>& labels, int r) {
    Matrix nu = Matrix::Zero(r, basis.r());
    std::vector<int> counts(r, 0);
    for (int i = 0; i < static_cast<int>(labels.size()); ++i) {
        nu.row(labels[i]) += basis.U.row(i);
        counts[labels[i]] += 1;
    }
    for (int k = 0; k < r; ++k) {
        require(counts[k] > 0, "empty cluster in population basis");
        nu.row(k) /= counts[k];
    }
    return nu;
}

/// Spectral relaxation of the k-means loss: sum of squared singular values
/// of W beyond index k.
inline double kmeans_loss_lower_bound(const Matrix& W, int k) {
    require(k >= 1 && k <= W.cols(), "need 1 <= k <= d");
    Eigen::JacobiSVD<Matrix> svd(W);
    double bound = 0.0;
    for (int i = k; i < svd.singularValues().size(); ++i) {
        double s = svd.singularValues()(i);
        bound += s * s;
    }
    return bound;
}

}  // namespace kclust
