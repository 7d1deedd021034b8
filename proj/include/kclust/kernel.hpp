#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <vector>

#include <json.hpp>

#include "kclust/common.hpp"
#include "kclust/model.hpp"

namespace kclust {

enum class KernelKind { empirical, population, centered, laplacian_normalized };

struct KernelMatrix {
    Matrix K;
    KernelKind kind = KernelKind::empirical;

    int n() const { return static_cast<int>(K.rows()); }
};

namespace detail {
// entries this small would denormalize downstream eigensolves
constexpr double kKernelFloor = 1e-300;

inline double gauss(double sq_dist, double eta) {
    return std::max(std::exp(-eta * sq_dist), kKernelFloor);
}
}  // namespace detail

/// K_ij = exp(-eta * ||Y_i - Y_j||^2), unit diagonal.
inline KernelMatrix gaussian_kernel(const Matrix& Y, double eta) {
    require(eta > 0.0, "eta must be positive");
    require(Y.allFinite(), "Y must be finite");
    const int n = static_cast<int>(Y.rows());
    KernelMatrix km;
    km.kind = KernelKind::empirical;
    km.K = Matrix::Ones(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double v = detail::gauss((Y.row(i) - Y.row(j)).squaredNorm(), eta);
            km.K(i, j) = v;
            km.K(j, i) = v;
        }
    return km;
}

/// Median of pairwise squared distances; eta = 1/(2 * median).
inline double median_heuristic_eta(const Matrix& Y) {
    const int n = static_cast<int>(Y.rows());
    require(n >= 2, "need at least two points");
    std::vector<double> d2;
    d2.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            d2.push_back((Y.row(i) - Y.row(j)).squaredNorm());
    auto mid = d2.begin() + d2.size() / 2;
    std::nth_element(d2.begin(), mid, d2.end());
    double med = *mid;
    require(med > 0.0, "degenerate data: median pairwise distance is zero");
    return 1.0 / (2.0 * med);
}

/// Blockwise-constant population kernel: off-diagonal entries
/// f(d_{kl}^2 + sigma_k^2 + sigma_l^2) per extended-cluster pair, diagonal 1.
inline KernelMatrix population_kernel(const MixtureConfig& cfg, double eta) {
    cfg.validate();
    require(eta > 0.0, "eta must be positive");
    auto labels = extended_labels(cfg);
    Matrix block(cfg.r, cfg.r);
    for (int k = 0; k < cfg.r; ++k)
        for (int l = 0; l < cfg.r; ++l)
            block(k, l) = detail::gauss(
                cfg.d2(k, l) + cfg.sigmas[k] * cfg.sigmas[k] +
                    cfg.sigmas[l] * cfg.sigmas[l],
                eta);
    KernelMatrix km;
    km.kind = KernelKind::population;
    km.K = Matrix::Zero(cfg.n, cfg.n);
    for (int i = 0; i < cfg.n; ++i)
        for (int j = 0; j < cfg.n; ++j)
            km.K(i, j) = (i == j) ? 1.0 : block(labels[i], labels[j]);
    return km;
}

/// Double centering: K - K11'/n - 11'K/n + 11'K11'/n^2.
inline KernelMatrix center_kernel(const KernelMatrix& km) {
    const int n = km.n();
    Vector row_mean = km.K.rowwise().mean();
    double total_mean = row_mean.mean();
    KernelMatrix out;
    out.kind = KernelKind::centered;
    out.K = km.K;
    out.K.colwise() -= row_mean;
    out.K.rowwise() -= row_mean.transpose();
    out.K.array() += total_mean;
    return out;
}

/// D^{-1/2} K D^{-1/2} with D = diag(K 1).
inline KernelMatrix laplacian_normalize(const KernelMatrix& km) {
    Vector rs = km.K.rowwise().sum();
    require((rs.array() > 0.0).all(), "nonpositive row sum: not a kernel matrix");
    Vector d_inv_sqrt = rs.array().rsqrt();
    KernelMatrix out;
    out.kind = KernelKind::laplacian_normalized;
    out.K = d_inv_sqrt.asDiagonal() * km.K * d_inv_sqrt.asDiagonal();
    return out;
}

/// gamma_{kl} = f(2 sigma_k^2) - f(d_{kl}^2 + sigma_k^2 + sigma_l^2) and the
/// eigengap lower bound (n/r) lambda_min(B) min_k f(sigma_k^2)^2
///   - 2 max_k (1 - f(2 sigma_k^2)), where B_{kl} = f(d_{kl}^2).
struct SeparationStats {
    Matrix gamma;                     // r x r
    double gamma_min = 0.0;
    double eigengap_lower_bound = 0.0;
    double b_min_eig = 0.0;
};

inline SeparationStats separation_stats(const MixtureConfig& cfg, double eta) {
    cfg.validate();
    require(eta > 0.0, "eta must be positive");
    const int r = cfg.r;
    SeparationStats st;
    st.gamma = Matrix::Zero(r, r);
    Matrix B(r, r);
    double min_f_sig2 = 1.0, max_one_minus_f2sig2 = 0.0;
    st.gamma_min = std::numeric_limits<double>::infinity();
    for (int k = 0; k < r; ++k) {
        double sk2 = cfg.sigmas[k] * cfg.sigmas[k];
        min_f_sig2 = std::min(min_f_sig2, detail::gauss(sk2, eta));
        max_one_minus_f2sig2 =
            std::max(max_one_minus_f2sig2, 1.0 - detail::gauss(2.0 * sk2, eta));
        for (int l = 0; l < r; ++l) {
            B(k, l) = detail::gauss(cfg.d2(k, l), eta);
            if (k == l) continue;
            double sl2 = cfg.sigmas[l] * cfg.sigmas[l];
            st.gamma(k, l) = detail::gauss(2.0 * sk2, eta) -
                             detail::gauss(cfg.d2(k, l) + sk2 + sl2, eta);
            st.gamma_min = std::min(st.gamma_min, st.gamma(k, l));
        }
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(B, Eigen::EigenvaluesOnly);
    require(es.info() == Eigen::Success, "eigensolve of B failed");
    st.b_min_eig = es.eigenvalues().minCoeff();
    st.eigengap_lower_bound =
        (static_cast<double>(cfg.n) / r) * st.b_min_eig * min_f_sig2 * min_f_sig2 -
        2.0 * max_one_minus_f2sig2;
    return st;
}

/// sup over inlier pairs of |K_ij - Ktilde_ij|; diagonal excluded by default
/// (it matches exactly by construction).
inline double sup_deviation(const KernelMatrix& K, const KernelMatrix& Ktilde,
                            const std::vector<int>& inliers,
                            bool include_diagonal = false) {
    require(K.K.rows() == Ktilde.K.rows() && K.K.cols() == Ktilde.K.cols(),
            "kernel dimension mismatch");
    double sup = 0.0;
    for (int i : inliers)
        for (int j : inliers) {
            if (i == j && !include_diagonal) continue;
            sup = std::max(sup, std::abs(K.K(i, j) - Ktilde.K(i, j)));
        }
    return sup;
}

inline void to_json(nlohmann::json& j, const SeparationStats& st) {
    std::vector<std::vector<double>> gamma(st.gamma.rows());
    for (int k = 0; k < st.gamma.rows(); ++k)
        for (int l = 0; l < st.gamma.cols(); ++l) gamma[k].push_back(st.gamma(k, l));
    j = nlohmann::json{{"gamma", gamma},
                       {"gamma_min", st.gamma_min},
                       {"eigengap_lower_bound", st.eigengap_lower_bound},
                       {"b_min_eig", st.b_min_eig}};
}

/// Debug CSV dump of any square matrix.
inline void write_matrix_csv(const Matrix& M, std::ostream& os) {
    os.precision(17);
    for (int i = 0; i < M.rows(); ++i) {
        for (int j = 0; j < M.cols(); ++j)
            os << M(i, j) << (j + 1 < M.cols() ? "," : "");
        os << "\n";
    }
}

}  // namespace kclust
