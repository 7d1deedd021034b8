#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <vector>

#include <json.hpp>

#include "kclust/common.hpp"

namespace kclust {

enum class NoiseKind { gaussian, uniform };

/// Mixture-with-outliers model: n points in R^p, r equal extended clusters,
/// m of the points are arbitrary outliers.
struct MixtureConfig {
    int n = 0;
    int m = 0;
    int r = 0;
    int p = 0;
    std::vector<Vector> means;       // r sparse cluster centers
    std::vector<double> sigmas;      // r per-cluster noise scales
    double outlier_scale = 3.0;      // Gaussian-outlier sd = scale * max_k ||mu_k||
    double box_inflation = 1.5;      // uniform-outlier bounding-box inflation
    NoiseKind noise = NoiseKind::gaussian;
    std::uint64_t seed = 0;

    void validate() const {
        require(r >= 2, "r must be >= 2");
        require(n > 0 && n % r == 0, "r must divide n");
        require(m >= 0 && m < n, "need 0 <= m < n");
        require(p >= 1, "p must be positive");
        require(static_cast<int>(means.size()) == r, "need r means");
        require(static_cast<int>(sigmas.size()) == r, "need r sigmas");
        for (double s : sigmas) require(s > 0.0, "all sigmas must be positive");
        for (const auto& mu : means)
            require(mu.size() == p, "mean dimension mismatch");
        for (int a = 0; a < r; ++a)
            for (int b = a + 1; b < r; ++b)
                require((means[a] - means[b]).norm() > 0.0,
                        "means must be pairwise distinct");
    }

    /// Squared distance between cluster centers.
    double d2(int k, int l) const { return (means[k] - means[l]).squaredNorm(); }
};

/// Centers of the form c*e_a with pairwise squared separation d2 (needs p >= r).
inline std::vector<Vector> sparse_means(int r, int p, double d2) {
    require(p >= r, "sparse means need p >= r");
    require(d2 > 0.0, "separation must be positive");
    double c = std::sqrt(d2 / 2.0);
    std::vector<Vector> means(r, Vector::Zero(p));
    for (int a = 0; a < r; ++a) means[a](a) = c;
    return means;
}

inline MixtureConfig make_config(int n, int m, int r, int p, double d2,
                                 double sigma, std::uint64_t seed) {
    MixtureConfig cfg;
    cfg.n = n;
    cfg.m = m;
    cfg.r = r;
    cfg.p = p;
    cfg.means = sparse_means(r, p, d2);
    cfg.sigmas.assign(r, sigma);
    cfg.seed = seed;
    return cfg;
}

struct MembershipMatrix {
    Matrix Z;  // n x r, one 1 per row

    static MembershipMatrix from_labels(const std::vector<int>& labels, int r) {
        MembershipMatrix mm;
        mm.Z = Matrix::Zero(static_cast<int>(labels.size()), r);
        for (int i = 0; i < static_cast<int>(labels.size()); ++i) {
            require(labels[i] >= 0 && labels[i] < r, "label out of range");
            mm.Z(i, labels[i]) = 1.0;
        }
        return mm;
    }
};

struct DataSet {
    Matrix Y;                  // n x p
    std::vector<int> labels;   // extended cluster index per point
    std::vector<int> inliers;
    std::vector<int> outliers;

    int n() const { return static_cast<int>(Y.rows()); }
    int p() const { return static_cast<int>(Y.cols()); }
};

/// Extended labels: outliers occupy the trailing m indices and are assigned
/// round-robin; inliers fill the remaining per-cluster quota (n/r each) in
/// contiguous blocks.
inline std::vector<int> extended_labels(const MixtureConfig& cfg) {
    int n_in = cfg.n - cfg.m;
    std::vector<int> quota(cfg.r, cfg.n / cfg.r);
    std::vector<int> labels(cfg.n, -1);
    for (int j = 0; j < cfg.m; ++j) {
        int k = j % cfg.r;
        labels[n_in + j] = k;
        quota[k] -= 1;
        require(quota[k] >= 0, "too many outliers for cluster quota");
    }
    int i = 0;
    for (int k = 0; k < cfg.r; ++k)
        for (int q = 0; q < quota[k]; ++q) labels[i++] = k;
    return labels;
}

/// Deterministic synthetic generator. Inliers: Y_i = mu_a + W_i/sqrt(p) with
/// W_i isotropic (Gaussian by default, bounded uniform optional). Outliers:
/// half wide Gaussian around the centroid of the means, half uniform on the
/// inflated bounding box of the means.
inline DataSet generate_mixture(const MixtureConfig& cfg) {
    cfg.validate();
    DataSet ds;
    ds.Y = Matrix::Zero(cfg.n, cfg.p);
    ds.labels = extended_labels(cfg);

    int n_in = cfg.n - cfg.m;
    for (int i = 0; i < n_in; ++i) ds.inliers.push_back(i);
    for (int i = n_in; i < cfg.n; ++i) ds.outliers.push_back(i);

    const double inv_sqrt_p = 1.0 / std::sqrt(static_cast<double>(cfg.p));

    Vector centroid = Vector::Zero(cfg.p);
    double max_norm = 0.0;
    Vector lo = cfg.means[0], hi = cfg.means[0];
    for (const auto& mu : cfg.means) {
        centroid += mu;
        max_norm = std::max(max_norm, mu.norm());
        lo = lo.cwiseMin(mu);
        hi = hi.cwiseMax(mu);
    }
    centroid /= cfg.r;
    const double tau = cfg.outlier_scale * max_norm;
    const Vector box_c = 0.5 * (lo + hi);
    const Vector box_w = cfg.box_inflation * 0.5 * (hi - lo);

    // uniform on [-sqrt(3), sqrt(3)] has unit variance
    const double u_half = std::sqrt(3.0);

    for (int i = 0; i < cfg.n; ++i) {
        SplitMix64 rng(SplitMix64::derive(cfg.seed, static_cast<std::uint64_t>(i)));
        if (i < n_in) {
            int a = ds.labels[i];
            double s = cfg.sigmas[a];
            for (int j = 0; j < cfg.p; ++j) {
                double w = (cfg.noise == NoiseKind::gaussian)
                               ? rng.next_gaussian()
                               : u_half * (2.0 * rng.next_double() - 1.0);
                ds.Y(i, j) = cfg.means[a](j) + s * w * inv_sqrt_p;
            }
        } else if ((i - n_in) < (cfg.m + 1) / 2) {
            // outlier noise scale is dimensionless, like sigma: the point's
            // deviation from the centroid has norm ~ tau = 3 max_k ||mu_k||
            for (int j = 0; j < cfg.p; ++j)
                ds.Y(i, j) = centroid(j) + tau * rng.next_gaussian() * inv_sqrt_p;
        } else {
            for (int j = 0; j < cfg.p; ++j)
                ds.Y(i, j) = box_c(j) + box_w(j) * (2.0 * rng.next_double() - 1.0);
        }
    }
    return ds;
}

/// X0 = Z Z^T, the ground-truth clustering matrix.
inline Matrix clustering_matrix(const MembershipMatrix& mm) {
    return mm.Z * mm.Z.transpose();
}

// ---------------------------------------------------------------------------
// serialization

inline void to_json(nlohmann::json& j, const MixtureConfig& c) {
    std::vector<std::vector<double>> means;
    for (const auto& mu : c.means)
        means.emplace_back(mu.data(), mu.data() + mu.size());
    j = nlohmann::json{{"n", c.n},
                       {"m", c.m},
                       {"r", c.r},
                       {"p", c.p},
                       {"means", means},
                       {"sigmas", c.sigmas},
                       {"outlier_scale", c.outlier_scale},
                       {"box_inflation", c.box_inflation},
                       {"noise", c.noise == NoiseKind::gaussian ? "gaussian" : "uniform"},
                       {"seed", c.seed}};
}

inline void from_json(const nlohmann::json& j, MixtureConfig& c) {
    j.at("n").get_to(c.n);
    j.at("m").get_to(c.m);
    j.at("r").get_to(c.r);
    j.at("p").get_to(c.p);
    c.means.clear();
    if (j.contains("d2")) {
        c.means = sparse_means(c.r, c.p, j.at("d2").get<double>());
    } else {
        for (const auto& row : j.at("means")) {
            auto v = row.get<std::vector<double>>();
            c.means.push_back(Eigen::Map<const Vector>(v.data(), v.size()));
        }
    }
    if (j.contains("sigmas"))
        j.at("sigmas").get_to(c.sigmas);
    else
        c.sigmas.assign(c.r, j.at("sigma").get<double>());
    c.outlier_scale = j.value("outlier_scale", 3.0);
    c.box_inflation = j.value("box_inflation", 1.5);
    c.noise = (j.value("noise", "gaussian") == std::string("uniform"))
                  ? NoiseKind::uniform
                  : NoiseKind::gaussian;
    c.seed = j.value("seed", std::uint64_t{0});
}

/// CSV export: one row per point, last two columns = label, is_outlier.
inline void write_dataset_csv(const DataSet& ds, std::ostream& os) {
    os.precision(17);
    for (int j = 0; j < ds.p(); ++j) os << "y" << j << ",";
    os << "label,is_outlier\n";
    std::vector<char> is_out(ds.n(), 0);
    for (int i : ds.outliers) is_out[i] = 1;
    for (int i = 0; i < ds.n(); ++i) {
        for (int j = 0; j < ds.p(); ++j) os << ds.Y(i, j) << ",";
        os << ds.labels[i] << "," << static_cast<int>(is_out[i]) << "\n";
    }
}

}  // namespace kclust
