#pragma once

#include <optional>
#include <string>

#include "kclust/common.hpp"
#include "kclust/kernel.hpp"
#include "kclust/kmeans.hpp"
#include "kclust/model.hpp"
#include "kclust/sdp.hpp"
#include "kclust/spectral.hpp"

namespace kclust {

enum class MethodKind { sdp, ksvd, kpca, spectral, kmeans_raw };

inline std::string method_name(MethodKind m) {
    switch (m) {
        case MethodKind::sdp: return "sdp";
        case MethodKind::ksvd: return "ksvd";
        case MethodKind::kpca: return "kpca";
        case MethodKind::spectral: return "spectral";
        case MethodKind::kmeans_raw: return "kmeans_raw";
    }
    return "unknown";
}

inline MethodKind method_from_name(const std::string& name) {
    if (name == "sdp") return MethodKind::sdp;
    if (name == "ksvd") return MethodKind::ksvd;
    if (name == "kpca") return MethodKind::kpca;
    if (name == "spectral") return MethodKind::spectral;
    if (name == "kmeans_raw") return MethodKind::kmeans_raw;
    throw InvalidArgument("unknown method: " + name);
}

struct Method {
    MethodKind kind = MethodKind::sdp;
    AdmmParams admm;
    int restarts = 10;
    bool extra_cluster = false;  // cluster with r+1 centroids (outlier regime)
};

struct PipelineResult {
    std::vector<int> labels;
    double eta = 0.0;
    std::optional<KernelMatrix> kernel;     // empirical K (absent for kmeans_raw)
    std::optional<SdpSolution> sdp;
    std::optional<EigenBasis> basis;        // rows fed to k-means
    KMeansResult km;
    bool converged = true;  // false iff the SDP hit max_iter
};

/// One end-to-end clustering run. eta <= 0 selects the median heuristic.
inline PipelineResult run_pipeline(const DataSet& data, const Method& method,
                                   double eta, int r, std::uint64_t seed) {
    require(r >= 2, "r must be >= 2");
    PipelineResult res;
    const int k = method.extra_cluster ? r + 1 : r;

    if (method.kind == MethodKind::kmeans_raw) {
        res.km = lloyd(data.Y, k, method.restarts, seed);
        res.labels = res.km.labels;
        return res;
    }

    res.eta = eta > 0.0 ? eta : median_heuristic_eta(data.Y);
    res.kernel = gaussian_kernel(data.Y, res.eta);

    switch (method.kind) {
        case MethodKind::sdp: {
            res.sdp = solve_sdp1(*res.kernel, r, method.admm);
            res.converged = res.sdp->converged;
            res.basis = top_eigenvectors(res.sdp->X_hat, r);
            break;
        }
        case MethodKind::ksvd:
            res.basis = top_eigenvectors(res.kernel->K, r);
            break;
        case MethodKind::kpca: {
            // centered kernel may be indefinite: use singular vectors
            KernelMatrix centered = center_kernel(*res.kernel);
            res.basis = top_singular_vectors(centered.K, r);
            break;
        }
        case MethodKind::spectral: {
            KernelMatrix lap = laplacian_normalize(*res.kernel);
            res.basis = top_eigenvectors(lap.K, r);
            break;
        }
        case MethodKind::kmeans_raw:
            break;  // handled above
    }

    res.km = lloyd(res.basis->U, k, method.restarts, seed);
    res.labels = res.km.labels;
    return res;
}

}  // namespace kclust
