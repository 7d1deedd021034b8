#include <catch2/catch_amalgamated.hpp>

#include "kclust/metrics.hpp"
#include "kclust/pipeline.hpp"

using namespace kclust;

TEST_CASE("sdp pipeline recovers well separated data exactly") {
    auto cfg = make_config(48, 0, 3, 30, 20.0, 0.2, 11);
    auto ds = generate_mixture(cfg);
    Method method;
    method.kind = MethodKind::sdp;
    auto res = run_pipeline(ds, method, 0.0, 3, 1);
    CHECK(inlier_accuracy(res.labels, ds.labels, ds.inliers, 3) == 1.0);
    CHECK(res.converged);
    REQUIRE(res.sdp.has_value());
    REQUIRE(res.basis.has_value());
}

TEST_CASE("ideal blockwise kernel gives exact recovery for spectral methods") {
    auto cfg = make_config(24, 0, 3, 6, 1.0, 0.5, 2);
    auto Kt = population_kernel(cfg, 1.0);
    auto labels = extended_labels(cfg);
    auto idx = std::vector<int>(24);
    std::iota(idx.begin(), idx.end(), 0);
    for (auto transform : {KernelKind::population, KernelKind::centered,
                           KernelKind::laplacian_normalized}) {
        KernelMatrix K = Kt;
        if (transform == KernelKind::centered) K = center_kernel(Kt);
        if (transform == KernelKind::laplacian_normalized)
            K = laplacian_normalize(Kt);
        auto basis = (transform == KernelKind::centered)
                         ? top_singular_vectors(K.K, 3)
                         : top_eigenvectors(K.K, 3);
        auto km = lloyd(basis.U, 3, 10, 5);
        CHECK(inlier_accuracy(km.labels, labels, idx, 3) == 1.0);
    }
}

TEST_CASE("every method is deterministic for a fixed seed") {
    auto cfg = make_config(24, 3, 3, 20, 4.0, 0.5, 9);
    auto ds = generate_mixture(cfg);
    for (MethodKind kind : {MethodKind::sdp, MethodKind::ksvd, MethodKind::kpca,
                            MethodKind::spectral, MethodKind::kmeans_raw}) {
        Method method;
        method.kind = kind;
        auto a = run_pipeline(ds, method, 0.0, 3, 13);
        auto b = run_pipeline(ds, method, 0.0, 3, 13);
        INFO(method_name(kind));
        CHECK(a.labels == b.labels);
    }
}

TEST_CASE("eta defaults to the median heuristic") {
    auto cfg = make_config(20, 0, 2, 10, 1.0, 0.5, 3);
    auto ds = generate_mixture(cfg);
    Method method;
    method.kind = MethodKind::ksvd;
    auto res = run_pipeline(ds, method, 0.0, 2, 1);
    CHECK(res.eta == Catch::Approx(median_heuristic_eta(ds.Y)));
    auto res2 = run_pipeline(ds, method, 2.5, 2, 1);
    CHECK(res2.eta == 2.5);
}

TEST_CASE("extra cluster flag yields r+1 centroids") {
    auto cfg = make_config(20, 4, 2, 10, 4.0, 0.5, 6);
    auto ds = generate_mixture(cfg);
    Method method;
    method.kind = MethodKind::ksvd;
    method.extra_cluster = true;
    auto res = run_pipeline(ds, method, 0.0, 2, 1);
    CHECK(res.km.centroids.rows() == 3);
}

TEST_CASE("sdp accuracy is no worse than ksvd at m = 0 on a small grid") {
    double sdp_acc = 0.0, ksvd_acc = 0.0;
    int runs = 0;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        for (double d2 : {2.0, 4.0}) {
            auto cfg = make_config(36, 0, 3, 40, d2, 0.5, seed);
            auto ds = generate_mixture(cfg);
            Method sdp_m, ksvd_m;
            sdp_m.kind = MethodKind::sdp;
            ksvd_m.kind = MethodKind::ksvd;
            auto rs = run_pipeline(ds, sdp_m, 0.0, 3, seed);
            auto rk = run_pipeline(ds, ksvd_m, 0.0, 3, seed);
            sdp_acc += inlier_accuracy(rs.labels, ds.labels, ds.inliers, 3);
            ksvd_acc += inlier_accuracy(rk.labels, ds.labels, ds.inliers, 3);
            runs += 1;
        }
    }
    CHECK(sdp_acc / runs >= ksvd_acc / runs - 0.02);
}

TEST_CASE("non-converged sdp still yields labels and is flagged") {
    auto cfg = make_config(20, 0, 2, 10, 2.0, 0.5, 4);
    auto ds = generate_mixture(cfg);
    Method method;
    method.kind = MethodKind::sdp;
    method.admm.max_iter = 2;
    auto res = run_pipeline(ds, method, 0.0, 2, 1);
    CHECK_FALSE(res.converged);
    CHECK(res.labels.size() == 20);
}
