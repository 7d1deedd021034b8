#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <set>
#include <utility>

#include "kclust/kernel.hpp"
#include "kclust/model.hpp"

using namespace kclust;

TEST_CASE("gaussian kernel pointwise values") {
    Matrix Y(3, 2);
    Y << 0, 0, 0, 0, 1, 0;  // rows 0 and 1 identical, row 2 at distance 1
    auto km = gaussian_kernel(Y, 1.0);
    CHECK(km.K(0, 1) == 1.0);
    CHECK(km.K(0, 2) == Catch::Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK(km.K.diagonal() == Vector::Ones(3));
    CHECK_THROWS_AS(gaussian_kernel(Y, 0.0), InvalidArgument);
    CHECK_THROWS_AS(gaussian_kernel(Y, -1.0), InvalidArgument);
}

TEST_CASE("gaussian kernel is symmetric with entries in (0,1]") {
    auto ds = generate_mixture(make_config(30, 3, 3, 20, 0.5, 1.0, 2));
    auto km = gaussian_kernel(ds.Y, 0.7);
    CHECK((km.K - km.K.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(km.K.minCoeff() > 0.0);
    CHECK(km.K.maxCoeff() <= 1.0);
    CHECK(km.K.diagonal() == Vector::Ones(30));
}

TEST_CASE("population kernel values and block structure") {
    auto cfg = make_config(20, 0, 2, 4, 1.0, 1.0, 1);
    auto km = population_kernel(cfg, 1.0);
    CHECK(km.K(0, 0) == 1.0);
    // same cluster, sigma = 1: f(2)
    CHECK(km.K(0, 1) == Catch::Approx(std::exp(-2.0)).epsilon(1e-12));
    // across clusters, d^2 = 1: f(3)
    CHECK(km.K(0, 10) == Catch::Approx(std::exp(-3.0)).epsilon(1e-12));
}

TEST_CASE("population kernel has at most r off-diagonal row patterns") {
    auto cfg = make_config(24, 4, 4, 8, 0.3, 1.0, 9);
    cfg.sigmas = {0.5, 1.0, 1.5, 2.0};
    auto km = population_kernel(cfg, 0.8);
    auto labels = extended_labels(cfg);
    // off-diagonal entries are a function of the label pair alone
    std::map<std::pair<int, int>, double> value;
    bool consistent = true;
    for (int i = 0; i < cfg.n && consistent; ++i)
        for (int j = 0; j < cfg.n; ++j) {
            if (i == j) continue;
            auto key = std::make_pair(labels[i], labels[j]);
            auto [it, inserted] = value.emplace(key, km.K(i, j));
            if (!inserted && it->second != km.K(i, j)) {
                consistent = false;
                break;
            }
        }
    CHECK(consistent);
    CHECK(value.size() <= 4 * 4);
}

TEST_CASE("centering the 2x2 identity") {
    KernelMatrix km;
    km.K = Matrix::Identity(2, 2);
    auto c = center_kernel(km);
    Matrix expected(2, 2);
    expected << 0.5, -0.5, -0.5, 0.5;
    CHECK((c.K - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("centering annihilates constants and is idempotent") {
    auto ds = generate_mixture(make_config(16, 0, 2, 8, 0.5, 1.0, 4));
    auto km = gaussian_kernel(ds.Y, 1.0);
    auto c = center_kernel(km);
    CHECK(c.K.rowwise().sum().cwiseAbs().maxCoeff() < 1e-9 * 16);
    CHECK(c.K.colwise().sum().cwiseAbs().maxCoeff() < 1e-9 * 16);
    auto cc = center_kernel(c);
    CHECK((cc.K - c.K).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("laplacian normalization") {
    KernelMatrix ones;
    ones.K = Matrix::Ones(2, 2);
    auto lap = laplacian_normalize(ones);
    CHECK((lap.K - Matrix::Constant(2, 2, 0.5)).cwiseAbs().maxCoeff() < 1e-14);

    KernelMatrix diag;
    diag.K = Vector::LinSpaced(4, 1.0, 4.0).asDiagonal();
    CHECK((laplacian_normalize(diag).K - Matrix::Identity(4, 4))
              .cwiseAbs()
              .maxCoeff() < 1e-14);

    KernelMatrix bad;
    bad.K = -Matrix::Ones(3, 3);
    CHECK_THROWS_AS(laplacian_normalize(bad), InvalidArgument);
}

TEST_CASE("normalized gaussian kernel has top eigenvalue 1 with D^{1/2}1") {
    auto ds = generate_mixture(make_config(20, 2, 2, 10, 0.5, 1.0, 6));
    auto km = gaussian_kernel(ds.Y, 0.5);
    auto lap = laplacian_normalize(km);
    Eigen::SelfAdjointEigenSolver<Matrix> es(lap.K);
    CHECK(es.eigenvalues().maxCoeff() == Catch::Approx(1.0).epsilon(1e-10));
    Vector v = km.K.rowwise().sum().cwiseSqrt().normalized();
    CHECK((lap.K * v - v).norm() < 1e-10);
}

TEST_CASE("separation stats match direct evaluation") {
    auto cfg = make_config(20, 0, 2, 4, 1.0, 1.0, 1);
    auto st = separation_stats(cfg, 1.0);
    CHECK(st.gamma(0, 1) ==
          Catch::Approx(std::exp(-2.0) - std::exp(-3.0)).epsilon(1e-9));
    CHECK(st.gamma_min == st.gamma(0, 1));
    CHECK(st.gamma == st.gamma.transpose());

    // equal geometry: all off-diagonal gammas equal
    auto cfg4 = make_config(40, 0, 4, 8, 0.3, 1.0, 1);
    auto st4 = separation_stats(cfg4, 0.9);
    for (int k = 0; k < 4; ++k)
        for (int l = 0; l < 4; ++l)
            if (k != l)
                CHECK(st4.gamma(k, l) == Catch::Approx(st4.gamma_min));

    // large separation: gamma -> f(2 sigma^2)
    auto far = make_config(20, 0, 2, 4, 1e6, 1.0, 1);
    auto st_far = separation_stats(far, 1.0);
    CHECK(st_far.gamma_min == Catch::Approx(std::exp(-2.0)).epsilon(1e-9));

    auto dup = make_config(20, 0, 2, 4, 1.0, 1.0, 1);
    dup.means[1] = dup.means[0];
    CHECK_THROWS_AS(separation_stats(dup, 1.0), InvalidArgument);
}

TEST_CASE("kernel multiplicativity over squared distances") {
    for (double eta : {0.3, 1.0, 2.5}) {
        for (double d2 : {0.1, 1.0, 4.0}) {
            double sk2 = 0.7, sl2 = 1.3;
            double lhs = std::exp(-eta * (d2 + sk2 + sl2));
            double rhs =
                std::exp(-eta * d2) * std::exp(-eta * sk2) * std::exp(-eta * sl2);
            CHECK(std::abs(lhs - rhs) < 1e-12);
        }
    }
}

TEST_CASE("eigengap lower bound holds for the population kernel") {
    for (double d2 : {0.5, 1.0, 2.0}) {
        for (int r : {2, 3}) {
            auto cfg = make_config(12 * r, 0, r, 8, d2, 0.4, 1);
            cfg.sigmas.assign(r, 0.4);
            double eta = 1.0;
            auto st = separation_stats(cfg, eta);
            auto km = population_kernel(cfg, eta);
            Eigen::SelfAdjointEigenSolver<Matrix> es(km.K, Eigen::EigenvaluesOnly);
            int n = cfg.n;
            double gap = es.eigenvalues()(n - r) - es.eigenvalues()(n - r - 1);
            if (st.eigengap_lower_bound > 0.0)
                CHECK(gap >= st.eigengap_lower_bound - 1e-9);
        }
    }
}

TEST_CASE("sup deviation basics") {
    auto cfg = make_config(16, 0, 2, 8, 0.5, 1.0, 3);
    auto ds = generate_mixture(cfg);
    auto K = gaussian_kernel(ds.Y, 1.0);
    auto Kt = population_kernel(cfg, 1.0);
    CHECK(sup_deviation(K, K, ds.inliers) == 0.0);
    double dev = sup_deviation(K, Kt, ds.inliers);
    CHECK(dev > 0.0);
    CHECK(dev <= 1.0);

    KernelMatrix small;
    small.K = Matrix::Ones(4, 4);
    CHECK_THROWS_AS(sup_deviation(K, small, ds.inliers), InvalidArgument);
}

TEST_CASE("sup deviation decreases with ambient dimension") {
    std::vector<double> medians;
    for (int p : {50, 200, 800}) {
        std::vector<double> devs;
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            auto cfg = make_config(60, 0, 2, p, 0.5, 1.0, seed);
            auto ds = generate_mixture(cfg);
            auto K = gaussian_kernel(ds.Y, 1.0);
            auto Kt = population_kernel(cfg, 1.0);
            devs.push_back(sup_deviation(K, Kt, ds.inliers));
        }
        std::sort(devs.begin(), devs.end());
        medians.push_back(devs[2]);
    }
    CHECK(medians[1] < medians[0]);
    CHECK(medians[2] < medians[1]);
}

TEST_CASE("median heuristic eta is positive and scale sensitive") {
    auto ds = generate_mixture(make_config(20, 0, 2, 10, 0.5, 1.0, 7));
    double eta = median_heuristic_eta(ds.Y);
    CHECK(eta > 0.0);
    double eta2 = median_heuristic_eta(2.0 * ds.Y);
    CHECK(eta2 == Catch::Approx(eta / 4.0).epsilon(1e-9));
}
