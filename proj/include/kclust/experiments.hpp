#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "kclust/common.hpp"
#include "kclust/metrics.hpp"
#include "kclust/pipeline.hpp"

namespace kclust {

enum class Panel { clusters, outliers, separation, custom };

inline std::string panel_name(Panel p) {
    switch (p) {
        case Panel::clusters: return "clusters";
        case Panel::outliers: return "outliers";
        case Panel::separation: return "separation";
        case Panel::custom: return "custom";
    }
    return "custom";
}

/// Scalar mixture template: enough to rebuild a MixtureConfig at any sweep
/// point (means are the sparse c*e_a construction).
struct ConfigTemplate {
    int n = 200;
    int m = 0;
    int r = 2;
    int p = 200;
    double d2 = 0.5;
    double sigma = 1.0;
    double outlier_scale = 3.0;
    NoiseKind noise = NoiseKind::gaussian;

    MixtureConfig build(std::uint64_t seed) const {
        MixtureConfig cfg = make_config(n, m, r, p, d2, sigma, seed);
        cfg.outlier_scale = outlier_scale;
        cfg.noise = noise;
        return cfg;
    }
};

struct ExperimentSpec {
    Panel panel = Panel::custom;
    std::string sweep_field;  // derived from panel unless custom
    std::vector<double> sweep_values;
    ConfigTemplate fixed;
    double eta = 0.0;  // <= 0: median heuristic
    std::vector<MethodKind> methods{MethodKind::sdp, MethodKind::ksvd};
    int replicates = 10;
    std::uint64_t seed_base = 0;
    int restarts = 10;
    bool extra_cluster = false;
    AdmmParams admm;

    void validate() const {
        require(!sweep_values.empty(), "sweep_values must be nonempty");
        require(replicates >= 1, "replicates must be >= 1");
        require(!methods.empty(), "methods must be nonempty");
    }

    ConfigTemplate at(double value) const {
        ConfigTemplate t = fixed;
        if (sweep_field == "n") t.n = static_cast<int>(value);
        else if (sweep_field == "m") t.m = static_cast<int>(value);
        else if (sweep_field == "r") t.r = static_cast<int>(value);
        else if (sweep_field == "p") t.p = static_cast<int>(value);
        else if (sweep_field == "d2") t.d2 = value;
        else if (sweep_field == "sigma") t.sigma = value;
        else throw InvalidArgument("unknown sweep field: " + sweep_field);
        return t;
    }
};

struct SweepRow {
    std::string panel, method;
    int n = 0, m = 0, r = 0, p = 0;
    double d2 = 0.0, sigma = 0.0, eta = 0.0;
    std::uint64_t seed = 0;
    int replicate = 0;
    double inlier_accuracy = 0.0;
    double l1_error = 0.0;
    int misclustered = -1;       // -1: not defined for this method
    int inlier_clusters = 0;
    int sdp_iterations = 0;
    double runtime_ms = 0.0;
    std::string error;
};

inline const char* sweep_csv_header() {
    return "panel,method,n,m,r,p,d2,sigma,eta,seed,replicate,inlier_accuracy,"
           "l1_error,misclustered,inlier_clusters,sdp_iterations,runtime_ms,error";
}

inline void write_row(std::ostream& os, const SweepRow& w) {
    os.precision(17);
    os << w.panel << "," << w.method << "," << w.n << "," << w.m << "," << w.r
       << "," << w.p << "," << w.d2 << "," << w.sigma << "," << w.eta << ","
       << w.seed << "," << w.replicate << "," << w.inlier_accuracy << ","
       << w.l1_error << "," << w.misclustered << "," << w.inlier_clusters << ","
       << w.sdp_iterations << "," << w.runtime_ms << "," << w.error << "\n";
}

namespace detail {

inline void run_parallel(int threads, int n_tasks,
                         const std::function<void(int)>& task) {
    if (threads <= 1) {
        for (int i = 0; i < n_tasks; ++i) task(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n_tasks; i = next.fetch_add(1))
                task(i);
        });
    for (auto& th : pool) th.join();
}

}  // namespace detail

/// One (config, replicate, method) run; fills a CSV row. The misclustered
/// column follows the centroid-deviation definition and is reported for the
/// sdp and ksvd pipelines, whose population references are X0 and Ktilde.
inline SweepRow run_single(const ConfigTemplate& tpl, MethodKind kind,
                           const ExperimentSpec& spec, double sweep_value,
                           int replicate, std::uint64_t seed) {
    SweepRow row;
    row.panel = panel_name(spec.panel);
    row.method = method_name(kind);
    row.n = tpl.n;
    row.m = tpl.m;
    row.r = tpl.r;
    row.p = tpl.p;
    row.d2 = tpl.d2;
    row.sigma = tpl.sigma;
    row.seed = seed;
    row.replicate = replicate;
    (void)sweep_value;

    auto t0 = std::chrono::steady_clock::now();
    try {
        MixtureConfig cfg = tpl.build(seed);
        DataSet data = generate_mixture(cfg);
        Method method;
        method.kind = kind;
        method.restarts = spec.restarts;
        method.extra_cluster = spec.extra_cluster;
        method.admm = spec.admm;
        PipelineResult res =
            run_pipeline(data, method, spec.eta, cfg.r, SplitMix64::derive(seed, 7));

        row.eta = res.eta;
        row.inlier_accuracy =
            inlier_accuracy(res.labels, data.labels, data.inliers, cfg.r);
        row.inlier_clusters = inlier_cluster_count(res.labels, data.inliers);

        auto Z = MembershipMatrix::from_labels(data.labels, cfg.r);
        Matrix X0 = clustering_matrix(Z);
        if (res.sdp) {
            row.l1_error = l1_distance(X0, res.sdp->X_hat);
            row.sdp_iterations = res.sdp->iterations;
            EigenBasis U = top_eigenvectors(X0, cfg.r);
            Rotation rot = procrustes_align(*res.basis, U);
            Matrix nu = population_centroids(U, data.labels, cfg.r);
            row.misclustered =
                static_cast<int>(misclustered_set(res.km, Z, nu, rot).size());
        } else if (kind == MethodKind::ksvd) {
            double eta = res.eta;
            KernelMatrix Ktilde = population_kernel(cfg, eta);
            EigenBasis U = top_eigenvectors(Ktilde.K, cfg.r);
            Rotation rot = procrustes_align(*res.basis, U);
            Matrix nu = population_centroids(U, data.labels, cfg.r);
            row.misclustered =
                static_cast<int>(misclustered_set(res.km, Z, nu, rot).size());
        }
    } catch (const std::exception& e) {
        std::string msg = e.what();
        for (auto& ch : msg)
            if (ch == ',' || ch == '\n') ch = ';';
        row.error = msg;
    }
    row.runtime_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - t0)
                         .count();
    return row;
}

/// Full sweep: one row per (sweep value, replicate, method), buffered and
/// emitted in deterministic order regardless of thread scheduling.
inline std::vector<SweepRow> run_sweep(const ExperimentSpec& spec,
                                       int threads = 1) {
    spec.validate();
    const int s = static_cast<int>(spec.sweep_values.size());
    const int per_point = spec.replicates * static_cast<int>(spec.methods.size());
    std::vector<SweepRow> rows(static_cast<std::size_t>(s) * per_point);
    detail::run_parallel(threads, s * per_point, [&](int idx) {
        int si = idx / per_point;
        int rem = idx % per_point;
        int rep = rem / static_cast<int>(spec.methods.size());
        MethodKind kind = spec.methods[rem % spec.methods.size()];
        ConfigTemplate tpl = spec.at(spec.sweep_values[si]);
        std::uint64_t seed = SplitMix64::derive(
            SplitMix64::derive(spec.seed_base, static_cast<std::uint64_t>(si)),
            static_cast<std::uint64_t>(rep));
        rows[idx] =
            run_single(tpl, kind, spec, spec.sweep_values[si], rep, seed);
    });
    return rows;
}

struct AggregateRow {
    std::string panel, method;
    double sweep_value = 0.0;
    int runs = 0;
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0;
};

inline double sweep_value_of(const ExperimentSpec& spec, const SweepRow& w) {
    if (spec.sweep_field == "n") return w.n;
    if (spec.sweep_field == "m") return w.m;
    if (spec.sweep_field == "r") return w.r;
    if (spec.sweep_field == "p") return w.p;
    if (spec.sweep_field == "d2") return w.d2;
    if (spec.sweep_field == "sigma") return w.sigma;
    throw InvalidArgument("unknown sweep field: " + spec.sweep_field);
}

/// Mean and sample standard deviation of inlier accuracy per
/// (sweep value, method); error rows are excluded.
inline std::vector<AggregateRow> aggregate(const ExperimentSpec& spec,
                                           const std::vector<SweepRow>& rows) {
    std::vector<AggregateRow> out;
    for (std::size_t si = 0; si < spec.sweep_values.size(); ++si) {
        for (MethodKind kind : spec.methods) {
            AggregateRow agg;
            agg.panel = panel_name(spec.panel);
            agg.method = method_name(kind);
            agg.sweep_value = spec.sweep_values[si];
            std::vector<double> acc;
            for (const auto& w : rows)
                if (w.method == agg.method && w.error.empty() &&
                    sweep_value_of(spec, w) == agg.sweep_value)
                    acc.push_back(w.inlier_accuracy);
            agg.runs = static_cast<int>(acc.size());
            if (!acc.empty()) {
                double sum = 0.0;
                for (double a : acc) sum += a;
                agg.mean_accuracy = sum / acc.size();
                double ss = 0.0;
                for (double a : acc) {
                    double d = a - agg.mean_accuracy;
                    ss += d * d;
                }
                agg.std_accuracy =
                    acc.size() > 1 ? std::sqrt(ss / (acc.size() - 1)) : 0.0;
            }
            out.push_back(agg);
        }
    }
    return out;
}

inline void write_sweep_csv(const std::vector<SweepRow>& rows,
                            std::ostream& os) {
    os << sweep_csv_header() << "\n";
    for (const auto& w : rows) write_row(os, w);
}

inline void write_aggregate_csv(const std::vector<AggregateRow>& rows,
                                std::ostream& os) {
    os.precision(17);
    os << "panel,method,sweep_value,runs,mean_accuracy,std_accuracy\n";
    for (const auto& a : rows)
        os << a.panel << "," << a.method << "," << a.sweep_value << "," << a.runs
           << "," << a.mean_accuracy << "," << a.std_accuracy << "\n";
}

// ---------------------------------------------------------------------------
// theory diagnostics

struct DiagRow {
    int n = 0, m = 0, r = 0, p = 0;
    double d2 = 0.0, sigma = 0.0, eta = 0.0;
    std::uint64_t seed = 0;
    double sup_deviation = 0.0;
    double eigengap_actual = 0.0;
    double eigengap_bound = 0.0;
    bool eigengap_pass = true;
    double l1_lhs = 0.0, l1_rhs = 0.0;
    bool l1_applicable = true, l1_pass = true;
    double mis_lhs = 0.0, mis_rhs = 0.0;
    bool mis_pass = true;
    double dk_lhs = 0.0, dk_rhs = 0.0;
    bool dk_pass = true;
    std::string error;

    bool all_pass() const {
        return error.empty() && eigengap_pass && (!l1_applicable || l1_pass) &&
               mis_pass && dk_pass;
    }
};

/// One diagnostic run: generate data, solve the SDP, evaluate the
/// concentration, eigengap, l1, misclustering and Davis-Kahan inequalities.
inline DiagRow run_diagnostic(const ConfigTemplate& tpl, double eta_in,
                              std::uint64_t seed, const AdmmParams& admm = {}) {
    DiagRow d;
    d.n = tpl.n;
    d.m = tpl.m;
    d.r = tpl.r;
    d.p = tpl.p;
    d.d2 = tpl.d2;
    d.sigma = tpl.sigma;
    d.seed = seed;
    try {
        MixtureConfig cfg = tpl.build(seed);
        DataSet data = generate_mixture(cfg);
        double eta = eta_in > 0.0 ? eta_in : median_heuristic_eta(data.Y);
        d.eta = eta;

        RunArtifacts a;
        a.K = gaussian_kernel(data.Y, eta);
        a.Ktilde = population_kernel(cfg, eta);
        a.Z = MembershipMatrix::from_labels(data.labels, cfg.r);
        a.X0 = clustering_matrix(a.Z);
        a.m = cfg.m;
        a.n = cfg.n;
        a.r = cfg.r;

        d.sup_deviation = sup_deviation(a.K, a.Ktilde, data.inliers);

        SeparationStats st = separation_stats(cfg, eta);
        a.gamma_min = st.gamma_min;
        Eigen::SelfAdjointEigenSolver<Matrix> es(a.Ktilde.K, Eigen::EigenvaluesOnly);
        int n = cfg.n;
        d.eigengap_actual =
            es.eigenvalues()(n - cfg.r) - es.eigenvalues()(n - cfg.r - 1);
        d.eigengap_bound = st.eigengap_lower_bound;
        d.eigengap_pass = d.eigengap_bound <= 0.0 ||
                          d.eigengap_actual >= d.eigengap_bound - 1e-9;

        SdpSolution sol = solve_sdp1(a.K, cfg.r, admm);
        a.X_hat = sol.X_hat;
        a.U_hat = top_eigenvectors(a.X_hat, cfg.r);
        a.U = top_eigenvectors(a.X0, cfg.r);
        a.rot = procrustes_align(a.U_hat, a.U);
        a.km = lloyd(a.U_hat.U, cfg.r, 10, SplitMix64::derive(seed, 7));

        auto checks = check_consistency_bounds(a);
        for (const auto& c : checks) {
            if (c.name == "l1_deviation") {
                d.l1_applicable = c.applicable;
                d.l1_lhs = c.lhs;
                d.l1_rhs = c.rhs;
                d.l1_pass = !c.applicable || c.pass;
            } else if (c.name == "misclustered_cardinality") {
                d.mis_lhs = c.lhs;
                d.mis_rhs = c.rhs;
                d.mis_pass = c.pass;
            } else if (c.name == "eigenvector_fro") {
                d.dk_lhs = c.lhs;
                d.dk_rhs = c.rhs;
                d.dk_pass = c.pass;
            }
        }
    } catch (const std::exception& e) {
        std::string msg = e.what();
        for (auto& ch : msg)
            if (ch == ',' || ch == '\n') ch = ';';
        d.error = msg;
    }
    return d;
}

inline std::vector<DiagRow> run_diagnostics(
    const std::vector<ConfigTemplate>& grid, double eta, std::uint64_t seed_base,
    int threads = 1, const AdmmParams& admm = {}) {
    std::vector<DiagRow> rows(grid.size());
    detail::run_parallel(threads, static_cast<int>(grid.size()), [&](int i) {
        rows[i] = run_diagnostic(grid[i], eta,
                                 SplitMix64::derive(seed_base,
                                                    static_cast<std::uint64_t>(i)),
                                 admm);
    });
    return rows;
}

inline void write_diagnostics_csv(const std::vector<DiagRow>& rows,
                                  std::ostream& os) {
    os.precision(17);
    os << "n,m,r,p,d2,sigma,eta,seed,sup_deviation,eigengap_actual,"
          "eigengap_bound,eigengap_pass,l1_lhs,l1_rhs,l1_applicable,l1_pass,"
          "mis_lhs,mis_rhs,mis_pass,dk_lhs,dk_rhs,dk_pass,error\n";
    for (const auto& d : rows) {
        os << d.n << "," << d.m << "," << d.r << "," << d.p << "," << d.d2 << ","
           << d.sigma << "," << d.eta << "," << d.seed << "," << d.sup_deviation
           << "," << d.eigengap_actual << "," << d.eigengap_bound << ","
           << d.eigengap_pass << "," << d.l1_lhs << "," << d.l1_rhs << ","
           << d.l1_applicable << "," << d.l1_pass << "," << d.mis_lhs << ","
           << d.mis_rhs << "," << d.mis_pass << "," << d.dk_lhs << ","
           << d.dk_rhs << "," << d.dk_pass << "," << d.error << "\n";
    }
}

// ---------------------------------------------------------------------------
// JSON bindings

inline void from_json(const nlohmann::json& j, ConfigTemplate& t) {
    t.n = j.value("n", 200);
    t.m = j.value("m", 0);
    t.r = j.value("r", 2);
    t.p = j.value("p", 200);
    t.d2 = j.value("d2", 0.5);
    t.sigma = j.value("sigma", 1.0);
    t.outlier_scale = j.value("outlier_scale", 3.0);
    t.noise = (j.value("noise", "gaussian") == std::string("uniform"))
                  ? NoiseKind::uniform
                  : NoiseKind::gaussian;
}

inline void from_json(const nlohmann::json& j, ExperimentSpec& s) {
    std::string panel = j.value("panel", "custom");
    if (panel == "clusters") {
        s.panel = Panel::clusters;
        s.sweep_field = "r";
    } else if (panel == "outliers") {
        s.panel = Panel::outliers;
        s.sweep_field = "m";
    } else if (panel == "separation") {
        s.panel = Panel::separation;
        s.sweep_field = "d2";
    } else {
        s.panel = Panel::custom;
        s.sweep_field = j.at("sweep_field").get<std::string>();
    }
    j.at("sweep_values").get_to(s.sweep_values);
    if (j.contains("fixed")) j.at("fixed").get_to(s.fixed);
    s.eta = j.value("eta", 0.0);
    if (j.contains("methods")) {
        s.methods.clear();
        for (const auto& name : j.at("methods"))
            s.methods.push_back(method_from_name(name.get<std::string>()));
    }
    s.replicates = j.value("replicates", 10);
    s.seed_base = j.value("seed_base", std::uint64_t{0});
    s.restarts = j.value("restarts", 10);
    s.extra_cluster = j.value("extra_cluster", false);
    if (j.contains("admm")) {
        const auto& ja = j.at("admm");
        s.admm.penalty = ja.value("penalty", 0.0);
        s.admm.max_iter = ja.value("max_iter", 5000);
        s.admm.tol_primal = ja.value("tol_primal", 1e-5);
        s.admm.tol_dual = ja.value("tol_dual", 1e-5);
    }
}

}  // namespace kclust
