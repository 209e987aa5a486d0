// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criterion 6 is expected to fail; see the companion INFO line it
// prints for the thresholded variant of the same pipeline.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "fdg/block.hpp"
#include "fdg/commands.hpp"
#include "fdg/io.hpp"
#include "fdg/jfgl.hpp"
#include "fdg/pipeline.hpp"
#include "fdg/sim.hpp"
#include "fdg/tune.hpp"
#include "oracles.hpp"

using namespace fdg;
using Eigen::MatrixXd;

namespace {

struct Criterion {
    int id;
    std::string name;
    std::function<bool(std::string&)> run;
};

ScoreCovariance cov(const MatrixXd& S, int p, int M) { return oracle::wrap_cov(S, p, M); }

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2e", v);
    return buf;
}

// --------------------------------------------------------------- criterion 1
bool solver_optimality(std::string& note) {
    fdg::Rng rng(1001);
    bool ok = true;
    double worst_kkt = 0.0, worst_gap = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        int p = 1 + rng.index(3);
        int M = 1 + rng.index(3);
        while (p * M > 6) (p > 1 ? p : M) -= 1;
        const int d = p * M;
        MatrixXd sx = oracle::random_pd(d, rng);
        MatrixXd sy = oracle::random_pd(d, rng);
        double lambda = rng.uniform(0.05, 0.6);

        FudgeConfig cfg;
        cfg.lambda = lambda;
        cfg.tol = 1e-14;
        cfg.max_iters = 200000;
        DiffEstimate est = solve_fudge(cov(sx, p, M), cov(sy, p, M), cfg);

        double kkt = kkt_residual(est, cov(sx, p, M), cov(sy, p, M), lambda);
        double oracle_obj = oracle::subgradient_oracle(sx, sy, lambda, p, M, 1000000);
        double gap = std::abs(est.objective - oracle_obj);
        worst_kkt = std::max(worst_kkt, kkt);
        worst_gap = std::max(worst_gap, gap);
        if (kkt >= 1e-5 || gap >= 1e-6) ok = false;
    }
    note = "worst kkt " + sci(worst_kkt) + ", worst objective gap " +
           sci(worst_gap);
    return ok;
}

// --------------------------------------------------------------- criterion 2
bool closed_form_limits(std::string& note) {
    fdg::Rng rng(1002);
    double worst_inv = 0.0;
    bool zero_ok = true;
    for (int trial = 0; trial < 20; ++trial) {
        int p = 2 + rng.index(2);
        int M = 1 + rng.index(2);
        const int d = p * M;
        MatrixXd sx = oracle::random_pd(d, rng);
        MatrixXd sy = oracle::random_pd(d, rng);

        FudgeConfig cfg;
        cfg.lambda = 0.0;
        cfg.tol = 1e-14;
        cfg.max_iters = 200000;
        DiffEstimate est = solve_fudge(cov(sx, p, M), cov(sy, p, M), cfg);
        MatrixXd target = sx.inverse() - sy.inverse();
        worst_inv = std::max(worst_inv, (est.delta - target).cwiseAbs().maxCoeff());
    }
    for (int trial = 0; trial < 20; ++trial) {
        int p = 2 + rng.index(2);
        int M = 1 + rng.index(2);
        const int d = p * M;
        MatrixXd sx = oracle::random_pd(d, rng);
        MatrixXd sy = oracle::random_pd(d, rng);
        double lmax = block_frobenius_norms(sy - sx, p, M).maxCoeff();
        FudgeConfig cfg;
        cfg.lambda = lmax * (1.0 + 1e-12) * rng.uniform(1.0, 3.0);
        DiffEstimate est = solve_fudge(cov(sx, p, M), cov(sy, p, M), cfg);
        if (est.delta.cwiseAbs().maxCoeff() != 0.0) zero_ok = false;
    }
    note = "worst inverse-difference error " + sci(worst_inv) +
           (zero_ok ? ", all dominated penalties exactly zero"
                    : ", a dominated penalty was nonzero");
    return worst_inv < 1e-6 && zero_ok;
}

// --------------------------------------------------------------- criterion 3
bool basis_span_invariance(std::string& note) {
    fdg::Rng rng(1003);
    double worst = 0.0;
    bool edges_ok = true;
    for (int trial = 0; trial < 20; ++trial) {
        int p = 2 + rng.index(3);
        int M = 1 + rng.index(2);
        while (p * M > 8) p -= 1;
        const int d = p * M;
        MatrixXd sx = oracle::random_pd(d, rng);
        MatrixXd sy = oracle::random_pd(d, rng);
        MatrixXd u = oracle::random_block_rotation(p, M, rng);

        FudgeConfig cfg;
        cfg.lambda = rng.uniform(0.05, 0.3);
        cfg.tol = 1e-14;
        cfg.max_iters = 200000;
        DiffEstimate base = solve_fudge(cov(sx, p, M), cov(sy, p, M), cfg);
        DiffEstimate rot = solve_fudge(cov(u * sx * u.transpose(), p, M),
                                       cov(u * sy * u.transpose(), p, M), cfg);
        worst = std::max(worst, (base.block_norms() - rot.block_norms()).cwiseAbs().maxCoeff());
        if (!(threshold_edges(base, 0.0) == threshold_edges(rot, 0.0))) edges_ok = false;
    }
    note = "worst block-norm drift " + sci(worst);
    return worst < 1e-6 && edges_ok;
}

// --------------------------------------------------------------- criterion 4
bool fpca_correctness(std::string& note) {
    fdg::Rng rng(1004);
    auto basis = make_fourier_basis(8, {0.0, 1.0});
    double worst_resid = 0.0, worst_trace = 0.0, worst_recon = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int L = 8;
        MatrixXd K = oracle::random_pd(L, rng, 0.0, 3.0);
        K = 0.5 * (K + K.transpose().eval());
        CovKernel kernel{0, basis, K};
        FpcaResult full = fpca_decompose(kernel, L);
        for (int k = 0; k < L; ++k)
            worst_resid = std::max(
                worst_resid,
                (K * full.eigvecs.col(k) - full.eigenvalues(k) * full.eigvecs.col(k)).norm());
        worst_trace = std::max(worst_trace, std::abs(full.eigenvalues.sum() - K.trace()));

        // Rank-r kernel: curves in its span reconstruct exactly from r scores.
        const int r = 1 + rng.index(4);
        MatrixXd phi = oracle::random_orthonormal(L, rng).leftCols(r);
        Eigen::VectorXd lam(r);
        for (int k = 0; k < r; ++k) lam(k) = rng.uniform(0.5, 2.0);
        MatrixXd Kr = phi * lam.asDiagonal() * phi.transpose();
        FpcaResult fp = fpca_decompose(CovKernel{0, basis, Kr}, r);
        Eigen::VectorXd w(r);
        for (int k = 0; k < r; ++k) w(k) = rng.normal();
        Eigen::VectorXd beta = phi * w;
        Eigen::VectorXd recon = fp.eigvecs * (fp.eigvecs.transpose() * beta);
        worst_recon = std::max(worst_recon, (recon - beta).cwiseAbs().maxCoeff());
    }
    note = "worst eigen-residual " + sci(worst_resid) + ", trace drift " +
           sci(worst_trace) + ", in-span reconstruction " + sci(worst_recon);
    return worst_resid < 1e-8 && worst_trace < 1e-10 && worst_recon < 1e-10;
}

// --------------------------------------------------------------- criterion 5
bool admm_prox_correctness(std::string& note) {
    fdg::Rng rng(1005);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int m = 1 + trial % 3;
        std::vector<MatrixXd> A = {oracle::random_matrix(m, m, rng),
                                   oracle::random_matrix(m, m, rng)};
        double a = rng.uniform(0.0, 1.0);
        double b = rng.uniform(0.0, 1.0);
        std::vector<MatrixXd> big(2, MatrixXd::Zero(2 * m, 2 * m));
        for (int q = 0; q < 2; ++q)
            big[static_cast<size_t>(q)].block(0, m, m, m) = A[static_cast<size_t>(q)];
        auto Z = prox_gfgl(big, a, b, 2, m);
        std::vector<MatrixXd> zblk = {Z[0].block(0, m, m, m), Z[1].block(0, m, m, m)};
        worst = std::max(worst, oracle::gfgl_block_residual(A, zblk, a, b));
    }
    for (int trial = 0; trial < 100; ++trial) {
        const int m = 1 + trial % 3;
        MatrixXd A1 = oracle::random_matrix(m, m, rng);
        MatrixXd A2 = oracle::random_matrix(m, m, rng);
        double a = rng.uniform(0.05, 1.0);
        double b = rng.uniform(0.05, 1.0);
        MatrixXd Z1, Z2;
        prox_ffgl_pair(A1, A2, a, b, {}, Z1, Z2);
        worst = std::max(worst, oracle::fused_pair_residual(A1, A2, Z1, Z2, a, b, false));
        prox_ffgl2_pair(A1, A2, a, b, {}, Z1, Z2);
        worst = std::max(worst, oracle::fused_pair_residual(A1, A2, Z1, Z2, a, b, true));
    }

    bool pd_ok = true;
    for (int trial = 0; trial < 50; ++trial) {
        MatrixXd s = oracle::random_matrix(5, 5, rng);
        s = 0.5 * (s + s.transpose().eval());
        MatrixXd z = oracle::random_matrix(5, 5, rng);
        z = 0.5 * (z + z.transpose().eval());
        MatrixXd theta = theta_update(s, rng.uniform(1.0, 100.0), z, MatrixXd::Zero(5, 5),
                                      rng.uniform(0.2, 3.0));
        Eigen::SelfAdjointEigenSolver<MatrixXd> eig(theta, Eigen::EigenvaluesOnly);
        if (!(eig.eigenvalues().minCoeff() > 0.0)) pd_ok = false;
    }

    double worst_inv = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        const int p = 3, M = 2, d = 6;
        JfglProblem prob;
        prob.S_list = {oracle::random_pd(d, rng), oracle::random_pd(d, rng)};
        prob.n_list = {60.0, 90.0};
        prob.p = p;
        prob.M = M;
        prob.penalty = trial % 2 == 0 ? JfglPenalty::FFGL : JfglPenalty::GFGL;
        prob.lambda1 = 0.0;
        prob.lambda2 = 0.0;
        auto est = solve_jfgl(prob);
        for (int q = 0; q < 2; ++q)
            worst_inv = std::max(worst_inv,
                                 (est[static_cast<size_t>(q)].theta -
                                  prob.S_list[static_cast<size_t>(q)].inverse())
                                     .cwiseAbs()
                                     .maxCoeff());
    }
    note = "worst prox residual " + sci(worst) + ", worst unpenalized-MLE error " +
           sci(worst_inv) + (pd_ok ? "" : ", a theta update was not PD");
    return worst < 1e-5 && pd_ok && worst_inv < 1e-4;
}

// --------------------------------------------------------------- criterion 6
bool end_to_end_recovery(std::string& note) {
    const int p = 7, m = 5, n = 1000, T = 200;
    PrecisionPair pair = gen_model2(p, m);
    int exact = 0, thresholded = 0;
    const int seeds = 10;
    for (int seed = 1; seed <= seeds; ++seed) {
        RawDataset dx = sample_functional_data(
            pair.omega_x, m, n, T, 0.5, derive_seed(60, {static_cast<std::uint64_t>(seed), 0}));
        RawDataset dy = sample_functional_data(
            pair.omega_y, m, n, T, 0.5, derive_seed(60, {static_cast<std::uint64_t>(seed), 1}));
        AnalysisConfig acfg;
        acfg.kind = BasisKind::OrthonormalBSpline;
        acfg.L = 15;
        acfg.degree = 3;
        acfg.M = 5;
        AnalysisResult ar = analyze_scores(dx, dy, acfg);
        double lmax = block_frobenius_norms(ar.sy.S - ar.sx.S, p, m).maxCoeff();

        bool hit = false, hit_thresh = false;
        for (int g = 0; g < 30; ++g) {
            double lam = std::exp(std::log(1e-3 * lmax) +
                                  (std::log(lmax) - std::log(1e-3 * lmax)) * g / 29.0);
            FudgeConfig cfg;
            cfg.lambda = lam;
            DiffEstimate est = solve_fudge(ar.sx, ar.sy, cfg);
            if (threshold_edges(est, 0.0) == pair.true_edges) hit = true;
            // Supplementary: the edge threshold at a scale-free level,
            // 40% of the largest block norm.
            double eps = 0.4 * est.block_norms().maxCoeff();
            if (eps > 0.0 && threshold_edges(est, eps) == pair.true_edges) hit_thresh = true;
        }
        if (hit) ++exact;
        if (hit_thresh) ++thresholded;
    }
    std::printf(
        "INFO  criterion 6 supplement: with the edge threshold set to 0.4 x max block\n"
        "      norm (same pipeline, same grid), exact recovery in %d/%d seeds\n",
        thresholded, seeds);
    note = "epsilon = 0 exact recovery in " + std::to_string(exact) + "/" +
           std::to_string(seeds) +
           " seeds (needs >= 9); this model violates the irrepresentability-type condition, so "
           "the unthresholded path provably carries two false edges even with population "
           "covariances (see README)";
    return exact >= 9;
}

// --------------------------------------------------------------- criterion 7
bool figure2_ordering(std::string& note) {
    const int p = 10, m = 5, n = 100, T = 200;
    const int reps = 5;
    double auc_fudge = 0.0, auc_multiple = 0.0;
    int rep_wins = 0;
    for (int rep = 1; rep <= reps; ++rep) {
        PrecisionPair pair = gen_model2(p, m);
        RawDataset dx = sample_functional_data(
            pair.omega_x, m, n, T, 0.5, derive_seed(70, {static_cast<std::uint64_t>(rep), 0}));
        RawDataset dy = sample_functional_data(
            pair.omega_y, m, n, T, 0.5, derive_seed(70, {static_cast<std::uint64_t>(rep), 1}));
        AnalysisConfig acfg;
        acfg.L = 15;
        acfg.degree = 3;
        acfg.M = 5;
        AnalysisResult ar = analyze_scores(dx, dy, acfg);
        double lmax = block_frobenius_norms(ar.sy.S - ar.sx.S, p, m).maxCoeff();
        std::vector<double> grid(30);
        for (int g = 0; g < 30; ++g)
            grid[static_cast<size_t>(g)] = std::exp(
                std::log(1e-3 * lmax) + (std::log(lmax) - std::log(1e-3 * lmax)) * g / 29.0);

        RocCurve rc_fudge = roc_from_lambda_sweep(
            [&](double lam) {
                FudgeConfig cfg;
                cfg.lambda = lam;
                return threshold_edges(solve_fudge(ar.sx, ar.sy, cfg), 0.0);
            },
            grid, pair.true_edges, p);
        auc_fudge += auc(rc_fudge);

        auto sets = multiple_baseline(dx, dy, 15, grid);
        size_t at = 0;
        RocCurve rc_mult =
            roc_from_lambda_sweep([&](double) { return sets[at++]; }, grid, pair.true_edges, p);
        auc_multiple += auc(rc_mult);
        if (auc(rc_fudge) > auc(rc_mult)) ++rep_wins;
    }
    auc_fudge /= reps;
    auc_multiple /= reps;
    note = "mean AUC fudge " + sci(auc_fudge) + " vs multiple " + sci(auc_multiple) +
           " (fudge ahead in " + std::to_string(rep_wins) + "/" + std::to_string(reps) +
           " replicates)";
    return auc_fudge > auc_multiple;
}

// --------------------------------------------------------------- criterion 8
bool published_constants(std::string& note) {
    bool ok = true;
    std::string why;

    {  // Model 2 block values.
        PrecisionPair pair = gen_model2(10, 5);
        MatrixXd eye = MatrixXd::Identity(5, 5);
        MatrixXd diag = block_view(pair.omega_x, 2, 2, 5);
        if ((diag - diag(0, 0) * eye).cwiseAbs().maxCoeff() != 0.0 || diag(0, 0) < 1.0)
            ok = false, why += " M2-diag";
        if ((block_view(pair.omega_x, 3, 4, 5) - 0.6 * eye).cwiseAbs().maxCoeff() != 0.0)
            ok = false, why += " M2-0.6";
        if ((block_view(pair.omega_x, 3, 5, 5) - 0.4 * eye).cwiseAbs().maxCoeff() != 0.0)
            ok = false, why += " M2-0.4";
        if ((block_view(pair.omega_y, 1, 4, 5) - MatrixXd::Constant(5, 5, 0.1))
                .cwiseAbs()
                .maxCoeff() != 0.0)
            ok = false, why += " M2-W";
    }
    {  // Model 3: edge probability, block value, s and c tables.
        int edges = 0;
        const int seeds = 5;
        for (int s = 1; s <= seeds; ++s) {
            PrecisionPair pair = gen_model3(30, 5, static_cast<std::uint64_t>(s));
            MatrixXd norms = block_frobenius_norms(pair.omega_x, 30, 5);
            for (int j = 0; j < 30; ++j)
                for (int l = j + 1; l < 30; ++l)
                    if (norms(j, l) > 0.0) ++edges;
        }
        // 5 x 435 pairs at rate 0.8; 4-sigma window.
        if (std::abs(edges - 1740) > 75) ok = false, why += " M3-prob";

        const int ss[4] = {3, 4, 5, 6};
        const double cs[4] = {2.0 / 5.0, 4.0 / 15.0, 1.0 / 5.0, 4.0 / 25.0};
        const int ps[4] = {30, 60, 90, 120};
        for (int k = 0; k < 4; ++k) {
            PrecisionPair pair = gen_model3(ps[k], 5, 7);
            if (pair.true_edges.size() != ss[k]) ok = false, why += " M3-s";
            auto [a, b] = pair.true_edges.edges.front();
            MatrixXd w = block_view(pair.omega_y, a, b, 5);
            if (w(0, 2) != cs[k] || w(0, 1) != 0.0 || w(1, 1) != 0.0) ok = false, why += " M3-c";
        }
        PrecisionPair pair = gen_model3(30, 5, 3);
        MatrixXd norms = block_frobenius_norms(pair.omega_x, 30, 5);
        bool found_block = false;
        for (int j = 0; j < 30 && !found_block; ++j)
            for (int l = j + 1; l < 30 && !found_block; ++l)
                if (norms(j, l) > 0.0 && !pair.true_edges.contains(j, l)) {
                    MatrixXd blk = block_view(pair.omega_x, j, l, 5);
                    if ((blk - 0.1 * MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() != 0.0)
                        ok = false, why += " M3-0.1";
                    found_block = true;
                }
    }
    {  // Model 1 edge count at two sizes.
        for (int p : {30, 60}) {
            PrecisionPair pair = gen_model1(p, 5, 21);
            MatrixXd norms = block_frobenius_norms(pair.omega_x, p, 5);
            int edges = 0;
            for (int j = 0; j < p; ++j)
                for (int l = j + 1; l < p; ++l)
                    if (norms(j, l) > 0.0) ++edges;
            int target = static_cast<int>(std::llround(p * (p - 1) / 10.0));
            if (edges != target) ok = false, why += " M1-count";
        }
    }
    {  // Simulation defaults.
        SimConfig cfg;
        if (cfg.noise_sd != 0.5 || cfg.T != 200 || cfg.n != 100 || cfg.m != 5)
            ok = false, why += " defaults";
    }
    note = ok ? "Model 1-3 constants and simulation defaults verified" : ("mismatch:" + why);
    return ok;
}

// --------------------------------------------------------------- criterion 9
bool curve_fit_oracle(std::string& note) {
    fdg::Rng rng(1009);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int L = 3 + rng.index(6);
        const int T = 3 * L + rng.index(40);
        auto basis = make_fourier_basis(L, {0.0, 1.0});
        std::vector<double> times, values;
        for (int k = 0; k < T; ++k) times.push_back(static_cast<double>(k) / (T - 1));
        for (int k = 0; k < T; ++k) values.push_back(rng.normal());

        Eigen::VectorXd fit = fit_curve(times, values, *basis);
        MatrixXd B = design_matrix(*basis, times);
        Eigen::Map<const Eigen::VectorXd> h(values.data(), T);
        Eigen::VectorXd beta = (B.transpose() * B).ldlt().solve(B.transpose() * h);
        worst = std::max(worst, (fit - beta).cwiseAbs().maxCoeff());
    }
    note = "worst coefficient difference " + sci(worst);
    return worst < 1e-10;
}

// -------------------------------------------------------------- criterion 10
bool determinism(std::string& note) {
    namespace fsys = std::filesystem;
    fsys::path base = fsys::temp_directory_path() / "fdg_acceptance_det";
    fsys::remove_all(base);
    fsys::create_directories(base);
    auto run_all = [&](const std::string& dir) {
        nlohmann::json sim = {{"model", "M2"}, {"p", 7},          {"m", 5},    {"n", 30},
                              {"T", 40},       {"seed", 42},      {"replicates", 2},
                              {"out_dir", dir}};
        cli::run_simulate(sim);
        nlohmann::json est = {{"x_csv", dir + "/x_r1.csv"},
                              {"y_csv", dir + "/y_r1.csv"},
                              {"L", 8},
                              {"M", 4},
                              {"method", "fudge"},
                              {"lambda", 0.3},
                              {"out_dir", dir + "/est"}};
        cli::run_estimate(est);
        nlohmann::json roc = {{"model", "M2"}, {"p", 7},    {"m", 5},
                              {"n", 20},       {"T", 30},   {"seed", 42},
                              {"replicates", 1}, {"L", 8},  {"M", 4},
                              {"lambda_grid", {{"count", 4}}}, {"out_dir", dir + "/roc"}};
        cli::run_roc(roc);
    };

    // Both executions write to the same path so every byte, including the
    // manifests, must coincide.
    const std::string work = (base / "work").string();
    run_all(work);
    fsys::rename(base / "work", base / "first");
    run_all(work);

    bool ok = true;
    std::string first_diff;
    for (const auto& entry : fsys::recursive_directory_iterator(base / "first")) {
        if (!entry.is_regular_file()) continue;
        fsys::path rel = fsys::relative(entry.path(), base / "first");
        std::string a = io::read_text_file(entry.path().string());
        std::string b = io::read_text_file((base / "work" / rel).string());
        if (a != b) {
            ok = false;
            if (first_diff.empty()) first_diff = rel.string();
        }
    }
    fsys::remove_all(base);
    note = ok ? "all output bytes identical across two executions"
              : ("first differing file: " + first_diff);
    return ok;
}

}  // namespace

int main() {
    std::vector<Criterion> criteria = {
        {1, "solver optimality vs 1e6-step subgradient oracle", solver_optimality},
        {2, "closed-form limits (zero penalty and dominated penalty)", closed_form_limits},
        {3, "basis-span invariance under block rotations", basis_span_invariance},
        {4, "FPCA eigen-residual, trace conservation, in-span reconstruction", fpca_correctness},
        {5, "ADMM prox subgradient optimality and unpenalized MLE", admm_prox_correctness},
        {6, "end-to-end Model 2 recovery (epsilon = 0)", end_to_end_recovery},
        {7, "desk-scale ROC ordering: FuDGE above the pointwise baseline", figure2_ordering},
        {8, "published simulation constants embedded correctly", published_constants},
        {9, "curve fits equal explicit normal-equations solutions", curve_fit_oracle},
        {10, "seeded pipeline runs are byte-identical", determinism},
    };

    int failed = 0;
    for (auto& c : criteria) {
        auto start = std::chrono::steady_clock::now();
        std::string note;
        bool ok = false;
        try {
            ok = c.run(note);
        } catch (const std::exception& e) {
            note = std::string("exception: ") + e.what();
        }
        double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s  criterion %2d: %s [%.1fs] — %s\n", ok ? "PASS" : "FAIL", c.id,
                    c.name.c_str(), secs, note.c_str());
        std::fflush(stdout);
        if (!ok) ++failed;
    }
    if (failed > 0) std::printf("%d criterion(s) failed\n", failed);
    return failed == 0 ? 0 : 1;
}
