#include "fdg/tune.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "fdg/block.hpp"
#include "fdg/curvefit.hpp"
#include "fdg/rng.hpp"

namespace fdg {

namespace {

constexpr double kTieRelTol = 1e-9;

bool better_score(double candidate, double best) {
    return candidate < best - kTieRelTol * std::max(1.0, std::abs(best));
}

bool tied_score(double candidate, double best) {
    return std::abs(candidate - best) <= kTieRelTol * std::max(1.0, std::abs(best));
}

// Shuffled fold assignment; fold f holds indices assign[i] == f.
std::vector<int> fold_assignment(int n, int folds, Rng& rng) {
    std::vector<int> idx(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) idx[static_cast<size_t>(i)] = i;
    rng.shuffle(idx);
    std::vector<int> assign(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) assign[static_cast<size_t>(idx[static_cast<size_t>(i)])] = i % folds;
    return assign;
}

void check_folds(int n_x, int n_y, int folds) {
    if (folds < 2) throw InvalidArgument("cross-validation requires at least 2 folds");
    if (n_x / folds < 2 || n_y / folds < 2)
        throw InvalidArgument("cross-validation requires at least 2 samples per fold");
}

ScoreCovariance covariance_of_rows(const ScoreMatrix& scores, const std::vector<int>& rows,
                                   bool center) {
    ScoreMatrix sub;
    sub.population = scores.population;
    sub.p = scores.p;
    sub.M = scores.M;
    sub.n = static_cast<int>(rows.size());
    sub.a.resize(sub.n, scores.a.cols());
    for (int r = 0; r < sub.n; ++r) sub.a.row(r) = scores.a.row(rows[static_cast<size_t>(r)]);
    return score_covariance(sub, center);
}

}  // namespace

RocCurve roc_from_lambda_sweep(const std::function<EdgeSet(double)>& estimator,
                               const std::vector<double>& lambda_grid, const EdgeSet& truth,
                               int p) {
    if (lambda_grid.empty()) throw InvalidArgument("ROC sweep requires a nonempty grid");
    if (truth.p != p) throw InvalidArgument("truth edge set is over a different p");
    if (truth.size() == 0) throw InvalidArgument("ROC is undefined for an empty truth edge set");

    const int total_pairs = p * (p - 1) / 2;
    RocCurve roc;
    roc.positives = truth.size();
    roc.negatives = total_pairs - truth.size();
    roc.points.reserve(lambda_grid.size());
    for (double lambda : lambda_grid) {
        EdgeSet found = estimator(lambda);
        int tp = 0, fp = 0;
        for (const auto& [j, l] : found.edges) {
            if (truth.contains(j, l))
                ++tp;
            else
                ++fp;
        }
        RocPoint pt;
        pt.param = lambda;
        pt.tpr = static_cast<double>(tp) / roc.positives;
        pt.fpr = roc.negatives > 0 ? static_cast<double>(fp) / roc.negatives : 0.0;
        roc.points.push_back(pt);
    }
    return roc;
}

double auc(const RocCurve& roc) {
    if (roc.points.size() < 2) throw InvalidArgument("AUC requires at least 2 ROC points");
    std::map<double, double> best_tpr;  // max TPR per unique FPR
    auto add = [&best_tpr](double fpr, double tpr) {
        auto [it, inserted] = best_tpr.emplace(fpr, tpr);
        if (!inserted) it->second = std::max(it->second, tpr);
    };
    add(0.0, 0.0);
    add(1.0, 1.0);
    for (const RocPoint& pt : roc.points) add(pt.fpr, pt.tpr);
    double area = 0.0;
    auto prev = best_tpr.begin();
    for (auto it = std::next(best_tpr.begin()); it != best_tpr.end(); ++it) {
        area += 0.5 * (it->first - prev->first) * (it->second + prev->second);
        prev = it;
    }
    return area;
}

LambdaTuneResult scv_select_lambda(const ScoreMatrix& scores_x, const ScoreMatrix& scores_y,
                                   const std::vector<double>& lambda_grid, int folds,
                                   std::uint64_t seed, const FudgeConfig& base, bool center) {
    if (lambda_grid.empty()) throw InvalidArgument("SCV requires a nonempty lambda grid");
    if (scores_x.p != scores_y.p || scores_x.M != scores_y.M)
        throw InvalidArgument("score matrices have mismatched dimensions");
    check_folds(scores_x.n, scores_y.n, folds);

    const int p = scores_x.p;
    Rng rng_x(derive_seed(seed, {0x5C, 0}));
    Rng rng_y(derive_seed(seed, {0x5C, 1}));
    std::vector<int> fold_x = fold_assignment(scores_x.n, folds, rng_x);
    std::vector<int> fold_y = fold_assignment(scores_y.n, folds, rng_y);

    ScoreCovariance full_x = score_covariance(scores_x, center);
    ScoreCovariance full_y = score_covariance(scores_y, center);

    LambdaTuneResult result;
    result.cv_scores.reserve(lambda_grid.size());
    bool have_best = false;
    double best_score = 0.0;

    for (double lambda : lambda_grid) {
        // Sparsity pattern chosen on the full data.
        FudgeConfig cfg = base;
        cfg.lambda = lambda;
        DiffEstimate full = solve_fudge(full_x, full_y, cfg);
        Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> pattern(p, p);
        for (int j = 0; j < p; ++j)
            for (int l = 0; l < p; ++l) pattern(j, l) = full.block(j, l).norm() > 0.0;

        double cv = 0.0;
        for (int f = 0; f < folds; ++f) {
            std::vector<int> train_x, test_x, train_y, test_y;
            for (int i = 0; i < scores_x.n; ++i)
                (fold_x[static_cast<size_t>(i)] == f ? test_x : train_x).push_back(i);
            for (int i = 0; i < scores_y.n; ++i)
                (fold_y[static_cast<size_t>(i)] == f ? test_y : train_y).push_back(i);

            ScoreCovariance sx_train = covariance_of_rows(scores_x, train_x, center);
            ScoreCovariance sy_train = covariance_of_rows(scores_y, train_y, center);
            ScoreCovariance sx_test = covariance_of_rows(scores_x, test_x, center);
            ScoreCovariance sy_test = covariance_of_rows(scores_y, test_y, center);

            // Restricted refit: zero penalty, support pinned to the pattern.
            FudgeConfig refit = base;
            refit.lambda = 0.0;
            DiffEstimate restricted = solve_fudge(sx_train, sy_train, refit, &pattern);
            cv += fudge_loss(restricted.delta, sx_test, sy_test);
        }
        cv /= folds;
        result.cv_scores.push_back(cv);

        if (!have_best || better_score(cv, best_score) ||
            (tied_score(cv, best_score) && lambda > result.lambda)) {
            have_best = true;
            best_score = cv;
            result.lambda = lambda;
        }
    }
    return result;
}

// Folds partition each curve's observation points (not the samples): curves
// are refitted from the training points, FPCA runs on those fits, and the
// M-term reconstruction is scored against the held-out raw values. Holding
// out points is what gives the score an interior minimum in both L and M;
// holding out samples cannot, because projections onto nested eigenspaces
// make the reconstruction error monotone in M.
DimsTuneResult cv_select_dims(const RawDataset& raw_x, const RawDataset& raw_y,
                              const std::vector<int>& L_grid, const std::vector<int>& M_grid,
                              int folds, std::uint64_t seed, BasisKind kind, int degree,
                              bool center) {
    if (L_grid.empty() || M_grid.empty()) throw InvalidArgument("dimension grids must be nonempty");
    if (folds < 2) throw InvalidArgument("cross-validation requires at least 2 folds");
    raw_x.validate();
    raw_y.validate();
    if (raw_x.p != raw_y.p) throw InvalidArgument("populations have different p");

    const int p = raw_x.p;

    // Per-curve point-fold assignment, seeded per (population, sample, node).
    auto point_folds = [&](const RawDataset& d, std::uint64_t pop) {
        std::vector<std::vector<int>> assign(d.curves.size());
        for (int i = 0; i < d.n; ++i) {
            for (int j = 0; j < p; ++j) {
                const ObservedCurve& c = d.at(i, j);
                Rng rng(derive_seed(seed, {0xD1, pop, static_cast<std::uint64_t>(i),
                                           static_cast<std::uint64_t>(j)}));
                std::vector<int> perm(static_cast<size_t>(c.count()));
                for (int k = 0; k < c.count(); ++k) perm[static_cast<size_t>(k)] = k;
                rng.shuffle(perm);
                std::vector<int>& a = assign[static_cast<size_t>(i) * p + j];
                a.resize(static_cast<size_t>(c.count()));
                for (int k = 0; k < c.count(); ++k)
                    a[static_cast<size_t>(perm[static_cast<size_t>(k)])] = k % folds;
            }
        }
        return assign;
    };
    std::vector<std::vector<int>> fold_x = point_folds(raw_x, 0);
    std::vector<std::vector<int>> fold_y = point_folds(raw_y, 1);

    DimsTuneResult result;
    bool have_best = false;
    double best_score = 0.0;

    for (int L : L_grid) {
        BasisPtr basis = kind == BasisKind::Fourier
                             ? make_fourier_basis(L, raw_x.domain)
                             : make_orthonormal_bspline_basis(L, degree, raw_x.domain);
        std::vector<int> feasible_M;
        for (int M : M_grid)
            if (M >= 1 && M <= L) feasible_M.push_back(M);
        if (feasible_M.empty()) continue;
        std::sort(feasible_M.begin(), feasible_M.end());  // partial sums below
        feasible_M.erase(std::unique(feasible_M.begin(), feasible_M.end()), feasible_M.end());
        const int m_max = feasible_M.back();

        std::map<int, double> score_by_m;
        for (int f = 0; f < folds; ++f) {
            // Refit every curve from its non-fold observations.
            auto refit = [&](const RawDataset& d, const std::vector<std::vector<int>>& assign) {
                FittedSample fs;
                fs.basis = basis;
                fs.p = p;
                fs.n = d.n;
                fs.node_coeffs.assign(static_cast<size_t>(p), Eigen::MatrixXd::Zero(L, d.n));
                for (int i = 0; i < d.n; ++i) {
                    for (int j = 0; j < p; ++j) {
                        const ObservedCurve& c = d.at(i, j);
                        const std::vector<int>& a = assign[static_cast<size_t>(i) * p + j];
                        std::vector<double> times, values;
                        for (int k = 0; k < c.count(); ++k) {
                            if (a[static_cast<size_t>(k)] == f) continue;
                            times.push_back(c.times[static_cast<size_t>(k)]);
                            values.push_back(c.values[static_cast<size_t>(k)]);
                        }
                        fs.node_coeffs[static_cast<size_t>(j)].col(i) =
                            fit_curve(times, values, *basis);
                    }
                }
                return fs;
            };
            FittedSample fit_x = refit(raw_x, fold_x);
            FittedSample fit_y = refit(raw_y, fold_y);

            for (int j = 0; j < p; ++j) {
                CovKernel kernel = estimate_cov_kernel(fit_x, fit_y, j, center);
                FpcaResult fp = fpca_decompose(kernel, m_max);
                // Score the M-term reconstruction against the held-out raw
                // values; nested eigvec prefixes give every M at once.
                auto accumulate = [&](const RawDataset& d, const FittedSample& fs,
                                      const std::vector<std::vector<int>>& assign) {
                    for (int i = 0; i < d.n; ++i) {
                        const ObservedCurve& c = d.at(i, j);
                        const std::vector<int>& a = assign[static_cast<size_t>(i) * p + j];
                        Eigen::VectorXd beta = fs.node_coeffs[static_cast<size_t>(j)].col(i);
                        Eigen::VectorXd scores = fp.eigvecs.transpose() * beta;
                        for (int k = 0; k < c.count(); ++k) {
                            if (a[static_cast<size_t>(k)] != f) continue;
                            Eigen::VectorXd bt = basis->eval(c.times[static_cast<size_t>(k)]);
                            Eigen::VectorXd phi_t = fp.eigvecs.transpose() * bt;
                            double partial = 0.0;
                            int mi = 0;
                            for (int M : feasible_M) {
                                for (; mi < M; ++mi) partial += scores(mi) * phi_t(mi);
                                double r = c.values[static_cast<size_t>(k)] - partial;
                                score_by_m[M] += r * r;
                            }
                        }
                    }
                };
                accumulate(raw_x, fit_x, fold_x);
                accumulate(raw_y, fit_y, fold_y);
            }
        }

        for (int M : feasible_M) {
            double score = score_by_m[M] / folds;
            result.candidates.push_back({L, M, score});
            bool wins = !have_best || better_score(score, best_score) ||
                        (tied_score(score, best_score) &&
                         std::make_pair(L, M) < std::make_pair(result.L, result.M));
            if (wins) {
                have_best = true;
                best_score = score;
                result.L = L;
                result.M = M;
            }
        }
    }
    if (!have_best) throw InvalidArgument("no feasible (L, M) pair in the grids");
    return result;
}

std::vector<EdgeSet> multiple_baseline(const RawDataset& raw_x, const RawDataset& raw_y,
                                       int num_times, const std::vector<double>& lambda_grid,
                                       const FudgeConfig& base) {
    if (num_times < 1) throw InvalidArgument("baseline requires at least one time point");
    if (lambda_grid.empty()) throw InvalidArgument("baseline requires a nonempty lambda grid");
    raw_x.validate();
    raw_y.validate();
    if (raw_x.p != raw_y.p) throw InvalidArgument("populations have different p");
    const int p = raw_x.p;

    for (const RawDataset* d : {&raw_x, &raw_y})
        for (const ObservedCurve& c : d->curves)
            if (c.count() < num_times)
                throw InvalidArgument("a curve has fewer observations than requested time points");

    const Domain& dom = raw_x.domain;
    std::vector<double> targets(static_cast<size_t>(num_times));
    if (num_times == 1) {
        targets[0] = 0.5 * (dom.lo + dom.hi);
    } else {
        for (int q = 0; q < num_times; ++q)
            targets[static_cast<size_t>(q)] = dom.lo + dom.length() * q / (num_times - 1);
    }

    auto snap = [](const ObservedCurve& c, double t) {
        auto it = std::lower_bound(c.times.begin(), c.times.end(), t);
        if (it == c.times.end()) return c.values.back();
        if (it == c.times.begin()) return c.values.front();
        auto before = std::prev(it);
        size_t idx = (t - *before <= *it - t) ? static_cast<size_t>(before - c.times.begin())
                                              : static_cast<size_t>(it - c.times.begin());
        return c.values[idx];
    };

    // Per time point: pointwise covariances and the per-lambda edge sets.
    std::vector<std::vector<EdgeSet>> votes(static_cast<size_t>(num_times));
    for (int q = 0; q < num_times; ++q) {
        Eigen::MatrixXd vx(raw_x.n, p), vy(raw_y.n, p);
        for (int i = 0; i < raw_x.n; ++i)
            for (int j = 0; j < p; ++j) vx(i, j) = snap(raw_x.at(i, j), targets[static_cast<size_t>(q)]);
        for (int i = 0; i < raw_y.n; ++i)
            for (int j = 0; j < p; ++j) vy(i, j) = snap(raw_y.at(i, j), targets[static_cast<size_t>(q)]);

        ScoreCovariance sx, sy;
        sx.population = Population::X;
        sy.population = Population::Y;
        sx.p = sy.p = p;
        sx.M = sy.M = 1;
        sx.S = vx.transpose() * vx / raw_x.n;
        sy.S = vy.transpose() * vy / raw_y.n;
        sx.S = 0.5 * (sx.S + sx.S.transpose().eval());
        sy.S = 0.5 * (sy.S + sy.S.transpose().eval());

        votes[static_cast<size_t>(q)].reserve(lambda_grid.size());
        for (double lambda : lambda_grid) {
            FudgeConfig cfg = base;
            cfg.lambda = lambda;
            DiffEstimate est = solve_fudge(sx, sy, cfg);
            votes[static_cast<size_t>(q)].push_back(threshold_edges(est, 0.0));
        }
    }

    const int needed = num_times / 2 + 1;  // strict majority
    std::vector<EdgeSet> out;
    out.reserve(lambda_grid.size());
    for (size_t g = 0; g < lambda_grid.size(); ++g) {
        std::vector<std::pair<int, int>> pairs;
        for (int j = 0; j < p; ++j) {
            for (int l = j + 1; l < p; ++l) {
                int count = 0;
                for (int q = 0; q < num_times; ++q)
                    if (votes[static_cast<size_t>(q)][g].contains(j, l)) ++count;
                if (count >= needed) pairs.emplace_back(j, l);
            }
        }
        out.push_back(EdgeSet::from_pairs(p, std::move(pairs)));
    }
    return out;
}

}  // namespace fdg
