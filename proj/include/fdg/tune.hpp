#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "fdg/dataset.hpp"
#include "fdg/edgeset.hpp"
#include "fdg/fudge.hpp"

namespace fdg {

struct RocPoint {
    double param = 0.0;  // swept penalty value
    double fpr = 0.0;
    double tpr = 0.0;
};

// Operating points of an edge estimator swept over a penalty grid.
struct RocCurve {
    std::vector<RocPoint> points;  // ordered as the swept grid
    int positives = 0;
    int negatives = 0;
};

// Chosen penalty with the per-candidate cross-validation scores.
struct LambdaTuneResult {
    double lambda = 0.0;
    std::vector<double> cv_scores;  // aligned with the candidate grid
};

// Chosen dimensions with scores for every evaluated (L, M) pair.
struct DimsTuneResult {
    int L = 0;
    int M = 0;
    struct Candidate {
        int L = 0;
        int M = 0;
        double score = 0.0;
    };
    std::vector<Candidate> candidates;
};

// Evaluates the estimator on every grid value; TPR = |found ∩ truth| / |truth|
// and FPR = |found \ truth| / (p(p-1)/2 - |truth|).
RocCurve roc_from_lambda_sweep(const std::function<EdgeSet(double)>& estimator,
                               const std::vector<double>& lambda_grid, const EdgeSet& truth,
                               int p);

// Trapezoid area over FPR-sorted points, deduplicated to the max TPR per FPR
// and padded with (0,0) and (1,1).
double auc(const RocCurve& roc);

// Selective cross-validation for the FuDGE penalty: the sparsity pattern is
// chosen on the full data; each fold then refits with the pattern pinned
// (zero-penalty solve with the prox masked to the pattern) and is scored by
// the unpenalized quadratic loss on the held-out score covariances. Ties go
// to the larger penalty.
LambdaTuneResult scv_select_lambda(const ScoreMatrix& scores_x, const ScoreMatrix& scores_y,
                                   const std::vector<double>& lambda_grid, int folds,
                                   std::uint64_t seed, const FudgeConfig& base = {},
                                   bool center = false);

// 5-fold style cross-validation of the basis size L and score dimension M.
// The score is the held-out reconstruction error of fitted curves from their
// leading-M FPCA scores; ties go to the smaller (L, M).
DimsTuneResult cv_select_dims(const RawDataset& raw_x, const RawDataset& raw_y,
                              const std::vector<int>& L_grid, const std::vector<int>& M_grid,
                              int folds, std::uint64_t seed,
                              BasisKind kind = BasisKind::OrthonormalBSpline, int degree = 3,
                              bool center = false);

// Pointwise baseline: at num_times equally spaced times the per-sample values
// (snapped to each curve's nearest observation) form p-vectors whose sample
// covariances feed the direct-difference solver with M = 1; an edge enters a
// lambda's final set when it appears at a majority of the time points.
// Returns one edge set per grid value.
std::vector<EdgeSet> multiple_baseline(const RawDataset& raw_x, const RawDataset& raw_y,
                                       int num_times, const std::vector<double>& lambda_grid,
                                       const FudgeConfig& base = {});

}  // namespace fdg
