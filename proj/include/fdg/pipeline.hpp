#pragma once

#include "fdg/fpca.hpp"

namespace fdg {

// Settings for the curve-fitting + FPCA + scoring stage.
struct AnalysisConfig {
    BasisKind kind = BasisKind::OrthonormalBSpline;
    int L = 15;
    int degree = 3;  // spline degree; ignored for Fourier
    int M = 5;
    bool center = false;
};

struct AnalysisResult {
    BasisPtr basis;
    FittedSample fitted_x;
    FittedSample fitted_y;
    std::vector<FpcaResult> fpca;  // per node, pooled kernel
    ScoreMatrix scores_x;
    ScoreMatrix scores_y;
    ScoreCovariance sx;
    ScoreCovariance sy;
};

// Fits both populations on one basis, runs pooled-kernel FPCA per node, and
// produces projection scores and their covariances.
AnalysisResult analyze_scores(const RawDataset& raw_x, const RawDataset& raw_y,
                              const AnalysisConfig& config);

}  // namespace fdg
