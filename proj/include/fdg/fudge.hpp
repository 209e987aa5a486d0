#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "fdg/edgeset.hpp"
#include "fdg/fpca.hpp"

namespace fdg {

// Settings for the proximal gradient solver.
struct FudgeConfig {
    double lambda = 0.0;             // group penalty weight, >= 0
    std::optional<double> step = {}; // step size; defaults to 1/(lmax(SX)*lmax(SY))
    int max_iters = 2000;
    double tol = 1e-8;               // relative objective-change tolerance
    double epsilon = 0.0;            // edge threshold
};

// Estimated difference of score precision matrices with M x M block structure.
struct DiffEstimate {
    int p = 0, M = 0;
    Eigen::MatrixXd delta;  // pM x pM
    int iterations = 0;
    double objective = 0.0;
    bool converged = false;
    std::vector<double> objective_trace;  // penalized objective after each iteration

    Eigen::Block<const Eigen::MatrixXd> block(int j, int l) const {
        return delta.block(j * M, l * M, M, M);
    }
    Eigen::MatrixXd block_norms() const;
};

// Quadratic loss tr[ SY Delta' SX Delta / 2 - Delta' (SY - SX) ], whose
// population stationary point is Theta^X - Theta^Y.
double fudge_loss(const Eigen::MatrixXd& delta, const ScoreCovariance& sx,
                  const ScoreCovariance& sy);

// Gradient SX Delta SY - (SY - SX).
Eigen::MatrixXd fudge_gradient(const Eigen::MatrixXd& delta, const ScoreCovariance& sx,
                               const ScoreCovariance& sy);

// Largest safe step 1/(lmax(SX) * lmax(SY)); the gradient map is Lipschitz
// with exactly that product as constant.
double default_step_size(const ScoreCovariance& sx, const ScoreCovariance& sy);

// Proximal map of the group penalty: each M x M block is scaled by
// ((|A_jl|_F - tau) / |A_jl|_F)_+; zero blocks stay zero.
Eigen::MatrixXd block_soft_threshold(const Eigen::MatrixXd& A, double tau, int M);

// Proximal gradient from Delta = 0 until the relative objective change drops
// below tol. Non-convergence returns the last iterate flagged, not an error.
// An optional p x p mask restricts the solution support: blocks where the
// mask is false are pinned at zero in every prox step.
DiffEstimate solve_fudge(const ScoreCovariance& sx, const ScoreCovariance& sy,
                         const FudgeConfig& config,
                         const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>* mask = nullptr);

// First-order optimality certificate: max over blocks of the subgradient
// residual. Zero at the exact optimum.
double kkt_residual(const DiffEstimate& est, const ScoreCovariance& sx, const ScoreCovariance& sy,
                    double lambda);

// Edge rule: {j, l} present when either the (j,l) or (l,j) block norm
// strictly exceeds epsilon.
EdgeSet threshold_edges(const DiffEstimate& est, double epsilon);

}  // namespace fdg
