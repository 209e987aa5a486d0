#pragma once

#include <Eigen/Dense>
#include <vector>

#include "fdg/edgeset.hpp"
#include "fdg/fpca.hpp"

namespace fdg {

enum class JfglPenalty { GFGL, FFGL, FFGL2 };

// Inner ADMM settings for the fused off-diagonal block subproblems.
struct InnerAdmmConfig {
    double rho = 1.0;
    int max_iters = 500;
    double tol = 1e-8;
};

// A joint functional graphical lasso instance over Q groups.
struct JfglProblem {
    std::vector<Eigen::MatrixXd> S_list;  // Q score covariances, pM x pM
    std::vector<double> n_list;           // per-group sample sizes
    int p = 0;
    int M = 0;
    JfglPenalty penalty = JfglPenalty::GFGL;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double rho = 1.0;  // outer ADMM parameter
    InnerAdmmConfig inner;
    int max_iters = 1000;
    double tol = 1e-7;  // primal residual threshold
};

// One group's estimated score precision matrix.
struct PrecisionEstimate {
    int p = 0, M = 0;
    Eigen::MatrixXd theta;  // pM x pM, symmetric
    bool converged = false;
    int iterations = 0;
    double primal_residual = 0.0;  // max_q |Theta_q - Z_q|_F at termination

    Eigen::Block<const Eigen::MatrixXd> block(int j, int l) const {
        return theta.block(j * M, l * M, M, M);
    }
};

// Theta step of the outer ADMM: with VDV' the eigendecomposition of
// S - rho Z / n + rho U / n, returns V diag(n/(2 rho) (-d + sqrt(d^2 + 4 rho / n))) V'.
// Always symmetric positive definite.
Eigen::MatrixXd theta_update(const Eigen::MatrixXd& S, double n_q, const Eigen::MatrixXd& Z,
                             const Eigen::MatrixXd& U, double rho);

// Prox of the grouped penalty, thresholds a = lambda1/rho and b = lambda2/rho:
// diagonal blocks pass through; each off-diagonal block is shrunk by the group
// lasso factor and then by the across-group factor.
std::vector<Eigen::MatrixXd> prox_gfgl(const std::vector<Eigen::MatrixXd>& A_list, double a,
                                       double b, int p, int M);

// Prox of 1/2 sum_q |Z_q - A_q|^2 + a sum_q |Z_q|_F + b |Z1 - Z2|_F for one
// block pair. a = 0 (diagonal blocks) has the closed fused form; a > 0 runs
// the inner ADMM. Returns whether the inner loop converged.
bool prox_ffgl_pair(const Eigen::MatrixXd& A1, const Eigen::MatrixXd& A2, double a, double b,
                    const InnerAdmmConfig& cfg, Eigen::MatrixXd& Z1, Eigen::MatrixXd& Z2);

// Same with the elementwise fused term b * sum_ab |Z1_ab - Z2_ab|.
bool prox_ffgl2_pair(const Eigen::MatrixXd& A1, const Eigen::MatrixXd& A2, double a, double b,
                     const InnerAdmmConfig& cfg, Eigen::MatrixXd& Z1, Eigen::MatrixXd& Z2);

// Outer ADMM over (Theta, Z, U); the reported estimates are the symmetrized
// final Z iterates. Non-convergence is flagged, not thrown.
std::vector<PrecisionEstimate> solve_jfgl(const JfglProblem& problem);

// Differential edges from two precision estimates: {j, l} present when either
// the (j,l) or (l,j) block of Theta^X - Theta^Y has norm > epsilon.
EdgeSet jfgl_diff_edges(const PrecisionEstimate& theta_x, const PrecisionEstimate& theta_y,
                        double epsilon);

}  // namespace fdg
