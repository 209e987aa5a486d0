#pragma once

#include <Eigen/Dense>
#include <vector>

#include "fdg/curvefit.hpp"

namespace fdg {

// Pooled covariance kernel of one node in coefficient space:
// K_jj(s, t) = sum_{a,b} K(a, b) b_a(s) b_b(t).
struct CovKernel {
    int node = 0;
    BasisPtr basis;
    Eigen::MatrixXd K;  // L x L, symmetric PSD
};

// Top-M eigenpairs of a node's pooled kernel. Eigenfunction k is stored as
// the coefficient column eigvecs.col(k); the columns are orthonormal.
struct FpcaResult {
    int node = 0;
    BasisPtr basis;
    Eigen::VectorXd eigenvalues;  // nonincreasing, >= 0
    Eigen::MatrixXd eigvecs;      // L x M

    FunctionRep eigenfunction(int k) const { return {basis, eigvecs.col(k)}; }
};

enum class Population : char { X = 'X', Y = 'Y' };

// Projection scores a(i, j*M + k) = <curve_ij, phi_jk>.
struct ScoreMatrix {
    Population population = Population::X;
    int n = 0, p = 0, M = 0;
    Eigen::MatrixXd a;  // n x pM

    double at(int i, int j, int k) const { return a(i, j * M + k); }
};

// Sample covariance of the stacked score vectors, S = (1/n) sum a_i a_i^T.
struct ScoreCovariance {
    Population population = Population::X;
    int p = 0, M = 0;
    Eigen::MatrixXd S;  // pM x pM, symmetric PSD

    Eigen::Block<const Eigen::MatrixXd> block(int j, int l) const {
        return S.block(j * M, l * M, M, M);
    }
};

// Pooled kernel estimate K_jj = K^X_jj + K^Y_jj, each population's term being
// the uncentered average of coefficient outer products. With center = true the
// per-node mean coefficient vector is removed first (for data whose mean is
// not known to be zero).
CovKernel estimate_cov_kernel(const FittedSample& fitted_x, const FittedSample& fitted_y, int node,
                              bool center = false);

// Top-M eigendecomposition of the kernel's coefficient matrix. Orthonormality
// of the basis makes the integral eigenproblem equal the matrix eigenproblem.
// Eigenvalue order is nonincreasing; signs are fixed so each eigenvector's
// largest-magnitude entry is positive; exact eigenvalue ties are ordered by
// lexicographic eigenvector comparison.
FpcaResult fpca_decompose(const CovKernel& kernel, int M);

// Scores of every fitted curve against the per-node eigenfunctions.
ScoreMatrix compute_scores(const FittedSample& fitted, const std::vector<FpcaResult>& fpca,
                           Population population);

ScoreCovariance score_covariance(const ScoreMatrix& scores, bool center = false);

}  // namespace fdg
