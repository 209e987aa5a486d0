#pragma once

#include <Eigen/Dense>

#include "fdg/errors.hpp"

namespace fdg {

// Read-only view of the (j, l) M x M block of a pM x pM matrix.
inline Eigen::Block<const Eigen::MatrixXd> block_view(const Eigen::MatrixXd& A, int j, int l, int M) {
    return A.block(j * M, l * M, M, M);
}

inline Eigen::Block<Eigen::MatrixXd> block_view(Eigen::MatrixXd& A, int j, int l, int M) {
    return A.block(j * M, l * M, M, M);
}

// p x p matrix of per-block Frobenius norms.
inline Eigen::MatrixXd block_frobenius_norms(const Eigen::MatrixXd& A, int p, int M) {
    if (A.rows() != p * M || A.cols() != p * M)
        throw InvalidArgument("matrix shape does not match p*M blocking");
    Eigen::MatrixXd norms(p, p);
    for (int j = 0; j < p; ++j)
        for (int l = 0; l < p; ++l) norms(j, l) = block_view(A, j, l, M).norm();
    return norms;
}

// Symmetry check in max norm.
inline bool is_symmetric(const Eigen::MatrixXd& A, double tol) {
    return (A - A.transpose()).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace fdg
