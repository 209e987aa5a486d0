#include "fdg/fpca.hpp"

#include <numeric>

namespace fdg {

namespace {

Eigen::MatrixXd centered_coeffs(const Eigen::MatrixXd& coeffs, bool center) {
    if (!center) return coeffs;
    Eigen::VectorXd mean = coeffs.rowwise().mean();
    return coeffs.colwise() - mean;
}

}  // namespace

CovKernel estimate_cov_kernel(const FittedSample& fitted_x, const FittedSample& fitted_y, int node,
                              bool center) {
    if (!fitted_x.basis || !fitted_y.basis || !fitted_x.basis->same_system(*fitted_y.basis))
        throw BasisMismatch("kernel estimation requires both samples on one basis");
    if (!fitted_x.basis->orthonormal())
        throw InvalidBasis("kernel estimation requires an orthonormal basis");
    if (node < 0 || node >= fitted_x.p || fitted_x.p != fitted_y.p)
        throw InvalidArgument("node index out of range");
    if (fitted_x.n < 1 || fitted_y.n < 1) throw InvalidArgument("kernel estimation requires n >= 1");

    Eigen::MatrixXd bx = centered_coeffs(fitted_x.node_coeffs[static_cast<size_t>(node)], center);
    Eigen::MatrixXd by = centered_coeffs(fitted_y.node_coeffs[static_cast<size_t>(node)], center);

    CovKernel k;
    k.node = node;
    k.basis = fitted_x.basis;
    k.K = bx * bx.transpose() / fitted_x.n + by * by.transpose() / fitted_y.n;
    k.K = 0.5 * (k.K + k.K.transpose().eval());
    return k;
}

FpcaResult fpca_decompose(const CovKernel& kernel, int M) {
    const int L = static_cast<int>(kernel.K.rows());
    if (M < 1 || M > L) throw InvalidArgument("FPCA requires 1 <= M <= L");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(kernel.K);
    if (eig.info() != Eigen::Success) throw Error("eigendecomposition failed");

    // Solver returns ascending order; collect indices in descending order and
    // apply the sign convention before any tie comparison.
    Eigen::MatrixXd vecs = eig.eigenvectors();
    Eigen::VectorXd vals = eig.eigenvalues();
    for (int c = 0; c < L; ++c) {
        int arg = 0;
        vecs.col(c).cwiseAbs().maxCoeff(&arg);
        if (vecs(arg, c) < 0.0) vecs.col(c) = -vecs.col(c);
    }
    std::vector<int> order(static_cast<size_t>(L));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (vals(a) != vals(b)) return vals(a) > vals(b);
        // Deterministic order among exactly equal eigenvalues.
        for (int r = 0; r < L; ++r) {
            if (vecs(r, a) != vecs(r, b)) return vecs(r, a) < vecs(r, b);
        }
        return false;
    });

    FpcaResult res;
    res.node = kernel.node;
    res.basis = kernel.basis;
    res.eigenvalues.resize(M);
    res.eigvecs.resize(L, M);
    for (int k = 0; k < M; ++k) {
        double lambda = vals(order[static_cast<size_t>(k)]);
        if (lambda < 0.0) {
            if (lambda < -1e-8) throw NotPsdError("covariance kernel has a negative eigenvalue");
            lambda = 0.0;
        }
        res.eigenvalues(k) = lambda;
        res.eigvecs.col(k) = vecs.col(order[static_cast<size_t>(k)]);
    }
    return res;
}

ScoreMatrix compute_scores(const FittedSample& fitted, const std::vector<FpcaResult>& fpca,
                           Population population) {
    if (fpca.size() != static_cast<size_t>(fitted.p))
        throw InvalidArgument("need one FPCA result per node");
    const int M = static_cast<int>(fpca.front().eigvecs.cols());

    ScoreMatrix s;
    s.population = population;
    s.n = fitted.n;
    s.p = fitted.p;
    s.M = M;
    s.a.resize(fitted.n, fitted.p * M);
    for (int j = 0; j < fitted.p; ++j) {
        const FpcaResult& f = fpca[static_cast<size_t>(j)];
        if (!f.basis || !f.basis->same_system(*fitted.basis))
            throw BasisMismatch("FPCA basis differs from the fitted basis");
        if (f.eigvecs.cols() != M) throw InvalidArgument("inconsistent M across nodes");
        // Scores are exact coefficient inner products by orthonormality.
        s.a.middleCols(j * M, M) =
            fitted.node_coeffs[static_cast<size_t>(j)].transpose() * f.eigvecs;
    }
    return s;
}

ScoreCovariance score_covariance(const ScoreMatrix& scores, bool center) {
    if (scores.n < 1) throw InvalidArgument("score covariance requires n >= 1");
    Eigen::MatrixXd a = scores.a;
    if (center) {
        Eigen::RowVectorXd mean = a.colwise().mean();
        a.rowwise() -= mean;
    }
    ScoreCovariance cov;
    cov.population = scores.population;
    cov.p = scores.p;
    cov.M = scores.M;
    cov.S = a.transpose() * a / scores.n;
    cov.S = 0.5 * (cov.S + cov.S.transpose().eval());
    return cov;
}

}  // namespace fdg
