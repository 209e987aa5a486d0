#include "fdg/fudge.hpp"

#include <algorithm>
#include <cmath>

#include "fdg/block.hpp"

namespace fdg {

namespace {

void check_shapes(const ScoreCovariance& sx, const ScoreCovariance& sy) {
    if (sx.p != sy.p || sx.M != sy.M || sx.S.rows() != sy.S.rows())
        throw InvalidArgument("score covariances have mismatched dimensions");
    if (sx.S.rows() != sx.S.cols() || sx.S.rows() != static_cast<Eigen::Index>(sx.p) * sx.M)
        throw InvalidArgument("score covariance is not pM x pM");
}

double penalty_sum(const Eigen::MatrixXd& delta, int p, int M) {
    double s = 0.0;
    for (int j = 0; j < p; ++j)
        for (int l = 0; l < p; ++l) s += block_view(delta, j, l, M).norm();
    return s;
}

}  // namespace

Eigen::MatrixXd DiffEstimate::block_norms() const { return block_frobenius_norms(delta, p, M); }

double fudge_loss(const Eigen::MatrixXd& delta, const ScoreCovariance& sx,
                  const ScoreCovariance& sy) {
    check_shapes(sx, sy);
    if (delta.rows() != sx.S.rows() || delta.cols() != sx.S.cols())
        throw InvalidArgument("delta shape does not match the score covariances");
    // tr(SY D' SX D) = <D, SX D SY>_F with symmetric SX, SY.
    Eigen::MatrixXd sxd_sy = sx.S * delta * sy.S;
    double quad = 0.5 * (delta.cwiseProduct(sxd_sy)).sum();
    double lin = (delta.cwiseProduct(sy.S - sx.S)).sum();
    return quad - lin;
}

Eigen::MatrixXd fudge_gradient(const Eigen::MatrixXd& delta, const ScoreCovariance& sx,
                               const ScoreCovariance& sy) {
    check_shapes(sx, sy);
    if (delta.rows() != sx.S.rows() || delta.cols() != sx.S.cols())
        throw InvalidArgument("delta shape does not match the score covariances");
    return sx.S * delta * sy.S - (sy.S - sx.S);
}

double default_step_size(const ScoreCovariance& sx, const ScoreCovariance& sy) {
    check_shapes(sx, sy);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ex(sx.S, Eigen::EigenvaluesOnly);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ey(sy.S, Eigen::EigenvaluesOnly);
    double lip = ex.eigenvalues().maxCoeff() * ey.eigenvalues().maxCoeff();
    if (!(lip > 1e-15))
        throw DegenerateSpectrumError("spectral bound too small for a finite step size");
    return 1.0 / lip;
}

Eigen::MatrixXd block_soft_threshold(const Eigen::MatrixXd& A, double tau, int M) {
    if (tau < 0.0) throw InvalidArgument("threshold must be nonnegative");
    if (A.rows() % M != 0 || A.cols() % M != 0)
        throw InvalidArgument("matrix shape does not match block size");
    const int pr = static_cast<int>(A.rows()) / M;
    const int pc = static_cast<int>(A.cols()) / M;
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(A.rows(), A.cols());
    for (int j = 0; j < pr; ++j) {
        for (int l = 0; l < pc; ++l) {
            double nrm = A.block(j * M, l * M, M, M).norm();
            if (nrm > tau) out.block(j * M, l * M, M, M) = ((nrm - tau) / nrm) * A.block(j * M, l * M, M, M);
        }
    }
    return out;
}

DiffEstimate solve_fudge(const ScoreCovariance& sx, const ScoreCovariance& sy,
                         const FudgeConfig& config,
                         const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>* mask) {
    check_shapes(sx, sy);
    if (config.lambda < 0.0) throw InvalidArgument("lambda must be nonnegative");
    if (config.step && !(*config.step > 0.0)) throw InvalidArgument("step size must be positive");
    if (!is_symmetric(sx.S, 1e-8) || !is_symmetric(sy.S, 1e-8))
        throw InvalidArgument("score covariances must be symmetric");
    {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ex(sx.S, Eigen::EigenvaluesOnly);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ey(sy.S, Eigen::EigenvaluesOnly);
        if (ex.eigenvalues().minCoeff() < -1e-6 || ey.eigenvalues().minCoeff() < -1e-6)
            throw NotPsdError("score covariances must be positive semidefinite");
    }
    if (mask && (mask->rows() != sx.p || mask->cols() != sx.p))
        throw InvalidArgument("support mask must be p x p");

    const int p = sx.p;
    const int M = sx.M;
    const Eigen::Index d = sx.S.rows();
    const double eta = config.step ? *config.step : default_step_size(sx, sy);
    const Eigen::MatrixXd diff = sy.S - sx.S;

    DiffEstimate est;
    est.p = p;
    est.M = M;
    est.delta = Eigen::MatrixXd::Zero(d, d);

    auto apply_mask = [&](Eigen::MatrixXd& delta) {
        if (!mask) return;
        for (int j = 0; j < p; ++j)
            for (int l = 0; l < p; ++l)
                if (!(*mask)(j, l)) block_view(delta, j, l, M).setZero();
    };

    double objective = 0.0;  // loss(0) + penalty(0)
    est.objective_trace.reserve(static_cast<size_t>(std::min(config.max_iters, 4096)));
    Eigen::MatrixXd a(d, d);
    for (int it = 1; it <= config.max_iters; ++it) {
        a.noalias() = sx.S * est.delta * sy.S;
        a = est.delta - eta * (a - diff);
        est.delta = block_soft_threshold(a, config.lambda * eta, M);
        apply_mask(est.delta);

        double next = fudge_loss(est.delta, sx, sy) + config.lambda * penalty_sum(est.delta, p, M);
        est.iterations = it;
        est.objective_trace.push_back(next);
        if (std::abs(next - objective) < config.tol * (1.0 + std::abs(objective))) {
            objective = next;
            est.converged = true;
            break;
        }
        objective = next;
    }
    est.objective = objective;
    return est;
}

double kkt_residual(const DiffEstimate& est, const ScoreCovariance& sx, const ScoreCovariance& sy,
                    double lambda) {
    if (lambda < 0.0) throw InvalidArgument("lambda must be nonnegative");
    Eigen::MatrixXd grad = fudge_gradient(est.delta, sx, sy);
    double worst = 0.0;
    for (int j = 0; j < est.p; ++j) {
        for (int l = 0; l < est.p; ++l) {
            auto db = block_view(est.delta, j, l, est.M);
            auto gb = block_view(grad, j, l, est.M);
            double nrm = db.norm();
            double r = nrm > 0.0 ? (gb + (lambda / nrm) * db).norm() : std::max(0.0, gb.norm() - lambda);
            worst = std::max(worst, r);
        }
    }
    return worst;
}

EdgeSet threshold_edges(const DiffEstimate& est, double epsilon) {
    if (epsilon < 0.0) throw InvalidArgument("edge threshold must be nonnegative");
    std::vector<std::pair<int, int>> pairs;
    for (int j = 0; j < est.p; ++j) {
        for (int l = j + 1; l < est.p; ++l) {
            if (block_view(est.delta, j, l, est.M).norm() > epsilon ||
                block_view(est.delta, l, j, est.M).norm() > epsilon)
                pairs.emplace_back(j, l);
        }
    }
    return EdgeSet::from_pairs(est.p, std::move(pairs));
}

}  // namespace fdg
