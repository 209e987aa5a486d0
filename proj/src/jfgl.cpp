#include "fdg/jfgl.hpp"

#include <algorithm>
#include <cmath>

#include "fdg/block.hpp"

namespace fdg {

namespace {

// Single-block soft threshold: A scaled by ((|A|_F - tau)/|A|_F)_+.
Eigen::MatrixXd soft_block(const Eigen::MatrixXd& A, double tau) {
    double nrm = A.norm();
    if (nrm > tau) return ((nrm - tau) / nrm) * A;
    return Eigen::MatrixXd::Zero(A.rows(), A.cols());
}

// Closed-form minimizer of 1/2 sum_q |Z_q - A_q|^2 + lam |Z1 - Z2|_F:
// averaging when the gap is within 2 lam, otherwise both move toward each
// other by lam along the gap direction.
void fused_frobenius_pair(const Eigen::MatrixXd& A1, const Eigen::MatrixXd& A2, double lam,
                          Eigen::MatrixXd& Z1, Eigen::MatrixXd& Z2) {
    Eigen::MatrixXd gap = A1 - A2;
    double gn = gap.norm();
    if (gn <= 2.0 * lam) {
        Z1 = 0.5 * (A1 + A2);
        Z2 = Z1;
    } else {
        Z1 = A1 - (lam / gn) * gap;
        Z2 = A2 + (lam / gn) * gap;
    }
}

// Elementwise fused rule: entries differing by more than 2 lam shift toward
// each other by lam, otherwise both become the average.
void fused_elementwise_pair(const Eigen::MatrixXd& A1, const Eigen::MatrixXd& A2, double lam,
                            Eigen::MatrixXd& Z1, Eigen::MatrixXd& Z2) {
    Z1.resize(A1.rows(), A1.cols());
    Z2.resize(A2.rows(), A2.cols());
    for (Eigen::Index c = 0; c < A1.cols(); ++c) {
        for (Eigen::Index r = 0; r < A1.rows(); ++r) {
            double a1 = A1(r, c), a2 = A2(r, c);
            if (a1 > a2 + 2.0 * lam) {
                Z1(r, c) = a1 - lam;
                Z2(r, c) = a2 + lam;
            } else if (a1 < a2 - 2.0 * lam) {
                Z1(r, c) = a1 + lam;
                Z2(r, c) = a2 - lam;
            } else {
                Z1(r, c) = Z2(r, c) = 0.5 * (a1 + a2);
            }
        }
    }
}

enum class FusedKind { Frobenius, Elementwise };

// Inner ADMM shared by FFGL and FFGL2 off-diagonal blocks. Splits the group
// lasso part (W) from the fused part (R); the R iterate is returned so fused
// blocks come out exactly equal.
bool fused_pair_admm(const Eigen::MatrixXd& B1, const Eigen::MatrixXd& B2, double a, double b,
                     const InnerAdmmConfig& cfg, FusedKind kind, Eigen::MatrixXd& Z1,
                     Eigen::MatrixXd& Z2) {
    const Eigen::Index m = B1.rows();
    const double rp = cfg.rho;
    Eigen::MatrixXd W1 = Eigen::MatrixXd::Identity(m, m), W2 = Eigen::MatrixXd::Identity(m, m);
    Eigen::MatrixXd R1 = Eigen::MatrixXd::Zero(m, m), R2 = Eigen::MatrixXd::Zero(m, m);
    Eigen::MatrixXd V1 = Eigen::MatrixXd::Zero(m, m), V2 = Eigen::MatrixXd::Zero(m, m);

    bool converged = false;
    for (int it = 0; it < cfg.max_iters; ++it) {
        Eigen::MatrixXd C1 = (B1 + rp * (R1 - V1)) / (1.0 + rp);
        Eigen::MatrixXd C2 = (B2 + rp * (R2 - V2)) / (1.0 + rp);
        W1 = soft_block(C1, a / (1.0 + rp));
        W2 = soft_block(C2, a / (1.0 + rp));

        Eigen::MatrixXd D1 = W1 + V1;
        Eigen::MatrixXd D2 = W2 + V2;
        Eigen::MatrixXd R1_prev = R1;
        Eigen::MatrixXd R2_prev = R2;
        if (kind == FusedKind::Frobenius)
            fused_frobenius_pair(D1, D2, b / rp, R1, R2);
        else
            fused_elementwise_pair(D1, D2, b / rp, R1, R2);

        V1 += W1 - R1;
        V2 += W2 - R2;

        double primal = std::max((W1 - R1).norm(), (W2 - R2).norm());
        double dual = rp * std::max((R1 - R1_prev).norm(), (R2 - R2_prev).norm());
        if (primal < cfg.tol && dual < cfg.tol) {
            converged = true;
            break;
        }
    }
    Z1 = R1;
    Z2 = R2;
    return converged;
}

void check_problem(const JfglProblem& prob) {
    const size_t Q = prob.S_list.size();
    if (Q < 1) throw InvalidArgument("JFGL requires at least one group");
    if (prob.n_list.size() != Q) throw InvalidArgument("n_list size must match S_list");
    if (prob.lambda1 < 0.0 || prob.lambda2 < 0.0) throw InvalidArgument("penalties must be nonnegative");
    if (!(prob.rho > 0.0) || !(prob.inner.rho > 0.0)) throw InvalidArgument("ADMM rho must be positive");
    const Eigen::Index d = static_cast<Eigen::Index>(prob.p) * prob.M;
    for (size_t q = 0; q < Q; ++q) {
        if (prob.S_list[q].rows() != d || prob.S_list[q].cols() != d)
            throw InvalidArgument("group covariance is not pM x pM");
        if (!is_symmetric(prob.S_list[q], 1e-8))
            throw InvalidArgument("group covariance must be symmetric");
        if (!(prob.n_list[q] > 0.0)) throw InvalidArgument("sample sizes must be positive");
    }
    if ((prob.penalty == JfglPenalty::FFGL || prob.penalty == JfglPenalty::FFGL2) && Q != 2)
        throw InvalidArgument("fused penalties are implemented for Q = 2");
}

}  // namespace

Eigen::MatrixXd theta_update(const Eigen::MatrixXd& S, double n_q, const Eigen::MatrixXd& Z,
                             const Eigen::MatrixXd& U, double rho) {
    if (!(rho > 0.0) || !(n_q > 0.0)) throw InvalidArgument("theta update requires rho > 0, n > 0");
    Eigen::MatrixXd E = S - (rho / n_q) * Z + (rho / n_q) * U;
    E = 0.5 * (E + E.transpose().eval());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(E);
    Eigen::VectorXd d = eig.eigenvalues();
    Eigen::VectorXd dt(d.size());
    const double c = 4.0 * rho / n_q;
    for (Eigen::Index i = 0; i < d.size(); ++i)
        dt(i) = (n_q / (2.0 * rho)) * (-d(i) + std::sqrt(d(i) * d(i) + c));
    return eig.eigenvectors() * dt.asDiagonal() * eig.eigenvectors().transpose();
}

std::vector<Eigen::MatrixXd> prox_gfgl(const std::vector<Eigen::MatrixXd>& A_list, double a,
                                       double b, int p, int M) {
    if (a < 0.0 || b < 0.0) throw InvalidArgument("thresholds must be nonnegative");
    const size_t Q = A_list.size();
    std::vector<Eigen::MatrixXd> Z(Q);
    for (size_t q = 0; q < Q; ++q) Z[q] = A_list[q];

    for (int j = 0; j < p; ++j) {
        for (int l = 0; l < p; ++l) {
            if (j == l) continue;  // diagonal blocks are unpenalized
            double sum_sq = 0.0;
            std::vector<double> shrunk(Q);
            for (size_t q = 0; q < Q; ++q) {
                double nrm = block_view(A_list[q], j, l, M).norm();
                shrunk[q] = std::max(0.0, nrm - a);
                sum_sq += shrunk[q] * shrunk[q];
            }
            double outer = sum_sq > 0.0 ? std::max(0.0, 1.0 - b / std::sqrt(sum_sq)) : 0.0;
            for (size_t q = 0; q < Q; ++q) {
                double nrm = block_view(A_list[q], j, l, M).norm();
                double factor = nrm > 0.0 ? (shrunk[q] / nrm) * outer : 0.0;
                block_view(Z[q], j, l, M) = factor * block_view(A_list[q], j, l, M);
            }
        }
    }
    return Z;
}

bool prox_ffgl_pair(const Eigen::MatrixXd& A1, const Eigen::MatrixXd& A2, double a, double b,
                    const InnerAdmmConfig& cfg, Eigen::MatrixXd& Z1, Eigen::MatrixXd& Z2) {
    if (a < 0.0 || b < 0.0) throw InvalidArgument("thresholds must be nonnegative");
    if (a == 0.0) {
        fused_frobenius_pair(A1, A2, b, Z1, Z2);
        return true;
    }
    return fused_pair_admm(A1, A2, a, b, cfg, FusedKind::Frobenius, Z1, Z2);
}

bool prox_ffgl2_pair(const Eigen::MatrixXd& A1, const Eigen::MatrixXd& A2, double a, double b,
                     const InnerAdmmConfig& cfg, Eigen::MatrixXd& Z1, Eigen::MatrixXd& Z2) {
    if (a < 0.0 || b < 0.0) throw InvalidArgument("thresholds must be nonnegative");
    if (a == 0.0) {
        fused_elementwise_pair(A1, A2, b, Z1, Z2);
        return true;
    }
    return fused_pair_admm(A1, A2, a, b, cfg, FusedKind::Elementwise, Z1, Z2);
}

std::vector<PrecisionEstimate> solve_jfgl(const JfglProblem& prob) {
    check_problem(prob);
    const size_t Q = prob.S_list.size();
    const int p = prob.p;
    const int M = prob.M;
    const Eigen::Index d = static_cast<Eigen::Index>(p) * M;

    std::vector<Eigen::MatrixXd> theta(Q, Eigen::MatrixXd::Identity(d, d));
    std::vector<Eigen::MatrixXd> Z(Q, Eigen::MatrixXd::Zero(d, d));
    std::vector<Eigen::MatrixXd> U(Q, Eigen::MatrixXd::Zero(d, d));

    const double a = prob.lambda1 / prob.rho;
    const double b = prob.lambda2 / prob.rho;

    bool converged = false;
    int iterations = 0;
    double final_primal = 0.0;
    std::vector<Eigen::MatrixXd> z_prev(Q);
    for (int it = 1; it <= prob.max_iters; ++it) {
        iterations = it;
        z_prev = Z;
        for (size_t q = 0; q < Q; ++q)
            theta[q] = theta_update(prob.S_list[q], prob.n_list[q], Z[q], U[q], prob.rho);

        std::vector<Eigen::MatrixXd> A(Q);
        for (size_t q = 0; q < Q; ++q) A[q] = theta[q] + U[q];

        switch (prob.penalty) {
            case JfglPenalty::GFGL:
                Z = prox_gfgl(A, a, b, p, M);
                break;
            case JfglPenalty::FFGL:
            case JfglPenalty::FFGL2: {
                const bool elementwise = prob.penalty == JfglPenalty::FFGL2;
                for (int j = 0; j < p; ++j) {
                    for (int l = 0; l < p; ++l) {
                        Eigen::MatrixXd z1, z2;
                        Eigen::MatrixXd a1 = block_view(A[0], j, l, M);
                        Eigen::MatrixXd a2 = block_view(A[1], j, l, M);
                        double aj = j == l ? 0.0 : a;
                        if (elementwise)
                            prox_ffgl2_pair(a1, a2, aj, b, prob.inner, z1, z2);
                        else
                            prox_ffgl_pair(a1, a2, aj, b, prob.inner, z1, z2);
                        block_view(Z[0], j, l, M) = z1;
                        block_view(Z[1], j, l, M) = z2;
                    }
                }
                break;
            }
        }

        // Primal residual alone is blind to the zero-penalty case where
        // Z tracks Theta + U exactly, so the dual residual is checked too.
        double primal = 0.0;
        double dual = 0.0;
        for (size_t q = 0; q < Q; ++q) {
            U[q] += theta[q] - Z[q];
            primal = std::max(primal, (theta[q] - Z[q]).norm());
            dual = std::max(dual, prob.rho * (Z[q] - z_prev[q]).norm());
        }
        final_primal = primal;
        if (primal < prob.tol && dual < prob.tol) {
            converged = true;
            break;
        }
    }

    std::vector<PrecisionEstimate> out(Q);
    for (size_t q = 0; q < Q; ++q) {
        out[q].p = p;
        out[q].M = M;
        out[q].theta = 0.5 * (Z[q] + Z[q].transpose().eval());
        out[q].converged = converged;
        out[q].iterations = iterations;
        out[q].primal_residual = final_primal;
    }
    return out;
}

EdgeSet jfgl_diff_edges(const PrecisionEstimate& theta_x, const PrecisionEstimate& theta_y,
                        double epsilon) {
    if (theta_x.p != theta_y.p || theta_x.M != theta_y.M)
        throw InvalidArgument("precision estimates have mismatched dimensions");
    if (epsilon < 0.0) throw InvalidArgument("edge threshold must be nonnegative");
    const int p = theta_x.p;
    const int M = theta_x.M;
    Eigen::MatrixXd diff = theta_x.theta - theta_y.theta;
    std::vector<std::pair<int, int>> pairs;
    for (int j = 0; j < p; ++j) {
        for (int l = j + 1; l < p; ++l) {
            if (block_view(diff, j, l, M).norm() > epsilon ||
                block_view(diff, l, j, M).norm() > epsilon)
                pairs.emplace_back(j, l);
        }
    }
    return EdgeSet::from_pairs(p, std::move(pairs));
}

}  // namespace fdg
