#include "fdg/curvefit.hpp"

#include <deque>
#include <limits>
#include <mutex>

#include "fdg/parallel.hpp"

namespace fdg {

Eigen::MatrixXd design_matrix(const BasisSystem& basis, const std::vector<double>& times) {
    if (times.empty()) throw InvalidArgument("design matrix requires at least one time point");
    const int T = static_cast<int>(times.size());
    const int L = basis.size();
    Eigen::MatrixXd B(T, L);
    for (int k = 0; k < T; ++k) B.row(k) = basis.eval(times[static_cast<size_t>(k)]).transpose();
    return B;
}

namespace {

// QR of a design matrix plus the condition estimate of B^T B derived from
// the R diagonal. Shared across curves observed on the same grid.
struct DesignFactor {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr;
    double cond_normal_eq = 0.0;
    int T = 0;
    int L = 0;
};

DesignFactor factor_design(const BasisSystem& basis, const std::vector<double>& times) {
    const int T = static_cast<int>(times.size());
    const int L = basis.size();
    if (T < L)
        throw UnderdeterminedError("fit requires at least as many observations as basis functions (T=" +
                                       std::to_string(T) + ", L=" + std::to_string(L) + ")",
                                   T, L);
    DesignFactor f;
    f.T = T;
    f.L = L;
    f.qr.compute(design_matrix(basis, times));
    Eigen::VectorXd rdiag = f.qr.matrixR().diagonal().cwiseAbs().head(L);
    double rmax = rdiag.maxCoeff();
    double rmin = rdiag.minCoeff();
    double cond_b = rmin > 0.0 ? rmax / rmin : std::numeric_limits<double>::infinity();
    f.cond_normal_eq = cond_b * cond_b;
    if (!(f.cond_normal_eq < kFitConditionLimit))
        throw ConditioningError("normal equations too ill-conditioned (cond ~ " +
                                    std::to_string(f.cond_normal_eq) + ")",
                                T, L, f.cond_normal_eq);
    return f;
}

Eigen::VectorXd solve_with(const DesignFactor& f, const std::vector<double>& values) {
    Eigen::Map<const Eigen::VectorXd> h(values.data(), static_cast<Eigen::Index>(values.size()));
    return f.qr.solve(h);
}

}  // namespace

Eigen::VectorXd fit_curve(const std::vector<double>& times, const std::vector<double>& values,
                          const BasisSystem& basis) {
    if (times.size() != values.size())
        throw InvalidArgument("times and values must have equal length");
    DesignFactor f = factor_design(basis, times);
    return solve_with(f, values);
}

FittedSample fit_sample(const RawDataset& data, BasisPtr basis) {
    data.validate();
    if (!basis) throw InvalidArgument("fit_sample requires a basis");
    const int p = data.p;
    const int n = data.n;
    const int L = basis->size();

    FittedSample out;
    out.basis = basis;
    out.p = p;
    out.n = n;
    out.node_coeffs.assign(static_cast<size_t>(p), Eigen::MatrixXd::Zero(L, n));

    // Curves sampled on a common grid (the usual case) share one QR factor.
    // A deque keeps references stable while new factors are appended.
    std::deque<std::pair<std::vector<double>, DesignFactor>> cache;
    std::mutex cache_mutex;
    auto factor_for = [&](const std::vector<double>& times) -> const DesignFactor& {
        std::lock_guard<std::mutex> lock(cache_mutex);
        for (const auto& entry : cache)
            if (entry.first == times) return entry.second;
        cache.emplace_back(times, factor_design(*basis, times));
        return cache.back().second;
    };

    parallel_for(n * p, [&](int idx) {
        const int i = idx / p;
        const int j = idx % p;
        const ObservedCurve& c = data.at(i, j);
        try {
            const DesignFactor& f = factor_for(c.times);
            out.node_coeffs[static_cast<size_t>(j)].col(i) = solve_with(f, c.values);
        } catch (const UnderdeterminedError& e) {
            throw UnderdeterminedError("curve (sample " + std::to_string(i + 1) + ", node " +
                                           std::to_string(j + 1) + "): " + e.what(),
                                       e.num_obs, e.basis_size);
        } catch (const ConditioningError& e) {
            throw ConditioningError("curve (sample " + std::to_string(i + 1) + ", node " +
                                        std::to_string(j + 1) + "): " + e.what(),
                                    e.num_obs, e.basis_size, e.condition);
        }
    });
    return out;
}

}  // namespace fdg
