#include "fdg/pipeline.hpp"

namespace fdg {

AnalysisResult analyze_scores(const RawDataset& raw_x, const RawDataset& raw_y,
                              const AnalysisConfig& config) {
    raw_x.validate();
    raw_y.validate();
    if (raw_x.p != raw_y.p) throw DataError("populations have different node counts");
    if (!(raw_x.domain == raw_y.domain)) throw DataError("populations have different domains");
    if (config.M < 1 || config.M > config.L)
        throw InvalidArgument("analysis requires 1 <= M <= L");

    AnalysisResult res;
    res.basis = config.kind == BasisKind::Fourier
                    ? make_fourier_basis(config.L, raw_x.domain)
                    : make_orthonormal_bspline_basis(config.L, config.degree, raw_x.domain);
    res.fitted_x = fit_sample(raw_x, res.basis);
    res.fitted_y = fit_sample(raw_y, res.basis);

    res.fpca.reserve(static_cast<size_t>(raw_x.p));
    for (int j = 0; j < raw_x.p; ++j) {
        CovKernel kernel = estimate_cov_kernel(res.fitted_x, res.fitted_y, j, config.center);
        res.fpca.push_back(fpca_decompose(kernel, config.M));
    }
    res.scores_x = compute_scores(res.fitted_x, res.fpca, Population::X);
    res.scores_y = compute_scores(res.fitted_y, res.fpca, Population::Y);
    res.sx = score_covariance(res.scores_x, config.center);
    res.sy = score_covariance(res.scores_y, config.center);
    return res;
}

}  // namespace fdg
