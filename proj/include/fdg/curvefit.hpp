#pragma once

#include <Eigen/Dense>
#include <vector>

#include "fdg/basis.hpp"
#include "fdg/dataset.hpp"

namespace fdg {

// Condition-number ceiling on B^T B beyond which fits are refused.
inline constexpr double kFitConditionLimit = 1e12;

// Design matrix B with B(k, l) = b_l(times[k]).
Eigen::MatrixXd design_matrix(const BasisSystem& basis, const std::vector<double>& times);

// Least-squares coefficients of the basis expansion through (times, values).
// Solved by column-pivoted QR; requires T >= L and cond(B^T B) below the limit.
Eigen::VectorXd fit_curve(const std::vector<double>& times, const std::vector<double>& values,
                          const BasisSystem& basis);

// All fitted curves of one population, sharing a single basis. Coefficients
// for node j are the columns of node_coeffs[j] (L x n).
struct FittedSample {
    BasisPtr basis;
    int p = 0;
    int n = 0;
    std::vector<Eigen::MatrixXd> node_coeffs;

    FunctionRep curve(int i, int j) const { return {basis, node_coeffs[static_cast<size_t>(j)].col(i)}; }
};

// Fits every (sample, node) curve. Fits are independent and run in parallel;
// a failing curve aborts the batch with its (i, j) identity attached.
FittedSample fit_sample(const RawDataset& data, BasisPtr basis);

}  // namespace fdg
