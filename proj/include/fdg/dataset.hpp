#pragma once

#include <vector>

#include "fdg/basis.hpp"
#include "fdg/errors.hpp"

namespace fdg {

// Discrete noisy observations of one curve.
struct ObservedCurve {
    std::vector<double> times;
    std::vector<double> values;

    int count() const { return static_cast<int>(times.size()); }
};

// Discretely observed noisy samples for one population: n samples of p curves.
struct RawDataset {
    int p = 0;
    int n = 0;
    Domain domain;
    std::vector<ObservedCurve> curves;  // row-major, index i * p + j

    const ObservedCurve& at(int i, int j) const { return curves[static_cast<size_t>(i) * p + j]; }
    ObservedCurve& at(int i, int j) { return curves[static_cast<size_t>(i) * p + j]; }

    // Checks shapes, strictly increasing times, and domain membership.
    void validate() const;
};

inline void RawDataset::validate() const {
    if (p < 1 || n < 1) throw DataError("dataset requires p >= 1 and n >= 1");
    if (curves.size() != static_cast<size_t>(p) * static_cast<size_t>(n))
        throw DataError("dataset curve grid has wrong size");
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) {
            const ObservedCurve& c = at(i, j);
            if (c.times.empty() || c.times.size() != c.values.size())
                throw DataError("curve (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                                ") has empty or mismatched observations");
            for (size_t k = 0; k < c.times.size(); ++k) {
                if (!domain.contains(c.times[k]))
                    throw DataError("curve (" + std::to_string(i + 1) + "," +
                                    std::to_string(j + 1) + ") has a time outside the domain");
                if (k > 0 && !(c.times[k] > c.times[k - 1]))
                    throw DataError("curve (" + std::to_string(i + 1) + "," +
                                    std::to_string(j + 1) + ") times are not strictly increasing");
            }
        }
    }
}

}  // namespace fdg
