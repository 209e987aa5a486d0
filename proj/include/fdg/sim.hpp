#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "fdg/dataset.hpp"
#include "fdg/edgeset.hpp"

namespace fdg {

// A pair of generator-scale precision matrices (mp x mp) with the edges on
// which they differ. Both matrices are shifted by delta*I so the minimum
// eigenvalue is at least 0.05.
struct PrecisionPair {
    int p = 0;
    int m = 0;
    Eigen::MatrixXd omega_x;
    Eigen::MatrixXd omega_y;
    EdgeSet true_edges;
};

enum class SimModel { M1, M2, M3 };

struct SimConfig {
    SimModel model = SimModel::M2;
    int p = 30;
    int m = 5;              // generator basis size
    int n = 100;            // samples per population
    int T = 200;            // observation grid size
    double noise_sd = 0.5;  // observation noise standard deviation
    std::uint64_t seed = 0;
};

// Random graph with round(p(p-1)/10) edges from a preferential-attachment
// process, blocks delta' I scaled for size, and hub-edge perturbations on
// the second population.
PrecisionPair gen_model1(int p, int m, std::uint64_t seed);

// Deterministic block-tridiagonal structure (I, 0.6 I, 0.4 I) with four
// extra (j, j+3) blocks of constant 0.1 in the second population.
PrecisionPair gen_model2(int p, int m);

// Erdos-Renyi graph with edge probability 0.8 and 0.1 I blocks; s extra
// edges with a banded constant block are added to the second population.
PrecisionPair gen_model3(int p, int m, std::uint64_t seed);

// Draws n coefficient vectors from N(0, Omega^{-1}), evaluates the node
// curves on T evenly spaced points spanning [0, 1], and adds observation
// noise. Per-sample randomness is split off the seed by sample index.
RawDataset sample_functional_data(const Eigen::MatrixXd& omega, int m, int n, int T,
                                  double noise_sd, std::uint64_t seed);

// Edges whose m x m block of Omega^X - Omega^Y is nonzero.
EdgeSet true_diff_edges(const PrecisionPair& pair);

}  // namespace fdg
