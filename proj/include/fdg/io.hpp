#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "fdg/dataset.hpp"
#include "fdg/edgeset.hpp"

namespace fdg::io {

// Shortest representation that round-trips a double exactly.
std::string format_double(double v);

// Raw observation schema: header sample_id,node_id,time,value with 1-based
// ids; rows ordered by sample, then node, then time.
void write_raw_csv(const RawDataset& data, const std::string& path);
RawDataset read_raw_csv(const std::string& path, const Domain& domain);

// Edge list schema: {"p": int, "edges": [[j, l], ...]} with 1-based j < l.
void write_edges_json(const EdgeSet& edges, const std::string& path);
EdgeSet read_edges_json(const std::string& path);

// Per-block Frobenius norms: columns j,l,frob_norm (1-based, all pairs).
void write_block_norms_csv(const Eigen::MatrixXd& norms, const std::string& path);

struct RocRow {
    std::string method;
    int p = 0;
    int replicate = 0;  // 1-based
    double lambda = 0.0;
    double fpr = 0.0;
    double tpr = 0.0;
};
void write_roc_csv(const std::vector<RocRow>& rows, const std::string& path);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

// FNV-1a hash used for the manifest config fingerprint.
std::uint64_t fnv1a(const std::string& text);

}  // namespace fdg::io
