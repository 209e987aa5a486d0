#include "fdg/io.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace fdg::io {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(p.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open for writing: " + path);
    out << content;
    if (!out) throw DataError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

void write_raw_csv(const RawDataset& data, const std::string& path) {
    std::string out;
    out.reserve(static_cast<size_t>(data.n) * data.p * 32);
    out += "sample_id,node_id,time,value\n";
    for (int i = 0; i < data.n; ++i) {
        for (int j = 0; j < data.p; ++j) {
            const ObservedCurve& c = data.at(i, j);
            for (size_t k = 0; k < c.times.size(); ++k) {
                out += std::to_string(i + 1);
                out += ',';
                out += std::to_string(j + 1);
                out += ',';
                out += format_double(c.times[k]);
                out += ',';
                out += format_double(c.values[k]);
                out += '\n';
            }
        }
    }
    write_text_file(path, out);
}

RawDataset read_raw_csv(const std::string& path, const Domain& domain) {
    std::string text = read_text_file(path);
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty CSV: " + path);
    // Tolerate a trailing carriage return.
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "sample_id,node_id,time,value")
        throw DataError("unexpected CSV header in " + path + ": " + line);

    std::map<std::pair<int, int>, ObservedCurve> curves;
    int max_i = 0, max_j = 0;
    size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        int i = 0, j = 0;
        double t = 0.0, v = 0.0;
        char extra = 0;
        if (std::sscanf(line.c_str(), "%d,%d,%lf,%lf%c", &i, &j, &t, &v, &extra) != 4)
            throw DataError(path + ":" + std::to_string(line_no) + ": malformed row");
        if (i < 1 || j < 1)
            throw DataError(path + ":" + std::to_string(line_no) + ": ids must be >= 1");
        max_i = std::max(max_i, i);
        max_j = std::max(max_j, j);
        ObservedCurve& c = curves[{i - 1, j - 1}];
        c.times.push_back(t);
        c.values.push_back(v);
    }
    if (curves.empty()) throw DataError("no observations in " + path);

    RawDataset data;
    data.n = max_i;
    data.p = max_j;
    data.domain = domain;
    data.curves.resize(static_cast<size_t>(max_i) * max_j);
    for (auto& [key, curve] : curves) data.at(key.first, key.second) = std::move(curve);
    for (int i = 0; i < data.n; ++i)
        for (int j = 0; j < data.p; ++j)
            if (data.at(i, j).times.empty())
                throw DataError(path + ": no observations for sample " + std::to_string(i + 1) +
                                ", node " + std::to_string(j + 1));
    data.validate();
    return data;
}

void write_edges_json(const EdgeSet& edges, const std::string& path) {
    nlohmann::json j;
    j["p"] = edges.p;
    j["edges"] = nlohmann::json::array();
    for (const auto& [a, b] : edges.edges) j["edges"].push_back({a + 1, b + 1});
    write_text_file(path, j.dump(2) + "\n");
}

EdgeSet read_edges_json(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ": " + e.what());
    }
    if (!j.contains("p") || !j.contains("edges")) throw DataError(path + ": missing p or edges");
    std::vector<std::pair<int, int>> pairs;
    for (const auto& e : j["edges"]) {
        if (!e.is_array() || e.size() != 2) throw DataError(path + ": malformed edge entry");
        pairs.emplace_back(e[0].get<int>() - 1, e[1].get<int>() - 1);
    }
    return EdgeSet::from_pairs(j["p"].get<int>(), std::move(pairs));
}

void write_block_norms_csv(const Eigen::MatrixXd& norms, const std::string& path) {
    std::string out = "j,l,frob_norm\n";
    for (Eigen::Index j = 0; j < norms.rows(); ++j)
        for (Eigen::Index l = 0; l < norms.cols(); ++l)
            out += std::to_string(j + 1) + "," + std::to_string(l + 1) + "," +
                   format_double(norms(j, l)) + "\n";
    write_text_file(path, out);
}

void write_roc_csv(const std::vector<RocRow>& rows, const std::string& path) {
    std::string out = "method,p,replicate,lambda,fpr,tpr\n";
    for (const RocRow& r : rows)
        out += r.method + "," + std::to_string(r.p) + "," + std::to_string(r.replicate) + "," +
               format_double(r.lambda) + "," + format_double(r.fpr) + "," + format_double(r.tpr) +
               "\n";
    write_text_file(path, out);
}

}  // namespace fdg::io
