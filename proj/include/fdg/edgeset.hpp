#pragma once

#include <algorithm>
#include <utility>
#include <vector>

#include "fdg/errors.hpp"

namespace fdg {

// Undirected graph over p nodes. Node indices are 0-based internally;
// file formats use 1-based ids.
struct EdgeSet {
    int p = 0;
    std::vector<std::pair<int, int>> edges;  // j < l, sorted, unique

    static EdgeSet from_pairs(int p, std::vector<std::pair<int, int>> pairs) {
        EdgeSet e;
        e.p = p;
        for (auto& pr : pairs) {
            if (pr.first == pr.second) throw InvalidArgument("edge set cannot contain self-loops");
            if (pr.first > pr.second) std::swap(pr.first, pr.second);
            if (pr.first < 0 || pr.second >= p) throw InvalidArgument("edge node out of range");
        }
        std::sort(pairs.begin(), pairs.end());
        pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
        e.edges = std::move(pairs);
        return e;
    }

    bool contains(int j, int l) const {
        if (j > l) std::swap(j, l);
        return std::binary_search(edges.begin(), edges.end(), std::make_pair(j, l));
    }

    int size() const { return static_cast<int>(edges.size()); }

    bool operator==(const EdgeSet& other) const = default;
};

}  // namespace fdg
