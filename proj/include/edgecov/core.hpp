#pragma once

#include <stdexcept>
#include <string>
#include <utility>

// Edge indexing for the upper triangle of a V-node undirected graph.
// Edges are the pairs (i, j) with 0 <= i < j < V, enumerated row-major:
// (0,1), (0,2), ..., (0,V-1), (1,2), ..., (V-2,V-1).
// Node ids and edge ids are 0-based internally; 1-based labels appear only
// at file boundaries.

namespace edgecov::core {

// Number of edges E = V(V-1)/2. Requires v >= 2.
inline int edge_count(int v) {
    if (v < 2) throw std::invalid_argument("edge_count: need at least 2 nodes, got " + std::to_string(v));
    return v * (v - 1) / 2;
}

// Flat index of edge (i, j), i < j, in the row-major upper-triangle order.
inline int edge_index(int i, int j, int v) {
    if (v < 2) throw std::invalid_argument("edge_index: need at least 2 nodes");
    if (i < 0 || j < 0 || i >= v || j >= v)
        throw std::out_of_range("edge_index: node out of range");
    if (i >= j) throw std::invalid_argument("edge_index: requires i < j");
    return i * v - i * (i + 1) / 2 + (j - i - 1);
}

// Inverse of edge_index.
inline std::pair<int, int> edge_pair(int idx, int v) {
    const int e = edge_count(v);
    if (idx < 0 || idx >= e) throw std::out_of_range("edge_pair: edge index out of range");
    // Row i owns v-1-i edges; walk rows until the index falls inside one.
    int i = 0, base = 0;
    while (idx >= base + (v - 1 - i)) {
        base += v - 1 - i;
        ++i;
    }
    return {i, i + 1 + (idx - base)};
}

// Node count recovered from an edge count, or -1 if e is not triangular.
inline int nodes_from_edges(int e) {
    if (e < 1) return -1;
    // V = (1 + sqrt(1 + 8E)) / 2, validated exactly.
    long long disc = 1LL + 8LL * e;
    long long s = 1;
    while (s * s < disc) ++s;
    if (s * s != disc || (1 + s) % 2 != 0) return -1;
    return static_cast<int>((1 + s) / 2);
}

// Strong type for a node count used by the model layers (partition, sampler),
// which need at least one class of 3 nodes to form two distinct edges.
struct NodeCount {
    int value = 0;
    static NodeCount of(int v) {
        if (v < 3) throw std::invalid_argument("NodeCount: need at least 3 nodes, got " + std::to_string(v));
        return NodeCount{v};
    }
};

} // namespace edgecov::core
