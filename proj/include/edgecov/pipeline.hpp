#pragma once

#include <cstdint>
#include <vector>

#include "edgecov/covariance.hpp"
#include "edgecov/likelihood.hpp"

// From a subjects x nodes measurement table to model inputs: column
// standardization, pairwise-product edge features, and a k-means warm start
// for the sampler.

namespace edgecov::pipeline {

using covariance::EntryMap;
using covariance::Matrix;
using covariance::Partition;
using covariance::RhoParams;
using covariance::Vector;

// Columns centered and scaled to unit variance (divisor s-1). Throws when a
// column is constant, naming its index.
Matrix standardize(const Matrix& x);

// Edge features r[s, (i,j)] = x[s,i] * x[s,j] over ordered pairs i < j, in
// edge-index order. Expects standardized input.
likelihood::EdgeData edge_features(const Matrix& x_std);

// Node-level second-moment matrix x^T x / (s - 1); the correlation matrix
// when x is standardized.
Matrix node_moments(const Matrix& x_std);

struct InitGuess {
    Partition partition;
    RhoParams rho;
    double objective = 0.0; // within-cluster squared distance of the kept run
};

// Lloyd's k-means on the rows of the node correlation matrix, best of
// `restarts` seeded starts. Classes that end up with fewer than 3 nodes are
// dissolved into the nearest surviving centroid, so the returned partition
// can have empty class slots. rho starts from the class-average correlations
// (within per class, cross-class for the background), pushed through the
// inverse of the entry map.
InitGuess kmeans_init(const Matrix& node_corr, int k, int restarts, std::uint64_t seed,
                      EntryMap map = EntryMap::exponential);

// Synthetic subjects x nodes table with a planted block-correlation pattern:
// unit variances, within[c] correlation inside class c, `cross` elsewhere.
Matrix make_synthetic_features(const std::vector<int>& group_sizes,
                               const std::vector<double>& within, double cross, int s,
                               std::uint64_t seed);

} // namespace edgecov::pipeline
