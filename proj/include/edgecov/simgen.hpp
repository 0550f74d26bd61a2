#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "edgecov/covariance.hpp"
#include "edgecov/likelihood.hpp"

// Synthetic data generation: a ground-truth labeling plus correlation
// parameters define Sigma, and subject rows are iid N(0, Sigma) draws taken
// through a dense Cholesky factor.

namespace edgecov::simgen {

using covariance::EntryMap;
using covariance::Partition;
using covariance::RhoParams;

enum class Arrangement { contiguous, scattered, shuffled };

Arrangement arrangement_from_string(const std::string& s);
std::string to_string(Arrangement a);

struct GroundTruth {
    int v = 0;
    std::vector<int> group_sizes;
    Partition partition;
    RhoParams rho; // rho[0] = background
    double lambda = 0.0;
    EntryMap map = EntryMap::exponential;
    Arrangement arrangement = Arrangement::contiguous;
};

// Builds the ground-truth labeling. Contiguous lays classes out in index
// order; scattered uses the fixed interleaved layouts defined for
// V = 10, 20, 30, 40 (errors for other sizes); shuffled applies a seeded
// random permutation to the contiguous layout.
GroundTruth make_ground_truth(const std::vector<int>& group_sizes,
                              const std::vector<double>& rho_within,
                              double rho0, double lambda,
                              Arrangement arrangement = Arrangement::contiguous,
                              EntryMap map = EntryMap::exponential,
                              std::uint64_t shuffle_seed = 0);

// The preset scattered layout for v (1-based labels), empty if none exists.
std::vector<int> preset_scattered_labels(int v);

// S subject rows drawn from N(0, Sigma(gt)); draws are subject-major,
// coordinate-minor, so a fixed seed pins the whole matrix. Throws if Sigma
// is not positive definite, naming the configuration.
likelihood::EdgeData generate(const GroundTruth& gt, int s, std::uint64_t seed);

} // namespace edgecov::simgen
