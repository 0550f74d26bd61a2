#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "edgecov/core.hpp"

// Structured covariance over edge features.
//
// Nodes carry class labels 1..K. An edge (i,j) belongs to class k's block iff
// both endpoints are labeled k; every other edge is "background". The edge
// covariance is
//
//   Sigma = lambda*I + Lambda,
//   Lambda[e,f] = within[k]  if all four endpoints of e and f share class k,
//                 bg         otherwise,
//
// where the entry values come from rho through a configurable map:
// exponential (value = exp(-rho)) or identity (value = rho). Collecting the
// blocks, Lambda = bg * 11^T + sum_k (within[k] - bg) * u_k u_k^T with u_k the
// 0/1 indicator of block k, which is the low-rank form everything here
// exploits: determinants via the matrix determinant lemma on a (K+1)-sized
// core, traces and quadratic forms via the Woodbury identity, and positive
// definiteness via an exact eigen-split of the block subspace.

namespace edgecov::covariance {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class EntryMap { exponential, identity };

EntryMap entry_map_from_string(const std::string& s);
std::string to_string(EntryMap m);

// Node labels, 1-based class ids in {1..kmax}.
struct Partition {
    std::vector<int> labels;
    int kmax = 0; // number of class slots (classes may be empty)

    int v() const { return static_cast<int>(labels.size()); }
    // sizes[k] = #nodes labeled k, k in 1..kmax; sizes[0] unused.
    std::vector<int> class_sizes() const;
    std::vector<int> nonempty_classes() const;

    static Partition from_labels(std::vector<int> labels, int kmax);
};

// rho[0] is the background (cross-class) parameter, rho[k] class k's.
struct RhoParams {
    std::vector<double> values;

    int k() const { return static_cast<int>(values.size()) - 1; }
    double rho0() const { return values[0]; }

    static RhoParams of(std::vector<double> values);
};

// Edge-block decomposition of a partition: which edges sit fully inside
// which class. m[0] counts background edges; members[k] lists block k's edge
// ids ascending (k = 1..kmax, members[0] unused).
struct BlockStats {
    int v = 0, e = 0, kmax = 0;
    std::vector<std::vector<int>> members;
    std::vector<int> m;

    int block_edge_total() const; // sum of m[1..kmax]
};

BlockStats compute_block_stats(const Partition& p, int v);

// Entry values after applying the map: bg and within[k] for k = 1..kmax
// (within[0] mirrors bg so callers can index by class directly).
struct EntryValues {
    double bg = 0.0;
    std::vector<double> within;
};

EntryValues map_entry_values(const RhoParams& rho, EntryMap map);

struct StructuredCov {
    int v = 0, e = 0;
    Partition partition;
    RhoParams rho;
    double lambda = 0.0;
    EntryMap map = EntryMap::exponential;
    BlockStats stats;
    EntryValues values;
};

// Validates shapes (labels within 1..rho.k(), lambda >= 0, v >= 2) and
// precomputes the block decomposition.
StructuredCov build_structured(const Partition& p, const RhoParams& rho,
                               double lambda, int v, EntryMap map = EntryMap::exponential);

// Dense Sigma filled entry by entry from the four-endpoint rule. Serves as
// the independent reference for materialize().
Matrix build_dense(const Partition& p, const RhoParams& rho,
                   double lambda, int v, EntryMap map = EntryMap::exponential);

// Dense Sigma filled from the block decomposition (background everywhere,
// then block overwrites). Must match build_dense entry for entry.
Matrix materialize(const StructuredCov& sc);

// --- small-core machinery ------------------------------------------------
//
// W = [1?, u_k ...] keeps only columns with a nonzero coefficient:
// the all-ones column iff bg != 0, block columns iff m_k > 0 and
// b_k = within[k] - bg != 0. d holds the matching coefficients and
// G = W^T W has the closed form G[1,1] = E, G[1,k] = G[k,k] = m_k.
struct SmallCore {
    int p = 0;
    bool has_ones = false;
    std::vector<int> cls; // retained block classes, ascending
    Vector d;
    Matrix g;
};

SmallCore build_small_core(const BlockStats& stats, const EntryValues& values);

struct PdReport {
    bool ok = false;
    std::string diagnostic; // empty when ok
};

// Exact PD test. Sigma's spectrum is lambda (on the complement of the block
// subspace) plus the eigenvalues of the symmetric core
//   C = lambda*I + bg*sqrt(m)sqrt(m)^T + diag(b_k m_k, ..., 0),
// one coordinate per nonempty block plus one for the background edges, so a
// pivot-by-pivot Cholesky of C certifies Sigma and names the failing block.
PdReport pd_check(const BlockStats& stats, const EntryValues& values, double lambda);

PdReport is_positive_definite(const StructuredCov& sc);

// log det Sigma = E log lambda + log det(I + lambda^{-1} D G), evaluated by
// LU with log-magnitude pivot accumulation (the raw product overflows at
// small lambda). Throws if lambda <= 0 or the sign accounting fails.
double logdet_from_core(const SmallCore& core, double lambda, int e);
double logdet(const StructuredCov& sc);

// Woodbury core M = D^{-1} + lambda^{-1} G, prefactored for repeated solves.
struct WoodburyCore {
    SmallCore core;
    double lambda = 0.0;
    Eigen::PartialPivLU<Matrix> lu; // undefined when core.p == 0
};

WoodburyCore build_woodbury(const SmallCore& core, double lambda);

// T = W^T H W assembled from block-edge sums: T[1,1] is the grand sum of H,
// T[1,k] sums block-k rows of H, T[j,k] sums the block-j x block-k submatrix.
Matrix build_t(const BlockStats& stats, const SmallCore& core, const Matrix& h,
               const Vector& rowsums, double grand);

// tr(H Sigma^{-1}) = tr(H)/lambda - lambda^{-2} tr(M^{-1} T).
double trace_from_core(const WoodburyCore& wb, double tr_h, const Matrix& t);
double trace_quad(const StructuredCov& sc, const Matrix& h);

// y = W^T x for a single subject row.
Vector build_y(const BlockStats& stats, const SmallCore& core, const Vector& x);

// x^T Sigma^{-1} x = x^T x / lambda - lambda^{-2} y^T M^{-1} y.
double quad_from_core(const WoodburyCore& wb, double xtx, const Vector& y);

// Dense Cholesky reference backend: builds Sigma explicitly and factors it.
// Slow and simple on purpose; the equivalence tests pit it against the
// structured path. Throws on non-PD Sigma.
struct DenseResult {
    double logdet = 0.0;
    double trace_quad = 0.0;
};

DenseResult dense_oracle(const StructuredCov& sc, const Matrix& h);

} // namespace edgecov::covariance
