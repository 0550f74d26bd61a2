#pragma once

#include <optional>
#include <string>
#include <vector>

#include "edgecov/sampler.hpp"

// Model comparison across class counts. WAIC is computed from the retained
// per-subject log densities:
//
//   WAIC = -2 * sum_i lppd_i + 2 * sum_i var_i,
//   lppd_i = log mean_t exp(logp_it),  var_i over draws t (divisor T-1),
//
// with the log-mean-exp taken against the per-subject max for stability.
// Chains are compared on log(-WAIC), which only exists for negative WAIC; a
// nonnegative WAIC marks the fit as not usable for that comparison.

namespace edgecov::modelselect {

using covariance::Matrix;
using sampler::ChainResult;
using sampler::ChainTrace;
using sampler::MHConfig;

struct WaicResult {
    double waic = 0.0;
    double lppd = 0.0;    // sum over subjects
    double penalty = 0.0; // sum of per-subject variances
    bool log_neg_defined = false;
    double log_neg_waic = 0.0; // log(-waic); NaN when not defined
};

// pointwise: retained draws x subjects. Needs at least 2 draws.
WaicResult waic(const Matrix& pointwise);

struct ConvergenceCriteria {
    double z_threshold = 3.0;  // split-half mean distance in pooled batch SEs
    int batches_per_half = 10; // batch-means batches per half
    // Optional extra gate for WAIC-based comparisons: positive WAIC means the
    // log(-WAIC) transform does not exist, not that the chain failed to mix,
    // so it is off by default.
    bool require_negative_waic = false;
    int min_retained = 50;
};

struct ConvergenceReport {
    bool converged = false;
    double split_z = 0.0;
    bool zero_acceptance_block = false;
    bool waic_usable = false;
    std::string reason; // empty when converged
};

// Stability proxy over the retained iterations: the two halves of the
// log-likelihood series must agree in mean relative to a batch-means standard
// error (plain iid SEs misfire under autocorrelation), no attempted update
// block may have zero acceptances, and (by default) WAIC must be negative.
ConvergenceReport assess_convergence(const ChainTrace& trace, const WaicResult* w,
                                     const ConvergenceCriteria& crit = {});

struct KScanRow {
    int k = 0;
    bool runnable = false;       // 2k <= v and k >= 1
    bool feasible_strict = false; // 3k <= v
    bool converged = false;
    int k_hat = 0;
    WaicResult waic;
    ConvergenceReport convergence;
    sampler::PosteriorSummary summary;
    std::string note; // set when the row was skipped
};

struct KScanResult {
    std::vector<KScanRow> rows; // ascending k
    std::optional<int> recommended_k; // lowest WAIC among converged rows
};

// Runs one chain per candidate k (pointwise recording forced on), each on its
// own seed stream mixed from (base.seed, k). threads > 1 runs candidates
// concurrently; results are deterministic either way.
KScanResult k_scan(const likelihood::EdgeData& data, const MHConfig& base,
                   const std::vector<int>& ks, int threads = 1,
                   const ConvergenceCriteria& crit = {});

} // namespace edgecov::modelselect
