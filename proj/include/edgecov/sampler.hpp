#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "edgecov/covariance.hpp"
#include "edgecov/likelihood.hpp"
#include "edgecov/rng.hpp"

// Metropolis-Hastings over (labels, rho). Each iteration sweeps the nodes in
// ascending order, proposing a new class for node i from the conditional
// occupancy distribution q(c) = m_{-i,c} / (v - 1); that proposal density
// equals the conditional prior term, so label moves accept on the bare
// likelihood ratio. Empty classes are never proposed, so a vanished class
// stays vanished. After the node sweep, the background coefficient (unless
// pinned via fixed_rho0) and each currently occupied class coefficient get a
// Gaussian random-walk update with a Normal(prior_mean, prior_sd^2) prior.
//
// Draw accounting is part of the contract: a self-proposal is accepted
// without consuming a uniform; every other proposal consumes exactly one.

namespace edgecov::sampler {

using covariance::EntryMap;
using covariance::Matrix;
using covariance::Partition;
using covariance::RhoParams;
using covariance::Vector;
using likelihood::EdgeData;

struct MHConfig {
    int k = 0; // number of class slots; required
    int iters = 2500;
    int burn_in = 500;
    double lambda = 0.01;
    EntryMap map = EntryMap::exponential;
    double prior_mean = 0.25;
    double prior_sd = 1.0;
    double step_sd = 0.01;
    double rho_init_min = 0.0;
    double rho_init_max = 0.5;
    std::uint64_t seed = 1;
    std::uint64_t stream = 0; // mixed into the seed; distinct streams decorrelate chains
    bool record_pointwise = true; // keep per-subject log densities for model comparison
    bool debug_checks = false;    // recompute the cached log likelihood every 100 iterations
    // Pin the background coordinate: rho[0] starts here and is never proposed.
    // Used when the cross-class level is known (for instance exactly zero in
    // block-diagonal simulations, where a sampled background concentrates so
    // sharply that a fixed-step walk stalls on it).
    std::optional<double> fixed_rho0;
    std::optional<Partition> init_partition;
    std::optional<RhoParams> init_rho;
};

struct ChainState {
    Partition partition;
    RhoParams rho;
    double loglik = 0.0;
    double logdet = 0.0;
    double trace_quad = 0.0;
    std::uint64_t version = 0; // bumped on every accepted move
};

struct ChainTrace {
    int v = 0;
    int k = 0;
    int iters = 0;
    int burn_in = 0;
    std::vector<std::vector<int>> labels;          // iters x v
    std::vector<std::vector<double>> rho;          // iters x (k+1)
    std::vector<double> loglik;                    // iters
    std::vector<std::vector<std::uint8_t>> label_accept; // iters x v
    // -1 = not attempted (class empty that sweep), 0 = rejected, 1 = accepted
    std::vector<std::vector<std::int8_t>> rho_accept; // iters x (k+1)
    Matrix pointwise; // retained iterations x subjects; 0x0 when not recorded
    int retained() const { return iters - burn_in; }
};

struct PosteriorSummary {
    Partition map_partition; // highest-likelihood retained draw
    RhoParams map_rho;
    int map_iteration = -1;
    double map_loglik = 0.0;
    RhoParams rho_hat; // retained-draw means
    std::vector<std::uint8_t> vanished; // size k+1, [0] unused; class empty at the MAP draw
    int k_hat = 0;
    double label_accept_rate = 0.0;               // over retained iterations
    std::vector<double> rho_accept_rate;          // size k+1; NaN when never attempted
    std::vector<std::int64_t> rho_attempts;       // size k+1
};

struct ChainResult {
    ChainTrace trace;
    PosteriorSummary summary;
};

// Work area shared by the per-move updates: the data matrices, per-subject
// sums, and partition-keyed caches of the block decomposition.
class SweepContext {
  public:
    SweepContext(const EdgeData& data, const MHConfig& cfg);

    const MHConfig& cfg() const { return cfg_; }
    int v() const { return v_; }
    int e() const { return e_; }
    int s() const { return data_->s(); }
    const EdgeData& data() const { return *data_; }

    struct Eval {
        double loglik = 0.0;
        double logdet = 0.0;
        double trace_quad = 0.0;
        bool pd = false;
    };

    // Log likelihood of (partition, rho); loglik is -inf when Sigma is not
    // positive definite. Reuses the cached block decomposition when the
    // labels match the previous call.
    Eval evaluate(const Partition& partition, const RhoParams& rho);

    // Per-subject log densities for the current state (one entry per row of
    // R). Requires a positive-definite state.
    Vector pointwise(const Partition& partition, const RhoParams& rho);

  private:
    void refresh_blocks(const Partition& partition);

    const EdgeData* data_;
    MHConfig cfg_;
    int v_ = 0;
    int e_ = 0;
    double tr_h_ = 0.0;
    double grand_ = 0.0;
    Vector rowsums_;   // H * 1
    Vector subj_sum_;  // per-subject coordinate sums
    Vector subj_sqn_;  // per-subject squared norms

    std::vector<int> cached_labels_;
    covariance::BlockStats stats_;
    Vector block_rowsum_; // k+1; [c] = 1' H u_c over the class-c block
    Matrix block_pair_;   // (k+1)^2; [c,d] = u_c' H u_d
};

// Random equal-occupancy initialization: deals 3 nodes to each class, then
// assigns the remainder uniformly. Requires 3k <= v.
Partition init_partition(int v, int k, Rng& rng);

// Fallback when 3k > v but 2k <= v: a shuffled equal split with every class
// getting at least 2 nodes.
Partition init_partition_relaxed(int v, int k, Rng& rng);

// k+1 independent draws from U[rho_init_min, rho_init_max], background first.
RhoParams init_rho(int k, const MHConfig& cfg, Rng& rng);

// Proposal for node i: (class, probability). A class with zero occupancy
// among the other nodes is never returned. class_order, when given, fixes the
// enumeration order used to invert the uniform draw (used by the permutation
// tests); default is ascending class id.
std::pair<int, double> propose_label(const ChainState& state, int node, Rng& rng,
                                     const std::vector<int>* class_order = nullptr);

// Applies one label move. A self-proposal is accepted outright with no
// uniform draw; otherwise one uniform decides via alpha > u with
// alpha = min(1, likelihood ratio). Returns acceptance; mutates state.
bool accept_label(SweepContext& ctx, ChainState& state, int node, int proposed, Rng& rng);

// Gaussian random-walk value for coordinate k of rho (k = 0 is background).
double propose_rho(const ChainState& state, int k, double step_sd, Rng& rng);

// Applies one rho move: alpha = min(1, exp[(loglik* + logprior*) -
// (loglik + logprior)]), one uniform, strict alpha > u.
bool accept_rho(SweepContext& ctx, ChainState& state, int k, double proposed, Rng& rng);

// Shared accept kernel: alpha = exp(min(0, log_ratio)), draws one uniform,
// returns alpha > u.
bool mh_accept(double log_ratio, Rng& rng);

// Full run: seeded initialization, iters sweeps, trace recording, summary.
ChainResult run_chain(const EdgeData& data, const MHConfig& cfg);

// Posterior summary of a recorded trace (MAP draw, means over retained
// iterations, acceptance rates).
PosteriorSummary summarize(const ChainTrace& trace);

} // namespace edgecov::sampler
