#include "edgecov/modelselect.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "edgecov/core.hpp"

namespace edgecov::modelselect {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

struct BatchMean {
    double mean = 0.0;
    double se = 0.0;
    bool ok = false;
};

BatchMean batch_mean(const double* x, int n, int batches) {
    BatchMean out;
    if (n < batches || batches < 2) return out;
    const int width = n / batches; // trailing remainder is dropped
    std::vector<double> bm(batches, 0.0);
    for (int b = 0; b < batches; ++b) {
        double acc = 0.0;
        for (int i = 0; i < width; ++i) acc += x[b * width + i];
        bm[b] = acc / width;
    }
    double mean = 0.0;
    for (const double m : bm) mean += m;
    mean /= batches;
    double var = 0.0;
    for (const double m : bm) var += (m - mean) * (m - mean);
    var /= (batches - 1);
    out.mean = mean;
    out.se = std::sqrt(var / batches);
    out.ok = true;
    return out;
}

} // namespace

WaicResult waic(const Matrix& pointwise) {
    const int t = static_cast<int>(pointwise.rows());
    const int n = static_cast<int>(pointwise.cols());
    if (t < 2) throw std::invalid_argument("WAIC needs at least 2 retained draws");
    if (n < 1) throw std::invalid_argument("WAIC needs at least 1 subject");

    if (!pointwise.allFinite())
        throw std::invalid_argument("pointwise log densities contain non-finite values");
    WaicResult out;
    for (int i = 0; i < n; ++i) {
        const auto col = pointwise.col(i);
        const double mx = col.maxCoeff();
        const double lppd_i = mx + std::log((col.array() - mx).exp().mean());
        const double mean = col.mean();
        const double var_i = (col.array() - mean).square().sum() / (t - 1);
        out.lppd += lppd_i;
        out.penalty += var_i;
    }
    out.waic = -2.0 * out.lppd + 2.0 * out.penalty;
    if (out.waic < 0.0) {
        out.log_neg_defined = true;
        out.log_neg_waic = std::log(-out.waic);
    } else {
        out.log_neg_waic = kNan;
    }
    return out;
}

ConvergenceReport assess_convergence(const ChainTrace& trace, const WaicResult* w,
                                     const ConvergenceCriteria& crit) {
    ConvergenceReport rep;
    const int n = trace.retained();
    if (n < crit.min_retained) {
        rep.reason = "only " + std::to_string(n) + " retained iterations (need " +
                     std::to_string(crit.min_retained) + ")";
        return rep;
    }

    const double* post = trace.loglik.data() + trace.burn_in;
    const int half = n / 2;
    const BatchMean a = batch_mean(post, half, crit.batches_per_half);
    const BatchMean b = batch_mean(post + (n - half), half, crit.batches_per_half);
    if (!a.ok || !b.ok) {
        rep.reason = "retained series too short for batch means";
        return rep;
    }
    const double pooled = std::sqrt(a.se * a.se + b.se * b.se);
    const double gap = std::abs(a.mean - b.mean);
    rep.split_z = pooled > 0.0 ? gap / pooled : (gap > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);

    long long lab_acc = 0;
    std::vector<long long> att(static_cast<std::size_t>(trace.k) + 1, 0);
    std::vector<long long> acc(static_cast<std::size_t>(trace.k) + 1, 0);
    for (int t = trace.burn_in; t < trace.iters; ++t) {
        for (const std::uint8_t f : trace.label_accept[t]) lab_acc += f;
        for (int c = 0; c <= trace.k; ++c) {
            const std::int8_t f = trace.rho_accept[t][c];
            if (f < 0) continue;
            ++att[c];
            acc[c] += f;
        }
    }
    if (lab_acc == 0) rep.zero_acceptance_block = true;
    for (int c = 0; c <= trace.k; ++c)
        if (att[c] > 0 && acc[c] == 0) rep.zero_acceptance_block = true;

    rep.waic_usable = w != nullptr && w->log_neg_defined;

    if (rep.zero_acceptance_block) {
        rep.reason = "an update block accepted nothing after burn-in";
    } else if (rep.split_z > crit.z_threshold) {
        rep.reason = "log-likelihood halves disagree (z = " + std::to_string(rep.split_z) + ")";
    } else if (crit.require_negative_waic && !rep.waic_usable) {
        rep.reason = w == nullptr ? "no WAIC available" : "WAIC is nonnegative";
    } else {
        rep.converged = true;
    }
    return rep;
}

KScanResult k_scan(const likelihood::EdgeData& data, const MHConfig& base,
                   const std::vector<int>& ks, int threads,
                   const ConvergenceCriteria& crit) {
    if (ks.empty()) throw std::invalid_argument("no candidate class counts given");
    const int v = core::nodes_from_edges(data.e());
    if (v < 0) throw std::invalid_argument("feature count is not v*(v-1)/2 for any node count");

    std::vector<int> sorted = ks;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

    KScanResult out;
    out.rows.resize(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        KScanRow& row = out.rows[i];
        row.k = sorted[i];
        row.runnable = row.k >= 1 && 2 * row.k <= v;
        row.feasible_strict = row.k >= 1 && 3 * row.k <= v;
        if (!row.runnable)
            row.note = "skipped: cannot seat 2 nodes per class with v = " + std::to_string(v);
    }

    std::atomic<std::size_t> next{0};
    std::vector<std::string> errors(sorted.size());
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= sorted.size()) return;
            KScanRow& row = out.rows[i];
            if (!row.runnable) continue;
            try {
                MHConfig cfg = base;
                cfg.k = row.k;
                cfg.seed = mix_seed(base.seed, static_cast<std::uint64_t>(row.k));
                cfg.stream = base.stream;
                cfg.record_pointwise = true;
                const ChainResult res = sampler::run_chain(data, cfg);
                row.waic = waic(res.trace.pointwise);
                row.convergence = assess_convergence(res.trace, &row.waic, crit);
                row.converged = row.convergence.converged;
                row.k_hat = res.summary.k_hat;
                row.summary = res.summary;
            } catch (const std::exception& ex) {
                errors[i] = ex.what();
            }
        }
    };

    const int nthreads = std::max(1, std::min<int>(threads, static_cast<int>(sorted.size())));
    if (nthreads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(nthreads);
        for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
        for (std::thread& th : pool) th.join();
    }
    for (std::size_t i = 0; i < sorted.size(); ++i)
        if (!errors[i].empty())
            throw std::runtime_error("chain for k = " + std::to_string(out.rows[i].k) +
                                     " failed: " + errors[i]);

    double best = std::numeric_limits<double>::infinity();
    for (const KScanRow& row : out.rows) {
        if (!row.runnable || !row.converged) continue;
        if (row.waic.waic < best) {
            best = row.waic.waic;
            out.recommended_k = row.k;
        }
    }
    return out;
}

} // namespace edgecov::modelselect
