// Acceptance gate: ten end-to-end criteria at pinned tolerances, one PASS or
// FAIL line each. Exit code is the number of failed criteria.
//
//   edgecov_acceptance [--cli <binary>] [--data <dir>] [--work <dir>] [--only 1,4,10]
//
// Criteria 1-5 run the zero-background regime (identity entry map, background
// 0, ridge 1e-8), the configuration the reference numbers were produced
// under; 6-10 exercise the library defaults and the installed CLI.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "edgecov/core.hpp"
#include "edgecov/covariance.hpp"
#include "edgecov/evaluation.hpp"
#include "edgecov/io.hpp"
#include "edgecov/likelihood.hpp"
#include "edgecov/modelselect.hpp"
#include "edgecov/pipeline.hpp"
#include "edgecov/rng.hpp"
#include "edgecov/sampler.hpp"
#include "edgecov/simgen.hpp"

namespace fs = std::filesystem;

using edgecov::Rng;
using edgecov::covariance::EntryMap;
using edgecov::covariance::Matrix;
using edgecov::covariance::Partition;
using edgecov::covariance::RhoParams;
using edgecov::covariance::Vector;
using nlohmann::json;

namespace {

struct Failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& msg) {
    if (!ok) throw Failure(msg);
}

std::string num(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

class WallTimer {
  public:
    WallTimer() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

  private:
    std::chrono::steady_clock::time_point start_;
};

struct Env {
    std::string cli;
    std::string data = "data";
    std::string work = "acceptance_work";
};

// --- shared recovery driver (zero-background regime) ------------------------

edgecov::sampler::MHConfig zero_bg_config(int k, std::uint64_t seed, int iters = 2500,
                                          int burn = 500) {
    edgecov::sampler::MHConfig cfg;
    cfg.k = k;
    cfg.iters = iters;
    cfg.burn_in = burn;
    cfg.lambda = 1e-8;
    cfg.map = EntryMap::identity;
    cfg.prior_mean = 0.25;
    cfg.prior_sd = 1.0;
    cfg.step_sd = 0.01;
    cfg.seed = seed;
    cfg.fixed_rho0 = 0.0;
    return cfg;
}

struct RecoveryRun {
    edgecov::simgen::GroundTruth gt;
    edgecov::sampler::ChainResult chain;
    edgecov::evaluation::MetricReport metrics;
    double seconds = 0.0;
};

RecoveryRun run_recovery(const std::vector<int>& groups, const std::vector<double>& rho,
                         edgecov::simgen::Arrangement arr, int k, std::uint64_t data_seed,
                         std::uint64_t chain_seed, int iters = 2500, int burn = 500) {
    const WallTimer t;
    RecoveryRun out;
    out.gt = edgecov::simgen::make_ground_truth(groups, rho, 0.0, 1e-8, arr, EntryMap::identity);
    const auto data = edgecov::simgen::generate(out.gt, 632, data_seed);
    const auto cfg = zero_bg_config(k, chain_seed, iters, burn);
    out.chain = edgecov::sampler::run_chain(data, cfg);
    out.metrics = edgecov::evaluation::compute_metrics(out.gt.partition, out.gt.rho, out.gt.map,
                                                       out.chain.summary.map_partition,
                                                       out.chain.summary.rho_hat, cfg.map);
    out.seconds = t.seconds();
    return out;
}

std::string arr_name(edgecov::simgen::Arrangement a) { return edgecov::simgen::to_string(a); }

void check_recovery(const RecoveryRun& r, const std::vector<double>& rho_true, int expect_k_hat,
                    double rho_tol, const std::string& tag) {
    require(r.metrics.misclassification == 0.0,
            tag + ": misclassification " + num(r.metrics.misclassification) + " != 0");
    require(r.chain.summary.k_hat == expect_k_hat,
            tag + ": k_hat " + std::to_string(r.chain.summary.k_hat) + " != " +
                std::to_string(expect_k_hat));
    for (std::size_t t = 0; t < rho_true.size(); ++t) {
        const double est = r.metrics.rho_aligned[t + 1];
        require(std::isfinite(est), tag + ": class " + std::to_string(t + 1) + " unmatched");
        require(std::abs(est - rho_true[t]) <= rho_tol,
                tag + ": rho_" + std::to_string(t + 1) + " " + num(est) + " off truth " +
                    num(rho_true[t]) + " by more than " + num(rho_tol));
    }
}

// --- criteria ----------------------------------------------------------------

void criterion_1(const Env&) {
    const std::vector<double> rho{0.2, 0.4, 0.9};
    for (const auto arr :
         {edgecov::simgen::Arrangement::contiguous, edgecov::simgen::Arrangement::scattered}) {
        const bool contig = arr == edgecov::simgen::Arrangement::contiguous;
        const auto r = run_recovery({3, 3, 4}, rho, arr, 3, contig ? 120 : 149, 1);
        const std::string tag = "10-node " + arr_name(arr);
        require(r.seconds < 120.0, tag + ": took " + num(r.seconds) + "s (budget 120s)");
        check_recovery(r, rho, 3, 0.05, tag);
        require(r.metrics.sensitivity == 1.0,
                tag + ": sensitivity " + num(r.metrics.sensitivity) + " != 1");
        require(r.metrics.specificity == 1.0,
                tag + ": specificity " + num(r.metrics.specificity) + " != 1");
    }
}

void criterion_2(const Env&) {
    struct Case {
        std::vector<int> groups;
        std::vector<double> rho;
        edgecov::simgen::Arrangement arr;
        int k;
        int expect_k_hat;
        std::uint64_t data_seed;
        std::uint64_t chain_seed;
    };
    const std::vector<Case> cases{
        {{4, 4, 4, 4, 4}, {0.2, 0.4, 0.6, 0.8, 0.9}, edgecov::simgen::Arrangement::contiguous, 6,
         5, 127, 1},
        {{4, 4, 4, 4, 4}, {0.2, 0.4, 0.6, 0.8, 0.9}, edgecov::simgen::Arrangement::scattered, 6,
         5, 103, 9},
        {{5, 5, 5, 5, 5, 5}, {0.001, 0.2, 0.4, 0.5, 0.6, 0.8},
         edgecov::simgen::Arrangement::contiguous, 7, 6, 131, 1},
        {{5, 5, 5, 5, 5, 5}, {0.001, 0.2, 0.4, 0.5, 0.6, 0.8},
         edgecov::simgen::Arrangement::scattered, 6, 6, 138, 1},
    };
    for (const auto& c : cases) {
        const auto r = run_recovery(c.groups, c.rho, c.arr, c.k, c.data_seed, c.chain_seed);
        const std::string tag =
            std::to_string(c.groups.size() * c.groups[0]) + "-node " + arr_name(c.arr);
        require(r.seconds < 600.0, tag + ": took " + num(r.seconds) + "s (budget 600s)");
        check_recovery(r, c.rho, c.expect_k_hat, 0.05, tag);
        require(r.metrics.normalized_l1 < 0.001,
                tag + ": normalized L1 " + num(r.metrics.normalized_l1) + " >= 0.001");
        require(r.metrics.frobenius < 0.01,
                tag + ": Frobenius error " + num(r.metrics.frobenius) + " >= 0.01");
    }
}

void criterion_3(const Env&) {
    const std::vector<double> rho{0.001, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7};
    const auto r = run_recovery({5, 5, 5, 5, 5, 5, 5, 5}, rho,
                                edgecov::simgen::Arrangement::contiguous, 9, 122, 2);
    require(r.seconds < 1800.0, "40-node: took " + num(r.seconds) + "s (budget 1800s)");
    check_recovery(r, rho, 8, 0.05, "40-node contiguous");
    require(r.metrics.normalized_l1 < 0.0005,
            "40-node: normalized L1 " + num(r.metrics.normalized_l1) + " >= 0.0005");
}

void criterion_4(const Env&) {
    int hits = 0;
    std::vector<int> k_hats;
    for (int rep = 1; rep <= 10; ++rep) {
        const auto gt = edgecov::simgen::make_ground_truth({3, 3, 4}, {0.2, 0.4, 0.9}, 0.0, 1e-8,
                                                           edgecov::simgen::Arrangement::contiguous,
                                                           EntryMap::identity);
        const auto data = edgecov::simgen::generate(gt, 632, 500 + rep);
        const auto chain = edgecov::sampler::run_chain(data, zero_bg_config(4, rep));
        k_hats.push_back(chain.summary.k_hat);
        if (chain.summary.k_hat == 3) ++hits;
    }
    std::string seen;
    for (int k : k_hats) seen += std::to_string(k);
    require(hits >= 8, "surplus class vanished in only " + std::to_string(hits) +
                           "/10 replicates (k_hats " + seen + ")");
}

void criterion_5(const Env&) {
    const auto gt = edgecov::simgen::make_ground_truth({3, 3, 4}, {0.2, 0.4, 0.9}, 0.0, 1e-8,
                                                       edgecov::simgen::Arrangement::contiguous,
                                                       EntryMap::identity);
    const auto data = edgecov::simgen::generate(gt, 632, 777);
    auto base = zero_bg_config(2, 3);
    edgecov::modelselect::ConvergenceCriteria crit;
    crit.require_negative_waic = true; // the reference tables blank out rows whose
                                       // log(-WAIC) does not exist
    const auto scan = edgecov::modelselect::k_scan(data, base, {2, 3, 4}, 1, crit);
    require(scan.rows.size() == 3, "expected three scan rows");
    const auto& r2 = scan.rows[0];
    const auto& r3 = scan.rows[1];
    const auto& r4 = scan.rows[2];
    require(!r2.converged, "k=2 should be flagged non-converged");
    require(r3.converged, "k=3 did not converge: " + r3.convergence.reason);
    require(r4.converged, "k=4 did not converge: " + r4.convergence.reason);
    require(r3.k_hat == 3, "k=3 row k_hat " + std::to_string(r3.k_hat) + " != 3");
    require(r4.k_hat == 3, "k=4 row k_hat " + std::to_string(r4.k_hat) + " != 3");
    const double rel = std::abs(r3.waic.waic - r4.waic.waic) / std::abs(r3.waic.waic);
    require(rel <= 0.001,
            "converged WAICs disagree by " + num(100 * rel) + "% (allowed 0.1%)");
    const double target = 12.917506;
    for (const auto* row : {&r3, &r4}) {
        require(row->waic.log_neg_defined,
                "k=" + std::to_string(row->k) + " WAIC is not negative");
        require(std::abs(row->waic.log_neg_waic - target) <= 0.01,
                "k=" + std::to_string(row->k) + " log(-WAIC) " + num(row->waic.log_neg_waic) +
                    " not within 0.01 of " + num(target));
    }
}

void criterion_6(const Env&) {
    Rng rng = edgecov::make_rng(913);
    int failures = 0;
    std::string first;
    for (int rep = 0; rep < 500; ++rep) {
        const int v = 4 + edgecov::rint(rng, 37);
        const int e = edgecov::core::edge_count(v);
        const int kmax = 1 + edgecov::rint(rng, 6);
        std::vector<int> labels(v);
        for (int& l : labels) l = 1 + edgecov::rint(rng, kmax);
        const auto part = Partition::from_labels(labels, kmax);
        const EntryMap map = rep % 2 == 0 ? EntryMap::identity : EntryMap::exponential;
        std::vector<double> vals(kmax + 1);
        if (map == EntryMap::identity) {
            vals[0] = edgecov::runif(rng, 0.0, 0.5);
            for (int c = 1; c <= kmax; ++c) vals[c] = vals[0] + edgecov::runif(rng, 0.01, 1.0);
        } else {
            vals[0] = edgecov::runif(rng, 0.5, 2.0);
            for (int c = 1; c <= kmax; ++c) vals[c] = edgecov::runif(rng, 0.01, vals[0] - 0.05);
        }
        const auto rho = RhoParams::of(vals);
        const double lambda = std::exp(edgecov::runif(rng, std::log(1e-4), 0.0));
        const auto sc = edgecov::covariance::build_structured(part, rho, lambda, v, map);
        require(edgecov::covariance::is_positive_definite(sc).ok,
                "draw " + std::to_string(rep) + " unexpectedly not positive definite");

        Matrix a(e, e);
        for (int r = 0; r < e; ++r)
            for (int c = 0; c < e; ++c) a(r, c) = edgecov::rnorm(rng);
        const Matrix h = (a * a.transpose() / e).eval();
        const auto oracle = edgecov::covariance::dense_oracle(sc, h);
        const double ld = edgecov::covariance::logdet(sc);
        const double tq = edgecov::covariance::trace_quad(sc, h);
        const double ld_err = std::abs(ld - oracle.logdet) / std::abs(oracle.logdet);
        const double tq_err = std::abs(tq - oracle.trace_quad) / std::abs(oracle.trace_quad);
        if (ld_err > 1e-8 || tq_err > 1e-8) {
            ++failures;
            if (first.empty())
                first = "draw " + std::to_string(rep) + ": logdet rel " + num(ld_err) +
                        ", trace rel " + num(tq_err);
        }
    }
    require(failures == 0, std::to_string(failures) + "/500 disagreed with the oracle (" +
                               first + ")");
}

void criterion_7(const Env&) {
    // Acceptance kernel frequency against the analytic probability.
    {
        Rng rng = edgecov::make_rng(41);
        const double alpha = 0.3;
        int acc = 0;
        const int trials = 100000;
        for (int t = 0; t < trials; ++t)
            if (edgecov::sampler::mh_accept(std::log(alpha), rng)) ++acc;
        const double freq = static_cast<double>(acc) / trials;
        require(std::abs(freq - alpha) <= 0.01,
                "acceptance frequency " + num(freq) + " vs analytic 0.3");
    }

    // Seed determinism: identical configurations give identical chains.
    const auto gt = edgecov::simgen::make_ground_truth({3, 3, 4}, {0.2, 0.4, 0.9}, 1.5, 0.01);
    const auto data = edgecov::simgen::generate(gt, 200, 71);
    edgecov::sampler::MHConfig cfg;
    cfg.k = 3;
    cfg.iters = 400;
    cfg.burn_in = 100;
    cfg.seed = 9;
    const auto c1 = edgecov::sampler::run_chain(data, cfg);
    const auto c2 = edgecov::sampler::run_chain(data, cfg);
    require(c1.trace.loglik == c2.trace.loglik, "loglik traces diverged on identical seeds");
    require(c1.trace.labels == c2.trace.labels, "label traces diverged on identical seeds");
    require(c1.trace.rho == c2.trace.rho, "rho traces diverged on identical seeds");

    // Rejection immutability: a rejected move leaves the state bitwise intact.
    {
        edgecov::sampler::SweepContext ctx(data, cfg);
        Rng rng = edgecov::make_rng(17);
        edgecov::sampler::ChainState st;
        st.partition = edgecov::sampler::init_partition(10, 3, rng);
        st.rho = RhoParams::of({1.5, 0.3, 0.5, 0.8});
        const auto ev = ctx.evaluate(st.partition, st.rho);
        require(ev.pd, "starting state should be positive definite");
        st.loglik = ev.loglik;
        st.logdet = ev.logdet;
        st.trace_quad = ev.trace_quad;
        int rejections = 0;
        for (int t = 0; t < 400; ++t) {
            const int node = edgecov::rint(rng, 10);
            const auto [prop, q] = edgecov::sampler::propose_label(st, node, rng);
            (void)q;
            const auto labels_before = st.partition.labels;
            const double ll_before = st.loglik;
            const bool acc = edgecov::sampler::accept_label(ctx, st, node, prop, rng);
            if (!acc) {
                ++rejections;
                require(st.partition.labels == labels_before,
                        "rejected label move altered the partition");
                require(st.loglik == ll_before, "rejected label move altered the log likelihood");
            }
            const int coord = edgecov::rint(rng, 4);
            if (coord > 0 && st.partition.class_sizes()[coord] == 0) continue;
            const double prop_rho = edgecov::sampler::propose_rho(st, coord, 0.05, rng);
            const auto rho_before = st.rho.values;
            const double ll_before2 = st.loglik;
            if (!edgecov::sampler::accept_rho(ctx, st, coord, prop_rho, rng)) {
                ++rejections;
                require(st.rho.values == rho_before, "rejected rho move altered rho");
                require(st.loglik == ll_before2, "rejected rho move altered the log likelihood");
            }
        }
        require(rejections > 20, "too few rejections to exercise immutability");
    }

    // Vanishing monotonicity: once a class empties it never refills.
    {
        const auto chain = edgecov::sampler::run_chain(data, [&] {
            auto c = cfg;
            c.k = 4;
            c.iters = 600;
            c.burn_in = 150;
            c.seed = 3;
            return c;
        }());
        for (int cls = 1; cls <= 4; ++cls) {
            bool vanished = false;
            for (const auto& labels : chain.trace.labels) {
                const bool empty =
                    std::none_of(labels.begin(), labels.end(), [&](int l) { return l == cls; });
                if (vanished)
                    require(empty, "class " + std::to_string(cls) + " refilled after vanishing");
                vanished = vanished || empty;
            }
        }
    }

    // Label-permutation invariance of the likelihood.
    {
        Rng rng = edgecov::make_rng(55);
        for (int rep = 0; rep < 20; ++rep) {
            const int v = 6 + edgecov::rint(rng, 8);
            const int kmax = 2 + edgecov::rint(rng, 3);
            std::vector<int> labels(v);
            for (int& l : labels) l = 1 + edgecov::rint(rng, kmax);
            std::vector<int> perm(kmax);
            for (int c = 0; c < kmax; ++c) perm[c] = c + 1;
            for (int c = kmax - 1; c > 0; --c) std::swap(perm[c], perm[edgecov::rint(rng, c + 1)]);
            std::vector<int> relabeled(v);
            for (int i = 0; i < v; ++i) relabeled[i] = perm[labels[i] - 1];
            std::vector<double> vals(kmax + 1);
            vals[0] = edgecov::runif(rng, 1.0, 2.0);
            for (int c = 1; c <= kmax; ++c) vals[c] = edgecov::runif(rng, 0.1, 0.9);
            std::vector<double> pvals(kmax + 1);
            pvals[0] = vals[0];
            for (int c = 1; c <= kmax; ++c) pvals[perm[c - 1]] = vals[c];
            const int e = edgecov::core::edge_count(v);
            Matrix r(12, e);
            for (int i = 0; i < 12; ++i)
                for (int j = 0; j < e; ++j) r(i, j) = edgecov::rnorm(rng);
            const auto ed = edgecov::likelihood::EdgeData::from_r(r);
            const auto sc1 = edgecov::covariance::build_structured(
                Partition::from_labels(labels, kmax), RhoParams::of(vals), 0.01, v,
                EntryMap::exponential);
            const auto sc2 = edgecov::covariance::build_structured(
                Partition::from_labels(relabeled, kmax), RhoParams::of(pvals), 0.01, v,
                EntryMap::exponential);
            const double l1 = edgecov::likelihood::loglik(ed.h, ed.s(), sc1);
            const double l2 = edgecov::likelihood::loglik(ed.h, ed.s(), sc2);
            require(std::abs(l1 - l2) <= 1e-10 * std::abs(l1),
                    "relabeling moved the log likelihood: " + num(l1) + " vs " + num(l2));
        }
    }
}

void criterion_8(const Env&) {
    Rng rng = edgecov::make_rng(88);
    for (int rep = 0; rep < 50; ++rep) {
        const int v = 4 + edgecov::rint(rng, 11);
        const int e = edgecov::core::edge_count(v);
        const int s = 3 + edgecov::rint(rng, 18);
        const int kmax = 1 + edgecov::rint(rng, 4);
        std::vector<int> labels(v);
        for (int& l : labels) l = 1 + edgecov::rint(rng, kmax);
        std::vector<double> vals(kmax + 1);
        vals[0] = edgecov::runif(rng, 1.0, 2.0);
        for (int c = 1; c <= kmax; ++c) vals[c] = edgecov::runif(rng, 0.1, 0.9);
        const double lambda = std::exp(edgecov::runif(rng, std::log(1e-4), 0.0));
        const auto sc = edgecov::covariance::build_structured(
            Partition::from_labels(labels, kmax), RhoParams::of(vals), lambda, v,
            EntryMap::exponential);
        Matrix r(s, e);
        for (int i = 0; i < s; ++i)
            for (int j = 0; j < e; ++j) r(i, j) = edgecov::rnorm(rng);
        const auto ed = edgecov::likelihood::EdgeData::from_r(r);
        const double from_h = edgecov::likelihood::loglik(ed.h, s, sc);
        double by_rows = 0.0;
        for (int i = 0; i < s; ++i)
            by_rows += edgecov::likelihood::loglik_subject(ed.r.row(i).transpose(), sc);
        require(std::abs(from_h - by_rows) <= 1e-9 * std::abs(from_h),
                "draw " + std::to_string(rep) + ": H path " + num(from_h) + " vs row path " +
                    num(by_rows));
    }
}

void criterion_9(const Env&) {
    const double tol = 1e-12;
    // Degenerate posterior: identical draws, zero penalty.
    {
        Matrix pw(3, 4);
        const double c[4] = {-1.5, 0.25, 2.0, -3.75};
        for (int t = 0; t < 3; ++t)
            for (int i = 0; i < 4; ++i) pw(t, i) = c[i];
        const auto w = edgecov::modelselect::waic(pw);
        double sum = 0.0;
        for (double x : c) sum += x;
        require(std::abs(w.penalty) <= tol, "degenerate penalty " + num(w.penalty) + " != 0");
        require(std::abs(w.waic - (-2.0 * sum)) <= tol,
                "degenerate WAIC " + num(w.waic) + " != " + num(-2.0 * sum));
    }
    // Two draws per subject: closed-form lppd and variance.
    {
        const double a[3] = {-1.0, 0.5, 3.0};
        const double b[3] = {-2.0, 0.5, -4.0};
        Matrix pw(2, 3);
        for (int i = 0; i < 3; ++i) {
            pw(0, i) = a[i];
            pw(1, i) = b[i];
        }
        const auto w = edgecov::modelselect::waic(pw);
        double lppd = 0.0, var = 0.0;
        for (int i = 0; i < 3; ++i) {
            const double mx = std::max(a[i], b[i]);
            lppd += mx + std::log((std::exp(a[i] - mx) + std::exp(b[i] - mx)) / 2.0);
            var += (a[i] - b[i]) * (a[i] - b[i]) / 2.0;
        }
        const double expect = -2.0 * lppd + 2.0 * var;
        require(std::abs(w.lppd - lppd) <= tol, "two-draw lppd " + num(w.lppd) + " != " + num(lppd));
        require(std::abs(w.penalty - var) <= tol,
                "two-draw penalty " + num(w.penalty) + " != " + num(var));
        require(std::abs(w.waic - expect) <= tol,
                "two-draw WAIC " + num(w.waic) + " != " + num(expect));
    }
}

void criterion_10(const Env& env) {
    require(!env.cli.empty(), "no CLI binary given (pass --cli)");
    const std::string features = (fs::path(env.data) / "synthetic_features.csv").string();
    require(fs::exists(features), "bundled feature table missing: " + features);
    const std::string out = (fs::path(env.work) / "bundled_fit").string();
    fs::remove_all(out);
    fs::create_directories(env.work);
    const std::string log = (fs::path(env.work) / "bundled_fit.log").string();
    const std::string cmd = "\"" + env.cli + "\" infer --input-features \"" + features +
                            "\" --k 5 --seed 1 --out \"" + out + "\" > \"" + log + "\" 2>&1";
    const int rc = std::system(cmd.c_str());
    require(rc == 0, "CLI exited with status " + std::to_string(rc) + " (see " + log + ")");

    const json res = edgecov::io::load_json(out + "/result.json");
    require(res.at("k_hat").get<int>() == 3,
            "k_hat " + std::to_string(res.at("k_hat").get<int>()) + " != 3");
    require(res.at("convergence").at("converged").get<bool>(),
            "chain flagged non-converged: " +
                res.at("convergence").at("reason").get<std::string>());
    const auto rho = res.at("rho_hat").at("values").get<std::vector<double>>();
    const auto vanished = res.at("vanished").get<std::vector<int>>();
    const double cross = std::exp(-rho[0]);
    int survivors = 0;
    for (std::size_t c = 1; c < rho.size(); ++c) {
        if (vanished[c]) continue;
        ++survivors;
        const double within = std::exp(-rho[c]);
        require(within > cross, "class " + std::to_string(c) + " within strength " +
                                    num(within) + " not above cross strength " + num(cross));
    }
    require(survivors == 3, std::to_string(survivors) + " surviving classes, expected 3");
}

struct Criterion {
    int id;
    std::string name;
    std::function<void(const Env&)> fn;
};

} // namespace

int main(int argc, char** argv) {
    Env env;
    std::set<int> only;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        auto next = [&]() -> std::string {
            if (i + 1 >= argc) {
                std::fprintf(stderr, "error: %s needs a value\n", arg.c_str());
                std::exit(64);
            }
            return argv[++i];
        };
        if (arg == "--cli") {
            env.cli = next();
        } else if (arg == "--data") {
            env.data = next();
        } else if (arg == "--work") {
            env.work = next();
        } else if (arg == "--only") {
            std::string v = next();
            for (std::size_t p = 0; p < v.size();) {
                const std::size_t q = v.find(',', p);
                only.insert(std::stoi(v.substr(p, q - p)));
                p = q == std::string::npos ? v.size() : q + 1;
            }
        } else {
            std::fprintf(stderr, "error: unknown argument %s\n", arg.c_str());
            return 64;
        }
    }

    const std::vector<Criterion> criteria{
        {1, "10-node recovery, both layouts", criterion_1},
        {2, "20- and 30-node recovery at the reference settings", criterion_2},
        {3, "40-node recovery with one surplus class", criterion_3},
        {4, "surplus class vanishes in 8 of 10 replicates", criterion_4},
        {5, "class-count scan: shape and log(-WAIC) level", criterion_5},
        {6, "structured backend vs dense oracle, 500 draws", criterion_6},
        {7, "sampler contract suite", criterion_7},
        {8, "H-matrix vs row-by-row likelihood identity", criterion_8},
        {9, "WAIC closed forms", criterion_9},
        {10, "bundled feature table through the CLI", criterion_10},
    };

    int failures = 0;
    int ran = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && only.count(c.id) == 0) continue;
        ++ran;
        const WallTimer t;
        try {
            c.fn(env);
            std::printf("PASS %2d  %-55s %7.1fs\n", c.id, c.name.c_str(), t.seconds());
        } catch (const std::exception& e) {
            ++failures;
            std::printf("FAIL %2d  %-55s %7.1fs  %s\n", c.id, c.name.c_str(), t.seconds(),
                        e.what());
        }
        std::fflush(stdout);
    }
    std::printf("%d/%d criteria passed\n", ran - failures, ran);
    return failures;
}
