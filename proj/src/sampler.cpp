#include "edgecov/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace edgecov::sampler {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double normal_logpdf(double x, double mean, double sd) {
    const double z = (x - mean) / sd;
    return -0.5 * kLog2Pi - std::log(sd) - 0.5 * z * z;
}

std::vector<int> shuffled_nodes(int v, Rng& rng) {
    std::vector<int> ids(v);
    std::iota(ids.begin(), ids.end(), 0);
    for (int i = v - 1; i > 0; --i) {
        const int j = rint(rng, i + 1);
        std::swap(ids[i], ids[j]);
    }
    return ids;
}

} // namespace

SweepContext::SweepContext(const EdgeData& data, const MHConfig& cfg)
    : data_(&data), cfg_(cfg) {
    e_ = data.e();
    v_ = core::nodes_from_edges(e_);
    if (v_ < 0)
        throw std::invalid_argument("feature count " + std::to_string(e_) +
                                    " is not v*(v-1)/2 for any node count");
    if (cfg.k < 1) throw std::invalid_argument("k must be at least 1");
    if (cfg.lambda <= 0.0) throw std::invalid_argument("lambda must be positive");
    if (cfg.prior_sd <= 0.0) throw std::invalid_argument("prior_sd must be positive");
    if (cfg.step_sd < 0.0) throw std::invalid_argument("step_sd must be nonnegative");
    if (cfg.burn_in < 0 || cfg.iters <= cfg.burn_in)
        throw std::invalid_argument("need 0 <= burn_in < iters");
    tr_h_ = data.h.trace();
    rowsums_ = data.h.rowwise().sum();
    grand_ = rowsums_.sum();
    subj_sum_ = data.r.rowwise().sum();
    subj_sqn_ = data.r.rowwise().squaredNorm();
}

void SweepContext::refresh_blocks(const Partition& partition) {
    if (!cached_labels_.empty() && cached_labels_ == partition.labels) return;
    stats_ = covariance::compute_block_stats(partition, v_);
    const int kmax = partition.kmax;
    block_rowsum_ = Vector::Zero(kmax + 1);
    block_pair_ = Matrix::Zero(kmax + 1, kmax + 1);
    for (int c = 1; c <= kmax; ++c) {
        const std::vector<int>& mem = stats_.members[c];
        if (mem.empty()) continue;
        double rs = 0.0;
        for (int a : mem) rs += rowsums_(a);
        block_rowsum_(c) = rs;
        for (int d = 1; d <= c; ++d) {
            const std::vector<int>& memd = stats_.members[d];
            if (memd.empty()) continue;
            double acc = 0.0;
            for (int a : mem)
                for (int b : memd) acc += data_->h(a, b);
            block_pair_(c, d) = acc;
            block_pair_(d, c) = acc;
        }
    }
    cached_labels_ = partition.labels;
}

SweepContext::Eval SweepContext::evaluate(const Partition& partition, const RhoParams& rho) {
    refresh_blocks(partition);
    Eval out;
    const covariance::EntryValues values = covariance::map_entry_values(rho, cfg_.map);
    const covariance::PdReport pd = covariance::pd_check(stats_, values, cfg_.lambda);
    if (!pd.ok) {
        out.loglik = kNegInf;
        return out;
    }
    const covariance::SmallCore core = covariance::build_small_core(stats_, values);
    const double ld = covariance::logdet_from_core(core, cfg_.lambda, e_);
    double tq;
    if (core.p == 0) {
        tq = tr_h_ / cfg_.lambda;
    } else {
        Matrix t(core.p, core.p);
        const int off = core.has_ones ? 1 : 0;
        const int nb = static_cast<int>(core.cls.size());
        if (core.has_ones) {
            t(0, 0) = grand_;
            for (int j = 0; j < nb; ++j) {
                t(0, off + j) = block_rowsum_(core.cls[j]);
                t(off + j, 0) = t(0, off + j);
            }
        }
        for (int a = 0; a < nb; ++a)
            for (int b = 0; b < nb; ++b)
                t(off + a, off + b) = block_pair_(core.cls[a], core.cls[b]);
        const covariance::WoodburyCore wb = covariance::build_woodbury(core, cfg_.lambda);
        tq = covariance::trace_from_core(wb, tr_h_, t);
    }
    const double s = static_cast<double>(data_->s());
    out.logdet = ld;
    out.trace_quad = tq;
    out.loglik = -0.5 * s * e_ * kLog2Pi - 0.5 * s * (ld + tq);
    out.pd = true;
    return out;
}

Vector SweepContext::pointwise(const Partition& partition, const RhoParams& rho) {
    refresh_blocks(partition);
    const covariance::EntryValues values = covariance::map_entry_values(rho, cfg_.map);
    const covariance::PdReport pd = covariance::pd_check(stats_, values, cfg_.lambda);
    if (!pd.ok)
        throw std::invalid_argument(
            "per-subject densities need a positive-definite covariance: " + pd.diagnostic);
    const covariance::SmallCore core = covariance::build_small_core(stats_, values);
    const double ld = covariance::logdet_from_core(core, cfg_.lambda, e_);
    const int s = data_->s();
    const double lam = cfg_.lambda;
    Vector quad;
    if (core.p == 0) {
        quad = subj_sqn_ / lam;
    } else {
        Matrix y(s, core.p);
        int col = 0;
        if (core.has_ones) y.col(col++) = subj_sum_;
        for (int c : core.cls) {
            Vector acc = Vector::Zero(s);
            for (int a : stats_.members[c]) acc += data_->r.col(a);
            y.col(col++) = acc;
        }
        const covariance::WoodburyCore wb = covariance::build_woodbury(core, lam);
        const Matrix z = wb.lu.solve(y.transpose()); // p x s
        const Vector corr = y.transpose().cwiseProduct(z).colwise().sum().transpose();
        quad = subj_sqn_ / lam - corr / (lam * lam);
    }
    const double base = -0.5 * e_ * kLog2Pi - 0.5 * ld;
    return Vector::Constant(s, base) - 0.5 * quad;
}

Partition init_partition(int v, int k, Rng& rng) {
    if (k < 1) throw std::invalid_argument("k must be at least 1");
    if (3 * k > v)
        throw std::invalid_argument("k = " + std::to_string(k) + " needs 3k <= v nodes, got v = " +
                                    std::to_string(v));
    std::vector<int> ids = shuffled_nodes(v, rng);
    std::vector<int> labels(v, 0);
    int pos = 0;
    for (int c = 1; c <= k; ++c)
        for (int t = 0; t < 3; ++t) labels[ids[pos++]] = c;
    for (; pos < v; ++pos) labels[ids[pos]] = rint(rng, k) + 1;
    return Partition::from_labels(std::move(labels), k);
}

Partition init_partition_relaxed(int v, int k, Rng& rng) {
    if (k < 1) throw std::invalid_argument("k must be at least 1");
    if (2 * k > v)
        throw std::invalid_argument("k = " + std::to_string(k) +
                                    " cannot seat 2 nodes per class with v = " + std::to_string(v));
    std::vector<int> ids = shuffled_nodes(v, rng);
    std::vector<int> labels(v, 0);
    const int base = v / k;
    const int extra = v % k;
    int pos = 0;
    for (int c = 1; c <= k; ++c) {
        const int size = base + (c <= extra ? 1 : 0);
        for (int t = 0; t < size; ++t) labels[ids[pos++]] = c;
    }
    return Partition::from_labels(std::move(labels), k);
}

RhoParams init_rho(int k, const MHConfig& cfg, Rng& rng) {
    if (cfg.rho_init_min > cfg.rho_init_max)
        throw std::invalid_argument("rho_init_min exceeds rho_init_max");
    std::vector<double> vals(static_cast<std::size_t>(k) + 1);
    for (int c = 0; c <= k; ++c) vals[c] = runif(rng, cfg.rho_init_min, cfg.rho_init_max);
    if (cfg.fixed_rho0) vals[0] = *cfg.fixed_rho0;
    return RhoParams::of(std::move(vals));
}

std::pair<int, double> propose_label(const ChainState& state, int node, Rng& rng,
                                     const std::vector<int>* class_order) {
    const Partition& p = state.partition;
    const int v = p.v();
    if (node < 0 || node >= v) throw std::out_of_range("node index out of range");
    std::vector<int> sizes = p.class_sizes();
    sizes[p.labels[node]] -= 1;
    const double denom = static_cast<double>(v - 1);
    std::vector<int> order;
    if (class_order != nullptr) {
        order = *class_order;
    } else {
        order.resize(p.kmax);
        std::iota(order.begin(), order.end(), 1);
    }
    const double u = runif(rng);
    double acc = 0.0;
    int last = -1;
    for (int c : order) {
        if (sizes[c] == 0) continue;
        const double q = sizes[c] / denom;
        if (u < acc + q) return {c, q};
        acc += q;
        last = c;
    }
    // The masses sum to 1 exactly in exact arithmetic; only floating-point
    // residue can land here, in which case the final nonempty class takes it.
    return {last, sizes[last] / denom};
}

bool mh_accept(double log_ratio, Rng& rng) {
    if (std::isnan(log_ratio)) throw std::logic_error("NaN log acceptance ratio");
    const double alpha = std::exp(std::min(0.0, log_ratio));
    const double u = runif(rng);
    return alpha > u;
}

bool accept_label(SweepContext& ctx, ChainState& state, int node, int proposed, Rng& rng) {
    if (node < 0 || node >= state.partition.v()) throw std::out_of_range("node index out of range");
    if (proposed < 1 || proposed > state.partition.kmax)
        throw std::out_of_range("proposed class out of range");
    const int current = state.partition.labels[node];
    if (proposed == current) return true; // self-move: accepted, no uniform spent
    Partition cand = state.partition;
    cand.labels[node] = proposed;
    const SweepContext::Eval ev = ctx.evaluate(cand, state.rho);
    const bool ok = mh_accept(ev.loglik - state.loglik, rng);
    if (ok) {
        state.partition = std::move(cand);
        state.loglik = ev.loglik;
        state.logdet = ev.logdet;
        state.trace_quad = ev.trace_quad;
        ++state.version;
    }
    return ok;
}

double propose_rho(const ChainState& state, int k, double step_sd, Rng& rng) {
    if (k < 0 || k > state.rho.k()) throw std::out_of_range("rho index out of range");
    return state.rho.values[k] + rnorm(rng, 0.0, step_sd);
}

bool accept_rho(SweepContext& ctx, ChainState& state, int k, double proposed, Rng& rng) {
    if (k < 0 || k > state.rho.k()) throw std::out_of_range("rho index out of range");
    const MHConfig& cfg = ctx.cfg();
    RhoParams cand = state.rho;
    cand.values[k] = proposed;
    const SweepContext::Eval ev = ctx.evaluate(state.partition, cand);
    const double lp_cur = normal_logpdf(state.rho.values[k], cfg.prior_mean, cfg.prior_sd);
    const double lp_new = normal_logpdf(proposed, cfg.prior_mean, cfg.prior_sd);
    const bool ok = mh_accept((ev.loglik + lp_new) - (state.loglik + lp_cur), rng);
    if (ok) {
        state.rho = std::move(cand);
        state.loglik = ev.loglik;
        state.logdet = ev.logdet;
        state.trace_quad = ev.trace_quad;
        ++state.version;
    }
    return ok;
}

ChainResult run_chain(const EdgeData& data, const MHConfig& cfg) {
    SweepContext ctx(data, cfg);
    const int v = ctx.v();
    const int k = cfg.k;
    Rng rng(mix_seed(cfg.seed, cfg.stream));

    ChainState state;
    if (cfg.init_partition) {
        const Partition& ip = *cfg.init_partition;
        if (ip.v() != v)
            throw std::invalid_argument("initial partition has " + std::to_string(ip.v()) +
                                        " nodes but the data implies " + std::to_string(v));
        if (ip.kmax != k)
            throw std::invalid_argument("initial partition allows " + std::to_string(ip.kmax) +
                                        " classes but the config says k = " + std::to_string(k));
        state.partition = Partition::from_labels(ip.labels, k);
    } else if (3 * k <= v) {
        state.partition = init_partition(v, k, rng);
    } else if (2 * k <= v) {
        state.partition = init_partition_relaxed(v, k, rng);
    } else {
        throw std::invalid_argument("k = " + std::to_string(k) +
                                    " cannot seat 2 nodes per class with v = " + std::to_string(v));
    }

    const bool explicit_rho = cfg.init_rho.has_value();
    if (explicit_rho) {
        if (cfg.init_rho->k() != k)
            throw std::invalid_argument("initial rho has " + std::to_string(cfg.init_rho->k()) +
                                        " class entries but the config says k = " +
                                        std::to_string(k));
        if (cfg.fixed_rho0 && cfg.init_rho->rho0() != *cfg.fixed_rho0)
            throw std::invalid_argument("initial rho contradicts the pinned background value");
        state.rho = *cfg.init_rho;
    } else {
        state.rho = init_rho(k, cfg, rng);
    }

    SweepContext::Eval ev = ctx.evaluate(state.partition, state.rho);
    if (!ev.pd && !explicit_rho) {
        for (int tries = 0; tries < 1000 && !ev.pd; ++tries) {
            state.rho = init_rho(k, cfg, rng);
            ev = ctx.evaluate(state.partition, state.rho);
        }
    }
    if (!ev.pd) {
        const covariance::BlockStats st = covariance::compute_block_stats(state.partition, v);
        const covariance::EntryValues vals = covariance::map_entry_values(state.rho, cfg.map);
        const covariance::PdReport pd = covariance::pd_check(st, vals, cfg.lambda);
        throw std::invalid_argument(
            std::string(explicit_rho
                            ? "initial rho gives a non-positive-definite covariance: "
                            : "no positive-definite initial rho found in 1000 draws: ") +
            pd.diagnostic);
    }
    state.loglik = ev.loglik;
    state.logdet = ev.logdet;
    state.trace_quad = ev.trace_quad;

    ChainTrace trace;
    trace.v = v;
    trace.k = k;
    trace.iters = cfg.iters;
    trace.burn_in = cfg.burn_in;
    trace.labels.reserve(cfg.iters);
    trace.rho.reserve(cfg.iters);
    trace.loglik.reserve(cfg.iters);
    trace.label_accept.reserve(cfg.iters);
    trace.rho_accept.reserve(cfg.iters);
    if (cfg.record_pointwise) trace.pointwise = Matrix::Zero(trace.retained(), data.s());

    std::uint64_t pw_version = std::numeric_limits<std::uint64_t>::max();
    Vector pw_row;
    for (int t = 0; t < cfg.iters; ++t) {
        std::vector<std::uint8_t> lab_acc(v, 0);
        for (int i = 0; i < v; ++i) {
            const auto [prop, q] = propose_label(state, i, rng);
            (void)q;
            lab_acc[i] = accept_label(ctx, state, i, prop, rng) ? 1 : 0;
        }
        std::vector<std::int8_t> rho_acc(static_cast<std::size_t>(k) + 1, -1);
        if (!cfg.fixed_rho0)
            rho_acc[0] =
                accept_rho(ctx, state, 0, propose_rho(state, 0, cfg.step_sd, rng), rng) ? 1 : 0;
        const std::vector<int> sizes = state.partition.class_sizes();
        for (int c = 1; c <= k; ++c) {
            if (sizes[c] == 0) continue;
            rho_acc[c] =
                accept_rho(ctx, state, c, propose_rho(state, c, cfg.step_sd, rng), rng) ? 1 : 0;
        }

        trace.labels.push_back(state.partition.labels);
        trace.rho.push_back(state.rho.values);
        trace.loglik.push_back(state.loglik);
        trace.label_accept.push_back(std::move(lab_acc));
        trace.rho_accept.push_back(std::move(rho_acc));
        if (cfg.record_pointwise && t >= cfg.burn_in) {
            if (state.version != pw_version) {
                pw_row = ctx.pointwise(state.partition, state.rho);
                pw_version = state.version;
            }
            trace.pointwise.row(t - cfg.burn_in) = pw_row.transpose();
        }
        if (cfg.debug_checks && (t + 1) % 100 == 0) {
            SweepContext fresh(data, cfg);
            const SweepContext::Eval check = fresh.evaluate(state.partition, state.rho);
            if (std::abs(check.loglik - state.loglik) >
                1e-9 * std::max(1.0, std::abs(state.loglik)))
                throw std::logic_error("cached log likelihood drifted from a fresh evaluation");
        }
    }

    ChainResult out;
    out.trace = std::move(trace);
    out.summary = summarize(out.trace);
    return out;
}

PosteriorSummary summarize(const ChainTrace& trace) {
    if (trace.iters <= trace.burn_in || trace.loglik.empty())
        throw std::invalid_argument("trace has no retained iterations");
    const int k = trace.k;
    PosteriorSummary s;

    int best = -1;
    double best_ll = kNegInf;
    for (int t = trace.burn_in; t < trace.iters; ++t) {
        if (trace.loglik[t] > best_ll) {
            best_ll = trace.loglik[t];
            best = t;
        }
    }
    s.map_iteration = best;
    s.map_loglik = best_ll;
    s.map_partition = Partition::from_labels(trace.labels[best], k);
    s.map_rho = RhoParams::of(trace.rho[best]);

    std::vector<double> mean(static_cast<std::size_t>(k) + 1, 0.0);
    for (int t = trace.burn_in; t < trace.iters; ++t)
        for (int c = 0; c <= k; ++c) mean[c] += trace.rho[t][c];
    const double n = static_cast<double>(trace.retained());
    for (double& m : mean) m /= n;
    s.rho_hat = RhoParams::of(std::move(mean));

    const std::vector<int> sizes = s.map_partition.class_sizes();
    s.vanished.assign(static_cast<std::size_t>(k) + 1, 0);
    s.k_hat = 0;
    for (int c = 1; c <= k; ++c) {
        if (sizes[c] == 0)
            s.vanished[c] = 1;
        else
            ++s.k_hat;
    }

    std::int64_t lab_n = 0, lab_a = 0;
    std::vector<std::int64_t> att(static_cast<std::size_t>(k) + 1, 0);
    std::vector<std::int64_t> acc(static_cast<std::size_t>(k) + 1, 0);
    for (int t = trace.burn_in; t < trace.iters; ++t) {
        for (const std::uint8_t f : trace.label_accept[t]) {
            ++lab_n;
            lab_a += f;
        }
        for (int c = 0; c <= k; ++c) {
            const std::int8_t f = trace.rho_accept[t][c];
            if (f < 0) continue;
            ++att[c];
            acc[c] += f;
        }
    }
    s.label_accept_rate = lab_n > 0 ? static_cast<double>(lab_a) / lab_n : kNan;
    s.rho_accept_rate.assign(static_cast<std::size_t>(k) + 1, kNan);
    s.rho_attempts = att;
    for (int c = 0; c <= k; ++c)
        if (att[c] > 0) s.rho_accept_rate[c] = static_cast<double>(acc[c]) / att[c];
    return s;
}

} // namespace edgecov::sampler
