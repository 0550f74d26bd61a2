#include "edgecov/evaluation.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace edgecov::evaluation {

namespace {

void check_shapes(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("matrix shapes differ: " + std::to_string(a.rows()) + "x" +
                                    std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) +
                                    "x" + std::to_string(b.cols()));
    if (a.rows() == 0) throw std::invalid_argument("matrices are empty");
}

Matrix structure_matrix(const Partition& p, const RhoParams& rho, EntryMap map) {
    return covariance::build_dense(p, rho, 0.0, p.v(), map);
}

} // namespace

double normalized_l1_error(const Matrix& a, const Matrix& b) {
    check_shapes(a, b);
    const double n = static_cast<double>(a.rows());
    return (a - b).cwiseAbs().sum() / (n * n);
}

double frobenius_error(const Matrix& a, const Matrix& b) {
    check_shapes(a, b);
    return (a - b).norm() / static_cast<double>(a.rows());
}

LabelAlignment align_labels(const Partition& truth, const Partition& est) {
    if (truth.v() != est.v())
        throw std::invalid_argument("partitions cover different node counts");
    const int v = truth.v();
    const int kt = truth.kmax;
    const int ke = est.kmax;
    if (kt > 20) throw std::invalid_argument("alignment supports at most 20 true classes");

    // overlap[c][t] = nodes labeled c by est and t by truth
    std::vector<std::vector<int>> overlap(ke + 1, std::vector<int>(kt + 1, 0));
    for (int i = 0; i < v; ++i) overlap[est.labels[i]][truth.labels[i]] += 1;

    const std::vector<int> est_sizes = est.class_sizes();
    const std::vector<int> true_sizes = truth.class_sizes();
    std::vector<int> est_live, true_live;
    for (int c = 1; c <= ke; ++c)
        if (est_sizes[c] > 0) est_live.push_back(c);
    for (int t = 1; t <= kt; ++t)
        if (true_sizes[t] > 0) true_live.push_back(t);

    // dp[i][mask]: best total overlap assigning est_live[i..] with the true
    // classes in mask already taken.
    const int ne = static_cast<int>(est_live.size());
    const int nt = static_cast<int>(true_live.size());
    const int full = 1 << nt;
    std::vector<std::vector<int>> dp(ne + 1, std::vector<int>(full, 0));
    for (int i = ne - 1; i >= 0; --i) {
        const int c = est_live[i];
        for (int mask = 0; mask < full; ++mask) {
            int best = dp[i + 1][mask]; // leave c unmatched
            for (int j = 0; j < nt; ++j) {
                if (mask & (1 << j)) continue;
                const int cand = overlap[c][true_live[j]] + dp[i + 1][mask | (1 << j)];
                if (cand > best) best = cand;
            }
            dp[i][mask] = best;
        }
    }

    LabelAlignment out;
    out.map_to_true.assign(ke + 1, 0);
    out.matched = dp.empty() ? 0 : dp[0][0];
    int mask = 0;
    for (int i = 0; i < ne; ++i) {
        const int c = est_live[i];
        bool assigned = false;
        for (int j = 0; j < nt && !assigned; ++j) { // ascending true id = tie preference
            if (mask & (1 << j)) continue;
            if (overlap[c][true_live[j]] + dp[i + 1][mask | (1 << j)] == dp[i][mask]) {
                out.map_to_true[c] = true_live[j];
                mask |= 1 << j;
                assigned = true;
            }
        }
        // otherwise dp[i+1][mask] == dp[i][mask]: c stays unmatched
    }
    return out;
}

double misclassification_rate(const Partition& truth, const Partition& est) {
    const LabelAlignment align = align_labels(truth, est);
    const int v = truth.v();
    std::vector<std::vector<int>> members(est.kmax + 1);
    for (int i = 0; i < v; ++i) members[est.labels[i]].push_back(i);

    int wrong = 0;
    for (int c = 1; c <= est.kmax; ++c) {
        if (members[c].empty()) continue;
        const int t = align.map_to_true[c];
        bool pure = t != 0;
        for (const int i : members[c]) {
            if (truth.labels[i] != t) {
                pure = false;
                break;
            }
        }
        if (!pure) wrong += static_cast<int>(members[c].size());
    }
    return static_cast<double>(wrong) / static_cast<double>(v);
}

SupportScore support_sensitivity_specificity(const Matrix& truth, double truth_bg,
                                             const Matrix& est, double est_bg, double tol) {
    check_shapes(truth, est);
    SupportScore out;
    const int n = static_cast<int>(truth.rows());
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const bool t_on = std::abs(truth(i, j) - truth_bg) > tol;
            const bool e_on = std::abs(est(i, j) - est_bg) > tol;
            if (t_on && e_on)
                ++out.tp;
            else if (t_on && !e_on)
                ++out.fn;
            else if (!t_on && e_on)
                ++out.fp;
            else
                ++out.tn;
        }
    }
    out.sensitivity = (out.tp + out.fn) == 0
                          ? 1.0
                          : static_cast<double>(out.tp) / static_cast<double>(out.tp + out.fn);
    out.specificity = (out.tn + out.fp) == 0
                          ? 1.0
                          : static_cast<double>(out.tn) / static_cast<double>(out.tn + out.fp);
    return out;
}

MetricReport compute_metrics(const Partition& truth_partition, const RhoParams& truth_rho,
                             EntryMap truth_map, const Partition& est_partition,
                             const RhoParams& est_rho, EntryMap est_map, double tol) {
    if (truth_partition.v() != est_partition.v())
        throw std::invalid_argument("partitions cover different node counts");
    const Matrix lt = structure_matrix(truth_partition, truth_rho, truth_map);
    const Matrix le = structure_matrix(est_partition, est_rho, est_map);
    const covariance::EntryValues tv = covariance::map_entry_values(truth_rho, truth_map);
    const covariance::EntryValues ev = covariance::map_entry_values(est_rho, est_map);

    MetricReport rep;
    rep.normalized_l1 = normalized_l1_error(lt, le);
    rep.frobenius = frobenius_error(lt, le);
    rep.misclassification = misclassification_rate(truth_partition, est_partition);
    const SupportScore sup = support_sensitivity_specificity(lt, tv.bg, le, ev.bg, tol);
    rep.sensitivity = sup.sensitivity;
    rep.specificity = sup.specificity;

    const LabelAlignment align = align_labels(truth_partition, est_partition);
    rep.rho_aligned.assign(static_cast<std::size_t>(truth_partition.kmax) + 1,
                           std::numeric_limits<double>::quiet_NaN());
    rep.rho_aligned[0] = est_rho.rho0();
    for (int c = 1; c <= est_partition.kmax; ++c) {
        const int t = align.map_to_true[c];
        if (t != 0) rep.rho_aligned[t] = est_rho.values[c];
    }
    return rep;
}

} // namespace edgecov::evaluation
