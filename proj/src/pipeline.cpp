#include "edgecov/pipeline.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "edgecov/core.hpp"
#include "edgecov/rng.hpp"

namespace edgecov::pipeline {

Matrix standardize(const Matrix& x) {
    const int s = static_cast<int>(x.rows());
    const int v = static_cast<int>(x.cols());
    if (s < 2) throw std::invalid_argument("standardization needs at least 2 rows");
    if (v < 1) throw std::invalid_argument("no columns to standardize");
    Matrix out(s, v);
    for (int j = 0; j < v; ++j) {
        const double mean = x.col(j).mean();
        const Vector centered = x.col(j).array() - mean;
        const double sd = std::sqrt(centered.squaredNorm() / (s - 1));
        if (sd == 0.0)
            throw std::invalid_argument("column " + std::to_string(j) +
                                        " is constant and cannot be standardized");
        out.col(j) = centered / sd;
    }
    return out;
}

likelihood::EdgeData edge_features(const Matrix& x_std) {
    const int s = static_cast<int>(x_std.rows());
    const int v = static_cast<int>(x_std.cols());
    if (v < 2) throw std::invalid_argument("edge features need at least 2 nodes");
    const int e = core::edge_count(v);
    Matrix r(s, e);
    for (int i = 0; i < v; ++i)
        for (int j = i + 1; j < v; ++j)
            r.col(core::edge_index(i, j, v)) = x_std.col(i).cwiseProduct(x_std.col(j));
    return likelihood::EdgeData::from_r(std::move(r));
}

Matrix node_moments(const Matrix& x_std) {
    const int s = static_cast<int>(x_std.rows());
    if (s < 2) throw std::invalid_argument("need at least 2 rows");
    Matrix m = x_std.transpose() * x_std / static_cast<double>(s - 1);
    return (m + m.transpose()) / 2.0;
}

namespace {

double lloyd_pass(const Matrix& pts, int k, Rng& rng, std::vector<int>& assign) {
    const int n = static_cast<int>(pts.rows());
    // distinct random rows as starting centroids
    std::vector<int> ids(n);
    std::iota(ids.begin(), ids.end(), 0);
    for (int i = 0; i < k; ++i) {
        const int j = i + rint(rng, n - i);
        std::swap(ids[i], ids[j]);
    }
    Matrix cent(k, pts.cols());
    for (int c = 0; c < k; ++c) cent.row(c) = pts.row(ids[c]);

    assign.assign(n, 0);
    double obj = 0.0;
    for (int pass = 0; pass < 100; ++pass) {
        bool moved = false;
        obj = 0.0;
        for (int i = 0; i < n; ++i) {
            int best = assign[i];
            double bestd = std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                const double d = (pts.row(i) - cent.row(c)).squaredNorm();
                if (d < bestd) {
                    bestd = d;
                    best = c;
                }
            }
            if (best != assign[i]) moved = true;
            assign[i] = best;
            obj += bestd;
        }
        if (!moved && pass > 0) break;
        for (int c = 0; c < k; ++c) {
            int cnt = 0;
            Vector acc = Vector::Zero(pts.cols());
            for (int i = 0; i < n; ++i) {
                if (assign[i] != c) continue;
                acc += pts.row(i).transpose();
                ++cnt;
            }
            if (cnt > 0) cent.row(c) = (acc / cnt).transpose();
        }
    }
    return obj;
}

} // namespace

InitGuess kmeans_init(const Matrix& node_corr, int k, int restarts, std::uint64_t seed,
                      EntryMap map) {
    const int v = static_cast<int>(node_corr.rows());
    if (node_corr.cols() != v) throw std::invalid_argument("node matrix must be square");
    if (k < 1 || k > v) throw std::invalid_argument("k must be in 1..v");
    if (restarts < 1) throw std::invalid_argument("need at least 1 restart");

    Rng rng(mix_seed(seed, 0x6b6d6e73ULL));
    std::vector<int> best_assign;
    double best_obj = std::numeric_limits<double>::infinity();
    std::vector<int> assign;
    for (int r = 0; r < restarts; ++r) {
        const double obj = lloyd_pass(node_corr, k, rng, assign);
        if (obj < best_obj) {
            best_obj = obj;
            best_assign = assign;
        }
    }

    // Dissolve classes that are too small to carry a block parameter.
    std::vector<int> labels(v);
    for (int i = 0; i < v; ++i) labels[i] = best_assign[i] + 1;
    for (;;) {
        std::vector<int> sizes(k + 1, 0);
        for (const int lab : labels) ++sizes[lab];
        int victim = 0;
        for (int c = 1; c <= k; ++c)
            if (sizes[c] > 0 && sizes[c] < 3 && (victim == 0 || sizes[c] < sizes[victim])) victim = c;
        if (victim == 0) break;
        Matrix cent = Matrix::Zero(k + 1, v);
        for (int c = 1; c <= k; ++c) {
            if (sizes[c] == 0) continue;
            for (int i = 0; i < v; ++i)
                if (labels[i] == c) cent.row(c) += node_corr.row(i);
            cent.row(c) /= sizes[c];
        }
        for (int i = 0; i < v; ++i) {
            if (labels[i] != victim) continue;
            int best = 0;
            double bestd = std::numeric_limits<double>::infinity();
            for (int c = 1; c <= k; ++c) {
                if (c == victim || sizes[c] < 3) continue;
                const double d = (node_corr.row(i) - cent.row(c)).squaredNorm();
                if (d < bestd) {
                    bestd = d;
                    best = c;
                }
            }
            if (best == 0)
                throw std::invalid_argument("k-means start collapsed: no class kept 3 nodes");
            labels[i] = best;
        }
    }

    // rho from class-average correlations through the inverse entry map.
    std::vector<double> within_sum(k + 1, 0.0), cross_sum{0.0};
    std::vector<long long> within_cnt(k + 1, 0);
    long long cross_cnt = 0;
    double csum = 0.0;
    for (int i = 0; i < v; ++i) {
        for (int j = i + 1; j < v; ++j) {
            if (labels[i] == labels[j]) {
                within_sum[labels[i]] += node_corr(i, j);
                ++within_cnt[labels[i]];
            } else {
                csum += node_corr(i, j);
                ++cross_cnt;
            }
        }
    }
    auto to_rho = [map](double avg) {
        if (map == EntryMap::identity) return avg;
        return -std::log(std::clamp(avg, 1e-6, 1.0));
    };
    std::vector<double> rho(static_cast<std::size_t>(k) + 1, 0.0);
    rho[0] = to_rho(cross_cnt > 0 ? csum / cross_cnt : 0.0);
    for (int c = 1; c <= k; ++c)
        rho[c] = within_cnt[c] > 0 ? to_rho(within_sum[c] / within_cnt[c]) : rho[0];

    InitGuess out;
    out.partition = Partition::from_labels(std::move(labels), k);
    out.rho = RhoParams::of(std::move(rho));
    out.objective = best_obj;
    return out;
}

Matrix make_synthetic_features(const std::vector<int>& group_sizes,
                               const std::vector<double>& within, double cross, int s,
                               std::uint64_t seed) {
    if (group_sizes.size() != within.size())
        throw std::invalid_argument("group_sizes and within have different lengths");
    if (s < 2) throw std::invalid_argument("need at least 2 subjects");
    int v = 0;
    for (const int g : group_sizes) {
        if (g < 1) throw std::invalid_argument("group sizes must be positive");
        v += g;
    }
    std::vector<int> labels;
    for (std::size_t c = 0; c < group_sizes.size(); ++c)
        labels.insert(labels.end(), group_sizes[c], static_cast<int>(c) + 1);

    Matrix corr(v, v);
    for (int i = 0; i < v; ++i) {
        for (int j = 0; j < v; ++j) {
            if (i == j)
                corr(i, j) = 1.0;
            else if (labels[i] == labels[j])
                corr(i, j) = within[labels[i] - 1];
            else
                corr(i, j) = cross;
        }
    }
    Eigen::LLT<Matrix> llt(corr);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("planted correlation pattern is not positive definite");
    const Matrix l = llt.matrixL();

    Rng rng(mix_seed(seed, 0x73796e74ULL));
    Matrix x(s, v);
    Vector z(v);
    for (int i = 0; i < s; ++i) {
        for (int j = 0; j < v; ++j) z(j) = rnorm(rng, 0.0, 1.0);
        x.row(i) = (l * z).transpose();
    }
    return x;
}

} // namespace edgecov::pipeline
