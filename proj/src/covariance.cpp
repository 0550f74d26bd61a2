#include "edgecov/covariance.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace edgecov::covariance {

EntryMap entry_map_from_string(const std::string& s) {
    if (s == "exponential") return EntryMap::exponential;
    if (s == "identity") return EntryMap::identity;
    throw std::invalid_argument("unknown entry map '" + s + "' (expected exponential|identity)");
}

std::string to_string(EntryMap m) {
    return m == EntryMap::exponential ? "exponential" : "identity";
}

std::vector<int> Partition::class_sizes() const {
    std::vector<int> sizes(static_cast<size_t>(kmax) + 1, 0);
    for (int lab : labels) sizes[static_cast<size_t>(lab)]++;
    return sizes;
}

std::vector<int> Partition::nonempty_classes() const {
    auto sizes = class_sizes();
    std::vector<int> out;
    for (int k = 1; k <= kmax; ++k)
        if (sizes[static_cast<size_t>(k)] > 0) out.push_back(k);
    return out;
}

Partition Partition::from_labels(std::vector<int> labels, int kmax) {
    if (kmax < 1) throw std::invalid_argument("Partition: kmax must be >= 1");
    if (labels.empty()) throw std::invalid_argument("Partition: empty label vector");
    for (int lab : labels)
        if (lab < 1 || lab > kmax)
            throw std::invalid_argument("Partition: label " + std::to_string(lab) +
                                        " outside 1.." + std::to_string(kmax));
    return Partition{std::move(labels), kmax};
}

RhoParams RhoParams::of(std::vector<double> values) {
    if (values.size() < 2)
        throw std::invalid_argument("RhoParams: need rho0 plus at least one class value");
    for (double x : values)
        if (!std::isfinite(x)) throw std::invalid_argument("RhoParams: non-finite value");
    return RhoParams{std::move(values)};
}

int BlockStats::block_edge_total() const {
    int t = 0;
    for (int k = 1; k <= kmax; ++k) t += m[static_cast<size_t>(k)];
    return t;
}

BlockStats compute_block_stats(const Partition& p, int v) {
    if (p.v() != v) throw std::invalid_argument("compute_block_stats: label count != v");
    BlockStats st;
    st.v = v;
    st.e = core::edge_count(v);
    st.kmax = p.kmax;
    st.members.assign(static_cast<size_t>(p.kmax) + 1, {});
    st.m.assign(static_cast<size_t>(p.kmax) + 1, 0);
    int idx = 0;
    for (int i = 0; i < v; ++i) {
        for (int j = i + 1; j < v; ++j, ++idx) {
            if (p.labels[static_cast<size_t>(i)] == p.labels[static_cast<size_t>(j)])
                st.members[static_cast<size_t>(p.labels[static_cast<size_t>(i)])].push_back(idx);
        }
    }
    int covered = 0;
    for (int k = 1; k <= p.kmax; ++k) {
        st.m[static_cast<size_t>(k)] = static_cast<int>(st.members[static_cast<size_t>(k)].size());
        covered += st.m[static_cast<size_t>(k)];
    }
    st.m[0] = st.e - covered;
    return st;
}

EntryValues map_entry_values(const RhoParams& rho, EntryMap map) {
    EntryValues ev;
    ev.within.resize(rho.values.size());
    auto apply = [&](double r) { return map == EntryMap::exponential ? std::exp(-r) : r; };
    ev.bg = apply(rho.values[0]);
    ev.within[0] = ev.bg;
    for (size_t k = 1; k < rho.values.size(); ++k) ev.within[k] = apply(rho.values[k]);
    return ev;
}

StructuredCov build_structured(const Partition& p, const RhoParams& rho,
                               double lambda, int v, EntryMap map) {
    if (v < 2) throw std::invalid_argument("build_structured: need at least 2 nodes");
    if (p.v() != v) throw std::invalid_argument("build_structured: label count != v");
    if (p.kmax > rho.k())
        throw std::invalid_argument("build_structured: partition has more class slots than rho values");
    if (!(lambda >= 0.0)) throw std::invalid_argument("build_structured: lambda must be >= 0");
    StructuredCov sc;
    sc.v = v;
    sc.e = core::edge_count(v);
    sc.partition = p;
    sc.rho = rho;
    sc.lambda = lambda;
    sc.map = map;
    sc.stats = compute_block_stats(p, v);
    sc.values = map_entry_values(rho, map);
    for (double w : sc.values.within)
        if (!std::isfinite(w)) throw std::invalid_argument("build_structured: entry value overflow");
    return sc;
}

Matrix build_dense(const Partition& p, const RhoParams& rho,
                   double lambda, int v, EntryMap map) {
    if (v < 2) throw std::invalid_argument("build_dense: need at least 2 nodes");
    if (p.v() != v) throw std::invalid_argument("build_dense: label count != v");
    if (p.kmax > rho.k())
        throw std::invalid_argument("build_dense: partition has more class slots than rho values");
    if (!(lambda >= 0.0)) throw std::invalid_argument("build_dense: lambda must be >= 0");
    const EntryValues ev = map_entry_values(rho, map);
    const int e = core::edge_count(v);

    // Class of each edge: k when both endpoints share class k, 0 otherwise.
    std::vector<int> edge_class(static_cast<size_t>(e), 0);
    int idx = 0;
    for (int i = 0; i < v; ++i)
        for (int j = i + 1; j < v; ++j, ++idx)
            if (p.labels[static_cast<size_t>(i)] == p.labels[static_cast<size_t>(j)])
                edge_class[static_cast<size_t>(idx)] = p.labels[static_cast<size_t>(i)];

    Matrix sig(e, e);
    for (int a = 0; a < e; ++a) {
        for (int b = 0; b < e; ++b) {
            // Four-endpoint rule; the diagonal is the degenerate case with both
            // edges equal, so it follows the same rule plus the ridge.
            const int ca = edge_class[static_cast<size_t>(a)];
            const double val = (ca != 0 && ca == edge_class[static_cast<size_t>(b)])
                                   ? ev.within[static_cast<size_t>(ca)]
                                   : ev.bg;
            sig(a, b) = (a == b) ? val + lambda : val;
        }
    }
    return sig;
}

Matrix materialize(const StructuredCov& sc) {
    Matrix sig = Matrix::Constant(sc.e, sc.e, sc.values.bg);
    for (int k = 1; k <= sc.stats.kmax; ++k) {
        const auto& mem = sc.stats.members[static_cast<size_t>(k)];
        const double w = sc.values.within[static_cast<size_t>(k)];
        for (int a : mem)
            for (int b : mem) sig(a, b) = w;
    }
    for (int a = 0; a < sc.e; ++a) sig(a, a) += sc.lambda;
    return sig;
}

SmallCore build_small_core(const BlockStats& stats, const EntryValues& values) {
    SmallCore c;
    c.has_ones = values.bg != 0.0;
    for (int k = 1; k <= stats.kmax; ++k) {
        if (stats.m[static_cast<size_t>(k)] > 0 &&
            values.within[static_cast<size_t>(k)] - values.bg != 0.0)
            c.cls.push_back(k);
    }
    c.p = static_cast<int>(c.cls.size()) + (c.has_ones ? 1 : 0);
    c.d.resize(c.p);
    c.g = Matrix::Zero(c.p, c.p);
    int off = 0;
    if (c.has_ones) {
        c.d(0) = values.bg;
        c.g(0, 0) = static_cast<double>(stats.e);
        off = 1;
    }
    for (size_t i = 0; i < c.cls.size(); ++i) {
        const int k = c.cls[i];
        const double mk = static_cast<double>(stats.m[static_cast<size_t>(k)]);
        const int col = off + static_cast<int>(i);
        c.d(col) = values.within[static_cast<size_t>(k)] - values.bg;
        c.g(col, col) = mk;
        if (c.has_ones) {
            c.g(0, col) = mk;
            c.g(col, 0) = mk;
        }
    }
    return c;
}

namespace {

// Cholesky of a tiny symmetric matrix, reporting the first failing pivot.
// Returns -1 on success.
int tiny_cholesky_failing_pivot(Matrix a) {
    const int n = static_cast<int>(a.rows());
    for (int j = 0; j < n; ++j) {
        double piv = a(j, j);
        for (int t = 0; t < j; ++t) piv -= a(j, t) * a(j, t);
        if (!(piv > 0.0) || !std::isfinite(piv)) return j;
        const double l = std::sqrt(piv);
        a(j, j) = l;
        for (int i = j + 1; i < n; ++i) {
            double x = a(i, j);
            for (int t = 0; t < j; ++t) x -= a(i, t) * a(j, t);
            a(i, j) = x / l;
        }
    }
    return -1;
}

} // namespace

PdReport pd_check(const BlockStats& stats, const EntryValues& values, double lambda) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        return {false, "ridge must be finite and nonnegative"};
    for (double w : values.within)
        if (!std::isfinite(w)) return {false, "entry value overflow"};

    // Core coordinates: one per nonempty block (ascending class id), plus one
    // for the background edges when any exist.
    std::vector<int> coords;
    for (int k = 1; k <= stats.kmax; ++k)
        if (stats.m[static_cast<size_t>(k)] > 0) coords.push_back(k);
    const bool has_bg = stats.m[0] > 0;
    const int r = static_cast<int>(coords.size()) + (has_bg ? 1 : 0);

    // Off the block subspace every eigenvalue equals lambda.
    if (stats.e > r && !(lambda > 0.0))
        return {false, "ridge is zero and the block subspace does not span all edges"};

    if (r == 0) return {true, ""};

    Matrix c(r, r);
    Vector sqm(r);
    for (int i = 0; i < r; ++i) {
        const double mi = (i < static_cast<int>(coords.size()))
                              ? static_cast<double>(stats.m[static_cast<size_t>(coords[static_cast<size_t>(i)])])
                              : static_cast<double>(stats.m[0]);
        sqm(i) = std::sqrt(mi);
    }
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) c(i, j) = values.bg * sqm(i) * sqm(j);
    for (int i = 0; i < static_cast<int>(coords.size()); ++i) {
        const int k = coords[static_cast<size_t>(i)];
        c(i, i) += (values.within[static_cast<size_t>(k)] - values.bg) *
                   static_cast<double>(stats.m[static_cast<size_t>(k)]);
    }
    for (int i = 0; i < r; ++i) c(i, i) += lambda;

    const int fail = tiny_cholesky_failing_pivot(c);
    if (fail < 0) return {true, ""};
    std::string who = (fail < static_cast<int>(coords.size()))
                          ? "class " + std::to_string(coords[static_cast<size_t>(fail)])
                          : std::string("background");
    return {false, "core pivot " + std::to_string(fail + 1) + " (" + who + ") is not positive"};
}

PdReport is_positive_definite(const StructuredCov& sc) {
    return pd_check(sc.stats, sc.values, sc.lambda);
}

double logdet_from_core(const SmallCore& core, double lambda, int e) {
    if (!(lambda > 0.0))
        throw std::invalid_argument("logdet: lambda must be > 0");
    double acc = static_cast<double>(e) * std::log(lambda);
    if (core.p == 0) return acc;

    Matrix m = Matrix::Identity(core.p, core.p);
    m.noalias() += (core.d.asDiagonal() * core.g) / lambda;
    Eigen::PartialPivLU<Matrix> lu(m);
    // Accumulate log|pivot| instead of the raw product: with small lambda the
    // determinant of the core overflows double range long before log does.
    double logmag = 0.0;
    double sign = lu.permutationP().determinant() > 0 ? 1.0 : -1.0;
    for (int i = 0; i < core.p; ++i) {
        const double u = lu.matrixLU()(i, i);
        if (u == 0.0 || !std::isfinite(u))
            throw std::runtime_error("logdet: singular core (matrix not positive definite?)");
        logmag += std::log(std::abs(u));
        if (u < 0.0) sign = -sign;
    }
    if (sign <= 0.0)
        throw std::runtime_error("logdet: core determinant is negative (matrix not positive definite)");
    return acc + logmag;
}

double logdet(const StructuredCov& sc) {
    const SmallCore core = build_small_core(sc.stats, sc.values);
    return logdet_from_core(core, sc.lambda, sc.e);
}

WoodburyCore build_woodbury(const SmallCore& core, double lambda) {
    if (!(lambda > 0.0))
        throw std::invalid_argument("woodbury: lambda must be > 0");
    WoodburyCore wb;
    wb.core = core;
    wb.lambda = lambda;
    if (core.p > 0) {
        Matrix m = core.g / lambda;
        for (int i = 0; i < core.p; ++i) m(i, i) += 1.0 / core.d(i);
        wb.lu.compute(m);
    }
    return wb;
}

Matrix build_t(const BlockStats& stats, const SmallCore& core, const Matrix& h,
               const Vector& rowsums, double grand) {
    Matrix t = Matrix::Zero(core.p, core.p);
    if (core.p == 0) return t;
    int off = 0;
    if (core.has_ones) {
        t(0, 0) = grand;
        off = 1;
    }
    for (size_t i = 0; i < core.cls.size(); ++i) {
        const auto& mi = stats.members[static_cast<size_t>(core.cls[i])];
        const int ci = off + static_cast<int>(i);
        if (core.has_ones) {
            double s = 0.0;
            for (int a : mi) s += rowsums(a);
            t(0, ci) = s;
            t(ci, 0) = s;
        }
        for (size_t j = i; j < core.cls.size(); ++j) {
            const auto& mj = stats.members[static_cast<size_t>(core.cls[j])];
            const int cj = off + static_cast<int>(j);
            double s = 0.0;
            for (int a : mi)
                for (int b : mj) s += h(a, b);
            t(ci, cj) = s;
            t(cj, ci) = s;
        }
    }
    return t;
}

double trace_from_core(const WoodburyCore& wb, double tr_h, const Matrix& t) {
    double acc = tr_h / wb.lambda;
    if (wb.core.p > 0)
        acc -= wb.lu.solve(t).trace() / (wb.lambda * wb.lambda);
    return acc;
}

double trace_quad(const StructuredCov& sc, const Matrix& h) {
    if (h.rows() != sc.e || h.cols() != sc.e)
        throw std::invalid_argument("trace_quad: H dimension mismatch");
    const SmallCore core = build_small_core(sc.stats, sc.values);
    const WoodburyCore wb = build_woodbury(core, sc.lambda);
    const Vector rowsums = h.rowwise().sum();
    const Matrix t = build_t(sc.stats, core, h, rowsums, rowsums.sum());
    return trace_from_core(wb, h.trace(), t);
}

Vector build_y(const BlockStats& stats, const SmallCore& core, const Vector& x) {
    Vector y(core.p);
    int off = 0;
    if (core.has_ones) {
        y(0) = x.sum();
        off = 1;
    }
    for (size_t i = 0; i < core.cls.size(); ++i) {
        double s = 0.0;
        for (int a : stats.members[static_cast<size_t>(core.cls[i])]) s += x(a);
        y(off + static_cast<int>(i)) = s;
    }
    return y;
}

double quad_from_core(const WoodburyCore& wb, double xtx, const Vector& y) {
    double acc = xtx / wb.lambda;
    if (wb.core.p > 0)
        acc -= y.dot(wb.lu.solve(y)) / (wb.lambda * wb.lambda);
    return acc;
}

DenseResult dense_oracle(const StructuredCov& sc, const Matrix& h) {
    if (h.rows() != sc.e || h.cols() != sc.e)
        throw std::invalid_argument("dense_oracle: H dimension mismatch");
    const Matrix sig = materialize(sc);
    Eigen::LLT<Matrix> llt(sig);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("dense_oracle: Sigma is not positive definite");
    DenseResult out;
    const Matrix l = llt.matrixL();
    for (int i = 0; i < sc.e; ++i) out.logdet += 2.0 * std::log(l(i, i));
    out.trace_quad = llt.solve(h).trace();
    return out;
}

} // namespace edgecov::covariance
