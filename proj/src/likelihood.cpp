#include "edgecov/likelihood.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace edgecov::likelihood {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836; // log(2*pi)
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
} // namespace

EdgeData EdgeData::from_r(Matrix r) {
    if (r.rows() < 1 || r.cols() < 1)
        throw std::invalid_argument("EdgeData: empty subject matrix");
    EdgeData d;
    d.h = (r.transpose() * r) / static_cast<double>(r.rows());
    // Mirror the upper triangle: the product above is symmetric only up to
    // rounding, and downstream code assumes exact symmetry.
    for (int i = 0; i < d.h.rows(); ++i)
        for (int j = i + 1; j < d.h.cols(); ++j) d.h(j, i) = d.h(i, j);
    d.r = std::move(r);
    return d;
}

double loglik(const Matrix& h, int s, const StructuredCov& sc) {
    if (s < 1) throw std::invalid_argument("loglik: need at least one subject");
    if (h.rows() != sc.e || h.cols() != sc.e)
        throw std::invalid_argument("loglik: H dimension mismatch");
    if (!covariance::is_positive_definite(sc).ok) return kNegInf;
    const double ld = covariance::logdet(sc);
    const double tq = covariance::trace_quad(sc, h);
    const double sd = static_cast<double>(s);
    return -0.5 * sd * static_cast<double>(sc.e) * kLog2Pi - 0.5 * sd * (ld + tq);
}

double loglik_subject(const Vector& x, const StructuredCov& sc) {
    if (x.size() != sc.e) throw std::invalid_argument("loglik_subject: row length mismatch");
    if (!covariance::is_positive_definite(sc).ok) return kNegInf;
    const auto core = covariance::build_small_core(sc.stats, sc.values);
    const auto wb = covariance::build_woodbury(core, sc.lambda);
    const double ld = covariance::logdet_from_core(core, sc.lambda, sc.e);
    const double quad =
        covariance::quad_from_core(wb, x.squaredNorm(), covariance::build_y(sc.stats, core, x));
    return -0.5 * static_cast<double>(sc.e) * kLog2Pi - 0.5 * ld - 0.5 * quad;
}

double loglik_dense(const Matrix& h, int s, const StructuredCov& sc) {
    if (s < 1) throw std::invalid_argument("loglik_dense: need at least one subject");
    covariance::DenseResult dr;
    try {
        dr = covariance::dense_oracle(sc, h);
    } catch (const std::runtime_error&) {
        return kNegInf;
    }
    const double sd = static_cast<double>(s);
    return -0.5 * sd * static_cast<double>(sc.e) * kLog2Pi - 0.5 * sd * (dr.logdet + dr.trace_quad);
}

double loglik_subject_dense(const Vector& x, const StructuredCov& sc) {
    if (x.size() != sc.e) throw std::invalid_argument("loglik_subject_dense: row length mismatch");
    const Matrix sig = covariance::materialize(sc);
    Eigen::LLT<Matrix> llt(sig);
    if (llt.info() != Eigen::Success) return kNegInf;
    double ld = 0.0;
    const Matrix l = llt.matrixL();
    for (int i = 0; i < sc.e; ++i) ld += 2.0 * std::log(l(i, i));
    const double quad = x.dot(llt.solve(x));
    return -0.5 * static_cast<double>(sc.e) * kLog2Pi - 0.5 * ld - 0.5 * quad;
}

} // namespace edgecov::likelihood
