#pragma once

#include <Eigen/Dense>

#include "edgecov/covariance.hpp"

// Gaussian log-likelihood of the edge-feature matrix.
//
// Subjects' edge rows are modeled as iid N(0, Sigma). With H = R^T R / S,
//
//   loglik = -(S*E/2) log(2*pi) - (S/2) [ log det Sigma + tr(H Sigma^{-1}) ],
//
// which is exactly the sum over subjects of the per-row density (the trace
// collects all the quadratic forms). A non-PD Sigma is not an error here: it
// evaluates to -infinity so a sampler treats the proposal as rejectable.

namespace edgecov::likelihood {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using covariance::StructuredCov;

struct EdgeData {
    Matrix r; // S x E subject rows
    Matrix h; // E x E second-moment matrix, exactly symmetric

    int s() const { return static_cast<int>(r.rows()); }
    int e() const { return static_cast<int>(r.cols()); }

    // Computes h = r^T r / S and mirrors the upper triangle so h is
    // symmetric to the bit.
    static EdgeData from_r(Matrix r);
};

// Full-data log-likelihood from the second-moment matrix.
double loglik(const Matrix& h, int s, const StructuredCov& sc);

// One subject's log-density log N(x; 0, Sigma).
double loglik_subject(const Vector& x, const StructuredCov& sc);

// Dense Cholesky reference implementations (test oracles).
double loglik_dense(const Matrix& h, int s, const StructuredCov& sc);
double loglik_subject_dense(const Vector& x, const StructuredCov& sc);

} // namespace edgecov::likelihood
