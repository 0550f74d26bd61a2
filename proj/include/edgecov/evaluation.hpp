#pragma once

#include <vector>

#include "edgecov/covariance.hpp"

// Recovery metrics: matrix error norms on the noise-free structured part,
// partition agreement after optimal label alignment, and support
// sensitivity/specificity against the background value.

namespace edgecov::evaluation {

using covariance::EntryMap;
using covariance::Matrix;
using covariance::Partition;
using covariance::RhoParams;

// ||a - b||_1 / n^2 over all entries; matrices must share shape.
double normalized_l1_error(const Matrix& a, const Matrix& b);

// ||a - b||_F / n.
double frobenius_error(const Matrix& a, const Matrix& b);

// Best one-to-one assignment of estimated classes to true classes by overlap
// count. map_to_true[c] is the true class matched to estimated class c, or 0
// when unmatched; ties prefer the lowest true class id, scanning estimated
// classes in ascending order. Empty estimated classes stay unmatched.
struct LabelAlignment {
    std::vector<int> map_to_true;
    int matched = 0; // nodes explained by the assignment
};

LabelAlignment align_labels(const Partition& truth, const Partition& est);

// All-or-nothing cluster scoring after alignment: every node of an estimated
// class counts as misclassified unless the class maps to a true class and
// contains only that class's nodes. Returns the misclassified fraction.
double misclassification_rate(const Partition& truth, const Partition& est);

// Support agreement over the strict upper triangle: an entry is "connected"
// when it differs from the background value by more than tol. Sensitivity is
// recovered connected entries over true connected entries; specificity the
// same for background entries. Empty denominators score 1.
struct SupportScore {
    double sensitivity = 1.0;
    double specificity = 1.0;
    long long tp = 0, fp = 0, tn = 0, fn = 0;
};

SupportScore support_sensitivity_specificity(const Matrix& truth, double truth_bg,
                                             const Matrix& est, double est_bg,
                                             double tol = 1e-6);

// Everything above computed between two (partition, rho) pairs, using the
// noise-free structured matrices (no ridge term).
struct MetricReport {
    double normalized_l1 = 0.0;
    double frobenius = 0.0;
    double misclassification = 0.0;
    double sensitivity = 1.0;
    double specificity = 1.0;
    // rho_aligned[t] = estimated rho for the class matched to true class t
    // (index 0 = background); NaN when no estimated class matched.
    std::vector<double> rho_aligned;
};

MetricReport compute_metrics(const Partition& truth_partition, const RhoParams& truth_rho,
                             EntryMap truth_map, const Partition& est_partition,
                             const RhoParams& est_rho, EntryMap est_map, double tol = 1e-6);

} // namespace edgecov::evaluation
