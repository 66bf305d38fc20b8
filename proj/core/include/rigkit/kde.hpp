#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "rigkit/rig.hpp"

// Kernel density estimation on (0, inf) with rIG kernels: one kernel is
// centered at each observation (theta = X_i) and all kernels share the
// smoothing parameter gamma.  Because every kernel lives on the data's
// support, the estimator is a proper density and free of boundary bias.

namespace rigkit::kde {

struct KdeModel {
    std::vector<double> data;  // all > 0
    double gamma;              // smoothing parameter, > 0

    KdeModel(std::vector<double> data, double gamma);
};

struct LcvResult {
    double gamma_hat;
    double score_at_opt;  // mean leave-one-out log density at gamma_hat
    std::vector<std::pair<double, double>> score_curve;  // optional (gamma, score) trace
};

// (1/n) sum_i f(x; theta = X_i, gamma).  Throws std::domain_error for x <= 0.
double kde_eval(const KdeModel& m, double x);

// Likelihood cross-validation score LCV(gamma) = (1/n) sum_i ln f_{-i}(X_i).
// Production path: full kernel row sums minus the self kernel, rescaled by
// n-1; rows where that subtraction would cancel are recomputed in log space,
// so the score is finite for any gamma > 0.
double lcv_score(std::span<const double> data, double gamma);

// Naive O(n^2) double loop kept as an independent reference implementation.
double lcv_score_direct(std::span<const double> data, double gamma);

// Maximizes the LCV score over gamma (by minimizing its negation) inside
// [lo, hi]; the default bracket is [1e-3 s, 10 s] with s the sample standard
// deviation.  curve_points > 0 additionally records the score on that many
// log-spaced gammas.  Requires n >= 3 and non-degenerate data.
LcvResult select_bandwidth(std::span<const double> data);
LcvResult select_bandwidth(std::span<const double> data, double lo, double hi,
                           std::size_t curve_points = 0);

}  // namespace rigkit::kde
