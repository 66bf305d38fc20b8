#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rigkit/rig.hpp"
#include "rigkit/wmle.hpp"

// Contaminated IG distribution: a two-component mixture sharing the mode
// theta, where the second component carries a small prior weight 1 - alpha
// and an inflated spread eta * gamma.  Mild outliers ("bad points") are
// accommodated by the inflated component and detected through posterior
// probabilities.

namespace rigkit::contam {

struct ContamParams {
    double theta;  // shared mode, > 0
    double gamma;  // reference spread, > 0
    double alpha;  // proportion of good points, in [0.5, 1)
    double eta;    // contamination inflation, > 1

    // alpha = 0.5 is allowed as a closed boundary to match the EM update
    // max{0.5, mean v}.
    ContamParams(double theta, double gamma, double alpha, double eta);
};

struct ContamFit {
    ContamParams params;
    double loglik;
    std::vector<double> posteriors;  // per-point probability of being good
    std::vector<bool> good;          // posterior > 1/2
    std::size_t iterations;
    bool converged;
    bool alpha_at_floor;             // alpha pinned at 0.5
    bool no_contamination;           // eta drifted to its lower bound
    std::vector<double> loglik_trace;  // observed-data log-likelihood per iteration
};

struct LrTestResult {
    double statistic;
    int df;  // = 2
    double p_value;
};

// Partials of ln p(x; theta, gamma, alpha, eta).
struct ContamGradient {
    double d_theta;
    double d_gamma;
    double d_alpha;
    double d_eta;
};

double contam_log_pdf(double x, const ContamParams& p);
double contam_pdf(double x, const ContamParams& p);

// alpha f(x; theta, gamma) / p(x; theta, gamma, alpha, eta), in [0, 1].
double posterior_good(double x, const ContamParams& p);

ContamGradient contam_logpdf_grad(double x, const ContamParams& p);

struct EmOptions {
    double tol = 1e-8;
    std::size_t max_iter = 1000;
};

// EM on unit-weight data from the given start.  The observed-data
// log-likelihood is nondecreasing across iterations; the trace is recorded
// in the result.  Requires n >= 4.
ContamFit fit_em(std::span<const double> data, const ContamParams& init,
                 const EmOptions& options = {});

// Default fitting path: (theta, gamma) start from the plain rIG fit,
// (alpha, eta) = (0.95, 10), plus jittered restarts; the best final
// log-likelihood wins.  Deterministic given the seed.
ContamFit fit(std::span<const double> data, std::size_t n_restarts = 10,
              std::uint64_t seed = 20170101, const EmOptions& options = {});

// Direct maximization of sum_i w_i ln p(x_i; .) with analytic gradients,
// for weighted samples (the EM derivation above is unit-weight).
ContamFit fit_weighted(const WeightedSample& s, std::size_t n_restarts = 10,
                       std::uint64_t seed = 20170101, const EmOptions& options = {});

// LR statistic 2 [l_contaminated - l_rig] against chi^2 with 2 degrees of
// freedom; p = exp(-LR/2).  Both fits must come from the same sample.
// Throws std::runtime_error if the statistic is below -1e-6.
LrTestResult lr_test(const wmle::RigFit& rig_fit, const ContamFit& contam_fit);
LrTestResult lr_test(double loglik_rig, double loglik_contam);

}  // namespace rigkit::contam
