#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rigkit/rig.hpp"

// Weighted maximum-likelihood estimation of RigParams: the objective is
// l(theta, gamma) = sum_i w_i ln f(x_i; theta, gamma), with analytic
// score/Hessian aggregation and observed-information standard errors.
//
// The weighted log-likelihood depends on the sample only through four
// sufficient statistics (sum w, sum w x, sum w / x, sum w ln x), so the
// inner optimization runs in O(1) per evaluation after one O(n) pass.

namespace rigkit {

struct WeightedSample {
    std::vector<double> x;  // observations, all > 0
    std::vector<double> w;  // weights, all >= 0, sum > 0

    WeightedSample(std::vector<double> x, std::vector<double> w);
    static WeightedSample unit(std::vector<double> x);  // w_i = 1 for all i

    std::size_t size() const { return x.size(); }
};

}  // namespace rigkit

namespace rigkit::wmle {

struct SuffStats {
    double wsum = 0.0;      // sum w
    double sum_x = 0.0;     // sum w x
    double sum_invx = 0.0;  // sum w / x
    double sum_logx = 0.0;  // sum w ln x

    static SuffStats from(std::span<const double> x, std::span<const double> w);
    static SuffStats from(const WeightedSample& s) { return from(s.x, s.w); }
};

struct RigFit {
    RigParams params;
    double loglik;
    double se_theta;
    double se_gamma;
    bool converged;
    std::size_t iterations;
};

// Per-point aggregation, Eq.-style: sum_i w_i ln f(x_i; p).
double weighted_loglik(const WeightedSample& s, const RigParams& p);
double weighted_loglik(std::span<const double> x, std::span<const double> w, const RigParams& p);
LogPdfGradient weighted_score(const WeightedSample& s, const RigParams& p);
LogPdfHessian weighted_hessian(const WeightedSample& s, const RigParams& p);

// Closed-form equivalents through the sufficient statistics.
double weighted_loglik(const SuffStats& t, const RigParams& p);
LogPdfGradient weighted_score(const SuffStats& t, const RigParams& p);

// Closed-form method-of-moments start on the classical scale:
// lambda0 = m^3 / v, mu0 = m from the weighted mean/variance.
RigParams moment_start(const WeightedSample& s);

struct FitOptions {
    double tol = 1e-8;
    std::size_t max_iter = 500;
    bool compute_se = true;
};

// Maximizes the weighted log-likelihood from the moment start.  Throws
// std::invalid_argument for degenerate samples (spread unidentifiable).
RigFit fit(const WeightedSample& s, const FitOptions& options = {});
RigFit fit_from(const WeightedSample& s, const RigParams& start, const FitOptions& options = {});

// Optimizes on sufficient statistics alone; loglik in the result is the
// stats-form value.  Used by the EM loops, which re-evaluate candidate
// parameters per point before accepting them.
RigFit fit_stats(const SuffStats& t, const RigParams& start, const FitOptions& options = {});

}  // namespace rigkit::wmle
