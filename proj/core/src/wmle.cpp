#include "rigkit/wmle.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "rigkit/optim.hpp"

namespace rigkit {

WeightedSample::WeightedSample(std::vector<double> x_, std::vector<double> w_)
    : x(std::move(x_)), w(std::move(w_)) {
    if (x.empty() || x.size() != w.size()) {
        throw std::invalid_argument("WeightedSample: x and w must be nonempty, same length");
    }
    double wsum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !std::isfinite(x[i])) {
            throw std::invalid_argument("WeightedSample: observations must be positive reals");
        }
        if (!(w[i] >= 0.0) || !std::isfinite(w[i])) {
            throw std::invalid_argument("WeightedSample: weights must be nonnegative reals");
        }
        wsum += w[i];
    }
    if (!(wsum > 0.0)) {
        throw std::invalid_argument("WeightedSample: weights must not all be zero");
    }
}

WeightedSample WeightedSample::unit(std::vector<double> x_) {
    std::vector<double> ones(x_.size(), 1.0);
    return WeightedSample(std::move(x_), std::move(ones));
}

}  // namespace rigkit

namespace rigkit::wmle {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

}  // namespace

SuffStats SuffStats::from(std::span<const double> x, std::span<const double> w) {
    SuffStats t;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (w[i] == 0.0) {
            continue;
        }
        t.wsum += w[i];
        t.sum_x += w[i] * x[i];
        t.sum_invx += w[i] / x[i];
        t.sum_logx += w[i] * std::log(x[i]);
    }
    return t;
}

double weighted_loglik(std::span<const double> x, std::span<const double> w, const RigParams& p) {
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (w[i] == 0.0) {
            continue;
        }
        acc += w[i] * log_pdf(x[i], p);
    }
    return acc;
}

double weighted_loglik(const WeightedSample& s, const RigParams& p) {
    return weighted_loglik(s.x, s.w, p);
}

double weighted_loglik(const SuffStats& t, const RigParams& p) {
    const double prod = p.theta * (3.0 * p.gamma + p.theta);
    const double m = std::sqrt(prod);
    // sum w (x - m)^2 / x expands over the statistics.
    const double quad = t.sum_x - 2.0 * m * t.wsum + prod * t.sum_invx;
    return 0.5 * t.wsum * (std::log(prod) - kLog2Pi - std::log(p.gamma)) - 1.5 * t.sum_logx -
           quad / (2.0 * p.gamma);
}

LogPdfGradient weighted_score(const WeightedSample& s, const RigParams& p) {
    LogPdfGradient total{0.0, 0.0};
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s.w[i] == 0.0) {
            continue;
        }
        const LogPdfGradient g = log_pdf_grad(s.x[i], p);
        total.d_theta += s.w[i] * g.d_theta;
        total.d_gamma += s.w[i] * g.d_gamma;
    }
    return total;
}

LogPdfGradient weighted_score(const SuffStats& t, const RigParams& p) {
    const double th = p.theta;
    const double ga = p.gamma;
    const double s = 3.0 * ga + th;
    const double prod = th * s;
    const double m = std::sqrt(prod);
    LogPdfGradient g;
    g.d_theta = (3.0 * ga + 2.0 * th) * ((ga + m) * t.wsum - prod * t.sum_invx) /
                (2.0 * ga * prod);
    g.d_gamma = t.sum_x / (2.0 * ga * ga) + th * th * t.sum_invx / (2.0 * ga * ga) +
                t.wsum * (-th / (2.0 * ga * s) + 3.0 * std::sqrt(th) / (2.0 * ga * std::sqrt(s)) -
                          m / (ga * ga));
    return g;
}

LogPdfHessian weighted_hessian(const WeightedSample& s, const RigParams& p) {
    LogPdfHessian total{0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s.w[i] == 0.0) {
            continue;
        }
        const LogPdfHessian h = log_pdf_hess(s.x[i], p);
        total.d_theta_theta += s.w[i] * h.d_theta_theta;
        total.d_theta_gamma += s.w[i] * h.d_theta_gamma;
        total.d_gamma_gamma += s.w[i] * h.d_gamma_gamma;
    }
    return total;
}

namespace {

struct WeightedMoments {
    double mean;
    double var;
};

WeightedMoments moments(const WeightedSample& s) {
    double wsum = 0.0, mean = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        wsum += s.w[i];
        mean += s.w[i] * s.x[i];
    }
    mean /= wsum;
    double var = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double d = s.x[i] - mean;
        var += s.w[i] * d * d;
    }
    var /= wsum;
    return {mean, var};
}

}  // namespace

RigParams moment_start(const WeightedSample& s) {
    const WeightedMoments m = moments(s);
    if (!(m.var > 0.0)) {
        throw std::invalid_argument("fit: spread unidentifiable (all positive-weight "
                                    "observations are equal)");
    }
    return from_classical(ClassicalIgParams(m.mean, m.mean * m.mean * m.mean / m.var));
}

RigFit fit_stats(const SuffStats& t, const RigParams& start, const FitOptions& options) {
    const optim::Transform transforms[2] = {optim::Transform::log_positive(),
                                            optim::Transform::log_positive()};
    const double x0[2] = {start.theta, start.gamma};

    auto objective = [&](std::span<const double> v) {
        return weighted_loglik(t, RigParams(v[0], v[1]));
    };
    auto gradient = [&](std::span<const double> v, std::span<double> out) {
        const LogPdfGradient g = weighted_score(t, RigParams(v[0], v[1]));
        out[0] = g.d_theta;
        out[1] = g.d_gamma;
    };

    const optim::OptimResult r =
        optim::maximize(objective, gradient, x0, transforms, options.tol, options.max_iter);
    return RigFit{RigParams(r.argmax[0], r.argmax[1]), r.value, 0.0, 0.0, r.converged,
                  r.iterations};
}

RigFit fit_from(const WeightedSample& s, const RigParams& start, const FitOptions& options) {
    RigFit out = fit_stats(SuffStats::from(s), start, options);

    // Newton polish on the exact per-point score: a couple of steps with the
    // analytic Hessian push the stationarity residual to the rounding floor.
    double best = weighted_loglik(s, out.params);
    for (int step = 0; step < 5; ++step) {
        const LogPdfGradient g = weighted_score(s, out.params);
        const LogPdfHessian h = weighted_hessian(s, out.params);
        const double det = h.d_theta_theta * h.d_gamma_gamma - h.d_theta_gamma * h.d_theta_gamma;
        if (!(det > 0.0) || !(h.d_theta_theta < 0.0)) {
            break;
        }
        const double dth = -(h.d_gamma_gamma * g.d_theta - h.d_theta_gamma * g.d_gamma) / det;
        const double dga = -(h.d_theta_theta * g.d_gamma - h.d_theta_gamma * g.d_theta) / det;
        const double theta_new = out.params.theta + dth;
        const double gamma_new = out.params.gamma + dga;
        if (!(theta_new > 0.0) || !(gamma_new > 0.0)) {
            break;
        }
        const RigParams candidate(theta_new, gamma_new);
        const double value = weighted_loglik(s, candidate);
        // Near the maximum the objective moves only by rounding noise while
        // the score norm keeps dropping; allow that slack.
        if (!(value >= best - 1e-9 * std::max(1.0, std::abs(best)))) {
            break;
        }
        out.params = candidate;
        best = std::max(best, value);
    }

    // Report the per-point objective at the maximizer, the contract value.
    out.loglik = weighted_loglik(s, out.params);
    if (options.compute_se) {
        // Observed information: invert the negated weighted Hessian at the maximum.
        const LogPdfHessian h = weighted_hessian(s, out.params);
        const double det = h.d_theta_theta * h.d_gamma_gamma - h.d_theta_gamma * h.d_theta_gamma;
        if (det > 0.0 && h.d_theta_theta < 0.0) {
            out.se_theta = std::sqrt(-h.d_gamma_gamma / det);
            out.se_gamma = std::sqrt(-h.d_theta_theta / det);
        } else {
            out.se_theta = std::numeric_limits<double>::quiet_NaN();
            out.se_gamma = std::numeric_limits<double>::quiet_NaN();
        }
    }
    return out;
}

RigFit fit(const WeightedSample& s, const FitOptions& options) {
    // moment_start rejects degenerate samples (zero weighted variance).
    return fit_from(s, moment_start(s), options);
}

}  // namespace rigkit::wmle
