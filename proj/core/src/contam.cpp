#include "rigkit/contam.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "rigkit/optim.hpp"

namespace rigkit::contam {

namespace {

constexpr double kAlphaCeil = 1.0 - 1e-12;

// log(exp(a) + exp(b)) without overflow.
double log_add(double a, double b) {
    if (a < b) {
        std::swap(a, b);
    }
    if (b == -std::numeric_limits<double>::infinity()) {
        return a;
    }
    return a + std::log1p(std::exp(b - a));
}

struct LogComponents {
    double lp1;  // ln alpha + ln f(x; theta, gamma)
    double lp2;  // ln(1-alpha) + ln f(x; theta, eta gamma)
    double lp;   // ln p(x; .)
};

LogComponents log_components(double x, const ContamParams& p) {
    const double lf1 = log_pdf(x, RigParams(p.theta, p.gamma));
    const double lf2 = log_pdf(x, RigParams(p.theta, p.eta * p.gamma));
    LogComponents c;
    c.lp1 = std::log(p.alpha) + lf1;
    c.lp2 = std::log1p(-p.alpha) + lf2;
    c.lp = log_add(c.lp1, c.lp2);
    return c;
}

void validate_data(std::span<const double> data, std::size_t min_n, const char* where) {
    if (data.size() < min_n) {
        throw std::invalid_argument(std::string(where) + ": need n >= " + std::to_string(min_n));
    }
    for (double v : data) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw std::invalid_argument(std::string(where) + ": data must be positive reals");
        }
    }
}

}  // namespace

ContamParams::ContamParams(double theta_, double gamma_, double alpha_, double eta_)
    : theta(theta_), gamma(gamma_), alpha(alpha_), eta(eta_) {
    if (!(theta > 0.0) || !std::isfinite(theta) || !(gamma > 0.0) || !std::isfinite(gamma)) {
        throw std::invalid_argument("ContamParams: theta and gamma must be positive reals");
    }
    if (!(alpha >= 0.5 && alpha < 1.0)) {
        throw std::invalid_argument("ContamParams: alpha must lie in [0.5, 1)");
    }
    if (!(eta > 1.0) || !std::isfinite(eta)) {
        throw std::invalid_argument("ContamParams: eta must exceed 1");
    }
}

double contam_log_pdf(double x, const ContamParams& p) { return log_components(x, p).lp; }

double contam_pdf(double x, const ContamParams& p) { return std::exp(contam_log_pdf(x, p)); }

double posterior_good(double x, const ContamParams& p) {
    const LogComponents c = log_components(x, p);
    return std::exp(c.lp1 - c.lp);
}

ContamGradient contam_logpdf_grad(double x, const ContamParams& p) {
    const LogComponents c = log_components(x, p);
    // Component responsibilities r1 = alpha f1 / p, r2 = (1-alpha) f2 / p.
    const double r1 = std::exp(c.lp1 - c.lp);
    const double r2 = std::exp(c.lp2 - c.lp);
    const LogPdfGradient g1 = log_pdf_grad(x, RigParams(p.theta, p.gamma));
    const LogPdfGradient g2 = log_pdf_grad(x, RigParams(p.theta, p.eta * p.gamma));

    ContamGradient out;
    out.d_theta = r1 * g1.d_theta + r2 * g2.d_theta;
    // d/dgamma of ln f(x; theta, eta gamma) is eta times the spread partial
    // evaluated at eta gamma; d/deta contributes the symmetric gamma factor.
    out.d_gamma = r1 * g1.d_gamma + r2 * p.eta * g2.d_gamma;
    out.d_alpha = r1 / p.alpha - r2 / (1.0 - p.alpha);
    out.d_eta = r2 * p.gamma * g2.d_gamma;
    return out;
}

namespace {

// Q2(theta, gamma, eta) = sum_i [v_i ln f(x_i; theta, gamma)
//                               + (1 - v_i) ln f(x_i; theta, eta gamma)].
// Both halves are weighted rIG log-likelihoods, so Q2 and its gradient are
// O(1) in the data after one pass over the sufficient statistics.
class QTwo {
public:
    QTwo(std::span<const double> data, std::span<const double> v) : data_(data), v_(v) {
        std::vector<double> u(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            u[i] = 1.0 - v[i];
        }
        good_stats_ = wmle::SuffStats::from(data, v);
        bad_stats_ = wmle::SuffStats::from(data, u);
    }

    double value(std::span<const double> q) const {
        return wmle::weighted_loglik(good_stats_, RigParams(q[0], q[1])) +
               wmle::weighted_loglik(bad_stats_, RigParams(q[0], q[2] * q[1]));
    }

    void gradient(std::span<const double> q, std::span<double> out) const {
        const LogPdfGradient g1 = wmle::weighted_score(good_stats_, RigParams(q[0], q[1]));
        const LogPdfGradient g2 = wmle::weighted_score(bad_stats_, RigParams(q[0], q[2] * q[1]));
        out[0] = g1.d_theta + g2.d_theta;
        out[1] = g1.d_gamma + q[2] * g2.d_gamma;
        out[2] = q[1] * g2.d_gamma;
    }

    // Exact per-point objective, used to accept or reject the candidate.
    double value_per_point(const RigParams& good, double eta) const {
        const RigParams bad(good.theta, eta * good.gamma);
        double acc = 0.0;
        for (std::size_t i = 0; i < data_.size(); ++i) {
            acc += v_[i] * log_pdf(data_[i], good) +
                   (1.0 - v_[i]) * log_pdf(data_[i], bad);
        }
        return acc;
    }

private:
    std::span<const double> data_;
    std::span<const double> v_;
    wmle::SuffStats good_stats_;
    wmle::SuffStats bad_stats_;
};

ContamFit finalize(std::span<const double> data, const ContamParams& params, double loglik,
                   std::size_t iterations, bool converged, std::vector<double> trace) {
    ContamFit fit{params,
                  loglik,
                  std::vector<double>(data.size()),
                  std::vector<bool>(data.size()),
                  iterations,
                  converged,
                  params.alpha <= 0.5,
                  params.eta <= 1.0 + 1e-6,
                  std::move(trace)};
    for (std::size_t i = 0; i < data.size(); ++i) {
        fit.posteriors[i] = posterior_good(data[i], params);
        fit.good[i] = fit.posteriors[i] > 0.5;
    }
    return fit;
}

}  // namespace

ContamFit fit_em(std::span<const double> data, const ContamParams& init,
                 const EmOptions& options) {
    validate_data(data, 4, "contam::fit_em");
    const std::size_t n = data.size();

    ContamParams params = init;
    std::vector<double> v(n);
    std::vector<double> trace;

    auto observed_loglik = [&](const ContamParams& p) {
        double acc = 0.0;
        for (double x : data) {
            acc += contam_log_pdf(x, p);
        }
        return acc;
    };

    double ll = observed_loglik(params);
    if (!std::isfinite(ll)) {
        throw std::runtime_error("contam::fit_em: non-finite log-likelihood at the start");
    }
    trace.push_back(ll);

    bool converged = false;
    std::size_t iter = 0;
    const optim::Transform transforms[3] = {optim::Transform::log_positive(),
                                            optim::Transform::log_positive(),
                                            optim::Transform::shifted_log(1.0)};

    for (; iter < options.max_iter; ++iter) {
        // E-step: posterior good-point probabilities at the current params.
        for (std::size_t i = 0; i < n; ++i) {
            v[i] = posterior_good(data[i], params);
        }

        // M-step, closed-form half: alpha = max{0.5, mean v}.
        double vbar = 0.0;
        for (double vi : v) {
            vbar += vi;
        }
        vbar /= static_cast<double>(n);
        const double alpha_new = std::min(std::max(0.5, vbar), kAlphaCeil);

        // M-step, numeric half: maximize Q2 over (theta, gamma, eta),
        // warm-started at the incumbent.  The candidate is accepted only if
        // the exact per-point Q2 does not decrease, so EM ascent holds.
        const QTwo q2(data, v);
        const double start[3] = {params.theta, params.gamma, params.eta};
        auto objective = [&](std::span<const double> q) { return q2.value(q); };
        auto gradient = [&](std::span<const double> q, std::span<double> out) {
            q2.gradient(q, out);
        };
        const optim::OptimResult r =
            optim::maximize(objective, gradient, start, transforms, options.tol, 200);

        const RigParams candidate_good(r.argmax[0], r.argmax[1]);
        const double candidate_eta = std::max(r.argmax[2], 1.0 + 1e-12);
        if (q2.value_per_point(candidate_good, candidate_eta) >=
            q2.value_per_point(RigParams(params.theta, params.gamma), params.eta)) {
            params = ContamParams(candidate_good.theta, candidate_good.gamma, alpha_new,
                                  candidate_eta);
        } else {
            params = ContamParams(params.theta, params.gamma, alpha_new, params.eta);
        }

        const double ll_new = observed_loglik(params);
        if (!std::isfinite(ll_new)) {
            throw std::runtime_error("contam::fit_em: non-finite log-likelihood at iteration " +
                                     std::to_string(iter + 1));
        }
        trace.push_back(ll_new);
        const double improvement = ll_new - ll;
        ll = ll_new;
        // Improvement threshold scaled by |loglik|: an absolute cut stalls
        // on ridge crawls (near-identical components) where per-iteration
        // gains sit just above any fixed constant.
        if (improvement < options.tol * std::max(1.0, std::abs(ll_new))) {
            converged = true;
            ++iter;
            break;
        }
    }

    return finalize(data, params, ll, iter, converged, std::move(trace));
}

ContamFit fit(std::span<const double> data, std::size_t n_restarts, std::uint64_t seed,
              const EmOptions& options) {
    validate_data(data, 4, "contam::fit");
    const wmle::RigFit base =
        wmle::fit(WeightedSample::unit(std::vector<double>(data.begin(), data.end())),
                  {.tol = 1e-8, .max_iter = 500, .compute_se = false});

    RigSampler jitter(seed);
    ContamFit best{ContamParams(1, 1, 0.9, 2), -std::numeric_limits<double>::infinity(),
                   {}, {}, 0, false, false, false, {}};
    bool have = false;
    const std::size_t runs = std::max<std::size_t>(1, n_restarts);
    for (std::size_t r = 0; r < runs; ++r) {
        double alpha0 = 0.95;
        double eta0 = 10.0;
        if (r > 0) {
            alpha0 = 0.55 + 0.43 * jitter.uniform();
            eta0 = 1.5 * std::pow(50.0 / 1.5, jitter.uniform());
        }
        const ContamParams init(base.params.theta, base.params.gamma, alpha0, eta0);
        const ContamFit candidate = fit_em(data, init, options);
        if (!have || candidate.loglik > best.loglik) {
            best = candidate;
            have = true;
        }
    }
    return best;
}

ContamFit fit_weighted(const WeightedSample& s, std::size_t n_restarts, std::uint64_t seed,
                       const EmOptions& options) {
    validate_data(s.x, 4, "contam::fit_weighted");
    const wmle::RigFit base = wmle::fit(s, {.tol = 1e-8, .max_iter = 500, .compute_se = false});

    const optim::Transform transforms[4] = {
        optim::Transform::log_positive(), optim::Transform::log_positive(),
        optim::Transform::logit_interval(0.5, 1.0), optim::Transform::shifted_log(1.0)};

    auto objective = [&](std::span<const double> q) {
        const ContamParams p(q[0], q[1], q[2], q[3]);
        double acc = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s.w[i] != 0.0) {
                acc += s.w[i] * contam_log_pdf(s.x[i], p);
            }
        }
        return acc;
    };
    auto gradient = [&](std::span<const double> q, std::span<double> out) {
        const ContamParams p(q[0], q[1], q[2], q[3]);
        double dth = 0.0, dga = 0.0, dal = 0.0, det = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s.w[i] == 0.0) {
                continue;
            }
            const ContamGradient g = contam_logpdf_grad(s.x[i], p);
            dth += s.w[i] * g.d_theta;
            dga += s.w[i] * g.d_gamma;
            dal += s.w[i] * g.d_alpha;
            det += s.w[i] * g.d_eta;
        }
        out[0] = dth;
        out[1] = dga;
        out[2] = dal;
        out[3] = det;
    };

    RigSampler jitter(seed);
    optim::OptimResult best;
    best.value = -std::numeric_limits<double>::infinity();
    const std::size_t runs = std::max<std::size_t>(1, n_restarts);
    for (std::size_t r = 0; r < runs; ++r) {
        double alpha0 = 0.95;
        double eta0 = 10.0;
        if (r > 0) {
            alpha0 = 0.55 + 0.43 * jitter.uniform();
            eta0 = 1.5 * std::pow(50.0 / 1.5, jitter.uniform());
        }
        const double x0[4] = {base.params.theta, base.params.gamma, alpha0, eta0};
        const optim::OptimResult r2 =
            optim::maximize(objective, gradient, x0, transforms, options.tol, options.max_iter);
        if (r2.value > best.value) {
            best = r2;
        }
    }

    const ContamParams params(best.argmax[0], best.argmax[1],
                              std::max(0.5, std::min(best.argmax[2], kAlphaCeil)),
                              std::max(best.argmax[3], 1.0 + 1e-12));
    ContamFit fit = finalize(s.x, params, best.value, best.iterations, best.converged, {});
    return fit;
}

LrTestResult lr_test(double loglik_rig, double loglik_contam) {
    double stat = 2.0 * (loglik_contam - loglik_rig);
    if (stat < -1e-6) {
        throw std::runtime_error("lr_test: negative statistic " + std::to_string(stat) +
                                 " indicates a fitting failure");
    }
    stat = std::max(stat, 0.0);
    // chi^2 with 2 df has survival function exp(-x/2).
    return LrTestResult{stat, 2, std::exp(-0.5 * stat)};
}

LrTestResult lr_test(const wmle::RigFit& rig_fit, const ContamFit& contam_fit) {
    return lr_test(rig_fit.loglik, contam_fit.loglik);
}

}  // namespace rigkit::contam
