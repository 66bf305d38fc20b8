#include "rigkit/rig.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace rigkit {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw std::invalid_argument(std::string(name) + " must be a positive finite real, got " +
                                    std::to_string(v));
    }
}

void require_in_domain(double x) {
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw std::domain_error("x must lie in the support (0, inf), got " + std::to_string(x));
    }
}

}  // namespace

RigParams::RigParams(double theta_, double gamma_) : theta(theta_), gamma(gamma_) {
    require_positive(theta, "theta");
    require_positive(gamma, "gamma");
}

ClassicalIgParams::ClassicalIgParams(double mu_, double lambda_) : mu(mu_), lambda(lambda_) {
    require_positive(mu, "mu");
    require_positive(lambda, "lambda");
}

ClassicalIgParams to_classical(const RigParams& p) {
    const double prod = p.theta * (3.0 * p.gamma + p.theta);
    return ClassicalIgParams(std::sqrt(prod), prod / p.gamma);
}

RigParams from_classical(const ClassicalIgParams& p) {
    const double r = 3.0 * p.mu / (2.0 * p.lambda);
    // theta = mu (sqrt(1 + r^2) - r); the hypot form keeps the sqrt stable for large r.
    const double theta = p.mu * (std::hypot(1.0, r) - r);
    const double gamma = p.mu * p.mu / p.lambda;
    return RigParams(theta, gamma);
}

double log_pdf(double x, const RigParams& p) {
    require_in_domain(x);
    const double prod = p.theta * (3.0 * p.gamma + p.theta);
    const double m = std::sqrt(prod);
    const double d = x - m;
    return 0.5 * (std::log(prod) - kLog2Pi - std::log(p.gamma) - 3.0 * std::log(x)) -
           d * d / (2.0 * p.gamma * x);
}

double pdf(double x, const RigParams& p) { return std::exp(log_pdf(x, p)); }

double log_pdf(double x, const ClassicalIgParams& p) {
    require_in_domain(x);
    const double d = x - p.mu;
    return 0.5 * (std::log(p.lambda) - kLog2Pi - 3.0 * std::log(x)) -
           p.lambda * d * d / (2.0 * p.mu * p.mu * x);
}

double pdf(double x, const ClassicalIgParams& p) { return std::exp(log_pdf(x, p)); }

namespace detail {

double norm_cdf(double z) { return 0.5 * std::erfc(-z * M_SQRT1_2); }

double log_norm_cdf(double z) {
    if (z > -20.0) {
        return std::log(0.5 * std::erfc(-z * M_SQRT1_2));
    }
    // Asymptotic expansion of Mills' ratio for the far left tail, where
    // erfc underflows: Phi(z) ~ phi(z)/(-z) (1 - 1/z^2 + 3/z^4 - ...).
    const double z2 = z * z;
    const double inv2 = 1.0 / z2;
    const double series = inv2 * (-1.0 + inv2 * (3.0 + inv2 * (-15.0 + inv2 * 105.0)));
    return -0.5 * z2 - 0.5 * kLog2Pi - std::log(-z) + std::log1p(series);
}

}  // namespace detail

double cdf(double x, const RigParams& p) {
    require_in_domain(x);
    const ClassicalIgParams c = to_classical(p);
    const double t = std::sqrt(c.lambda / x);
    const double a = t * (x / c.mu - 1.0);
    const double b = -t * (x / c.mu + 1.0);
    const double value =
        detail::norm_cdf(a) + std::exp(2.0 * c.lambda / c.mu + detail::log_norm_cdf(b));
    return std::min(1.0, std::max(0.0, value));
}

double mode(const RigParams& p) { return p.theta; }

double variance(const RigParams& p) {
    return p.gamma * std::sqrt(p.theta) * std::sqrt(3.0 * p.gamma + p.theta);
}

double skewness(const RigParams& p) {
    return 3.0 * std::sqrt(p.gamma / std::sqrt(p.theta * (3.0 * p.gamma + p.theta)));
}

LogPdfGradient log_pdf_grad(double x, const RigParams& p) {
    require_in_domain(x);
    const double th = p.theta;
    const double ga = p.gamma;
    const double s = 3.0 * ga + th;
    const double rth = std::sqrt(th);
    const double rs = std::sqrt(s);
    LogPdfGradient g;
    g.d_theta = -1.5 / x - th / (x * ga) + 1.0 / s + 3.0 * ga / (2.0 * th * s) +
                rth / (2.0 * ga * rs) + rs / (2.0 * ga * rth);
    g.d_gamma = x / (2.0 * ga * ga) + th * th / (2.0 * x * ga * ga) - th / (2.0 * ga * s) +
                3.0 * rth / (2.0 * ga * rs) - rth * rs / (ga * ga);
    return g;
}

LogPdfHessian log_pdf_hess(double x, const RigParams& p) {
    require_in_domain(x);
    const double th = p.theta;
    const double ga = p.gamma;
    const double s = 3.0 * ga + th;
    const double rth = std::sqrt(th);
    const double rs = std::sqrt(s);
    const double m = rth * rs;  // sqrt(theta (3 gamma + theta))
    LogPdfHessian h;
    h.d_theta_theta =
        -0.25 * (4.0 / (x * ga) + 2.0 / (th * th) + 2.0 / (s * s) + 9.0 * ga / (th * rth * s * rs));
    h.d_theta_gamma =
        th / (x * ga * ga) +
        (-27.0 * ga * ga * ga - 30.0 * ga * th * th - 4.0 * th * th * th -
         3.0 * ga * ga * (21.0 * th + 2.0 * m)) /
            (4.0 * ga * ga * rth * s * s * rs);
    h.d_gamma_gamma = -x / (ga * ga * ga) - th * th / (x * ga * ga * ga) +
                      3.0 * th / (2.0 * ga * s * s) - 9.0 * rth / (4.0 * ga * s * rs) +
                      th / (2.0 * ga * ga * s) - 3.0 * rth / (ga * ga * rs) +
                      2.0 * m / (ga * ga * ga);
    return h;
}

RigSampler::RigSampler(std::uint64_t seed) : engine_(seed) {}

double RigSampler::uniform() {
    // 53-bit mantissa draw in (0,1); the +0.5 offset keeps 0 out of range.
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double RigSampler::normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double RigSampler::draw(const RigParams& p) {
    // Michael-Schucany-Haas transform with rejection on the classical scale.
    const ClassicalIgParams c = to_classical(p);
    const double z = normal();
    const double y = z * z;
    const double r = c.mu * y / (2.0 * c.lambda);
    // Small root of the quadratic, written without cancellation:
    // w = mu (1 + r - sqrt(r^2 + 2r)) = mu / (1 + r + sqrt(r^2 + 2r)).
    const double w = c.mu / (1.0 + r + std::sqrt(r * (r + 2.0)));
    const double u = uniform();
    if (u <= c.mu / (c.mu + w)) {
        return w;
    }
    return c.mu * c.mu / w;
}

std::vector<double> sample(const RigParams& p, std::size_t n, std::uint64_t seed) {
    if (n == 0) {
        throw std::invalid_argument("sample: n must be >= 1");
    }
    RigSampler sampler(seed);
    std::vector<double> out(n);
    for (auto& v : out) {
        v = sampler.draw(p);
    }
    return out;
}

}  // namespace rigkit
