#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

// Mode-parameterized inverse Gaussian (rIG) distribution.
//
// The distribution is indexed by its mode theta > 0 and a spread parameter
// gamma > 0.  It is related to the classical mean/shape (mu, lambda)
// parameterization by
//
//   mu = sqrt(theta (3 gamma + theta)),  lambda = theta (3 gamma + theta) / gamma.
//
// All functions here are pure; parameter structs are immutable values.

namespace rigkit {

struct RigParams {
    double theta;  // mode, data units
    double gamma;  // spread, data units

    RigParams(double theta, double gamma);  // throws std::invalid_argument unless both > 0
};

struct ClassicalIgParams {
    double mu;      // mean
    double lambda;  // shape

    ClassicalIgParams(double mu, double lambda);  // throws std::invalid_argument unless both > 0
};

// Partials of ln f(x; theta, gamma) with respect to the parameters.
struct LogPdfGradient {
    double d_theta;
    double d_gamma;
};

// Symmetric 2x2 second-derivative matrix; the mixed partial is stored once.
struct LogPdfHessian {
    double d_theta_theta;
    double d_theta_gamma;
    double d_gamma_gamma;
};

ClassicalIgParams to_classical(const RigParams& p);
RigParams from_classical(const ClassicalIgParams& p);

// ln f(x; theta, gamma); the numerically stable primitive.  Throws
// std::domain_error for x <= 0 or non-finite x.
double log_pdf(double x, const RigParams& p);
double pdf(double x, const RigParams& p);

// Classical-parameterization density, kept as an independent closed form so
// the two routes can be cross-checked.
double log_pdf(double x, const ClassicalIgParams& p);
double pdf(double x, const ClassicalIgParams& p);

// P(X <= x).  Standard-normal-CDF expression for the classical IG applied
// after conversion; the exp(2 lambda / mu) factor is handled in log space.
double cdf(double x, const RigParams& p);

double mode(const RigParams& p);      // = theta
double variance(const RigParams& p);  // = gamma sqrt(theta) sqrt(3 gamma + theta)
double skewness(const RigParams& p);  // = 3 sqrt(gamma / sqrt(theta (3 gamma + theta)))

LogPdfGradient log_pdf_grad(double x, const RigParams& p);
LogPdfHessian log_pdf_hess(double x, const RigParams& p);

// Draws from the distribution via the transform-with-rejection method on the
// classical parameterization.  Uniforms are derived from raw mt19937_64
// output and normals by explicit Box-Muller, so the stream is fully
// determined by the seed regardless of standard library implementation.
class RigSampler {
public:
    explicit RigSampler(std::uint64_t seed);

    double draw(const RigParams& p);
    double uniform();  // U in (0,1), exposed for mixture/contamination sampling
    double normal();   // standard normal

private:
    std::mt19937_64 engine_;
};

std::vector<double> sample(const RigParams& p, std::size_t n, std::uint64_t seed);

namespace detail {
// ln Phi(z) for the standard normal, accurate far into the left tail.
double log_norm_cdf(double z);
double norm_cdf(double z);
}  // namespace detail

}  // namespace rigkit
