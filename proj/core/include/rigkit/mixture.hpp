#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rigkit/rig.hpp"

// Finite mixtures of rIG distributions for model-based clustering and
// semiparametric density estimation: EM fitting with multiple
// initializations, MAP classification, and BIC selection over k.

namespace rigkit::mixture {

struct MixtureParams {
    std::vector<double> pi;     // weights, sum to 1
    std::vector<double> theta;  // component modes
    std::vector<double> gamma;  // component spreads

    // Validates and canonicalizes (components sorted by ascending theta).
    MixtureParams(std::vector<double> pi, std::vector<double> theta, std::vector<double> gamma);

    std::size_t k() const { return pi.size(); }
};

struct MixtureFit {
    MixtureParams params;
    double loglik;
    double bic;  // 2 loglik - (3k - 1) ln n, larger is better
    std::vector<double> responsibilities;  // row-major n x k, rows sum to 1
    std::vector<std::size_t> labels;       // row-wise argmax
    std::size_t iterations;
    bool converged;
    std::vector<double> loglik_trace;  // observed-data log-likelihood per iteration

    double responsibility(std::size_t i, std::size_t j) const {
        return responsibilities[i * params.k() + j];
    }
};

struct ModelSelection {
    std::vector<std::size_t> k_values;  // candidates that produced a fit
    std::vector<MixtureFit> fits;       // best-of-starts fit per candidate
    std::size_t best_k;                 // maximizes BIC
    std::vector<std::string> warnings;  // starts or candidates that failed
};

double mixture_log_pdf(double x, const MixtureParams& p);
double mixture_pdf(double x, const MixtureParams& p);

struct EmOptions {
    double tol = 1e-8;
    std::size_t max_iter = 1000;
};

enum class InitMethod { Random, KMeans };

// EM from explicit initial responsibilities (row-major n x k), fed to the
// first M-step.  Components whose effective weight drops below 3 raise
// std::runtime_error naming the component.
MixtureFit fit_em(std::span<const double> data, std::size_t k,
                  std::span<const double> init_responsibilities, const EmOptions& options = {});

// EM initialized from parameter values (an E-step builds the first
// responsibilities).
MixtureFit fit_em(std::span<const double> data, const MixtureParams& init,
                  const EmOptions& options = {});

// EM with a generated start: uniform random hard labels or 1-D k-means.
MixtureFit fit_em(std::span<const double> data, std::size_t k, InitMethod method,
                  std::uint64_t seed, const EmOptions& options = {});

// For each k in [k_min, k_max]: n_random_starts random starts plus an
// optional k-means start, keeping the run with the highest log-likelihood;
// best_k maximizes BIC.  Failed runs are recorded as warnings.
ModelSelection select_k(std::span<const double> data, std::size_t k_min, std::size_t k_max,
                        std::size_t n_random_starts = 9, bool use_kmeans_start = true,
                        std::uint64_t seed = 20170101, const EmOptions& options = {});

// MAP assignment of a new observation; ties break toward the smaller index.
std::pair<std::size_t, std::vector<double>> classify(const MixtureFit& fit, double x_new);

}  // namespace rigkit::mixture
