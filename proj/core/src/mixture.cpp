#include "rigkit/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "rigkit/wmle.hpp"

namespace rigkit::mixture {

namespace {

constexpr double kMinEffectiveCount = 3.0;

void validate_data(std::span<const double> data, const char* where) {
    if (data.empty()) {
        throw std::invalid_argument(std::string(where) + ": data must be nonempty");
    }
    for (double v : data) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw std::invalid_argument(std::string(where) + ": data must be positive reals");
        }
    }
}

double logsumexp_row(std::span<const double> row) {
    const double mx = *std::max_element(row.begin(), row.end());
    double acc = 0.0;
    for (double v : row) {
        acc += std::exp(v - mx);
    }
    return mx + std::log(acc);
}

}  // namespace

MixtureParams::MixtureParams(std::vector<double> pi_, std::vector<double> theta_,
                             std::vector<double> gamma_)
    : pi(std::move(pi_)), theta(std::move(theta_)), gamma(std::move(gamma_)) {
    const std::size_t k = pi.size();
    if (k == 0 || theta.size() != k || gamma.size() != k) {
        throw std::invalid_argument("MixtureParams: pi, theta, gamma must share a length >= 1");
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        if (!(pi[j] > 0.0 && pi[j] <= 1.0)) {
            throw std::invalid_argument("MixtureParams: weights must lie in (0, 1]");
        }
        if (!(theta[j] > 0.0) || !(gamma[j] > 0.0) || !std::isfinite(theta[j]) ||
            !std::isfinite(gamma[j])) {
            throw std::invalid_argument("MixtureParams: theta and gamma must be positive reals");
        }
        sum += pi[j];
    }
    if (std::abs(sum - 1.0) > 1e-8) {
        throw std::invalid_argument("MixtureParams: weights must sum to 1");
    }
    for (double& p : pi) {
        p /= sum;
    }
    // Canonical ordering: ascending theta resolves label switching.
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return theta[a] < theta[b]; });
    std::vector<double> pi2(k), th2(k), ga2(k);
    for (std::size_t j = 0; j < k; ++j) {
        pi2[j] = pi[order[j]];
        th2[j] = theta[order[j]];
        ga2[j] = gamma[order[j]];
    }
    pi = std::move(pi2);
    theta = std::move(th2);
    gamma = std::move(ga2);
}

double mixture_log_pdf(double x, const MixtureParams& p) {
    const std::size_t k = p.k();
    std::vector<double> terms(k);
    for (std::size_t j = 0; j < k; ++j) {
        terms[j] = std::log(p.pi[j]) + log_pdf(x, RigParams(p.theta[j], p.gamma[j]));
    }
    return logsumexp_row(terms);
}

double mixture_pdf(double x, const MixtureParams& p) { return std::exp(mixture_log_pdf(x, p)); }

namespace {

struct EmState {
    std::vector<double> pi, theta, gamma;  // current component parameters
    std::vector<double> resp;              // row-major n x k
    double loglik = -std::numeric_limits<double>::infinity();
};

// E-step: fills state.resp from the current parameters and returns the
// observed-data log-likelihood.
double e_step(std::span<const double> data, EmState& st) {
    const std::size_t n = data.size();
    const std::size_t k = st.pi.size();
    std::vector<double> row(k);
    std::vector<double> logpi(k);
    std::vector<RigParams> comp;
    comp.reserve(k);
    for (std::size_t j = 0; j < k; ++j) {
        logpi[j] = std::log(st.pi[j]);
        comp.emplace_back(st.theta[j], st.gamma[j]);
    }
    double ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            row[j] = logpi[j] + log_pdf(data[i], comp[j]);
        }
        const double lse = logsumexp_row(row);
        ll += lse;
        for (std::size_t j = 0; j < k; ++j) {
            st.resp[i * k + j] = std::exp(row[j] - lse);
        }
    }
    return ll;
}

// Weighted method-of-moments start on the classical scale.
RigParams weighted_moment_start(std::span<const double> data, std::span<const double> w,
                                double wsum, std::size_t component) {
    double mean = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        mean += w[i] * data[i];
    }
    mean /= wsum;
    double var = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double d = data[i] - mean;
        var += w[i] * d * d;
    }
    var /= wsum;
    if (!(var > 0.0)) {
        throw std::runtime_error("mixture::fit_em: component " + std::to_string(component) +
                                 " degenerated (zero weighted spread)");
    }
    return from_classical(ClassicalIgParams(mean, mean * mean * mean / var));
}

// M-step: pi from column means, (theta_j, gamma_j) from the weighted MLE of
// the column-weighted sample.  The optimizer runs on sufficient statistics;
// a per-point check keeps the incumbent whenever the candidate does not
// improve the exact weighted log-likelihood, preserving the ascent property.
void m_step(std::span<const double> data, EmState& st, bool have_params, double tol) {
    const std::size_t n = data.size();
    const std::size_t k = st.pi.size();
    std::vector<double> column(n);
    for (std::size_t j = 0; j < k; ++j) {
        double count = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            column[i] = st.resp[i * k + j];
            count += column[i];
        }
        if (count < kMinEffectiveCount) {
            throw std::runtime_error("mixture::fit_em: component " + std::to_string(j) +
                                     " degenerated (effective weight " + std::to_string(count) +
                                     " below 3)");
        }
        st.pi[j] = count / static_cast<double>(n);

        const wmle::SuffStats stats = wmle::SuffStats::from(data, column);
        const RigParams start = have_params ? RigParams(st.theta[j], st.gamma[j])
                                            : weighted_moment_start(data, column, count, j);
        const wmle::RigFit fit = wmle::fit_stats(stats, start, {tol, 100, false});
        if (have_params) {
            const RigParams incumbent(st.theta[j], st.gamma[j]);
            if (wmle::weighted_loglik(data, column, fit.params) <
                wmle::weighted_loglik(data, column, incumbent)) {
                continue;  // keep the incumbent component parameters
            }
        }
        st.theta[j] = fit.params.theta;
        st.gamma[j] = fit.params.gamma;
    }
}

MixtureFit run_em(std::span<const double> data, EmState st, bool params_initialized,
                  const EmOptions& options) {
    const std::size_t n = data.size();
    const std::size_t k = st.pi.size();
    if (n < 3 * k) {
        throw std::invalid_argument("mixture::fit_em: need n >= 3k");
    }

    std::vector<double> trace;
    bool converged = false;
    std::size_t iter = 0;
    bool have_params = params_initialized;
    double ll = -std::numeric_limits<double>::infinity();

    if (params_initialized) {
        // Parameters given: responsibilities come from an initial E-step.
        ll = e_step(data, st);
        trace.push_back(ll);
    }

    for (; iter < options.max_iter; ++iter) {
        m_step(data, st, have_params, options.tol);
        have_params = true;
        const double ll_new = e_step(data, st);
        if (!std::isfinite(ll_new)) {
            throw std::runtime_error("mixture::fit_em: non-finite log-likelihood at iteration " +
                                     std::to_string(iter + 1));
        }
        trace.push_back(ll_new);
        const double improvement = ll_new - ll;
        ll = ll_new;
        // |loglik|-scaled improvement threshold, as in contam::fit_em.
        if (std::isfinite(improvement) &&
            improvement < options.tol * std::max(1.0, std::abs(ll_new))) {
            converged = true;
            ++iter;
            break;
        }
    }

    // Canonicalize component order (ascending theta) and derive outputs.
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return st.theta[a] < st.theta[b]; });
    std::vector<double> pi(k), th(k), ga(k);
    for (std::size_t j = 0; j < k; ++j) {
        pi[j] = st.pi[order[j]];
        th[j] = st.theta[order[j]];
        ga[j] = st.gamma[order[j]];
    }
    std::vector<double> resp(n * k);
    std::vector<std::size_t> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t arg = 0;
        double bestv = -1.0;
        for (std::size_t j = 0; j < k; ++j) {
            const double z = st.resp[i * k + order[j]];
            resp[i * k + j] = z;
            if (z > bestv) {
                bestv = z;
                arg = j;
            }
        }
        labels[i] = arg;
    }

    const double bic =
        2.0 * ll - (3.0 * static_cast<double>(k) - 1.0) * std::log(static_cast<double>(n));
    return MixtureFit{MixtureParams(std::move(pi), std::move(th), std::move(ga)),
                      ll,
                      bic,
                      std::move(resp),
                      std::move(labels),
                      iter,
                      converged,
                      std::move(trace)};
}

std::vector<double> responsibilities_from_labels(std::span<const std::size_t> labels,
                                                 std::size_t k) {
    std::vector<double> resp(labels.size() * k, 0.0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        resp[i * k + labels[i]] = 1.0;
    }
    return resp;
}

std::vector<std::size_t> kmeans_labels(std::span<const double> data, std::size_t k) {
    const std::size_t n = data.size();
    std::vector<double> sorted(data.begin(), data.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> centers(k);
    for (std::size_t j = 0; j < k; ++j) {
        const double q = (static_cast<double>(j) + 0.5) / static_cast<double>(k);
        centers[j] = sorted[std::min(n - 1, static_cast<std::size_t>(q * static_cast<double>(n)))];
    }
    std::vector<std::size_t> labels(n, 0);
    for (int pass = 0; pass < 100; ++pass) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t arg = 0;
            double best = std::abs(data[i] - centers[0]);
            for (std::size_t j = 1; j < k; ++j) {
                const double d = std::abs(data[i] - centers[j]);
                if (d < best) {
                    best = d;
                    arg = j;
                }
            }
            if (arg != labels[i]) {
                labels[i] = arg;
                changed = true;
            }
        }
        std::vector<double> sum(k, 0.0);
        std::vector<std::size_t> cnt(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            sum[labels[i]] += data[i];
            ++cnt[labels[i]];
        }
        for (std::size_t j = 0; j < k; ++j) {
            if (cnt[j] > 0) {
                centers[j] = sum[j] / static_cast<double>(cnt[j]);
            }
        }
        if (!changed && pass > 0) {
            break;
        }
    }
    return labels;
}

}  // namespace

MixtureFit fit_em(std::span<const double> data, std::size_t k,
                  std::span<const double> init_responsibilities, const EmOptions& options) {
    validate_data(data, "mixture::fit_em");
    const std::size_t n = data.size();
    if (k == 0 || init_responsibilities.size() != n * k) {
        throw std::invalid_argument("mixture::fit_em: responsibilities must be n x k");
    }
    EmState st;
    st.pi.assign(k, 1.0 / static_cast<double>(k));
    st.theta.assign(k, 1.0);
    st.gamma.assign(k, 1.0);
    st.resp.resize(n * k);
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            const double z = init_responsibilities[i * k + j];
            if (!(z >= 0.0) || !std::isfinite(z)) {
                throw std::invalid_argument("mixture::fit_em: responsibilities must be >= 0");
            }
            row += z;
        }
        if (!(row > 0.0)) {
            throw std::invalid_argument("mixture::fit_em: responsibility rows must sum > 0");
        }
        for (std::size_t j = 0; j < k; ++j) {
            st.resp[i * k + j] = init_responsibilities[i * k + j] / row;
        }
    }
    return run_em(data, std::move(st), false, options);
}

MixtureFit fit_em(std::span<const double> data, const MixtureParams& init,
                  const EmOptions& options) {
    validate_data(data, "mixture::fit_em");
    EmState st;
    st.pi = init.pi;
    st.theta = init.theta;
    st.gamma = init.gamma;
    st.resp.resize(data.size() * init.k());
    return run_em(data, std::move(st), true, options);
}

MixtureFit fit_em(std::span<const double> data, std::size_t k, InitMethod method,
                  std::uint64_t seed, const EmOptions& options) {
    validate_data(data, "mixture::fit_em");
    const std::size_t n = data.size();
    if (k == 0 || n < 3 * k) {
        throw std::invalid_argument("mixture::fit_em: need k >= 1 and n >= 3k");
    }
    std::vector<std::size_t> labels;
    if (method == InitMethod::KMeans) {
        labels = kmeans_labels(data, k);
    } else {
        RigSampler rng(seed);
        labels.resize(n);
        for (int attempt = 0; attempt < 200; ++attempt) {
            std::vector<std::size_t> count(k, 0);
            for (std::size_t i = 0; i < n; ++i) {
                labels[i] = std::min<std::size_t>(
                    k - 1, static_cast<std::size_t>(rng.uniform() * static_cast<double>(k)));
                ++count[labels[i]];
            }
            if (*std::min_element(count.begin(), count.end()) >= 3) {
                break;
            }
            if (attempt == 199) {
                throw std::runtime_error("mixture::fit_em: could not draw a random start with "
                                         ">= 3 points per component");
            }
        }
    }
    const std::vector<double> resp = responsibilities_from_labels(labels, k);
    return fit_em(data, k, resp, options);
}

ModelSelection select_k(std::span<const double> data, std::size_t k_min, std::size_t k_max,
                        std::size_t n_random_starts, bool use_kmeans_start, std::uint64_t seed,
                        const EmOptions& options) {
    validate_data(data, "mixture::select_k");
    if (k_min == 0 || k_min > k_max) {
        throw std::invalid_argument("mixture::select_k: need 1 <= k_min <= k_max");
    }

    ModelSelection sel;
    sel.best_k = 0;
    double best_bic = -std::numeric_limits<double>::infinity();

    for (std::size_t k = k_min; k <= k_max; ++k) {
        bool have = false;
        MixtureFit best_fit{MixtureParams({1.0}, {1.0}, {1.0}), 0, 0, {}, {}, 0, false, {}};
        for (std::size_t s = 0; s <= n_random_starts; ++s) {
            const bool kmeans_run = (s == n_random_starts);
            if (kmeans_run && !use_kmeans_start) {
                continue;
            }
            try {
                // Distinct deterministic substream per (k, start).
                const std::uint64_t run_seed = seed + 0x9e3779b97f4a7c15ULL * (k * 64 + s + 1);
                const MixtureFit fit =
                    kmeans_run ? fit_em(data, k, InitMethod::KMeans, run_seed, options)
                               : fit_em(data, k, InitMethod::Random, run_seed, options);
                if (!have || fit.loglik > best_fit.loglik) {
                    best_fit = fit;
                    have = true;
                }
            } catch (const std::exception& e) {
                sel.warnings.push_back("k=" + std::to_string(k) + " start " + std::to_string(s) +
                                       ": " + e.what());
            }
        }
        if (!have) {
            sel.warnings.push_back("k=" + std::to_string(k) + ": all starts failed, excluded");
            continue;
        }
        sel.k_values.push_back(k);
        sel.fits.push_back(std::move(best_fit));
        if (sel.fits.back().bic > best_bic) {
            best_bic = sel.fits.back().bic;
            sel.best_k = k;
        }
    }
    if (sel.fits.empty()) {
        throw std::runtime_error("mixture::select_k: every candidate k failed");
    }
    return sel;
}

std::pair<std::size_t, std::vector<double>> classify(const MixtureFit& fit, double x_new) {
    const std::size_t k = fit.params.k();
    std::vector<double> row(k);
    for (std::size_t j = 0; j < k; ++j) {
        row[j] = std::log(fit.params.pi[j]) +
                 log_pdf(x_new, RigParams(fit.params.theta[j], fit.params.gamma[j]));
    }
    const double lse = logsumexp_row(row);
    std::vector<double> posterior(k);
    std::size_t arg = 0;
    double best = -1.0;
    for (std::size_t j = 0; j < k; ++j) {
        posterior[j] = std::exp(row[j] - lse);
        if (posterior[j] > best) {
            best = posterior[j];
            arg = j;
        }
    }
    return {arg, posterior};
}

}  // namespace rigkit::mixture
