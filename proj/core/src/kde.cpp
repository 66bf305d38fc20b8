#include "rigkit/kde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "rigkit/optim.hpp"

namespace rigkit::kde {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

void validate_data(std::span<const double> data) {
    if (data.empty()) {
        throw std::invalid_argument("kde: data must be nonempty");
    }
    for (double v : data) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw std::invalid_argument("kde: data must be positive reals");
        }
    }
}

// Per-kernel constants for evaluating log k_gamma(x; X_j) over many x.
struct KernelTerms {
    std::vector<double> m;       // sqrt(theta_j (3 gamma + theta_j))
    std::vector<double> half_c;  // 0.5 ln(theta_j (3 gamma + theta_j))
    double gamma;
    double log_norm;  // -0.5 ln(2 pi gamma)

    KernelTerms(std::span<const double> centers, double gamma_)
        : m(centers.size()), half_c(centers.size()), gamma(gamma_),
          log_norm(-0.5 * (kLog2Pi + std::log(gamma_))) {
        for (std::size_t j = 0; j < centers.size(); ++j) {
            const double prod = centers[j] * (3.0 * gamma + centers[j]);
            m[j] = std::sqrt(prod);
            half_c[j] = 0.5 * std::log(prod);
        }
    }

    double log_kernel(double x, std::size_t j) const {
        const double d = x - m[j];
        return half_c[j] + log_norm - 1.5 * std::log(x) - d * d / (2.0 * gamma * x);
    }
};

}  // namespace

KdeModel::KdeModel(std::vector<double> data_, double gamma_)
    : data(std::move(data_)), gamma(gamma_) {
    validate_data(data);
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        throw std::invalid_argument("kde: gamma must be a positive real");
    }
}

double kde_eval(const KdeModel& m, double x) {
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw std::domain_error("kde_eval: x must lie in (0, inf)");
    }
    const KernelTerms terms(m.data, m.gamma);
    double acc = 0.0;
    for (std::size_t j = 0; j < m.data.size(); ++j) {
        acc += std::exp(terms.log_kernel(x, j));
    }
    return acc / static_cast<double>(m.data.size());
}

namespace {

// Leave-one-out log density at data[i]: full row sum minus the self kernel.
// Rows where that subtraction would cancel are redone in log space.
double loo_log_density(const KernelTerms& terms, std::span<const double> data, std::size_t i,
                       std::vector<double>& logk) {
    const std::size_t n = data.size();
    double row_sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        logk[j] = terms.log_kernel(data[i], j);
        row_sum += std::exp(logk[j]);
    }
    const double self = std::exp(logk[i]);
    const double loo = row_sum - self;
    if (loo > 1e-3 * self) {
        return std::log(loo) - std::log(static_cast<double>(n - 1));
    }
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
        if (j != i) {
            mx = std::max(mx, logk[j]);
        }
    }
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (j != i) {
            acc += std::exp(logk[j] - mx);
        }
    }
    return mx + std::log(acc) - std::log(static_cast<double>(n - 1));
}

}  // namespace

double lcv_score(std::span<const double> data, double gamma) {
    validate_data(data);
    const std::size_t n = data.size();
    if (n < 2) {
        throw std::invalid_argument("lcv_score: need n >= 2");
    }
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        throw std::invalid_argument("lcv_score: gamma must be a positive real");
    }
    const KernelTerms terms(data, gamma);

    // Rows are independent; compute them in contiguous blocks per thread and
    // reduce in index order, so the result does not depend on scheduling.
    const unsigned hw = std::thread::hardware_concurrency();
    const std::size_t n_threads = (n >= 512 && hw > 1) ? std::min<std::size_t>(hw, 8) : 1;
    std::vector<double> row_scores(n);
    if (n_threads == 1) {
        std::vector<double> logk(n);
        for (std::size_t i = 0; i < n; ++i) {
            row_scores[i] = loo_log_density(terms, data, i, logk);
        }
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (std::size_t t = 0; t < n_threads; ++t) {
            const std::size_t begin = n * t / n_threads;
            const std::size_t end = n * (t + 1) / n_threads;
            pool.emplace_back([&, begin, end]() {
                std::vector<double> logk(n);
                for (std::size_t i = begin; i < end; ++i) {
                    row_scores[i] = loo_log_density(terms, data, i, logk);
                }
            });
        }
        for (std::thread& th : pool) {
            th.join();
        }
    }
    double score = 0.0;
    for (double s : row_scores) {
        score += s;
    }
    return score / static_cast<double>(n);
}

double lcv_score_direct(std::span<const double> data, double gamma) {
    validate_data(data);
    const std::size_t n = data.size();
    if (n < 2) {
        throw std::invalid_argument("lcv_score_direct: need n >= 2");
    }
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        throw std::invalid_argument("lcv_score_direct: gamma must be a positive real");
    }
    double score = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double loo = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) {
                continue;
            }
            loo += pdf(data[i], RigParams(data[j], gamma));
        }
        score += std::log(loo / static_cast<double>(n - 1));
    }
    return score / static_cast<double>(n);
}

LcvResult select_bandwidth(std::span<const double> data) {
    validate_data(data);
    double mean = 0.0;
    for (double v : data) {
        mean += v;
    }
    mean /= static_cast<double>(data.size());
    double var = 0.0;
    for (double v : data) {
        var += (v - mean) * (v - mean);
    }
    var /= static_cast<double>(data.size() - 1);
    const double sd = std::sqrt(var);
    if (!(sd > 0.0)) {
        throw std::invalid_argument("select_bandwidth: data are all equal");
    }
    return select_bandwidth(data, 1e-3 * sd, 10.0 * sd);
}

LcvResult select_bandwidth(std::span<const double> data, double lo, double hi,
                           std::size_t curve_points) {
    validate_data(data);
    if (data.size() < 3) {
        throw std::invalid_argument("select_bandwidth: need n >= 3");
    }
    if (!(0.0 < lo && lo < hi)) {
        throw std::invalid_argument("select_bandwidth: need 0 < lo < hi");
    }
    auto negated = [&](double g) { return -lcv_score(data, g); };
    const optim::Minimize1dResult r = optim::minimize_1d(negated, lo, hi, 1e-8, 200);

    LcvResult out;
    out.gamma_hat = r.x;
    out.score_at_opt = -r.value;
    if (curve_points > 1) {
        out.score_curve.reserve(curve_points);
        const double step = std::log(hi / lo) / static_cast<double>(curve_points - 1);
        for (std::size_t i = 0; i < curve_points; ++i) {
            const double g = lo * std::exp(step * static_cast<double>(i));
            out.score_curve.emplace_back(g, lcv_score(data, g));
        }
    }
    return out;
}

}  // namespace rigkit::kde
