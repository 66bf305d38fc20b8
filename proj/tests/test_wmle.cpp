#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "oracles.hpp"
#include "rigkit/rig.hpp"
#include "rigkit/wmle.hpp"

using namespace rigkit;

TEST_CASE("WeightedSample validation") {
    CHECK_THROWS_AS(WeightedSample({1.0, -1.0}, {1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(WeightedSample({1.0, 2.0}, {0.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(WeightedSample({1.0, 2.0}, {1.0, -1.0}), std::invalid_argument);
    CHECK_THROWS_AS(WeightedSample({1.0}, {1.0, 1.0}), std::invalid_argument);
    CHECK_NOTHROW(WeightedSample({1.0, 2.0}, {1.0, 0.0}));
}

TEST_CASE("weighted_loglik: unit weights, duplication, re-summation oracle") {
    const std::vector<double> x = {0.4, 1.1, 2.6, 0.9, 3.3};
    const RigParams p(1.2, 0.7);

    const WeightedSample unit = WeightedSample::unit(x);
    double direct = 0.0;
    for (double xi : x) {
        direct += log_pdf(xi, p);
    }
    CHECK(wmle::weighted_loglik(unit, p) == doctest::Approx(direct).epsilon(1e-14));

    // duplicating an observation equals doubling its weight
    const WeightedSample doubled({0.4, 1.1, 2.6, 0.9, 3.3}, {2.0, 1.0, 1.0, 1.0, 1.0});
    const WeightedSample duplicated({0.4, 0.4, 1.1, 2.6, 0.9, 3.3},
                                    {1.0, 1.0, 1.0, 1.0, 1.0, 1.0});
    CHECK(wmle::weighted_loglik(doubled, p) ==
          doctest::Approx(wmle::weighted_loglik(duplicated, p)).epsilon(1e-12));

    // naive long-double re-summation
    const WeightedSample weighted(x, {0.2, 1.7, 0.0, 3.1, 0.5});
    long double naive = 0.0L;
    for (std::size_t i = 0; i < x.size(); ++i) {
        naive += static_cast<long double>(weighted.w[i]) *
                 static_cast<long double>(log_pdf(x[i], p));
    }
    CHECK(oracles::rel_err(wmle::weighted_loglik(weighted, p), static_cast<double>(naive)) <
          1e-10);
}

TEST_CASE("weighted score and Hessian against finite differences") {
    const WeightedSample s({0.3, 0.9, 1.4, 2.2, 6.0}, {1.0, 0.5, 2.0, 1.0, 0.25});
    const RigParams p(1.1, 0.9);

    const LogPdfGradient g = wmle::weighted_score(s, p);
    const double fd_t = oracles::central_diff(
        [&](double t) { return wmle::weighted_loglik(s, RigParams(t, p.gamma)); }, p.theta, 1e-6);
    const double fd_g = oracles::central_diff(
        [&](double t) { return wmle::weighted_loglik(s, RigParams(p.theta, t)); }, p.gamma, 1e-6);
    CHECK(oracles::rel_err(g.d_theta, fd_t, 1e-6) < 1e-5);
    CHECK(oracles::rel_err(g.d_gamma, fd_g, 1e-6) < 1e-5);

    const LogPdfHessian h = wmle::weighted_hessian(s, p);
    const double fd_tt = oracles::central_diff(
        [&](double t) { return wmle::weighted_score(s, RigParams(t, p.gamma)).d_theta; }, p.theta,
        1e-6);
    CHECK(oracles::rel_err(h.d_theta_theta, fd_tt, 1e-6) < 1e-4);
}

TEST_CASE("fit: score-zero, curvature, recovery within 3 SE") {
    const RigParams truth(1.0, 1.0);
    const std::vector<double> data = sample(truth, 100000, 8877);
    const WeightedSample s = WeightedSample::unit(data);
    const wmle::RigFit fit = wmle::fit(s);
    REQUIRE(fit.converged);

    const LogPdfGradient score = wmle::weighted_score(s, fit.params);
    CHECK(std::hypot(score.d_theta, score.d_gamma) < 1e-6 * data.size());

    // negative definite Hessian at the maximum (2x2: trace < 0, det > 0)
    const LogPdfHessian h = wmle::weighted_hessian(s, fit.params);
    CHECK(h.d_theta_theta < 0.0);
    CHECK(h.d_theta_theta * h.d_gamma_gamma - h.d_theta_gamma * h.d_theta_gamma > 0.0);

    CHECK(std::abs(fit.params.theta - truth.theta) < 3.0 * fit.se_theta);
    CHECK(std::abs(fit.params.gamma - truth.gamma) < 3.0 * fit.se_gamma);
    CHECK(fit.loglik == doctest::Approx(wmle::weighted_loglik(s, fit.params)).epsilon(1e-12));
}

TEST_CASE("fit: weight-scaling invariance at the argmax") {
    const std::vector<double> data = sample(RigParams(2.0, 0.5), 2000, 5);
    std::vector<double> w(data.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        w[i] = 0.5 + (i % 7) * 0.25;
    }
    std::vector<double> w5(w);
    for (double& wi : w5) {
        wi *= 5.0;
    }
    const wmle::RigFit base = wmle::fit(WeightedSample(data, w));
    const wmle::RigFit scaled = wmle::fit(WeightedSample(data, w5));
    CHECK(oracles::rel_err(scaled.params.theta, base.params.theta) < 1e-8);
    CHECK(oracles::rel_err(scaled.params.gamma, base.params.gamma) < 1e-8);
    CHECK(oracles::rel_err(scaled.loglik, 5.0 * base.loglik) < 1e-10);
}

TEST_CASE("fit: moment start lands in the attraction basin") {
    const std::vector<double> data = sample(RigParams(0.7, 2.1), 5000, 99);
    const WeightedSample s = WeightedSample::unit(data);
    const wmle::RigFit from_moments = wmle::fit(s);
    const RigParams start = wmle::moment_start(s);
    const wmle::RigFit perturbed =
        wmle::fit_from(s, RigParams(start.theta * 2.3, start.gamma * 0.4));
    CHECK(std::abs(from_moments.params.theta - perturbed.params.theta) < 1e-6);
    CHECK(std::abs(from_moments.params.gamma - perturbed.params.gamma) < 1e-6);
}

TEST_CASE("fit: degenerate sample raises spread-unidentifiable") {
    try {
        wmle::fit(WeightedSample({2.0, 2.0, 2.0, 5.0}, {1.0, 1.0, 1.0, 0.0}));
        FAIL("expected invalid_argument");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("spread unidentifiable") != std::string::npos);
    }
}

TEST_CASE("fit: estimation error shrinks with n") {
    const RigParams truth(1.0, 1.0);
    std::vector<double> med_err;
    std::uint64_t seed = 1000;
    for (std::size_t n : {100UL, 1000UL, 10000UL, 100000UL}) {
        std::vector<double> errs;
        for (int rep = 0; rep < 20; ++rep) {
            const std::vector<double> data = sample(truth, n, seed++);
            const wmle::RigFit fit = wmle::fit(WeightedSample::unit(data),
                                               {.tol = 1e-8, .max_iter = 500,
                                                .compute_se = false});
            errs.push_back(std::abs(fit.params.theta - truth.theta) +
                           std::abs(fit.params.gamma - truth.gamma));
        }
        med_err.push_back(oracles::median(errs));
    }
    for (std::size_t i = 1; i < med_err.size(); ++i) {
        CHECK(med_err[i] < med_err[i - 1]);
    }
}
