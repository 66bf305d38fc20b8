#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "oracles.hpp"
#include "rigkit/rig.hpp"

using namespace rigkit;

namespace {

std::vector<double> log_grid(double lo, double hi, int n) {
    std::vector<double> g(static_cast<std::size_t>(n));
    const double step = std::log(hi / lo) / (n - 1);
    for (int i = 0; i < n; ++i) {
        g[static_cast<std::size_t>(i)] = lo * std::exp(step * i);
    }
    return g;
}

}  // namespace

TEST_CASE("parameter containers reject invalid values") {
    CHECK_THROWS_AS(RigParams(0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(RigParams(1.0, -2.0), std::invalid_argument);
    CHECK_THROWS_AS(ClassicalIgParams(-1.0, 1.0), std::invalid_argument);
    CHECK_NOTHROW(RigParams(1e-8, 1e8));
}

TEST_CASE("to_classical matches the closed form") {
    const ClassicalIgParams c = to_classical(RigParams(1.0, 1.0));
    CHECK(c.mu == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(c.lambda == doctest::Approx(4.0).epsilon(1e-14));

    // gamma -> 0+ degenerates at the mode: mu -> theta, lambda -> inf.
    const ClassicalIgParams limit = to_classical(RigParams(3.7, 1e-12));
    CHECK(limit.mu == doctest::Approx(3.7).epsilon(1e-10));
    CHECK(limit.lambda > 1e12);
}

TEST_CASE("from_classical inverts to_classical") {
    const RigParams p = from_classical(ClassicalIgParams(2.0, 4.0));
    CHECK(p.theta == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(p.gamma == doctest::Approx(1.0).epsilon(1e-14));

    // lambda -> inf concentrates at the mean: theta -> mu, gamma -> 0.
    const RigParams limit = from_classical(ClassicalIgParams(5.0, 1e14));
    CHECK(limit.theta == doctest::Approx(5.0).epsilon(1e-10));
    CHECK(limit.gamma < 1e-12);

    for (double theta : log_grid(1e-2, 1e2, 9)) {
        for (double gamma : log_grid(1e-2, 1e2, 9)) {
            const RigParams in(theta, gamma);
            const RigParams round = from_classical(to_classical(in));
            CHECK(oracles::rel_err(round.theta, theta) < 1e-12);
            CHECK(oracles::rel_err(round.gamma, gamma) < 1e-12);
        }
    }
}

TEST_CASE("pdf: frozen values, mode location, normalization") {
    CHECK(pdf(1.0, RigParams(1.0, 1.0)) == doctest::Approx(0.4839414490382867).epsilon(1e-13));
    CHECK(pdf(3.0, RigParams(1.0, 1.0)) == doctest::Approx(0.12997977048182742).epsilon(1e-13));
    CHECK(log_pdf(0.5, RigParams(2.0, 0.4)) ==
          doctest::Approx(-8.7933680809081052).epsilon(1e-13));

    CHECK_THROWS_AS(pdf(0.0, RigParams(1.0, 1.0)), std::domain_error);
    CHECK_THROWS_AS(pdf(-1.0, RigParams(1.0, 1.0)), std::domain_error);

    // argmax sits at theta.
    const RigParams p(1.0, 1.0);
    const double peak = oracles::argmax_refined([&](double x) { return pdf(x, p); }, 0.05, 10.0);
    CHECK(std::abs(peak - 1.0) < 1e-8);

    for (double theta : {0.4, 1.0, 4.0}) {
        for (double gamma : {0.4, 1.0, 4.0}) {
            const RigParams q(theta, gamma);
            const double total =
                oracles::integrate_density([&](double x) { return pdf(x, q); }, 1e-11);
            CHECK(std::abs(total - 1.0) < 1e-8);
        }
    }
}

TEST_CASE("mode identity over a parameter grid") {
    for (double theta : log_grid(0.1, 10.0, 5)) {
        for (double gamma : log_grid(0.1, 10.0, 5)) {
            const RigParams p(theta, gamma);
            const double peak = oracles::argmax_refined(
                [&](double x) { return log_pdf(x, p); }, theta / 50.0, theta * 50.0);
            CHECK(std::abs(peak - theta) < 1e-8 * std::max(1.0, theta));
        }
    }
}

TEST_CASE("mode-parameterized and classical densities agree pointwise") {
    for (double theta : log_grid(0.1, 10.0, 8)) {
        for (double gamma : log_grid(0.1, 10.0, 8)) {
            const RigParams p(theta, gamma);
            const ClassicalIgParams c = to_classical(p);
            for (double x : log_grid(0.05, 50.0, 8)) {
                const double a = log_pdf(x, p);
                const double b = log_pdf(x, c);
                CHECK(std::abs(a - b) / std::max(1.0, std::abs(b)) < 1e-12);
            }
        }
    }
}

TEST_CASE("cdf matches reference values and quadrature") {
    struct Ref {
        double theta, gamma, x, value;
    };
    // Reference values computed from the classical IG distribution function.
    const Ref refs[] = {
        {1.0, 1.0, 0.25, 0.00041813574606311833}, {1.0, 1.0, 0.5, 0.028056840414719939},
        {1.0, 1.0, 1.0, 0.23235718919184292},     {1.0, 1.0, 2.0, 0.62769783815525282},
        {1.0, 1.0, 5.0, 0.95778387885176253},     {1.0, 1.0, 20.0, 0.99999520735137237},
        {0.4, 2.5, 0.25, 0.048060587878451008},   {0.4, 2.5, 0.5, 0.21287003739998792},
        {0.4, 2.5, 1.0, 0.47510815530204381},     {0.4, 2.5, 2.0, 0.72853495134245461},
        {0.4, 2.5, 5.0, 0.93346624377298015},     {0.4, 2.5, 20.0, 0.99931087831354704},
        {5.0, 0.3, 0.5, 3.5620907743820648e-37},  {5.0, 0.3, 1.0, 5.0306672781128087e-16},
        {5.0, 0.3, 2.0, 6.9679915488665557e-06},  {5.0, 0.3, 5.0, 0.40577239944388571},
        {5.0, 0.3, 20.0, 0.9999999994326112},
    };
    for (const Ref& r : refs) {
        CHECK(oracles::rel_err(cdf(r.x, RigParams(r.theta, r.gamma)), r.value, 1e-300) < 1e-10);
    }

    CHECK_THROWS_AS(cdf(0.0, RigParams(1.0, 1.0)), std::domain_error);
    CHECK(cdf(1e-12, RigParams(1.0, 1.0)) < 1e-10);
    CHECK(cdf(1e9, RigParams(1.0, 1.0)) == doctest::Approx(1.0).epsilon(1e-12));

    const RigParams p(0.8, 1.7);
    double prev = 0.0;
    for (double x : log_grid(0.01, 40.0, 25)) {
        const double c = cdf(x, p);
        CHECK(c >= prev);  // nondecreasing
        prev = c;
        const double quad = oracles::integrate([&](double t) { return pdf(t, p); }, 1e-12, x,
                                               1e-11);
        CHECK(std::abs(c - quad) < 1e-8);
    }
}

TEST_CASE("cdf at the sample median is close to one half") {
    const RigParams p(1.3, 0.9);
    std::vector<double> draws = sample(p, 1000000, 99);
    const double med = oracles::median(std::move(draws));
    CHECK(std::abs(cdf(med, p) - 0.5) < 0.002);
}

TEST_CASE("closed-form moments") {
    CHECK(variance(RigParams(1.0, 1.0)) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(skewness(RigParams(1.0, 1.0)) ==
          doctest::Approx(3.0 / std::sqrt(2.0)).epsilon(1e-14));
    CHECK(variance(RigParams(2.0, 0.7)) == doctest::Approx(2.0044949488586894).epsilon(1e-14));
    CHECK(skewness(RigParams(2.0, 0.7)) == doctest::Approx(1.4832583833149811).epsilon(1e-14));
    CHECK(mode(RigParams(2.0, 0.7)) == 2.0);

    // variance strictly increasing in gamma at fixed theta
    for (double theta : {0.3, 1.0, 6.0}) {
        double prev = 0.0;
        for (double gamma : log_grid(0.01, 100.0, 30)) {
            const double v = variance(RigParams(theta, gamma));
            CHECK(v > prev);
            prev = v;
        }
    }
}

TEST_CASE("sampler: determinism, moments, KS") {
    const RigParams p(1.0, 1.0);
    CHECK(sample(p, 50, 42) == sample(p, 50, 42));
    CHECK(sample(p, 50, 42) != sample(p, 50, 43));
    for (double v : sample(p, 1000, 7)) {
        CHECK(v > 0.0);
    }

    const ClassicalIgParams c = to_classical(RigParams(0.9, 1.4));
    const std::vector<double> big = sample(RigParams(0.9, 1.4), 1000000, 2024);
    CHECK(oracles::rel_err(oracles::mean(big), c.mu) < 0.005);

    // KS statistic below the 1% critical value in at least 95 of 100 seeds.
    const double critical = 1.627623612 / std::sqrt(10000.0);
    int ok = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const std::vector<double> draws = sample(p, 10000, seed);
        const double d =
            oracles::ks_statistic(draws, [&](double x) { return cdf(x, p); });
        if (d < critical) {
            ++ok;
        }
    }
    CHECK(ok >= 95);
}

TEST_CASE("analytic gradient: frozen values and finite differences") {
    const LogPdfGradient g = log_pdf_grad(2.0, RigParams(1.5, 0.8));
    CHECK(g.d_theta == doctest::Approx(0.16942922566705667).epsilon(1e-12));
    CHECK(g.d_gamma == doctest::Approx(-0.41533604812573126).epsilon(1e-12));
    CHECK_THROWS_AS(log_pdf_grad(0.0, RigParams(1, 1)), std::domain_error);

    const double grid[] = {0.1, 0.5, 1.0, 5.0, 20.0};
    for (double x : grid) {
        for (double theta : grid) {
            for (double gamma : grid) {
                const LogPdfGradient a = log_pdf_grad(x, RigParams(theta, gamma));
                const double ht = 1e-6 * std::max(1.0, theta);
                const double hg = 1e-6 * std::max(1.0, gamma);
                const double fd_t = oracles::central_diff(
                    [&](double t) { return log_pdf(x, RigParams(t, gamma)); }, theta, ht);
                const double fd_g = oracles::central_diff(
                    [&](double t) { return log_pdf(x, RigParams(theta, t)); }, gamma, hg);
                CHECK(oracles::rel_err(a.d_theta, fd_t, 1e-6) < 1e-5);
                CHECK(oracles::rel_err(a.d_gamma, fd_g, 1e-6) < 1e-5);
            }
        }
    }

    // stability at the support edges
    for (double x : {1e-8, 1e8}) {
        const LogPdfGradient a = log_pdf_grad(x, RigParams(1.0, 1.0));
        CHECK(std::isfinite(a.d_theta));
        CHECK(std::isfinite(a.d_gamma));
    }
}

TEST_CASE("analytic Hessian: frozen values, finite differences, concavity in theta") {
    const LogPdfHessian h = log_pdf_hess(2.0, RigParams(1.5, 0.8));
    CHECK(h.d_theta_theta == doctest::Approx(-1.0073104444175971).epsilon(1e-12));
    CHECK(h.d_theta_gamma == doctest::Approx(-0.43245444880082627).epsilon(1e-12));
    CHECK(h.d_gamma_gamma == doctest::Approx(0.47552996415871333).epsilon(1e-12));
    CHECK_THROWS_AS(log_pdf_hess(-3.0, RigParams(1, 1)), std::domain_error);

    const double grid[] = {0.1, 0.5, 1.0, 5.0, 20.0};
    for (double x : grid) {
        for (double theta : grid) {
            for (double gamma : grid) {
                const LogPdfHessian hh = log_pdf_hess(x, RigParams(theta, gamma));
                const double ht = 1e-6 * std::max(1.0, theta);
                const double hg = 1e-6 * std::max(1.0, gamma);
                const double fd_tt = oracles::central_diff(
                    [&](double t) { return log_pdf_grad(x, RigParams(t, gamma)).d_theta; }, theta,
                    ht);
                const double fd_tg = oracles::central_diff(
                    [&](double t) { return log_pdf_grad(x, RigParams(theta, t)).d_theta; }, gamma,
                    hg);
                const double fd_gt = oracles::central_diff(
                    [&](double t) { return log_pdf_grad(x, RigParams(t, gamma)).d_gamma; }, theta,
                    ht);
                const double fd_gg = oracles::central_diff(
                    [&](double t) { return log_pdf_grad(x, RigParams(theta, t)).d_gamma; }, gamma,
                    hg);
                CHECK(oracles::rel_err(hh.d_theta_theta, fd_tt, 1e-6) < 1e-4);
                CHECK(oracles::rel_err(hh.d_theta_gamma, fd_tg, 1e-6) < 1e-4);
                CHECK(oracles::rel_err(hh.d_theta_gamma, fd_gt, 1e-6) < 1e-4);  // symmetry
                CHECK(oracles::rel_err(hh.d_gamma_gamma, fd_gg, 1e-6) < 1e-4);

                // every term of d2/dtheta2 is negative, for any x
                CHECK(hh.d_theta_theta < 0.0);
            }
        }
    }
}
