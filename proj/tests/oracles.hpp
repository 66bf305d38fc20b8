#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

// Test-side oracles, independent of the library implementation paths they
// check: adaptive quadrature, finite differences, golden-section search,
// empirical statistics, and label-agreement scores.

namespace oracles {

// ---- adaptive Simpson quadrature ----------------------------------------

namespace detail {

inline double simpson(double a, double b, double fa, double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adapt(const std::function<double(double)>& f, double a, double m, double b,
                    double fa, double fm, double fb, double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson(a, m, fa, flm, fm);
    const double right = simpson(m, b, fm, frm, fb);
    if (depth <= 0) {
        return left + right;
    }
    if (std::abs(left + right - whole) <= 15.0 * tol) {
        return left + right + (left + right - whole) / 15.0;
    }
    return adapt(f, a, lm, m, fa, flm, fm, left, tol * 0.5, depth - 1) +
           adapt(f, m, rm, b, fm, frm, fb, right, tol * 0.5, depth - 1);
}

}  // namespace detail

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-10, int depth = 60) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    return detail::adapt(f, a, m, b, fa, fm, fb, detail::simpson(a, b, fa, fm, fb), tol, depth);
}

// Integral of a density over (0, inf) via the substitution x = t/(1-t).
inline double integrate_density(const std::function<double(double)>& f, double tol = 1e-10) {
    auto g = [&](double t) {
        if (t <= 0.0 || t >= 1.0) {
            return 0.0;
        }
        const double x = t / (1.0 - t);
        return f(x) / ((1.0 - t) * (1.0 - t));
    };
    return integrate(g, 0.0, 1.0, tol, 60);
}

// ---- finite differences ---------------------------------------------------

inline double central_diff(const std::function<double(double)>& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline double rel_err(double got, double want, double floor = 1e-8) {
    return std::abs(got - want) / std::max(std::abs(want), floor);
}

// ---- golden-section argmax over a bracket ---------------------------------

inline double argmax_1d(const std::function<double(double)>& f, double lo, double hi,
                        double tol = 1e-10) {
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double c = b - phi * (b - a);
    double d = a + phi * (b - a);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < 400 && (b - a) > tol * (1.0 + std::abs(a) + std::abs(b)); ++i) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

// Golden section localizes a smooth peak only to ~sqrt(eps |f| / |f''|);
// refining by bisection on the central-difference slope reaches ~1e-9.
inline double argmax_refined(const std::function<double(double)>& f, double lo, double hi) {
    const double coarse = argmax_1d(f, lo, hi, 1e-6);
    auto slope = [&](double x) {
        const double h = 1e-7 * std::max(1.0, std::abs(x));
        return f(x + h) - f(x - h);
    };
    double a = std::max(lo, coarse * 0.99);
    double b = std::min(hi, coarse * 1.01);
    for (int expand = 0; expand < 60 && slope(a) <= 0.0 && a > lo; ++expand) {
        a = std::max(lo, a * 0.9);
    }
    for (int expand = 0; expand < 60 && slope(b) >= 0.0 && b < hi; ++expand) {
        b = std::min(hi, b * 1.1);
    }
    if (slope(a) <= 0.0 || slope(b) >= 0.0) {
        return coarse;  // no sign change to bisect; fall back
    }
    for (int i = 0; i < 200 && (b - a) > 1e-12 * std::max(1.0, a); ++i) {
        const double mid = 0.5 * (a + b);
        if (slope(mid) > 0.0) {
            a = mid;
        } else {
            b = mid;
        }
    }
    return 0.5 * (a + b);
}

// ---- empirical statistics ---------------------------------------------------

inline double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) {
        s += x;
    }
    return s / static_cast<double>(v.size());
}

inline double sample_variance(const std::vector<double>& v) {
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) {
        s += (x - m) * (x - m);
    }
    return s / static_cast<double>(v.size() - 1);
}

inline double sample_sd(const std::vector<double>& v) { return std::sqrt(sample_variance(v)); }

inline double sample_skewness(const std::vector<double>& v) {
    const double m = mean(v);
    double m2 = 0.0, m3 = 0.0;
    for (double x : v) {
        const double d = x - m;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= static_cast<double>(v.size());
    m3 /= static_cast<double>(v.size());
    return m3 / std::pow(m2, 1.5);
}

inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Kolmogorov-Smirnov statistic of a sample against a CDF.
inline double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double c = cdf(sample[i]);
        d = std::max(d, std::abs(c - static_cast<double>(i) / n));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - c));
    }
    return d;
}

// Adjusted Rand index between two hard labelings.
inline double adjusted_rand_index(const std::vector<std::size_t>& a,
                                  const std::vector<std::size_t>& b) {
    if (a.size() != b.size() || a.empty()) {
        throw std::invalid_argument("adjusted_rand_index: size mismatch");
    }
    const std::size_t ka = 1 + *std::max_element(a.begin(), a.end());
    const std::size_t kb = 1 + *std::max_element(b.begin(), b.end());
    std::vector<std::vector<double>> table(ka, std::vector<double>(kb, 0.0));
    for (std::size_t i = 0; i < a.size(); ++i) {
        table[a[i]][b[i]] += 1.0;
    }
    auto choose2 = [](double m) { return m * (m - 1.0) / 2.0; };
    double sum_cells = 0.0, sum_rows = 0.0, sum_cols = 0.0;
    for (std::size_t i = 0; i < ka; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < kb; ++j) {
            sum_cells += choose2(table[i][j]);
            row += table[i][j];
        }
        sum_rows += choose2(row);
    }
    for (std::size_t j = 0; j < kb; ++j) {
        double col = 0.0;
        for (std::size_t i = 0; i < ka; ++i) {
            col += table[i][j];
        }
        sum_cols += choose2(col);
    }
    const double total = choose2(static_cast<double>(a.size()));
    const double expected = sum_rows * sum_cols / total;
    const double maximum = 0.5 * (sum_rows + sum_cols);
    return (sum_cells - expected) / (maximum - expected);
}

// F1 score of predicted-positive vs true-positive boolean labels.
inline double f1_score(const std::vector<bool>& truth, const std::vector<bool>& pred) {
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (pred[i] && truth[i]) {
            ++tp;
        } else if (pred[i] && !truth[i]) {
            ++fp;
        } else if (!pred[i] && truth[i]) {
            ++fn;
        }
    }
    if (tp == 0) {
        return 0.0;
    }
    const double precision = tp / (tp + fp);
    const double recall = tp / (tp + fn);
    return 2.0 * precision * recall / (precision + recall);
}

// chi^2 density with 2 degrees of freedom; used to quadrature-check the
// closed-form survival function.
inline double chi2_2_pdf(double x) { return 0.5 * std::exp(-0.5 * x); }

}  // namespace oracles
