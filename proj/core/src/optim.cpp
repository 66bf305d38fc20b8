#include "rigkit/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace rigkit::optim {

namespace {

double sigmoid(double y) {
    if (y >= 0.0) {
        return 1.0 / (1.0 + std::exp(-y));
    }
    const double e = std::exp(y);
    return e / (1.0 + e);
}

}  // namespace

double Transform::to_unconstrained(double x) const {
    switch (kind) {
        case Kind::Identity:
            return x;
        case Kind::LogPositive:
            return std::log(x);
        case Kind::LogitInterval: {
            const double t = (x - lo) / (hi - lo);
            return std::log(t / (1.0 - t));
        }
        case Kind::ShiftedLog:
            return std::log(x - shift);
    }
    return x;
}

double Transform::to_constrained(double y) const {
    switch (kind) {
        case Kind::Identity:
            return y;
        case Kind::LogPositive:
            return std::exp(y);
        case Kind::LogitInterval:
            return lo + (hi - lo) * sigmoid(y);
        case Kind::ShiftedLog:
            return shift + std::exp(y);
    }
    return y;
}

double Transform::dconstrained_dy(double y) const {
    switch (kind) {
        case Kind::Identity:
            return 1.0;
        case Kind::LogPositive:
            return std::exp(y);
        case Kind::LogitInterval: {
            const double s = sigmoid(y);
            return (hi - lo) * s * (1.0 - s);
        }
        case Kind::ShiftedLog:
            return std::exp(y);
    }
    return 1.0;
}

bool Transform::strictly_inside(double x) const {
    if (!std::isfinite(x)) {
        return false;
    }
    switch (kind) {
        case Kind::Identity:
            return true;
        case Kind::LogPositive:
            return x > 0.0;
        case Kind::LogitInterval:
            return x > lo && x < hi;
        case Kind::ShiftedLog:
            return x > shift;
    }
    return true;
}

namespace {

// Objective in the unconstrained coordinates, with scratch buffers reused
// across evaluations.
class TransformedObjective {
public:
    TransformedObjective(const Objective& f, const GradientFn& g,
                         std::span<const Transform> transforms)
        : f_(f), g_(g), transforms_(transforms), x_(transforms.size()), gx_(transforms.size()) {}

    // Overflow/underflow of a transform (exp saturating to 0 or inf) leaves
    // the open constrained domain; such steps count as non-finite so the
    // line search backtracks past them.
    double value(std::span<const double> y) {
        if (!to_x(y)) {
            return -std::numeric_limits<double>::infinity();
        }
        return f_(x_);
    }

    // Gradient of the transformed objective at y.  Analytic when available
    // (chain rule through dx/dy), otherwise central differences on value().
    void gradient(std::span<const double> y, double fy, std::span<double> out) {
        if (g_) {
            if (!to_x(y)) {
                std::fill(out.begin(), out.end(), 0.0);
                return;
            }
            g_(x_, gx_);
            for (std::size_t i = 0; i < y.size(); ++i) {
                out[i] = gx_[i] * transforms_[i].dconstrained_dy(y[i]);
            }
            return;
        }
        (void)fy;
        std::vector<double> yp(y.begin(), y.end());
        for (std::size_t i = 0; i < y.size(); ++i) {
            const double h = std::max(1e-7, 1e-7 * std::abs(y[i]));
            const double yi = yp[i];
            yp[i] = yi + h;
            const double fp = value(yp);
            yp[i] = yi - h;
            const double fm = value(yp);
            yp[i] = yi;
            out[i] = (fp - fm) / (2.0 * h);
        }
    }

private:
    bool to_x(std::span<const double> y) {
        for (std::size_t i = 0; i < y.size(); ++i) {
            x_[i] = transforms_[i].to_constrained(y[i]);
            if (!transforms_[i].strictly_inside(x_[i])) {
                return false;
            }
        }
        return true;
    }

    const Objective& f_;
    const GradientFn& g_;
    std::span<const Transform> transforms_;
    std::vector<double> x_;
    std::vector<double> gx_;
};

double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) {
        s += x * x;
    }
    return std::sqrt(s);
}

}  // namespace

OptimResult maximize(const Objective& objective, const GradientFn& gradient,
                     std::span<const double> x0, std::span<const Transform> transforms,
                     double tol, std::size_t max_iter) {
    const std::size_t n = x0.size();
    if (n == 0 || transforms.size() != n) {
        throw std::invalid_argument("maximize: x0 and transforms must be nonempty, same length");
    }

    TransformedObjective obj(objective, gradient, transforms);

    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = transforms[i].to_unconstrained(x0[i]);
        if (!std::isfinite(y[i])) {
            throw std::invalid_argument("maximize: x0 not strictly inside the constrained domain");
        }
    }

    double fy = obj.value(y);
    if (!std::isfinite(fy)) {
        throw std::invalid_argument("maximize: objective not finite at x0");
    }

    std::vector<double> g(n);
    obj.gradient(y, fy, g);

    // Inverse-Hessian approximation, row-major n x n, seeded with identity.
    std::vector<double> H(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        H[i * n + i] = 1.0;
    }

    std::vector<double> p(n), ynew(n), gnew(n), s(n), dg(n), Hdg(n);
    constexpr double kArmijoSlope = 1e-4;
    constexpr double kContraction = 0.5;

    OptimResult result;
    std::size_t iter = 0;
    bool converged = false;
    int stalled = 0;

    for (; iter < max_iter; ++iter) {
        const double gnorm = norm2(g);
        // Objective-scaled test: an absolute threshold is unreachable when
        // |f| is large (summed log-likelihoods), since the gradient noise
        // floor grows with |f| eps.
        if (gnorm < tol * std::max(1.0, std::abs(fy))) {
            converged = true;
            break;
        }

        // Ascent direction p = H g (H approximates the inverse of -Hessian).
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                acc += H[i * n + j] * g[j];
            }
            p[i] = acc;
        }
        double slope = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            slope += g[i] * p[i];
        }
        if (!(slope > 0.0)) {  // lost positive definiteness; restart from steepest ascent
            std::fill(H.begin(), H.end(), 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                H[i * n + i] = 1.0;
            }
            p.assign(g.begin(), g.end());
            slope = gnorm * gnorm;
        }

        // Backtracking line search with the Armijo condition.  Non-finite
        // trial values are treated as failed steps and backtracked past.
        // The first trial step is capped so steep objectives (large-n
        // likelihoods) cannot fling exp-transforms out of range.
        double pnorm = 0.0;
        for (double pi : p) {
            pnorm += pi * pi;
        }
        pnorm = std::sqrt(pnorm);
        double step = std::min(1.0, 20.0 / std::max(pnorm, 1e-300));
        double fnew = fy;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            for (std::size_t i = 0; i < n; ++i) {
                ynew[i] = y[i] + step * p[i];
            }
            fnew = obj.value(ynew);
            if (std::isfinite(fnew) && fnew >= fy + kArmijoSlope * step * slope) {
                accepted = true;
                break;
            }
            step *= kContraction;
        }
        if (!accepted) {
            break;  // persistent failure; report the best point with converged=false
        }

        // Progress criterion: finite-difference gradients bottom out above
        // the gradient tolerance on steep objectives, so two consecutive
        // sub-tolerance improvements also count as convergence.
        if (fnew - fy < 1e-2 * tol * std::max(1.0, std::abs(fnew))) {
            if (++stalled >= 2) {
                y.swap(ynew);
                fy = fnew;
                obj.gradient(y, fy, g);
                converged = true;
                ++iter;
                break;
            }
        } else {
            stalled = 0;
        }

        obj.gradient(ynew, fnew, gnew);

        for (std::size_t i = 0; i < n; ++i) {
            s[i] = ynew[i] - y[i];
            dg[i] = gnew[i] - g[i];  // note: gradient of an ascent problem
        }
        // BFGS update on the maximization problem: with q = -dg (the change
        // of the descent gradient), H <- (I - rho s q') H (I - rho q s') + rho s s'.
        double sq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            sq += s[i] * (-dg[i]);
        }
        if (sq > 1e-14) {
            const double rho = 1.0 / sq;
            for (std::size_t i = 0; i < n; ++i) {
                double acc = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    acc += H[i * n + j] * (-dg[j]);
                }
                Hdg[i] = acc;
            }
            double qHq = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                qHq += (-dg[i]) * Hdg[i];
            }
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) {
                    H[i * n + j] += rho * ((1.0 + rho * qHq) * s[i] * s[j] - Hdg[i] * s[j] -
                                           s[i] * Hdg[j]);
                }
            }
        }

        y.swap(ynew);
        g.swap(gnew);
        fy = fnew;
    }

    result.argmax.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        result.argmax[i] = transforms[i].to_constrained(y[i]);
    }
    result.value = fy;
    result.converged = converged;
    result.iterations = iter;
    result.gradient_norm = norm2(g) / std::max(1.0, std::abs(fy));
    return result;
}

Minimize1dResult minimize_1d(const std::function<double(double)>& objective, double lo, double hi,
                             double tol, std::size_t max_iter) {
    if (!(lo < hi)) {
        throw std::invalid_argument("minimize_1d: need lo < hi");
    }
    auto eval = [&](double t) {
        const double v = objective(t);
        if (!std::isfinite(v)) {
            throw std::runtime_error("minimize_1d: objective non-finite at x = " +
                                     std::to_string(t));
        }
        return v;
    };

    // Brent-style bracket minimization: golden-section fallback, parabolic
    // acceleration when the fit is trustworthy.
    constexpr double kGolden = 0.3819660112501051;
    double a = lo, b = hi;
    double x = a + kGolden * (b - a);
    double w = x, v = x;
    double fx = eval(x), fw = fx, fv = fx;
    double d = 0.0, e = 0.0;

    std::size_t iter = 0;
    for (; iter < max_iter; ++iter) {
        const double xm = 0.5 * (a + b);
        const double tol1 = tol * std::abs(x) + 1e-12;
        const double tol2 = 2.0 * tol1;
        if (std::abs(x - xm) <= tol2 - 0.5 * (b - a)) {
            break;
        }
        bool use_golden = true;
        if (std::abs(e) > tol1) {
            const double r = (x - w) * (fx - fv);
            double q = (x - v) * (fx - fw);
            double p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if (q > 0.0) {
                p = -p;
            }
            q = std::abs(q);
            const double etmp = e;
            e = d;
            if (std::abs(p) < std::abs(0.5 * q * etmp) && p > q * (a - x) && p < q * (b - x)) {
                d = p / q;
                const double u = x + d;
                if (u - a < tol2 || b - u < tol2) {
                    d = (xm - x >= 0.0) ? tol1 : -tol1;
                }
                use_golden = false;
            }
        }
        if (use_golden) {
            e = (x >= xm) ? a - x : b - x;
            d = kGolden * e;
        }
        const double u = (std::abs(d) >= tol1) ? x + d : x + ((d >= 0.0) ? tol1 : -tol1);
        const double fu = eval(u);
        if (fu <= fx) {
            if (u >= x) {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if (u < x) {
                a = u;
            } else {
                b = u;
            }
            if (fu <= fw || w == x) {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if (fu <= fv || v == x || v == w) {
                v = u;
                fv = fu;
            }
        }
    }

    // A monotone objective drives the iterate onto an end point; check the
    // bracket ends so the returned value never exceeds either of them.
    Minimize1dResult result;
    const double span = hi - lo;
    const double edge = std::max(tol * std::max(std::abs(lo), std::abs(hi)), 1e-6 * span);
    const double flo = eval(lo);
    const double fhi = eval(hi);
    if (flo <= fx && flo <= fhi) {
        x = lo;
        fx = flo;
    } else if (fhi <= fx) {
        x = hi;
        fx = fhi;
    }
    result.x = x;
    result.value = fx;
    result.at_boundary = (x - lo <= edge) || (hi - x <= edge);
    result.iterations = iter;
    return result;
}

}  // namespace rigkit::optim
