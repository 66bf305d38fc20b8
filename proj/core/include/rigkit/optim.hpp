#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

// Optimizer contracts shared by the fitting modules: a quasi-Newton (BFGS)
// maximizer working in an unconstrained transformed space, and a bracketed
// 1-D minimizer (golden section with parabolic-interpolation acceleration).

namespace rigkit::optim {

// Per-coordinate bijection between a constrained domain and the real line.
struct Transform {
    enum class Kind { Identity, LogPositive, LogitInterval, ShiftedLog };

    Kind kind = Kind::Identity;
    double lo = 0.0;  // LogitInterval only
    double hi = 0.0;  // LogitInterval only
    double shift = 0.0;  // ShiftedLog only: x > shift

    static Transform identity() { return {}; }
    static Transform log_positive() { return {Kind::LogPositive, 0, 0, 0}; }
    static Transform logit_interval(double a, double b) { return {Kind::LogitInterval, a, b, 0}; }
    static Transform shifted_log(double c) { return {Kind::ShiftedLog, 0, 0, c}; }

    double to_unconstrained(double x) const;
    double to_constrained(double y) const;
    double dconstrained_dy(double y) const;  // dx/dy, for chain-ruling analytic gradients
    bool strictly_inside(double x) const;    // x in the open constrained domain
};

struct OptimResult {
    std::vector<double> argmax;  // in the original (constrained) coordinates
    double value = 0.0;
    bool converged = false;
    std::size_t iterations = 0;
    // Transformed-space gradient norm scaled by max(1, |value|); converged
    // implies gradient_norm < tol.
    double gradient_norm = 0.0;
};

using Objective = std::function<double(std::span<const double>)>;
// Writes df/dx_i (original coordinates) into the second argument.
using GradientFn = std::function<void(std::span<const double>, std::span<double>)>;

// BFGS ascent on the transformed objective.  `gradient` may be empty, in
// which case central finite differences with step max(1e-7, 1e-7 |y_i|) are
// used.  Throws std::invalid_argument if the objective is not finite at x0.
OptimResult maximize(const Objective& objective, const GradientFn& gradient,
                     std::span<const double> x0, std::span<const Transform> transforms,
                     double tol = 1e-8, std::size_t max_iter = 500);

struct Minimize1dResult {
    double x = 0.0;
    double value = 0.0;
    bool at_boundary = false;  // minimizer pinned against a bracket end
    std::size_t iterations = 0;
};

// Local minimizer inside [lo, hi].  Throws std::runtime_error naming the
// abscissa if the objective evaluates non-finite anywhere it is probed.
Minimize1dResult minimize_1d(const std::function<double(double)>& objective, double lo, double hi,
                             double tol = 1e-8, std::size_t max_iter = 200);

}  // namespace rigkit::optim
