#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>

namespace rigkit::cli {

// Exit codes shared by run() and main().
inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitConvergenceFailure = 3;
inline constexpr int kExitInternalError = 4;

struct RunConfig {
    std::string subcommand;  // fit-rig | fit-contaminated | fit-mixture | select-k | kde
    std::string input;
    std::string value_col;
    std::optional<std::string> weight_col;
    std::optional<int> k;                        // fit-mixture
    std::optional<std::pair<int, int>> k_range;  // select-k
    std::uint64_t seed = 20170101;
    double tol = 1e-8;
    int max_iter = 1000;
    std::optional<int> n_starts;  // default: 9 random starts (mixture), 10 restarts (contaminated)
    std::optional<std::string> output;  // default: stdout
    std::optional<std::string> plot;    // optional SVG path
    int grid_points = 512;
};

// Dispatches to the fitting modules, writes the result document (and the
// optional SVG), and returns the process exit status.  Never throws; errors
// become machine-readable error records plus a nonzero status.
int run(const RunConfig& config);

// Minimal SVG: histogram bars (Sturges bins) plus the density polyline
// evaluated on grid_points equally spaced abscissas over (0, 1.2 max(data)].
// The density group carries a coordinate transform, so polyline vertices are
// stored in data units.
void write_density_svg(const std::string& path, const std::vector<double>& data,
                       const std::function<double(double)>& density, int grid_points);

}  // namespace rigkit::cli
