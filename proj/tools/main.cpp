#include <CLI11.hpp>

#include <cstdint>
#include <random>
#include <string>

#include "rigkit/version.hpp"
#include "rigkit_cli/commands.hpp"

namespace {

// Parses "A..B" into an inclusive integer range.
std::pair<int, int> parse_k_range(const std::string& text) {
    const std::size_t pos = text.find("..");
    if (pos == std::string::npos) {
        throw CLI::ValidationError("--k-range", "expected A..B, got '" + text + "'");
    }
    const int a = std::stoi(text.substr(0, pos));
    const int b = std::stoi(text.substr(pos + 2));
    if (a < 1 || b < a) {
        throw CLI::ValidationError("--k-range", "need 1 <= A <= B");
    }
    return {a, b};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rigkit: modeling positive data with the mode-parameterized "
                 "inverse Gaussian distribution"};
    app.set_version_flag("--version", std::string("rigkit ") + rigkit::kVersion);
    app.require_subcommand(1);

    rigkit::cli::RunConfig config;
    std::string k_range_text;
    bool random_seed = false;

    auto add_common = [&](CLI::App* cmd, bool with_weights) {
        cmd->add_option("--input", config.input, "Input CSV file (header row, comma-separated)")
            ->required();
        cmd->add_option("--value-col", config.value_col,
                        "Value column, by header name or 0-based index")
            ->required();
        if (with_weights) {
            cmd->add_option("--weight-col", [&config](const std::vector<std::string>& v) {
                config.weight_col = v.front();
                return true;
            }, "Optional weight column (weights used verbatim)");
        }
        cmd->add_option("--seed", config.seed, "RNG seed (default 20170101)");
        cmd->add_flag("--random-seed", random_seed,
                      "Draw the seed from the OS entropy source (non-reproducible)");
        cmd->add_option("--tol", config.tol, "Convergence tolerance (default 1e-8)");
        cmd->add_option("--max-iter", config.max_iter, "Iteration cap (default 1000)");
        cmd->add_option("--output", [&config](const std::vector<std::string>& v) {
            config.output = v.front();
            return true;
        }, "Result document path (default: stdout)");
        cmd->add_option("--plot", [&config](const std::vector<std::string>& v) {
            config.plot = v.front();
            return true;
        }, "Write a histogram + density SVG to this path");
        cmd->add_option("--grid-points", config.grid_points,
                        "Density grid resolution (default 512)");
    };
    auto add_starts = [&](CLI::App* cmd, const char* what) {
        cmd->add_option("--starts", [&config](const std::vector<std::string>& v) {
            config.n_starts = std::stoi(v.front());
            return true;
        }, what);
    };

    CLI::App* fit_rig = app.add_subcommand("fit-rig", "Weighted maximum-likelihood rIG fit");
    add_common(fit_rig, true);

    CLI::App* fit_contam = app.add_subcommand(
        "fit-contaminated", "Contaminated IG fit (EM; direct weighted ML with --weight-col)");
    add_common(fit_contam, true);
    add_starts(fit_contam, "Number of restarts (default 10)");

    CLI::App* fit_mixture = app.add_subcommand("fit-mixture", "rIG mixture fit at fixed k");
    add_common(fit_mixture, false);
    fit_mixture->add_option("--k", [&config](const std::vector<std::string>& v) {
        config.k = std::stoi(v.front());
        return true;
    }, "Number of components")->required();
    add_starts(fit_mixture, "Random starts besides the k-means start (default 9)");

    CLI::App* select_k = app.add_subcommand("select-k", "BIC selection over a range of k");
    add_common(select_k, false);
    select_k->add_option("--k-range", k_range_text, "Candidate range A..B")->required();
    add_starts(select_k, "Random starts besides the k-means start (default 9)");

    CLI::App* kde_cmd = app.add_subcommand("kde", "rIG-kernel density estimate with LCV bandwidth");
    add_common(kde_cmd, false);

    CLI11_PARSE(app, argc, argv);

    config.subcommand = app.get_subcommands().front()->get_name();
    if (!k_range_text.empty()) {
        try {
            config.k_range = parse_k_range(k_range_text);
        } catch (const std::exception& e) {
            std::cerr << "rigkit: " << e.what() << "\n";
            return rigkit::cli::kExitInputError;
        }
    }
    if (random_seed) {
        std::random_device rd;
        config.seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    }

    return rigkit::cli::run(config);
}
