#include "rigkit_cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <vector>

#include "rigkit/contam.hpp"
#include "rigkit/kde.hpp"
#include "rigkit/mixture.hpp"
#include "rigkit/version.hpp"
#include "rigkit/wmle.hpp"
#include "rigkit_cli/dataset.hpp"
#include "rigkit_cli/json_doc.hpp"

namespace rigkit::cli {

namespace {

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

JsonValue config_json(const RunConfig& c) {
    JsonValue o = JsonValue::object();
    o.set("subcommand", JsonValue::string(c.subcommand));
    o.set("input", JsonValue::string(c.input));
    o.set("value_col", JsonValue::string(c.value_col));
    o.set("weight_col", c.weight_col ? JsonValue::string(*c.weight_col) : JsonValue());
    if (c.k) {
        o.set("k", JsonValue::integer(*c.k));
    }
    if (c.k_range) {
        JsonValue r = JsonValue::array();
        r.push_back(JsonValue::integer(c.k_range->first));
        r.push_back(JsonValue::integer(c.k_range->second));
        o.set("k_range", std::move(r));
    }
    o.set("seed", JsonValue::integer(static_cast<std::int64_t>(c.seed)));
    o.set("tol", JsonValue::real(c.tol));
    o.set("max_iter", JsonValue::integer(c.max_iter));
    o.set("n_starts", c.n_starts ? JsonValue::integer(*c.n_starts) : JsonValue());
    o.set("grid_points", JsonValue::integer(c.grid_points));
    o.set("output", c.output ? JsonValue::string(*c.output) : JsonValue());
    o.set("plot", c.plot ? JsonValue::string(*c.plot) : JsonValue());
    return o;
}

JsonValue data_json(const Dataset& ds) {
    JsonValue o = JsonValue::object();
    o.set("n", JsonValue::integer(static_cast<std::int64_t>(ds.values.size())));
    o.set("rejected_rows", JsonValue::integer(static_cast<std::int64_t>(ds.rejected_rows)));
    double wsum = 0.0;
    if (ds.weights) {
        for (double w : *ds.weights) {
            wsum += w;
        }
    } else {
        wsum = static_cast<double>(ds.values.size());
    }
    o.set("weight_sum", JsonValue::real(wsum));
    o.set("weights_mode", JsonValue::string(ds.weights ? "verbatim" : "unit"));
    return o;
}

JsonValue real_array(const std::vector<double>& v) {
    JsonValue a = JsonValue::array();
    for (double x : v) {
        a.push_back(JsonValue::real(x));
    }
    return a;
}

// Atomic write: temp file alongside the target, then rename.
void write_file(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) {
            throw std::runtime_error("cannot write file: " + tmp);
        }
        out << content;
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        throw std::runtime_error("cannot rename " + tmp + " to " + path);
    }
}

void emit(const RunConfig& config, const JsonValue& doc) {
    const std::string text = doc.dump();
    if (config.output) {
        write_file(*config.output, text);
    } else {
        std::cout << text;
    }
}

WeightedSample to_weighted(const Dataset& ds) {
    return ds.weights ? WeightedSample(ds.values, *ds.weights)
                      : WeightedSample::unit(ds.values);
}

JsonValue rig_fit_json(const wmle::RigFit& fit) {
    JsonValue est = JsonValue::object();
    est.set("theta", JsonValue::real(fit.params.theta));
    est.set("gamma", JsonValue::real(fit.params.gamma));
    JsonValue se = JsonValue::object();
    se.set("theta", JsonValue::real(fit.se_theta));
    se.set("gamma", JsonValue::real(fit.se_gamma));
    JsonValue o = JsonValue::object();
    o.set("estimates", std::move(est));
    o.set("standard_errors", std::move(se));
    o.set("loglik", JsonValue::real(fit.loglik));
    o.set("iterations", JsonValue::integer(static_cast<std::int64_t>(fit.iterations)));
    o.set("converged", JsonValue::boolean(fit.converged));
    return o;
}

void maybe_plot(const RunConfig& config, const std::vector<double>& data,
                const std::function<double(double)>& density) {
    if (config.plot) {
        write_density_svg(*config.plot, data, density, config.grid_points);
    }
}

JsonValue run_fit_rig(const RunConfig& config, const Dataset& ds, JsonValue doc) {
    const WeightedSample s = to_weighted(ds);
    const wmle::RigFit fit =
        wmle::fit(s, {.tol = config.tol,
                      .max_iter = static_cast<std::size_t>(config.max_iter),
                      .compute_se = true});
    if (!fit.converged) {
        throw ConvergenceError("fit-rig did not converge");
    }
    JsonValue f = rig_fit_json(fit);
    doc.set("model", JsonValue::string("rig"));
    doc.set("fit", std::move(f));
    maybe_plot(config, ds.values, [&](double x) { return pdf(x, fit.params); });
    return doc;
}

JsonValue run_fit_contaminated(const RunConfig& config, const Dataset& ds, JsonValue doc) {
    const WeightedSample s = to_weighted(ds);
    const std::size_t restarts = static_cast<std::size_t>(config.n_starts.value_or(10));
    const contam::EmOptions opts{config.tol, static_cast<std::size_t>(config.max_iter)};

    const wmle::RigFit rig_fit = wmle::fit(s, {.tol = config.tol,
                                               .max_iter = 500,
                                               .compute_se = true});
    // Unit weights: the EM path; genuine sample weights: direct weighted ML.
    const bool weighted = ds.weights.has_value();
    const contam::ContamFit fit = weighted
                                      ? contam::fit_weighted(s, restarts, config.seed, opts)
                                      : contam::fit(ds.values, restarts, config.seed, opts);
    if (!fit.converged) {
        throw ConvergenceError("fit-contaminated did not converge");
    }
    const contam::LrTestResult lr = contam::lr_test(rig_fit, fit);

    doc.set("model", JsonValue::string("contaminated-ig"));
    doc.set("method", JsonValue::string(weighted ? "weighted-direct" : "em"));
    JsonValue est = JsonValue::object();
    est.set("theta", JsonValue::real(fit.params.theta));
    est.set("gamma", JsonValue::real(fit.params.gamma));
    est.set("alpha", JsonValue::real(fit.params.alpha));
    est.set("eta", JsonValue::real(fit.params.eta));
    doc.set("estimates", std::move(est));
    doc.set("loglik", JsonValue::real(fit.loglik));
    doc.set("iterations", JsonValue::integer(static_cast<std::int64_t>(fit.iterations)));
    doc.set("converged", JsonValue::boolean(fit.converged));
    doc.set("alpha_at_floor", JsonValue::boolean(fit.alpha_at_floor));
    doc.set("no_contamination", JsonValue::boolean(fit.no_contamination));

    JsonValue rig = JsonValue::object();
    rig.set("theta", JsonValue::real(rig_fit.params.theta));
    rig.set("gamma", JsonValue::real(rig_fit.params.gamma));
    rig.set("loglik", JsonValue::real(rig_fit.loglik));
    doc.set("rig_fit", std::move(rig));

    JsonValue lrj = JsonValue::object();
    lrj.set("statistic", JsonValue::real(lr.statistic));
    lrj.set("df", JsonValue::integer(lr.df));
    lrj.set("p_value", JsonValue::real(lr.p_value));
    doc.set("lr_test", std::move(lrj));

    std::size_t n_bad = 0;
    JsonValue labels = JsonValue::array();
    for (bool g : fit.good) {
        labels.push_back(JsonValue::string(g ? "good" : "bad"));
        n_bad += g ? 0 : 1;
    }
    doc.set("n_bad", JsonValue::integer(static_cast<std::int64_t>(n_bad)));
    doc.set("posteriors", real_array(fit.posteriors));
    doc.set("labels", std::move(labels));

    maybe_plot(config, ds.values,
               [&](double x) { return contam::contam_pdf(x, fit.params); });
    return doc;
}

JsonValue mixture_fit_json(const mixture::MixtureFit& fit, bool include_points) {
    JsonValue est = JsonValue::object();
    est.set("pi", real_array(fit.params.pi));
    est.set("theta", real_array(fit.params.theta));
    est.set("gamma", real_array(fit.params.gamma));
    JsonValue o = JsonValue::object();
    o.set("k", JsonValue::integer(static_cast<std::int64_t>(fit.params.k())));
    o.set("estimates", std::move(est));
    o.set("loglik", JsonValue::real(fit.loglik));
    o.set("bic", JsonValue::real(fit.bic));
    o.set("iterations", JsonValue::integer(static_cast<std::int64_t>(fit.iterations)));
    o.set("converged", JsonValue::boolean(fit.converged));
    if (include_points) {
        JsonValue labels = JsonValue::array();
        for (std::size_t l : fit.labels) {
            labels.push_back(JsonValue::integer(static_cast<std::int64_t>(l)));
        }
        o.set("labels", std::move(labels));
        o.set("responsibilities", real_array(fit.responsibilities));
    }
    return o;
}

JsonValue run_fit_mixture(const RunConfig& config, const Dataset& ds, JsonValue doc) {
    if (!config.k) {
        throw InputError("fit-mixture requires --k");
    }
    if (ds.weights) {
        throw InputError("fit-mixture supports unit weights only; drop --weight-col");
    }
    const std::size_t k = static_cast<std::size_t>(*config.k);
    const mixture::EmOptions opts{config.tol, static_cast<std::size_t>(config.max_iter)};
    const std::size_t starts = static_cast<std::size_t>(config.n_starts.value_or(9));
    const mixture::ModelSelection sel =
        mixture::select_k(ds.values, k, k, starts, true, config.seed, opts);
    const mixture::MixtureFit& fit = sel.fits.front();
    if (!fit.converged) {
        throw ConvergenceError("fit-mixture did not converge");
    }
    doc.set("model", JsonValue::string("rig-mixture"));
    doc.set("fit", mixture_fit_json(fit, true));
    maybe_plot(config, ds.values,
               [&](double x) { return mixture::mixture_pdf(x, fit.params); });
    return doc;
}

JsonValue run_select_k(const RunConfig& config, const Dataset& ds, JsonValue doc) {
    if (!config.k_range) {
        throw InputError("select-k requires --k-range A..B");
    }
    if (ds.weights) {
        throw InputError("select-k supports unit weights only; drop --weight-col");
    }
    const mixture::EmOptions opts{config.tol, static_cast<std::size_t>(config.max_iter)};
    const std::size_t starts = static_cast<std::size_t>(config.n_starts.value_or(9));
    const mixture::ModelSelection sel = mixture::select_k(
        ds.values, static_cast<std::size_t>(config.k_range->first),
        static_cast<std::size_t>(config.k_range->second), starts, true, config.seed, opts);

    doc.set("model", JsonValue::string("rig-mixture-selection"));
    JsonValue table = JsonValue::array();
    const mixture::MixtureFit* best = nullptr;
    for (std::size_t i = 0; i < sel.fits.size(); ++i) {
        JsonValue row = JsonValue::object();
        row.set("k", JsonValue::integer(static_cast<std::int64_t>(sel.k_values[i])));
        row.set("bic", JsonValue::real(sel.fits[i].bic));
        row.set("loglik", JsonValue::real(sel.fits[i].loglik));
        row.set("converged", JsonValue::boolean(sel.fits[i].converged));
        table.push_back(std::move(row));
        if (sel.k_values[i] == sel.best_k) {
            best = &sel.fits[i];
        }
    }
    doc.set("bic_table", std::move(table));
    doc.set("best_k", JsonValue::integer(static_cast<std::int64_t>(sel.best_k)));
    doc.set("best_fit", mixture_fit_json(*best, true));
    JsonValue warnings = JsonValue::array();
    for (const std::string& w : sel.warnings) {
        warnings.push_back(JsonValue::string(w));
    }
    doc.set("warnings", std::move(warnings));

    const mixture::MixtureParams params = best->params;
    maybe_plot(config, ds.values, [&](double x) { return mixture::mixture_pdf(x, params); });
    return doc;
}

JsonValue run_kde(const RunConfig& config, const Dataset& ds, JsonValue doc) {
    if (ds.weights) {
        throw InputError("kde supports unit weights only; drop --weight-col");
    }
    const kde::LcvResult sel = kde::select_bandwidth(ds.values);
    const kde::KdeModel model(ds.values, sel.gamma_hat);

    doc.set("model", JsonValue::string("rig-kde"));
    JsonValue est = JsonValue::object();
    est.set("gamma_lcv", JsonValue::real(sel.gamma_hat));
    est.set("lcv_score", JsonValue::real(sel.score_at_opt));
    doc.set("estimates", std::move(est));

    // Density exported on grid_points equally spaced points over (0, 1.2 max].
    const double xmax = 1.2 * *std::max_element(ds.values.begin(), ds.values.end());
    const int npts = config.grid_points;
    std::vector<double> xs(static_cast<std::size_t>(npts)), fs(static_cast<std::size_t>(npts));
    for (int i = 0; i < npts; ++i) {
        xs[static_cast<std::size_t>(i)] =
            xmax * (static_cast<double>(i) + 1.0) / static_cast<double>(npts);
        fs[static_cast<std::size_t>(i)] = kde::kde_eval(model, xs[static_cast<std::size_t>(i)]);
    }
    JsonValue grid = JsonValue::object();
    grid.set("x", real_array(xs));
    grid.set("density", real_array(fs));
    doc.set("density_grid", std::move(grid));

    maybe_plot(config, ds.values, [&](double x) { return kde::kde_eval(model, x); });
    return doc;
}

}  // namespace

void write_density_svg(const std::string& path, const std::vector<double>& data,
                       const std::function<double(double)>& density, int grid_points) {
    const double xmax = 1.2 * *std::max_element(data.begin(), data.end());
    const std::size_t n = data.size();

    // Sturges bins over [0, max(data)].
    const int nbins =
        std::max(1, static_cast<int>(std::ceil(1.0 + std::log2(static_cast<double>(n)))));
    const double binw = *std::max_element(data.begin(), data.end()) / nbins * (1.0 + 1e-12);
    std::vector<double> hist(static_cast<std::size_t>(nbins), 0.0);
    for (double v : data) {
        const int b = std::min(nbins - 1, static_cast<int>(v / binw));
        hist[static_cast<std::size_t>(b)] += 1.0;
    }
    for (double& h : hist) {
        h /= static_cast<double>(n) * binw;  // density scale
    }

    std::vector<double> xs(static_cast<std::size_t>(grid_points));
    std::vector<double> fs(static_cast<std::size_t>(grid_points));
    double fmax = 0.0;
    for (int i = 0; i < grid_points; ++i) {
        xs[static_cast<std::size_t>(i)] =
            xmax * (static_cast<double>(i) + 1.0) / static_cast<double>(grid_points);
        fs[static_cast<std::size_t>(i)] = density(xs[static_cast<std::size_t>(i)]);
        fmax = std::max(fmax, fs[static_cast<std::size_t>(i)]);
    }
    for (double h : hist) {
        fmax = std::max(fmax, h);
    }
    const double ymax = fmax * 1.05 + 1e-300;

    const double W = 800, H = 500, L = 60, R = 20, T = 20, B = 45;
    const double sx = (W - L - R) / xmax;
    const double sy = (H - T - B) / ymax;

    char buf[256];
    std::string svg;
    svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    std::snprintf(buf, sizeof(buf),
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\" "
                  "viewBox=\"0 0 %g %g\">\n",
                  W, H, W, H);
    svg += buf;
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    // Data-space group: x in data units, y in density units, origin at the
    // axes corner, y growing upward.
    std::snprintf(buf, sizeof(buf), "<g transform=\"translate(%g,%g) scale(%.10g,-%.10g)\">\n", L,
                  H - B, sx, sy);
    svg += buf;
    for (int b = 0; b < nbins; ++b) {
        if (hist[static_cast<std::size_t>(b)] <= 0.0) {
            continue;
        }
        std::snprintf(buf, sizeof(buf),
                      "<rect x=\"%.10g\" y=\"0\" width=\"%.10g\" height=\"%.10g\" "
                      "fill=\"#b8cbe3\" stroke=\"#7189ad\" "
                      "vector-effect=\"non-scaling-stroke\"/>\n",
                      b * binw, binw, hist[static_cast<std::size_t>(b)]);
        svg += buf;
    }
    svg += "<polyline class=\"density\" fill=\"none\" stroke=\"#c0392b\" stroke-width=\"1.5\" "
           "vector-effect=\"non-scaling-stroke\" points=\"";
    for (int i = 0; i < grid_points; ++i) {
        std::snprintf(buf, sizeof(buf), "%s%.10g,%.10g", i > 0 ? " " : "",
                      xs[static_cast<std::size_t>(i)], fs[static_cast<std::size_t>(i)]);
        svg += buf;
    }
    svg += "\"/>\n</g>\n";

    // Axes and ticks in pixel space.
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n", L, H - B,
                  W - R, H - B);
    svg += buf;
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n", L, T, L,
                  H - B);
    svg += buf;
    for (int t = 0; t <= 4; ++t) {
        const double xv = xmax * t / 4.0;
        const double px = L + sx * xv;
        std::snprintf(buf, sizeof(buf),
                      "<line x1=\"%.6g\" y1=\"%g\" x2=\"%.6g\" y2=\"%g\" stroke=\"black\"/>\n", px,
                      H - B, px, H - B + 5);
        svg += buf;
        std::snprintf(buf, sizeof(buf),
                      "<text x=\"%.6g\" y=\"%g\" font-family=\"sans-serif\" font-size=\"12\" "
                      "text-anchor=\"middle\">%.4g</text>\n",
                      px, H - B + 20, xv);
        svg += buf;
    }
    for (int t = 0; t <= 4; ++t) {
        const double yv = ymax * t / 4.0;
        const double py = H - B - sy * yv;
        std::snprintf(buf, sizeof(buf),
                      "<line x1=\"%g\" y1=\"%.6g\" x2=\"%g\" y2=\"%.6g\" stroke=\"black\"/>\n",
                      L - 5, py, L, py);
        svg += buf;
        std::snprintf(buf, sizeof(buf),
                      "<text x=\"%g\" y=\"%.6g\" font-family=\"sans-serif\" font-size=\"12\" "
                      "text-anchor=\"end\">%.3g</text>\n",
                      L - 8, py + 4, yv);
        svg += buf;
    }
    svg += "</svg>\n";

    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) {
            throw std::runtime_error("cannot write plot file: " + tmp);
        }
        out << svg;
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        throw std::runtime_error("cannot rename " + tmp + " to " + path);
    }
}

int run(const RunConfig& config) {
    const auto started = std::chrono::steady_clock::now();
    JsonValue doc = JsonValue::object();
    doc.set("tool", JsonValue::string("rigkit"));
    doc.set("version", JsonValue::string(kVersion));

    auto fail = [&](int code, const std::string& category, const std::string& message) {
        JsonValue err = JsonValue::object();
        err.set("tool", JsonValue::string("rigkit"));
        err.set("version", JsonValue::string(kVersion));
        JsonValue detail = JsonValue::object();
        detail.set("exit_code", JsonValue::integer(code));
        detail.set("category", JsonValue::string(category));
        detail.set("message", JsonValue::string(message));
        err.set("error", std::move(detail));
        err.set("config", config_json(config));
        try {
            emit(config, err);
        } catch (const std::exception& e) {
            std::cerr << "rigkit: " << e.what() << "\n";
        }
        return code;
    };

    try {
        Dataset ds;
        try {
            ds = ingest(config.input, config.value_col, config.weight_col);
        } catch (const std::exception& e) {
            throw InputError(e.what());
        }
        doc.set("config", config_json(config));
        doc.set("data", data_json(ds));

        if (config.subcommand == "fit-rig") {
            doc = run_fit_rig(config, ds, std::move(doc));
        } else if (config.subcommand == "fit-contaminated") {
            doc = run_fit_contaminated(config, ds, std::move(doc));
        } else if (config.subcommand == "fit-mixture") {
            doc = run_fit_mixture(config, ds, std::move(doc));
        } else if (config.subcommand == "select-k") {
            doc = run_select_k(config, ds, std::move(doc));
        } else if (config.subcommand == "kde") {
            doc = run_kde(config, ds, std::move(doc));
        } else {
            return fail(kExitInputError, "input", "unknown subcommand: " + config.subcommand);
        }

        emit(config, doc);
        // Wall-clock time goes to stderr so the result document stays
        // byte-identical across reruns of the same (input, config, seed).
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - started;
        std::cerr << "rigkit: " << config.subcommand << " finished in " << elapsed.count()
                  << " s\n";
        return kExitOk;
    } catch (const InputError& e) {
        return fail(kExitInputError, "input", e.what());
    } catch (const ConvergenceError& e) {
        return fail(kExitConvergenceFailure, "convergence", e.what());
    } catch (const std::invalid_argument& e) {
        return fail(kExitInputError, "input", e.what());
    } catch (const std::domain_error& e) {
        return fail(kExitInputError, "input", e.what());
    } catch (const std::runtime_error& e) {
        // Failures thrown from the fitting machinery (degenerate components,
        // non-finite likelihoods) land here.
        return fail(kExitConvergenceFailure, "convergence", e.what());
    } catch (const std::exception& e) {
        return fail(kExitInternalError, "internal", e.what());
    }
}

}  // namespace rigkit::cli
