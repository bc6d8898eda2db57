// distreg: command-line front end for kernel distribution regression.
//
// Usage: distreg <subcommand> --config PATH [--set k=v]... [--threads T] [--out DIR]
//
// Subcommands: embed, fit, predict, experiment-rate, experiment-gmm,
// experiment-bias, experiment-eco. Each run writes its artifacts into a
// fresh directory named by the hash of the resolved config plus a
// timestamp, together with the resolved config and a MANIFEST.

#include "distreg/dataset_io.hpp"
#include "distreg/embedding.hpp"
#include "distreg/error.hpp"
#include "distreg/experiments.hpp"
#include "distreg/generators.hpp"
#include "distreg/kernel_ridge.hpp"
#include "distreg/parallel.hpp"
#include "distreg/csv.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using namespace distreg;

// ---------------------------------------------------------------------------
// Config plumbing
// ---------------------------------------------------------------------------

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
    if (!obj.is_object()) throw ValidationError("config: " + where + " must be an object");
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.count(key)) {
            throw ValidationError("config: unknown key '" + key + "' in " + where);
        }
    }
}

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    try {
        json doc;
        in >> doc;
        return doc;
    } catch (const json::exception& e) {
        throw IoError("malformed config " + path + ": " + e.what());
    }
}

// "a.b.c=value" override; the value is parsed as JSON when possible and
// taken as a string otherwise.
void apply_override(json& doc, const std::string& assignment) {
    const std::size_t eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ValidationError("--set expects key=value, got '" + assignment + "'");
    }
    std::string pointer = "/" + assignment.substr(0, eq);
    for (auto& c : pointer) {
        if (c == '.') c = '/';
    }
    const std::string raw = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(raw);
    } catch (const json::exception&) {
        value = raw;
    }
    doc[json::json_pointer(pointer)] = value;
}

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (const unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex16(std::uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y%m%dT%H%M%SZ", &tm);
    return buf;
}

double require_positive(double v, const std::string& name) {
    if (!(v > 0.0)) throw ValidationError("config: " + name + " must be > 0");
    return v;
}

// ---------------------------------------------------------------------------
// Typed readers with defaults; every reader also writes the resolved value
// back so the echoed config carries all defaults.
// ---------------------------------------------------------------------------

template <class T>
T take(json& obj, const std::string& key, const T& fallback) {
    if (!obj.contains(key)) obj[key] = fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ValidationError("config: bad value for '" + key + "': " + e.what());
    }
}

template <class T>
T require(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key)) {
        throw ValidationError("config: missing required key '" + key + "' in " + where);
    }
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ValidationError("config: bad value for '" + key + "': " + e.what());
    }
}

EmbeddingConfig parse_embedding(json& obj) {
    const auto type = require<std::string>(obj, "type", "embedding");
    if (type == "mean_linear") {
        reject_unknown_keys(obj, {"type"}, "embedding");
        return MeanLinearConfig{};
    }
    if (type == "mean_rff") {
        reject_unknown_keys(obj, {"type", "num_features", "bandwidth", "seed"}, "embedding");
        MeanRffConfig cfg;
        cfg.num_features = take<int>(obj, "num_features", 256);
        cfg.bandwidth = take<double>(obj, "bandwidth", 1.0);
        cfg.seed = take<std::uint64_t>(obj, "seed", 0);
        return cfg;
    }
    if (type == "sliced_wasserstein") {
        reject_unknown_keys(obj, {"type", "num_directions", "num_quantiles", "trim", "seed"},
                            "embedding");
        SlicedWassersteinConfig cfg;
        cfg.num_directions = take<int>(obj, "num_directions", 10);
        cfg.num_quantiles = take<int>(obj, "num_quantiles", 10);
        cfg.trim = take<double>(obj, "trim", 0.0);
        cfg.seed = take<std::uint64_t>(obj, "seed", 0);
        return cfg;
    }
    if (type == "sinkhorn") {
        reject_unknown_keys(obj, {"type", "reference", "reg", "tol", "max_iter"}, "embedding");
        if (!obj.contains("reference")) {
            throw ValidationError("config: sinkhorn embedding needs a 'reference'");
        }
        SinkhornEmbeddingConfig cfg;
        cfg.reg = require_positive(take<double>(obj, "reg", 0.1), "reg");
        cfg.tol = require_positive(take<double>(obj, "tol", 1e-6), "tol");
        cfg.max_iter = take<int>(obj, "max_iter", 2000);
        json& ref = obj.at("reference");
        reject_unknown_keys(ref, {"path", "uniform_ball"}, "embedding.reference");
        if (ref.contains("path")) {
            const auto path = ref.at("path").get<std::string>();
            auto [points, weights] = load_reference(path);
            cfg.reference_points = std::move(points);
            cfg.reference_weights = std::move(weights);
        } else if (ref.contains("uniform_ball")) {
            json& ball = ref.at("uniform_ball");
            reject_unknown_keys(ball, {"count", "dim", "radius", "seed"},
                                "embedding.reference.uniform_ball");
            const int count = require<int>(ball, "count", "uniform_ball");
            const int dim = require<int>(ball, "dim", "uniform_ball");
            const double radius = take<double>(ball, "radius", 1.0);
            const auto seed = take<std::uint64_t>(ball, "seed", 0);
            cfg.reference_points = sample_uniform_ball(seed, count, dim, radius);
            cfg.reference_weights = Vector::Constant(count, 1.0 / static_cast<double>(count));
        } else {
            throw ValidationError("config: reference needs 'path' or 'uniform_ball'");
        }
        return cfg;
    }
    throw ValidationError("config: unknown embedding type '" + type + "'");
}

TrueDistribution parse_truth(json& obj) {
    const auto family = require<std::string>(obj, "family", "truth");
    if (family == "uniform") {
        reject_unknown_keys(obj, {"family", "lo", "hi"}, "truth");
        Uniform1D u;
        u.lo = take<double>(obj, "lo", 0.0);
        u.hi = take<double>(obj, "hi", 1.0);
        if (!(u.lo < u.hi)) throw ValidationError("config: truth requires lo < hi");
        return u;
    }
    if (family == "gaussian") {
        reject_unknown_keys(obj, {"family", "mean", "sd"}, "truth");
        Gaussian1D g;
        g.mean = take<double>(obj, "mean", 0.0);
        g.sd = require_positive(take<double>(obj, "sd", 1.0), "truth.sd");
        return g;
    }
    throw ValidationError("config: unknown truth family '" + family + "'");
}

std::vector<double> parse_grid(json& obj, const std::string& key,
                               const std::vector<double>& fallback) {
    const auto grid = take<std::vector<double>>(obj, key, fallback);
    if (grid.empty()) throw ValidationError("config: " + key + " must be non-empty");
    return grid;
}

// ---------------------------------------------------------------------------
// Run directory
// ---------------------------------------------------------------------------

struct RunContext {
    fs::path dir;
    json resolved;
    std::string subcommand;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    unsigned threads = 0;
};

RunContext make_run_dir(const std::string& subcommand, const json& resolved,
                        const std::string& out_base) {
    RunContext ctx;
    ctx.subcommand = subcommand;
    ctx.resolved = resolved;
    const std::string hash = hex16(fnv1a(resolved.dump()));
    const std::string stamp = utc_timestamp();
    const fs::path base = fs::path(out_base) / (subcommand + "-" + hash + "-" + stamp);
    fs::path dir = base;
    for (int suffix = 1; fs::exists(dir); ++suffix) {
        dir = base;
        dir += "-" + std::to_string(suffix);
    }
    fs::create_directories(dir);
    ctx.dir = dir;
    std::ofstream echo(dir / "resolved_config.json");
    echo << resolved.dump(2) << "\n";
    return ctx;
}

void write_manifest(const RunContext& ctx, const json& seeds) {
    json manifest;
    manifest["subcommand"] = ctx.subcommand;
    manifest["config_hash"] = hex16(fnv1a(ctx.resolved.dump()));
    manifest["created"] = utc_timestamp();
    manifest["inputs"] = ctx.inputs;
    manifest["outputs"] = ctx.outputs;
    manifest["seeds"] = seeds;
    manifest["threads"] = ctx.threads;
    manifest["resolved_config"] = ctx.resolved;
    std::ofstream out(ctx.dir / "MANIFEST.json");
    out << manifest.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

void write_embeddings_csv(const fs::path& path, const std::vector<std::string>& group_ids,
                          const std::vector<EmbeddingVector>& embeddings) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    const Eigen::Index m = embeddings.front().size();
    out << "group_id";
    for (Eigen::Index k = 1; k <= m; ++k) out << ",w_" << k;
    out << "\n";
    for (std::size_t i = 0; i < embeddings.size(); ++i) {
        out << group_ids[i];
        for (Eigen::Index k = 0; k < m; ++k) {
            out << ',' << csv::format_double(embeddings[i].coords[k]);
        }
        out << "\n";
    }
}

void write_embedding_meta(const fs::path& path, const EmbeddingVector& sample,
                          const json& embedding_cfg) {
    json meta;
    meta["fingerprint"] = hex16(sample.fingerprint);
    meta["weights"] =
        std::vector<double>(sample.weights.data(), sample.weights.data() + sample.weights.size());
    meta["config"] = embedding_cfg;
    std::ofstream out(path);
    out << meta.dump(2) << "\n";
}

int run_embed(json& payload, const std::string& out_base, unsigned threads) {
    reject_unknown_keys(payload, {"samples_path", "labels_path", "embedding"}, "embed");
    const auto samples_path = require<std::string>(payload, "samples_path", "embed");
    const auto labels_path = require<std::string>(payload, "labels_path", "embed");
    if (!payload.contains("embedding")) {
        throw ValidationError("config: missing required key 'embedding' in embed");
    }
    const EmbeddingConfig cfg = parse_embedding(payload.at("embedding"));

    const RegressionDataset dataset = load_dataset(samples_path, labels_path);
    if (dataset.items.empty()) throw ValidationError("embed: dataset has no groups");

    const json resolved = {{"embed", payload}};
    RunContext ctx = make_run_dir("embed", resolved, out_base);
    ctx.threads = threads;
    ctx.inputs = {samples_path, labels_path};
    try {
        std::vector<EmbeddingVector> embeddings(dataset.size());
        parallel_for(dataset.size(), threads,
                     [&](std::size_t i) { embeddings[i] = embed(cfg, dataset.items[i].dist); });
        std::vector<std::string> ids;
        ids.reserve(dataset.size());
        for (const auto& item : dataset.items) ids.push_back(item.dist.group_id);
        write_embeddings_csv(ctx.dir / "embeddings.csv", ids, embeddings);
        write_embedding_meta(ctx.dir / "embeddings.meta.json", embeddings.front(),
                             payload.at("embedding"));
        ctx.outputs = {"embeddings.csv", "embeddings.meta.json"};
        write_manifest(ctx, json::object());
    } catch (...) {
        // leave no partial artifacts behind
        fs::remove_all(ctx.dir);
        throw;
    }
    std::cout << ctx.dir.string() << "\n";
    return 0;
}

RidgeModel fit_from_payload(json& payload, const std::string& where,
                            std::vector<std::string>* inputs, json* seeds) {
    const auto samples_path = require<std::string>(payload, "samples_path", where);
    const auto labels_path = require<std::string>(payload, "labels_path", where);
    if (!payload.contains("embedding")) {
        throw ValidationError("config: missing required key 'embedding' in " + where);
    }
    const EmbeddingConfig cfg = parse_embedding(payload.at("embedding"));
    const RegressionDataset dataset = load_dataset(samples_path, labels_path);
    if (dataset.items.empty()) throw ValidationError(where + ": dataset has no groups");
    inputs->push_back(samples_path);
    inputs->push_back(labels_path);

    std::vector<EmbeddingVector> embeddings(dataset.size());
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        embeddings[i] = embed(cfg, dataset.items[i].dist);
    }

    if (!payload.contains("kernel")) payload["kernel"] = json::object();
    json& kernel_obj = payload.at("kernel");
    reject_unknown_keys(kernel_obj, {"length_scale"}, where + ".kernel");
    KernelConfig kernel;
    kernel.length_scale =
        require_positive(take<double>(kernel_obj, "length_scale", 1.0), "kernel.length_scale");
    double lambda = take<double>(payload, "lambda", 1e-3);

    if (payload.contains("cv")) {
        json& cv_obj = payload.at("cv");
        reject_unknown_keys(cv_obj, {"lambda_grid", "scale_grid", "num_splits", "holdout", "seed"},
                            where + ".cv");
        const std::vector<double> lambda_grid = parse_grid(cv_obj, "lambda_grid", {lambda});
        const std::vector<double> scale_grid =
            parse_grid(cv_obj, "scale_grid", {kernel.length_scale});
        CvOptions options;
        options.num_splits = take<int>(cv_obj, "num_splits", 10);
        options.holdout = take<double>(cv_obj, "holdout", 0.2);
        options.seed = take<std::uint64_t>(cv_obj, "seed", 0);
        const CvResult cv =
            cross_validate(embeddings, dataset.labels(), lambda_grid, scale_grid, options);
        lambda = cv.best_lambda;
        kernel.length_scale = cv.best_scale;
        payload["lambda"] = lambda;
        kernel_obj["length_scale"] = kernel.length_scale;
        (*seeds)["cv"] = options.seed;
    }
    if (!(lambda > 0.0)) throw ValidationError("config: lambda must be > 0");
    return fit(embeddings, dataset.labels(), lambda, kernel);
}

int run_fit(json& payload, const std::string& out_base, unsigned threads) {
    reject_unknown_keys(payload,
                        {"samples_path", "labels_path", "embedding", "kernel", "lambda", "cv"},
                        "fit");
    std::vector<std::string> inputs;
    json seeds = json::object();
    const RidgeModel model = fit_from_payload(payload, "fit", &inputs, &seeds);

    const json resolved = {{"fit", payload}};
    RunContext ctx = make_run_dir("fit", resolved, out_base);
    ctx.threads = threads;
    ctx.inputs = inputs;
    try {
        save_model_json((ctx.dir / "model.json").string(), model);
        ctx.outputs = {"model.json"};
        write_manifest(ctx, seeds);
    } catch (...) {
        fs::remove_all(ctx.dir);
        throw;
    }
    std::cout << ctx.dir.string() << "\n";
    return 0;
}

int run_predict(json& payload, const std::string& out_base, unsigned threads) {
    reject_unknown_keys(payload, {"model_path", "samples_path", "embedding"}, "predict");
    const auto model_path = require<std::string>(payload, "model_path", "predict");
    const auto samples_path = require<std::string>(payload, "samples_path", "predict");
    if (!payload.contains("embedding")) {
        throw ValidationError("config: missing required key 'embedding' in predict");
    }
    const EmbeddingConfig cfg = parse_embedding(payload.at("embedding"));

    const RidgeModel model = load_model_json(model_path);
    const std::vector<EmpiricalDistribution> groups = load_groups(samples_path);
    if (groups.empty()) throw ValidationError("predict: samples file has no groups");
    if (embedding_fingerprint(cfg, groups.front().dim()) != model.fingerprint) {
        throw NumericalError(
            "predict: embedding config fingerprint does not match the model; refusing");
    }

    std::vector<EmbeddingVector> embeddings(groups.size());
    parallel_for(groups.size(), threads,
                 [&](std::size_t i) { embeddings[i] = embed(cfg, groups[i]); });

    const json resolved = {{"predict", payload}};
    RunContext ctx = make_run_dir("predict", resolved, out_base);
    ctx.threads = threads;
    ctx.inputs = {model_path, samples_path};
    try {
        std::ofstream out(ctx.dir / "predictions.csv");
        out << "group_id,y_pred\n";
        for (std::size_t i = 0; i < groups.size(); ++i) {
            out << groups[i].group_id << ',' << csv::format_double(predict(model, embeddings[i]))
                << "\n";
        }
        out.close();
        ctx.outputs = {"predictions.csv"};
        write_manifest(ctx, json::object());
    } catch (...) {
        fs::remove_all(ctx.dir);
        throw;
    }
    std::cout << ctx.dir.string() << "\n";
    return 0;
}

int run_experiment_rate(json& payload, std::uint64_t seed, const std::string& out_base,
                        unsigned threads) {
    reject_unknown_keys(payload,
                        {"embedding", "length_scale", "family", "n_grid", "N_grid", "lambda",
                         "replicates", "truth_fallback_size"},
                        "experiment-rate");
    RateConfig cfg;
    cfg.seed = seed;
    if (!payload.contains("embedding")) payload["embedding"] = {{"type", "mean_linear"}};
    cfg.embedding = parse_embedding(payload.at("embedding"));
    cfg.length_scale = require_positive(take<double>(payload, "length_scale", 1.0), "length_scale");
    if (!payload.contains("family")) payload["family"] = json::object();
    json& family = payload.at("family");
    reject_unknown_keys(family, {"mean_lo", "mean_hi", "sd_lo", "sd_hi", "clip_lo", "clip_hi"},
                        "experiment-rate.family");
    cfg.family.mean_lo = take<double>(family, "mean_lo", -2.0);
    cfg.family.mean_hi = take<double>(family, "mean_hi", 2.0);
    cfg.family.sd_lo = take<double>(family, "sd_lo", 0.5);
    cfg.family.sd_hi = take<double>(family, "sd_hi", 1.5);
    cfg.family.clip_lo = take<double>(family, "clip_lo", -1.0);
    cfg.family.clip_hi = take<double>(family, "clip_hi", 1.0);
    cfg.n_grid = require<std::vector<int>>(payload, "n_grid", "experiment-rate");
    cfg.sample_grid = require<std::vector<int>>(payload, "N_grid", "experiment-rate");
    if (!payload.contains("lambda")) payload["lambda"] = json::object();
    json& lambda = payload.at("lambda");
    reject_unknown_keys(lambda, {"value", "exponent"}, "experiment-rate.lambda");
    cfg.lambda.value = require_positive(take<double>(lambda, "value", 0.1), "lambda.value");
    cfg.lambda.exponent = take<double>(lambda, "exponent", 0.0);
    cfg.replicates = take<int>(payload, "replicates", 50);
    cfg.truth_fallback_size = take<int>(payload, "truth_fallback_size", 1 << 20);

    const json resolved = {{"seed", seed}, {"experiment-rate", payload}};
    RunContext ctx = make_run_dir("experiment-rate", resolved, out_base);
    ctx.threads = threads;
    try {
        const RateReport report = run_rate_experiment(cfg, threads);
        write_rate_report(report, (ctx.dir / "report.csv").string(),
                          (ctx.dir / "summary.json").string());
        ctx.outputs = {"report.csv", "summary.json"};
        write_manifest(ctx, {{"seed", seed}});
    } catch (...) {
        fs::remove_all(ctx.dir);
        throw;
    }
    std::cout << ctx.dir.string() << "\n";
    return 0;
}

int run_experiment_bias(json& payload, std::uint64_t seed, const std::string& out_base,
                        unsigned threads) {
    reject_unknown_keys(payload,
                        {"embedding", "truth", "N_grid", "replicates", "num_probes", "probe_seed",
                         "truth_fallback_size"},
                        "experiment-bias");
    BiasProbeConfig cfg;
    cfg.seed = seed;
    if (!payload.contains("embedding")) payload["embedding"] = {{"type", "mean_linear"}};
    cfg.embedding = parse_embedding(payload.at("embedding"));
    if (!payload.contains("truth")) payload["truth"] = {{"family", "uniform"}};
    cfg.truth = parse_truth(payload.at("truth"));
    cfg.sample_grid = require<std::vector<int>>(payload, "N_grid", "experiment-bias");
    if (payload.contains("replicates") && payload.at("replicates").is_number()) {
        cfg.replicates = {payload.at("replicates").get<int>()};
    } else {
        cfg.replicates = take<std::vector<int>>(payload, "replicates", {2000});
    }
    cfg.num_probes = take<int>(payload, "num_probes", 3);
    cfg.probe_seed = take<std::uint64_t>(payload, "probe_seed", 0x70726f6265ULL);
    cfg.truth_fallback_size = take<int>(payload, "truth_fallback_size", 1 << 20);

    const json resolved = {{"seed", seed}, {"experiment-bias", payload}};
    RunContext ctx = make_run_dir("experiment-bias", resolved, out_base);
    ctx.threads = threads;
    try {
        const BiasProbeReport report = run_bias_probe(cfg, threads);
        write_bias_report(report, (ctx.dir / "report.csv").string(),
                          (ctx.dir / "summary.json").string());
        ctx.outputs = {"report.csv", "summary.json"};
        write_manifest(ctx, {{"seed", seed}, {"probe_seed", cfg.probe_seed}});
    } catch (...) {
        fs::remove_all(ctx.dir);
        throw;
    }
    std::cout << ctx.dir.string() << "\n";
    return 0;
}

int run_experiment_gmm(json& payload, std::uint64_t seed, const std::string& out_base,
                       unsigned threads) {
    reject_unknown_keys(payload,
                        {"d", "max_modes", "cells", "embedding", "lambda_grid", "scale_grid",
                         "cv_splits", "cv_holdout", "eval_replicates"},
                        "experiment-gmm");
    GmmExperimentConfig cfg;
    cfg.seed = seed;
    cfg.d = take<int>(payload, "d", 2);
    cfg.max_modes = take<int>(payload, "max_modes", 2);
    const auto cells = require<std::vector<std::vector<int>>>(payload, "cells", "experiment-gmm");
    for (const auto& cell : cells) {
        if (cell.size() != 2) throw ValidationError("config: each cell must be [n, N]");
        cfg.cells.push_back({cell[0], cell[1]});
    }
    if (!payload.contains("embedding")) payload["embedding"] = {{"type", "mean_linear"}};
    cfg.embedding = parse_embedding(payload.at("embedding"));
    cfg.lambda_grid = parse_grid(payload, "lambda_grid", {1e-2, 1e-1, 1.0, 10.0, 100.0});
    cfg.scale_grid = parse_grid(payload, "scale_grid", {1.0});
    cfg.cv_splits = take<int>(payload, "cv_splits", 10);
    cfg.cv_holdout = take<double>(payload, "cv_holdout", 0.2);
    cfg.eval_replicates = take<int>(payload, "eval_replicates", 5);

    const json resolved = {{"seed", seed}, {"experiment-gmm", payload}};
    RunContext ctx = make_run_dir("experiment-gmm", resolved, out_base);
    ctx.threads = threads;
    try {
        const GmmReport report = run_gmm_experiment(cfg, threads);
        write_gmm_report(report, (ctx.dir / "report.csv").string(),
                         (ctx.dir / "summary.json").string());
        ctx.outputs = {"report.csv", "summary.json"};
        write_manifest(ctx, {{"seed", seed}});
    } catch (...) {
        fs::remove_all(ctx.dir);
        throw;
    }
    std::cout << ctx.dir.string() << "\n";
    return 0;
}

int run_experiment_eco(json& payload, std::uint64_t seed, const std::string& out_base,
                       unsigned threads) {
    reject_unknown_keys(payload,
                        {"d_values", "n_train", "N", "n_test", "mc_steps", "embedding",
                         "lambda_grid", "scale_grid", "cv_splits", "cv_holdout",
                         "feature_probe_d"},
                        "experiment-eco");
    EcologicalExperimentConfig cfg;
    cfg.seed = seed;
    cfg.d_values = take<std::vector<int>>(payload, "d_values", {5, 10, 15, 20});
    cfg.n_train = take<int>(payload, "n_train", 100);
    cfg.samples_per_group = take<int>(payload, "N", 200);
    cfg.n_test = take<int>(payload, "n_test", 200);
    cfg.mc_steps = take<int>(payload, "mc_steps", 10);
    if (!payload.contains("embedding")) {
        payload["embedding"] = {{"type", "sliced_wasserstein"},
                                {"num_directions", 100},
                                {"num_quantiles", 200},
                                {"trim", 0.0},
                                {"seed", 0}};
    }
    cfg.embedding = parse_embedding(payload.at("embedding"));
    cfg.lambda_grid = parse_grid(payload, "lambda_grid",
                                 {1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0});
    cfg.scale_grid = parse_grid(payload, "scale_grid",
                                {0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0});
    cfg.cv_splits = take<int>(payload, "cv_splits", 10);
    cfg.cv_holdout = take<double>(payload, "cv_holdout", 0.2);
    cfg.feature_probe_d = take<int>(payload, "feature_probe_d", 5);

    const json resolved = {{"seed", seed}, {"experiment-eco", payload}};
    RunContext ctx = make_run_dir("experiment-eco", resolved, out_base);
    ctx.threads = threads;
    try {
        const EcologicalReport report = run_ecological_experiment(cfg, threads);
        write_eco_report(report, (ctx.dir / "report.csv").string(),
                         (ctx.dir / "probe.csv").string(), (ctx.dir / "summary.json").string());
        ctx.outputs = {"report.csv", "probe.csv", "summary.json"};
        write_manifest(ctx, {{"seed", seed}});
    } catch (...) {
        fs::remove_all(ctx.dir);
        throw;
    }
    std::cout << ctx.dir.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"kernel distribution regression toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_base = "runs";
    std::vector<std::string> overrides;
    int threads_opt = -1;

    const std::vector<std::string> names = {
        "embed",          "fit",           "predict",        "experiment-rate",
        "experiment-gmm", "experiment-bias", "experiment-eco"};
    for (const auto& name : names) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON config file")->required();
        sub->add_option("--set", overrides, "override config keys, e.g. --set seed=7");
        sub->add_option("--threads", threads_opt, "worker threads (0 = all cores)");
        sub->add_option("--out", out_base, "parent directory for run outputs");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
        app.exit(e);
        return 1;
    }

    const std::string subcommand = app.get_subcommands().front()->get_name();
    try {
        json doc = load_config(config_path);
        for (const auto& assignment : overrides) apply_override(doc, assignment);

        reject_unknown_keys(doc, {"seed", "threads", subcommand}, "top level");
        if (!doc.contains(subcommand)) {
            throw distreg::ValidationError("config: missing payload '" + subcommand + "'");
        }
        const auto seed = take<std::uint64_t>(doc, "seed", 0);
        const unsigned threads = distreg::resolve_threads(
            threads_opt >= 0 ? static_cast<unsigned>(threads_opt)
                             : static_cast<unsigned>(take<int>(doc, "threads", 0)));
        json& payload = doc.at(subcommand);

        if (subcommand == "embed") return run_embed(payload, out_base, threads);
        if (subcommand == "fit") return run_fit(payload, out_base, threads);
        if (subcommand == "predict") return run_predict(payload, out_base, threads);
        if (subcommand == "experiment-rate") {
            return run_experiment_rate(payload, seed, out_base, threads);
        }
        if (subcommand == "experiment-bias") {
            return run_experiment_bias(payload, seed, out_base, threads);
        }
        if (subcommand == "experiment-gmm") {
            return run_experiment_gmm(payload, seed, out_base, threads);
        }
        return run_experiment_eco(payload, seed, out_base, threads);
    } catch (const distreg::NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const distreg::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
