#include "distreg/experiments.hpp"

#include "distreg/error.hpp"
#include "distreg/generators.hpp"
#include "distreg/parallel.hpp"
#include "distreg/rng.hpp"

#include <nlohmann/json.hpp>

#include "distreg/csv.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

namespace distreg {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double population_variance(const Vector& v) {
    const double mean = v.mean();
    return (v.array() - mean).square().sum() / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& values, double mean) {
    if (values.size() < 2) return 0.0;
    double acc = 0.0;
    for (const double v : values) acc += (v - mean) * (v - mean);
    return std::sqrt(acc / static_cast<double>(values.size() - 1));
}

std::vector<Eigen::Index> shuffled_indices(Eigen::Index n, Rng& rng) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = idx.size(); i > 1; --i) {
        std::swap(idx[i - 1],
                  idx[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1))]);
    }
    return idx;
}

Vector gather(const Vector& values, const std::vector<Eigen::Index>& idx) {
    Vector out(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) out[static_cast<Eigen::Index>(i)] = values[idx[i]];
    return out;
}

std::vector<EmbeddingVector> gather(const std::vector<EmbeddingVector>& values,
                                    const std::vector<Eigen::Index>& idx) {
    std::vector<EmbeddingVector> out;
    out.reserve(idx.size());
    for (const Eigen::Index i : idx) out.push_back(values[static_cast<std::size_t>(i)]);
    return out;
}

std::vector<EmbeddingVector> embed_dataset(const EmbeddingConfig& cfg,
                                           const RegressionDataset& dataset) {
    std::vector<EmbeddingVector> out(dataset.size());
    for (std::size_t i = 0; i < dataset.size(); ++i) out[i] = embed(cfg, dataset.items[i].dist);
    return out;
}

}  // namespace

double explained_variance(const Vector& y_true, const Vector& y_pred) {
    if (y_true.size() == 0 || y_true.size() != y_pred.size()) {
        throw ValidationError("explained_variance: vectors must have equal nonzero length");
    }
    const double var_true = population_variance(y_true);
    if (var_true == 0.0) {
        throw ZeroVarianceError("explained_variance: target variance is zero");
    }
    const Vector err = y_pred - y_true;
    return 1.0 - population_variance(err) / var_true;
}

double ols_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2) return kNaN;
    const double n = static_cast<double>(xs.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    const double denom = sxx - sx * sx / n;
    if (denom == 0.0) return kNaN;
    return (sxy - sx * sy / n) / denom;
}

double median(std::vector<double> values) {
    if (values.empty()) return kNaN;
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    if (values.size() % 2 == 1) return values[mid];
    return 0.5 * (values[mid - 1] + values[mid]);
}

double LambdaRule::at(int n) const {
    return value * std::pow(static_cast<double>(n), exponent);
}

// ---------------------------------------------------------------------------
// Rate experiment
// ---------------------------------------------------------------------------

RateReport run_rate_experiment(const RateConfig& cfg, unsigned threads) {
    if (cfg.n_grid.empty() || cfg.sample_grid.empty()) {
        throw ValidationError("rate experiment: grids must be non-empty");
    }
    if (cfg.replicates < 1) throw ValidationError("rate experiment: replicates must be >= 1");
    validate_config(cfg.embedding);

    const std::size_t num_cells = cfg.n_grid.size() * cfg.sample_grid.size();
    const auto reps = static_cast<std::size_t>(cfg.replicates);
    std::vector<double> distances(num_cells * reps, 0.0);

    const KernelConfig kernel{cfg.length_scale};
    parallel_for(num_cells * reps, threads, [&](std::size_t unit) {
        const std::size_t cell = unit / reps;
        const std::size_t rep = unit % reps;
        const int n = cfg.n_grid[cell / cfg.sample_grid.size()];
        const int num_samples = cfg.sample_grid[cell % cfg.sample_grid.size()];
        const std::uint64_t unit_seed = derive_seed(cfg.seed, cell, rep);

        std::vector<EmbeddingVector> exact(static_cast<std::size_t>(n));
        std::vector<EmbeddingVector> noisy(static_cast<std::size_t>(n));
        Vector labels(n);
        for (int i = 0; i < n; ++i) {
            Rng rng(derive_seed(unit_seed, static_cast<std::uint64_t>(i)));
            const double mean = rng.uniform(cfg.family.mean_lo, cfg.family.mean_hi);
            const double sd = rng.uniform(cfg.family.sd_lo, cfg.family.sd_hi);
            const TrueDistribution truth = Gaussian1D{mean, sd};
            labels[i] = std::clamp(mean, cfg.family.clip_lo, cfg.family.clip_hi);
            exact[static_cast<std::size_t>(i)] = true_embedding_or_sampled(
                cfg.embedding, truth, cfg.truth_fallback_size,
                derive_seed(unit_seed, static_cast<std::uint64_t>(i), 7));
            noisy[static_cast<std::size_t>(i)] =
                embed(cfg.embedding, sample_true(truth, rng, num_samples, "item"));
        }
        const double lambda = cfg.lambda.at(n);
        const RidgeModel exact_model = fit(exact, labels, lambda, kernel);
        const RidgeModel noisy_model = fit(noisy, labels, lambda, kernel);
        distances[unit] = rkhs_distance(exact_model, noisy_model);
    });

    RateReport report;
    report.replicates = cfg.replicates;
    report.seed = cfg.seed;
    report.grid.resize(num_cells);
    for (std::size_t cell = 0; cell < num_cells; ++cell) {
        RateCell& out = report.grid[cell];
        out.n = cfg.n_grid[cell / cfg.sample_grid.size()];
        out.samples = cfg.sample_grid[cell % cfg.sample_grid.size()];
        out.lambda = cfg.lambda.at(out.n);
        std::vector<double> values(distances.begin() + static_cast<std::ptrdiff_t>(cell * reps),
                                   distances.begin() + static_cast<std::ptrdiff_t>((cell + 1) * reps));
        out.mean_distance =
            std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(reps);
        out.std_distance = sample_std(values, out.mean_distance);
    }

    std::vector<double> log_n_samples, log_dist;
    for (const RateCell& cell : report.grid) {
        if (cell.n == cfg.n_grid.front() && cell.mean_distance > 0.0) {
            log_n_samples.push_back(std::log2(static_cast<double>(cell.samples)));
            log_dist.push_back(std::log2(cell.mean_distance));
        }
    }
    report.slope_samples = ols_slope(log_n_samples, log_dist);

    report.slope_joint = kNaN;
    if (cfg.n_grid.size() == cfg.sample_grid.size() && cfg.n_grid.size() >= 2) {
        std::vector<double> log_nn, log_d;
        for (std::size_t i = 0; i < cfg.n_grid.size(); ++i) {
            const RateCell& cell = report.grid[i * cfg.sample_grid.size() + i];
            if (cell.mean_distance > 0.0) {
                log_nn.push_back(
                    std::log2(static_cast<double>(cell.n) * static_cast<double>(cell.samples)));
                log_d.push_back(std::log2(cell.mean_distance));
            }
        }
        report.slope_joint = ols_slope(log_nn, log_d);
    }
    return report;
}

// ---------------------------------------------------------------------------
// Bias probe
// ---------------------------------------------------------------------------

BiasProbeReport run_bias_probe(const BiasProbeConfig& cfg, unsigned threads) {
    if (cfg.sample_grid.empty()) throw ValidationError("bias probe: sample grid is empty");
    if (cfg.num_probes < 1) throw ValidationError("bias probe: num_probes must be >= 1");
    if (cfg.replicates.size() != 1 && cfg.replicates.size() != cfg.sample_grid.size()) {
        throw ValidationError("bias probe: replicates must have one entry or one per N");
    }
    for (const int r : cfg.replicates) {
        if (r < 2) throw ValidationError("bias probe: replicates must be >= 2");
    }
    validate_config(cfg.embedding);

    const EmbeddingVector truth_emb = true_embedding_or_sampled(
        cfg.embedding, cfg.truth, cfg.truth_fallback_size, derive_seed(cfg.seed, 0xAAAA));
    const Eigen::Index dim = truth_emb.size();

    // Fixed probe directions, unit Euclidean norm.
    Matrix probes(cfg.num_probes, dim);
    {
        Rng rng(cfg.probe_seed);
        for (int p = 0; p < cfg.num_probes; ++p) {
            for (Eigen::Index j = 0; j < dim; ++j) probes(p, j) = rng.normal();
            probes.row(p) /= probes.row(p).norm();
        }
    }

    const auto reps_at = [&](std::size_t a) {
        return cfg.replicates.size() == 1 ? cfg.replicates[0] : cfg.replicates[a];
    };

    // Flattened (grid point, replicate) work units with per-N offsets.
    std::vector<std::size_t> offset(cfg.sample_grid.size() + 1, 0);
    for (std::size_t a = 0; a < cfg.sample_grid.size(); ++a) {
        offset[a + 1] = offset[a] + static_cast<std::size_t>(reps_at(a));
    }
    const std::size_t total = offset.back();
    const auto num_probes = static_cast<std::size_t>(cfg.num_probes);
    std::vector<double> projections(total * num_probes, 0.0);

    parallel_for(total, threads, [&](std::size_t unit) {
        const std::size_t a =
            static_cast<std::size_t>(std::upper_bound(offset.begin(), offset.end(), unit) -
                                     offset.begin()) -
            1;
        const std::size_t rep = unit - offset[a];
        Rng rng(derive_seed(cfg.seed, a, rep));
        const EmpiricalDistribution sample =
            sample_true(cfg.truth, rng, cfg.sample_grid[a], "probe");
        const EmbeddingVector emb = embed(cfg.embedding, sample);
        const Vector diff = emb.coords - truth_emb.coords;
        const Vector weighted = truth_emb.weights.asDiagonal() * diff;
        for (std::size_t p = 0; p < num_probes; ++p) {
            projections[unit * num_probes + p] = probes.row(static_cast<Eigen::Index>(p)).dot(weighted);
        }
    });

    BiasProbeReport report;
    report.seed = cfg.seed;
    for (std::size_t a = 0; a < cfg.sample_grid.size(); ++a) {
        const int reps = reps_at(a);
        BiasProbeAggregate agg;
        agg.samples = cfg.sample_grid[a];
        double bias_sq = 0.0, se_sq = 0.0, rms_sq = 0.0;
        for (std::size_t p = 0; p < num_probes; ++p) {
            double sum = 0.0, sum_sq = 0.0;
            for (int r = 0; r < reps; ++r) {
                const double v = projections[(offset[a] + static_cast<std::size_t>(r)) * num_probes + p];
                sum += v;
                sum_sq += v * v;
            }
            BiasProbeRow row;
            row.samples = cfg.sample_grid[a];
            row.probe = static_cast<int>(p);
            row.replicates = reps;
            row.bias = sum / reps;
            const double var =
                std::max(0.0, (sum_sq - sum * sum / reps) / static_cast<double>(reps - 1));
            row.std_error = std::sqrt(var / reps);
            row.rms = std::sqrt(sum_sq / reps);
            report.rows.push_back(row);
            bias_sq += row.bias * row.bias;
            se_sq += row.std_error * row.std_error;
            rms_sq += row.rms * row.rms;
        }
        agg.bias = std::sqrt(bias_sq / static_cast<double>(num_probes));
        agg.std_error = std::sqrt(se_sq / static_cast<double>(num_probes));
        agg.rms = std::sqrt(rms_sq / static_cast<double>(num_probes));
        report.aggregate.push_back(agg);
    }

    std::vector<double> log_n, log_bias, log_rms;
    for (const BiasProbeAggregate& agg : report.aggregate) {
        log_n.push_back(std::log2(static_cast<double>(agg.samples)));
        log_bias.push_back(std::log2(agg.bias));
        log_rms.push_back(std::log2(agg.rms));
    }
    report.bias_slope = ols_slope(log_n, log_bias);
    report.rms_slope = ols_slope(log_n, log_rms);
    return report;
}

// ---------------------------------------------------------------------------
// GMM experiment
// ---------------------------------------------------------------------------

namespace {

struct SplitData {
    std::vector<EmbeddingVector> train_emb, test_emb;
    Vector y_train, y_test;
};

SplitData split_half(const std::vector<EmbeddingVector>& embeddings, const Vector& labels,
                     Rng& rng) {
    const auto n = static_cast<Eigen::Index>(embeddings.size());
    const std::vector<Eigen::Index> perm = shuffled_indices(n, rng);
    const auto n_train = static_cast<std::size_t>(n / 2);
    const std::vector<Eigen::Index> train_idx(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
    const std::vector<Eigen::Index> test_idx(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
    SplitData out;
    out.train_emb = gather(embeddings, train_idx);
    out.test_emb = gather(embeddings, test_idx);
    out.y_train = gather(labels, train_idx);
    out.y_test = gather(labels, test_idx);
    return out;
}

}  // namespace

GmmReport run_gmm_experiment(const GmmExperimentConfig& cfg, unsigned threads) {
    if (cfg.cells.empty()) throw ValidationError("gmm experiment: no cells");
    if (cfg.lambda_grid.empty() || cfg.scale_grid.empty()) {
        throw ValidationError("gmm experiment: hyperparameter grids must be non-empty");
    }
    if (cfg.eval_replicates < 1) {
        throw ValidationError("gmm experiment: eval_replicates must be >= 1");
    }
    validate_config(cfg.embedding);

    const std::size_t num_cells = cfg.cells.size();
    std::vector<double> best_lambda(num_cells, 0.0), best_scale(num_cells, 0.0);

    const auto make_task = [&](std::size_t cell, int rep) {
        GmmTaskConfig task;
        task.d = cfg.d;
        task.max_modes = cfg.max_modes;
        task.n = cfg.cells[cell].n;
        task.samples_per_item = cfg.cells[cell].samples;
        task.seed = derive_seed(cfg.seed, cell, static_cast<std::uint64_t>(rep), 0);
        return task;
    };

    // Selection pass: hyperparameters are picked once per cell on replicate 0
    // and then held fixed for the scoring replicates.
    parallel_for(num_cells, threads, [&](std::size_t cell) {
        const RegressionDataset task = sample_gmm_task(make_task(cell, 0));
        const std::vector<EmbeddingVector> embeddings = embed_dataset(cfg.embedding, task);
        Rng split_rng(derive_seed(cfg.seed, cell, 0, 1));
        const SplitData split = split_half(embeddings, task.labels(), split_rng);
        CvOptions options;
        options.num_splits = cfg.cv_splits;
        options.holdout = cfg.cv_holdout;
        options.seed = derive_seed(cfg.seed, cell, 0, 2);
        const CvResult cv = cross_validate(split.train_emb, split.y_train, cfg.lambda_grid,
                                           cfg.scale_grid, options);
        best_lambda[cell] = cv.best_lambda;
        best_scale[cell] = cv.best_scale;
    });

    const auto reps = static_cast<std::size_t>(cfg.eval_replicates);
    std::vector<double> scores(num_cells * reps, kNaN);
    parallel_for(num_cells * reps, threads, [&](std::size_t unit) {
        const std::size_t cell = unit / reps;
        const int rep = static_cast<int>(unit % reps) + 1;
        const RegressionDataset task = sample_gmm_task(make_task(cell, rep));
        const std::vector<EmbeddingVector> embeddings = embed_dataset(cfg.embedding, task);
        Rng split_rng(derive_seed(cfg.seed, cell, static_cast<std::uint64_t>(rep), 1));
        const SplitData split = split_half(embeddings, task.labels(), split_rng);
        const RidgeModel model =
            fit(split.train_emb, split.y_train, best_lambda[cell], KernelConfig{best_scale[cell]});
        try {
            scores[unit] = explained_variance(split.y_test, predict_many(model, split.test_emb));
        } catch (const ZeroVarianceError&) {
            scores[unit] = kNaN;  // degenerate test set stays visible in the report
        }
    });

    GmmReport report;
    report.seed = cfg.seed;
    report.cells.resize(num_cells);
    for (std::size_t cell = 0; cell < num_cells; ++cell) {
        GmmCellResult& out = report.cells[cell];
        out.n = cfg.cells[cell].n;
        out.samples = cfg.cells[cell].samples;
        out.lambda = best_lambda[cell];
        out.scale = best_scale[cell];
        std::vector<double> valid;
        for (std::size_t r = 0; r < reps; ++r) {
            const double s = scores[cell * reps + r];
            out.scores.push_back(s);
            if (!std::isnan(s)) valid.push_back(s);
        }
        if (valid.empty()) {
            out.degenerate = true;
            out.mean_score = kNaN;
            out.std_score = kNaN;
        } else {
            out.mean_score = std::accumulate(valid.begin(), valid.end(), 0.0) /
                             static_cast<double>(valid.size());
            out.std_score = sample_std(valid, out.mean_score);
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// Ecological experiment
// ---------------------------------------------------------------------------

namespace {

EmpiricalDistribution half_by_feature(const EmpiricalDistribution& dist, Eigen::Index feature,
                                      bool upper) {
    const Eigen::Index n = dist.size();
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
        const double va = dist.points(a, feature);
        const double vb = dist.points(b, feature);
        return va < vb || (va == vb && a < b);
    });
    const Eigen::Index half = n / 2;
    EmpiricalDistribution out;
    out.group_id = dist.group_id + (upper ? "+" : "-");
    out.points.resize(half, dist.dim());
    for (Eigen::Index r = 0; r < half; ++r) {
        out.points.row(r) = dist.points.row(idx[static_cast<std::size_t>(upper ? n - half + r : r)]);
    }
    return out;
}

}  // namespace

EcologicalReport run_ecological_experiment(const EcologicalExperimentConfig& cfg,
                                           unsigned threads) {
    if (cfg.d_values.empty()) throw ValidationError("ecological experiment: d_values is empty");
    if (cfg.mc_steps < 1) throw ValidationError("ecological experiment: mc_steps must be >= 1");
    if (cfg.lambda_grid.empty() || cfg.scale_grid.empty()) {
        throw ValidationError("ecological experiment: hyperparameter grids must be non-empty");
    }
    validate_config(cfg.embedding);

    const auto steps = static_cast<std::size_t>(cfg.mc_steps);
    const std::size_t units = cfg.d_values.size() * steps;
    std::vector<EcoStepResult> results(units);
    // probe rows for the probe dimension, indexed [step][feature]
    const bool probe_enabled =
        cfg.feature_probe_d > 0 &&
        std::find(cfg.d_values.begin(), cfg.d_values.end(), cfg.feature_probe_d) != cfg.d_values.end();
    std::vector<double> probe_medians(
        probe_enabled ? steps * static_cast<std::size_t>(cfg.feature_probe_d) : 0, kNaN);

    parallel_for(units, threads, [&](std::size_t unit) {
        const std::size_t d_idx = unit / steps;
        const std::size_t step = unit % steps;
        const int d = cfg.d_values[d_idx];

        EcologicalTaskConfig train_cfg;
        train_cfg.d = d;
        train_cfg.n = cfg.n_train;
        train_cfg.samples_per_group = cfg.samples_per_group;
        train_cfg.seed = derive_seed(cfg.seed, d_idx, step, 0);
        const RegressionDataset train = sample_ecological_task(train_cfg);

        EcologicalTaskConfig test_cfg = train_cfg;
        test_cfg.n = cfg.n_test;
        test_cfg.seed = derive_seed(cfg.seed, d_idx, step, 1);
        const RegressionDataset test = sample_ecological_task(test_cfg);

        const std::vector<EmbeddingVector> train_emb = embed_dataset(cfg.embedding, train);
        const std::vector<EmbeddingVector> test_emb = embed_dataset(cfg.embedding, test);

        CvOptions options;
        options.num_splits = cfg.cv_splits;
        options.holdout = cfg.cv_holdout;
        options.seed = derive_seed(cfg.seed, d_idx, step, 2);
        const CvResult cv = cross_validate(train_emb, train.labels(), cfg.lambda_grid,
                                           cfg.scale_grid, options);
        const RidgeModel model =
            fit(train_emb, train.labels(), cv.best_lambda, KernelConfig{cv.best_scale});

        EcoStepResult& out = results[unit];
        out.d = d;
        out.step = static_cast<int>(step);
        out.lambda = cv.best_lambda;
        out.scale = cv.best_scale;
        out.score = explained_variance(test.labels(), predict_many(model, test_emb));

        if (probe_enabled && d == cfg.feature_probe_d) {
            for (Eigen::Index k = 0; k < d; ++k) {
                std::vector<double> diffs;
                diffs.reserve(train.size());
                for (const DatasetItem& item : train.items) {
                    const EmbeddingVector upper =
                        embed(cfg.embedding, half_by_feature(item.dist, k, true));
                    const EmbeddingVector lower =
                        embed(cfg.embedding, half_by_feature(item.dist, k, false));
                    diffs.push_back(predict(model, upper) - predict(model, lower));
                }
                probe_medians[step * static_cast<std::size_t>(d) + static_cast<std::size_t>(k)] =
                    median(std::move(diffs));
            }
        }
    });

    EcologicalReport report;
    report.seed = cfg.seed;
    report.steps.assign(results.begin(), results.end());
    if (probe_enabled) {
        for (std::size_t step = 0; step < steps; ++step) {
            for (int k = 0; k < cfg.feature_probe_d; ++k) {
                EcoProbeRow row;
                row.step = static_cast<int>(step);
                row.feature = k + 1;
                row.median_diff = probe_medians[step * static_cast<std::size_t>(cfg.feature_probe_d) +
                                                static_cast<std::size_t>(k)];
                report.probe.push_back(row);
            }
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// Report files
// ---------------------------------------------------------------------------

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write report file: " + path);
    return out;
}

void dump_json(const nlohmann::json& doc, const std::string& path) {
    std::ofstream out = open_out(path);
    out << doc.dump(2) << "\n";
}

nlohmann::json finite_or_null(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

}  // namespace

void write_rate_report(const RateReport& report, const std::string& csv_path,
                       const std::string& json_path) {
    std::ofstream out = open_out(csv_path);
    out << "n,N,lambda,mean_rkhs_distance,std_rkhs_distance\n";
    for (const RateCell& cell : report.grid) {
        out << cell.n << ',' << cell.samples << ',' << csv::format_double(cell.lambda) << ','
            << csv::format_double(cell.mean_distance) << ','
            << csv::format_double(cell.std_distance) << "\n";
    }
    out.close();

    nlohmann::json doc;
    doc["experiment"] = "rate";
    doc["seed"] = report.seed;
    doc["replicates"] = report.replicates;
    doc["slope_N"] = finite_or_null(report.slope_samples);
    doc["slope_joint"] = finite_or_null(report.slope_joint);
    auto grid = nlohmann::json::array();
    for (const RateCell& cell : report.grid) {
        grid.push_back({{"n", cell.n},
                        {"N", cell.samples},
                        {"lambda", cell.lambda},
                        {"mean_rkhs_distance", cell.mean_distance},
                        {"std_rkhs_distance", cell.std_distance}});
    }
    doc["grid"] = std::move(grid);
    dump_json(doc, json_path);
}

void write_bias_report(const BiasProbeReport& report, const std::string& csv_path,
                       const std::string& json_path) {
    std::ofstream out = open_out(csv_path);
    out << "N,probe,replicates,bias,std_error,rms\n";
    for (const BiasProbeRow& row : report.rows) {
        out << row.samples << ',' << row.probe << ',' << row.replicates << ','
            << csv::format_double(row.bias) << ',' << csv::format_double(row.std_error) << ','
            << csv::format_double(row.rms) << "\n";
    }
    out.close();

    nlohmann::json doc;
    doc["experiment"] = "bias-probe";
    doc["seed"] = report.seed;
    doc["bias_slope"] = finite_or_null(report.bias_slope);
    doc["rms_slope"] = finite_or_null(report.rms_slope);
    auto agg = nlohmann::json::array();
    for (const BiasProbeAggregate& row : report.aggregate) {
        agg.push_back({{"N", row.samples},
                       {"bias", row.bias},
                       {"std_error", row.std_error},
                       {"rms", row.rms}});
    }
    doc["aggregate"] = std::move(agg);
    dump_json(doc, json_path);
}

void write_gmm_report(const GmmReport& report, const std::string& csv_path,
                      const std::string& json_path) {
    std::ofstream out = open_out(csv_path);
    out << "n,N,replicate,lambda,scale,explained_variance\n";
    for (const GmmCellResult& cell : report.cells) {
        for (std::size_t r = 0; r < cell.scores.size(); ++r) {
            out << cell.n << ',' << cell.samples << ',' << (r + 1) << ','
                << csv::format_double(cell.lambda) << ',' << csv::format_double(cell.scale) << ','
                << csv::format_double(cell.scores[r]) << "\n";
        }
    }
    out.close();

    nlohmann::json doc;
    doc["experiment"] = "gmm";
    doc["seed"] = report.seed;
    auto cells = nlohmann::json::array();
    for (const GmmCellResult& cell : report.cells) {
        cells.push_back({{"n", cell.n},
                         {"N", cell.samples},
                         {"lambda", cell.lambda},
                         {"scale", cell.scale},
                         {"mean_explained_variance", finite_or_null(cell.mean_score)},
                         {"std_explained_variance", finite_or_null(cell.std_score)},
                         {"degenerate", cell.degenerate}});
    }
    doc["cells"] = std::move(cells);
    dump_json(doc, json_path);
}

void write_eco_report(const EcologicalReport& report, const std::string& csv_path,
                      const std::string& probe_csv_path, const std::string& json_path) {
    std::ofstream out = open_out(csv_path);
    out << "d,step,lambda,scale,explained_variance\n";
    for (const EcoStepResult& row : report.steps) {
        out << row.d << ',' << row.step << ',' << csv::format_double(row.lambda) << ','
            << csv::format_double(row.scale) << ',' << csv::format_double(row.score) << "\n";
    }
    out.close();

    std::ofstream probe_out = open_out(probe_csv_path);
    probe_out << "step,feature,median_pred_diff\n";
    for (const EcoProbeRow& row : report.probe) {
        probe_out << row.step << ',' << row.feature << ',' << csv::format_double(row.median_diff)
                  << "\n";
    }
    probe_out.close();

    nlohmann::json doc;
    doc["experiment"] = "ecological";
    doc["seed"] = report.seed;

    nlohmann::json medians = nlohmann::json::object();
    std::vector<int> d_seen;
    for (const EcoStepResult& row : report.steps) {
        if (std::find(d_seen.begin(), d_seen.end(), row.d) == d_seen.end()) d_seen.push_back(row.d);
    }
    for (const int d : d_seen) {
        std::vector<double> scores;
        for (const EcoStepResult& row : report.steps) {
            if (row.d == d) scores.push_back(row.score);
        }
        medians[std::to_string(d)] = median(std::move(scores));
    }
    doc["median_score_by_d"] = std::move(medians);

    if (!report.probe.empty()) {
        int num_features = 0;
        int num_steps = 0;
        for (const EcoProbeRow& row : report.probe) {
            num_features = std::max(num_features, row.feature);
            num_steps = std::max(num_steps, row.step + 1);
        }
        nlohmann::json by_feature = nlohmann::json::object();
        for (int k = 1; k <= num_features; ++k) {
            std::vector<double> vals;
            for (const EcoProbeRow& row : report.probe) {
                if (row.feature == k) vals.push_back(row.median_diff);
            }
            by_feature[std::to_string(k)] = median(std::move(vals));
        }
        doc["probe_median_by_feature"] = std::move(by_feature);

        int good_steps = 0;
        for (int step = 0; step < num_steps; ++step) {
            int argmax = 0, argmin = 0;
            double best = -std::numeric_limits<double>::infinity();
            double worst = std::numeric_limits<double>::infinity();
            for (const EcoProbeRow& row : report.probe) {
                if (row.step != step) continue;
                if (row.median_diff > best) {
                    best = row.median_diff;
                    argmax = row.feature;
                }
                if (row.median_diff < worst) {
                    worst = row.median_diff;
                    argmin = row.feature;
                }
            }
            if (argmax == 1 && argmin == 2) ++good_steps;
        }
        doc["probe_steps"] = num_steps;
        doc["probe_steps_with_feature1_max_feature2_min"] = good_steps;
    }
    dump_json(doc, json_path);
}

}  // namespace distreg
