#include "distreg/kernel_ridge.hpp"

#include "distreg/error.hpp"
#include "distreg/rng.hpp"

#include <Eigen/Cholesky>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace distreg {

namespace {

void check_fingerprints(std::span<const EmbeddingVector> embeddings) {
    for (std::size_t i = 1; i < embeddings.size(); ++i) {
        if (embeddings[i].fingerprint != embeddings[0].fingerprint) {
            throw ValidationError("embeddings carry mismatched fingerprints");
        }
    }
}

void check_kernel(const KernelConfig& cfg) {
    if (!(cfg.length_scale > 0.0) || !std::isfinite(cfg.length_scale)) {
        throw ValidationError("kernel: length_scale must be finite and > 0");
    }
}

}  // namespace

double kernel_value(const KernelConfig& cfg, const EmbeddingVector& u, const EmbeddingVector& v) {
    check_kernel(cfg);
    const double dist = embedding_distance(u, v);
    return std::exp(-dist * dist / (cfg.length_scale * cfg.length_scale));
}

namespace detail {

Matrix squared_distance_matrix(std::span<const EmbeddingVector> embeddings) {
    check_fingerprints(embeddings);
    const auto n = static_cast<Eigen::Index>(embeddings.size());
    Matrix dist_sq(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        dist_sq(i, i) = 0.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double d = embedding_distance(embeddings[static_cast<std::size_t>(i)],
                                                embeddings[static_cast<std::size_t>(j)]);
            dist_sq(i, j) = d * d;
            dist_sq(j, i) = dist_sq(i, j);
        }
    }
    return dist_sq;
}

Vector solve_ridge_system(const Matrix& gram, const Vector& labels, double lambda) {
    const auto n = gram.rows();
    const Matrix system =
        gram + static_cast<double>(n) * lambda * Matrix::Identity(n, n);
    double jitter = 1e-12;
    Eigen::LLT<Matrix> llt(system);
    while (llt.info() != Eigen::Success && jitter <= 1e-6) {
        llt.compute(system + jitter * Matrix::Identity(n, n));
        jitter *= 10.0;
    }
    if (llt.info() != Eigen::Success) {
        throw NumericalError("ridge factorization failed after jitter escalation");
    }
    Vector alpha = llt.solve(labels);
    const double residual = (system * alpha - labels).cwiseAbs().maxCoeff();
    if (residual > 1e-8 * (1.0 + labels.cwiseAbs().maxCoeff())) {
        throw NumericalError("ridge solve residual too large: " + std::to_string(residual));
    }
    return alpha;
}

}  // namespace detail

Matrix gram_matrix(const KernelConfig& cfg, std::span<const EmbeddingVector> embeddings) {
    check_kernel(cfg);
    check_fingerprints(embeddings);
    const auto n = static_cast<Eigen::Index>(embeddings.size());
    const double inv_sq = 1.0 / (cfg.length_scale * cfg.length_scale);
    Matrix gram(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        gram(i, i) = 1.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double d = embedding_distance(embeddings[static_cast<std::size_t>(i)],
                                                embeddings[static_cast<std::size_t>(j)]);
            gram(i, j) = std::exp(-d * d * inv_sq);
            gram(j, i) = gram(i, j);
        }
    }
    return gram;
}

RidgeModel fit(std::span<const EmbeddingVector> embeddings, const Vector& labels, double lambda,
               const KernelConfig& kernel) {
    if (embeddings.empty()) throw ValidationError("fit: need at least one training point");
    if (static_cast<Eigen::Index>(embeddings.size()) != labels.size()) {
        throw ValidationError("fit: embeddings/labels size mismatch");
    }
    if (!(lambda > 0.0)) throw ValidationError("fit: lambda must be > 0");
    check_kernel(kernel);

    RidgeModel model;
    model.train.assign(embeddings.begin(), embeddings.end());
    model.kernel = kernel;
    model.lambda = lambda;
    model.fingerprint = embeddings[0].fingerprint;
    model.alpha = detail::solve_ridge_system(gram_matrix(kernel, embeddings), labels, lambda);
    return model;
}

double predict(const RidgeModel& model, const EmbeddingVector& query) {
    if (query.fingerprint != model.fingerprint) {
        throw ValidationError("predict: query fingerprint does not match model");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < model.train.size(); ++i) {
        acc += model.alpha[static_cast<Eigen::Index>(i)] *
               kernel_value(model.kernel, query, model.train[i]);
    }
    return acc;
}

Vector predict_many(const RidgeModel& model, std::span<const EmbeddingVector> queries) {
    Vector out(static_cast<Eigen::Index>(queries.size()));
    for (std::size_t i = 0; i < queries.size(); ++i) {
        out[static_cast<Eigen::Index>(i)] = predict(model, queries[i]);
    }
    return out;
}

double rkhs_distance(const RidgeModel& a, const RidgeModel& b) {
    if (a.fingerprint != b.fingerprint) {
        throw ValidationError("rkhs_distance: fingerprint mismatch");
    }
    if (a.kernel.length_scale != b.kernel.length_scale) {
        throw ValidationError("rkhs_distance: kernel mismatch");
    }
    const double inv_sq = 1.0 / (a.kernel.length_scale * a.kernel.length_scale);
    const auto na = static_cast<Eigen::Index>(a.train.size());
    const auto nb = static_cast<Eigen::Index>(b.train.size());
    Matrix cross(na, nb);
    for (Eigen::Index i = 0; i < na; ++i) {
        for (Eigen::Index j = 0; j < nb; ++j) {
            const double d = embedding_distance(a.train[static_cast<std::size_t>(i)],
                                                b.train[static_cast<std::size_t>(j)]);
            cross(i, j) = std::exp(-d * d * inv_sq);
        }
    }
    const double sq = a.alpha.dot(gram_matrix(a.kernel, a.train) * a.alpha) -
                      2.0 * a.alpha.dot(cross * b.alpha) +
                      b.alpha.dot(gram_matrix(b.kernel, b.train) * b.alpha);
    return std::sqrt(std::max(sq, 0.0));
}

CvResult cross_validate(std::span<const EmbeddingVector> embeddings, const Vector& labels,
                        std::span<const double> lambda_grid, std::span<const double> scale_grid,
                        const CvOptions& options) {
    if (lambda_grid.empty() || scale_grid.empty()) {
        throw ValidationError("cross_validate: grids must be non-empty");
    }
    if (options.num_splits < 1) throw ValidationError("cross_validate: num_splits must be >= 1");
    if (!(options.holdout > 0.0 && options.holdout < 1.0)) {
        throw ValidationError("cross_validate: holdout must lie in (0, 1)");
    }
    const auto n = static_cast<Eigen::Index>(embeddings.size());
    const auto n_test = static_cast<Eigen::Index>(
        std::max<double>(1.0, std::floor(options.holdout * static_cast<double>(n))));
    if (n - n_test < 1) {
        throw ValidationError("cross_validate: not enough items for a train/test split");
    }

    const Matrix dist_sq = detail::squared_distance_matrix(embeddings);

    // Accumulated squared error per grid pair, reduced over splits in order.
    std::vector<double> sse(lambda_grid.size() * scale_grid.size(), 0.0);
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
    for (int split = 0; split < options.num_splits; ++split) {
        std::iota(perm.begin(), perm.end(), 0);
        Rng rng(derive_seed(options.seed, static_cast<std::uint64_t>(split)));
        for (std::size_t i = perm.size(); i > 1; --i) {
            std::swap(perm[i - 1],
                      perm[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1))]);
        }
        const std::vector<Eigen::Index> test_idx(perm.begin(), perm.begin() + n_test);
        const std::vector<Eigen::Index> train_idx(perm.begin() + n_test, perm.end());

        const auto n_train = static_cast<Eigen::Index>(train_idx.size());
        Matrix train_dist(n_train, n_train);
        Matrix cross_dist(n_test, n_train);
        Vector y_train(n_train), y_test(n_test);
        for (Eigen::Index i = 0; i < n_train; ++i) {
            y_train[i] = labels[train_idx[static_cast<std::size_t>(i)]];
            for (Eigen::Index j = 0; j < n_train; ++j) {
                train_dist(i, j) = dist_sq(train_idx[static_cast<std::size_t>(i)],
                                           train_idx[static_cast<std::size_t>(j)]);
            }
        }
        for (Eigen::Index i = 0; i < n_test; ++i) {
            y_test[i] = labels[test_idx[static_cast<std::size_t>(i)]];
            for (Eigen::Index j = 0; j < n_train; ++j) {
                cross_dist(i, j) = dist_sq(test_idx[static_cast<std::size_t>(i)],
                                           train_idx[static_cast<std::size_t>(j)]);
            }
        }

        std::size_t cell = 0;
        for (const double lambda : lambda_grid) {
            for (const double scale : scale_grid) {
                const double inv_sq = 1.0 / (scale * scale);
                const Matrix gram = (-train_dist * inv_sq).array().exp();
                const Vector alpha = detail::solve_ridge_system(gram, y_train, lambda);
                const Vector pred = (-cross_dist * inv_sq).array().exp().matrix() * alpha;
                sse[cell] += (pred - y_test).squaredNorm();
                ++cell;
            }
        }
    }

    CvResult result;
    result.table.reserve(sse.size());
    const double denom = static_cast<double>(options.num_splits) * static_cast<double>(n_test);
    std::size_t cell = 0;
    std::size_t best = 0;
    for (const double lambda : lambda_grid) {
        for (const double scale : scale_grid) {
            result.table.push_back({lambda, scale, sse[cell] / denom});
            ++cell;
        }
    }
    for (std::size_t i = 1; i < result.table.size(); ++i) {
        const CvEntry& cur = result.table[i];
        const CvEntry& inc = result.table[best];
        const bool better =
            cur.mse < inc.mse ||
            (cur.mse == inc.mse &&
             (cur.lambda > inc.lambda || (cur.lambda == inc.lambda && cur.scale > inc.scale)));
        if (better) best = i;
    }
    result.best_lambda = result.table[best].lambda;
    result.best_scale = result.table[best].scale;
    return result;
}

void save_model_json(const std::string& path, const RidgeModel& model) {
    nlohmann::json doc;
    doc["kernel"] = {{"length_scale", model.kernel.length_scale}};
    doc["lambda"] = model.lambda;
    char fp[24];
    std::snprintf(fp, sizeof(fp), "%016llx", static_cast<unsigned long long>(model.fingerprint));
    doc["fingerprint"] = fp;
    auto coords = nlohmann::json::array();
    for (const auto& e : model.train) {
        coords.push_back(std::vector<double>(e.coords.data(), e.coords.data() + e.coords.size()));
    }
    doc["embeddings"] = std::move(coords);
    const Vector& w = model.train.front().weights;
    doc["weights"] = std::vector<double>(w.data(), w.data() + w.size());
    doc["alpha"] = std::vector<double>(model.alpha.data(), model.alpha.data() + model.alpha.size());

    std::ofstream out(path);
    if (!out) throw IoError("cannot write model file: " + path);
    out << doc.dump(2) << "\n";
}

RidgeModel load_model_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open model file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed model file " + path + ": " + e.what());
    }
    try {
        RidgeModel model;
        model.kernel.length_scale = doc.at("kernel").at("length_scale").get<double>();
        model.lambda = doc.at("lambda").get<double>();
        model.fingerprint =
            std::stoull(doc.at("fingerprint").get<std::string>(), nullptr, 16);
        const auto weights = doc.at("weights").get<std::vector<double>>();
        const Vector w = Eigen::Map<const Vector>(weights.data(),
                                                  static_cast<Eigen::Index>(weights.size()));
        for (const auto& row : doc.at("embeddings")) {
            const auto coords = row.get<std::vector<double>>();
            EmbeddingVector e;
            e.coords = Eigen::Map<const Vector>(coords.data(),
                                                static_cast<Eigen::Index>(coords.size()));
            e.weights = w;
            e.fingerprint = model.fingerprint;
            model.train.push_back(std::move(e));
        }
        const auto alpha = doc.at("alpha").get<std::vector<double>>();
        model.alpha =
            Eigen::Map<const Vector>(alpha.data(), static_cast<Eigen::Index>(alpha.size()));
        if (model.train.empty() ||
            model.alpha.size() != static_cast<Eigen::Index>(model.train.size())) {
            throw IoError("model file " + path + ": inconsistent sizes");
        }
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("model file " + path + " is missing fields: " + e.what());
    }
}

}  // namespace distreg
