#include "distreg/generators.hpp"

#include "distreg/error.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <cstdio>

namespace distreg {

void validate_config(const GmmTaskConfig& cfg) {
    if (cfg.d < 1) throw ValidationError("gmm task: d must be >= 1");
    if (cfg.max_modes < 1) throw ValidationError("gmm task: max_modes must be >= 1");
    if (cfg.n < 1) throw ValidationError("gmm task: n must be >= 1");
    if (cfg.samples_per_item < 1) throw ValidationError("gmm task: samples_per_item must be >= 1");
}

void validate_config(const EcologicalTaskConfig& cfg) {
    if (cfg.d < 2) throw ValidationError("ecological task: d must be >= 2");
    if (cfg.n < 1) throw ValidationError("ecological task: n must be >= 1");
    if (cfg.samples_per_group < 1) {
        throw ValidationError("ecological task: samples_per_group must be >= 1");
    }
}

namespace {

std::string indexed_id(const char* prefix, int i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s%06d", prefix, i);
    return buf;
}

// Cholesky factor with a single 1e-10 jitter retry; B's diagonal can be
// arbitrarily close to zero.
Matrix cholesky_factor(const Matrix& sigma) {
    Eigen::LLT<Matrix> llt(sigma);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    const Matrix jittered =
        sigma + 1e-10 * Matrix::Identity(sigma.rows(), sigma.cols());
    Eigen::LLT<Matrix> retry(jittered);
    if (retry.info() != Eigen::Success) {
        throw NumericalError("gmm covariance factorization failed even with jitter");
    }
    return retry.matrixL();
}

}  // namespace

Matrix sample_gmm_covariance(Rng& rng, Eigen::Index d) {
    const double a = rng.uniform(1.0, 4.0);
    Matrix factor(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) factor(i, j) = rng.uniform(-1.0, 1.0);
    }
    Matrix sigma = a * factor * factor.transpose();
    for (Eigen::Index i = 0; i < d; ++i) sigma(i, i) += rng.uniform(0.0, 1.0);
    return sigma;
}

RegressionDataset sample_gmm_task(const GmmTaskConfig& cfg) {
    validate_config(cfg);
    RegressionDataset dataset;
    dataset.dim = cfg.d;
    dataset.items.resize(static_cast<std::size_t>(cfg.n));
    for (int i = 0; i < cfg.n; ++i) {
        Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(i)));
        const int modes = static_cast<int>(rng.uniform_int(1, cfg.max_modes));

        std::vector<Vector> means(static_cast<std::size_t>(modes));
        std::vector<Matrix> factors(static_cast<std::size_t>(modes));
        for (int b = 0; b < modes; ++b) {
            Vector mean(cfg.d);
            for (Eigen::Index j = 0; j < cfg.d; ++j) mean[j] = rng.uniform(-5.0, 5.0);
            means[static_cast<std::size_t>(b)] = mean;
            factors[static_cast<std::size_t>(b)] = cholesky_factor(sample_gmm_covariance(rng, cfg.d));
        }

        DatasetItem& item = dataset.items[static_cast<std::size_t>(i)];
        item.dist.group_id = indexed_id("g", i);
        item.dist.points.resize(cfg.samples_per_item, cfg.d);
        Vector z(cfg.d);
        for (int s = 0; s < cfg.samples_per_item; ++s) {
            const auto b = static_cast<std::size_t>(rng.uniform_int(1, modes) - 1);
            for (Eigen::Index j = 0; j < cfg.d; ++j) z[j] = rng.normal();
            item.dist.points.row(s) = (means[b] + factors[b] * z).transpose();
        }
        item.label = static_cast<double>(modes);
    }
    return dataset;
}

RegressionDataset sample_ecological_task(const EcologicalTaskConfig& cfg) {
    validate_config(cfg);
    RegressionDataset dataset;
    dataset.dim = cfg.d;
    dataset.items.resize(static_cast<std::size_t>(cfg.n));
    const int N = cfg.samples_per_group;
    for (int i = 0; i < cfg.n; ++i) {
        Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(i)));
        const double alpha = rng.uniform(0.05, 0.1);
        const double beta1 = rng.uniform(-0.7, 0.7);
        const double beta2 = rng.uniform(-0.7, 0.7);

        DatasetItem& item = dataset.items[static_cast<std::size_t>(i)];
        item.dist.group_id = indexed_id("e", i);
        item.dist.points.resize(N, cfg.d);
        int votes = 0;
        for (int s = 0; s < N; ++s) {
            const double shift = rng.uniform(-alpha, alpha);
            for (Eigen::Index j = 0; j < cfg.d; ++j) {
                // B ~ N(mean, I/4), mean = (beta1, beta2, 0, ..., 0)
                double mean = 0.0;
                if (j == 0) mean = beta1;
                if (j == 1) mean = beta2;
                item.dist.points(s, j) = shift + mean + 0.5 * rng.normal();
            }
            const double logit = 10.0 * (item.dist.points(s, 0) - item.dist.points(s, 1));
            const double p = 1.0 / (1.0 + std::exp(-logit));
            if (rng.uniform01() < p) ++votes;
        }
        item.label = static_cast<double>(votes) / static_cast<double>(N);
    }
    return dataset;
}

Matrix sample_uniform_ball(std::uint64_t seed, int count, Eigen::Index d, double radius) {
    if (count < 1 || d < 1 || !(radius > 0.0)) {
        throw ValidationError("sample_uniform_ball: count, d and radius must be positive");
    }
    Rng rng(seed);
    Matrix points(count, d);
    Vector z(d);
    for (int i = 0; i < count; ++i) {
        double norm = 0.0;
        do {
            for (Eigen::Index j = 0; j < d; ++j) z[j] = rng.normal();
            norm = z.norm();
        } while (norm == 0.0);
        const double r = radius * std::pow(rng.uniform01(), 1.0 / static_cast<double>(d));
        points.row(i) = (r / norm) * z.transpose();
    }
    return points;
}

}  // namespace distreg
