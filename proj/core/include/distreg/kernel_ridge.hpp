#pragma once

#include "distreg/embedding.hpp"
#include "distreg/types.hpp"

#include <span>
#include <string>
#include <vector>

namespace distreg {

/// Squared-exponential kernel K(u, v) = exp(-||u - v||^2 / length_scale^2)
/// on embedding space; length_scale = 1 recovers the base kernel.
struct KernelConfig {
    double length_scale = 1.0;
};

double kernel_value(const KernelConfig& cfg, const EmbeddingVector& u, const EmbeddingVector& v);

/// Exactly symmetric Gram matrix with unit diagonal (upper triangle
/// computed, then mirrored).
Matrix gram_matrix(const KernelConfig& cfg, std::span<const EmbeddingVector> embeddings);

/// Kernel ridge regressor: alpha = (G + n lambda I)^{-1} Y.
struct RidgeModel {
    std::vector<EmbeddingVector> train;
    KernelConfig kernel;
    double lambda = 0.0;
    Vector alpha;
    std::uint64_t fingerprint = 0;
};

/// Solves the ridge system by Cholesky with diagonal jitter escalation
/// (1e-12, x10 up to 1e-6) should the factorization fail.
RidgeModel fit(std::span<const EmbeddingVector> embeddings, const Vector& labels, double lambda,
               const KernelConfig& kernel);

double predict(const RidgeModel& model, const EmbeddingVector& query);
Vector predict_many(const RidgeModel& model, std::span<const EmbeddingVector> queries);

/// RKHS distance between two fitted regressors over the same kernel,
/// sqrt(a' Gaa a - 2 a' Gab b + b' Gbb b), clamped at zero.
double rkhs_distance(const RidgeModel& a, const RidgeModel& b);

struct CvOptions {
    int num_splits = 10;     ///< random holdout splits
    double holdout = 0.2;    ///< test fraction per split
    std::uint64_t seed = 0;  ///< split RNG, independent of data RNG
};

struct CvEntry {
    double lambda = 0.0;
    double scale = 0.0;
    double mse = 0.0;
};

struct CvResult {
    double best_lambda = 0.0;
    double best_scale = 0.0;
    std::vector<CvEntry> table;
};

/// Mean squared error over seeded random splits for every (lambda, scale)
/// pair; ties break toward larger lambda, then larger scale.
CvResult cross_validate(std::span<const EmbeddingVector> embeddings, const Vector& labels,
                        std::span<const double> lambda_grid, std::span<const double> scale_grid,
                        const CvOptions& options);

void save_model_json(const std::string& path, const RidgeModel& model);
RidgeModel load_model_json(const std::string& path);

namespace detail {

/// Pairwise squared embedding distances (weighted); Gram matrices for any
/// scale follow as exp(-D / scale^2).
Matrix squared_distance_matrix(std::span<const EmbeddingVector> embeddings);

Vector solve_ridge_system(const Matrix& gram, const Vector& labels, double lambda);

}  // namespace detail

}  // namespace distreg
