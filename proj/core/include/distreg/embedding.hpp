#pragma once

#include "distreg/types.hpp"

#include <cstdint>
#include <span>
#include <variant>

namespace distreg {

/// Linear mean embedding: the d column means, uniform weights 1/d.
struct MeanLinearConfig {};

/// Random-Fourier-feature mean embedding of the squared-exponential base
/// kernel exp(-||a-b||^2 / (2 sigma^2)); frequencies ~ N(0, I/sigma^2) and
/// phases ~ U([0, 2pi]) are drawn from `seed`.
struct MeanRffConfig {
    int num_features = 1;
    double bandwidth = 1.0;  ///< sigma
    std::uint64_t seed = 0;
};

/// Sliced-Wasserstein embedding: empirical quantiles of projections onto
/// random unit directions, on the midpoint grid
///   t_l = trim + (l - 1/2) (1 - 2 trim) / num_quantiles.
/// For d = 1 the single direction theta = 1 is used regardless of
/// num_directions.
struct SlicedWassersteinConfig {
    int num_directions = 1;  ///< m_theta
    int num_quantiles = 1;   ///< m_t
    double trim = 0.0;       ///< epsilon in [0, 1/2)
    std::uint64_t seed = 0;
};

/// Centered entropic-OT dual potential against a fixed discrete reference.
struct SinkhornEmbeddingConfig {
    Matrix reference_points;   ///< m x d
    Vector reference_weights;  ///< strictly positive, sums to 1
    double reg = 1e-1;
    double tol = 1e-6;
    int max_iter = 2000;
};

using EmbeddingConfig =
    std::variant<MeanLinearConfig, MeanRffConfig, SlicedWassersteinConfig, SinkhornEmbeddingConfig>;

void validate_config(const EmbeddingConfig& cfg);

/// Hash of the configuration contents (reference atoms included).
std::uint64_t config_fingerprint(const EmbeddingConfig& cfg);

/// Fingerprint of embeddings produced for ambient dimension d. The
/// dimension is folded in because the discretized Hilbert space depends on
/// it; vectors are comparable only when these match.
std::uint64_t embedding_fingerprint(const EmbeddingConfig& cfg, Eigen::Index d);

/// Finite-dimensional embedding point. The weights are quadrature weights
/// defining the inner product <u, v> = sum_k w_k u_k v_k; they are positive
/// and sum to 1.
struct EmbeddingVector {
    Vector coords;
    Vector weights;
    std::uint64_t fingerprint = 0;

    Eigen::Index size() const { return coords.size(); }
};

void validate_embedding(const EmbeddingVector& v);

/// Embeds one empirical distribution. Pure function of (cfg, dist).
EmbeddingVector embed(const EmbeddingConfig& cfg, const EmpiricalDistribution& dist);

/// Left-continuous empirical inverse c.d.f.: inf{x : G(x) >= t}, which for a
/// sorted sample is element ceil(N t) (1-based). t must lie in (0, 1).
double empirical_quantile(std::span<const double> sorted_samples, double t);

/// Weighted Euclidean distance sqrt(sum_k w_k (u_k - v_k)^2).
/// Throws on fingerprint mismatch.
double embedding_distance(const EmbeddingVector& u, const EmbeddingVector& v);

namespace detail {

/// Frequency matrix (num_features x d) and phase vector used by MeanRFF;
/// shared by the analytic ground-truth embeddings.
void rff_features(const MeanRffConfig& cfg, Eigen::Index d, Matrix* frequencies, Vector* phases);

/// Unit directions (num_directions x d); a single row of ones for d = 1.
Matrix sw_directions(const SlicedWassersteinConfig& cfg, Eigen::Index d);

/// Midpoint quantile grid of length num_quantiles.
Vector sw_quantile_grid(const SlicedWassersteinConfig& cfg);

}  // namespace detail

}  // namespace distreg
