#include "distreg/embedding.hpp"

#include "distreg/error.hpp"
#include "distreg/rng.hpp"
#include "distreg/sinkhorn.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace distreg {

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

struct Hasher {
    std::uint64_t state = kFnvOffset;

    void feed(std::uint64_t v) {
        for (int b = 0; b < 8; ++b) {
            state ^= (v >> (8 * b)) & 0xFF;
            state *= kFnvPrime;
        }
    }
    void feed(double v) { feed(std::bit_cast<std::uint64_t>(v)); }
    void feed(int v) { feed(static_cast<std::uint64_t>(static_cast<std::int64_t>(v))); }
    void feed(const Matrix& m) {
        feed(static_cast<std::uint64_t>(m.rows()));
        feed(static_cast<std::uint64_t>(m.cols()));
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            for (Eigen::Index j = 0; j < m.cols(); ++j) feed(m(i, j));
        }
    }
    void feed(const Vector& v) {
        feed(static_cast<std::uint64_t>(v.size()));
        for (Eigen::Index i = 0; i < v.size(); ++i) feed(v[i]);
    }
};

}  // namespace

void validate_config(const EmbeddingConfig& cfg) {
    std::visit(
        [](const auto& c) {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, MeanRffConfig>) {
                if (c.num_features < 1) throw ValidationError("mean_rff: num_features must be >= 1");
                if (!(c.bandwidth > 0.0)) throw ValidationError("mean_rff: bandwidth must be > 0");
            } else if constexpr (std::is_same_v<T, SlicedWassersteinConfig>) {
                if (c.num_directions < 1) {
                    throw ValidationError("sliced_wasserstein: num_directions must be >= 1");
                }
                if (c.num_quantiles < 1) {
                    throw ValidationError("sliced_wasserstein: num_quantiles must be >= 1");
                }
                if (!(c.trim >= 0.0 && c.trim < 0.5)) {
                    throw ValidationError("sliced_wasserstein: trim must lie in [0, 1/2)");
                }
            } else if constexpr (std::is_same_v<T, SinkhornEmbeddingConfig>) {
                if (c.reference_points.rows() < 1 || c.reference_points.cols() < 1) {
                    throw ValidationError("sinkhorn: reference must be non-empty");
                }
                if (c.reference_weights.size() != c.reference_points.rows()) {
                    throw ValidationError("sinkhorn: reference weights/points size mismatch");
                }
                if ((c.reference_weights.array() <= 0.0).any()) {
                    throw ValidationError("sinkhorn: reference weights must be strictly positive");
                }
                if (std::abs(c.reference_weights.sum() - 1.0) > 1e-9) {
                    throw ValidationError("sinkhorn: reference weights must sum to 1");
                }
                if (!(c.reg > 0.0)) throw ValidationError("sinkhorn: reg must be > 0");
                if (!(c.tol > 0.0)) throw ValidationError("sinkhorn: tol must be > 0");
                if (c.max_iter < 1) throw ValidationError("sinkhorn: max_iter must be >= 1");
            }
        },
        cfg);
}

std::uint64_t config_fingerprint(const EmbeddingConfig& cfg) {
    Hasher hash;
    std::visit(
        [&hash](const auto& c) {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, MeanLinearConfig>) {
                hash.feed(std::uint64_t{1});
            } else if constexpr (std::is_same_v<T, MeanRffConfig>) {
                hash.feed(std::uint64_t{2});
                hash.feed(c.num_features);
                hash.feed(c.bandwidth);
                hash.feed(c.seed);
            } else if constexpr (std::is_same_v<T, SlicedWassersteinConfig>) {
                hash.feed(std::uint64_t{3});
                hash.feed(c.num_directions);
                hash.feed(c.num_quantiles);
                hash.feed(c.trim);
                hash.feed(c.seed);
            } else {
                hash.feed(std::uint64_t{4});
                hash.feed(c.reference_points);
                hash.feed(c.reference_weights);
                hash.feed(c.reg);
                hash.feed(c.tol);
                hash.feed(c.max_iter);
            }
        },
        cfg);
    return hash.state;
}

std::uint64_t embedding_fingerprint(const EmbeddingConfig& cfg, Eigen::Index d) {
    return mix64(config_fingerprint(cfg) ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(d)));
}

void validate_embedding(const EmbeddingVector& v) {
    if (v.coords.size() < 1 || v.coords.size() != v.weights.size()) {
        throw ValidationError("embedding: coords/weights size mismatch");
    }
    if (!v.coords.allFinite()) throw ValidationError("embedding: non-finite coordinates");
    if ((v.weights.array() <= 0.0).any() || std::abs(v.weights.sum() - 1.0) > 1e-9) {
        throw ValidationError("embedding: weights must be positive and sum to 1");
    }
}

double empirical_quantile(std::span<const double> sorted_samples, double t) {
    const std::size_t n = sorted_samples.size();
    if (n == 0) throw ValidationError("empirical_quantile: empty sample");
    if (!(t > 0.0 && t < 1.0)) {
        throw ValidationError("empirical_quantile: t must lie in (0, 1)");
    }
    auto rank = static_cast<std::size_t>(std::ceil(static_cast<double>(n) * t));
    rank = std::clamp<std::size_t>(rank, 1, n);
    return sorted_samples[rank - 1];
}

namespace detail {

void rff_features(const MeanRffConfig& cfg, Eigen::Index d, Matrix* frequencies, Vector* phases) {
    Rng rng(cfg.seed);
    frequencies->resize(cfg.num_features, d);
    phases->resize(cfg.num_features);
    for (int k = 0; k < cfg.num_features; ++k) {
        for (Eigen::Index j = 0; j < d; ++j) (*frequencies)(k, j) = rng.normal() / cfg.bandwidth;
        (*phases)[k] = rng.uniform(0.0, 2.0 * M_PI);
    }
}

Matrix sw_directions(const SlicedWassersteinConfig& cfg, Eigen::Index d) {
    if (d == 1) return Matrix::Ones(1, 1);
    Rng rng(cfg.seed);
    Matrix dirs(cfg.num_directions, d);
    for (int k = 0; k < cfg.num_directions; ++k) {
        double norm_sq = 0.0;
        do {
            for (Eigen::Index j = 0; j < d; ++j) {
                dirs(k, j) = rng.normal();
            }
            norm_sq = dirs.row(k).squaredNorm();
        } while (norm_sq == 0.0);
        dirs.row(k) /= std::sqrt(norm_sq);
    }
    return dirs;
}

Vector sw_quantile_grid(const SlicedWassersteinConfig& cfg) {
    Vector grid(cfg.num_quantiles);
    const double width = 1.0 - 2.0 * cfg.trim;
    for (int l = 0; l < cfg.num_quantiles; ++l) {
        grid[l] = cfg.trim + (static_cast<double>(l) + 0.5) * width /
                                 static_cast<double>(cfg.num_quantiles);
    }
    return grid;
}

}  // namespace detail

namespace {

EmbeddingVector embed_mean_linear(const EmpiricalDistribution& dist) {
    const Eigen::Index d = dist.dim();
    EmbeddingVector out;
    out.coords = dist.points.colwise().mean().transpose();
    out.weights = Vector::Constant(d, 1.0 / static_cast<double>(d));
    return out;
}

EmbeddingVector embed_mean_rff(const MeanRffConfig& cfg, const EmpiricalDistribution& dist) {
    Matrix frequencies;
    Vector phases;
    detail::rff_features(cfg, dist.dim(), &frequencies, &phases);
    // coords_k = sqrt(2) * mean_j cos(omega_k . X_j + b_k)
    Matrix angles = dist.points * frequencies.transpose();
    angles.rowwise() += phases.transpose();
    EmbeddingVector out;
    out.coords = std::sqrt(2.0) * angles.array().cos().colwise().mean().transpose();
    out.weights = Vector::Constant(cfg.num_features, 1.0 / static_cast<double>(cfg.num_features));
    return out;
}

EmbeddingVector embed_sliced_wasserstein(const SlicedWassersteinConfig& cfg,
                                         const EmpiricalDistribution& dist) {
    const Matrix dirs = detail::sw_directions(cfg, dist.dim());
    const Vector grid = detail::sw_quantile_grid(cfg);
    const Eigen::Index num_dirs = dirs.rows();
    const Eigen::Index num_t = grid.size();

    EmbeddingVector out;
    out.coords.resize(num_dirs * num_t);
    std::vector<double> projected(static_cast<std::size_t>(dist.size()));
    for (Eigen::Index k = 0; k < num_dirs; ++k) {
        Eigen::Map<Vector>(projected.data(), dist.size()) = dist.points * dirs.row(k).transpose();
        std::sort(projected.begin(), projected.end());
        for (Eigen::Index l = 0; l < num_t; ++l) {
            out.coords[k * num_t + l] = empirical_quantile(projected, grid[l]);
        }
    }
    out.weights = Vector::Constant(num_dirs * num_t, 1.0 / static_cast<double>(num_dirs * num_t));
    return out;
}

EmbeddingVector embed_sinkhorn(const SinkhornEmbeddingConfig& cfg,
                               const EmpiricalDistribution& dist) {
    if (dist.dim() != cfg.reference_points.cols()) {
        throw ValidationError("sinkhorn embed: distribution dimension " +
                              std::to_string(dist.dim()) + " does not match reference dimension " +
                              std::to_string(cfg.reference_points.cols()));
    }
    const Eigen::Index n = dist.size();
    const Vector mu_weights = Vector::Constant(n, 1.0 / static_cast<double>(n));
    const DualSolution sol = solve_dual(dist.points, mu_weights, cfg.reference_points,
                                        cfg.reference_weights, cfg.reg, cfg.tol, cfg.max_iter);
    if (!sol.converged) {
        throw NumericalError("sinkhorn embed: no convergence for '" + dist.group_id + "' after " +
                             std::to_string(sol.iterations) + " iterations (residual " +
                             std::to_string(sol.residual) + ", tol " + std::to_string(cfg.tol) +
                             ")");
    }
    EmbeddingVector out;
    out.coords = sol.g;
    out.weights = cfg.reference_weights;
    return out;
}

}  // namespace

EmbeddingVector embed(const EmbeddingConfig& cfg, const EmpiricalDistribution& dist) {
    validate_config(cfg);
    validate_distribution(dist);
    EmbeddingVector out = std::visit(
        [&dist](const auto& c) {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, MeanLinearConfig>) {
                return embed_mean_linear(dist);
            } else if constexpr (std::is_same_v<T, MeanRffConfig>) {
                return embed_mean_rff(c, dist);
            } else if constexpr (std::is_same_v<T, SlicedWassersteinConfig>) {
                return embed_sliced_wasserstein(c, dist);
            } else {
                return embed_sinkhorn(c, dist);
            }
        },
        cfg);
    out.fingerprint = embedding_fingerprint(cfg, dist.dim());
    validate_embedding(out);
    return out;
}

double embedding_distance(const EmbeddingVector& u, const EmbeddingVector& v) {
    if (u.fingerprint != v.fingerprint) {
        throw ValidationError("embedding_distance: fingerprint mismatch");
    }
    if (u.size() != v.size()) {
        throw ValidationError("embedding_distance: length mismatch");
    }
    const double sq = (u.weights.array() * (u.coords - v.coords).array().square()).sum();
    return std::sqrt(std::max(sq, 0.0));
}

}  // namespace distreg
