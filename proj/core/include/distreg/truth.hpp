#pragma once

#include "distreg/embedding.hpp"
#include "distreg/rng.hpp"
#include "distreg/types.hpp"

#include <optional>
#include <variant>

namespace distreg {

/// One-dimensional reference laws with closed-form embeddings. These stand
/// in for the unobserved true distribution in the rate and bias studies.
struct Uniform1D {
    double lo = 0.0;
    double hi = 1.0;
};

struct Gaussian1D {
    double mean = 0.0;
    double sd = 1.0;
};

using TrueDistribution = std::variant<Uniform1D, Gaussian1D>;

EmpiricalDistribution sample_true(const TrueDistribution& truth, Rng& rng, int count,
                                  const std::string& group_id);

/// Analytic embedding of the true law under cfg, when a closed form exists
/// (mean-linear always; RFF via the characteristic function; sliced
/// Wasserstein via exact quantiles). Empty when no closed form is known.
std::optional<EmbeddingVector> true_embedding(const EmbeddingConfig& cfg,
                                              const TrueDistribution& truth);

/// Analytic embedding if available, otherwise the embedding of a large
/// sample of size fallback_size drawn from `seed`.
EmbeddingVector true_embedding_or_sampled(const EmbeddingConfig& cfg,
                                          const TrueDistribution& truth, int fallback_size,
                                          std::uint64_t seed);

}  // namespace distreg
