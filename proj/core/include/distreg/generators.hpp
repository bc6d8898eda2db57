#pragma once

#include "distreg/rng.hpp"
#include "distreg/types.hpp"

#include <cstdint>

namespace distreg {

/// Gaussian-mixture mode-count task: each item is a mixture with a uniform
/// number of modes p in {1,...,C} and label y = p.
struct GmmTaskConfig {
    Eigen::Index d = 2;     ///< ambient dimension
    int max_modes = 2;      ///< C
    int n = 1;              ///< number of mixtures
    int samples_per_item = 1;  ///< N
    std::uint64_t seed = 0;
};

/// Synthetic ecological task: grouped individuals with a logistic vote law
/// on the first two coordinates; label = group vote fraction.
struct EcologicalTaskConfig {
    Eigen::Index d = 5;
    int n = 1;
    int samples_per_group = 1;  ///< N
    std::uint64_t seed = 0;
};

void validate_config(const GmmTaskConfig& cfg);
void validate_config(const EcologicalTaskConfig& cfg);

/// Draws one mixture-component covariance a*A*A^T + diag(B) with
/// a ~ U([1,4]), A entries i.i.d. U([-1,1]), B entries i.i.d. U([0,1]).
Matrix sample_gmm_covariance(Rng& rng, Eigen::Index d);

/// Deterministic in cfg.seed; items use counter-derived child seeds, so the
/// result is independent of generation order.
RegressionDataset sample_gmm_task(const GmmTaskConfig& cfg);

RegressionDataset sample_ecological_task(const EcologicalTaskConfig& cfg);

/// count points uniform in the radius-ball of R^d (polar method). Used to
/// synthesize Sinkhorn reference measures.
Matrix sample_uniform_ball(std::uint64_t seed, int count, Eigen::Index d, double radius);

}  // namespace distreg
