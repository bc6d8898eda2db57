#include "distreg/truth.hpp"

#include "distreg/error.hpp"

#include <boost/math/distributions/normal.hpp>

#include <cmath>

namespace distreg {

namespace {

double true_quantile(const TrueDistribution& truth, double t) {
    if (const auto* u = std::get_if<Uniform1D>(&truth)) {
        return u->lo + (u->hi - u->lo) * t;
    }
    const auto& gauss = std::get<Gaussian1D>(truth);
    static const boost::math::normal_distribution<double> unit;
    return gauss.mean + gauss.sd * boost::math::quantile(unit, t);
}

double true_mean(const TrueDistribution& truth) {
    if (const auto* u = std::get_if<Uniform1D>(&truth)) return 0.5 * (u->lo + u->hi);
    return std::get<Gaussian1D>(truth).mean;
}

/// E[cos(w X + b)]: integrates the cosine against the law.
double cosine_moment(const TrueDistribution& truth, double w, double b) {
    if (const auto* u = std::get_if<Uniform1D>(&truth)) {
        const double width = u->hi - u->lo;
        if (std::abs(w) * width < 1e-12) return std::cos(b);
        return (std::sin(w * u->hi + b) - std::sin(w * u->lo + b)) / (w * width);
    }
    const auto& gauss = std::get<Gaussian1D>(truth);
    return std::cos(w * gauss.mean + b) * std::exp(-0.5 * w * w * gauss.sd * gauss.sd);
}

}  // namespace

EmpiricalDistribution sample_true(const TrueDistribution& truth, Rng& rng, int count,
                                  const std::string& group_id) {
    EmpiricalDistribution dist;
    dist.group_id = group_id;
    dist.points.resize(count, 1);
    if (const auto* u = std::get_if<Uniform1D>(&truth)) {
        for (int i = 0; i < count; ++i) dist.points(i, 0) = rng.uniform(u->lo, u->hi);
    } else {
        const auto& gauss = std::get<Gaussian1D>(truth);
        for (int i = 0; i < count; ++i) dist.points(i, 0) = gauss.mean + gauss.sd * rng.normal();
    }
    return dist;
}

std::optional<EmbeddingVector> true_embedding(const EmbeddingConfig& cfg,
                                              const TrueDistribution& truth) {
    validate_config(cfg);
    EmbeddingVector out;
    if (std::holds_alternative<MeanLinearConfig>(cfg)) {
        out.coords = Vector::Constant(1, true_mean(truth));
        out.weights = Vector::Constant(1, 1.0);
    } else if (const auto* rff = std::get_if<MeanRffConfig>(&cfg)) {
        Matrix frequencies;
        Vector phases;
        detail::rff_features(*rff, 1, &frequencies, &phases);
        out.coords.resize(rff->num_features);
        for (int k = 0; k < rff->num_features; ++k) {
            out.coords[k] = std::sqrt(2.0) * cosine_moment(truth, frequencies(k, 0), phases[k]);
        }
        out.weights = Vector::Constant(rff->num_features, 1.0 / rff->num_features);
    } else if (const auto* sw = std::get_if<SlicedWassersteinConfig>(&cfg)) {
        const Vector grid = detail::sw_quantile_grid(*sw);
        out.coords.resize(grid.size());
        for (Eigen::Index l = 0; l < grid.size(); ++l) {
            out.coords[l] = true_quantile(truth, grid[l]);
        }
        out.weights = Vector::Constant(grid.size(), 1.0 / static_cast<double>(grid.size()));
    } else {
        return std::nullopt;  // Sinkhorn has no closed form here
    }
    out.fingerprint = embedding_fingerprint(cfg, 1);
    return out;
}

EmbeddingVector true_embedding_or_sampled(const EmbeddingConfig& cfg,
                                          const TrueDistribution& truth, int fallback_size,
                                          std::uint64_t seed) {
    if (auto analytic = true_embedding(cfg, truth)) return *std::move(analytic);
    Rng rng(seed);
    return embed(cfg, sample_true(truth, rng, fallback_size, "truth"));
}

}  // namespace distreg
