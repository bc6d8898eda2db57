#pragma once

#include "distreg/embedding.hpp"
#include "distreg/error.hpp"
#include "distreg/kernel_ridge.hpp"
#include "distreg/truth.hpp"
#include "distreg/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace distreg {

/// 1 - Var(y_pred - y_true) / Var(y_true), population variances over the
/// evaluation set. Throws ZeroVarianceError when Var(y_true) = 0.
class ZeroVarianceError : public ValidationError {
public:
    explicit ZeroVarianceError(const std::string& what) : ValidationError(what) {}
};

double explained_variance(const Vector& y_true, const Vector& y_pred);

/// Ordinary least squares slope of ys against xs.
double ols_slope(const std::vector<double>& xs, const std::vector<double>& ys);

double median(std::vector<double> values);

/// Ridge parameter as a function of n: value * n^exponent (exponent 0 gives
/// a fixed lambda).
struct LambdaRule {
    double value = 0.1;
    double exponent = 0.0;

    double at(int n) const;
};

/// Random 1-D Gaussian covariates for the two-stage error study; the label
/// is the mean clipped to [clip_lo, clip_hi], so labels stay bounded.
struct GaussianFamilyConfig {
    double mean_lo = -2.0;
    double mean_hi = 2.0;
    double sd_lo = 0.5;
    double sd_hi = 1.5;
    double clip_lo = -1.0;
    double clip_hi = 1.0;
};

// ---------------------------------------------------------------------------
// Two-stage error decay
// ---------------------------------------------------------------------------

struct RateConfig {
    EmbeddingConfig embedding = MeanLinearConfig{};
    double length_scale = 1.0;
    GaussianFamilyConfig family;
    std::vector<int> n_grid;
    std::vector<int> sample_grid;  ///< N values
    LambdaRule lambda;
    int replicates = 50;
    std::uint64_t seed = 0;
    int truth_fallback_size = 1 << 20;  ///< sample size when no analytic embedding exists
};

struct RateCell {
    int n = 0;
    int samples = 0;  ///< N
    double lambda = 0.0;
    double mean_distance = 0.0;
    double std_distance = 0.0;
};

struct RateReport {
    std::vector<RateCell> grid;
    /// log-log slope of the mean distance against N at the first n of the
    /// grid; NaN when fewer than two N values exist.
    double slope_samples = 0.0;
    /// slope against n*N over diagonal cells; NaN unless the two grids have
    /// equal length >= 2.
    double slope_joint = 0.0;
    int replicates = 0;
    std::uint64_t seed = 0;
};

RateReport run_rate_experiment(const RateConfig& cfg, unsigned threads);

// ---------------------------------------------------------------------------
// Near-unbiasedness probe
// ---------------------------------------------------------------------------

struct BiasProbeConfig {
    EmbeddingConfig embedding = MeanLinearConfig{};
    TrueDistribution truth = Uniform1D{};
    std::vector<int> sample_grid;               ///< N values
    std::vector<int> replicates = {2000};       ///< one value, or one per N
    int num_probes = 3;
    std::uint64_t probe_seed = 0x70726f6265ULL;  ///< probe directions, independent of data
    std::uint64_t seed = 0;
    int truth_fallback_size = 1 << 20;
};

struct BiasProbeRow {
    int samples = 0;  ///< N
    int probe = 0;
    int replicates = 0;
    double bias = 0.0;       ///< mean projection over replicates
    double std_error = 0.0;  ///< standard error of that mean
    double rms = 0.0;        ///< root mean square projection
};

/// Per-N aggregate over probe vectors (root mean square across probes), the
/// series the slopes are fitted on.
struct BiasProbeAggregate {
    int samples = 0;
    double bias = 0.0;
    double std_error = 0.0;
    double rms = 0.0;
};

struct BiasProbeReport {
    std::vector<BiasProbeRow> rows;
    std::vector<BiasProbeAggregate> aggregate;
    double bias_slope = 0.0;
    double rms_slope = 0.0;
    std::uint64_t seed = 0;
};

BiasProbeReport run_bias_probe(const BiasProbeConfig& cfg, unsigned threads);

// ---------------------------------------------------------------------------
// Gaussian-mixture mode regression
// ---------------------------------------------------------------------------

struct GmmCell {
    int n = 0;
    int samples = 0;  ///< N
};

struct GmmExperimentConfig {
    Eigen::Index d = 2;
    int max_modes = 2;
    std::vector<GmmCell> cells;
    EmbeddingConfig embedding = MeanLinearConfig{};
    std::vector<double> lambda_grid;
    std::vector<double> scale_grid;
    int cv_splits = 10;
    double cv_holdout = 0.2;
    /// Scoring repetitions per cell; hyperparameters are selected once per
    /// cell on a dedicated selection replicate, then held fixed.
    int eval_replicates = 5;
    std::uint64_t seed = 0;
};

struct GmmCellResult {
    int n = 0;
    int samples = 0;
    double lambda = 0.0;
    double scale = 0.0;
    std::vector<double> scores;  ///< per replicate; NaN marks a degenerate test set
    double mean_score = 0.0;     ///< over valid replicates
    double std_score = 0.0;
    bool degenerate = false;  ///< no replicate had a scorable test set
};

struct GmmReport {
    std::vector<GmmCellResult> cells;
    std::uint64_t seed = 0;
};

GmmReport run_gmm_experiment(const GmmExperimentConfig& cfg, unsigned threads);

// ---------------------------------------------------------------------------
// Ecological simulation
// ---------------------------------------------------------------------------

struct EcologicalExperimentConfig {
    std::vector<int> d_values = {5, 10, 15, 20};
    int n_train = 100;
    int samples_per_group = 200;  ///< N
    int n_test = 200;
    int mc_steps = 10;
    EmbeddingConfig embedding = SlicedWassersteinConfig{};
    std::vector<double> lambda_grid;
    std::vector<double> scale_grid;
    int cv_splits = 10;
    double cv_holdout = 0.2;
    /// Dimension at which the per-feature half-split probe runs (0 disables).
    int feature_probe_d = 5;
    std::uint64_t seed = 0;
};

struct EcoStepResult {
    int d = 0;
    int step = 0;
    double lambda = 0.0;
    double scale = 0.0;
    double score = 0.0;
};

struct EcoProbeRow {
    int step = 0;
    int feature = 0;          ///< 1-based, as in the data-generating law
    double median_diff = 0.0; ///< median over train groups of pred(top half) - pred(bottom half)
};

struct EcologicalReport {
    std::vector<EcoStepResult> steps;
    std::vector<EcoProbeRow> probe;
    std::uint64_t seed = 0;
};

EcologicalReport run_ecological_experiment(const EcologicalExperimentConfig& cfg,
                                           unsigned threads);

// ---------------------------------------------------------------------------
// Report files: CSV rows per cell/replicate plus a JSON summary with the
// fitted slopes / medians and the seeds.
// ---------------------------------------------------------------------------

void write_rate_report(const RateReport& report, const std::string& csv_path,
                       const std::string& json_path);
void write_bias_report(const BiasProbeReport& report, const std::string& csv_path,
                       const std::string& json_path);
void write_gmm_report(const GmmReport& report, const std::string& csv_path,
                      const std::string& json_path);
void write_eco_report(const EcologicalReport& report, const std::string& csv_path,
                      const std::string& probe_csv_path, const std::string& json_path);

}  // namespace distreg
