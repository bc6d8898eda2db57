#pragma once

#include <Eigen/Core>

#include <string>
#include <vector>

namespace distreg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// A distribution observed through samples: one row per sample point.
struct EmpiricalDistribution {
    Matrix points;         ///< N x d, rows are samples
    std::string group_id;  ///< opaque label

    Eigen::Index size() const { return points.rows(); }
    Eigen::Index dim() const { return points.cols(); }
};

/// Enforces N >= 1, d >= 1 and finite entries.
void validate_distribution(const EmpiricalDistribution& dist);

struct DatasetItem {
    EmpiricalDistribution dist;
    double label = 0.0;
};

/// Ordered (distribution, label) pairs sharing one ambient dimension.
struct RegressionDataset {
    std::vector<DatasetItem> items;
    Eigen::Index dim = 0;

    std::size_t size() const { return items.size(); }
    Vector labels() const;
};

}  // namespace distreg
