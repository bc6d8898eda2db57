#pragma once

#include "distreg/types.hpp"

#include <string>
#include <utility>

namespace distreg {

/// Loads a dataset from the two-file CSV format.
///
/// samples: header `group_id,x_1,...,x_d`, one sample per row.
/// labels:  header `group_id,y`, one group per row.
///
/// The dataset is ordered by first appearance of group_id in the labels
/// file; sample rows keep file order inside each group. Groups present in
/// the samples file but absent from the labels file are dropped. A labeled
/// group missing from the samples file is an error naming the group.
RegressionDataset load_dataset(const std::string& samples_path, const std::string& labels_path);

/// Loads all groups of a samples CSV, ordered by first appearance. Used by
/// prediction, where no labels exist.
std::vector<EmpiricalDistribution> load_groups(const std::string& samples_path);

/// Loads a reference measure: samples CSV with a single group and an
/// optional trailing `weight` column (uniform if absent). Weights must be
/// strictly positive; they are normalized to sum to 1.
std::pair<Matrix, Vector> load_reference(const std::string& path);

void write_samples_csv(const std::string& path, const std::vector<EmpiricalDistribution>& dists);
void write_labels_csv(const std::string& path, const RegressionDataset& dataset);

}  // namespace distreg
