#include "distreg/dataset_io.hpp"

#include "distreg/csv.hpp"
#include "distreg/error.hpp"

#include <cmath>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

namespace distreg {

void validate_distribution(const EmpiricalDistribution& dist) {
    if (dist.points.rows() < 1 || dist.points.cols() < 1) {
        throw ValidationError("distribution '" + dist.group_id + "' must have N >= 1 and d >= 1");
    }
    if (!dist.points.allFinite()) {
        throw ValidationError("distribution '" + dist.group_id + "' contains non-finite entries");
    }
}

Vector RegressionDataset::labels() const {
    Vector y(static_cast<Eigen::Index>(items.size()));
    for (std::size_t i = 0; i < items.size(); ++i) y[static_cast<Eigen::Index>(i)] = items[i].label;
    return y;
}

namespace {

void check_samples_header(const std::vector<std::string>& header, const std::string& path,
                          bool allow_weight, Eigen::Index* d_out, bool* has_weight_out) {
    if (header.size() < 2 || header[0] != "group_id") {
        throw IoError("samples file " + path + ": header must be group_id,x_1,...,x_d");
    }
    std::size_t coord_end = header.size();
    bool has_weight = false;
    if (allow_weight && header.back() == "weight") {
        has_weight = true;
        --coord_end;
        if (coord_end < 2) throw IoError("samples file " + path + ": no coordinate columns");
    }
    for (std::size_t j = 1; j < coord_end; ++j) {
        const std::string expected = "x_" + std::to_string(j);
        if (header[j] != expected) {
            throw IoError("samples file " + path + ": expected column '" + expected + "', got '" +
                          header[j] + "'");
        }
    }
    *d_out = static_cast<Eigen::Index>(coord_end - 1);
    if (has_weight_out) *has_weight_out = has_weight;
}

struct GroupRows {
    std::vector<std::vector<double>> rows;
    std::vector<double> weights;
};

// Parses the samples table into per-group row lists, preserving file order.
void parse_sample_rows(const csv::Table& table, const std::string& path, Eigen::Index d,
                       bool has_weight, std::vector<std::string>* order,
                       std::unordered_map<std::string, GroupRows>* groups) {
    const std::size_t expected_fields = 1 + static_cast<std::size_t>(d) + (has_weight ? 1 : 0);
    for (const auto& row : table.rows) {
        if (row.fields.size() != expected_fields) {
            throw IoError("samples file " + path + ": line " + std::to_string(row.line_no) +
                          " has " + std::to_string(row.fields.size()) + " fields, expected " +
                          std::to_string(expected_fields));
        }
        const std::string& gid = row.fields[0];
        auto [it, inserted] = groups->try_emplace(gid);
        if (inserted) order->push_back(gid);
        std::vector<double> coords(static_cast<std::size_t>(d));
        for (Eigen::Index j = 0; j < d; ++j) {
            coords[static_cast<std::size_t>(j)] =
                csv::parse_double(row.fields[static_cast<std::size_t>(j) + 1], row.line_no,
                                  static_cast<std::size_t>(j) + 2);
        }
        it->second.rows.push_back(std::move(coords));
        if (has_weight) {
            it->second.weights.push_back(
                csv::parse_double(row.fields.back(), row.line_no, expected_fields));
        }
    }
}

EmpiricalDistribution assemble_distribution(const std::string& gid, const GroupRows& group,
                                            Eigen::Index d) {
    EmpiricalDistribution dist;
    dist.group_id = gid;
    dist.points.resize(static_cast<Eigen::Index>(group.rows.size()), d);
    for (std::size_t r = 0; r < group.rows.size(); ++r) {
        for (Eigen::Index j = 0; j < d; ++j) {
            dist.points(static_cast<Eigen::Index>(r), j) = group.rows[r][static_cast<std::size_t>(j)];
        }
    }
    validate_distribution(dist);
    return dist;
}

}  // namespace

RegressionDataset load_dataset(const std::string& samples_path, const std::string& labels_path) {
    const csv::Table samples = csv::read_file(samples_path);
    Eigen::Index d = 0;
    check_samples_header(samples.header, samples_path, /*allow_weight=*/false, &d, nullptr);

    std::vector<std::string> order;
    std::unordered_map<std::string, GroupRows> groups;
    parse_sample_rows(samples, samples_path, d, /*has_weight=*/false, &order, &groups);

    const csv::Table labels = csv::read_file(labels_path);
    if (labels.header.size() != 2 || labels.header[0] != "group_id" || labels.header[1] != "y") {
        throw IoError("labels file " + labels_path + ": header must be group_id,y");
    }

    RegressionDataset dataset;
    dataset.dim = d;
    std::unordered_set<std::string> seen;
    for (const auto& row : labels.rows) {
        if (row.fields.size() != 2) {
            throw IoError("labels file " + labels_path + ": line " + std::to_string(row.line_no) +
                          " has " + std::to_string(row.fields.size()) + " fields, expected 2");
        }
        const std::string& gid = row.fields[0];
        if (!seen.insert(gid).second) {
            throw IoError("labels file " + labels_path + ": duplicate group " + gid);
        }
        const auto it = groups.find(gid);
        if (it == groups.end()) throw IoError("unknown group " + gid);
        const double y = csv::parse_double(row.fields[1], row.line_no, 2);
        if (!std::isfinite(y)) {
            throw IoError("labels file " + labels_path + ": non-finite label for group " + gid);
        }
        dataset.items.push_back({assemble_distribution(gid, it->second, d), y});
    }
    return dataset;
}

std::vector<EmpiricalDistribution> load_groups(const std::string& samples_path) {
    const csv::Table samples = csv::read_file(samples_path);
    Eigen::Index d = 0;
    check_samples_header(samples.header, samples_path, /*allow_weight=*/false, &d, nullptr);
    std::vector<std::string> order;
    std::unordered_map<std::string, GroupRows> groups;
    parse_sample_rows(samples, samples_path, d, /*has_weight=*/false, &order, &groups);
    std::vector<EmpiricalDistribution> out;
    out.reserve(order.size());
    for (const auto& gid : order) out.push_back(assemble_distribution(gid, groups.at(gid), d));
    return out;
}

std::pair<Matrix, Vector> load_reference(const std::string& path) {
    const csv::Table samples = csv::read_file(path);
    Eigen::Index d = 0;
    bool has_weight = false;
    check_samples_header(samples.header, path, /*allow_weight=*/true, &d, &has_weight);
    std::vector<std::string> order;
    std::unordered_map<std::string, GroupRows> groups;
    parse_sample_rows(samples, path, d, has_weight, &order, &groups);
    if (order.size() != 1) {
        throw IoError("reference file " + path + ": expected exactly one group, found " +
                      std::to_string(order.size()));
    }
    const GroupRows& group = groups.at(order[0]);
    const EmpiricalDistribution dist = assemble_distribution(order[0], group, d);
    const Eigen::Index m = dist.points.rows();
    Vector weights;
    if (has_weight) {
        weights.resize(m);
        for (Eigen::Index k = 0; k < m; ++k) {
            const double w = group.weights[static_cast<std::size_t>(k)];
            if (!(w > 0.0) || !std::isfinite(w)) {
                throw ValidationError("reference file " + path +
                                      ": weights must be strictly positive and finite");
            }
            weights[k] = w;
        }
        weights /= weights.sum();
    } else {
        weights = Vector::Constant(m, 1.0 / static_cast<double>(m));
    }
    return {dist.points, weights};
}

void write_samples_csv(const std::string& path, const std::vector<EmpiricalDistribution>& dists) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write file: " + path);
    if (dists.empty()) throw ValidationError("write_samples_csv: no distributions");
    const Eigen::Index d = dists.front().dim();
    out << "group_id";
    for (Eigen::Index j = 1; j <= d; ++j) out << ",x_" << j;
    out << "\n";
    for (const auto& dist : dists) {
        for (Eigen::Index r = 0; r < dist.size(); ++r) {
            out << dist.group_id;
            for (Eigen::Index j = 0; j < d; ++j) out << ',' << csv::format_double(dist.points(r, j));
            out << "\n";
        }
    }
}

void write_labels_csv(const std::string& path, const RegressionDataset& dataset) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write file: " + path);
    out << "group_id,y\n";
    for (const auto& item : dataset.items) {
        out << item.dist.group_id << ',' << csv::format_double(item.label) << "\n";
    }
}

}  // namespace distreg
