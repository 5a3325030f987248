#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "flowrank/common.hpp"

namespace flowrank::models::tree {

// Binary decision node. Leaves keep feature = -1 and carry `value`
// (a class distribution for classification trees, a single score for
// boosted regression trees).
struct Node {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::vector<double> value;

    bool is_leaf() const { return feature < 0; }
};

struct Tree {
    std::vector<Node> nodes;

    const std::vector<double>& predict(std::span<const double> row) const {
        int i = 0;
        while (!nodes[static_cast<std::size_t>(i)].is_leaf()) {
            const Node& n = nodes[static_cast<std::size_t>(i)];
            i = row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
        }
        return nodes[static_cast<std::size_t>(i)].value;
    }
};

// Pre-binned view of a training matrix. Candidate thresholds per feature are
// midpoints of consecutive distinct values, quantile-subsampled once there
// are more distinct values than max_thresholds. Bin index b satisfies
// v <= thresholds[b] exactly for b >= bin(v), so split search and later
// prediction agree on row routing.
struct BinnedData {
    std::vector<std::vector<double>> thresholds;  // ascending, per feature
    std::vector<std::uint16_t> bins;              // row-major [rows x cols]
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;

    std::uint16_t bin(std::size_t r, std::size_t c) const { return bins[r * n_cols + c]; }
    std::size_t n_bins(std::size_t c) const { return thresholds[c].size() + 1; }

    static BinnedData build(const Matrix& x, std::size_t max_thresholds);
};

struct GrowConfig {
    std::size_t max_depth = 10;
    std::size_t min_samples_split = 2;
    // 0 grows on all features; otherwise a per-node random subset of this
    // size (random-forest style).
    std::size_t feature_subsample = 0;
    double min_gain = 1e-12;
};

// Gini-impurity classification tree over binned data. `weights` may be empty
// (uniform). Tie-breaking is deterministic: lowest feature, then lowest bin.
// When `importance` is given, each split adds its weighted impurity decrease
// to the split feature's slot (mean-decrease-in-impurity accounting).
Tree grow_classification(const BinnedData& data, std::span<const std::size_t> labels,
                         std::span<const double> weights, std::span<const std::uint32_t> rows,
                         std::size_t n_classes, const GrowConfig& cfg, std::mt19937_64& rng,
                         std::vector<double>* importance = nullptr);

// Second-order regression tree on (gradient, hessian) pairs; leaf value is
// -G/(H+lambda). Used by the boosting stage fits.
Tree grow_regression(const BinnedData& data, std::span<const double> grad, std::span<const double> hess,
                     std::span<const std::uint32_t> rows, const GrowConfig& cfg, double lambda,
                     std::mt19937_64& rng);

}  // namespace flowrank::models::tree
