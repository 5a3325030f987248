#include "flowrank/tree.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

namespace flowrank::models::tree {

BinnedData BinnedData::build(const Matrix& x, std::size_t max_thresholds) {
    BinnedData out;
    out.n_rows = x.rows();
    out.n_cols = x.cols();
    out.thresholds.resize(x.cols());
    out.bins.resize(x.rows() * x.cols());

    std::vector<double> column(x.rows());
    for (std::size_t c = 0; c < x.cols(); ++c) {
        for (std::size_t r = 0; r < x.rows(); ++r) column[r] = x.at(r, c);
        std::sort(column.begin(), column.end());
        auto uniq_end = std::unique(column.begin(), column.end());
        const auto n_uniq = static_cast<std::size_t>(uniq_end - column.begin());

        auto& thr = out.thresholds[c];
        if (n_uniq >= 2) {
            if (max_thresholds == 0 || n_uniq - 1 <= max_thresholds) {
                thr.reserve(n_uniq - 1);
                for (std::size_t i = 0; i + 1 < n_uniq; ++i)
                    thr.push_back(0.5 * (column[i] + column[i + 1]));
            } else {
                // quantile-subsampled candidates
                thr.reserve(max_thresholds);
                for (std::size_t q = 1; q <= max_thresholds; ++q) {
                    std::size_t i = q * (n_uniq - 1) / (max_thresholds + 1);
                    i = std::min(i, n_uniq - 2);
                    thr.push_back(0.5 * (column[i] + column[i + 1]));
                }
                thr.erase(std::unique(thr.begin(), thr.end()), thr.end());
            }
        }
        if (thr.size() > 65534) thr.resize(65534);

        for (std::size_t r = 0; r < x.rows(); ++r) {
            const double v = x.at(r, c);
            auto it = std::lower_bound(thr.begin(), thr.end(), v);
            out.bins[r * x.cols() + c] = static_cast<std::uint16_t>(it - thr.begin());
        }
    }
    return out;
}

namespace {

double gini(std::span<const double> class_weights, double total) {
    if (total <= 0.0) return 0.0;
    double sq = 0.0;
    for (double w : class_weights) sq += w * w;
    return 1.0 - sq / (total * total);
}

struct ClassSplit {
    int feature = -1;
    std::size_t bin = 0;
    double gain = 0.0;
    double threshold = 0.0;
};

}  // namespace

Tree grow_classification(const BinnedData& data, std::span<const std::size_t> labels,
                         std::span<const double> weights, std::span<const std::uint32_t> rows,
                         std::size_t n_classes, const GrowConfig& cfg, std::mt19937_64& rng,
                         std::vector<double>* importance) {
    Tree tree;
    const bool uniform = weights.empty();
    const double total_weight =
        uniform ? static_cast<double>(rows.size())
                : std::accumulate(rows.begin(), rows.end(), 0.0,
                                  [&](double acc, std::uint32_t r) { return acc + weights[r]; });

    std::vector<std::size_t> all_features(data.n_cols);
    std::iota(all_features.begin(), all_features.end(), 0);

    // hist[f] reused across nodes
    std::vector<std::vector<double>> hist(data.n_cols);
    for (std::size_t f = 0; f < data.n_cols; ++f) hist[f].resize(data.n_bins(f) * n_classes);

    std::function<int(std::vector<std::uint32_t>&, std::size_t)> build =
        [&](std::vector<std::uint32_t>& node_rows, std::size_t depth) -> int {
        std::vector<double> class_w(n_classes, 0.0);
        for (std::uint32_t r : node_rows) class_w[labels[r]] += uniform ? 1.0 : weights[r];
        const double node_w = std::accumulate(class_w.begin(), class_w.end(), 0.0);

        auto make_leaf = [&]() {
            Node leaf;
            leaf.value.resize(n_classes, 0.0);
            if (node_w > 0)
                for (std::size_t c = 0; c < n_classes; ++c) leaf.value[c] = class_w[c] / node_w;
            tree.nodes.push_back(std::move(leaf));
            return static_cast<int>(tree.nodes.size() - 1);
        };

        const double node_gini = gini(class_w, node_w);
        if (depth >= cfg.max_depth || node_rows.size() < cfg.min_samples_split || node_gini <= 0.0 ||
            node_w <= 0.0)
            return make_leaf();

        // candidate features for this node
        std::vector<std::size_t> features;
        if (cfg.feature_subsample > 0 && cfg.feature_subsample < data.n_cols) {
            std::vector<std::size_t> pool = all_features;
            for (std::size_t i = 0; i < cfg.feature_subsample; ++i) {
                std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
                std::swap(pool[i], pool[pick(rng)]);
            }
            features.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(cfg.feature_subsample));
            std::sort(features.begin(), features.end());
        } else {
            features = all_features;
        }

        ClassSplit best;
        std::vector<double> left_w(n_classes);
        for (std::size_t f : features) {
            const std::size_t nb = data.n_bins(f);
            if (nb < 2) continue;
            auto& h = hist[f];
            std::fill(h.begin(), h.begin() + static_cast<std::ptrdiff_t>(nb * n_classes), 0.0);
            for (std::uint32_t r : node_rows)
                h[data.bin(r, f) * n_classes + labels[r]] += uniform ? 1.0 : weights[r];

            std::fill(left_w.begin(), left_w.end(), 0.0);
            double left_total = 0.0;
            for (std::size_t b = 0; b + 1 < nb; ++b) {
                for (std::size_t c = 0; c < n_classes; ++c) left_w[c] += h[b * n_classes + c];
                left_total = std::accumulate(left_w.begin(), left_w.end(), 0.0);
                const double right_total = node_w - left_total;
                if (left_total <= 0.0 || right_total <= 0.0) continue;
                double right_sq = 0.0, left_sq = 0.0;
                for (std::size_t c = 0; c < n_classes; ++c) {
                    left_sq += left_w[c] * left_w[c];
                    const double rw = class_w[c] - left_w[c];
                    right_sq += rw * rw;
                }
                const double gini_l = 1.0 - left_sq / (left_total * left_total);
                const double gini_r = 1.0 - right_sq / (right_total * right_total);
                const double gain = node_gini - (left_total * gini_l + right_total * gini_r) / node_w;
                if (gain > best.gain + cfg.min_gain ||
                    (best.feature < 0 && gain > cfg.min_gain)) {
                    best.feature = static_cast<int>(f);
                    best.bin = b;
                    best.gain = gain;
                    best.threshold = data.thresholds[f][b];
                }
            }
        }
        if (best.feature < 0) return make_leaf();

        if (importance)
            (*importance)[static_cast<std::size_t>(best.feature)] += best.gain * node_w / total_weight;

        std::vector<std::uint32_t> left_rows, right_rows;
        left_rows.reserve(node_rows.size());
        right_rows.reserve(node_rows.size());
        for (std::uint32_t r : node_rows) {
            if (data.bin(r, static_cast<std::size_t>(best.feature)) <= best.bin)
                left_rows.push_back(r);
            else
                right_rows.push_back(r);
        }
        node_rows.clear();
        node_rows.shrink_to_fit();

        Node split;
        split.feature = best.feature;
        split.threshold = best.threshold;
        tree.nodes.push_back(split);
        const auto self = static_cast<int>(tree.nodes.size() - 1);
        const int left = build(left_rows, depth + 1);
        const int right = build(right_rows, depth + 1);
        tree.nodes[static_cast<std::size_t>(self)].left = left;
        tree.nodes[static_cast<std::size_t>(self)].right = right;
        return self;
    };

    std::vector<std::uint32_t> root_rows(rows.begin(), rows.end());
    build(root_rows, 0);
    return tree;
}

Tree grow_regression(const BinnedData& data, std::span<const double> grad, std::span<const double> hess,
                     std::span<const std::uint32_t> rows, const GrowConfig& cfg, double lambda,
                     std::mt19937_64& rng) {
    Tree tree;
    std::vector<std::size_t> all_features(data.n_cols);
    std::iota(all_features.begin(), all_features.end(), 0);

    std::vector<std::vector<double>> hist(data.n_cols);  // (G, H) pairs per bin
    for (std::size_t f = 0; f < data.n_cols; ++f) hist[f].resize(data.n_bins(f) * 2);

    std::function<int(std::vector<std::uint32_t>&, std::size_t)> build =
        [&](std::vector<std::uint32_t>& node_rows, std::size_t depth) -> int {
        double g_sum = 0.0, h_sum = 0.0;
        for (std::uint32_t r : node_rows) {
            g_sum += grad[r];
            h_sum += hess[r];
        }
        auto score = [&](double g, double h) { return g * g / (h + lambda); };

        auto make_leaf = [&]() {
            Node leaf;
            leaf.value = {-g_sum / (h_sum + lambda)};
            tree.nodes.push_back(std::move(leaf));
            return static_cast<int>(tree.nodes.size() - 1);
        };
        if (depth >= cfg.max_depth || node_rows.size() < cfg.min_samples_split) return make_leaf();

        std::vector<std::size_t> features;
        if (cfg.feature_subsample > 0 && cfg.feature_subsample < data.n_cols) {
            std::vector<std::size_t> pool = all_features;
            for (std::size_t i = 0; i < cfg.feature_subsample; ++i) {
                std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
                std::swap(pool[i], pool[pick(rng)]);
            }
            features.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(cfg.feature_subsample));
            std::sort(features.begin(), features.end());
        } else {
            features = all_features;
        }

        int best_feature = -1;
        std::size_t best_bin = 0;
        double best_gain = 0.0, best_threshold = 0.0;
        const double parent_score = score(g_sum, h_sum);
        for (std::size_t f : features) {
            const std::size_t nb = data.n_bins(f);
            if (nb < 2) continue;
            auto& h = hist[f];
            std::fill(h.begin(), h.begin() + static_cast<std::ptrdiff_t>(nb * 2), 0.0);
            for (std::uint32_t r : node_rows) {
                const std::size_t b = data.bin(r, f);
                h[b * 2] += grad[r];
                h[b * 2 + 1] += hess[r];
            }
            double gl = 0.0, hl = 0.0;
            for (std::size_t b = 0; b + 1 < nb; ++b) {
                gl += h[b * 2];
                hl += h[b * 2 + 1];
                const double gr = g_sum - gl, hr = h_sum - hl;
                if (hl <= 0.0 || hr <= 0.0) continue;
                const double gain = score(gl, hl) + score(gr, hr) - parent_score;
                if (gain > best_gain + cfg.min_gain || (best_feature < 0 && gain > cfg.min_gain)) {
                    best_feature = static_cast<int>(f);
                    best_bin = b;
                    best_gain = gain;
                    best_threshold = data.thresholds[f][b];
                }
            }
        }
        if (best_feature < 0) return make_leaf();

        std::vector<std::uint32_t> left_rows, right_rows;
        left_rows.reserve(node_rows.size());
        right_rows.reserve(node_rows.size());
        for (std::uint32_t r : node_rows) {
            if (data.bin(r, static_cast<std::size_t>(best_feature)) <= best_bin)
                left_rows.push_back(r);
            else
                right_rows.push_back(r);
        }
        node_rows.clear();
        node_rows.shrink_to_fit();

        Node split;
        split.feature = best_feature;
        split.threshold = best_threshold;
        tree.nodes.push_back(split);
        const auto self = static_cast<int>(tree.nodes.size() - 1);
        const int left = build(left_rows, depth + 1);
        const int right = build(right_rows, depth + 1);
        tree.nodes[static_cast<std::size_t>(self)].left = left;
        tree.nodes[static_cast<std::size_t>(self)].right = right;
        return self;
    };

    std::vector<std::uint32_t> root_rows(rows.begin(), rows.end());
    build(root_rows, 0);
    return tree;
}

}  // namespace flowrank::models::tree
