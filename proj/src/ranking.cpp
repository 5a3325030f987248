#include "flowrank/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "flowrank/csv.hpp"
#include "flowrank/models.hpp"

namespace flowrank::ranking {

namespace {

// Stable ordering: primary score (per orientation), ties by feature index.
FeatureRanking order_by(std::string method, std::span<const double> scores, bool ascending) {
    std::vector<std::size_t> ids(scores.size());
    std::iota(ids.begin(), ids.end(), 0);
    std::sort(ids.begin(), ids.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return ascending ? scores[a] < scores[b] : scores[a] > scores[b];
        return a < b;
    });
    FeatureRanking r;
    r.method = std::move(method);
    r.ascending = ascending;
    r.entries.reserve(ids.size());
    for (std::size_t id : ids) r.entries.emplace_back(id, scores[id]);
    return r;
}

// Mean 1-based rank position of every feature across per-model rankings.
std::vector<double> mean_positions(const std::vector<std::vector<double>>& importances,
                                   std::size_t n_features) {
    std::vector<double> mean(n_features, 0.0);
    for (const auto& imp : importances) {
        auto pos = rank_from_importance(imp).rank_positions(n_features);
        for (std::size_t i = 0; i < n_features; ++i) mean[i] += pos[i];
    }
    for (double& v : mean) v /= static_cast<double>(importances.size());
    return mean;
}

}  // namespace

std::vector<double> FeatureRanking::rank_positions(std::size_t n_features) const {
    validate_permutation(n_features);
    std::vector<double> pos(n_features, 0.0);
    for (std::size_t i = 0; i < entries.size(); ++i)
        pos[entries[i].first] = static_cast<double>(i + 1);
    return pos;
}

void FeatureRanking::validate_permutation(std::size_t n_features) const {
    if (entries.size() != n_features)
        throw DataError("ranking '" + method + "' covers " + std::to_string(entries.size()) +
                        " features, expected " + std::to_string(n_features));
    std::vector<char> seen(n_features, 0);
    for (const auto& [id, score] : entries) {
        if (id >= n_features)
            throw DataError("ranking '" + method + "' references feature " + std::to_string(id));
        if (seen[id]) throw DataError("ranking '" + method + "' repeats feature " + std::to_string(id));
        seen[id] = 1;
        if (!std::isfinite(score) && !std::isinf(score))
            throw DataError("ranking '" + method + "' has a NaN score");
    }
}

void RankContext::validate() const {
    const std::size_t m = model_names.size();
    if (m == 0) throw UsageError("rank context needs at least one model");
    if (accuracies.size() != m || model_overall.size() != m || model_per_class.size() != m)
        throw UsageError("rank context arrays disagree on the model count");
    if (n_features == 0) throw UsageError("rank context needs at least one feature");
    if (attack_names.size() != attack_classes.size())
        throw UsageError("rank context attack names and class indices disagree");
    const std::size_t n_classes = model_per_class.front().rows();
    for (std::size_t i = 0; i < m; ++i) {
        if (!std::isfinite(accuracies[i]) || accuracies[i] < 0.0)
            throw UsageError("model accuracy must be finite and non-negative");
        if (model_overall[i].size() != n_features)
            throw UsageError("overall importance for '" + model_names[i] + "' has wrong length");
        if (model_per_class[i].rows() != n_classes || model_per_class[i].cols() != n_features)
            throw UsageError("per-class importance for '" + model_names[i] + "' has wrong shape");
    }
    for (std::size_t a : attack_classes)
        if (a >= n_classes) throw UsageError("attack class index out of range");
}

FeatureRanking rank_from_importance(std::span<const double> importance, std::string method) {
    if (importance.empty()) throw UsageError("cannot rank an empty importance vector");
    for (double v : importance)
        if (std::isnan(v)) throw DataError("importance vector contains NaN");
    return order_by(std::move(method), importance, /*ascending=*/false);
}

FeatureRanking overall_rank(const RankContext& ctx) {
    ctx.validate();
    return order_by("overall_rank", mean_positions(ctx.model_overall, ctx.n_features),
                    /*ascending=*/true);
}

FeatureRanking weighted_rank(const RankContext& ctx) {
    ctx.validate();
    std::vector<double> score(ctx.n_features, 0.0);
    for (std::size_t m = 0; m < ctx.model_overall.size(); ++m)
        for (std::size_t i = 0; i < ctx.n_features; ++i)
            score[i] += ctx.accuracies[m] * ctx.model_overall[m][i];
    for (double& v : score) v /= static_cast<double>(ctx.model_overall.size());
    return order_by("weighted_rank", score, /*ascending=*/false);
}

FeatureRanking normalized_weighted_rank(const RankContext& ctx) {
    ctx.validate();
    std::vector<double> score(ctx.n_features, 0.0);
    for (std::size_t m = 0; m < ctx.model_overall.size(); ++m) {
        const auto& imp = ctx.model_overall[m];
        double total = 0.0;
        for (double v : imp) total += std::abs(v);
        if (total <= 0.0)
            throw DataError("importance vector for '" + ctx.model_names[m] +
                            "' is all zeros; cannot normalize");
        for (std::size_t i = 0; i < ctx.n_features; ++i)
            score[i] += ctx.accuracies[m] * std::abs(imp[i]) / total;
    }
    for (double& v : score) v /= static_cast<double>(ctx.model_overall.size());
    return order_by("normalized_weighted_rank", score, /*ascending=*/false);
}

FeatureRanking models_attacks_score(const RankContext& ctx) {
    ctx.validate();
    if (ctx.attack_classes.empty())
        throw UsageError("models_attacks_score needs at least one attack class");
    auto model_pos = mean_positions(ctx.model_overall, ctx.n_features);

    // Per-attack importances pooled across models by mean, then ranked.
    std::vector<std::vector<double>> attack_imp;
    attack_imp.reserve(ctx.attack_classes.size());
    for (std::size_t a : ctx.attack_classes) {
        std::vector<double> pooled(ctx.n_features, 0.0);
        for (const auto& per_class : ctx.model_per_class)
            for (std::size_t i = 0; i < ctx.n_features; ++i) pooled[i] += per_class.at(a, i);
        for (double& v : pooled) v /= static_cast<double>(ctx.model_per_class.size());
        attack_imp.push_back(std::move(pooled));
    }
    auto attack_pos = mean_positions(attack_imp, ctx.n_features);

    std::vector<double> score(ctx.n_features);
    for (std::size_t i = 0; i < ctx.n_features; ++i)
        score[i] = 0.5 * (model_pos[i] + attack_pos[i]);
    return order_by("models_attacks", score, /*ascending=*/true);
}

FeatureRanking combined_selection(const std::vector<FeatureRanking>& rankings, std::size_t k) {
    if (rankings.empty()) throw UsageError("combined_selection needs at least one ranking");
    if (k == 0) throw UsageError("combined_selection needs k >= 1");
    const std::size_t n = rankings.front().entries.size();
    for (const auto& r : rankings) r.validate_permutation(n);
    k = std::min(k, n);

    std::vector<double> count(n, 0.0);
    std::vector<double> mean_pos(n, 0.0);
    for (const auto& r : rankings) {
        for (std::size_t i = 0; i < k; ++i) count[r.entries[i].first] += 1.0;
        auto pos = r.rank_positions(n);
        for (std::size_t i = 0; i < n; ++i) mean_pos[i] += pos[i];
    }
    for (double& v : mean_pos) v /= static_cast<double>(rankings.size());

    std::vector<std::size_t> ids(n);
    std::iota(ids.begin(), ids.end(), 0);
    std::sort(ids.begin(), ids.end(), [&](std::size_t a, std::size_t b) {
        if (count[a] != count[b]) return count[a] > count[b];
        if (mean_pos[a] != mean_pos[b]) return mean_pos[a] < mean_pos[b];
        return a < b;
    });
    FeatureRanking r;
    r.method = "combined";
    r.ascending = false;
    for (std::size_t id : ids) r.entries.emplace_back(id, count[id]);
    return r;
}

FeatureRanking voting(const std::vector<FeatureRanking>& rankings) {
    if (rankings.empty()) throw UsageError("voting needs at least one ranking");
    const std::size_t n = rankings.front().entries.size();
    for (const auto& r : rankings) r.validate_permutation(n);

    std::vector<double> points(n, 0.0);
    for (const auto& r : rankings)
        for (std::size_t i = 0; i < n; ++i)
            points[r.entries[i].first] += static_cast<double>(n - i);
    return order_by("voting", points, /*ascending=*/false);
}

// ------------------------------------------------------------------ baselines

namespace {

constexpr int kQuantileBins = 20;
constexpr double kCorrPrune = 0.95;

// Internal cut points at the 1/20 .. 19/20 quantiles, deduplicated.
std::vector<double> quantile_edges(std::vector<double> vals) {
    std::sort(vals.begin(), vals.end());
    std::vector<double> edges;
    for (int q = 1; q < kQuantileBins; ++q) {
        double v = vals[vals.size() * static_cast<std::size_t>(q) / kQuantileBins];
        if (edges.empty() || v > edges.back()) edges.push_back(v);
    }
    return edges;
}

std::size_t bin_of(const std::vector<double>& edges, double v) {
    return static_cast<std::size_t>(std::lower_bound(edges.begin(), edges.end(), v) -
                                    edges.begin());
}

// Bins x contingency counts for one feature against the labels.
std::vector<std::vector<double>> contingency(const Matrix& x, std::size_t feature,
                                             const std::vector<std::size_t>& y,
                                             std::size_t n_classes) {
    std::vector<double> col(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) col[r] = x.at(r, feature);
    auto edges = quantile_edges(col);
    std::vector<std::vector<double>> counts(edges.size() + 1,
                                            std::vector<double>(n_classes, 0.0));
    for (std::size_t r = 0; r < x.rows(); ++r) counts[bin_of(edges, col[r])][y[r]] += 1.0;
    return counts;
}

double chi2_statistic(const std::vector<std::vector<double>>& counts, double n) {
    std::vector<double> row_tot(counts.size(), 0.0);
    std::vector<double> col_tot(counts.front().size(), 0.0);
    for (std::size_t b = 0; b < counts.size(); ++b)
        for (std::size_t c = 0; c < counts[b].size(); ++c) {
            row_tot[b] += counts[b][c];
            col_tot[c] += counts[b][c];
        }
    double stat = 0.0;
    for (std::size_t b = 0; b < counts.size(); ++b)
        for (std::size_t c = 0; c < counts[b].size(); ++c) {
            double expected = row_tot[b] * col_tot[c] / n;
            if (expected > 0.0) {
                double d = counts[b][c] - expected;
                stat += d * d / expected;
            }
        }
    return stat;
}

// Mutual information in bits between the binned feature and the labels.
double mutual_information(const std::vector<std::vector<double>>& counts, double n) {
    std::vector<double> row_tot(counts.size(), 0.0);
    std::vector<double> col_tot(counts.front().size(), 0.0);
    for (std::size_t b = 0; b < counts.size(); ++b)
        for (std::size_t c = 0; c < counts[b].size(); ++c) {
            row_tot[b] += counts[b][c];
            col_tot[c] += counts[b][c];
        }
    double mi = 0.0;
    for (std::size_t b = 0; b < counts.size(); ++b)
        for (std::size_t c = 0; c < counts[b].size(); ++c) {
            double joint = counts[b][c] / n;
            if (joint > 0.0) mi += joint * std::log2(joint * n * n / (row_tot[b] * col_tot[c]));
        }
    return std::max(mi, 0.0);
}

double anova_f(const Matrix& x, std::size_t feature, const std::vector<std::size_t>& y,
               std::size_t n_classes) {
    const double n = static_cast<double>(x.rows());
    std::vector<double> sum(n_classes, 0.0), cnt(n_classes, 0.0);
    double grand = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r) {
        sum[y[r]] += x.at(r, feature);
        cnt[y[r]] += 1.0;
        grand += x.at(r, feature);
    }
    grand /= n;
    double between = 0.0, within = 0.0;
    std::size_t present = 0;
    for (std::size_t c = 0; c < n_classes; ++c) {
        if (cnt[c] == 0.0) continue;
        ++present;
        double mean_c = sum[c] / cnt[c];
        between += cnt[c] * (mean_c - grand) * (mean_c - grand);
    }
    for (std::size_t r = 0; r < x.rows(); ++r) {
        double d = x.at(r, feature) - sum[y[r]] / cnt[y[r]];
        within += d * d;
    }
    if (present < 2 || n <= static_cast<double>(present)) return 0.0;
    double msb = between / static_cast<double>(present - 1);
    double msw = within / (n - static_cast<double>(present));
    if (msw <= 0.0) return msb > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    return msb / msw;
}

// Pearson correlation between feature column a and either column b or the
// numeric labels (b == SIZE_MAX). Zero-variance inputs correlate to 0.
double pearson(const Matrix& x, std::size_t a, std::size_t b, const std::vector<std::size_t>& y) {
    const double n = static_cast<double>(x.rows());
    double sa = 0.0, sb = 0.0, saa = 0.0, sbb = 0.0, sab = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r) {
        double va = x.at(r, a);
        double vb = b == SIZE_MAX ? static_cast<double>(y[r]) : x.at(r, b);
        sa += va;
        sb += vb;
        saa += va * va;
        sbb += vb * vb;
        sab += va * vb;
    }
    double var_a = saa - sa * sa / n;
    double var_b = sbb - sb * sb / n;
    if (var_a <= 0.0 || var_b <= 0.0) return 0.0;
    return (sab - sa * sb / n) / std::sqrt(var_a * var_b);
}

// |corr with label| ordering, then greedy redundancy pruning: any feature
// correlating above the threshold with an already kept, better-scoring
// feature moves to the tail (in pruning order).
FeatureRanking correlation_rank(const data::Dataset& d) {
    const std::size_t nf = d.n_features();
    std::vector<double> score(nf);
    for (std::size_t f = 0; f < nf; ++f) score[f] = std::abs(pearson(d.x, f, SIZE_MAX, d.y));

    auto by_score = order_by("correlation", score, /*ascending=*/false);
    std::vector<std::size_t> kept, pruned;
    for (const auto& [id, s] : by_score.entries) {
        bool redundant = false;
        for (std::size_t g : kept)
            if (std::abs(pearson(d.x, id, g, d.y)) > kCorrPrune) {
                redundant = true;
                break;
            }
        (redundant ? pruned : kept).push_back(id);
    }
    FeatureRanking r;
    r.method = "correlation";
    r.ascending = false;
    for (std::size_t id : kept) r.entries.emplace_back(id, score[id]);
    for (std::size_t id : pruned) r.entries.emplace_back(id, score[id]);
    return r;
}

}  // namespace

std::string to_string(BaselineMethod m) {
    switch (m) {
        case BaselineMethod::Chi2: return "chi2";
        case BaselineMethod::Correlation: return "correlation";
        case BaselineMethod::Impurity: return "impurity";
        case BaselineMethod::InfoGain: return "infogain";
        case BaselineMethod::KBest: return "kbest";
    }
    throw InternalError("unknown baseline method");
}

BaselineMethod baseline_method_from_string(const std::string& name) {
    for (BaselineMethod m : all_baseline_methods())
        if (to_string(m) == name) return m;
    throw UsageError("unknown baseline method '" + name + "'");
}

std::span<const BaselineMethod> all_baseline_methods() {
    static constexpr BaselineMethod kAll[] = {BaselineMethod::Chi2, BaselineMethod::Correlation,
                                              BaselineMethod::Impurity, BaselineMethod::InfoGain,
                                              BaselineMethod::KBest};
    return kAll;
}

FeatureRanking baseline_rank(BaselineMethod method, const data::Dataset& train,
                             std::uint64_t seed) {
    train.validate();
    if (train.size() < 2) throw DataError("baseline ranking needs at least two rows");
    const std::size_t nf = train.n_features();
    const std::size_t nc = train.n_classes();
    const double n = static_cast<double>(train.size());

    switch (method) {
        case BaselineMethod::Chi2: {
            std::vector<double> score(nf);
            for (std::size_t f = 0; f < nf; ++f)
                score[f] = chi2_statistic(contingency(train.x, f, train.y, nc), n);
            return order_by("chi2", score, /*ascending=*/false);
        }
        case BaselineMethod::InfoGain: {
            std::vector<double> score(nf);
            for (std::size_t f = 0; f < nf; ++f)
                score[f] = mutual_information(contingency(train.x, f, train.y, nc), n);
            return order_by("infogain", score, /*ascending=*/false);
        }
        case BaselineMethod::KBest: {
            std::vector<double> score(nf);
            for (std::size_t f = 0; f < nf; ++f) score[f] = anova_f(train.x, f, train.y, nc);
            return order_by("kbest", score, /*ascending=*/false);
        }
        case BaselineMethod::Impurity: {
            models::Hyperparams hp;
            auto forest = models::train(models::ModelKind::RandomForest, hp, train.x, train.y,
                                        nc, seed);
            const auto& rf = dynamic_cast<const models::RandomForestModel&>(*forest);
            return rank_from_importance(rf.feature_importances(), "impurity");
        }
        case BaselineMethod::Correlation: return correlation_rank(train);
    }
    throw InternalError("unknown baseline method");
}

std::vector<std::size_t> select_top_k(const FeatureRanking& r, std::size_t k) {
    if (k == 0 || k > r.entries.size())
        throw UsageError("top-k selection needs 1 <= k <= " + std::to_string(r.entries.size()) +
                         ", got " + std::to_string(k));
    std::vector<std::size_t> ids(k);
    for (std::size_t i = 0; i < k; ++i) ids[i] = r.entries[i].first;
    return ids;
}

// ------------------------------------------------------------------- csv i/o

void save_ranking(const FeatureRanking& r, const std::string& path,
                  const std::vector<std::string>& feature_names) {
    csv::Table t;
    t.header = {"method", "rank", "feature", "score"};
    for (std::size_t i = 0; i < r.entries.size(); ++i) {
        const auto& [id, score] = r.entries[i];
        if (id >= feature_names.size())
            throw DataError("ranking references feature " + std::to_string(id) +
                            " outside the schema");
        t.rows.push_back({r.method, std::to_string(i + 1), feature_names[id],
                          format_double(score)});
    }
    csv::write_file(path, t);
}

FeatureRanking load_ranking(const std::string& path,
                            const std::vector<std::string>& feature_names) {
    auto t = csv::read_file(path);
    int method_col = t.find_column("method");
    int rank_col = t.find_column("rank");
    int feature_col = t.find_column("feature");
    int score_col = t.find_column("score");
    if (method_col < 0 || rank_col < 0 || feature_col < 0 || score_col < 0)
        throw SchemaError("ranking file '" + path + "' is missing a required column");

    std::unordered_map<std::string, std::size_t> ids;
    for (std::size_t i = 0; i < feature_names.size(); ++i) ids.emplace(feature_names[i], i);

    FeatureRanking r;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& row = t.rows[i];
        if (i == 0)
            r.method = row[static_cast<std::size_t>(method_col)];
        else if (row[static_cast<std::size_t>(method_col)] != r.method)
            throw DataError("ranking file '" + path + "' mixes methods");
        if (row[static_cast<std::size_t>(rank_col)] != std::to_string(i + 1))
            throw DataError("ranking file '" + path + "' has out-of-order ranks");
        auto it = ids.find(row[static_cast<std::size_t>(feature_col)]);
        if (it == ids.end())
            throw DataError("ranking file '" + path + "' names unknown feature '" +
                            row[static_cast<std::size_t>(feature_col)] + "'");
        r.entries.emplace_back(it->second,
                               parse_double(row[static_cast<std::size_t>(score_col)]));
    }
    r.validate_permutation(feature_names.size());
    r.ascending = r.entries.size() > 1 && r.entries.front().second < r.entries.back().second;
    return r;
}

}  // namespace flowrank::ranking
