#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "flowrank/common.hpp"
#include "flowrank/flowdata.hpp"

namespace flowrank::ranking {

// An ordered permutation of all features, best first. `ascending` records the
// score orientation: true when lower scores are better (rank-style scores).
struct FeatureRanking {
    std::string method;
    std::vector<std::pair<std::size_t, double>> entries;  // (feature_id, score)
    bool ascending = false;

    // 1-based position of every feature (position 1 = most important).
    std::vector<double> rank_positions(std::size_t n_features) const;
    void validate_permutation(std::size_t n_features) const;
};

// Inputs shared by the aggregate ranking methods: per-model global
// importances, per-model per-class importances, model accuracies, and which
// class rows count as attacks.
struct RankContext {
    std::vector<std::string> model_names;
    std::vector<double> accuracies;                       // one per model, in [0,1]
    std::vector<std::string> attack_names;                // one per attack class
    std::vector<std::size_t> attack_classes;              // class row indices of the attacks
    std::vector<std::vector<double>> model_overall;       // [model][feature]
    std::vector<Matrix> model_per_class;                  // [model]: [n_classes x n_features]
    std::size_t n_features = 0;

    void validate() const;
};

// Descending by importance; ties broken by ascending feature index.
FeatureRanking rank_from_importance(std::span<const double> importance,
                                    std::string method = "importance");

// Mean rank position across the per-model rankings (ascending score).
FeatureRanking overall_rank(const RankContext& ctx);

// Mean over models of acc_m * importance_m (descending score).
FeatureRanking weighted_rank(const RankContext& ctx);

// weighted_rank over L1-normalized per-model importances.
FeatureRanking normalized_weighted_rank(const RankContext& ctx);

// r_i = 1/2 (mean model rank + mean attack rank); attack ranks come from
// per-class importances pooled across models by mean. Lower r_i is better.
FeatureRanking models_attacks_score(const RankContext& ctx);

// Appearance count in the top-k of each input ranking; ties broken by mean
// rank position across the inputs, then feature index.
FeatureRanking combined_selection(const std::vector<FeatureRanking>& rankings, std::size_t k);

// Borda points: each ranking awards n..1 from best to worst; totals summed.
FeatureRanking voting(const std::vector<FeatureRanking>& rankings);

enum class BaselineMethod { Chi2, Correlation, Impurity, InfoGain, KBest };
std::string to_string(BaselineMethod m);
BaselineMethod baseline_method_from_string(const std::string& name);
std::span<const BaselineMethod> all_baseline_methods();

// Filter statistics on the training split: chi-square and information gain
// over 20 quantile bins, random-forest impurity importance, ANOVA F, and
// label correlation with |corr| > 0.95 redundancy pruning.
FeatureRanking baseline_rank(BaselineMethod method, const data::Dataset& train,
                             std::uint64_t seed = 0);

std::vector<std::size_t> select_top_k(const FeatureRanking& r, std::size_t k);

void save_ranking(const FeatureRanking& r, const std::string& path,
                  const std::vector<std::string>& feature_names);
FeatureRanking load_ranking(const std::string& path, const std::vector<std::string>& feature_names);

}  // namespace flowrank::ranking
