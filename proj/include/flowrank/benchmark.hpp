#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "flowrank/attribution.hpp"
#include "flowrank/flowdata.hpp"
#include "flowrank/metrics.hpp"
#include "flowrank/models.hpp"
#include "flowrank/ranking.hpp"

namespace flowrank::bench {

// Sentinel inside ExperimentConfig::k_values meaning "all features".
inline constexpr std::size_t kAllFeatures = 0;

// Method identifiers accepted in ExperimentConfig::methods.
inline constexpr const char* kModelSpecific = "model_specific";
inline constexpr const char* kOverallRank = "overall_rank";
inline constexpr const char* kWeightedRank = "weighted_rank";
inline constexpr const char* kNormalizedWeightedRank = "normalized_weighted_rank";
inline constexpr const char* kModelsAttacks = "models_attacks";
inline constexpr const char* kCombined = "combined";
inline constexpr const char* kVoting = "voting";
inline constexpr const char* kAllFeaturesMethod = "all_features";

std::vector<std::string> proposed_methods();   // the six aggregate/XAI methods
std::vector<std::string> baseline_methods();   // chi2, correlation, impurity, infogain, kbest
std::vector<std::string> default_methods();    // proposed + voting + baselines
bool method_needs_attributions(const std::string& method);
bool is_known_method(const std::string& method);

struct ExperimentConfig {
    std::string dataset_csv;
    std::string schema_path;
    std::vector<models::ModelKind> model_kinds;   // default: all seven
    models::Hyperparams hp;
    std::vector<std::string> methods;             // default: default_methods()
    std::vector<std::size_t> k_values;            // default: {5, 10, 15, kAllFeatures}
    std::uint64_t seed = 42;
    std::size_t background_size = 100;            // coalition imputation references
    std::size_t n_explained = 2000;               // explained test samples
    std::size_t n_coalitions = 2048;              // kernel SHAP budget per sample
    std::size_t n_threads = 1;
    std::string normal_class;                     // empty = detect benign/normal, else class 0
    data::NonFinitePolicy nonfinite = data::NonFinitePolicy::DropRow;

    ExperimentConfig();

    void validate() const;

    // key=value snapshot; load accepts exactly what save emits.
    void save(const std::string& path) const;
    static ExperimentConfig load(const std::string& path);
};

struct ResultRow {
    std::string model;
    std::string method;
    std::size_t k = 0;  // actual subset size (n_features on the all-features row)
    metrics::MetricSet metrics;
    std::vector<double> per_class_accuracy;
    double alert_fpr = 0.0;  // fraction of benign rows flagged as any attack
    double train_time_s = 0.0;
    double test_time_s = 0.0;
    double explain_time_s = 0.0;
};

struct ScoreBoard {
    struct Entry {
        std::string method;
        std::size_t first = 0;
        std::size_t second = 0;
        std::size_t third = 0;
        std::size_t score() const { return 3 * first + 2 * second + third; }
    };
    std::vector<Entry> entries;
    std::size_t cells = 0;  // number of (model, k) cells scored
};

// Everything a run produces; emit_reports lays it out on disk.
struct RunArtifacts {
    ExperimentConfig config;
    data::FeatureSchema schema;
    data::PreprocessReport prep;
    std::size_t normal_class = 0;
    std::vector<std::string> model_names;
    std::vector<std::unique_ptr<models::Model>> trained;        // full-feature models
    std::vector<attribution::GlobalImportance> importances;     // per model, from SHAP
    std::vector<std::pair<std::string, ranking::FeatureRanking>> rankings;  // (file stem, ranking)
    std::vector<ResultRow> rows;
    ScoreBoard board;
};

double measure_runtime(const std::function<void()>& f);

// Full selection-then-retrain grid: preprocess, train every model on all
// features, explain once, build every requested ranking, then retrain each
// model on each (method, k) subset. Deterministic given cfg.seed for any
// n_threads.
RunArtifacts run_experiment_matrix(const ExperimentConfig& cfg);

// 3/2/1 points per (model, k) cell; methods ordered by accuracy with ties
// broken by prec, rec, f1, bacc, mcc, aucroc. Methods still tied after the
// whole chain share the same award.
ScoreBoard weighted_scoring(const std::vector<ResultRow>& rows,
                            const std::vector<std::string>& methods);

// Run directory: config.txt, schema.txt, preprocess_report.csv, models/,
// rankings/, metrics/, boards/, charts/.
void emit_reports(const RunArtifacts& artifacts, const std::string& out_dir);

// run_experiment_matrix + emit_reports.
RunArtifacts run_benchmark(const ExperimentConfig& cfg, const std::string& out_dir);

// metrics/results.csv persistence (timings live in runtimes.csv at the run
// root, since they are the one non-reproducible output).
void save_results_csv(const std::vector<ResultRow>& rows, const std::string& path);
std::vector<ResultRow> load_results_csv(const std::string& path);

std::size_t resolve_normal_class(const data::FeatureSchema& schema, const std::string& name);

}  // namespace flowrank::bench
