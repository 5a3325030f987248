#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "flowrank/common.hpp"

namespace flowrank::data {

// Column layout and label vocabulary for a flow CSV. Raw label strings are
// collapsed onto class indices through label_map, so dataset-specific
// sub-labels (DoS variants and the like) can share one class.
struct FeatureSchema {
    std::vector<std::string> feature_names;
    std::string label_column;
    std::map<std::string, std::size_t> label_map;  // raw label -> class index
    std::vector<std::string> class_names;

    std::size_t n_features() const { return feature_names.size(); }
    std::size_t n_classes() const { return class_names.size(); }

    void validate() const;

    // Plain-text key=value schema file: label_column=, feature=, class=,
    // map=<raw>:<class name>. A class maps to itself implicitly.
    static FeatureSchema load(const std::string& path);
    void save(const std::string& path) const;
};

struct Dataset {
    Matrix x;                    // [n_samples x n_features]
    std::vector<std::size_t> y;  // class indices
    FeatureSchema schema;

    std::size_t size() const { return x.rows(); }
    std::size_t n_features() const { return x.cols(); }
    std::size_t n_classes() const { return schema.n_classes(); }

    std::vector<std::size_t> class_counts() const;
    void validate() const;
};

struct PreprocessReport {
    std::size_t rows_in = 0;
    std::size_t duplicates_removed = 0;
    std::size_t nonfinite_cells_handled = 0;
    std::size_t nonfinite_rows_dropped = 0;
    std::map<std::string, std::size_t> per_class_before_oversample;
    std::map<std::string, std::size_t> per_class_after_oversample;
    std::vector<std::pair<double, double>> minmax_params;  // per feature (min, max)

    void merge(const PreprocessReport& delta);
    void write_csv(const std::string& path, const FeatureSchema& schema) const;
};

struct SplitSpec {
    double train_fraction = 0.70;
    std::uint64_t seed = 0;
};

enum class NonFinitePolicy { DropRow, Zero, Median };

NonFinitePolicy parse_nonfinite_policy(const std::string& name);
std::string to_string(NonFinitePolicy policy);

// CSV ingestion against a schema. Labels are mapped through
// schema.label_map; non-finite cells are handled per policy.
std::pair<Dataset, PreprocessReport> load_csv(const std::string& path, const FeatureSchema& schema,
                                              NonFinitePolicy policy = NonFinitePolicy::DropRow);

// Removes rows identical on (all features, label), then applies a seeded
// permutation to the survivors.
std::pair<Dataset, PreprocessReport> deduplicate_and_shuffle(const Dataset& d, std::uint64_t seed);

// Balances every class up to the majority count by seeded with-replacement
// copies of its own rows.
Dataset oversample_random(const Dataset& d, std::uint64_t seed);

struct MinMaxParams {
    std::vector<std::pair<double, double>> per_feature;  // (min, max) fit on train
};

// Fits (min, max) per column on `train`, scales train to [0,1] and applies
// the same parameters to every dataset in `others` (values there may leave
// [0,1]). A constant train column maps to 0 everywhere.
MinMaxParams minmax_fit_apply(Dataset& train, std::vector<Dataset*> others);

std::pair<Dataset, Dataset> split_train_test(const Dataset& d, const SplitSpec& spec);

// Seeded stratified subsample of at most n_target rows, preserving class
// proportions (every present class keeps at least one row).
Dataset stratified_subsample(const Dataset& d, std::size_t n_target, std::uint64_t seed);

struct SynthSpec {
    std::size_t n_samples = 0;
    std::size_t n_features = 0;
    std::size_t n_informative = 0;
    std::size_t n_classes = 2;
    double separation = 2.5;
    std::uint64_t seed = 0;
};

// Class-conditional Gaussian generator: each class gets a seeded mean vector
// on the first n_informative coordinates (scaled by `separation`); all other
// coordinates are pure N(0,1) noise independent of the label.
Dataset synth_planted(const SynthSpec& spec);

// Writes a dataset as a plain feature CSV + its schema file; the label
// column carries the class name.
void save_dataset_csv(const Dataset& d, const std::string& path);
Dataset load_prepared_csv(const std::string& path, const std::string& schema_path);

}  // namespace flowrank::data
