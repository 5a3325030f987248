#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "flowrank/common.hpp"
#include "flowrank/flowdata.hpp"
#include "flowrank/tree.hpp"

namespace flowrank::models {

enum class ModelKind { DecisionTree, RandomForest, AdaBoost, KNN, LinearSVM, MLP, GBDT };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);
std::span<const ModelKind> all_model_kinds();

// One flat record; each kind reads only its own fields.
struct Hyperparams {
    // decision tree / random forest
    std::size_t tree_max_depth = 10;
    std::size_t min_samples_split = 2;
    std::size_t rf_trees = 100;
    std::size_t max_thresholds = 255;  // candidate split thresholds per feature (0 = all midpoints)
    // AdaBoost (depth-1 base trees)
    std::size_t ada_stages = 50;
    // KNN
    std::size_t knn_k = 5;
    // linear SVM (one-vs-rest hinge, stochastic subgradient)
    double svm_c = 0.5;
    std::size_t svm_epochs = 20;
    // MLP (hidden ReLU layers, softmax output, cross-entropy, Adam)
    std::vector<std::size_t> mlp_hidden = {16};
    double mlp_dropout = 0.01;
    std::size_t mlp_epochs = 11;
    std::size_t mlp_batch = 1024;
    double mlp_lr = 0.001;
    // gradient-boosted trees (softmax objective, second-order leaf values)
    double gbdt_lr = 0.1;
    std::size_t gbdt_stages = 100;
    std::size_t gbdt_depth = 3;
    double gbdt_lambda = 1.0;

    void validate() const;  // throws UsageError on out-of-range values
};

// Immutable trained classifier. Safe for concurrent read-only prediction.
class Model {
public:
    virtual ~Model() = default;
    virtual ModelKind kind() const = 0;

    std::size_t n_features() const { return n_features_; }
    std::size_t n_classes() const { return n_classes_; }
    std::uint64_t train_seed() const { return train_seed_; }

    // Probability vector over classes for one row (non-negative, sums to 1).
    virtual void predict_proba_into(std::span<const double> row, std::span<double> out) const = 0;
    std::vector<double> predict_proba(std::span<const double> row) const;
    Matrix predict_proba(const Matrix& x) const;
    std::size_t predict_label(std::span<const double> row) const;
    std::vector<std::size_t> predict_labels(const Matrix& x) const;

    // Gradient surface: only differentiable kinds (MLP) implement these; the
    // rest raise CapabilityError. Scores are pre-softmax logits.
    virtual bool differentiable() const { return false; }
    virtual double logit(std::span<const double> row, std::size_t target) const;
    virtual std::vector<double> input_gradient(std::span<const double> row, std::size_t target) const;
    virtual std::vector<double> deconv_gradient(std::span<const double> row, std::size_t target) const;

    virtual void save(std::ostream& os) const = 0;

protected:
    Model(std::size_t n_features, std::size_t n_classes, std::uint64_t seed)
        : n_features_(n_features), n_classes_(n_classes), train_seed_(seed) {}
    void check_row(std::span<const double> row) const;
    void check_target(std::size_t target) const;

private:
    std::size_t n_features_ = 0;
    std::size_t n_classes_ = 0;
    std::uint64_t train_seed_ = 0;
};

class DecisionTreeModel final : public Model {
public:
    DecisionTreeModel(tree::Tree t, std::size_t n_features, std::size_t n_classes, std::uint64_t seed = 0);
    ModelKind kind() const override { return ModelKind::DecisionTree; }
    void predict_proba_into(std::span<const double> row, std::span<double> out) const override;
    void save(std::ostream& os) const override;
    const tree::Tree& decision_tree() const { return tree_; }

private:
    tree::Tree tree_;
};

class RandomForestModel final : public Model {
public:
    RandomForestModel(std::vector<tree::Tree> trees, std::size_t n_features, std::size_t n_classes,
                      std::uint64_t seed = 0, std::vector<double> importances = {});
    ModelKind kind() const override { return ModelKind::RandomForest; }
    void predict_proba_into(std::span<const double> row, std::span<double> out) const override;
    void save(std::ostream& os) const override;
    const std::vector<tree::Tree>& trees() const { return trees_; }
    // Mean decrease in impurity, averaged over trees; may be empty for
    // hand-assembled forests.
    const std::vector<double>& feature_importances() const { return importances_; }

private:
    std::vector<tree::Tree> trees_;
    std::vector<double> importances_;
};

class AdaBoostModel final : public Model {
public:
    AdaBoostModel(std::vector<tree::Tree> stumps, std::vector<double> alphas, std::size_t n_features,
                  std::size_t n_classes, std::uint64_t seed = 0);
    ModelKind kind() const override { return ModelKind::AdaBoost; }
    void predict_proba_into(std::span<const double> row, std::span<double> out) const override;
    void save(std::ostream& os) const override;
    const std::vector<tree::Tree>& stumps() const { return stumps_; }
    const std::vector<double>& alphas() const { return alphas_; }

private:
    std::vector<tree::Tree> stumps_;
    std::vector<double> alphas_;
};

class KnnModel final : public Model {
public:
    KnnModel(Matrix train_x, std::vector<std::size_t> train_y, std::size_t k, std::size_t n_classes,
             std::uint64_t seed = 0);
    ModelKind kind() const override { return ModelKind::KNN; }
    void predict_proba_into(std::span<const double> row, std::span<double> out) const override;
    void save(std::ostream& os) const override;
    std::size_t k() const { return k_; }

private:
    Matrix train_x_;
    std::vector<std::size_t> train_y_;
    std::size_t k_ = 0;
};

class LinearSvmModel final : public Model {
public:
    // w is [n_classes x n_features]; probabilities are softmax over scores.
    LinearSvmModel(Matrix w, std::vector<double> b, std::uint64_t seed = 0);
    ModelKind kind() const override { return ModelKind::LinearSVM; }
    void predict_proba_into(std::span<const double> row, std::span<double> out) const override;
    void save(std::ostream& os) const override;
    const Matrix& weights() const { return w_; }
    const std::vector<double>& bias() const { return b_; }

private:
    Matrix w_;
    std::vector<double> b_;
};

class MlpModel final : public Model {
public:
    struct Layer {
        std::size_t in = 0;
        std::size_t out = 0;
        std::vector<double> w;  // row-major [out][in]
        std::vector<double> b;  // [out]
    };

    // ReLU after every layer but the last; softmax applied at prediction.
    // An MLP with no hidden layer (one Layer) is a linear softmax model.
    explicit MlpModel(std::vector<Layer> layers, std::uint64_t seed = 0);
    ModelKind kind() const override { return ModelKind::MLP; }
    void predict_proba_into(std::span<const double> row, std::span<double> out) const override;
    bool differentiable() const override { return true; }
    double logit(std::span<const double> row, std::size_t target) const override;
    std::vector<double> input_gradient(std::span<const double> row, std::size_t target) const override;
    std::vector<double> deconv_gradient(std::span<const double> row, std::size_t target) const override;
    void save(std::ostream& os) const override;
    const std::vector<Layer>& layers() const { return layers_; }

private:
    std::vector<Layer> layers_;
    std::vector<std::vector<double>> forward(std::span<const double> row) const;  // pre-activations per layer
    std::vector<double> backward(std::span<const double> row, std::size_t target, bool deconv) const;
};

class GbdtModel final : public Model {
public:
    // trees are stage-major: stage s, class c -> trees[s * n_classes + c].
    GbdtModel(std::vector<double> init_score, std::vector<tree::Tree> trees, double learning_rate,
              std::size_t n_features, std::size_t n_classes, std::uint64_t seed = 0);
    ModelKind kind() const override { return ModelKind::GBDT; }
    void predict_proba_into(std::span<const double> row, std::span<double> out) const override;
    void save(std::ostream& os) const override;
    std::vector<double> raw_scores(std::span<const double> row) const;
    std::size_t n_stages() const { return trees_.size() / n_classes(); }

private:
    std::vector<double> init_score_;
    std::vector<tree::Tree> trees_;
    double learning_rate_ = 0.1;
};

// Trains one model. Deterministic given (inputs, seed) for any n_threads.
std::unique_ptr<Model> train(ModelKind kind, const Hyperparams& hp, const Matrix& x,
                             const std::vector<std::size_t>& y, std::size_t n_classes,
                             std::uint64_t seed, std::size_t n_threads = 1);
std::unique_ptr<Model> train(ModelKind kind, const Hyperparams& hp, const data::Dataset& data,
                             std::uint64_t seed, std::size_t n_threads = 1);

// Implemented in mlp.cpp; exposed for direct use in tests.
std::unique_ptr<MlpModel> train_mlp(const Matrix& x, const std::vector<std::size_t>& y,
                                    std::size_t n_classes, const Hyperparams& hp, std::uint64_t seed);

// Versioned binary artifact; load reproduces predictions bit-exactly.
void save_model(const Model& m, const std::string& path);
std::unique_ptr<Model> load_model(std::istream& is);
std::unique_ptr<Model> load_model_file(const std::string& path);

}  // namespace flowrank::models
