#include "flowrank/models.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "binio.hpp"

namespace flowrank::models {

namespace {

constexpr char kMagic[8] = {'F', 'R', 'K', 'M', 'D', 'L', '0', '1'};
constexpr std::uint32_t kVersion = 1;

constexpr std::array<ModelKind, 7> kAllKinds = {
    ModelKind::DecisionTree, ModelKind::RandomForest, ModelKind::AdaBoost, ModelKind::KNN,
    ModelKind::LinearSVM,    ModelKind::MLP,          ModelKind::GBDT,
};

void softmax_into(std::span<double> v) {
    const double m = *std::max_element(v.begin(), v.end());
    double sum = 0.0;
    for (double& s : v) {
        s = std::exp(s - m);
        sum += s;
    }
    for (double& s : v) s /= sum;
}

void write_tree(std::ostream& os, const tree::Tree& t) {
    detail::write_u64(os, t.nodes.size());
    for (const auto& n : t.nodes) {
        detail::write_i32(os, n.feature);
        detail::write_f64(os, n.threshold);
        detail::write_i32(os, n.left);
        detail::write_i32(os, n.right);
        detail::write_f64_vec(os, n.value);
    }
}

tree::Tree read_tree(std::istream& is) {
    tree::Tree t;
    const auto n_nodes = detail::read_u64(is);
    t.nodes.resize(n_nodes);
    for (auto& n : t.nodes) {
        n.feature = detail::read_i32(is);
        n.threshold = detail::read_f64(is);
        n.left = detail::read_i32(is);
        n.right = detail::read_i32(is);
        n.value = detail::read_f64_vec(is);
    }
    return t;
}

}  // namespace

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::DecisionTree: return "decision_tree";
        case ModelKind::RandomForest: return "random_forest";
        case ModelKind::AdaBoost: return "adaboost";
        case ModelKind::KNN: return "knn";
        case ModelKind::LinearSVM: return "linear_svm";
        case ModelKind::MLP: return "mlp";
        case ModelKind::GBDT: return "gbdt";
    }
    throw InternalError("unknown model kind");
}

ModelKind model_kind_from_string(const std::string& name) {
    for (ModelKind k : kAllKinds)
        if (to_string(k) == name) return k;
    throw UsageError("unknown model kind '" + name +
                     "' (expected one of decision_tree, random_forest, adaboost, knn, linear_svm, "
                     "mlp, gbdt)");
}

std::span<const ModelKind> all_model_kinds() { return kAllKinds; }

void Hyperparams::validate() const {
    if (tree_max_depth < 1) throw UsageError("hyperparams: tree_max_depth must be >= 1");
    if (min_samples_split < 2) throw UsageError("hyperparams: min_samples_split must be >= 2");
    if (rf_trees < 1) throw UsageError("hyperparams: rf_trees must be >= 1");
    if (ada_stages < 1) throw UsageError("hyperparams: ada_stages must be >= 1");
    if (knn_k < 1) throw UsageError("hyperparams: knn_k must be >= 1");
    if (svm_c <= 0) throw UsageError("hyperparams: svm_c must be > 0");
    if (svm_epochs < 1) throw UsageError("hyperparams: svm_epochs must be >= 1");
    if (mlp_dropout < 0 || mlp_dropout >= 1) throw UsageError("hyperparams: mlp_dropout must be in [0,1)");
    if (mlp_epochs < 1) throw UsageError("hyperparams: mlp_epochs must be >= 1");
    if (mlp_batch < 1) throw UsageError("hyperparams: mlp_batch must be >= 1");
    if (mlp_lr <= 0) throw UsageError("hyperparams: mlp_lr must be > 0");
    for (std::size_t h : mlp_hidden)
        if (h < 1) throw UsageError("hyperparams: mlp hidden sizes must be >= 1");
    if (gbdt_lr <= 0) throw UsageError("hyperparams: gbdt_lr must be > 0");
    if (gbdt_stages < 1) throw UsageError("hyperparams: gbdt_stages must be >= 1");
    if (gbdt_depth < 1) throw UsageError("hyperparams: gbdt_depth must be >= 1");
    if (gbdt_lambda < 0) throw UsageError("hyperparams: gbdt_lambda must be >= 0");
}

void Model::check_row(std::span<const double> row) const {
    if (row.size() != n_features_)
        throw ShapeError("predict: expected " + std::to_string(n_features_) + " features, got " +
                         std::to_string(row.size()));
}

void Model::check_target(std::size_t target) const {
    if (target >= n_classes_) throw LabelError("target class out of range");
}

std::vector<double> Model::predict_proba(std::span<const double> row) const {
    std::vector<double> out(n_classes_);
    predict_proba_into(row, out);
    return out;
}

Matrix Model::predict_proba(const Matrix& x) const {
    if (x.cols() != n_features_)
        throw ShapeError("predict: expected " + std::to_string(n_features_) + " features, got " +
                         std::to_string(x.cols()));
    Matrix out(x.rows(), n_classes_);
    for (std::size_t i = 0; i < x.rows(); ++i) predict_proba_into(x.row(i), out.row(i));
    return out;
}

std::size_t Model::predict_label(std::span<const double> row) const {
    std::vector<double> p(n_classes_);
    predict_proba_into(row, p);
    return argmax_tie_low(p);
}

std::vector<std::size_t> Model::predict_labels(const Matrix& x) const {
    if (x.cols() != n_features_)
        throw ShapeError("predict: expected " + std::to_string(n_features_) + " features, got " +
                         std::to_string(x.cols()));
    std::vector<std::size_t> out(x.rows());
    std::vector<double> p(n_classes_);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        predict_proba_into(x.row(i), p);
        out[i] = argmax_tie_low(p);
    }
    return out;
}

double Model::logit(std::span<const double>, std::size_t) const {
    throw CapabilityError(to_string(kind()) + " has no logit surface");
}

std::vector<double> Model::input_gradient(std::span<const double>, std::size_t) const {
    throw CapabilityError(to_string(kind()) + " is not differentiable");
}

std::vector<double> Model::deconv_gradient(std::span<const double>, std::size_t) const {
    throw CapabilityError(to_string(kind()) + " has no backward pass");
}

// ---------------------------------------------------------------- DecisionTree

DecisionTreeModel::DecisionTreeModel(tree::Tree t, std::size_t n_features, std::size_t n_classes,
                                     std::uint64_t seed)
    : Model(n_features, n_classes, seed), tree_(std::move(t)) {
    if (tree_.nodes.empty()) throw InternalError("decision tree: empty tree");
}

void DecisionTreeModel::predict_proba_into(std::span<const double> row, std::span<double> out) const {
    check_row(row);
    const auto& dist = tree_.predict(row);
    std::copy(dist.begin(), dist.end(), out.begin());
}

void DecisionTreeModel::save(std::ostream& os) const { write_tree(os, tree_); }

// ---------------------------------------------------------------- RandomForest

RandomForestModel::RandomForestModel(std::vector<tree::Tree> trees, std::size_t n_features,
                                     std::size_t n_classes, std::uint64_t seed,
                                     std::vector<double> importances)
    : Model(n_features, n_classes, seed), trees_(std::move(trees)), importances_(std::move(importances)) {
    if (trees_.empty()) throw InternalError("random forest: no trees");
}

void RandomForestModel::predict_proba_into(std::span<const double> row, std::span<double> out) const {
    check_row(row);
    std::fill(out.begin(), out.end(), 0.0);
    for (const auto& t : trees_) {
        const auto& dist = t.predict(row);
        for (std::size_t c = 0; c < out.size(); ++c) out[c] += dist[c];
    }
    const auto nt = static_cast<double>(trees_.size());
    for (double& v : out) v /= nt;
}

void RandomForestModel::save(std::ostream& os) const {
    detail::write_u64(os, trees_.size());
    for (const auto& t : trees_) write_tree(os, t);
    detail::write_f64_vec(os, importances_);
}

// ---------------------------------------------------------------- AdaBoost

AdaBoostModel::AdaBoostModel(std::vector<tree::Tree> stumps, std::vector<double> alphas,
                             std::size_t n_features, std::size_t n_classes, std::uint64_t seed)
    : Model(n_features, n_classes, seed), stumps_(std::move(stumps)), alphas_(std::move(alphas)) {
    if (stumps_.empty() || stumps_.size() != alphas_.size())
        throw InternalError("adaboost: stage/weight mismatch");
}

void AdaBoostModel::predict_proba_into(std::span<const double> row, std::span<double> out) const {
    check_row(row);
    std::fill(out.begin(), out.end(), 0.0);
    double total = 0.0;
    for (std::size_t m = 0; m < stumps_.size(); ++m) {
        const auto& dist = stumps_[m].predict(row);
        out[argmax_tie_low(dist)] += alphas_[m];
        total += alphas_[m];
    }
    if (total <= 0.0) {
        std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(out.size()));
        return;
    }
    for (double& v : out) v /= total;
}

void AdaBoostModel::save(std::ostream& os) const {
    detail::write_u64(os, stumps_.size());
    for (std::size_t m = 0; m < stumps_.size(); ++m) {
        write_tree(os, stumps_[m]);
        detail::write_f64(os, alphas_[m]);
    }
}

// ---------------------------------------------------------------- KNN

KnnModel::KnnModel(Matrix train_x, std::vector<std::size_t> train_y, std::size_t k,
                   std::size_t n_classes, std::uint64_t seed)
    : Model(train_x.cols(), n_classes, seed),
      train_x_(std::move(train_x)),
      train_y_(std::move(train_y)),
      k_(k) {
    if (k_ == 0 || k_ > train_x_.rows()) throw DataError("knn: k outside [1, n_train]");
    if (train_y_.size() != train_x_.rows()) throw ShapeError("knn: labels/rows mismatch");
}

void KnnModel::predict_proba_into(std::span<const double> row, std::span<double> out) const {
    check_row(row);
    // k nearest by (squared distance, row index); ties resolve to lower index.
    std::vector<std::pair<double, std::uint32_t>> best;
    best.reserve(k_ + 1);
    const std::size_t d = train_x_.cols();
    for (std::size_t r = 0; r < train_x_.rows(); ++r) {
        const auto tr = train_x_.row(r);
        double dist = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double diff = row[j] - tr[j];
            dist += diff * diff;
        }
        const std::pair<double, std::uint32_t> cand{dist, static_cast<std::uint32_t>(r)};
        if (best.size() < k_) {
            best.insert(std::upper_bound(best.begin(), best.end(), cand), cand);
        } else if (cand < best.back()) {
            best.back() = cand;
            std::size_t i = best.size() - 1;
            while (i > 0 && best[i] < best[i - 1]) {
                std::swap(best[i], best[i - 1]);
                --i;
            }
        }
    }
    std::fill(out.begin(), out.end(), 0.0);
    for (const auto& [dist, r] : best) out[train_y_[r]] += 1.0;
    for (double& v : out) v /= static_cast<double>(k_);
}

void KnnModel::save(std::ostream& os) const {
    detail::write_u64(os, k_);
    detail::write_u64(os, train_x_.rows());
    detail::write_u64(os, train_x_.cols());
    for (std::size_t r = 0; r < train_x_.rows(); ++r)
        for (double v : train_x_.row(r)) detail::write_f64(os, v);
    for (std::size_t label : train_y_) detail::write_u64(os, label);
}

// ---------------------------------------------------------------- LinearSVM

LinearSvmModel::LinearSvmModel(Matrix w, std::vector<double> b, std::uint64_t seed)
    : Model(w.cols(), w.rows(), seed), w_(std::move(w)), b_(std::move(b)) {
    if (b_.size() != w_.rows()) throw ShapeError("linear svm: bias/class mismatch");
}

void LinearSvmModel::predict_proba_into(std::span<const double> row, std::span<double> out) const {
    check_row(row);
    for (std::size_t c = 0; c < w_.rows(); ++c) {
        double s = b_[c];
        const auto wc = w_.row(c);
        for (std::size_t j = 0; j < w_.cols(); ++j) s += wc[j] * row[j];
        out[c] = s;
    }
    softmax_into(out);
}

void LinearSvmModel::save(std::ostream& os) const {
    detail::write_u64(os, w_.rows());
    detail::write_u64(os, w_.cols());
    for (std::size_t r = 0; r < w_.rows(); ++r)
        for (double v : w_.row(r)) detail::write_f64(os, v);
    detail::write_f64_vec(os, b_);
}

// ---------------------------------------------------------------- GBDT

GbdtModel::GbdtModel(std::vector<double> init_score, std::vector<tree::Tree> trees,
                     double learning_rate, std::size_t n_features, std::size_t n_classes,
                     std::uint64_t seed)
    : Model(n_features, n_classes, seed),
      init_score_(std::move(init_score)),
      trees_(std::move(trees)),
      learning_rate_(learning_rate) {
    if (init_score_.size() != n_classes) throw ShapeError("gbdt: init score size");
    if (trees_.empty() || trees_.size() % n_classes != 0) throw InternalError("gbdt: tree layout");
}

void GbdtModel::predict_proba_into(std::span<const double> row, std::span<double> out) const {
    check_row(row);
    const std::size_t k = n_classes();
    for (std::size_t c = 0; c < k; ++c) out[c] = init_score_[c];
    for (std::size_t t = 0; t < trees_.size(); ++t)
        out[t % k] += learning_rate_ * trees_[t].predict(row)[0];
    softmax_into(out);
}

std::vector<double> GbdtModel::raw_scores(std::span<const double> row) const {
    check_row(row);
    std::vector<double> s(init_score_);
    for (std::size_t t = 0; t < trees_.size(); ++t)
        s[t % n_classes()] += learning_rate_ * trees_[t].predict(row)[0];
    return s;
}

void GbdtModel::save(std::ostream& os) const {
    detail::write_f64(os, learning_rate_);
    detail::write_f64_vec(os, init_score_);
    detail::write_u64(os, trees_.size());
    for (const auto& t : trees_) write_tree(os, t);
}

// ---------------------------------------------------------------- training

namespace {

void validate_training_inputs(const Matrix& x, const std::vector<std::size_t>& y,
                              std::size_t n_classes) {
    if (x.rows() == 0 || x.cols() == 0) throw DataError("train: empty training set");
    if (y.size() != x.rows()) throw ShapeError("train: labels/rows mismatch");
    if (n_classes < 2) throw DataError("train: need at least two classes");
    if (!x.all_finite()) throw DataError("train: non-finite feature values");
    std::vector<char> seen(n_classes, 0);
    for (std::size_t label : y) {
        if (label >= n_classes) throw LabelError("train: label out of range");
        seen[label] = 1;
    }
    if (std::count(seen.begin(), seen.end(), char(1)) < 2)
        throw DataError("train: single-class training set");
}

std::unique_ptr<Model> train_decision_tree(const Matrix& x, const std::vector<std::size_t>& y,
                                           std::size_t n_classes, const Hyperparams& hp,
                                           std::uint64_t seed) {
    const auto binned = tree::BinnedData::build(x, hp.max_thresholds);
    std::vector<std::uint32_t> rows(x.rows());
    std::iota(rows.begin(), rows.end(), 0);
    tree::GrowConfig cfg;
    cfg.max_depth = hp.tree_max_depth;
    cfg.min_samples_split = hp.min_samples_split;
    auto rng = make_rng(mix_seed(seed, 1));
    auto t = tree::grow_classification(binned, y, {}, rows, n_classes, cfg, rng);
    return std::make_unique<DecisionTreeModel>(std::move(t), x.cols(), n_classes, seed);
}

std::unique_ptr<Model> train_random_forest(const Matrix& x, const std::vector<std::size_t>& y,
                                           std::size_t n_classes, const Hyperparams& hp,
                                           std::uint64_t seed, std::size_t n_threads) {
    const auto binned = tree::BinnedData::build(x, hp.max_thresholds);
    const std::size_t n = x.rows();
    tree::GrowConfig cfg;
    cfg.max_depth = hp.tree_max_depth;
    cfg.min_samples_split = hp.min_samples_split;
    cfg.feature_subsample =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(x.cols()))));

    std::vector<tree::Tree> trees(hp.rf_trees);
    std::vector<std::vector<double>> tree_imp(hp.rf_trees);
    parallel_for(hp.rf_trees, n_threads, [&](std::size_t t) {
        auto rng = make_rng(mix_seed(seed, 1000 + t));
        std::vector<std::uint32_t> rows(n);
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        for (auto& r : rows) r = static_cast<std::uint32_t>(pick(rng));
        tree_imp[t].assign(x.cols(), 0.0);
        trees[t] = tree::grow_classification(binned, y, {}, rows, n_classes, cfg, rng, &tree_imp[t]);
    });

    std::vector<double> importances(x.cols(), 0.0);
    for (const auto& imp : tree_imp)
        for (std::size_t j = 0; j < importances.size(); ++j) importances[j] += imp[j];
    for (double& v : importances) v /= static_cast<double>(hp.rf_trees);
    return std::make_unique<RandomForestModel>(std::move(trees), x.cols(), n_classes, seed,
                                               std::move(importances));
}

std::unique_ptr<Model> train_adaboost(const Matrix& x, const std::vector<std::size_t>& y,
                                      std::size_t n_classes, const Hyperparams& hp,
                                      std::uint64_t seed) {
    const auto binned = tree::BinnedData::build(x, hp.max_thresholds);
    const std::size_t n = x.rows();
    const auto kd = static_cast<double>(n_classes);
    std::vector<std::uint32_t> rows(n);
    std::iota(rows.begin(), rows.end(), 0);
    tree::GrowConfig cfg;
    cfg.max_depth = 1;
    cfg.min_samples_split = hp.min_samples_split;

    std::vector<double> w(n, 1.0 / static_cast<double>(n));
    std::vector<tree::Tree> stumps;
    std::vector<double> alphas;
    std::vector<std::size_t> pred(n);
    for (std::size_t m = 0; m < hp.ada_stages; ++m) {
        auto rng = make_rng(mix_seed(seed, 2000 + m));
        auto stump = tree::grow_classification(binned, y, w, rows, n_classes, cfg, rng);
        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            pred[i] = argmax_tie_low(stump.predict(x.row(i)));
            if (pred[i] != y[i]) err += w[i];
        }
        if (err <= 0.0) {
            // perfect stage: dominate the vote and stop boosting
            constexpr double eps = 1e-10;
            stumps.push_back(std::move(stump));
            alphas.push_back(std::log((1.0 - eps) / eps) + std::log(kd - 1.0));
            break;
        }
        if (err >= 1.0 - 1.0 / kd) {
            if (stumps.empty())
                throw InternalError("adaboost: base stump no better than random guessing");
            break;
        }
        const double alpha = std::log((1.0 - err) / err) + std::log(kd - 1.0);
        stumps.push_back(std::move(stump));
        alphas.push_back(alpha);
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (pred[i] != y[i]) w[i] *= std::exp(alpha);
            total += w[i];
        }
        for (double& wi : w) wi /= total;
    }
    return std::make_unique<AdaBoostModel>(std::move(stumps), std::move(alphas), x.cols(), n_classes,
                                           seed);
}

std::unique_ptr<Model> train_linear_svm(const Matrix& x, const std::vector<std::size_t>& y,
                                        std::size_t n_classes, const Hyperparams& hp,
                                        std::uint64_t seed) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    const double lambda = 1.0 / (hp.svm_c * static_cast<double>(n));

    Matrix w(n_classes, d);
    std::vector<double> b(n_classes, 0.0);
    std::vector<std::uint32_t> order(n);
    for (std::size_t c = 0; c < n_classes; ++c) {
        auto rng = make_rng(mix_seed(seed, 3000 + c));
        std::iota(order.begin(), order.end(), 0);
        std::vector<double> wc(d, 0.0), wavg(d, 0.0);
        double bc = 0.0, bavg = 0.0;
        std::size_t avg_n = 0, t = 0;
        for (std::size_t epoch = 0; epoch < hp.svm_epochs; ++epoch) {
            std::shuffle(order.begin(), order.end(), rng);
            const bool last = epoch + 1 == hp.svm_epochs;
            for (std::uint32_t i : order) {
                ++t;
                const double eta = 1.0 / (lambda * static_cast<double>(t));
                const double yi = y[i] == c ? 1.0 : -1.0;
                const auto xi = x.row(i);
                double margin = bc;
                for (std::size_t j = 0; j < d; ++j) margin += wc[j] * xi[j];
                margin *= yi;
                const double scale = 1.0 - eta * lambda;
                if (margin < 1.0) {
                    const double step = eta * yi;
                    for (std::size_t j = 0; j < d; ++j) wc[j] = scale * wc[j] + step * xi[j];
                    bc += step;
                } else {
                    for (std::size_t j = 0; j < d; ++j) wc[j] *= scale;
                }
                if (last) {
                    // tail averaging over the final epoch stabilises the iterate
                    for (std::size_t j = 0; j < d; ++j) wavg[j] += wc[j];
                    bavg += bc;
                    ++avg_n;
                }
            }
        }
        for (std::size_t j = 0; j < d; ++j) w.at(c, j) = wavg[j] / static_cast<double>(avg_n);
        b[c] = bavg / static_cast<double>(avg_n);
    }
    return std::make_unique<LinearSvmModel>(std::move(w), std::move(b), seed);
}

std::unique_ptr<Model> train_gbdt(const Matrix& x, const std::vector<std::size_t>& y,
                                  std::size_t n_classes, const Hyperparams& hp, std::uint64_t seed) {
    const auto binned = tree::BinnedData::build(x, hp.max_thresholds);
    const std::size_t n = x.rows();
    const std::size_t k = n_classes;

    std::vector<double> counts(k, 0.0);
    for (std::size_t label : y) counts[label] += 1.0;
    std::vector<double> init(k);
    for (std::size_t c = 0; c < k; ++c)
        init[c] = std::log((counts[c] + 1.0) / (static_cast<double>(n) + static_cast<double>(k)));

    std::vector<double> score(n * k);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < k; ++c) score[i * k + c] = init[c];

    std::vector<std::uint32_t> rows(n);
    std::iota(rows.begin(), rows.end(), 0);
    tree::GrowConfig cfg;
    cfg.max_depth = hp.gbdt_depth;
    cfg.min_samples_split = hp.min_samples_split;

    std::vector<tree::Tree> trees;
    trees.reserve(hp.gbdt_stages * k);
    std::vector<double> p(k), grad(n), hess(n);
    Matrix prob(n, k);
    for (std::size_t stage = 0; stage < hp.gbdt_stages; ++stage) {
        for (std::size_t i = 0; i < n; ++i) {
            auto pi = prob.row(i);
            for (std::size_t c = 0; c < k; ++c) pi[c] = score[i * k + c];
            softmax_into(pi);
        }
        for (std::size_t c = 0; c < k; ++c) {
            for (std::size_t i = 0; i < n; ++i) {
                const double pic = prob.at(i, c);
                grad[i] = pic - (y[i] == c ? 1.0 : 0.0);
                hess[i] = std::max(pic * (1.0 - pic), 1e-16);
            }
            auto rng = make_rng(mix_seed(seed, 4000 + stage * k + c));
            auto t = tree::grow_regression(binned, grad, hess, rows, cfg, hp.gbdt_lambda, rng);
            for (std::size_t i = 0; i < n; ++i)
                score[i * k + c] += hp.gbdt_lr * t.predict(x.row(i))[0];
            trees.push_back(std::move(t));
        }
    }
    return std::make_unique<GbdtModel>(std::move(init), std::move(trees), hp.gbdt_lr, x.cols(), k,
                                       seed);
}

}  // namespace

std::unique_ptr<Model> train(ModelKind kind, const Hyperparams& hp, const Matrix& x,
                             const std::vector<std::size_t>& y, std::size_t n_classes,
                             std::uint64_t seed, std::size_t n_threads) {
    hp.validate();
    validate_training_inputs(x, y, n_classes);
    switch (kind) {
        case ModelKind::DecisionTree: return train_decision_tree(x, y, n_classes, hp, seed);
        case ModelKind::RandomForest: return train_random_forest(x, y, n_classes, hp, seed, n_threads);
        case ModelKind::AdaBoost: return train_adaboost(x, y, n_classes, hp, seed);
        case ModelKind::KNN:
            return std::make_unique<KnnModel>(x, y, hp.knn_k, n_classes, seed);
        case ModelKind::LinearSVM: return train_linear_svm(x, y, n_classes, hp, seed);
        case ModelKind::MLP: return train_mlp(x, y, n_classes, hp, seed);
        case ModelKind::GBDT: return train_gbdt(x, y, n_classes, hp, seed);
    }
    throw InternalError("unknown model kind");
}

std::unique_ptr<Model> train(ModelKind kind, const Hyperparams& hp, const data::Dataset& data,
                             std::uint64_t seed, std::size_t n_threads) {
    return train(kind, hp, data.x, data.y, data.schema.class_names.size(), seed, n_threads);
}

// ---------------------------------------------------------------- artifacts

void save_model(const Model& m, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot open '" + path + "' for writing");
    os.write(kMagic, sizeof(kMagic));
    detail::write_u32(os, kVersion);
    detail::write_u8(os, static_cast<std::uint8_t>(m.kind()));
    detail::write_u64(os, m.n_features());
    detail::write_u64(os, m.n_classes());
    detail::write_u64(os, m.train_seed());
    m.save(os);
    if (!os) throw DataError("write failure on '" + path + "'");
}

std::unique_ptr<Model> load_model(std::istream& is) {
    char magic[8];
    if (!is.read(magic, 8) || !std::equal(magic, magic + 8, kMagic))
        throw DataError("model artifact: bad magic");
    if (detail::read_u32(is) != kVersion) throw DataError("model artifact: unsupported version");
    const auto kind = static_cast<ModelKind>(detail::read_u8(is));
    const auto n_features = static_cast<std::size_t>(detail::read_u64(is));
    const auto n_classes = static_cast<std::size_t>(detail::read_u64(is));
    const auto seed = detail::read_u64(is);

    switch (kind) {
        case ModelKind::DecisionTree:
            return std::make_unique<DecisionTreeModel>(read_tree(is), n_features, n_classes, seed);
        case ModelKind::RandomForest: {
            const auto n_trees = detail::read_u64(is);
            std::vector<tree::Tree> trees(n_trees);
            for (auto& t : trees) t = read_tree(is);
            auto imp = detail::read_f64_vec(is);
            return std::make_unique<RandomForestModel>(std::move(trees), n_features, n_classes, seed,
                                                       std::move(imp));
        }
        case ModelKind::AdaBoost: {
            const auto n_stages = detail::read_u64(is);
            std::vector<tree::Tree> stumps(n_stages);
            std::vector<double> alphas(n_stages);
            for (std::size_t m = 0; m < n_stages; ++m) {
                stumps[m] = read_tree(is);
                alphas[m] = detail::read_f64(is);
            }
            return std::make_unique<AdaBoostModel>(std::move(stumps), std::move(alphas), n_features,
                                                   n_classes, seed);
        }
        case ModelKind::KNN: {
            const auto k = static_cast<std::size_t>(detail::read_u64(is));
            const auto rows = static_cast<std::size_t>(detail::read_u64(is));
            const auto cols = static_cast<std::size_t>(detail::read_u64(is));
            Matrix x(rows, cols);
            for (std::size_t r = 0; r < rows; ++r)
                for (std::size_t c = 0; c < cols; ++c) x.at(r, c) = detail::read_f64(is);
            std::vector<std::size_t> y(rows);
            for (auto& label : y) label = static_cast<std::size_t>(detail::read_u64(is));
            return std::make_unique<KnnModel>(std::move(x), std::move(y), k, n_classes, seed);
        }
        case ModelKind::LinearSVM: {
            const auto rows = static_cast<std::size_t>(detail::read_u64(is));
            const auto cols = static_cast<std::size_t>(detail::read_u64(is));
            Matrix w(rows, cols);
            for (std::size_t r = 0; r < rows; ++r)
                for (std::size_t c = 0; c < cols; ++c) w.at(r, c) = detail::read_f64(is);
            auto b = detail::read_f64_vec(is);
            return std::make_unique<LinearSvmModel>(std::move(w), std::move(b), seed);
        }
        case ModelKind::MLP: {
            const auto n_layers = detail::read_u64(is);
            std::vector<MlpModel::Layer> layers(n_layers);
            for (auto& layer : layers) {
                layer.in = static_cast<std::size_t>(detail::read_u64(is));
                layer.out = static_cast<std::size_t>(detail::read_u64(is));
                layer.w = detail::read_f64_vec(is);
                layer.b = detail::read_f64_vec(is);
            }
            return std::make_unique<MlpModel>(std::move(layers), seed);
        }
        case ModelKind::GBDT: {
            const double lr = detail::read_f64(is);
            auto init = detail::read_f64_vec(is);
            const auto n_trees = detail::read_u64(is);
            std::vector<tree::Tree> trees(n_trees);
            for (auto& t : trees) t = read_tree(is);
            return std::make_unique<GbdtModel>(std::move(init), std::move(trees), lr, n_features,
                                               n_classes, seed);
        }
    }
    throw DataError("model artifact: unknown kind byte");
}

std::unique_ptr<Model> load_model_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open '" + path + "'");
    return load_model(is);
}

}  // namespace flowrank::models
