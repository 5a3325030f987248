#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "flowrank/attribution.hpp"
#include "flowrank/benchmark.hpp"
#include "flowrank/common.hpp"
#include "flowrank/csv.hpp"
#include "flowrank/flowdata.hpp"
#include "flowrank/metrics.hpp"
#include "flowrank/models.hpp"
#include "flowrank/ranking.hpp"

namespace fs = std::filesystem;
using namespace flowrank;

namespace {

fs::path fresh_dir(const std::string& tag) {
    static int counter = 0;
    fs::path p = fs::temp_directory_path() / ("flowrank_unit_" + tag + "_" + std::to_string(counter++));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

void write_text(const fs::path& p, const std::string& body) {
    std::ofstream os(p);
    os << body;
}

std::string read_text(const fs::path& p) {
    std::ifstream is(p);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

data::Dataset make_dataset(const std::vector<std::vector<double>>& rows,
                           std::vector<std::size_t> y, std::size_t n_classes) {
    data::Dataset d;
    d.x = Matrix::from_rows(rows);
    d.y = std::move(y);
    d.schema.label_column = "label";
    for (std::size_t j = 0; j < d.x.cols(); ++j)
        d.schema.feature_names.push_back("f" + std::to_string(j));
    for (std::size_t c = 0; c < n_classes; ++c) {
        std::string name = "class" + std::to_string(c);
        d.schema.class_names.push_back(name);
        d.schema.label_map[name] = c;
    }
    return d;
}

// Single-layer MLP = linear softmax model with logit_t(x) = w_t . x + b_t.
models::MlpModel linear_model(const Matrix& w, std::vector<double> b) {
    models::MlpModel::Layer layer;
    layer.in = w.cols();
    layer.out = w.rows();
    layer.w = w.data();
    layer.b = std::move(b);
    return models::MlpModel({layer});
}

void check_close(std::span<const double> got, std::span<const double> want, double tol) {
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(std::abs(got[i] - want[i]) <= tol);
}

std::vector<std::size_t> order_of(const ranking::FeatureRanking& r) {
    std::vector<std::size_t> ids;
    for (const auto& [id, score] : r.entries) ids.push_back(id);
    return ids;
}

}  // namespace

// ===================================================================== common

TEST_SUITE("common") {

TEST_CASE("mix_seed separates streams and is stable") {
    CHECK(mix_seed(42, 1) == mix_seed(42, 1));
    CHECK(mix_seed(42, 1) != mix_seed(42, 2));
    CHECK(mix_seed(42, 1) != mix_seed(43, 1));
}

TEST_CASE("format_double round-trips exactly") {
    for (double v : {0.0, -0.0, 1.0, -1.5, 0.1, 1.0 / 3.0, 1e-300, -2.5e300,
                     std::numeric_limits<double>::infinity()}) {
        CHECK(parse_double(format_double(v)) == v);
    }
    CHECK(format_double(0.1) == "0.1");
    CHECK_THROWS_AS(parse_double("12x"), DataError);
    CHECK_THROWS_AS(parse_double(""), DataError);
}

TEST_CASE("argmax breaks ties toward the lowest index") {
    std::vector<double> v = {0.25, 0.5, 0.5};
    CHECK(argmax_tie_low(v) == 1);
    std::vector<double> w = {0.5, 0.25, 0.5};
    CHECK(argmax_tie_low(w) == 0);
}

TEST_CASE("matrix selection and shape checks") {
    auto m = Matrix::from_rows({{1, 2, 3}, {4, 5, 6}});
    std::vector<std::size_t> cols = {2, 0};
    auto s = m.select_columns(cols);
    CHECK(s.at(0, 0) == 3);
    CHECK(s.at(1, 1) == 4);
    std::vector<std::size_t> rows = {1};
    auto r = m.select_rows(rows);
    CHECK(r.rows() == 1);
    CHECK(r.at(0, 2) == 6);
    CHECK(m.all_finite());
    m.at(0, 1) = std::nan("");
    CHECK_FALSE(m.all_finite());
    CHECK_THROWS_AS(Matrix::from_rows({{1, 2}, {3}}), ShapeError);
}

TEST_CASE("parallel_for result is independent of the worker count") {
    std::vector<double> a(101), b(101);
    auto fill = [](std::vector<double>& out) {
        return [&out](std::size_t i) {
            auto rng = make_rng(mix_seed(7, i));
            std::normal_distribution<double> dist;
            out[i] = dist(rng);
        };
    };
    parallel_for(a.size(), 1, fill(a));
    parallel_for(b.size(), 4, fill(b));
    CHECK(a == b);
}

TEST_CASE("error kinds map to the documented exit codes") {
    CHECK(UsageError("x").kind() == ErrorKind::Usage);
    CHECK(DataError("x").kind() == ErrorKind::Data);
    CHECK(SchemaError("x").kind() == ErrorKind::Data);
    CHECK(LabelError("x").kind() == ErrorKind::Data);
    CHECK(ShapeError("x").kind() == ErrorKind::Data);
    CHECK(CapabilityError("x").kind() == ErrorKind::Data);
    CHECK(InternalError("x").kind() == ErrorKind::Internal);
}

}  // TEST_SUITE common

// =================================================================== flowdata

TEST_SUITE("flowdata") {

TEST_CASE("schema file round-trip keeps classes, features and label maps") {
    auto dir = fresh_dir("schema");
    data::FeatureSchema s;
    s.label_column = "Label";
    s.feature_names = {"a", "b"};
    s.class_names = {"Normal", "DoS"};
    s.label_map = {{"Normal", 0}, {"DoS", 1}, {"BENIGN", 0}, {"DoS Hulk", 1}};
    s.save((dir / "x.schema").string());
    auto t = data::FeatureSchema::load((dir / "x.schema").string());
    CHECK(t.label_column == s.label_column);
    CHECK(t.feature_names == s.feature_names);
    CHECK(t.class_names == s.class_names);
    CHECK(t.label_map == s.label_map);
}

TEST_CASE("schema validation rejects duplicates and dangling maps") {
    data::FeatureSchema s;
    s.label_column = "label";
    s.feature_names = {"a", "a"};
    s.class_names = {"x"};
    CHECK_THROWS_AS(s.validate(), SchemaError);
    auto dir = fresh_dir("schema_bad");
    write_text(dir / "bad.schema", "label_column=l\nfeature=a\nclass=x\nmap=raw:nope\n");
    CHECK_THROWS_AS(data::FeatureSchema::load((dir / "bad.schema").string()), SchemaError);
}

TEST_CASE("load_csv tolerates flow-export header noise") {
    auto dir = fresh_dir("messy");
    // Leading spaces, a repeated column addressed as dur.1, label cell noise.
    write_text(dir / "flows.csv",
               " port, dur, dur,LBL\n"
               "80,1.5,2.5,ok\n"
               "443,3,4, bad \n");
    data::FeatureSchema s;
    s.label_column = "LBL";
    s.feature_names = {"port", "dur", "dur.1"};
    s.class_names = {"ok", "bad"};
    s.label_map = {{"ok", 0}, {"bad", 1}};
    auto [d, rep] = data::load_csv((dir / "flows.csv").string(), s);
    REQUIRE(d.size() == 2);
    CHECK(d.x.at(0, 0) == 80);
    CHECK(d.x.at(0, 1) == 1.5);
    CHECK(d.x.at(0, 2) == 2.5);
    CHECK(d.y == std::vector<std::size_t>{0, 1});
    CHECK(rep.rows_in == 2);

    s.feature_names = {"port", "missing"};
    CHECK_THROWS_AS(data::load_csv((dir / "flows.csv").string(), s), SchemaError);
}

TEST_CASE("load_csv maps raw sub-labels onto shared classes") {
    auto dir = fresh_dir("sublabel");
    write_text(dir / "flows.csv", "a,label\n1,BENIGN\n2,DoS Hulk\n3,DDoS\n");
    data::FeatureSchema s;
    s.label_column = "label";
    s.feature_names = {"a"};
    s.class_names = {"Normal", "DoS"};
    s.label_map = {{"Normal", 0}, {"DoS", 1}, {"BENIGN", 0}, {"DoS Hulk", 1}, {"DDoS", 1}};
    auto [d, rep] = data::load_csv((dir / "flows.csv").string(), s);
    CHECK(d.y == std::vector<std::size_t>{0, 1, 1});
    write_text(dir / "bad.csv", "a,label\n1,Mystery\n");
    CHECK_THROWS_AS(data::load_csv((dir / "bad.csv").string(), s), LabelError);
}

TEST_CASE("non-finite cells follow the chosen policy") {
    auto dir = fresh_dir("nonfinite");
    write_text(dir / "flows.csv",
               "a,b,label\n"
               "1,2,x\n"
               "Infinity,4,x\n"
               "5,NaN,y\n"
               "7,8,y\n");
    data::FeatureSchema s;
    s.label_column = "label";
    s.feature_names = {"a", "b"};
    s.class_names = {"x", "y"};
    s.label_map = {{"x", 0}, {"y", 1}};

    auto [drop, drop_rep] = data::load_csv((dir / "flows.csv").string(), s,
                                           data::NonFinitePolicy::DropRow);
    CHECK(drop.size() == 2);
    CHECK(drop_rep.nonfinite_rows_dropped == 2);

    auto [zero, zero_rep] = data::load_csv((dir / "flows.csv").string(), s,
                                           data::NonFinitePolicy::Zero);
    CHECK(zero.size() == 4);
    CHECK(zero.x.at(1, 0) == 0.0);
    CHECK(zero.x.at(2, 1) == 0.0);
    CHECK(zero_rep.nonfinite_cells_handled == 2);

    auto [med, med_rep] = data::load_csv((dir / "flows.csv").string(), s,
                                         data::NonFinitePolicy::Median);
    CHECK(med.size() == 4);
    CHECK(med.x.at(1, 0) == 5.0);  // median of {1, 5, 7}
    CHECK(med.x.at(2, 1) == 4.0);  // median of {2, 4, 8}
}

TEST_CASE("deduplicate_and_shuffle drops exact repeats deterministically") {
    auto d = make_dataset({{1, 2}, {1, 2}, {3, 4}, {1, 2}, {3, 5}}, {0, 0, 1, 1, 1}, 2);
    auto [out, rep] = data::deduplicate_and_shuffle(d, 9);
    // (1,2,label 0) repeats once; (1,2,label 1) differs by label and stays.
    CHECK(out.size() == 4);
    CHECK(rep.duplicates_removed == 1);
    auto [again, rep2] = data::deduplicate_and_shuffle(d, 9);
    CHECK(out.x.data() == again.x.data());
    CHECK(out.y == again.y);
}

TEST_CASE("split keeps sizes and class totals") {
    data::SynthSpec spec{.n_samples = 600, .n_features = 4, .n_informative = 2,
                         .n_classes = 3, .separation = 2.0, .seed = 5};
    auto d = data::synth_planted(spec);
    auto [train, test] = data::split_train_test(d, {0.70, 11});
    CHECK(train.size() == 420);
    CHECK(test.size() == 180);
    auto all = d.class_counts();
    auto tr = train.class_counts();
    auto te = test.class_counts();
    for (std::size_t c = 0; c < 3; ++c) CHECK(tr[c] + te[c] == all[c]);
}

TEST_CASE("oversampling balances every class to the majority count") {
    auto d = make_dataset({{0}, {1}, {2}, {3}, {4}, {5}}, {0, 0, 0, 0, 1, 2}, 3);
    auto out = data::oversample_random(d, 3);
    auto counts = out.class_counts();
    CHECK(counts == std::vector<std::size_t>{4, 4, 4});
    // Originals stay in place; copies of minority rows append at the end.
    CHECK(out.size() == 12);
    for (std::size_t i = 0; i < d.size(); ++i) CHECK(out.x.at(i, 0) == d.x.at(i, 0));
}

TEST_CASE("minmax maps train to [0,1] and extrapolates on test") {
    auto train = make_dataset({{0, 5}, {10, 5}}, {0, 1}, 2);
    auto test = make_dataset({{20, 5}}, {0}, 2);
    auto params = data::minmax_fit_apply(train, {&test});
    CHECK(params.per_feature[0] == std::pair<double, double>{0.0, 10.0});
    CHECK(train.x.at(0, 0) == 0.0);
    CHECK(train.x.at(1, 0) == 1.0);
    CHECK(test.x.at(0, 0) == 2.0);  // (20 - 0) / (10 - 0)
    // Constant columns collapse to zero everywhere.
    CHECK(train.x.at(0, 1) == 0.0);
    CHECK(test.x.at(0, 1) == 0.0);
}

TEST_CASE("stratified subsample keeps proportions and all classes") {
    data::SynthSpec spec{.n_samples = 1000, .n_features = 3, .n_informative = 1,
                         .n_classes = 4, .separation = 1.0, .seed = 3};
    auto d = data::synth_planted(spec);
    auto s = data::stratified_subsample(d, 100, 17);
    CHECK(s.size() >= 96);
    CHECK(s.size() <= 104);
    for (std::size_t c : s.class_counts()) CHECK(c >= 1);
    auto s2 = data::stratified_subsample(d, 100, 17);
    CHECK(s.x.data() == s2.x.data());
}

TEST_CASE("synthetic generator is balanced, finite and seeded") {
    data::SynthSpec spec{.n_samples = 500, .n_features = 6, .n_informative = 2,
                         .n_classes = 5, .separation = 2.5, .seed = 21};
    auto d = data::synth_planted(spec);
    CHECK(d.size() == 500);
    CHECK(d.n_features() == 6);
    CHECK(d.class_counts() == std::vector<std::size_t>{100, 100, 100, 100, 100});
    CHECK(d.x.all_finite());
    auto e = data::synth_planted(spec);
    CHECK(d.x.data() == e.x.data());
    CHECK(d.y == e.y);
}

TEST_CASE("prepared csv round-trip is bit exact") {
    data::SynthSpec spec{.n_samples = 50, .n_features = 4, .n_informative = 2,
                         .n_classes = 3, .separation = 2.5, .seed = 8};
    auto d = data::synth_planted(spec);
    auto dir = fresh_dir("prepared");
    auto csv_path = (dir / "d.csv").string();
    data::save_dataset_csv(d, csv_path);
    d.schema.save((dir / "d.schema").string());
    auto back = data::load_prepared_csv(csv_path, (dir / "d.schema").string());
    CHECK(back.x.data() == d.x.data());
    CHECK(back.y == d.y);
    CHECK(back.schema.feature_names == d.schema.feature_names);
}

}  // TEST_SUITE flowdata

// ==================================================================== metrics

TEST_SUITE("metrics") {

TEST_CASE("balanced binary confusion matrix hits the textbook values") {
    std::vector<std::size_t> truth = {0, 0, 1, 1};
    std::vector<std::size_t> pred = {0, 1, 0, 1};  // TP=FP=FN=TN=1 for class 1
    auto cm = metrics::confusion(truth, pred, 2);
    CHECK(cm.at(0, 0) == 1);
    CHECK(cm.at(0, 1) == 1);
    auto m = metrics::classification_metrics(cm);
    CHECK(m.acc == 0.5);
    CHECK(m.prec == 0.5);
    CHECK(m.rec == 0.5);
    CHECK(m.f1 == 0.5);
    CHECK(m.bacc == 0.5);
    CHECK(m.mcc == 0.0);
    CHECK(m.fpr == 0.5);
    auto pca = metrics::per_class_accuracy(cm);
    CHECK(pca == std::vector<double>{0.5, 0.5});
}

TEST_CASE("three-class hand case") {
    // cm = [[2,0,0],[0,1,1],[0,0,2]]
    std::vector<std::size_t> truth = {0, 0, 1, 1, 2, 2};
    std::vector<std::size_t> pred = {0, 0, 1, 2, 2, 2};
    auto m = metrics::classification_metrics(metrics::confusion(truth, pred, 3));
    CHECK(m.acc == doctest::Approx(5.0 / 6.0).epsilon(1e-15));
    CHECK(m.bacc == doctest::Approx(5.0 / 6.0).epsilon(1e-15));  // recalls 1, 0.5, 1
}

TEST_CASE("mcc reaches the extremes on perfect and inverted predictors") {
    std::vector<std::size_t> truth = {0, 0, 1, 1};
    std::vector<std::size_t> same = truth;
    std::vector<std::size_t> flip = {1, 1, 0, 0};
    CHECK(metrics::classification_metrics(metrics::confusion(truth, same, 2)).mcc ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(metrics::classification_metrics(metrics::confusion(truth, flip, 2)).mcc ==
          doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("auc handles perfect separation and all-tied scores") {
    std::vector<std::size_t> truth = {0, 0, 1, 1};
    auto sep = Matrix::from_rows({{0.9, 0.1}, {0.8, 0.2}, {0.1, 0.9}, {0.2, 0.8}});
    CHECK(metrics::auc_roc_ovr(sep, truth) == 1.0);
    auto tied = Matrix::from_rows({{0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5}});
    CHECK(metrics::auc_roc_ovr(tied, truth) == 0.5);  // midrank ties
}

TEST_CASE("attack-alert fpr is the flagged share of benign rows") {
    metrics::ConfusionMatrix cm(3);
    cm.at(0, 0) = 93;
    cm.at(0, 1) = 4;
    cm.at(0, 2) = 3;  // 7 of 100 benign rows alerted
    cm.at(1, 1) = 10;
    cm.at(2, 0) = 5;
    CHECK(metrics::false_positive_rate(cm, 0) == doctest::Approx(0.07).epsilon(1e-15));
}

TEST_CASE("degenerate flag marks empty-class ratios") {
    std::vector<std::size_t> truth = {0, 0, 1};
    std::vector<std::size_t> pred = {0, 0, 0};  // class 1 never predicted
    auto m = metrics::classification_metrics(metrics::confusion(truth, pred, 2));
    CHECK(m.degenerate);
}

}  // TEST_SUITE metrics

// ===================================================================== models

TEST_SUITE("models") {

TEST_CASE("decision tree fits a two-level partition exactly") {
    auto d = make_dataset({{0, 0}, {0, 1}, {1, 0}, {1, 1}}, {0, 1, 2, 2}, 3);
    models::Hyperparams hp;
    auto m = models::train(models::ModelKind::DecisionTree, hp, d.x, d.y, 3, 1);
    CHECK(m->predict_labels(d.x) == d.y);
    auto p = m->predict_proba(d.x.row(0));
    CHECK(p == std::vector<double>{1.0, 0.0, 0.0});
}

TEST_CASE("binned splits sit at midpoints of neighbouring values") {
    auto d = make_dataset({{0}, {1}}, {0, 1}, 2);
    models::Hyperparams hp;
    auto m = models::train(models::ModelKind::DecisionTree, hp, d.x, d.y, 2, 1);
    std::vector<double> probe = {0.5};  // on the midpoint: routed left
    CHECK(m->predict_label(probe) == 0);
    probe[0] = 0.5000001;
    CHECK(m->predict_label(probe) == 1);
}

TEST_CASE("random forest probability is the mean of its trees") {
    using models::tree::Node;
    using models::tree::Tree;
    Tree stump_a;
    stump_a.nodes = {Node{0, 0.5, 1, 2, {}}, Node{-1, 0, -1, -1, {1.0, 0.0}},
                     Node{-1, 0, -1, -1, {0.0, 1.0}}};
    Tree stump_b;
    stump_b.nodes = {Node{1, 0.5, 1, 2, {}}, Node{-1, 0, -1, -1, {0.8, 0.2}},
                     Node{-1, 0, -1, -1, {0.3, 0.7}}};
    models::RandomForestModel rf({stump_a, stump_b}, 2, 2);
    std::vector<double> row = {0.0, 1.0};  // a -> (1,0), b -> (0.3,0.7)
    auto p = rf.predict_proba(row);
    CHECK(p[0] == doctest::Approx(0.65).epsilon(1e-15));
    CHECK(p[1] == doctest::Approx(0.35).epsilon(1e-15));
}

TEST_CASE("trained forest separates planted classes and reports importances") {
    data::SynthSpec spec{.n_samples = 800, .n_features = 6, .n_informative = 2,
                         .n_classes = 3, .separation = 3.0, .seed = 13};
    auto d = data::synth_planted(spec);
    auto [train, test] = data::split_train_test(d, {0.70, 1});
    models::Hyperparams hp;
    hp.rf_trees = 30;
    auto m = models::train(models::ModelKind::RandomForest, hp, train.x, train.y, 3, 42);
    auto pred = m->predict_labels(test.x);
    auto mm = metrics::classification_metrics(metrics::confusion(test.y, pred, 3));
    CHECK(mm.acc >= 0.9);
    const auto& imp = dynamic_cast<models::RandomForestModel&>(*m).feature_importances();
    REQUIRE(imp.size() == 6);
    // The two informative coordinates carry the top importances.
    auto top = ranking::select_top_k(ranking::rank_from_importance(imp), 2);
    CHECK(((top[0] == 0 && top[1] == 1) || (top[0] == 1 && top[1] == 0)));
}

TEST_CASE("gbdt and adaboost learn simple structure") {
    data::SynthSpec spec{.n_samples = 600, .n_features = 5, .n_informative = 2,
                         .n_classes = 2, .separation = 3.0, .seed = 19};
    auto d = data::synth_planted(spec);
    auto [train, test] = data::split_train_test(d, {0.70, 2});
    models::Hyperparams hp;
    hp.gbdt_stages = 25;
    hp.ada_stages = 25;
    for (auto kind : {models::ModelKind::GBDT, models::ModelKind::AdaBoost}) {
        auto m = models::train(kind, hp, train.x, train.y, 2, 7);
        auto mm = metrics::classification_metrics(
            metrics::confusion(test.y, m->predict_labels(test.x), 2));
        CHECK(mm.acc >= 0.9);
    }
}

TEST_CASE("knn votes among the nearest rows") {
    auto x = Matrix::from_rows({{0.0}, {0.1}, {10.0}});
    models::KnnModel knn(x, {0, 0, 1}, 3, 2);
    std::vector<double> q = {0.05};
    auto p = knn.predict_proba(q);
    CHECK(p[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    // k=1 reproduces training labels on the training rows themselves.
    models::KnnModel self(x, {0, 0, 1}, 1, 2);
    CHECK(self.predict_labels(x) == std::vector<std::size_t>{0, 0, 1});
}

TEST_CASE("linear svm separates well-separated planted classes") {
    data::SynthSpec spec{.n_samples = 1200, .n_features = 6, .n_informative = 3,
                         .n_classes = 2, .separation = 4.0, .seed = 23};
    auto d = data::synth_planted(spec);
    auto [train, test] = data::split_train_test(d, {0.70, 3});
    models::Hyperparams hp;
    auto m = models::train(models::ModelKind::LinearSVM, hp, train.x, train.y, 2, 11);
    auto mm = metrics::classification_metrics(
        metrics::confusion(test.y, m->predict_labels(test.x), 2));
    CHECK(mm.acc >= 0.95);
}

TEST_CASE("mlp learns, exposes logits and matches finite differences") {
    data::SynthSpec spec{.n_samples = 900, .n_features = 5, .n_informative = 2,
                         .n_classes = 3, .separation = 3.0, .seed = 29};
    auto d = data::synth_planted(spec);
    auto [train, test] = data::split_train_test(d, {0.70, 4});
    models::Hyperparams hp;
    // The tiny split fits in one batch, so give the optimizer real step counts.
    hp.mlp_batch = 64;
    hp.mlp_epochs = 60;
    auto m = models::train(models::ModelKind::MLP, hp, train.x, train.y, 3, 31);
    auto mm = metrics::classification_metrics(
        metrics::confusion(test.y, m->predict_labels(test.x), 3));
    CHECK(mm.acc >= 0.9);

    auto rng = make_rng(5);
    std::normal_distribution<double> dist;
    const double h = 1e-5;
    for (int probe = 0; probe < 20; ++probe) {
        std::vector<double> x(5);
        for (double& v : x) v = dist(rng);
        std::size_t target = static_cast<std::size_t>(probe) % 3;
        auto g = m->input_gradient(x, target);
        for (std::size_t j = 0; j < x.size(); ++j) {
            std::vector<double> lo = x, hi = x;
            lo[j] -= h;
            hi[j] += h;
            double fd = (m->logit(hi, target) - m->logit(lo, target)) / (2 * h);
            CHECK(std::abs(g[j] - fd) / std::max(1.0, std::abs(g[j])) <= 1e-4);
        }
    }
}

TEST_CASE("mlp probabilities are the softmax of its logits") {
    auto w = Matrix::from_rows({{1.0, -2.0}, {0.5, 0.25}, {-1.0, 0.0}});
    auto m = linear_model(w, {0.1, -0.2, 0.3});
    std::vector<double> x = {0.7, -1.3};
    std::vector<double> z(3), p(3);
    for (std::size_t t = 0; t < 3; ++t) z[t] = m.logit(x, t);
    double denom = 0;
    for (double v : z) denom += std::exp(v - z[0]);
    for (std::size_t t = 0; t < 3; ++t) p[t] = std::exp(z[t] - z[0]) / denom;
    check_close(m.predict_proba(x), p, 1e-12);
}

TEST_CASE("deconvnet pass equals the gradient when every path is positive") {
    models::MlpModel::Layer l1{2, 2, {1.0, 0.5, 0.25, 2.0}, {0.1, 0.2}};
    models::MlpModel::Layer l2{2, 2, {0.5, 1.0, 2.0, 0.25}, {0.0, 0.1}};
    models::MlpModel m({l1, l2});
    std::vector<double> x = {0.4, 0.9};  // positive weights, positive input
    check_close(m.deconv_gradient(x, 0), m.input_gradient(x, 0), 1e-15);
    check_close(m.deconv_gradient(x, 1), m.input_gradient(x, 1), 1e-15);
}

TEST_CASE("gradient surface is refused by non-differentiable kinds") {
    auto d = make_dataset({{0, 0}, {1, 1}}, {0, 1}, 2);
    models::Hyperparams hp;
    hp.rf_trees = 2;
    auto m = models::train(models::ModelKind::RandomForest, hp, d.x, d.y, 2, 1);
    CHECK_FALSE(m->differentiable());
    std::vector<double> x = {0.5, 0.5};
    CHECK_THROWS_AS(m->input_gradient(x, 0), CapabilityError);
    CHECK_THROWS_AS(m->logit(x, 0), CapabilityError);
}

TEST_CASE("every model kind survives a save/load cycle bit-exactly") {
    data::SynthSpec spec{.n_samples = 300, .n_features = 4, .n_informative = 2,
                         .n_classes = 3, .separation = 2.5, .seed = 37};
    auto d = data::synth_planted(spec);
    models::Hyperparams hp;
    hp.rf_trees = 5;
    hp.ada_stages = 5;
    hp.gbdt_stages = 5;
    hp.mlp_epochs = 3;
    hp.svm_epochs = 5;
    auto dir = fresh_dir("artifacts");
    for (auto kind : models::all_model_kinds()) {
        auto m = models::train(kind, hp, d.x, d.y, 3, 42);
        auto path = (dir / (models::to_string(kind) + ".bin")).string();
        models::save_model(*m, path);
        auto back = models::load_model_file(path);
        CHECK(back->kind() == kind);
        CHECK(back->n_features() == 4);
        CHECK(back->n_classes() == 3);
        auto p1 = m->predict_proba(d.x);
        auto p2 = back->predict_proba(d.x);
        CHECK(p1.data() == p2.data());
        // Re-saving the loaded model reproduces the artifact byte for byte.
        auto path2 = path + ".again";
        models::save_model(*back, path2);
        CHECK(read_text(path) == read_text(path2));
    }
    std::ifstream bad("/nonexistent/model.bin");
    CHECK_THROWS_AS(models::load_model_file("/nonexistent/model.bin"), DataError);
}

TEST_CASE("training is deterministic for a fixed seed") {
    data::SynthSpec spec{.n_samples = 400, .n_features = 5, .n_informative = 2,
                         .n_classes = 2, .separation = 2.0, .seed = 41};
    auto d = data::synth_planted(spec);
    models::Hyperparams hp;
    hp.rf_trees = 10;
    hp.mlp_epochs = 4;
    for (auto kind : {models::ModelKind::RandomForest, models::ModelKind::MLP,
                      models::ModelKind::GBDT}) {
        auto a = models::train(kind, hp, d.x, d.y, 2, 77);
        auto b = models::train(kind, hp, d.x, d.y, 2, 77);
        std::stringstream sa, sb;
        a->save(sa);
        b->save(sb);
        CHECK(sa.str() == sb.str());
    }
}

TEST_CASE("hyperparameter validation rejects nonsense") {
    models::Hyperparams hp;
    hp.knn_k = 0;
    CHECK_THROWS_AS(hp.validate(), UsageError);
    hp = {};
    hp.mlp_dropout = 1.5;
    CHECK_THROWS_AS(hp.validate(), UsageError);
    hp = {};
    hp.tree_max_depth = 0;
    CHECK_THROWS_AS(hp.validate(), UsageError);
}

TEST_CASE("model kind names round-trip") {
    for (auto kind : models::all_model_kinds())
        CHECK(models::model_kind_from_string(models::to_string(kind)) == kind);
    CHECK_THROWS_AS(models::model_kind_from_string("quantum"), UsageError);
}

}  // TEST_SUITE models

// ================================================================ attribution

TEST_SUITE("attribution") {

TEST_CASE("product function splits credit evenly") {
    attribution::VectorFn f = [](std::span<const double> x, std::span<double> out) {
        out[0] = x[0] * x[1];
    };
    auto bg = Matrix::from_rows({{0.0, 0.0}});
    std::vector<double> x = {1.0, 1.0};
    auto ex = attribution::kernel_shap_fn(f, 1, x, bg, attribution::kAllCoalitions, 1);
    CHECK(ex.phi.at(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(ex.phi.at(0, 1) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(ex.base[0] == 0.0);
    auto oracle = attribution::exact_shapley_fn(f, 1, x, bg);
    CHECK(oracle.at(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(oracle.at(0, 1) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("complete enumeration matches the brute-force oracle on a model") {
    data::SynthSpec spec{.n_samples = 200, .n_features = 5, .n_informative = 2,
                         .n_classes = 3, .separation = 2.5, .seed = 43};
    auto d = data::synth_planted(spec);
    models::Hyperparams hp;
    hp.rf_trees = 8;
    auto m = models::train(models::ModelKind::RandomForest, hp, d.x, d.y, 3, 3);
    auto bg = attribution::BackgroundSet::sample_from(d.x, 6, 99);
    auto x = d.x.row(0);
    auto kernel = attribution::kernel_shap(*m, x, bg, attribution::kAllCoalitions, 1);
    auto oracle = attribution::exact_shapley_oracle(*m, x, bg);
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t j = 0; j < 5; ++j)
            CHECK(std::abs(kernel.phi.at(c, j) - oracle.at(c, j)) <= 1e-9);
}

TEST_CASE("sampled budgets keep local accuracy") {
    data::SynthSpec spec{.n_samples = 100, .n_features = 8, .n_informative = 3,
                         .n_classes = 2, .separation = 2.5, .seed = 47};
    auto d = data::synth_planted(spec);
    models::Hyperparams hp;
    auto m = models::train(models::ModelKind::DecisionTree, hp, d.x, d.y, 2, 5);
    auto bg = attribution::BackgroundSet::sample_from(d.x, 5, 7);
    auto x = d.x.row(3);
    auto ex = attribution::kernel_shap(*m, x, bg, 64, 11);  // 64 < 2^8 - 2
    auto fx = m->predict_proba(x);
    for (std::size_t c = 0; c < 2; ++c) {
        double sum = ex.base[c];
        for (std::size_t j = 0; j < 8; ++j) sum += ex.phi.at(c, j);
        CHECK(std::abs(sum - fx[c]) <= 1e-8);
    }
    // Same seed, same budget: same values.
    auto ex2 = attribution::kernel_shap(*m, x, bg, 64, 11);
    CHECK(ex.phi.data() == ex2.phi.data());
}

TEST_CASE("sampled kernel shap recovers linear attributions exactly") {
    // For a linear target every complete stratum solve is exact.
    const std::vector<double> w = {2.0, -1.0, 0.5, 3.0, -0.25, 1.5};
    attribution::VectorFn f = [&](std::span<const double> x, std::span<double> out) {
        double s = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) s += w[j] * x[j];
        out[0] = s;
    };
    auto bg = Matrix::from_rows({{0.1, 0.2, 0.3, 0.4, 0.5, 0.6}});
    std::vector<double> x = {1.0, -1.0, 2.0, 0.0, 1.0, -2.0};
    auto ex = attribution::kernel_shap_fn(f, 1, x, bg, 20, 13);
    for (std::size_t j = 0; j < w.size(); ++j)
        CHECK(std::abs(ex.phi.at(0, j) - w[j] * (x[j] - bg.at(0, j))) <= 1e-8);
}

TEST_CASE("oracle satisfies the axioms") {
    auto bg = Matrix::from_rows({{0.0, 0.0, 0.0}});
    std::vector<double> x = {1.0, 2.0, 2.0};

    attribution::VectorFn with_dummy = [](std::span<const double> v, std::span<double> out) {
        out[0] = 3.0 * v[1] + v[2] * v[2];  // v[0] never matters
    };
    auto phi = attribution::exact_shapley_fn(with_dummy, 1, x, bg);
    CHECK(phi.at(0, 0) == 0.0);

    attribution::VectorFn symmetric = [](std::span<const double> v, std::span<double> out) {
        out[0] = v[1] * v[2] + v[1] + v[2];  // symmetric in the equal coordinates
    };
    auto sym = attribution::exact_shapley_fn(symmetric, 1, x, bg);
    CHECK(sym.at(0, 1) == doctest::Approx(sym.at(0, 2)).epsilon(1e-12));

    attribution::VectorFn g = [](std::span<const double> v, std::span<double> out) {
        out[0] = v[0] * v[1];
    };
    attribution::VectorFn h = [](std::span<const double> v, std::span<double> out) {
        out[0] = 2.0 * v[2] + v[0];
    };
    attribution::VectorFn gh = [&](std::span<const double> v, std::span<double> out) {
        double a, b;
        std::span<double> sa(&a, 1), sb(&b, 1);
        g(v, sa);
        h(v, sb);
        out[0] = a + b;
    };
    auto pg = attribution::exact_shapley_fn(g, 1, x, bg);
    auto ph = attribution::exact_shapley_fn(h, 1, x, bg);
    auto pgh = attribution::exact_shapley_fn(gh, 1, x, bg);
    for (std::size_t j = 0; j < 3; ++j)
        CHECK(pgh.at(0, j) == doctest::Approx(pg.at(0, j) + ph.at(0, j)).epsilon(1e-12));
}

TEST_CASE("hard feature-count limits") {
    attribution::VectorFn f = [](std::span<const double>, std::span<double> out) { out[0] = 0.0; };
    std::vector<double> x(26, 0.0);
    Matrix bg(1, 26, 0.0);
    CHECK_THROWS_AS(attribution::kernel_shap_fn(f, 1, x, bg, attribution::kAllCoalitions, 1),
                    UsageError);
    std::vector<double> x13(13, 0.0);
    Matrix bg13(1, 13, 0.0);
    CHECK_THROWS_AS(attribution::exact_shapley_fn(f, 1, x13, bg13), UsageError);
    // Sampling budgets below n_features + 2 cannot anchor the regression.
    std::vector<double> x8(8, 0.0);
    Matrix bg8(1, 8, 0.0);
    CHECK_THROWS_AS(attribution::kernel_shap_fn(f, 1, x8, bg8, 6, 1), UsageError);
}

TEST_CASE("gradient methods agree with closed forms on a linear model") {
    auto w = Matrix::from_rows({{2.0, -3.0, 0.0}, {-1.0, 0.5, 1.0}});
    auto m = linear_model(w, {0.25, -0.5});
    std::vector<double> x = {1.5, -0.5, 2.0};

    auto sal = attribution::saliency(m, x, 0);
    check_close(sal, std::vector<double>{2.0, 3.0, 0.0}, 1e-12);

    auto gi = attribution::gradient_input(m, x, 0);
    check_close(gi, std::vector<double>{3.0, 1.5, 0.0}, 1e-12);

    std::vector<double> baseline = {0.5, 0.5, 0.5};
    auto ig = attribution::integrated_gradients(m, x, baseline, 16, 0);
    check_close(ig, std::vector<double>{2.0 * 1.0, -3.0 * -1.0, 0.0}, 1e-12);

    auto smooth = attribution::noise_ensemble(m, x, 0, attribution::NoiseMode::Smooth, 8, 0.1, 3);
    check_close(smooth, std::vector<double>{2.0, -3.0, 0.0}, 1e-12);
    auto sq = attribution::noise_ensemble(m, x, 0, attribution::NoiseMode::Square, 8, 0.1, 3);
    check_close(sq, std::vector<double>{4.0, 9.0, 0.0}, 1e-12);
    auto var = attribution::noise_ensemble(m, x, 0, attribution::NoiseMode::Var, 8, 0.1, 3);
    check_close(var, std::vector<double>{0.0, 0.0, 0.0}, 1e-15);

    // Occlusion explains the probability: p_t(x) - p_t(x with x_j zeroed).
    auto occ = attribution::occlusion(m, x, 0, 0.0);
    std::vector<double> expect(3);
    auto p0 = m.predict_proba(x)[0];
    for (std::size_t j = 0; j < 3; ++j) {
        auto z = x;
        z[j] = 0.0;
        expect[j] = p0 - m.predict_proba(z)[0];
    }
    check_close(occ, expect, 1e-12);
}

TEST_CASE("lime recovers the coefficients of a linear target") {
    const std::vector<double> w = {1.5, -2.0, 0.0, 0.75};
    attribution::ScalarFn f = [&](std::span<const double> v) {
        double s = 3.0;  // intercept
        for (std::size_t j = 0; j < v.size(); ++j) s += w[j] * v[j];
        return s;
    };
    std::vector<double> x = {0.2, -0.4, 1.0, 0.6};
    auto coef = attribution::lime_fn(f, x, 2000, 0.75 * 2.0, 17, 0.1);
    REQUIRE(coef.size() == 4);
    for (std::size_t j = 0; j < 4; ++j) {
        if (w[j] == 0.0)
            CHECK(std::abs(coef[j]) <= 1e-3);  // dummy coordinate (ridge leaks a little)
        else
            CHECK(std::abs(coef[j] - w[j]) / std::abs(w[j]) <= 0.05);
    }
}

TEST_CASE("explained-row choice is seeded, sorted and unique") {
    auto rows = attribution::pick_explained_rows(1000, 64, 5);
    CHECK(rows.size() == 64);
    CHECK(std::is_sorted(rows.begin(), rows.end()));
    CHECK(std::adjacent_find(rows.begin(), rows.end()) == rows.end());
    CHECK(rows == attribution::pick_explained_rows(1000, 64, 5));
    auto all = attribution::pick_explained_rows(10, 999, 5);
    CHECK(all.size() == 10);
    CHECK(all.front() == 0);
    CHECK(all.back() == 9);
}

TEST_CASE("explanation engines are thread-count invariant") {
    data::SynthSpec spec{.n_samples = 120, .n_features = 5, .n_informative = 2,
                         .n_classes = 2, .separation = 2.5, .seed = 53};
    auto d = data::synth_planted(spec);
    models::Hyperparams hp;
    hp.mlp_epochs = 4;
    auto m = models::train(models::ModelKind::MLP, hp, d.x, d.y, 2, 9);
    auto bg = attribution::BackgroundSet::sample_from(d.x, 8, 1);

    auto a = attribution::explain_shap(*m, bg, d.x, 12, 32, 42, 1);
    auto b = attribution::explain_shap(*m, bg, d.x, 12, 32, 42, 4);
    REQUIRE(a.values.size() == b.values.size());
    CHECK(a.sample_ids == b.sample_ids);
    for (std::size_t i = 0; i < a.values.size(); ++i)
        CHECK(a.values[i].data() == b.values[i].data());

    attribution::GradConfig cfg;
    cfg.noise_samples = 4;
    cfg.ig_steps = 8;
    cfg.lime_samples = 64;
    for (auto method : attribution::all_grad_methods()) {
        auto ga = attribution::explain_gradient(*m, method, d.x, 6, cfg, 42, 1);
        auto gb = attribution::explain_gradient(*m, method, d.x, 6, cfg, 42, 3);
        for (std::size_t i = 0; i < ga.values.size(); ++i) {
            CHECK(ga.values[i].data() == gb.values[i].data());
            CHECK(ga.values[i].all_finite());
        }
    }
}

TEST_CASE("gradient engines refuse non-differentiable models where required") {
    auto d = make_dataset({{0, 0}, {1, 1}, {0, 1}, {1, 0}}, {0, 1, 1, 0}, 2);
    models::Hyperparams hp;
    hp.rf_trees = 3;
    auto m = models::train(models::ModelKind::RandomForest, hp, d.x, d.y, 2, 1);
    attribution::GradConfig cfg;
    cfg.lime_samples = 32;
    CHECK_THROWS_AS(
        attribution::explain_gradient(*m, attribution::GradMethod::Saliency, d.x, 2, cfg, 1),
        CapabilityError);
    // Perturbation methods only need predictions.
    auto occ = attribution::explain_gradient(*m, attribution::GradMethod::Occlusion, d.x, 2, cfg, 1);
    CHECK(occ.values.size() == 2);
    auto lime = attribution::explain_gradient(*m, attribution::GradMethod::Lime, d.x, 2, cfg, 1);
    CHECK(lime.values.size() == 2);
}

TEST_CASE("global importance is the mean absolute attribution") {
    attribution::AttributionMatrix a;
    a.method = "kernel_shap";
    a.sample_ids = {0, 1};
    a.n_classes = 2;
    a.n_features = 2;
    a.base = {0.5, 0.5};
    a.values = {Matrix::from_rows({{1.0, -3.0}, {0.5, 0.5}}),
                Matrix::from_rows({{-1.0, 3.0}, {1.5, -0.5}})};
    auto g = attribution::global_importance(a);
    CHECK(g.per_class.at(0, 0) == 1.0);
    CHECK(g.per_class.at(0, 1) == 3.0);
    CHECK(g.per_class.at(1, 0) == 1.0);
    CHECK(g.per_class.at(1, 1) == 0.5);
    CHECK(g.overall == std::vector<double>{1.0, 1.75});
}

TEST_CASE("importance files round-trip") {
    attribution::GlobalImportance g;
    g.per_class = Matrix::from_rows({{0.1, 0.9}, {0.25, 1.0 / 3.0}});
    g.overall = {0.175, (0.9 + 1.0 / 3.0) / 2.0};
    auto dir = fresh_dir("importance");
    auto path = (dir / "imp.csv").string();
    std::vector<std::string> feats = {"a", "b"};
    std::vector<std::string> classes = {"x", "y"};
    attribution::save_importance(g, path, feats, classes);
    auto back = attribution::load_importance(path, feats, classes);
    CHECK(back.per_class.data() == g.per_class.data());
    CHECK(back.overall == g.overall);
}

TEST_CASE("method names round-trip") {
    for (auto m : attribution::all_grad_methods())
        CHECK(attribution::grad_method_from_string(attribution::to_string(m)) == m);
    CHECK_THROWS_AS(attribution::grad_method_from_string("psychic"), UsageError);
}

}  // TEST_SUITE attribution

// ==================================================================== ranking

TEST_SUITE("ranking") {

ranking::RankContext two_model_ctx(std::vector<double> accs,
                                   std::vector<std::vector<double>> overall,
                                   std::vector<Matrix> per_class,
                                   std::vector<std::size_t> attacks) {
    ranking::RankContext ctx;
    ctx.n_features = overall.front().size();
    for (std::size_t m = 0; m < overall.size(); ++m)
        ctx.model_names.push_back("m" + std::to_string(m));
    ctx.accuracies = std::move(accs);
    ctx.model_overall = std::move(overall);
    ctx.model_per_class = std::move(per_class);
    ctx.attack_classes = attacks;
    for (std::size_t a : attacks) ctx.attack_names.push_back("atk" + std::to_string(a));
    return ctx;
}

TEST_CASE("rank_from_importance orders descending with index ties") {
    std::vector<double> imp = {0.2, 0.9, 0.2};
    auto r = ranking::rank_from_importance(imp);
    CHECK(order_of(r) == std::vector<std::size_t>{1, 0, 2});
    CHECK(r.rank_positions(3) == std::vector<double>{2, 1, 3});
    std::vector<double> bad = {0.1, std::nan("")};
    CHECK_THROWS_AS(ranking::rank_from_importance(bad), DataError);
}

TEST_CASE("overall rank averages positions across models") {
    // A ranks (f0,f1,f2) = (1,2,3); B = (2,1,3): means (1.5, 1.5, 3).
    auto ctx = two_model_ctx({1.0, 1.0}, {{3, 2, 1}, {2, 3, 1}},
                             {Matrix(1, 3, 0.0), Matrix(1, 3, 0.0)}, {});
    auto r = ranking::overall_rank(ctx);
    CHECK(order_of(r) == std::vector<std::size_t>{0, 1, 2});  // f0 before f1 on the tie
    CHECK(r.entries[0].second == 1.5);
    CHECK(r.entries[2].second == 3.0);
    CHECK(r.ascending);

    // A single model reproduces its own ranking with positions as scores.
    auto solo = two_model_ctx({1.0}, {{0.2, 0.9, 0.4}}, {Matrix(1, 3, 0.0)}, {});
    auto sr = ranking::overall_rank(solo);
    CHECK(order_of(sr) == std::vector<std::size_t>{1, 2, 0});
    CHECK(sr.entries[0].second == 1.0);
    CHECK(sr.entries[2].second == 3.0);
}

TEST_CASE("weighted rank is the accuracy-weighted mean importance") {
    auto ctx = two_model_ctx({0.9, 0.5}, {{0.5, 0.1}, {0.2, 0.1}},
                             {Matrix(1, 2, 0.0), Matrix(1, 2, 0.0)}, {});
    auto r = ranking::weighted_rank(ctx);
    CHECK(order_of(r)[0] == 0);
    CHECK(r.entries[0].second == doctest::Approx(0.275).epsilon(1e-14));  // (0.9*0.5+0.5*0.2)/2
    CHECK_FALSE(r.ascending);

    // Equal accuracies reduce to the plain mean; ties resolve by index.
    auto tie = two_model_ctx({1.0, 1.0}, {{0.25, 0.5}, {0.75, 0.5}},
                             {Matrix(1, 2, 0.0), Matrix(1, 2, 0.0)}, {});
    auto tr = ranking::weighted_rank(tie);
    CHECK(order_of(tr) == std::vector<std::size_t>{0, 1});
    CHECK(tr.entries[0].second == 0.5);
    CHECK(tr.entries[1].second == 0.5);

    // A zero-accuracy model contributes nothing.
    auto zero = two_model_ctx({0.5, 0.0}, {{4, 2}, {9, 9}},
                              {Matrix(1, 2, 0.0), Matrix(1, 2, 0.0)}, {});
    auto zr = ranking::weighted_rank(zero);
    CHECK(zr.entries[0] == std::pair<std::size_t, double>{0, 1.0});
    CHECK(zr.entries[1] == std::pair<std::size_t, double>{1, 0.5});
}

TEST_CASE("normalized weighted rank works on L1-normalized profiles") {
    // Identical normalized profiles with equal accuracies keep the ordering.
    auto same = two_model_ctx({0.5, 0.5}, {{2, 1, 1}, {4, 2, 2}},
                              {Matrix(1, 3, 0.0), Matrix(1, 3, 0.0)}, {});
    auto r = ranking::normalized_weighted_rank(same);
    CHECK(order_of(r) == std::vector<std::size_t>{0, 1, 2});
    CHECK(r.entries[0].second == 0.25);  // 0.5 * 0.5
    CHECK(r.entries[1].second == 0.125);

    // Scaling one model by 1000x changes nothing after normalization.
    auto scaled = two_model_ctx({0.5, 0.5}, {{2, 1, 1}, {4000, 2000, 2000}},
                                {Matrix(1, 3, 0.0), Matrix(1, 3, 0.0)}, {});
    auto sr = ranking::normalized_weighted_rank(scaled);
    CHECK(order_of(sr) == order_of(r));
    CHECK(sr.entries[0].second == r.entries[0].second);

    // Hand case: A [1,3] -> [0.25,0.75], B [1,1] -> [0.5,0.5].
    auto hand = two_model_ctx({0.5, 0.25}, {{1, 3}, {1, 1}},
                              {Matrix(1, 2, 0.0), Matrix(1, 2, 0.0)}, {});
    auto hr = ranking::normalized_weighted_rank(hand);
    CHECK(order_of(hr) == std::vector<std::size_t>{1, 0});
    CHECK(hr.entries[0].second == 0.25);
    CHECK(hr.entries[1].second == 0.125);

    auto zero = two_model_ctx({1.0}, {{0, 0}}, {Matrix(1, 2, 0.0)}, {});
    CHECK_THROWS_AS(ranking::normalized_weighted_rank(zero), DataError);
}

TEST_CASE("models+attacks score averages the two mean ranks") {
    // f0: model ranks {1,3}, attack ranks {2,2} -> r = 2.
    auto per_class = Matrix::from_rows({{0, 0, 0}, {2, 3, 1}, {5, 9, 1}});
    auto ctx = two_model_ctx({1.0, 1.0}, {{3, 2, 1}, {1, 3, 2}}, {per_class, per_class}, {1, 2});
    auto r = ranking::models_attacks_score(ctx);
    CHECK(order_of(r) == std::vector<std::size_t>{1, 0, 2});
    CHECK(r.entries[0].second == 1.25);
    CHECK(r.entries[1].second == 2.0);
    CHECK(r.entries[2].second == 2.75);
    CHECK(r.ascending);

    // Identical model and attack positions collapse to those positions.
    auto pc = Matrix::from_rows({{0, 0, 0}, {3, 1, 2}});
    auto solo = two_model_ctx({1.0}, {{3, 1, 2}}, {pc}, {1});
    auto sr = ranking::models_attacks_score(solo);
    CHECK(order_of(sr) == std::vector<std::size_t>{0, 2, 1});
    CHECK(sr.entries[0].second == 1.0);
    CHECK(sr.entries[2].second == 3.0);

    auto no_attacks = two_model_ctx({1.0}, {{1, 2, 3}}, {Matrix(1, 3, 0.0)}, {});
    CHECK_THROWS_AS(ranking::models_attacks_score(no_attacks), UsageError);
}

TEST_CASE("combined selection counts top-k appearances") {
    auto mk = [](std::vector<std::size_t> order) {
        ranking::FeatureRanking r;
        r.method = "importance";
        double s = static_cast<double>(order.size());
        for (std::size_t id : order) r.entries.emplace_back(id, s--);
        return r;
    };
    // Top-2 of [f0,f1,f2], [f0,f2,f1], [f1,f0,f2] -> counts 3, 2, 1.
    auto r = ranking::combined_selection({mk({0, 1, 2}), mk({0, 2, 1}), mk({1, 0, 2})}, 2);
    CHECK(order_of(r) == std::vector<std::size_t>{0, 1, 2});
    CHECK(r.entries[0].second == 3.0);
    CHECK(r.entries[1].second == 2.0);
    CHECK(r.entries[2].second == 1.0);

    // Equal counts fall back to the mean position.
    auto t = ranking::combined_selection({mk({0, 1, 2}), mk({1, 2, 0})}, 2);
    CHECK(order_of(t) == std::vector<std::size_t>{1, 0, 2});  // f1 mean pos 1.5 beats f0's 2

    // k = 1 counts only the winners.
    auto one = ranking::combined_selection({mk({0, 1, 2}), mk({1, 0, 2}), mk({0, 2, 1})}, 1);
    CHECK(order_of(one) == std::vector<std::size_t>{0, 1, 2});
    CHECK(one.entries[0].second == 2.0);
    CHECK(one.entries[2].second == 0.0);

    CHECK_THROWS_AS(ranking::combined_selection({}, 2), UsageError);
}

TEST_CASE("voting awards borda points") {
    auto mk = [](std::vector<std::size_t> order) {
        ranking::FeatureRanking r;
        r.method = "importance";
        double s = static_cast<double>(order.size());
        for (std::size_t id : order) r.entries.emplace_back(id, s--);
        return r;
    };
    // [f0,f1,f2] and [f1,f0,f2] -> totals 5, 5, 2; index breaks the tie.
    auto r = ranking::voting({mk({0, 1, 2}), mk({1, 0, 2})});
    CHECK(order_of(r) == std::vector<std::size_t>{0, 1, 2});
    CHECK(r.entries[0].second == 5.0);
    CHECK(r.entries[1].second == 5.0);
    CHECK(r.entries[2].second == 2.0);

    // A single ballot reproduces itself with points n..1.
    auto solo = ranking::voting({mk({2, 0, 1})});
    CHECK(order_of(solo) == std::vector<std::size_t>{2, 0, 1});
    CHECK(solo.entries[0].second == 3.0);

    // Three ballots, mixed outcome.
    auto three = ranking::voting({mk({0, 1, 2}), mk({2, 1, 0}), mk({1, 0, 2})});
    CHECK(order_of(three) == std::vector<std::size_t>{1, 0, 2});  // totals 6, 7, 5
    CHECK(three.entries[0].second == 7.0);
}

TEST_CASE("chi2 and infogain peak on a label-equal feature") {
    std::vector<std::vector<double>> rows;
    std::vector<std::size_t> y;
    auto rng = make_rng(15);
    std::normal_distribution<double> noise;
    for (std::size_t i = 0; i < 40; ++i) {
        double label = static_cast<double>(i % 2);
        rows.push_back({label, noise(rng)});
        y.push_back(i % 2);
    }
    auto d = make_dataset(rows, y, 2);
    auto chi = ranking::baseline_rank(ranking::BaselineMethod::Chi2, d);
    CHECK(chi.entries[0].first == 0);
    CHECK(chi.entries[0].second == doctest::Approx(40.0).epsilon(1e-12));  // n on a perfect table
    auto ig = ranking::baseline_rank(ranking::BaselineMethod::InfoGain, d);
    CHECK(ig.entries[0].first == 0);
    CHECK(ig.entries[0].second == doctest::Approx(1.0).epsilon(1e-12));  // H(Y) = 1 bit
}

TEST_CASE("infogain of independent noise stays near zero") {
    std::vector<std::vector<double>> rows;
    std::vector<std::size_t> y;
    auto rng = make_rng(99);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (std::size_t i = 0; i < 10000; ++i) {
        rows.push_back({uni(rng)});
        y.push_back(i % 2);
    }
    auto d = make_dataset(rows, y, 2);
    auto ig = ranking::baseline_rank(ranking::BaselineMethod::InfoGain, d);
    CHECK(ig.entries[0].second <= 0.05);
}

TEST_CASE("anova f-score handles degenerate spreads") {
    // Zero within-class variance with distinct means: infinite F.
    auto d = make_dataset({{0, 1}, {0, 2}, {1, 1}, {1, 3}}, {0, 0, 1, 1}, 2);
    auto r = ranking::baseline_rank(ranking::BaselineMethod::KBest, d);
    CHECK(r.entries[0].first == 0);
    CHECK(std::isinf(r.entries[0].second));
    // Constant features score zero.
    auto c = make_dataset({{5, 1}, {5, 2}, {5, 3}, {5, 4}}, {0, 0, 1, 1}, 2);
    auto cr = ranking::baseline_rank(ranking::BaselineMethod::KBest, c);
    auto pos = cr.rank_positions(2);
    CHECK(cr.entries[static_cast<std::size_t>(pos[0]) - 1].second == 0.0);
}

TEST_CASE("correlation ranking prunes near-duplicate features") {
    std::vector<std::vector<double>> rows;
    std::vector<std::size_t> y;
    auto rng = make_rng(31);
    std::normal_distribution<double> noise(0.0, 0.05);
    for (std::size_t i = 0; i < 200; ++i) {
        double label = static_cast<double>(i % 2);
        double f0 = label + noise(rng);
        rows.push_back({f0, f0, noise(rng)});  // f1 duplicates f0 exactly
        y.push_back(i % 2);
    }
    auto d = make_dataset(rows, y, 2);
    auto r = ranking::baseline_rank(ranking::BaselineMethod::Correlation, d);
    CHECK(r.entries[0].first == 0);       // best label correlate survives
    CHECK(r.entries.back().first == 1);   // its clone lands at the tail
    CHECK(r.entries.back().second == r.entries[0].second);  // raw score kept
}

TEST_CASE("impurity ranking finds planted features") {
    data::SynthSpec spec{.n_samples = 800, .n_features = 6, .n_informative = 2,
                         .n_classes = 2, .separation = 3.0, .seed = 61};
    auto d = data::synth_planted(spec);
    auto r = ranking::baseline_rank(ranking::BaselineMethod::Impurity, d, 42);
    auto top = ranking::select_top_k(r, 2);
    CHECK(((top[0] == 0 && top[1] == 1) || (top[0] == 1 && top[1] == 0)));
    r.validate_permutation(6);
}

TEST_CASE("permutation validation catches malformed rankings") {
    ranking::FeatureRanking r;
    r.method = "x";
    r.entries = {{0, 1.0}, {0, 0.5}};
    CHECK_THROWS_AS(r.validate_permutation(2), DataError);
    r.entries = {{0, 1.0}, {5, 0.5}};
    CHECK_THROWS_AS(r.validate_permutation(2), DataError);
    r.entries = {{0, 1.0}};
    CHECK_THROWS_AS(r.validate_permutation(2), DataError);
    r.entries = {{0, 1.0}, {1, std::nan("")}};
    CHECK_THROWS_AS(r.validate_permutation(2), DataError);
    r.entries = {{0, std::numeric_limits<double>::infinity()}, {1, 0.5}};
    CHECK_NOTHROW(r.validate_permutation(2));
}

TEST_CASE("ranking files round-trip and reject corruption") {
    ranking::FeatureRanking r;
    r.method = "chi2";
    r.entries = {{2, 5.5}, {0, 1.0 / 3.0}, {1, 0.25}};
    auto dir = fresh_dir("ranking");
    auto path = (dir / "r.csv").string();
    std::vector<std::string> names = {"alpha", "beta", "gamma"};
    ranking::save_ranking(r, path, names);
    auto back = ranking::load_ranking(path, names);
    CHECK(back.method == "chi2");
    CHECK(back.entries == r.entries);
    CHECK_FALSE(back.ascending);

    write_text(dir / "bad.csv",
               "method,rank,feature,score\nchi2,1,alpha,2\nchi2,3,beta,1\nchi2,2,gamma,0.5\n");
    CHECK_THROWS_AS(ranking::load_ranking((dir / "bad.csv").string(), names), DataError);
    write_text(dir / "unknown.csv", "method,rank,feature,score\nchi2,1,delta,2\n");
    CHECK_THROWS_AS(ranking::load_ranking((dir / "unknown.csv").string(), names), DataError);
}

TEST_CASE("select_top_k bounds") {
    ranking::FeatureRanking r;
    r.method = "x";
    r.entries = {{1, 3.0}, {0, 2.0}};
    CHECK(ranking::select_top_k(r, 1) == std::vector<std::size_t>{1});
    CHECK_THROWS_AS(ranking::select_top_k(r, 0), UsageError);
    CHECK_THROWS_AS(ranking::select_top_k(r, 3), UsageError);
}

TEST_CASE("baseline method names round-trip") {
    for (auto m : ranking::all_baseline_methods())
        CHECK(ranking::baseline_method_from_string(ranking::to_string(m)) == m);
    CHECK_THROWS_AS(ranking::baseline_method_from_string("tarot"), UsageError);
}

}  // TEST_SUITE ranking

// ================================================================== benchmark

TEST_SUITE("benchmark") {

TEST_CASE("experiment config snapshot round-trips every field") {
    bench::ExperimentConfig cfg;
    cfg.dataset_csv = "flows.csv";
    cfg.schema_path = "flows.schema";
    cfg.model_kinds = {models::ModelKind::MLP, models::ModelKind::KNN};
    cfg.methods = {"overall_rank", "voting", "chi2"};
    cfg.k_values = {4, bench::kAllFeatures};
    cfg.seed = 1234;
    cfg.background_size = 9;
    cfg.n_explained = 33;
    cfg.n_coalitions = attribution::kAllCoalitions;
    cfg.n_threads = 2;
    cfg.normal_class = "Normal";
    cfg.nonfinite = data::NonFinitePolicy::Median;
    cfg.hp.rf_trees = 17;
    cfg.hp.mlp_hidden = {8, 4};
    cfg.hp.svm_c = 0.125;
    cfg.hp.gbdt_lambda = 2.0;

    auto dir = fresh_dir("config");
    auto path = (dir / "run.cfg").string();
    cfg.save(path);
    auto back = bench::ExperimentConfig::load(path);
    CHECK(back.dataset_csv == cfg.dataset_csv);
    CHECK(back.schema_path == cfg.schema_path);
    CHECK(back.model_kinds == cfg.model_kinds);
    CHECK(back.methods == cfg.methods);
    CHECK(back.k_values == cfg.k_values);
    CHECK(back.seed == cfg.seed);
    CHECK(back.background_size == cfg.background_size);
    CHECK(back.n_explained == cfg.n_explained);
    CHECK(back.n_coalitions == cfg.n_coalitions);
    CHECK(back.n_threads == cfg.n_threads);
    CHECK(back.normal_class == cfg.normal_class);
    CHECK(back.nonfinite == cfg.nonfinite);
    CHECK(back.hp.rf_trees == cfg.hp.rf_trees);
    CHECK(back.hp.mlp_hidden == cfg.hp.mlp_hidden);
    CHECK(back.hp.svm_c == cfg.hp.svm_c);
    CHECK(back.hp.gbdt_lambda == cfg.hp.gbdt_lambda);

    write_text(dir / "bad.cfg", "dataset = x\nwarp_drive = on\n");
    CHECK_THROWS_AS(bench::ExperimentConfig::load((dir / "bad.cfg").string()), DataError);
}

TEST_CASE("config validation guards the experiment grid") {
    bench::ExperimentConfig cfg;
    cfg.dataset_csv = "x.csv";
    cfg.schema_path = "x.schema";
    CHECK_NOTHROW(cfg.validate());

    auto bad = cfg;
    bad.methods = {"overall_rank", "astrology"};
    CHECK_THROWS_AS(bad.validate(), UsageError);

    bad = cfg;
    bad.model_kinds = {models::ModelKind::KNN, models::ModelKind::KNN};
    CHECK_THROWS_AS(bad.validate(), UsageError);

    bad = cfg;
    bad.model_kinds = {models::ModelKind::KNN};  // voting requires the mlp
    CHECK_THROWS_AS(bad.validate(), UsageError);

    bad = cfg;
    bad.k_values = {5, 5};
    CHECK_THROWS_AS(bad.validate(), UsageError);

    bad = cfg;
    bad.n_explained = 0;  // attribution methods need a sample budget
    CHECK_THROWS_AS(bad.validate(), UsageError);

    bad = cfg;
    bad.methods = {"chi2", "infogain"};
    bad.n_explained = 0;  // pure baselines never explain anything
    CHECK_NOTHROW(bad.validate());
}

TEST_CASE("method catalogue") {
    for (const auto& m : bench::default_methods()) CHECK(bench::is_known_method(m));
    CHECK_FALSE(bench::is_known_method("all_features"));
    CHECK(bench::method_needs_attributions("overall_rank"));
    CHECK(bench::method_needs_attributions("voting"));
    CHECK_FALSE(bench::method_needs_attributions("chi2"));
    CHECK(bench::proposed_methods().size() == 6);
    CHECK(bench::baseline_methods().size() == 5);
}

TEST_CASE("weighted scoring awards 3/2/1 with dense ties") {
    auto row = [](std::string method, std::size_t k, double acc) {
        bench::ResultRow r;
        r.model = "m";
        r.method = std::move(method);
        r.k = k;
        r.metrics.acc = acc;
        r.metrics.prec = acc;
        r.metrics.rec = acc;
        r.metrics.f1 = acc;
        r.metrics.bacc = acc;
        r.metrics.mcc = acc;
        r.metrics.aucroc = acc;
        return r;
    };
    std::vector<bench::ResultRow> rows = {
        row("a", 5, 0.9), row("b", 5, 0.8), row("c", 5, 0.7),
        row("a", 10, 0.9), row("b", 10, 0.9), row("c", 10, 0.7),
        row("all_features", 12, 0.99),  // ignored by scoring
    };
    auto board = bench::weighted_scoring(rows, {"a", "b", "c"});
    CHECK(board.cells == 2);
    REQUIRE(board.entries.size() == 3);
    CHECK(board.entries[0].method == "a");
    CHECK(board.entries[0].first == 2);
    CHECK(board.entries[0].score() == 6);
    CHECK(board.entries[1].method == "b");
    CHECK(board.entries[1].first == 1);   // dense tie with a on the k=10 cell
    CHECK(board.entries[1].second == 1);
    CHECK(board.entries[1].score() == 5);
    CHECK(board.entries[2].method == "c");
    CHECK(board.entries[2].second == 1);  // tie pushed it to the next award
    CHECK(board.entries[2].third == 1);
    CHECK(board.entries[2].score() == 3);

    rows.pop_back();
    rows.pop_back();  // drop method c's k=10 row -> incomplete cell
    CHECK_THROWS_AS(bench::weighted_scoring(rows, {"a", "b", "c"}), DataError);
}

TEST_CASE("tuple comparison falls through the whole metric chain") {
    auto row = [](std::string method, double acc, double mcc) {
        bench::ResultRow r;
        r.model = "m";
        r.method = std::move(method);
        r.k = 5;
        r.metrics.acc = acc;
        r.metrics.mcc = mcc;
        return r;
    };
    // Equal accuracies; the mcc column decides first place.
    std::vector<bench::ResultRow> rows = {row("a", 0.9, 0.1), row("b", 0.9, 0.4)};
    auto board = bench::weighted_scoring(rows, {"a", "b"});
    CHECK(board.entries[1].method == "b");
    CHECK(board.entries[1].first == 1);
    CHECK(board.entries[0].first == 0);
    CHECK(board.entries[0].second == 1);
}

TEST_CASE("results csv round-trips the scored fields") {
    bench::ResultRow r;
    r.model = "mlp";
    r.method = "combined";
    r.k = 5;
    r.metrics = {0.5, 0.25, 1.0 / 3.0, 0.125, 0.75, -0.5, 0.9, 0.0625, false};
    auto dir = fresh_dir("results");
    auto path = (dir / "results.csv").string();
    bench::save_results_csv({r}, path);
    auto back = bench::load_results_csv(path);
    REQUIRE(back.size() == 1);
    CHECK(back[0].model == r.model);
    CHECK(back[0].method == r.method);
    CHECK(back[0].k == r.k);
    CHECK(back[0].metrics.acc == r.metrics.acc);
    CHECK(back[0].metrics.rec == r.metrics.rec);
    CHECK(back[0].metrics.mcc == r.metrics.mcc);
    CHECK(back[0].metrics.aucroc == r.metrics.aucroc);
    CHECK(back[0].metrics.fpr == r.metrics.fpr);
}

TEST_CASE("normal class resolution prefers names, then benign aliases") {
    data::FeatureSchema s;
    s.label_column = "label";
    s.feature_names = {"a"};
    s.class_names = {"DoS", "BENIGN", "PortScan"};
    CHECK(bench::resolve_normal_class(s, "PortScan") == 2);
    CHECK(bench::resolve_normal_class(s, "") == 1);  // benign alias
    CHECK_THROWS_AS(bench::resolve_normal_class(s, "Ghost"), DataError);
    s.class_names = {"DoS", "PortScan"};
    CHECK(bench::resolve_normal_class(s, "") == 0);  // fallback: first class
}

TEST_CASE("small experiment matrix runs deterministically end to end") {
    auto dir = fresh_dir("matrix");
    data::SynthSpec spec{.n_samples = 400, .n_features = 6, .n_informative = 2,
                         .n_classes = 3, .separation = 2.5, .seed = 67};
    auto d = data::synth_planted(spec);
    auto csv_path = (dir / "d.csv").string();
    data::save_dataset_csv(d, csv_path);
    d.schema.save((dir / "d.schema").string());

    bench::ExperimentConfig cfg;
    cfg.dataset_csv = csv_path;
    cfg.schema_path = (dir / "d.schema").string();
    cfg.model_kinds = {models::ModelKind::DecisionTree, models::ModelKind::MLP,
                       models::ModelKind::KNN};
    cfg.k_values = {2, 3, bench::kAllFeatures};
    cfg.background_size = 8;
    cfg.n_explained = 8;
    cfg.n_coalitions = 16;
    cfg.hp.mlp_epochs = 4;
    cfg.seed = 42;

    auto art = bench::run_experiment_matrix(cfg);
    // 12 methods x 2 real k values + the all-features row, per model.
    CHECK(art.rows.size() == 3 * (12 * 2 + 1));
    CHECK(art.board.cells == 6);
    CHECK(art.model_names.size() == 3);
    CHECK(art.importances.size() == 3);
    for (const auto& [stem, r] : art.rankings) r.validate_permutation(6);

    auto stem_count = [&](const std::string& prefix) {
        std::size_t n = 0;
        for (const auto& [stem, r] : art.rankings)
            if (stem.rfind(prefix, 0) == 0) ++n;
        return n;
    };
    CHECK(stem_count("model_specific_") == 3);
    CHECK(stem_count("combined_k") == 2);
    CHECK(stem_count("voting_input_") == 9);
    CHECK(stem_count("voting") == 10);

    auto art2 = bench::run_experiment_matrix(cfg);
    auto p1 = (dir / "r1.csv").string();
    auto p2 = (dir / "r2.csv").string();
    bench::save_results_csv(art.rows, p1);
    bench::save_results_csv(art2.rows, p2);
    CHECK(read_text(p1) == read_text(p2));

    // Emit the run directory and reload the pieces that claim round-trips.
    auto run_dir = (dir / "run").string();
    bench::emit_reports(art, run_dir);
    auto cfg2 = bench::ExperimentConfig::load(run_dir + "/config.txt");
    CHECK(cfg2.seed == cfg.seed);
    CHECK(cfg2.k_values == cfg.k_values);
    auto rows2 = bench::load_results_csv(run_dir + "/metrics/results.csv");
    CHECK(rows2.size() == art.rows.size());
    auto board2 = bench::weighted_scoring(rows2, cfg.methods);
    for (std::size_t i = 0; i < board2.entries.size(); ++i) {
        CHECK(board2.entries[i].method == art.board.entries[i].method);
        CHECK(board2.entries[i].score() == art.board.entries[i].score());
    }
    CHECK(fs::exists(run_dir + "/rankings/overall_rank.csv"));
    CHECK(fs::exists(run_dir + "/models/mlp.bin"));
    CHECK(fs::exists(run_dir + "/charts/importance_knn.txt"));
    CHECK(fs::exists(run_dir + "/runtimes.csv"));
    CHECK_FALSE(fs::exists(run_dir + "/metrics/runtimes.csv"));
}

TEST_CASE("k larger than the feature count is rejected") {
    auto dir = fresh_dir("bigk");
    data::SynthSpec spec{.n_samples = 80, .n_features = 3, .n_informative = 1,
                         .n_classes = 2, .separation = 2.5, .seed = 71};
    auto d = data::synth_planted(spec);
    auto csv_path = (dir / "d.csv").string();
    data::save_dataset_csv(d, csv_path);
    d.schema.save((dir / "d.schema").string());
    bench::ExperimentConfig cfg;
    cfg.dataset_csv = csv_path;
    cfg.schema_path = (dir / "d.schema").string();
    cfg.model_kinds = {models::ModelKind::DecisionTree, models::ModelKind::MLP};
    cfg.methods = {"overall_rank", "voting"};
    cfg.k_values = {9};
    cfg.background_size = 4;
    cfg.n_explained = 4;
    cfg.n_coalitions = 8;
    cfg.hp.mlp_epochs = 2;
    CHECK_THROWS_AS(bench::run_experiment_matrix(cfg), UsageError);
}

}  // TEST_SUITE benchmark

// ======================================================================== csv

TEST_SUITE("csv") {

TEST_CASE("parser handles quotes, escapes and crlf") {
    auto dir = fresh_dir("csvq");
    write_text(dir / "t.csv", "a,b\r\n\"x,y\",\"he said \"\"hi\"\"\"\r\n1,2\n");
    auto t = csv::read_file((dir / "t.csv").string());
    CHECK(t.header == std::vector<std::string>{"a", "b"});
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0][0] == "x,y");
    CHECK(t.rows[0][1] == "he said \"hi\"");
    CHECK(t.find_column("b") == 1);
    CHECK(t.find_column("missing") == -1);
}

TEST_CASE("writer round-trips fields that need quoting") {
    csv::Table t;
    t.header = {"name", "note"};
    t.rows = {{"a,b", "line\"quote"}, {"plain", ""}};
    auto dir = fresh_dir("csvw");
    auto path = (dir / "w.csv").string();
    csv::write_file(path, t);
    auto back = csv::read_file(path);
    CHECK(back.header == t.header);
    CHECK(back.rows == t.rows);
}

TEST_CASE("ragged rows are rejected") {
    auto dir = fresh_dir("csvr");
    write_text(dir / "bad.csv", "a,b\n1\n");
    CHECK_THROWS_AS(csv::read_file((dir / "bad.csv").string()), DataError);
}

}  // TEST_SUITE csv
