#include <algorithm>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "flowrank/benchmark.hpp"
#include "flowrank/csv.hpp"

namespace fs = std::filesystem;
using namespace flowrank;

namespace {

std::size_t parse_k_token(const std::string& tok) {
    if (tok == "all") return bench::kAllFeatures;
    try {
        std::size_t pos = 0;
        unsigned long long v = std::stoull(tok, &pos);
        if (pos != tok.size() || v == 0) throw std::invalid_argument(tok);
        return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
        throw UsageError("bad k value '" + tok + "' (expected a positive integer or 'all')");
    }
}

std::size_t parse_coalitions(const std::string& tok) {
    if (tok == "all") return attribution::kAllCoalitions;
    try {
        std::size_t pos = 0;
        unsigned long long v = std::stoull(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
        throw UsageError("bad coalition budget '" + tok + "' (expected an integer or 'all')");
    }
}

void print_board(const bench::ScoreBoard& board) {
    std::cout << "scored cells: " << board.cells << "\n";
    for (const auto& e : board.entries)
        std::cout << "  " << e.method << ": first=" << e.first << " second=" << e.second
                  << " third=" << e.third << " score=" << e.score() << "\n";
}

// ------------------------------------------------------------------ synth

struct SynthOpts {
    data::SynthSpec spec{20000, 30, 5, 4, 2.5, 42};
    std::string out;
    std::string schema_out;
};

void run_synth(const SynthOpts& o) {
    auto d = data::synth_planted(o.spec);
    data::save_dataset_csv(d, o.out);
    std::string schema_path = o.schema_out.empty() ? o.out + ".schema" : o.schema_out;
    d.schema.save(schema_path);
    std::cout << "wrote " << d.size() << " rows x " << d.n_features() << " features ("
              << d.n_classes() << " classes) to " << o.out << "\n";
}

// ---------------------------------------------------------------- prepare

struct PrepareOpts {
    std::string data_csv;
    std::string schema;
    std::string out_dir;
    std::uint64_t seed = 42;
    double train_fraction = 0.70;
    std::string nonfinite = "drop-row";
};

void run_prepare(const PrepareOpts& o) {
    auto schema = data::FeatureSchema::load(o.schema);
    auto [raw, rep] = data::load_csv(o.data_csv, schema, data::parse_nonfinite_policy(o.nonfinite));
    auto dedup = data::deduplicate_and_shuffle(raw, mix_seed(o.seed, 0xD5));
    rep.merge(dedup.second);
    auto split = data::split_train_test(dedup.first, {o.train_fraction, mix_seed(o.seed, 0x51)});
    data::Dataset train = std::move(split.first);
    data::Dataset test = std::move(split.second);

    auto before = train.class_counts();
    for (std::size_t c = 0; c < before.size(); ++c)
        rep.per_class_before_oversample[schema.class_names[c]] = before[c];
    train = data::oversample_random(train, mix_seed(o.seed, 0x05));
    auto after = train.class_counts();
    for (std::size_t c = 0; c < after.size(); ++c)
        rep.per_class_after_oversample[schema.class_names[c]] = after[c];
    rep.minmax_params = data::minmax_fit_apply(train, {&test}).per_feature;

    fs::create_directories(o.out_dir);
    auto at = [&](const std::string& rel) { return (fs::path(o.out_dir) / rel).string(); };
    data::save_dataset_csv(train, at("train.csv"));
    data::save_dataset_csv(test, at("test.csv"));
    schema.save(at("schema.txt"));
    rep.write_csv(at("preprocess_report.csv"), schema);
    std::cout << "train: " << train.size() << " rows, test: " << test.size() << " rows -> "
              << o.out_dir << "\n";
}

// ------------------------------------------------------------------ train

struct TrainOpts {
    std::string train_csv;
    std::string schema;
    std::string model = "random_forest";
    std::string out;
    std::uint64_t seed = 42;
    std::size_t threads = 1;
    models::Hyperparams hp;
};

void run_train(const TrainOpts& o) {
    auto d = data::load_prepared_csv(o.train_csv, o.schema);
    auto kind = models::model_kind_from_string(o.model);
    std::unique_ptr<models::Model> m;
    double t = bench::measure_runtime(
        [&] { m = models::train(kind, o.hp, d, o.seed, o.threads); });
    models::save_model(*m, o.out);
    std::cout << o.model << ": " << d.size() << " rows x " << d.n_features() << " features in "
              << format_double(t) << "s -> " << o.out << "\n";
}

// --------------------------------------------------------------- evaluate

struct EvalOpts {
    std::string model_path;
    std::string data_csv;
    std::string schema;
    std::string out;
    std::string normal_class;
};

void run_evaluate(const EvalOpts& o) {
    auto m = models::load_model_file(o.model_path);
    auto d = data::load_prepared_csv(o.data_csv, o.schema);
    if (m->n_features() != d.n_features())
        throw ShapeError("model expects " + std::to_string(m->n_features()) +
                         " features, dataset has " + std::to_string(d.n_features()));
    std::size_t normal = bench::resolve_normal_class(d.schema, o.normal_class);

    Matrix proba = m->predict_proba(d.x);
    std::vector<std::size_t> pred(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) pred[i] = argmax_tie_low(proba.row(i));
    auto cm = metrics::confusion(d.y, pred, d.n_classes());
    auto ms = metrics::classification_metrics(cm);
    ms.aucroc = metrics::auc_roc_ovr(proba, d.y);
    auto pca = metrics::per_class_accuracy(cm);
    double alert_fpr = metrics::false_positive_rate(cm, normal);

    std::cout << "acc=" << format_double(ms.acc) << " prec=" << format_double(ms.prec)
              << " rec=" << format_double(ms.rec) << " f1=" << format_double(ms.f1)
              << " bacc=" << format_double(ms.bacc) << " mcc=" << format_double(ms.mcc)
              << " aucroc=" << format_double(ms.aucroc) << " fpr=" << format_double(ms.fpr)
              << " alert_fpr=" << format_double(alert_fpr) << "\n";
    for (std::size_t c = 0; c < pca.size(); ++c)
        std::cout << "  acc[" << d.schema.class_names[c] << "]=" << format_double(pca[c]) << "\n";

    if (!o.out.empty()) {
        bench::ResultRow row;
        row.model = models::to_string(m->kind());
        row.method = "evaluate";
        row.k = d.n_features();
        row.metrics = ms;
        bench::save_results_csv({row}, o.out);
    }
}

// ---------------------------------------------------------------- explain

struct ExplainOpts {
    std::string model_path;
    std::string train_csv;
    std::string data_csv;
    std::string schema;
    std::string out_dir;
    std::string method = "shap";
    std::size_t background = 100;
    std::size_t samples = 100;
    std::string coalitions = "2048";
    std::uint64_t seed = 42;
    std::size_t threads = 1;
};

void run_explain(const ExplainOpts& o) {
    auto m = models::load_model_file(o.model_path);
    auto explained = data::load_prepared_csv(o.data_csv, o.schema);
    if (m->n_features() != explained.n_features())
        throw ShapeError("model and dataset disagree on the feature count");

    attribution::AttributionMatrix att;
    if (o.method == "shap") {
        if (o.train_csv.empty()) throw UsageError("shap needs --train for the background set");
        auto train = data::load_prepared_csv(o.train_csv, o.schema);
        auto bg = attribution::BackgroundSet::sample_from(
            train.x, std::min(o.background, train.size()), mix_seed(o.seed, 0xB6));
        att = attribution::explain_shap(*m, bg, explained.x, o.samples,
                                        parse_coalitions(o.coalitions), o.seed, o.threads);
    } else {
        attribution::GradConfig gcfg;
        att = attribution::explain_gradient(*m, attribution::grad_method_from_string(o.method),
                                            explained.x, o.samples, gcfg, o.seed, o.threads);
    }
    fs::create_directories(o.out_dir);
    auto at = [&](const std::string& rel) { return (fs::path(o.out_dir) / rel).string(); };
    attribution::save_attributions(att, at("attributions.csv"), at("base.csv"),
                                   explained.schema.feature_names, explained.schema.class_names);
    auto gi = attribution::global_importance(att);
    attribution::save_importance(gi, at("importance.csv"), explained.schema.feature_names,
                                 explained.schema.class_names);
    std::cout << o.method << ": " << att.sample_ids.size() << " samples explained -> " << o.out_dir
              << "\n";
}

// ------------------------------------------------------------------- rank

struct RankOpts {
    std::string method;
    std::string schema;
    std::string out;
    std::string train_csv;        // baselines
    std::string importance_dir;   // aggregates
    std::string accuracies;       // aggregates
    std::string rankings_dir;     // voting
    std::string normal_class;
    std::size_t k = 0;
    std::uint64_t seed = 42;
};

ranking::RankContext load_rank_context(const RankOpts& o, const data::FeatureSchema& schema) {
    if (o.importance_dir.empty() || o.accuracies.empty())
        throw UsageError("method '" + o.method + "' needs --importance-dir and --accuracies");
    ranking::RankContext ctx;
    ctx.n_features = schema.n_features();
    auto acc = csv::read_file(o.accuracies);
    int mc = acc.find_column("model");
    int ac = acc.find_column("accuracy");
    if (mc < 0 || ac < 0)
        throw SchemaError("accuracies file needs 'model' and 'accuracy' columns");
    for (const auto& row : acc.rows) {
        std::string name = row[static_cast<std::size_t>(mc)];
        ctx.model_names.push_back(name);
        ctx.accuracies.push_back(parse_double(row[static_cast<std::size_t>(ac)]));
        auto gi = attribution::load_importance(
            (fs::path(o.importance_dir) / ("importance_" + name + ".csv")).string(),
            schema.feature_names, schema.class_names);
        ctx.model_overall.push_back(gi.overall);
        ctx.model_per_class.push_back(gi.per_class);
    }
    std::size_t normal = bench::resolve_normal_class(schema, o.normal_class);
    for (std::size_t c = 0; c < schema.n_classes(); ++c)
        if (c != normal) {
            ctx.attack_classes.push_back(c);
            ctx.attack_names.push_back(schema.class_names[c]);
        }
    return ctx;
}

void run_rank(const RankOpts& o) {
    auto schema = data::FeatureSchema::load(o.schema);
    ranking::FeatureRanking r;
    auto baselines = bench::baseline_methods();
    if (std::find(baselines.begin(), baselines.end(), o.method) != baselines.end()) {
        if (o.train_csv.empty()) throw UsageError("baseline methods need --train");
        auto d = data::load_prepared_csv(o.train_csv, o.schema);
        r = ranking::baseline_rank(ranking::baseline_method_from_string(o.method), d, o.seed);
    } else if (o.method == bench::kVoting) {
        if (o.rankings_dir.empty()) throw UsageError("voting needs --rankings-dir");
        std::vector<std::string> files;
        for (const auto& entry : fs::directory_iterator(o.rankings_dir))
            if (entry.path().extension() == ".csv") files.push_back(entry.path().string());
        std::sort(files.begin(), files.end());
        if (files.empty()) throw DataError("no ranking CSVs in '" + o.rankings_dir + "'");
        std::vector<ranking::FeatureRanking> inputs;
        for (const auto& f : files) inputs.push_back(ranking::load_ranking(f, schema.feature_names));
        r = ranking::voting(inputs);
    } else if (o.method == bench::kOverallRank || o.method == bench::kWeightedRank ||
               o.method == bench::kNormalizedWeightedRank || o.method == bench::kModelsAttacks ||
               o.method == bench::kCombined) {
        auto ctx = load_rank_context(o, schema);
        if (o.method == bench::kOverallRank) r = ranking::overall_rank(ctx);
        else if (o.method == bench::kWeightedRank) r = ranking::weighted_rank(ctx);
        else if (o.method == bench::kNormalizedWeightedRank)
            r = ranking::normalized_weighted_rank(ctx);
        else if (o.method == bench::kModelsAttacks) r = ranking::models_attacks_score(ctx);
        else {
            if (o.k == 0) throw UsageError("combined needs --k");
            std::vector<ranking::FeatureRanking> inputs;
            for (std::size_t m = 0; m < ctx.model_names.size(); ++m)
                inputs.push_back(ranking::rank_from_importance(
                    ctx.model_overall[m], "model_specific_" + ctx.model_names[m]));
            inputs.push_back(ranking::overall_rank(ctx));
            inputs.push_back(ranking::weighted_rank(ctx));
            inputs.push_back(ranking::normalized_weighted_rank(ctx));
            inputs.push_back(ranking::models_attacks_score(ctx));
            r = ranking::combined_selection(inputs, o.k);
        }
    } else {
        throw UsageError("unknown ranking method '" + o.method + "'");
    }
    ranking::save_ranking(r, o.out, schema.feature_names);
    std::size_t show = std::min<std::size_t>(o.k > 0 ? o.k : 10, r.entries.size());
    std::cout << r.method << " top " << show << ":";
    for (std::size_t i = 0; i < show; ++i)
        std::cout << " " << schema.feature_names[r.entries[i].first];
    std::cout << "\n";
}

// ----------------------------------------------------------------- select

struct SelectOpts {
    std::string data_csv;
    std::string schema;
    std::string ranking_csv;
    std::string out;
    std::string schema_out;
    std::size_t k = 0;
};

void run_select(const SelectOpts& o) {
    auto d = data::load_prepared_csv(o.data_csv, o.schema);
    auto r = ranking::load_ranking(o.ranking_csv, d.schema.feature_names);
    auto subset = ranking::select_top_k(r, o.k);

    data::Dataset out;
    out.x = d.x.select_columns(subset);
    out.y = d.y;
    out.schema = d.schema;
    out.schema.feature_names.clear();
    for (std::size_t f : subset) out.schema.feature_names.push_back(d.schema.feature_names[f]);
    data::save_dataset_csv(out, o.out);
    std::string schema_path = o.schema_out.empty() ? o.out + ".schema" : o.schema_out;
    out.schema.save(schema_path);
    std::cout << "kept " << subset.size() << " of " << d.n_features() << " features -> " << o.out
              << "\n";
}

// -------------------------------------------------------------- benchmark

struct BenchOpts {
    std::string config;
    std::string out_dir;
    std::string data_csv, schema, models_list, methods_list, k_list, coalitions, normal_class,
        nonfinite;
    std::uint64_t seed = 0;
    std::size_t background = 0, samples = 0, threads = 0;
};

void run_bench(const BenchOpts& o, const CLI::App* sub) {
    bench::ExperimentConfig cfg;
    if (!o.config.empty()) cfg = bench::ExperimentConfig::load(o.config);

    if (sub->count("--data")) cfg.dataset_csv = o.data_csv;
    if (sub->count("--schema")) cfg.schema_path = o.schema;
    if (sub->count("--models")) {
        cfg.model_kinds.clear();
        std::string item;
        std::istringstream is(o.models_list);
        while (std::getline(is, item, ','))
            cfg.model_kinds.push_back(models::model_kind_from_string(item));
    }
    if (sub->count("--methods")) {
        cfg.methods.clear();
        std::string item;
        std::istringstream is(o.methods_list);
        while (std::getline(is, item, ',')) cfg.methods.push_back(item);
    }
    if (sub->count("--k")) {
        cfg.k_values.clear();
        std::string item;
        std::istringstream is(o.k_list);
        while (std::getline(is, item, ',')) cfg.k_values.push_back(parse_k_token(item));
    }
    if (sub->count("--seed")) cfg.seed = o.seed;
    if (sub->count("--background")) cfg.background_size = o.background;
    if (sub->count("--samples")) cfg.n_explained = o.samples;
    if (sub->count("--coalitions")) cfg.n_coalitions = parse_coalitions(o.coalitions);
    if (sub->count("--threads")) cfg.n_threads = o.threads;
    if (sub->count("--normal-class")) cfg.normal_class = o.normal_class;
    if (sub->count("--nonfinite")) cfg.nonfinite = data::parse_nonfinite_policy(o.nonfinite);
    if (cfg.schema_path.empty() && !cfg.dataset_csv.empty() &&
        fs::exists(cfg.dataset_csv + ".schema"))
        cfg.schema_path = cfg.dataset_csv + ".schema";

    auto art = bench::run_benchmark(cfg, o.out_dir);
    std::cout << art.rows.size() << " result rows -> " << o.out_dir << "\n";
    print_board(art.board);
}

// ----------------------------------------------------------------- report

void run_report(const std::string& run_dir) {
    auto cfg = bench::ExperimentConfig::load((fs::path(run_dir) / "config.txt").string());
    auto rows = bench::load_results_csv((fs::path(run_dir) / "metrics" / "results.csv").string());
    auto board = bench::weighted_scoring(rows, cfg.methods);

    csv::Table t;
    t.header = {"method", "first", "second", "third", "score"};
    for (const auto& e : board.entries)
        t.rows.push_back({e.method, std::to_string(e.first), std::to_string(e.second),
                          std::to_string(e.third), std::to_string(e.score())});
    csv::write_file((fs::path(run_dir) / "boards" / "scoreboard.csv").string(), t);
    print_board(board);
}

void add_hp_flags(CLI::App* sub, models::Hyperparams& hp) {
    sub->add_option("--tree-max-depth", hp.tree_max_depth, "Tree depth limit")
        ->capture_default_str();
    sub->add_option("--min-samples-split", hp.min_samples_split, "Minimum rows to split a node")
        ->capture_default_str();
    sub->add_option("--rf-trees", hp.rf_trees, "Random forest size")->capture_default_str();
    sub->add_option("--max-thresholds", hp.max_thresholds,
                    "Candidate split thresholds per feature (0 = all midpoints)")
        ->capture_default_str();
    sub->add_option("--ada-stages", hp.ada_stages, "AdaBoost stages")->capture_default_str();
    sub->add_option("--knn-k", hp.knn_k, "KNN neighbor count")->capture_default_str();
    sub->add_option("--svm-c", hp.svm_c, "SVM regularization C")->capture_default_str();
    sub->add_option("--svm-epochs", hp.svm_epochs, "SVM training epochs")->capture_default_str();
    sub->add_option("--mlp-hidden", hp.mlp_hidden, "MLP hidden layer widths")
        ->capture_default_str();
    sub->add_option("--mlp-dropout", hp.mlp_dropout, "MLP dropout rate")->capture_default_str();
    sub->add_option("--mlp-epochs", hp.mlp_epochs, "MLP training epochs")->capture_default_str();
    sub->add_option("--mlp-batch", hp.mlp_batch, "MLP batch size")->capture_default_str();
    sub->add_option("--mlp-lr", hp.mlp_lr, "MLP learning rate")->capture_default_str();
    sub->add_option("--gbdt-lr", hp.gbdt_lr, "GBDT learning rate")->capture_default_str();
    sub->add_option("--gbdt-stages", hp.gbdt_stages, "GBDT boosting stages")
        ->capture_default_str();
    sub->add_option("--gbdt-depth", hp.gbdt_depth, "GBDT tree depth")->capture_default_str();
    sub->add_option("--gbdt-lambda", hp.gbdt_lambda, "GBDT leaf regularization")
        ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"XAI feature-selection benchmark for network flow classifiers"};
    app.require_subcommand(1);

    SynthOpts synth;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a planted-feature dataset");
    synth_cmd->add_option("--samples", synth.spec.n_samples, "Row count")->capture_default_str();
    synth_cmd->add_option("--features", synth.spec.n_features, "Feature count")
        ->capture_default_str();
    synth_cmd->add_option("--informative", synth.spec.n_informative, "Informative feature count")
        ->capture_default_str();
    synth_cmd->add_option("--classes", synth.spec.n_classes, "Class count")->capture_default_str();
    synth_cmd->add_option("--separation", synth.spec.separation, "Class mean separation")
        ->capture_default_str();
    synth_cmd->add_option("--seed", synth.spec.seed, "Generator seed")->capture_default_str();
    synth_cmd->add_option("--out", synth.out, "Output CSV path")->required();
    synth_cmd->add_option("--schema-out", synth.schema_out, "Schema path (default <out>.schema)");

    PrepareOpts prep;
    auto* prep_cmd = app.add_subcommand("prepare", "Dedup, split, oversample, and normalize");
    prep_cmd->add_option("--data", prep.data_csv, "Raw flow CSV")->required();
    prep_cmd->add_option("--schema", prep.schema, "Schema file")->required();
    prep_cmd->add_option("--out-dir", prep.out_dir, "Output directory")->required();
    prep_cmd->add_option("--seed", prep.seed, "Pipeline seed")->capture_default_str();
    prep_cmd->add_option("--train-fraction", prep.train_fraction, "Training split fraction")
        ->capture_default_str();
    prep_cmd->add_option("--nonfinite", prep.nonfinite, "NaN/inf policy: drop-row|zero|median")
        ->capture_default_str();

    TrainOpts train;
    auto* train_cmd = app.add_subcommand("train", "Train one model on a prepared split");
    train_cmd->add_option("--train", train.train_csv, "Prepared training CSV")->required();
    train_cmd->add_option("--schema", train.schema, "Schema file")->required();
    train_cmd->add_option("--model", train.model, "Model kind")->capture_default_str();
    train_cmd->add_option("--out", train.out, "Model artifact path")->required();
    train_cmd->add_option("--seed", train.seed, "Training seed")->capture_default_str();
    train_cmd->add_option("--threads", train.threads, "Worker threads")->capture_default_str();
    add_hp_flags(train_cmd, train.hp);

    EvalOpts eval;
    auto* eval_cmd = app.add_subcommand("evaluate", "Evaluate a model artifact on a split");
    eval_cmd->add_option("--model", eval.model_path, "Model artifact")->required();
    eval_cmd->add_option("--data", eval.data_csv, "Prepared CSV to score")->required();
    eval_cmd->add_option("--schema", eval.schema, "Schema file")->required();
    eval_cmd->add_option("--out", eval.out, "Optional metrics CSV");
    eval_cmd->add_option("--normal-class", eval.normal_class, "Benign class name");

    ExplainOpts expl;
    auto* expl_cmd = app.add_subcommand("explain", "Attribute model outputs to features");
    expl_cmd->add_option("--model", expl.model_path, "Model artifact")->required();
    expl_cmd->add_option("--train", expl.train_csv, "Prepared training CSV (background)");
    expl_cmd->add_option("--data", expl.data_csv, "Prepared CSV to explain")->required();
    expl_cmd->add_option("--schema", expl.schema, "Schema file")->required();
    expl_cmd->add_option("--out-dir", expl.out_dir, "Output directory")->required();
    expl_cmd->add_option("--method", expl.method, "shap or a gradient/perturbation method")
        ->capture_default_str();
    expl_cmd->add_option("--background", expl.background, "Background sample count")
        ->capture_default_str();
    expl_cmd->add_option("--samples", expl.samples, "Explained sample count")
        ->capture_default_str();
    expl_cmd->add_option("--coalitions", expl.coalitions, "Coalition budget or 'all'")
        ->capture_default_str();
    expl_cmd->add_option("--seed", expl.seed, "Explanation seed")->capture_default_str();
    expl_cmd->add_option("--threads", expl.threads, "Worker threads")->capture_default_str();

    RankOpts rank;
    auto* rank_cmd = app.add_subcommand("rank", "Build a feature ranking");
    rank_cmd->add_option("--method", rank.method, "Ranking method")->required();
    rank_cmd->add_option("--schema", rank.schema, "Schema file")->required();
    rank_cmd->add_option("--out", rank.out, "Ranking CSV path")->required();
    rank_cmd->add_option("--train", rank.train_csv, "Prepared training CSV (baselines)");
    rank_cmd->add_option("--importance-dir", rank.importance_dir,
                         "Directory of importance_<model>.csv files (aggregates)");
    rank_cmd->add_option("--accuracies", rank.accuracies,
                         "CSV with model,accuracy columns (aggregates)");
    rank_cmd->add_option("--rankings-dir", rank.rankings_dir,
                         "Directory of ranking CSVs (voting)");
    rank_cmd->add_option("--normal-class", rank.normal_class, "Benign class name");
    rank_cmd->add_option("--k", rank.k, "Top-k for combined selection");
    rank_cmd->add_option("--seed", rank.seed, "Seed for seeded baselines")->capture_default_str();

    SelectOpts sel;
    auto* sel_cmd = app.add_subcommand("select", "Project a dataset onto a ranking's top-k");
    sel_cmd->add_option("--data", sel.data_csv, "Prepared CSV")->required();
    sel_cmd->add_option("--schema", sel.schema, "Schema file")->required();
    sel_cmd->add_option("--ranking", sel.ranking_csv, "Ranking CSV")->required();
    sel_cmd->add_option("--k", sel.k, "Feature count to keep")->required();
    sel_cmd->add_option("--out", sel.out, "Output CSV path")->required();
    sel_cmd->add_option("--schema-out", sel.schema_out, "Schema path (default <out>.schema)");

    BenchOpts bench_opts;
    auto* bench_cmd = app.add_subcommand("benchmark", "Run the full selection benchmark");
    bench_cmd->add_option("--config", bench_opts.config, "Experiment config file")
        ->envname("FLOWRANK_CONFIG");
    bench_cmd->add_option("--out", bench_opts.out_dir, "Run directory")->required();
    bench_cmd->add_option("--data", bench_opts.data_csv, "Raw flow CSV");
    bench_cmd->add_option("--schema", bench_opts.schema, "Schema file");
    bench_cmd->add_option("--models", bench_opts.models_list, "Comma-separated model kinds");
    bench_cmd->add_option("--methods", bench_opts.methods_list, "Comma-separated methods");
    bench_cmd->add_option("--k", bench_opts.k_list, "Comma-separated k values (or 'all')");
    bench_cmd->add_option("--seed", bench_opts.seed, "Master seed");
    bench_cmd->add_option("--background", bench_opts.background, "Background sample count");
    bench_cmd->add_option("--samples", bench_opts.samples, "Explained sample count");
    bench_cmd->add_option("--coalitions", bench_opts.coalitions, "Coalition budget or 'all'");
    bench_cmd->add_option("--threads", bench_opts.threads, "Worker threads");
    bench_cmd->add_option("--normal-class", bench_opts.normal_class, "Benign class name");
    bench_cmd->add_option("--nonfinite", bench_opts.nonfinite,
                          "NaN/inf policy: drop-row|zero|median");

    std::string report_dir;
    auto* report_cmd = app.add_subcommand("report", "Recompute reports from a run directory");
    report_cmd->add_option("--run", report_dir, "Run directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (synth_cmd->parsed()) run_synth(synth);
        else if (prep_cmd->parsed()) run_prepare(prep);
        else if (train_cmd->parsed()) run_train(train);
        else if (eval_cmd->parsed()) run_evaluate(eval);
        else if (expl_cmd->parsed()) run_explain(expl);
        else if (rank_cmd->parsed()) run_rank(rank);
        else if (sel_cmd->parsed()) run_select(sel);
        else if (bench_cmd->parsed()) run_bench(bench_opts, bench_cmd);
        else if (report_cmd->parsed()) run_report(report_dir);
        return 0;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        switch (e.kind()) {
            case ErrorKind::Usage: return 1;
            case ErrorKind::Data: return 2;
            case ErrorKind::Internal: return 3;
        }
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
}
