#include "flowrank/benchmark.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "flowrank/csv.hpp"

namespace flowrank::bench {

namespace fs = std::filesystem;

namespace {

// Stage seed streams, mixed with the master seed.
constexpr std::uint64_t kStreamShuffle = 0xD5;
constexpr std::uint64_t kStreamSplit = 0x51;
constexpr std::uint64_t kStreamOversample = 0x05;
constexpr std::uint64_t kStreamBackground = 0xB6;
constexpr std::uint64_t kStreamShap = 0xA0;  // shared: every model explains the same rows
constexpr std::uint64_t kStreamGrad = 0xF0;  // shared across gradient methods, same reason
constexpr std::uint64_t kStreamBaseline = 0xBA;

bool contains(const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) != v.end();
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, ',')) {
        while (!item.empty() && item.front() == ' ') item.erase(item.begin());
        while (!item.empty() && item.back() == ' ') item.pop_back();
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::string join_list(const std::vector<std::string>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += v[i];
    }
    return out;
}

std::size_t parse_size(const std::string& s, const std::string& key) {
    try {
        std::size_t pos = 0;
        unsigned long long v = std::stoull(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
        throw UsageError("config key '" + key + "' needs an unsigned integer, got '" + s + "'");
    }
}

}  // namespace

std::vector<std::string> proposed_methods() {
    return {kModelSpecific, kOverallRank,   kWeightedRank,
            kNormalizedWeightedRank, kModelsAttacks, kCombined};
}

std::vector<std::string> baseline_methods() {
    std::vector<std::string> out;
    for (ranking::BaselineMethod m : ranking::all_baseline_methods())
        out.push_back(ranking::to_string(m));
    return out;
}

std::vector<std::string> default_methods() {
    auto out = proposed_methods();
    out.push_back(kVoting);
    for (auto& b : baseline_methods()) out.push_back(b);
    return out;
}

bool method_needs_attributions(const std::string& method) {
    return contains(proposed_methods(), method) || method == kVoting;
}

bool is_known_method(const std::string& method) {
    return method_needs_attributions(method) || contains(baseline_methods(), method);
}

ExperimentConfig::ExperimentConfig() {
    for (models::ModelKind k : models::all_model_kinds()) model_kinds.push_back(k);
    methods = default_methods();
    k_values = {5, 10, 15, kAllFeatures};
}

void ExperimentConfig::validate() const {
    if (dataset_csv.empty()) throw UsageError("experiment config needs a dataset path");
    if (schema_path.empty()) throw UsageError("experiment config needs a schema path");
    if (model_kinds.empty()) throw UsageError("experiment config needs at least one model kind");
    for (std::size_t i = 0; i < model_kinds.size(); ++i)
        for (std::size_t j = i + 1; j < model_kinds.size(); ++j)
            if (model_kinds[i] == model_kinds[j])
                throw UsageError("duplicate model kind '" + models::to_string(model_kinds[i]) + "'");
    if (methods.empty()) throw UsageError("experiment config needs at least one method");
    for (std::size_t i = 0; i < methods.size(); ++i) {
        if (!is_known_method(methods[i])) throw UsageError("unknown method '" + methods[i] + "'");
        for (std::size_t j = i + 1; j < methods.size(); ++j)
            if (methods[i] == methods[j]) throw UsageError("duplicate method '" + methods[i] + "'");
    }
    if (k_values.empty()) throw UsageError("experiment config needs at least one k value");
    for (std::size_t i = 0; i < k_values.size(); ++i)
        for (std::size_t j = i + 1; j < k_values.size(); ++j)
            if (k_values[i] == k_values[j])
                throw UsageError("duplicate k value " + std::to_string(k_values[i]));
    bool any_attr = false;
    for (const auto& m : methods) any_attr = any_attr || method_needs_attributions(m);
    if (any_attr && (background_size == 0 || n_explained == 0 || n_coalitions == 0))
        throw UsageError("attribution budget is zero but an attribution-based method was requested");
    if (contains(methods, kVoting)) {
        bool has_mlp = false;
        for (models::ModelKind k : model_kinds) has_mlp = has_mlp || k == models::ModelKind::MLP;
        if (!has_mlp) throw UsageError("the voting method needs the mlp model in the run");
    }
    if (n_threads == 0) throw UsageError("n_threads must be at least 1");
    hp.validate();
}

void ExperimentConfig::save(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw DataError("cannot open '" + path + "' for writing");
    std::vector<std::string> kind_names, k_names, hidden;
    for (models::ModelKind k : model_kinds) kind_names.push_back(models::to_string(k));
    for (std::size_t k : k_values) k_names.push_back(k == kAllFeatures ? "all" : std::to_string(k));
    for (std::size_t h : hp.mlp_hidden) hidden.push_back(std::to_string(h));

    os << "dataset = " << dataset_csv << "\n";
    os << "schema = " << schema_path << "\n";
    os << "models = " << join_list(kind_names) << "\n";
    os << "methods = " << join_list(methods) << "\n";
    os << "k_values = " << join_list(k_names) << "\n";
    os << "seed = " << seed << "\n";
    os << "background_size = " << background_size << "\n";
    os << "n_explained = " << n_explained << "\n";
    os << "n_coalitions = "
       << (n_coalitions == attribution::kAllCoalitions ? std::string("all")
                                                       : std::to_string(n_coalitions))
       << "\n";
    os << "n_threads = " << n_threads << "\n";
    os << "normal_class = " << normal_class << "\n";
    os << "nonfinite = " << data::to_string(nonfinite) << "\n";
    os << "tree_max_depth = " << hp.tree_max_depth << "\n";
    os << "min_samples_split = " << hp.min_samples_split << "\n";
    os << "rf_trees = " << hp.rf_trees << "\n";
    os << "max_thresholds = " << hp.max_thresholds << "\n";
    os << "ada_stages = " << hp.ada_stages << "\n";
    os << "knn_k = " << hp.knn_k << "\n";
    os << "svm_c = " << format_double(hp.svm_c) << "\n";
    os << "svm_epochs = " << hp.svm_epochs << "\n";
    os << "mlp_hidden = " << join_list(hidden) << "\n";
    os << "mlp_dropout = " << format_double(hp.mlp_dropout) << "\n";
    os << "mlp_epochs = " << hp.mlp_epochs << "\n";
    os << "mlp_batch = " << hp.mlp_batch << "\n";
    os << "mlp_lr = " << format_double(hp.mlp_lr) << "\n";
    os << "gbdt_lr = " << format_double(hp.gbdt_lr) << "\n";
    os << "gbdt_stages = " << hp.gbdt_stages << "\n";
    os << "gbdt_depth = " << hp.gbdt_depth << "\n";
    os << "gbdt_lambda = " << format_double(hp.gbdt_lambda) << "\n";
    if (!os) throw DataError("failed writing '" + path + "'");
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open config '" + path + "'");
    ExperimentConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string trimmed = line;
        while (!trimmed.empty() && trimmed.front() == ' ') trimmed.erase(trimmed.begin());
        if (trimmed.empty() || trimmed.front() == '#') continue;
        auto eq = trimmed.find('=');
        if (eq == std::string::npos)
            throw DataError(path + ":" + std::to_string(line_no) + ": expected key = value");
        std::string key = trimmed.substr(0, eq);
        std::string value = trimmed.substr(eq + 1);
        while (!key.empty() && key.back() == ' ') key.pop_back();
        while (!value.empty() && value.front() == ' ') value.erase(value.begin());
        while (!value.empty() && value.back() == ' ') value.pop_back();

        if (key == "dataset") cfg.dataset_csv = value;
        else if (key == "schema") cfg.schema_path = value;
        else if (key == "models") {
            cfg.model_kinds.clear();
            for (const auto& n : split_list(value))
                cfg.model_kinds.push_back(models::model_kind_from_string(n));
        } else if (key == "methods") cfg.methods = split_list(value);
        else if (key == "k_values") {
            cfg.k_values.clear();
            for (const auto& n : split_list(value))
                cfg.k_values.push_back(n == "all" ? kAllFeatures : parse_size(n, key));
        } else if (key == "seed") cfg.seed = parse_size(value, key);
        else if (key == "background_size") cfg.background_size = parse_size(value, key);
        else if (key == "n_explained") cfg.n_explained = parse_size(value, key);
        else if (key == "n_coalitions")
            cfg.n_coalitions = value == "all" ? attribution::kAllCoalitions : parse_size(value, key);
        else if (key == "n_threads") cfg.n_threads = parse_size(value, key);
        else if (key == "normal_class") cfg.normal_class = value;
        else if (key == "nonfinite") cfg.nonfinite = data::parse_nonfinite_policy(value);
        else if (key == "tree_max_depth") cfg.hp.tree_max_depth = parse_size(value, key);
        else if (key == "min_samples_split") cfg.hp.min_samples_split = parse_size(value, key);
        else if (key == "rf_trees") cfg.hp.rf_trees = parse_size(value, key);
        else if (key == "max_thresholds") cfg.hp.max_thresholds = parse_size(value, key);
        else if (key == "ada_stages") cfg.hp.ada_stages = parse_size(value, key);
        else if (key == "knn_k") cfg.hp.knn_k = parse_size(value, key);
        else if (key == "svm_c") cfg.hp.svm_c = parse_double(value);
        else if (key == "svm_epochs") cfg.hp.svm_epochs = parse_size(value, key);
        else if (key == "mlp_hidden") {
            cfg.hp.mlp_hidden.clear();
            for (const auto& n : split_list(value)) cfg.hp.mlp_hidden.push_back(parse_size(n, key));
        } else if (key == "mlp_dropout") cfg.hp.mlp_dropout = parse_double(value);
        else if (key == "mlp_epochs") cfg.hp.mlp_epochs = parse_size(value, key);
        else if (key == "mlp_batch") cfg.hp.mlp_batch = parse_size(value, key);
        else if (key == "mlp_lr") cfg.hp.mlp_lr = parse_double(value);
        else if (key == "gbdt_lr") cfg.hp.gbdt_lr = parse_double(value);
        else if (key == "gbdt_stages") cfg.hp.gbdt_stages = parse_size(value, key);
        else if (key == "gbdt_depth") cfg.hp.gbdt_depth = parse_size(value, key);
        else if (key == "gbdt_lambda") cfg.hp.gbdt_lambda = parse_double(value);
        else throw DataError(path + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    return cfg;
}

double measure_runtime(const std::function<void()>& f) {
    auto start = std::chrono::steady_clock::now();
    f();
    auto end = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(end - start).count();
}

std::size_t resolve_normal_class(const data::FeatureSchema& schema, const std::string& name) {
    auto lower = [](std::string s) {
        for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        return s;
    };
    if (!name.empty()) {
        for (std::size_t c = 0; c < schema.class_names.size(); ++c)
            if (schema.class_names[c] == name) return c;
        throw DataError("normal class '" + name + "' is not in the schema");
    }
    for (std::size_t c = 0; c < schema.class_names.size(); ++c) {
        std::string lc = lower(schema.class_names[c]);
        if (lc == "benign" || lc == "normal") return c;
    }
    for (std::size_t c = 0; c < schema.class_names.size(); ++c) {
        std::string lc = lower(schema.class_names[c]);
        if (lc.find("benign") != std::string::npos || lc.find("normal") != std::string::npos)
            return c;
    }
    return 0;
}

namespace {

struct EvalOutcome {
    metrics::MetricSet ms;
    std::vector<double> per_class_accuracy;
    double alert_fpr = 0.0;
    double test_time_s = 0.0;
};

EvalOutcome evaluate_model(const models::Model& m, const Matrix& x,
                           const std::vector<std::size_t>& y, std::size_t n_classes,
                           std::size_t normal_class) {
    EvalOutcome out;
    Matrix proba;
    out.test_time_s = measure_runtime([&] { proba = m.predict_proba(x); });
    std::vector<std::size_t> pred(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) pred[i] = argmax_tie_low(proba.row(i));
    auto cm = metrics::confusion(y, pred, n_classes);
    out.ms = metrics::classification_metrics(cm);
    out.ms.aucroc = metrics::auc_roc_ovr(proba, y);
    out.per_class_accuracy = metrics::per_class_accuracy(cm);
    out.alert_fpr = metrics::false_positive_rate(cm, normal_class);
    return out;
}

const ranking::FeatureRanking& find_ranking(const RunArtifacts& art, const std::string& stem) {
    for (const auto& [name, r] : art.rankings)
        if (name == stem) return r;
    throw InternalError("missing ranking '" + stem + "'");
}

void write_chart(const std::string& path, const std::string& title,
                 const std::vector<std::string>& feature_names,
                 const std::vector<double>& overall) {
    auto order = ranking::rank_from_importance(overall, title);
    double vmax = 0.0;
    for (double v : overall) vmax = std::max(vmax, std::abs(v));
    std::size_t name_w = 0;
    for (const auto& n : feature_names) name_w = std::max(name_w, n.size());

    std::ofstream os(path);
    if (!os) throw DataError("cannot open '" + path + "' for writing");
    os << title << "\n";
    for (const auto& [id, score] : order.entries) {
        std::size_t width =
            vmax > 0.0 ? static_cast<std::size_t>(std::lround(40.0 * std::abs(score) / vmax)) : 0;
        os << feature_names[id] << std::string(name_w - feature_names[id].size(), ' ') << "  "
           << std::string(width, '#') << std::string(40 - width, ' ') << "  "
           << format_double(score) << "\n";
    }
    if (!os) throw DataError("failed writing '" + path + "'");
}

}  // namespace

RunArtifacts run_experiment_matrix(const ExperimentConfig& cfg) {
    cfg.validate();
    RunArtifacts art;
    art.config = cfg;

    // §-style pipeline: load, dedup+shuffle, 70/30 split, oversample the
    // training split only, then min-max fit on train applied to both.
    art.schema = data::FeatureSchema::load(cfg.schema_path);
    auto [raw, rep] = data::load_csv(cfg.dataset_csv, art.schema, cfg.nonfinite);
    auto dedup = data::deduplicate_and_shuffle(raw, mix_seed(cfg.seed, kStreamShuffle));
    rep.merge(dedup.second);
    auto split = data::split_train_test(dedup.first, {0.70, mix_seed(cfg.seed, kStreamSplit)});
    data::Dataset train = std::move(split.first);
    data::Dataset test = std::move(split.second);

    auto before = train.class_counts();
    for (std::size_t c = 0; c < before.size(); ++c)
        rep.per_class_before_oversample[art.schema.class_names[c]] = before[c];
    train = data::oversample_random(train, mix_seed(cfg.seed, kStreamOversample));
    auto after = train.class_counts();
    for (std::size_t c = 0; c < after.size(); ++c)
        rep.per_class_after_oversample[art.schema.class_names[c]] = after[c];

    auto mm = data::minmax_fit_apply(train, {&test});
    rep.minmax_params = mm.per_feature;
    art.prep = rep;

    const std::size_t nf = train.n_features();
    const std::size_t nc = train.n_classes();
    for (std::size_t k : cfg.k_values)
        if (k != kAllFeatures && k > nf)
            throw UsageError("k = " + std::to_string(k) + " exceeds the feature count " +
                             std::to_string(nf));
    art.normal_class = resolve_normal_class(art.schema, cfg.normal_class);

    bool any_attr = false;
    for (const auto& m : cfg.methods) any_attr = any_attr || method_needs_attributions(m);
    bool need_shap = false;
    for (const auto& m : cfg.methods)
        need_shap = need_shap || (method_needs_attributions(m) && m != kVoting);
    const bool include_all_rows =
        std::find(cfg.k_values.begin(), cfg.k_values.end(), kAllFeatures) != cfg.k_values.end();

    // Full-feature phase: train, evaluate, and (when needed) explain every model.
    attribution::BackgroundSet bg;
    if (any_attr)
        bg = attribution::BackgroundSet::sample_from(
            train.x, std::min(cfg.background_size, train.size()),
            mix_seed(cfg.seed, kStreamBackground));

    std::vector<double> full_acc;
    for (std::size_t mi = 0; mi < cfg.model_kinds.size(); ++mi) {
        models::ModelKind kind = cfg.model_kinds[mi];
        std::string name = models::to_string(kind);
        art.model_names.push_back(name);

        std::unique_ptr<models::Model> model;
        double train_t = measure_runtime(
            [&] { model = models::train(kind, cfg.hp, train, cfg.seed, cfg.n_threads); });
        EvalOutcome ev = evaluate_model(*model, test.x, test.y, nc, art.normal_class);
        full_acc.push_back(ev.ms.acc);

        ResultRow row;
        row.model = name;
        row.method = kAllFeaturesMethod;
        row.k = nf;
        row.metrics = ev.ms;
        row.per_class_accuracy = ev.per_class_accuracy;
        row.alert_fpr = ev.alert_fpr;
        row.train_time_s = train_t;
        row.test_time_s = ev.test_time_s;

        if (need_shap) {
            attribution::AttributionMatrix att;
            row.explain_time_s = measure_runtime([&] {
                att = attribution::explain_shap(*model, bg, test.x, cfg.n_explained,
                                                cfg.n_coalitions, mix_seed(cfg.seed, kStreamShap),
                                                cfg.n_threads);
            });
            art.importances.push_back(attribution::global_importance(att));
        }
        if (include_all_rows) art.rows.push_back(row);
        art.trained.push_back(std::move(model));
    }

    // Build every requested ranking over the full feature set.
    if (need_shap) {
        ranking::RankContext ctx;
        ctx.model_names = art.model_names;
        ctx.accuracies = full_acc;
        ctx.n_features = nf;
        for (const auto& gi : art.importances) {
            ctx.model_overall.push_back(gi.overall);
            ctx.model_per_class.push_back(gi.per_class);
        }
        for (std::size_t c = 0; c < nc; ++c)
            if (c != art.normal_class) {
                ctx.attack_classes.push_back(c);
                ctx.attack_names.push_back(art.schema.class_names[c]);
            }

        std::vector<std::string> specific_stems;
        for (std::size_t mi = 0; mi < art.model_names.size(); ++mi) {
            auto r = ranking::rank_from_importance(ctx.model_overall[mi],
                                                   std::string(kModelSpecific) + "_" +
                                                       art.model_names[mi]);
            specific_stems.push_back(r.method);
            art.rankings.emplace_back(r.method, std::move(r));
        }
        art.rankings.emplace_back(kOverallRank, ranking::overall_rank(ctx));
        art.rankings.emplace_back(kWeightedRank, ranking::weighted_rank(ctx));
        art.rankings.emplace_back(kNormalizedWeightedRank, ranking::normalized_weighted_rank(ctx));
        art.rankings.emplace_back(kModelsAttacks, ranking::models_attacks_score(ctx));

        if (contains(cfg.methods, kCombined)) {
            std::vector<ranking::FeatureRanking> inputs;
            for (const auto& stem : specific_stems) inputs.push_back(find_ranking(art, stem));
            inputs.push_back(find_ranking(art, kOverallRank));
            inputs.push_back(find_ranking(art, kWeightedRank));
            inputs.push_back(find_ranking(art, kNormalizedWeightedRank));
            inputs.push_back(find_ranking(art, kModelsAttacks));
            for (std::size_t k : cfg.k_values)
                if (k != kAllFeatures)
                    art.rankings.emplace_back(std::string(kCombined) + "_k" + std::to_string(k),
                                              ranking::combined_selection(inputs, k));
        }
    }

    if (contains(cfg.methods, kVoting)) {
        std::size_t mlp_idx = 0;
        while (cfg.model_kinds[mlp_idx] != models::ModelKind::MLP) ++mlp_idx;
        attribution::GradConfig gcfg;
        std::vector<ranking::FeatureRanking> inputs;
        auto grad_methods = attribution::all_grad_methods();
        for (std::size_t gi = 0; gi < grad_methods.size(); ++gi) {
            auto att = attribution::explain_gradient(*art.trained[mlp_idx], grad_methods[gi],
                                                     test.x, cfg.n_explained, gcfg,
                                                     mix_seed(cfg.seed, kStreamGrad),
                                                     cfg.n_threads);
            auto imp = attribution::global_importance(att);
            inputs.push_back(
                ranking::rank_from_importance(imp.overall, attribution::to_string(grad_methods[gi])));
            art.rankings.emplace_back("voting_input_" + attribution::to_string(grad_methods[gi]),
                                      inputs.back());
        }
        art.rankings.emplace_back(kVoting, ranking::voting(inputs));
    }

    for (const auto& method : cfg.methods)
        if (contains(baseline_methods(), method))
            art.rankings.emplace_back(
                method, ranking::baseline_rank(ranking::baseline_method_from_string(method), train,
                                               mix_seed(cfg.seed, kStreamBaseline)));

    // Selection-then-retrain grid.
    for (const auto& method : cfg.methods) {
        for (std::size_t k : cfg.k_values) {
            if (k == kAllFeatures) continue;
            for (std::size_t mi = 0; mi < cfg.model_kinds.size(); ++mi) {
                std::string name = art.model_names[mi];
                const ranking::FeatureRanking& r =
                    method == kModelSpecific ? find_ranking(art, std::string(kModelSpecific) + "_" + name)
                    : method == kCombined ? find_ranking(art, std::string(kCombined) + "_k" + std::to_string(k))
                                          : find_ranking(art, method);
                auto subset = ranking::select_top_k(r, k);
                Matrix sub_train = train.x.select_columns(subset);
                Matrix sub_test = test.x.select_columns(subset);

                std::unique_ptr<models::Model> model;
                double train_t = measure_runtime([&] {
                    model = models::train(cfg.model_kinds[mi], cfg.hp, sub_train, train.y, nc,
                                          cfg.seed, cfg.n_threads);
                });
                EvalOutcome ev = evaluate_model(*model, sub_test, test.y, nc, art.normal_class);

                ResultRow row;
                row.model = name;
                row.method = method;
                row.k = k;
                row.metrics = ev.ms;
                row.per_class_accuracy = ev.per_class_accuracy;
                row.alert_fpr = ev.alert_fpr;
                row.train_time_s = train_t;
                row.test_time_s = ev.test_time_s;
                art.rows.push_back(row);
            }
        }
    }

    art.board = weighted_scoring(art.rows, cfg.methods);
    return art;
}

ScoreBoard weighted_scoring(const std::vector<ResultRow>& rows,
                            const std::vector<std::string>& methods) {
    if (methods.empty()) throw UsageError("weighted scoring needs a non-empty method list");

    std::map<std::pair<std::string, std::size_t>, std::map<std::string, const ResultRow*>> cells;
    for (const auto& row : rows) {
        if (!contains(methods, row.method)) continue;
        auto& cell = cells[{row.model, row.k}];
        if (cell.count(row.method))
            throw DataError("duplicate result row for model=" + row.model +
                            " k=" + std::to_string(row.k) + " method=" + row.method);
        cell[row.method] = &row;
    }

    ScoreBoard board;
    for (const auto& m : methods) board.entries.push_back({m, 0, 0, 0});
    board.cells = cells.size();

    for (const auto& [key, cell] : cells) {
        for (const auto& m : methods)
            if (!cell.count(m))
                throw DataError("scoring cell model=" + key.first +
                                " k=" + std::to_string(key.second) + " is missing method '" + m +
                                "'");
        auto tuple_of = [&](const std::string& m) {
            const auto& s = cell.at(m)->metrics;
            return std::array<double, 7>{s.acc, s.prec, s.rec, s.f1, s.bacc, s.mcc, s.aucroc};
        };
        std::vector<std::size_t> order(methods.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            auto ta = tuple_of(methods[a]);
            auto tb = tuple_of(methods[b]);
            if (ta != tb) return ta > tb;
            return a < b;  // full metric ties keep the input method order
        });
        std::size_t rank = 0;
        std::array<double, 7> prev{};
        for (std::size_t i = 0; i < order.size() && rank <= 3; ++i) {
            auto t = tuple_of(methods[order[i]]);
            if (i == 0 || t != prev) ++rank;
            prev = t;
            if (rank == 1) ++board.entries[order[i]].first;
            else if (rank == 2) ++board.entries[order[i]].second;
            else if (rank == 3) ++board.entries[order[i]].third;
        }
    }
    return board;
}

void save_results_csv(const std::vector<ResultRow>& rows, const std::string& path) {
    csv::Table t;
    t.header = {"model", "method", "k", "acc", "prec", "rec", "f1", "bacc", "mcc", "aucroc", "fpr"};
    for (const auto& r : rows)
        t.rows.push_back({r.model, r.method, std::to_string(r.k), format_double(r.metrics.acc),
                          format_double(r.metrics.prec), format_double(r.metrics.rec),
                          format_double(r.metrics.f1), format_double(r.metrics.bacc),
                          format_double(r.metrics.mcc), format_double(r.metrics.aucroc),
                          format_double(r.metrics.fpr)});
    csv::write_file(path, t);
}

std::vector<ResultRow> load_results_csv(const std::string& path) {
    auto t = csv::read_file(path);
    const char* names[] = {"model", "method", "k",   "acc",    "prec", "rec",
                           "f1",    "bacc",   "mcc", "aucroc", "fpr"};
    std::vector<int> cols;
    for (const char* n : names) {
        int c = t.find_column(n);
        if (c < 0) throw SchemaError("results file '" + path + "' is missing column '" +
                                     std::string(n) + "'");
        cols.push_back(c);
    }
    std::vector<ResultRow> rows;
    for (const auto& raw : t.rows) {
        ResultRow r;
        r.model = raw[static_cast<std::size_t>(cols[0])];
        r.method = raw[static_cast<std::size_t>(cols[1])];
        r.k = parse_size(raw[static_cast<std::size_t>(cols[2])], "k");
        r.metrics.acc = parse_double(raw[static_cast<std::size_t>(cols[3])]);
        r.metrics.prec = parse_double(raw[static_cast<std::size_t>(cols[4])]);
        r.metrics.rec = parse_double(raw[static_cast<std::size_t>(cols[5])]);
        r.metrics.f1 = parse_double(raw[static_cast<std::size_t>(cols[6])]);
        r.metrics.bacc = parse_double(raw[static_cast<std::size_t>(cols[7])]);
        r.metrics.mcc = parse_double(raw[static_cast<std::size_t>(cols[8])]);
        r.metrics.aucroc = parse_double(raw[static_cast<std::size_t>(cols[9])]);
        r.metrics.fpr = parse_double(raw[static_cast<std::size_t>(cols[10])]);
        rows.push_back(std::move(r));
    }
    return rows;
}

void emit_reports(const RunArtifacts& art, const std::string& out_dir) {
    fs::create_directories(fs::path(out_dir) / "models");
    fs::create_directories(fs::path(out_dir) / "rankings");
    fs::create_directories(fs::path(out_dir) / "metrics");
    fs::create_directories(fs::path(out_dir) / "boards");
    fs::create_directories(fs::path(out_dir) / "charts");
    auto at = [&](const std::string& rel) { return (fs::path(out_dir) / rel).string(); };

    art.config.save(at("config.txt"));
    art.schema.save(at("schema.txt"));
    art.prep.write_csv(at("preprocess_report.csv"), art.schema);

    for (std::size_t i = 0; i < art.trained.size(); ++i)
        models::save_model(*art.trained[i], at("models/" + art.model_names[i] + ".bin"));

    for (const auto& [stem, r] : art.rankings)
        ranking::save_ranking(r, at("rankings/" + stem + ".csv"), art.schema.feature_names);

    save_results_csv(art.rows, at("metrics/results.csv"));

    csv::Table attack;
    attack.header = {"model", "method", "k", "class", "accuracy"};
    for (const auto& r : art.rows)
        for (std::size_t c = 0; c < r.per_class_accuracy.size(); ++c)
            attack.rows.push_back({r.model, r.method, std::to_string(r.k),
                                   art.schema.class_names[c],
                                   format_double(r.per_class_accuracy[c])});
    csv::write_file(at("metrics/per_attack_accuracy.csv"), attack);

    csv::Table fpr;
    fpr.header = {"model", "method", "k", "alert_fpr"};
    for (const auto& r : art.rows)
        fpr.rows.push_back({r.model, r.method, std::to_string(r.k), format_double(r.alert_fpr)});
    csv::write_file(at("metrics/fpr.csv"), fpr);

    csv::Table times;
    times.header = {"model", "method", "k", "train_s", "test_s", "explain_s"};
    for (const auto& r : art.rows)
        times.rows.push_back({r.model, r.method, std::to_string(r.k),
                              format_double(r.train_time_s), format_double(r.test_time_s),
                              format_double(r.explain_time_s)});
    // Wall-clock timings are the one non-reproducible output, so they live
    // at the run root; everything under metrics/ stays byte-stable.
    csv::write_file(at("runtimes.csv"), times);

    for (std::size_t i = 0; i < art.importances.size(); ++i) {
        attribution::save_importance(art.importances[i],
                                     at("metrics/importance_" + art.model_names[i] + ".csv"),
                                     art.schema.feature_names, art.schema.class_names);
        write_chart(at("charts/importance_" + art.model_names[i] + ".txt"),
                    art.model_names[i] + " global importance", art.schema.feature_names,
                    art.importances[i].overall);
    }

    // Per-attack leaders from per-class importance pooled across models.
    if (!art.importances.empty()) {
        const std::size_t nc = art.schema.class_names.size();
        const std::size_t nf = art.schema.feature_names.size();
        csv::Table top;
        top.header = {"class", "rank", "feature", "importance"};
        for (std::size_t c = 0; c < nc; ++c) {
            std::vector<double> pooled(nf, 0.0);
            for (const auto& gi : art.importances)
                for (std::size_t f = 0; f < nf; ++f) pooled[f] += gi.per_class.at(c, f);
            for (double& v : pooled) v /= static_cast<double>(art.importances.size());
            auto r = ranking::rank_from_importance(pooled);
            for (std::size_t i = 0; i < std::min<std::size_t>(5, r.entries.size()); ++i)
                top.rows.push_back({art.schema.class_names[c], std::to_string(i + 1),
                                    art.schema.feature_names[r.entries[i].first],
                                    format_double(r.entries[i].second)});
        }
        csv::write_file(at("metrics/top_features_per_attack.csv"), top);
    }

    csv::Table board;
    board.header = {"method", "first", "second", "third", "score"};
    for (const auto& e : art.board.entries)
        board.rows.push_back({e.method, std::to_string(e.first), std::to_string(e.second),
                              std::to_string(e.third), std::to_string(e.score())});
    csv::write_file(at("boards/scoreboard.csv"), board);
}

RunArtifacts run_benchmark(const ExperimentConfig& cfg, const std::string& out_dir) {
    RunArtifacts art = run_experiment_matrix(cfg);
    emit_reports(art, out_dir);
    return art;
}

}  // namespace flowrank::bench
