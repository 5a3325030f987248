#include "flowrank/flowdata.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <unordered_map>

#include "flowrank/csv.hpp"

namespace flowrank::data {

void FeatureSchema::validate() const {
    std::set<std::string> seen;
    for (const auto& f : feature_names) {
        if (!seen.insert(f).second) throw SchemaError("duplicate feature name: " + f);
        if (f == label_column) throw SchemaError("label column listed as feature: " + f);
    }
    if (label_column.empty()) throw SchemaError("schema has no label column");
    if (class_names.empty()) throw SchemaError("schema has no classes");
    for (const auto& [raw, idx] : label_map)
        if (idx >= class_names.size())
            throw SchemaError("label map entry '" + raw + "' points past class list");
}

FeatureSchema FeatureSchema::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open schema file: " + path);
    FeatureSchema s;
    std::vector<std::pair<std::string, std::string>> raw_maps;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw SchemaError(path + ":" + std::to_string(lineno) + ": expected key=value");
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        if (key == "label_column") {
            s.label_column = value;
        } else if (key == "feature") {
            s.feature_names.push_back(value);
        } else if (key == "class") {
            s.class_names.push_back(value);
        } else if (key == "map") {
            auto colon = value.rfind(':');
            if (colon == std::string::npos)
                throw SchemaError(path + ":" + std::to_string(lineno) + ": map needs raw:class");
            raw_maps.emplace_back(value.substr(0, colon), value.substr(colon + 1));
        } else {
            throw SchemaError(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
    }
    auto class_index = [&](const std::string& name) -> std::size_t {
        for (std::size_t i = 0; i < s.class_names.size(); ++i)
            if (s.class_names[i] == name) return i;
        throw SchemaError(path + ": map target is not a declared class: " + name);
    };
    for (std::size_t i = 0; i < s.class_names.size(); ++i) s.label_map[s.class_names[i]] = i;
    for (const auto& [raw, cls] : raw_maps) s.label_map[raw] = class_index(cls);
    s.validate();
    return s;
}

void FeatureSchema::save(const std::string& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write schema file: " + path);
    out << "label_column=" << label_column << '\n';
    for (const auto& f : feature_names) out << "feature=" << f << '\n';
    for (const auto& c : class_names) out << "class=" << c << '\n';
    for (const auto& [raw, idx] : label_map)
        if (raw != class_names[idx]) out << "map=" << raw << ':' << class_names[idx] << '\n';
    if (!out) throw DataError("write failure: " + path);
}

std::vector<std::size_t> Dataset::class_counts() const {
    std::vector<std::size_t> counts(schema.n_classes(), 0);
    for (std::size_t c : y) {
        if (c >= counts.size()) throw LabelError("class index out of range: " + std::to_string(c));
        ++counts[c];
    }
    return counts;
}

void Dataset::validate() const {
    if (x.rows() != y.size()) throw ShapeError("row count does not match label count");
    if (x.cols() != schema.n_features()) throw ShapeError("column count does not match schema");
    if (!x.all_finite()) throw DataError("dataset contains non-finite values");
    for (std::size_t c : y)
        if (c >= schema.n_classes()) throw LabelError("class index out of range: " + std::to_string(c));
}

void PreprocessReport::merge(const PreprocessReport& delta) {
    if (rows_in == 0) rows_in = delta.rows_in;
    duplicates_removed += delta.duplicates_removed;
    nonfinite_cells_handled += delta.nonfinite_cells_handled;
    nonfinite_rows_dropped += delta.nonfinite_rows_dropped;
    for (const auto& [k, v] : delta.per_class_before_oversample) per_class_before_oversample[k] = v;
    for (const auto& [k, v] : delta.per_class_after_oversample) per_class_after_oversample[k] = v;
    if (!delta.minmax_params.empty()) minmax_params = delta.minmax_params;
}

void PreprocessReport::write_csv(const std::string& path, const FeatureSchema& schema) const {
    csv::Table t;
    t.header = {"key", "value"};
    auto put = [&](const std::string& k, const std::string& v) { t.rows.push_back({k, v}); };
    put("rows_in", std::to_string(rows_in));
    put("duplicates_removed", std::to_string(duplicates_removed));
    put("nonfinite_cells_handled", std::to_string(nonfinite_cells_handled));
    put("nonfinite_rows_dropped", std::to_string(nonfinite_rows_dropped));
    for (const auto& [k, v] : per_class_before_oversample) put("class_before_oversample:" + k, std::to_string(v));
    for (const auto& [k, v] : per_class_after_oversample) put("class_after_oversample:" + k, std::to_string(v));
    for (std::size_t j = 0; j < minmax_params.size(); ++j) {
        const std::string name = j < schema.feature_names.size() ? schema.feature_names[j] : std::to_string(j);
        put("minmax_min:" + name, format_double(minmax_params[j].first));
        put("minmax_max:" + name, format_double(minmax_params[j].second));
    }
    csv::write_file(path, t);
}

NonFinitePolicy parse_nonfinite_policy(const std::string& name) {
    if (name == "drop-row") return NonFinitePolicy::DropRow;
    if (name == "zero") return NonFinitePolicy::Zero;
    if (name == "median") return NonFinitePolicy::Median;
    throw UsageError("unknown non-finite policy: " + name);
}

std::string to_string(NonFinitePolicy policy) {
    switch (policy) {
        case NonFinitePolicy::DropRow: return "drop-row";
        case NonFinitePolicy::Zero: return "zero";
        case NonFinitePolicy::Median: return "median";
    }
    return "?";
}

namespace {

std::string trim_copy(const std::string& s) {
    auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

// Flow exports are messy: headers carry stray spaces and repeated names.
// Match exactly first, then trimmed, then "<base>.N" against the (N+1)-th
// occurrence of a repeated header (the usual rename for duplicates).
int locate_column(const csv::Table& t, const std::string& name) {
    int exact = t.find_column(name);
    if (exact >= 0) return exact;
    const std::string want = trim_copy(name);
    for (std::size_t i = 0; i < t.header.size(); ++i)
        if (trim_copy(t.header[i]) == want) return static_cast<int>(i);
    auto dot = want.rfind('.');
    if (dot != std::string::npos && dot + 1 < want.size()) {
        std::string base = want.substr(0, dot);
        std::string suffix = want.substr(dot + 1);
        bool numeric = !suffix.empty();
        for (char c : suffix) numeric = numeric && c >= '0' && c <= '9';
        if (!base.empty() && numeric) {
            std::size_t target = std::stoul(suffix);
            std::size_t seen = 0;
            for (std::size_t i = 0; i < t.header.size(); ++i)
                if (trim_copy(t.header[i]) == base) {
                    if (seen == target) return static_cast<int>(i);
                    ++seen;
                }
        }
    }
    return -1;
}

double parse_cell(const std::string& s) {
    if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
    // Flow exports spell non-finite values several ways.
    if (s == "Infinity" || s == "inf" || s == "Inf") return std::numeric_limits<double>::infinity();
    if (s == "-Infinity" || s == "-inf" || s == "-Inf") return -std::numeric_limits<double>::infinity();
    if (s == "NaN" || s == "nan") return std::numeric_limits<double>::quiet_NaN();
    double v = 0.0;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    while (begin < end && *begin == ' ') ++begin;
    auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc() || res.ptr != end)
        throw DataError("not a numeric cell: '" + s + "'");
    return v;
}

double column_median(std::vector<double> values) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    std::size_t n = values.size();
    return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

std::pair<Dataset, PreprocessReport> load_csv(const std::string& path, const FeatureSchema& schema,
                                              NonFinitePolicy policy) {
    schema.validate();
    csv::Table table = csv::read_file(path);
    if (table.rows.empty()) throw DataError(path + ": no data rows");

    std::vector<std::size_t> feature_cols(schema.n_features());
    for (std::size_t j = 0; j < schema.n_features(); ++j) {
        int col = locate_column(table, schema.feature_names[j]);
        if (col < 0) throw SchemaError(path + ": missing column '" + schema.feature_names[j] + "'");
        feature_cols[j] = static_cast<std::size_t>(col);
    }
    int label_col = locate_column(table, schema.label_column);
    if (label_col < 0) throw SchemaError(path + ": missing label column '" + schema.label_column + "'");

    PreprocessReport report;
    report.rows_in = table.rows.size();

    const std::size_t nf = schema.n_features();
    Matrix x(table.rows.size(), nf);
    std::vector<std::size_t> y(table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        for (std::size_t j = 0; j < nf; ++j) x.at(i, j) = parse_cell(row[feature_cols[j]]);
        const std::string& raw = row[static_cast<std::size_t>(label_col)];
        auto it = schema.label_map.find(raw);
        if (it == schema.label_map.end()) it = schema.label_map.find(trim_copy(raw));
        if (it == schema.label_map.end()) throw LabelError(path + ": unmapped label value '" + raw + "'");
        y[i] = it->second;
    }

    // Non-finite handling per policy.
    std::vector<bool> keep(x.rows(), true);
    std::vector<double> medians;
    if (policy == NonFinitePolicy::Median) {
        medians.resize(nf);
        for (std::size_t j = 0; j < nf; ++j) {
            std::vector<double> finite;
            finite.reserve(x.rows());
            for (std::size_t i = 0; i < x.rows(); ++i)
                if (std::isfinite(x.at(i, j))) finite.push_back(x.at(i, j));
            medians[j] = column_median(std::move(finite));
        }
    }
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t j = 0; j < nf; ++j) {
            if (std::isfinite(x.at(i, j))) continue;
            ++report.nonfinite_cells_handled;
            switch (policy) {
                case NonFinitePolicy::DropRow: keep[i] = false; break;
                case NonFinitePolicy::Zero: x.at(i, j) = 0.0; break;
                case NonFinitePolicy::Median: x.at(i, j) = medians[j]; break;
            }
        }
    }

    Dataset out;
    out.schema = schema;
    std::vector<std::size_t> kept;
    kept.reserve(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i)
        if (keep[i]) kept.push_back(i);
    report.nonfinite_rows_dropped = x.rows() - kept.size();
    out.x = x.select_rows(kept);
    out.y.reserve(kept.size());
    for (std::size_t i : kept) out.y.push_back(y[i]);
    out.validate();
    return {std::move(out), report};
}

std::pair<Dataset, PreprocessReport> deduplicate_and_shuffle(const Dataset& d, std::uint64_t seed) {
    d.validate();
    // Exact duplicate = bit-identical feature row plus the same label.
    struct RowKey {
        const Dataset* d;
        std::size_t i;
    };
    auto row_hash = [&](std::size_t i) {
        std::uint64_t h = 1469598103934665603ULL;
        auto row = d.x.row(i);
        for (double v : row) {
            std::uint64_t bits;
            std::memcpy(&bits, &v, sizeof(bits));
            h = (h ^ bits) * 1099511628211ULL;
        }
        h = (h ^ static_cast<std::uint64_t>(d.y[i])) * 1099511628211ULL;
        return h;
    };
    auto row_equal = [&](std::size_t a, std::size_t b) {
        if (d.y[a] != d.y[b]) return false;
        auto ra = d.x.row(a), rb = d.x.row(b);
        return std::memcmp(ra.data(), rb.data(), ra.size() * sizeof(double)) == 0;
    };

    std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets;
    std::vector<std::size_t> survivors;
    survivors.reserve(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        auto& bucket = buckets[row_hash(i)];
        bool dup = false;
        for (std::size_t j : bucket)
            if (row_equal(i, j)) {
                dup = true;
                break;
            }
        if (!dup) {
            bucket.push_back(i);
            survivors.push_back(i);
        }
    }

    auto rng = make_rng(seed);
    std::shuffle(survivors.begin(), survivors.end(), rng);

    Dataset out;
    out.schema = d.schema;
    out.x = d.x.select_rows(survivors);
    out.y.reserve(survivors.size());
    for (std::size_t i : survivors) out.y.push_back(d.y[i]);

    PreprocessReport delta;
    delta.rows_in = d.size();
    delta.duplicates_removed = d.size() - survivors.size();
    return {std::move(out), delta};
}

Dataset oversample_random(const Dataset& d, std::uint64_t seed) {
    d.validate();
    std::vector<std::vector<std::size_t>> by_class(d.n_classes());
    for (std::size_t i = 0; i < d.size(); ++i) by_class[d.y[i]].push_back(i);

    std::size_t majority = 0;
    for (const auto& rows : by_class) majority = std::max(majority, rows.size());
    for (std::size_t c = 0; c < by_class.size(); ++c)
        if (by_class[c].empty())
            throw DataError("cannot oversample empty class: " + d.schema.class_names[c]);

    std::vector<std::size_t> indices(d.size());
    std::iota(indices.begin(), indices.end(), 0);
    auto rng = make_rng(seed);
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        const auto& rows = by_class[c];
        std::uniform_int_distribution<std::size_t> pick(0, rows.size() - 1);
        for (std::size_t extra = rows.size(); extra < majority; ++extra)
            indices.push_back(rows[pick(rng)]);
    }

    Dataset out;
    out.schema = d.schema;
    out.x = d.x.select_rows(indices);
    out.y.reserve(indices.size());
    for (std::size_t i : indices) out.y.push_back(d.y[i]);
    return out;
}

MinMaxParams minmax_fit_apply(Dataset& train, std::vector<Dataset*> others) {
    train.validate();
    if (train.size() == 0) throw DataError("minmax: empty training set");
    MinMaxParams params;
    params.per_feature.resize(train.n_features());
    for (std::size_t j = 0; j < train.n_features(); ++j) {
        double lo = train.x.at(0, j), hi = train.x.at(0, j);
        for (std::size_t i = 1; i < train.size(); ++i) {
            lo = std::min(lo, train.x.at(i, j));
            hi = std::max(hi, train.x.at(i, j));
        }
        params.per_feature[j] = {lo, hi};
    }
    auto apply = [&](Dataset& ds) {
        if (ds.n_features() != params.per_feature.size())
            throw ShapeError("minmax: feature count mismatch");
        for (std::size_t j = 0; j < ds.n_features(); ++j) {
            auto [lo, hi] = params.per_feature[j];
            double range = hi - lo;
            for (std::size_t i = 0; i < ds.size(); ++i)
                ds.x.at(i, j) = range > 0.0 ? (ds.x.at(i, j) - lo) / range : 0.0;
        }
    };
    apply(train);
    for (Dataset* other : others)
        if (other) apply(*other);
    return params;
}

std::pair<Dataset, Dataset> split_train_test(const Dataset& d, const SplitSpec& spec) {
    d.validate();
    if (d.size() < 2) throw DataError("split needs at least 2 samples");
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
        throw UsageError("train_fraction must lie in (0,1)");
    std::vector<std::size_t> order(d.size());
    std::iota(order.begin(), order.end(), 0);
    auto rng = make_rng(spec.seed);
    std::shuffle(order.begin(), order.end(), rng);
    auto n_train = static_cast<std::size_t>(std::llround(spec.train_fraction * static_cast<double>(d.size())));
    n_train = std::clamp<std::size_t>(n_train, 1, d.size() - 1);

    auto take = [&](std::size_t begin, std::size_t end) {
        Dataset part;
        part.schema = d.schema;
        std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                     order.begin() + static_cast<std::ptrdiff_t>(end));
        part.x = d.x.select_rows(idx);
        part.y.reserve(idx.size());
        for (std::size_t i : idx) part.y.push_back(d.y[i]);
        return part;
    };
    return {take(0, n_train), take(n_train, d.size())};
}

Dataset stratified_subsample(const Dataset& d, std::size_t n_target, std::uint64_t seed) {
    d.validate();
    if (n_target >= d.size()) return d;
    std::vector<std::vector<std::size_t>> by_class(d.n_classes());
    for (std::size_t i = 0; i < d.size(); ++i) by_class[d.y[i]].push_back(i);

    auto rng = make_rng(seed);
    std::vector<std::size_t> chosen;
    chosen.reserve(n_target);
    for (auto& rows : by_class) {
        if (rows.empty()) continue;
        double share = static_cast<double>(rows.size()) / static_cast<double>(d.size());
        auto want = static_cast<std::size_t>(std::llround(share * static_cast<double>(n_target)));
        want = std::clamp<std::size_t>(want, 1, rows.size());
        std::shuffle(rows.begin(), rows.end(), rng);
        chosen.insert(chosen.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(want));
    }
    std::sort(chosen.begin(), chosen.end());
    Dataset out;
    out.schema = d.schema;
    out.x = d.x.select_rows(chosen);
    out.y.reserve(chosen.size());
    for (std::size_t i : chosen) out.y.push_back(d.y[i]);
    return out;
}

Dataset synth_planted(const SynthSpec& spec) {
    if (spec.n_informative > spec.n_features)
        throw UsageError("n_informative exceeds n_features");
    if (spec.n_classes < 2) throw UsageError("need at least 2 classes");
    if (spec.n_samples == 0 || spec.n_features == 0) throw UsageError("empty synthetic spec");

    auto rng = make_rng(spec.seed);
    std::normal_distribution<double> unit(0.0, 1.0);

    // Per-class mean patterns on the informative coordinates only.
    Matrix means(spec.n_classes, spec.n_informative);
    for (std::size_t c = 0; c < spec.n_classes; ++c)
        for (std::size_t j = 0; j < spec.n_informative; ++j)
            means.at(c, j) = spec.separation * unit(rng);

    Dataset out;
    out.schema.label_column = "label";
    for (std::size_t j = 0; j < spec.n_features; ++j)
        out.schema.feature_names.push_back("f" + std::to_string(j));
    for (std::size_t c = 0; c < spec.n_classes; ++c) {
        std::string name = "class" + std::to_string(c);
        out.schema.class_names.push_back(name);
        out.schema.label_map[name] = c;
    }

    out.x = Matrix(spec.n_samples, spec.n_features);
    out.y.resize(spec.n_samples);
    for (std::size_t i = 0; i < spec.n_samples; ++i) {
        std::size_t c = i % spec.n_classes;
        out.y[i] = c;
        for (std::size_t j = 0; j < spec.n_features; ++j) {
            double base = j < spec.n_informative ? means.at(c, j) : 0.0;
            out.x.at(i, j) = base + unit(rng);
        }
    }
    // Shuffle so labels are not arranged by construction order.
    std::vector<std::size_t> order(spec.n_samples);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    Matrix shuffled = out.x.select_rows(order);
    std::vector<std::size_t> ys(spec.n_samples);
    for (std::size_t i = 0; i < spec.n_samples; ++i) ys[i] = out.y[order[i]];
    out.x = std::move(shuffled);
    out.y = std::move(ys);
    out.validate();
    return out;
}

void save_dataset_csv(const Dataset& d, const std::string& path) {
    d.validate();
    csv::Table t;
    t.header = d.schema.feature_names;
    t.header.push_back(d.schema.label_column);
    t.rows.reserve(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        std::vector<std::string> row;
        row.reserve(d.n_features() + 1);
        for (double v : d.x.row(i)) row.push_back(format_double(v));
        row.push_back(d.schema.class_names[d.y[i]]);
        t.rows.push_back(std::move(row));
    }
    csv::write_file(path, t);
}

Dataset load_prepared_csv(const std::string& path, const std::string& schema_path) {
    FeatureSchema schema = FeatureSchema::load(schema_path);
    auto [ds, report] = load_csv(path, schema, NonFinitePolicy::DropRow);
    (void)report;
    return std::move(ds);
}

}  // namespace flowrank::data
