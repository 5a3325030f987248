#include <unordered_map>

#include "flowrank/attribution.hpp"
#include "flowrank/csv.hpp"

namespace flowrank::attribution {

namespace {

void check_names(const AttributionMatrix& a, const std::vector<std::string>& feature_names,
                 const std::vector<std::string>& class_names) {
    if (feature_names.size() != a.n_features)
        throw ShapeError("attributions: feature-name count mismatch");
    if (class_names.size() != a.n_classes)
        throw ShapeError("attributions: class-name count mismatch");
}

std::unordered_map<std::string, std::size_t> index_of(const std::vector<std::string>& names) {
    std::unordered_map<std::string, std::size_t> m;
    for (std::size_t i = 0; i < names.size(); ++i) m.emplace(names[i], i);
    return m;
}

}  // namespace

void save_attributions(const AttributionMatrix& a, const std::string& values_path,
                       const std::string& base_path,
                       const std::vector<std::string>& feature_names,
                       const std::vector<std::string>& class_names) {
    check_names(a, feature_names, class_names);
    csv::Table values;
    values.header = {"sample_id", "class", "feature", "value"};
    values.rows.reserve(a.values.size() * a.n_classes * a.n_features);
    for (std::size_t s = 0; s < a.values.size(); ++s)
        for (std::size_t c = 0; c < a.n_classes; ++c)
            for (std::size_t j = 0; j < a.n_features; ++j)
                values.rows.push_back({std::to_string(a.sample_ids[s]), class_names[c],
                                       feature_names[j], format_double(a.values[s].at(c, j))});
    csv::write_file(values_path, values);

    csv::Table base;
    base.header = {"class", "value"};
    for (std::size_t c = 0; c < a.n_classes; ++c)
        base.rows.push_back({class_names[c], format_double(a.base[c])});
    csv::write_file(base_path, base);
}

void save_importance(const GlobalImportance& g, const std::string& path,
                     const std::vector<std::string>& feature_names,
                     const std::vector<std::string>& class_names) {
    if (g.per_class.rows() != class_names.size() || g.per_class.cols() != feature_names.size() ||
        g.overall.size() != feature_names.size())
        throw ShapeError("importance: name count mismatch");
    csv::Table t;
    t.header = {"class", "feature", "importance"};
    for (std::size_t c = 0; c < class_names.size(); ++c)
        for (std::size_t j = 0; j < feature_names.size(); ++j)
            t.rows.push_back({class_names[c], feature_names[j], format_double(g.per_class.at(c, j))});
    for (std::size_t j = 0; j < feature_names.size(); ++j)
        t.rows.push_back({"overall", feature_names[j], format_double(g.overall[j])});
    csv::write_file(path, t);
}

GlobalImportance load_importance(const std::string& path,
                                 const std::vector<std::string>& feature_names,
                                 const std::vector<std::string>& class_names) {
    const auto t = csv::read_file(path);
    const int ci = t.find_column("class");
    const int fi = t.find_column("feature");
    const int vi = t.find_column("importance");
    if (ci < 0 || fi < 0 || vi < 0)
        throw SchemaError("importance file '" + path + "': expected class,feature,importance");

    const auto feat_idx = index_of(feature_names);
    const auto class_idx = index_of(class_names);
    GlobalImportance g;
    g.per_class = Matrix(class_names.size(), feature_names.size(), 0.0);
    g.overall.assign(feature_names.size(), 0.0);
    std::size_t filled = 0;
    for (const auto& row : t.rows) {
        const auto fit = feat_idx.find(row[static_cast<std::size_t>(fi)]);
        if (fit == feat_idx.end())
            throw DataError("importance file '" + path + "': unknown feature '" +
                            row[static_cast<std::size_t>(fi)] + "'");
        const double v = parse_double(row[static_cast<std::size_t>(vi)]);
        const auto& cls = row[static_cast<std::size_t>(ci)];
        if (cls == "overall") {
            g.overall[fit->second] = v;
        } else {
            const auto cit = class_idx.find(cls);
            if (cit == class_idx.end())
                throw DataError("importance file '" + path + "': unknown class '" + cls + "'");
            g.per_class.at(cit->second, fit->second) = v;
        }
        ++filled;
    }
    const std::size_t expect = feature_names.size() * (class_names.size() + 1);
    if (filled != expect)
        throw DataError("importance file '" + path + "': expected " + std::to_string(expect) +
                        " rows, found " + std::to_string(filled));
    return g;
}

}  // namespace flowrank::attribution
