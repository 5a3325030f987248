#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "flowrank/attribution.hpp"
#include "linalg.hpp"

namespace flowrank::attribution {

namespace {

struct CoalitionSet {
    std::vector<std::uint8_t> masks;  // [n x m], 1 = feature present
    std::vector<double> weights;
    std::size_t n = 0;
    std::size_t m = 0;
};

double binom(std::size_t m, std::size_t s) {
    double r = 1.0;
    for (std::size_t i = 0; i < s; ++i) r = r * static_cast<double>(m - i) / static_cast<double>(i + 1);
    return r;
}

// Shapley kernel weight of one coalition of size s among m features.
double kernel_weight(std::size_t m, std::size_t s) {
    return (static_cast<double>(m) - 1.0) /
           (binom(m, s) * static_cast<double>(s) * static_cast<double>(m - s));
}

bool next_combination(std::vector<std::size_t>& idx, std::size_t m) {
    const std::size_t s = idx.size();
    for (std::size_t i = s; i-- > 0;) {
        if (idx[i] < m - s + i) {
            ++idx[i];
            for (std::size_t j = i + 1; j < s; ++j) idx[j] = idx[j - 1] + 1;
            return true;
        }
    }
    return false;
}

void enumerate_size(CoalitionSet& cs, std::size_t s) {
    const std::size_t m = cs.m;
    const double w = kernel_weight(m, s);
    std::vector<std::size_t> idx(s);
    std::iota(idx.begin(), idx.end(), 0);
    do {
        cs.masks.insert(cs.masks.end(), m, 0);
        auto* row = cs.masks.data() + cs.n * m;
        for (std::size_t j : idx) row[j] = 1;
        cs.weights.push_back(w);
        ++cs.n;
    } while (next_combination(idx, m));
}

CoalitionSet build_coalitions(std::size_t m, std::size_t budget, std::uint64_t seed) {
    CoalitionSet cs;
    cs.m = m;
    const bool want_all = budget == kAllCoalitions;
    if (want_all && m > 25)
        throw UsageError("kernel shap: complete enumeration refused beyond 25 features");

    if (want_all ||
        (m <= 25 && budget >= (std::size_t{1} << m) - 2)) {
        for (std::size_t s = 1; s < m; ++s) enumerate_size(cs, s);
        return cs;
    }
    if (budget < m + 2)
        throw UsageError("kernel shap: coalition budget must be at least n_features + 2");

    // Complete coalition-size strata outside-in while they fit the budget;
    // the leftover budget samples the remaining sizes by kernel mass.
    std::vector<char> complete(m, 0);
    std::size_t budget_left = budget;
    for (std::size_t t = 1; t * 2 <= m; ++t) {
        const std::size_t s2 = m - t;
        const double count = t == s2 ? binom(m, t) : 2.0 * binom(m, t);
        if (count > static_cast<double>(budget_left)) break;
        enumerate_size(cs, t);
        complete[t] = 1;
        if (t != s2) {
            enumerate_size(cs, s2);
            complete[s2] = 1;
        }
        budget_left -= static_cast<std::size_t>(count);
    }

    std::vector<std::size_t> open_sizes;
    std::vector<double> mass;  // total kernel mass of a size stratum: (m-1)/(s(m-s))
    for (std::size_t s = 1; s < m; ++s) {
        if (complete[s]) continue;
        open_sizes.push_back(s);
        mass.push_back((static_cast<double>(m) - 1.0) /
                       (static_cast<double>(s) * static_cast<double>(m - s)));
    }
    if (open_sizes.empty() || budget_left == 0) return cs;

    auto rng = make_rng(seed);
    std::discrete_distribution<std::size_t> pick_size(mass.begin(), mass.end());
    std::vector<std::size_t> pool(m);
    std::iota(pool.begin(), pool.end(), 0);
    const std::size_t offset = cs.n;
    std::unordered_map<std::string, std::size_t> seen;
    std::vector<double> multiplicity;
    std::string key;
    for (std::size_t draw = 0; draw < budget_left; ++draw) {
        const std::size_t s = open_sizes[pick_size(rng)];
        for (std::size_t i = 0; i < s; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, m - 1);
            std::swap(pool[i], pool[pick(rng)]);
        }
        key.assign(m, '\0');
        for (std::size_t i = 0; i < s; ++i) key[pool[i]] = 1;
        auto [it, inserted] = seen.try_emplace(key, cs.n);
        if (inserted) {
            cs.masks.insert(cs.masks.end(), key.begin(), key.end());
            cs.weights.push_back(0.0);
            multiplicity.push_back(1.0);
            ++cs.n;
        } else {
            multiplicity[it->second - offset] += 1.0;
        }
    }
    const double total_mass = std::accumulate(mass.begin(), mass.end(), 0.0);
    const double unit = total_mass / static_cast<double>(budget_left);
    for (std::size_t i = offset; i < cs.n; ++i) cs.weights[i] = multiplicity[i - offset] * unit;
    return cs;
}

struct Evaluated {
    Matrix v;                // [n_coalitions x n_outputs]
    std::vector<double> v0;  // value of the empty coalition
    std::vector<double> fx;  // value of the full coalition = f(x)
};

Evaluated evaluate_coalitions(const VectorFn& f, std::size_t q, std::span<const double> x,
                              const Matrix& bg, const CoalitionSet& cs) {
    const std::size_t m = cs.m;
    const std::size_t b = bg.rows();
    Evaluated ev;
    ev.v = Matrix(cs.n, q);
    ev.v0.assign(q, 0.0);
    ev.fx.assign(q, 0.0);

    std::vector<double> out(q);
    for (std::size_t r = 0; r < b; ++r) {
        f(bg.row(r), out);
        for (std::size_t k = 0; k < q; ++k) ev.v0[k] += out[k];
    }
    for (double& v : ev.v0) v /= static_cast<double>(b);
    f(x, ev.fx);

    std::vector<double> buf(m), acc(q);
    for (std::size_t ci = 0; ci < cs.n; ++ci) {
        const std::uint8_t* mask = cs.masks.data() + ci * m;
        std::fill(acc.begin(), acc.end(), 0.0);
        for (std::size_t r = 0; r < b; ++r) {
            const auto br = bg.row(r);
            for (std::size_t j = 0; j < m; ++j) buf[j] = mask[j] ? x[j] : br[j];
            f(buf, out);
            for (std::size_t k = 0; k < q; ++k) acc[k] += out[k];
        }
        auto vrow = ev.v.row(ci);
        for (std::size_t k = 0; k < q; ++k) vrow[k] = acc[k] / static_cast<double>(b);
    }
    return ev;
}

Explanation solve_kernel(const Evaluated& ev, const CoalitionSet& cs, std::size_t q) {
    const std::size_t m = cs.m;
    Explanation ex;
    ex.base = ev.v0;
    ex.phi = Matrix(q, m);
    if (m == 1) {
        for (std::size_t k = 0; k < q; ++k) ex.phi.at(k, 0) = ev.fx[k] - ev.v0[k];
        return ex;
    }

    // Eliminate the efficiency constraint: phi_{m-1} is determined by the
    // others, so regress on z_j - z_{m-1} against v(S) recentred by both ends.
    const std::size_t p = m - 1;
    std::vector<double> a(cs.n * p), y(cs.n * q);
    for (std::size_t i = 0; i < cs.n; ++i) {
        const std::uint8_t* mask = cs.masks.data() + i * m;
        const double zm = mask[m - 1];
        for (std::size_t j = 0; j < p; ++j) a[i * p + j] = static_cast<double>(mask[j]) - zm;
        for (std::size_t k = 0; k < q; ++k)
            y[i * q + k] = ev.v.at(i, k) - ev.v0[k] - zm * (ev.fx[k] - ev.v0[k]);
    }

    std::vector<double> g, sol;
    bool solved = false;
    for (const double ridge : {0.0, 1e-8, 1e-3}) {
        detail::weighted_normal_equations(a, y, cs.weights, cs.n, p, q, ridge, false, g, sol);
        if (detail::solve_linear(g, sol, p, q)) {
            solved = true;
            break;
        }
    }
    if (!solved) throw InternalError("kernel shap: degenerate weighted least squares");

    for (std::size_t k = 0; k < q; ++k) {
        double sum = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            ex.phi.at(k, j) = sol[j * q + k];
            sum += sol[j * q + k];
        }
        ex.phi.at(k, m - 1) = (ev.fx[k] - ev.v0[k]) - sum;
    }
    return ex;
}

std::vector<std::size_t> sample_indices(std::size_t n, std::size_t count, std::uint64_t seed) {
    count = std::min(count, n);
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), 0);
    auto rng = make_rng(seed);
    for (std::size_t i = 0; i < count; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n - 1);
        std::swap(pool[i], pool[pick(rng)]);
    }
    pool.resize(count);
    std::sort(pool.begin(), pool.end());
    return pool;
}

}  // namespace

BackgroundSet BackgroundSet::sample_from(const Matrix& x, std::size_t count, std::uint64_t seed) {
    if (x.rows() == 0) throw DataError("background: empty source matrix");
    if (count == 0) throw UsageError("background: need at least one sample");
    const auto idx = sample_indices(x.rows(), count, seed);
    BackgroundSet bg;
    bg.samples = x.select_rows(idx);
    bg.seed = seed;
    return bg;
}

Explanation kernel_shap_fn(const VectorFn& f, std::size_t n_outputs, std::span<const double> x,
                           const Matrix& background, std::size_t n_coalitions, std::uint64_t seed) {
    if (x.empty()) throw ShapeError("kernel shap: empty input row");
    if (background.rows() == 0) throw DataError("kernel shap: empty background");
    if (background.cols() != x.size())
        throw ShapeError("kernel shap: background/input feature mismatch");
    const auto cs = build_coalitions(x.size(), n_coalitions, seed);
    const auto ev = evaluate_coalitions(f, n_outputs, x, background, cs);
    return solve_kernel(ev, cs, n_outputs);
}

Explanation kernel_shap(const models::Model& m, std::span<const double> x, const BackgroundSet& bg,
                        std::size_t n_coalitions, std::uint64_t seed) {
    if (x.size() != m.n_features()) throw ShapeError("kernel shap: input width != model features");
    VectorFn f = [&m](std::span<const double> row, std::span<double> out) {
        m.predict_proba_into(row, out);
    };
    return kernel_shap_fn(f, m.n_classes(), x, bg.samples, n_coalitions, seed);
}

Matrix exact_shapley_fn(const VectorFn& f, std::size_t n_outputs, std::span<const double> x,
                        const Matrix& background) {
    const std::size_t m = x.size();
    if (m == 0) throw ShapeError("exact shapley: empty input row");
    if (m > 12) throw UsageError("exact shapley: refused beyond 12 features");
    if (background.rows() == 0) throw DataError("exact shapley: empty background");
    if (background.cols() != m) throw ShapeError("exact shapley: background/input feature mismatch");

    const std::size_t full = std::size_t{1} << m;
    const std::size_t b = background.rows();
    Matrix v(full, n_outputs);
    std::vector<double> buf(m), out(n_outputs), acc(n_outputs);
    for (std::size_t mask = 0; mask < full; ++mask) {
        std::fill(acc.begin(), acc.end(), 0.0);
        for (std::size_t r = 0; r < b; ++r) {
            const auto br = background.row(r);
            for (std::size_t j = 0; j < m; ++j) buf[j] = (mask >> j) & 1 ? x[j] : br[j];
            f(buf, out);
            for (std::size_t k = 0; k < n_outputs; ++k) acc[k] += out[k];
        }
        auto vrow = v.row(mask);
        for (std::size_t k = 0; k < n_outputs; ++k) vrow[k] = acc[k] / static_cast<double>(b);
    }

    std::array<double, 13> fact{};
    fact[0] = 1.0;
    for (std::size_t i = 1; i < fact.size(); ++i) fact[i] = fact[i - 1] * static_cast<double>(i);

    Matrix phi(n_outputs, m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        const std::size_t bit = std::size_t{1} << j;
        for (std::size_t mask = 0; mask < full; ++mask) {
            if (mask & bit) continue;
            const auto s = static_cast<std::size_t>(std::popcount(mask));
            const double w = fact[s] * fact[m - s - 1] / fact[m];
            for (std::size_t k = 0; k < n_outputs; ++k)
                phi.at(k, j) += w * (v.at(mask | bit, k) - v.at(mask, k));
        }
    }
    return phi;
}

Matrix exact_shapley_oracle(const models::Model& m, std::span<const double> x,
                            const BackgroundSet& bg) {
    if (x.size() != m.n_features()) throw ShapeError("exact shapley: input width != model features");
    VectorFn f = [&m](std::span<const double> row, std::span<double> out) {
        m.predict_proba_into(row, out);
    };
    return exact_shapley_fn(f, m.n_classes(), x, bg.samples);
}

GlobalImportance global_importance(const AttributionMatrix& a) {
    if (a.values.empty()) throw DataError("global importance: no explained samples");
    GlobalImportance g;
    g.per_class = Matrix(a.n_classes, a.n_features, 0.0);
    for (const auto& phi : a.values)
        for (std::size_t c = 0; c < a.n_classes; ++c)
            for (std::size_t j = 0; j < a.n_features; ++j) g.per_class.at(c, j) += std::abs(phi.at(c, j));
    const auto n = static_cast<double>(a.values.size());
    for (double& v : g.per_class.data()) v /= n;

    g.overall.assign(a.n_features, 0.0);
    for (std::size_t c = 0; c < a.n_classes; ++c)
        for (std::size_t j = 0; j < a.n_features; ++j) g.overall[j] += g.per_class.at(c, j);
    for (double& v : g.overall) v /= static_cast<double>(a.n_classes);
    return g;
}

std::vector<std::size_t> pick_explained_rows(std::size_t n_rows, std::size_t n_explained,
                                             std::uint64_t seed) {
    if (n_rows == 0) throw DataError("explain: empty sample matrix");
    if (n_explained == 0) throw UsageError("explain: need at least one explained sample");
    return sample_indices(n_rows, n_explained, seed);
}

AttributionMatrix explain_shap(const models::Model& m, const BackgroundSet& bg,
                               const Matrix& explain_x, std::size_t n_explained,
                               std::size_t n_coalitions, std::uint64_t seed,
                               std::size_t n_threads) {
    if (explain_x.cols() != m.n_features())
        throw ShapeError("explain: sample width != model features");
    AttributionMatrix am;
    am.method = "kernel_shap";
    am.sample_ids = pick_explained_rows(explain_x.rows(), n_explained, mix_seed(seed, 0xE0));
    am.n_classes = m.n_classes();
    am.n_features = m.n_features();
    am.values.resize(am.sample_ids.size());

    std::vector<std::vector<double>> bases(am.sample_ids.size());
    parallel_for(am.sample_ids.size(), n_threads, [&](std::size_t i) {
        const std::size_t row = am.sample_ids[i];
        auto ex = kernel_shap(m, explain_x.row(row), bg, n_coalitions, mix_seed(seed, row));
        am.values[i] = std::move(ex.phi);
        bases[i] = std::move(ex.base);
    });
    am.base = std::move(bases.front());
    return am;
}

}  // namespace flowrank::attribution
