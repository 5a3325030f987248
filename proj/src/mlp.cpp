#include <algorithm>
#include <cmath>
#include <numeric>

#include "binio.hpp"
#include "flowrank/models.hpp"

namespace flowrank::models {

namespace {

void softmax(std::span<double> v) {
    const double m = *std::max_element(v.begin(), v.end());
    double sum = 0.0;
    for (double& s : v) {
        s = std::exp(s - m);
        sum += s;
    }
    for (double& s : v) s /= sum;
}

void validate_layers(const std::vector<MlpModel::Layer>& layers) {
    if (layers.empty()) throw ShapeError("mlp: no layers");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto& layer = layers[l];
        if (layer.in == 0 || layer.out == 0) throw ShapeError("mlp: zero-sized layer");
        if (layer.w.size() != layer.in * layer.out || layer.b.size() != layer.out)
            throw ShapeError("mlp: weight shape mismatch");
        if (l > 0 && layers[l - 1].out != layer.in) throw ShapeError("mlp: layer chain mismatch");
    }
}

}  // namespace

MlpModel::MlpModel(std::vector<Layer> layers, std::uint64_t seed)
    : Model(layers.empty() ? 0 : layers.front().in, layers.empty() ? 0 : layers.back().out, seed),
      layers_(std::move(layers)) {
    validate_layers(layers_);
}

// Pre-activations z_l for every layer; ReLU is applied between layers only.
std::vector<std::vector<double>> MlpModel::forward(std::span<const double> row) const {
    std::vector<std::vector<double>> zs(layers_.size());
    std::vector<double> a(row.begin(), row.end());
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const auto& layer = layers_[l];
        auto& z = zs[l];
        z.resize(layer.out);
        for (std::size_t o = 0; o < layer.out; ++o) {
            double s = layer.b[o];
            const double* w = layer.w.data() + o * layer.in;
            for (std::size_t i = 0; i < layer.in; ++i) s += w[i] * a[i];
            z[o] = s;
        }
        if (l + 1 < layers_.size()) {
            a.resize(z.size());
            for (std::size_t i = 0; i < z.size(); ++i) a[i] = std::max(z[i], 0.0);
        }
    }
    return zs;
}

void MlpModel::predict_proba_into(std::span<const double> row, std::span<double> out) const {
    check_row(row);
    const auto zs = forward(row);
    std::copy(zs.back().begin(), zs.back().end(), out.begin());
    softmax(out);
}

double MlpModel::logit(std::span<const double> row, std::size_t target) const {
    check_row(row);
    check_target(target);
    return forward(row).back()[target];
}

std::vector<double> MlpModel::backward(std::span<const double> row, std::size_t target,
                                       bool deconv) const {
    check_row(row);
    check_target(target);
    const auto zs = forward(row);
    std::vector<double> delta(layers_.back().out, 0.0);
    delta[target] = 1.0;
    for (std::size_t li = layers_.size(); li-- > 0;) {
        const auto& layer = layers_[li];
        std::vector<double> grad_in(layer.in, 0.0);
        for (std::size_t o = 0; o < layer.out; ++o) {
            const double d = delta[o];
            if (d == 0.0) continue;
            const double* w = layer.w.data() + o * layer.in;
            for (std::size_t i = 0; i < layer.in; ++i) grad_in[i] += d * w[i];
        }
        if (li == 0) return grad_in;
        if (deconv) {
            // DeconvNet rule: pass only positive upstream signal, ignore the
            // forward activation state.
            for (double& v : grad_in) v = std::max(v, 0.0);
        } else {
            const auto& z = zs[li - 1];
            for (std::size_t i = 0; i < grad_in.size(); ++i)
                if (z[i] <= 0.0) grad_in[i] = 0.0;
        }
        delta = std::move(grad_in);
    }
    throw InternalError("mlp: unreachable");
}

std::vector<double> MlpModel::input_gradient(std::span<const double> row, std::size_t target) const {
    return backward(row, target, false);
}

std::vector<double> MlpModel::deconv_gradient(std::span<const double> row, std::size_t target) const {
    return backward(row, target, true);
}

void MlpModel::save(std::ostream& os) const {
    detail::write_u64(os, layers_.size());
    for (const auto& layer : layers_) {
        detail::write_u64(os, layer.in);
        detail::write_u64(os, layer.out);
        detail::write_f64_vec(os, layer.w);
        detail::write_f64_vec(os, layer.b);
    }
}

std::unique_ptr<MlpModel> train_mlp(const Matrix& x, const std::vector<std::size_t>& y,
                                    std::size_t n_classes, const Hyperparams& hp,
                                    std::uint64_t seed) {
    hp.validate();
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    if (n == 0 || d == 0) throw DataError("mlp: empty training set");
    if (y.size() != n) throw ShapeError("mlp: labels/rows mismatch");
    for (std::size_t label : y)
        if (label >= n_classes) throw LabelError("mlp: label out of range");

    std::vector<std::size_t> dims{d};
    dims.insert(dims.end(), hp.mlp_hidden.begin(), hp.mlp_hidden.end());
    dims.push_back(n_classes);
    const std::size_t n_layers = dims.size() - 1;

    auto rng_init = make_rng(mix_seed(seed, 7));
    std::vector<MlpModel::Layer> layers(n_layers);
    for (std::size_t l = 0; l < n_layers; ++l) {
        auto& layer = layers[l];
        layer.in = dims[l];
        layer.out = dims[l + 1];
        layer.w.resize(layer.in * layer.out);
        layer.b.assign(layer.out, 0.0);
        const double limit = std::sqrt(6.0 / static_cast<double>(layer.in + layer.out));
        std::uniform_real_distribution<double> uni(-limit, limit);
        for (double& w : layer.w) w = uni(rng_init);
    }

    struct AdamState {
        std::vector<double> mw, vw, mb, vb;
    };
    std::vector<AdamState> adam(n_layers);
    std::vector<std::vector<double>> gw(n_layers), gb(n_layers);
    for (std::size_t l = 0; l < n_layers; ++l) {
        adam[l].mw.assign(layers[l].w.size(), 0.0);
        adam[l].vw.assign(layers[l].w.size(), 0.0);
        adam[l].mb.assign(layers[l].b.size(), 0.0);
        adam[l].vb.assign(layers[l].b.size(), 0.0);
        gw[l].resize(layers[l].w.size());
        gb[l].resize(layers[l].b.size());
    }

    auto rng_shuffle = make_rng(mix_seed(seed, 13));
    auto rng_drop = make_rng(mix_seed(seed, 11));
    const double keep_p = 1.0 - hp.mlp_dropout;
    std::bernoulli_distribution keep(keep_p);

    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    // per-sample work buffers: a[l] is the input to layer l, z[l] its output
    std::vector<std::vector<double>> a(n_layers + 1), z(n_layers), mask(n_layers);
    constexpr double b1 = 0.9, b2 = 0.999, adam_eps = 1e-8;
    std::size_t adam_t = 0;

    for (std::size_t epoch = 0; epoch < hp.mlp_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng_shuffle);
        for (std::size_t start = 0; start < n; start += hp.mlp_batch) {
            const std::size_t stop = std::min(n, start + hp.mlp_batch);
            const auto batch_n = static_cast<double>(stop - start);
            for (std::size_t l = 0; l < n_layers; ++l) {
                std::fill(gw[l].begin(), gw[l].end(), 0.0);
                std::fill(gb[l].begin(), gb[l].end(), 0.0);
            }

            for (std::size_t bi = start; bi < stop; ++bi) {
                const std::size_t i = order[bi];
                const auto xi = x.row(i);
                a[0].assign(xi.begin(), xi.end());
                for (std::size_t l = 0; l < n_layers; ++l) {
                    const auto& layer = layers[l];
                    z[l].resize(layer.out);
                    for (std::size_t o = 0; o < layer.out; ++o) {
                        double s = layer.b[o];
                        const double* w = layer.w.data() + o * layer.in;
                        for (std::size_t j = 0; j < layer.in; ++j) s += w[j] * a[l][j];
                        z[l][o] = s;
                    }
                    if (l + 1 < n_layers) {
                        // inverted dropout on the hidden activation
                        a[l + 1].resize(layer.out);
                        mask[l].resize(layer.out);
                        for (std::size_t o = 0; o < layer.out; ++o) {
                            double scale = 1.0;
                            if (hp.mlp_dropout > 0.0) scale = keep(rng_drop) ? 1.0 / keep_p : 0.0;
                            mask[l][o] = scale;
                            a[l + 1][o] = std::max(z[l][o], 0.0) * scale;
                        }
                    }
                }

                std::vector<double> delta(z.back());
                softmax(delta);
                delta[y[i]] -= 1.0;  // d CE / d logits
                for (std::size_t li = n_layers; li-- > 0;) {
                    const auto& layer = layers[li];
                    for (std::size_t o = 0; o < layer.out; ++o) {
                        const double dl = delta[o];
                        if (dl == 0.0) continue;
                        gb[li][o] += dl;
                        double* g = gw[li].data() + o * layer.in;
                        for (std::size_t j = 0; j < layer.in; ++j) g[j] += dl * a[li][j];
                    }
                    if (li == 0) break;
                    std::vector<double> grad_in(layer.in, 0.0);
                    for (std::size_t o = 0; o < layer.out; ++o) {
                        const double dl = delta[o];
                        if (dl == 0.0) continue;
                        const double* w = layer.w.data() + o * layer.in;
                        for (std::size_t j = 0; j < layer.in; ++j) grad_in[j] += dl * w[j];
                    }
                    for (std::size_t j = 0; j < grad_in.size(); ++j) {
                        grad_in[j] *= mask[li - 1][j];
                        if (z[li - 1][j] <= 0.0) grad_in[j] = 0.0;
                    }
                    delta = std::move(grad_in);
                }
            }

            ++adam_t;
            const double bc1 = 1.0 - std::pow(b1, static_cast<double>(adam_t));
            const double bc2 = 1.0 - std::pow(b2, static_cast<double>(adam_t));
            auto update = [&](std::vector<double>& w, std::vector<double>& m, std::vector<double>& v,
                              const std::vector<double>& g) {
                for (std::size_t idx = 0; idx < w.size(); ++idx) {
                    const double gi = g[idx] / batch_n;
                    m[idx] = b1 * m[idx] + (1.0 - b1) * gi;
                    v[idx] = b2 * v[idx] + (1.0 - b2) * gi * gi;
                    w[idx] -= hp.mlp_lr * (m[idx] / bc1) / (std::sqrt(v[idx] / bc2) + adam_eps);
                }
            };
            for (std::size_t l = 0; l < n_layers; ++l) {
                update(layers[l].w, adam[l].mw, adam[l].vw, gw[l]);
                update(layers[l].b, adam[l].mb, adam[l].vb, gb[l]);
            }
        }
    }
    return std::make_unique<MlpModel>(std::move(layers), seed);
}

}  // namespace flowrank::models
