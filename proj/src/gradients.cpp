#include <algorithm>
#include <array>
#include <cmath>

#include "flowrank/attribution.hpp"
#include "linalg.hpp"

namespace flowrank::attribution {

std::vector<double> saliency(const models::Model& m, std::span<const double> x, std::size_t target) {
    auto g = m.input_gradient(x, target);
    for (double& v : g) v = std::abs(v);
    return g;
}

std::vector<double> gradient_input(const models::Model& m, std::span<const double> x,
                                   std::size_t target) {
    auto g = m.input_gradient(x, target);
    for (std::size_t j = 0; j < g.size(); ++j) g[j] *= x[j];
    return g;
}

std::vector<double> integrated_gradients(const models::Model& m, std::span<const double> x,
                                         std::span<const double> baseline, std::size_t steps,
                                         std::size_t target) {
    if (steps < 1) throw UsageError("integrated gradients: steps must be >= 1");
    if (baseline.size() != x.size())
        throw ShapeError("integrated gradients: baseline/input size mismatch");
    std::vector<double> point(x.size()), acc(x.size(), 0.0);
    for (std::size_t s = 0; s < steps; ++s) {
        // midpoint rule along the straight path
        const double alpha = (static_cast<double>(s) + 0.5) / static_cast<double>(steps);
        for (std::size_t j = 0; j < x.size(); ++j)
            point[j] = baseline[j] + alpha * (x[j] - baseline[j]);
        const auto g = m.input_gradient(point, target);
        for (std::size_t j = 0; j < x.size(); ++j) acc[j] += g[j];
    }
    for (std::size_t j = 0; j < x.size(); ++j)
        acc[j] = (x[j] - baseline[j]) * acc[j] / static_cast<double>(steps);
    return acc;
}

std::vector<double> noise_ensemble(const models::Model& m, std::span<const double> x,
                                   std::size_t target, NoiseMode mode, std::size_t n, double sigma,
                                   std::uint64_t seed) {
    if (n < 1) throw UsageError("noise ensemble: need at least one draw");
    if (sigma < 0) throw UsageError("noise ensemble: sigma must be >= 0");
    auto rng = make_rng(seed);
    std::normal_distribution<double> noise(0.0, sigma > 0 ? sigma : 1.0);
    std::vector<double> point(x.size()), mean(x.size(), 0.0), mean_sq(x.size(), 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t j = 0; j < x.size(); ++j)
            point[j] = sigma > 0 ? x[j] + noise(rng) : x[j];
        const auto g = m.input_gradient(point, target);
        for (std::size_t j = 0; j < x.size(); ++j) {
            mean[j] += g[j];
            mean_sq[j] += g[j] * g[j];
        }
    }
    const auto nd = static_cast<double>(n);
    for (std::size_t j = 0; j < x.size(); ++j) {
        mean[j] /= nd;
        mean_sq[j] /= nd;
    }
    switch (mode) {
        case NoiseMode::Smooth: return mean;
        case NoiseMode::Square: return mean_sq;
        case NoiseMode::Var: {
            std::vector<double> var(x.size());
            for (std::size_t j = 0; j < x.size(); ++j)
                var[j] = std::max(mean_sq[j] - mean[j] * mean[j], 0.0);
            return var;
        }
    }
    throw InternalError("noise ensemble: unknown mode");
}

std::vector<double> occlusion_fn(const VectorFn& f, std::size_t n_outputs,
                                 std::span<const double> x, std::size_t target,
                                 double baseline_value) {
    if (target >= n_outputs) throw LabelError("occlusion: target out of range");
    std::vector<double> out(n_outputs), buf(x.begin(), x.end()), attr(x.size());
    f(x, out);
    const double base = out[target];
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double keep = buf[j];
        buf[j] = baseline_value;
        f(buf, out);
        attr[j] = base - out[target];
        buf[j] = keep;
    }
    return attr;
}

std::vector<double> occlusion(const models::Model& m, std::span<const double> x, std::size_t target,
                              double baseline_value) {
    if (x.size() != m.n_features()) throw ShapeError("occlusion: input width != model features");
    VectorFn f = [&m](std::span<const double> row, std::span<double> out) {
        m.predict_proba_into(row, out);
    };
    return occlusion_fn(f, m.n_classes(), x, target, baseline_value);
}

std::vector<double> deconvnet_relu(const models::Model& m, std::span<const double> x,
                                   std::size_t target) {
    return m.deconv_gradient(x, target);
}

std::vector<double> lime_fn(const ScalarFn& f, std::span<const double> x, std::size_t n_perturb,
                            double kernel_width, std::uint64_t seed, double perturb_sigma) {
    const std::size_t d = x.size();
    if (d == 0) throw ShapeError("lime: empty input row");
    if (n_perturb <= d) throw UsageError("lime: need more perturbations than features");
    if (kernel_width <= 0) throw UsageError("lime: kernel width must be > 0");
    if (perturb_sigma <= 0) throw UsageError("lime: perturbation sigma must be > 0");

    auto rng = make_rng(seed);
    std::normal_distribution<double> noise(0.0, perturb_sigma);

    // design: intercept column + offsets from x; targets f(x + eps)
    const std::size_t p = d + 1;
    std::vector<double> a(n_perturb * p), y(n_perturb), w(n_perturb), buf(d);
    for (std::size_t i = 0; i < n_perturb; ++i) {
        double dist_sq = 0.0;
        a[i * p] = 1.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double eps = noise(rng);
            a[i * p + 1 + j] = eps;
            buf[j] = x[j] + eps;
            dist_sq += eps * eps;
        }
        y[i] = f(buf);
        w[i] = std::exp(-dist_sq / (kernel_width * kernel_width));
    }

    std::vector<double> g, sol;
    for (double ridge = 1e-3; ridge <= 1.0; ridge *= 10.0) {
        detail::weighted_normal_equations(a, y, w, n_perturb, p, 1, ridge, true, g, sol);
        if (detail::solve_linear(g, sol, p, 1))
            return {sol.begin() + 1, sol.end()};
    }
    throw InternalError("lime: singular surrogate system");
}

std::vector<double> lime_tabular(const models::Model& m, std::span<const double> x,
                                 std::size_t target, std::size_t n_perturb, double kernel_width,
                                 std::uint64_t seed, double perturb_sigma) {
    if (x.size() != m.n_features()) throw ShapeError("lime: input width != model features");
    if (target >= m.n_classes()) throw LabelError("lime: target out of range");
    std::vector<double> out(m.n_classes());
    ScalarFn f = [&](std::span<const double> row) {
        m.predict_proba_into(row, out);
        return out[target];
    };
    return lime_fn(f, x, n_perturb, kernel_width, seed, perturb_sigma);
}

// ------------------------------------------------------------------ engine

namespace {

constexpr std::array<GradMethod, 9> kAllGradMethods = {
    GradMethod::Saliency,  GradMethod::GradientInput, GradMethod::IntegratedGradients,
    GradMethod::SmoothGrad, GradMethod::SquareGrad,   GradMethod::VarGrad,
    GradMethod::Occlusion,  GradMethod::DeconvNet,    GradMethod::Lime,
};

}  // namespace

std::string to_string(GradMethod m) {
    switch (m) {
        case GradMethod::Saliency: return "saliency";
        case GradMethod::GradientInput: return "gradient_input";
        case GradMethod::IntegratedGradients: return "integrated_gradients";
        case GradMethod::SmoothGrad: return "smoothgrad";
        case GradMethod::SquareGrad: return "squaregrad";
        case GradMethod::VarGrad: return "vargrad";
        case GradMethod::Occlusion: return "occlusion";
        case GradMethod::DeconvNet: return "deconvnet";
        case GradMethod::Lime: return "lime";
    }
    throw InternalError("unknown gradient method");
}

GradMethod grad_method_from_string(const std::string& name) {
    for (GradMethod m : kAllGradMethods)
        if (to_string(m) == name) return m;
    throw UsageError("unknown attribution method '" + name + "'");
}

std::span<const GradMethod> all_grad_methods() { return kAllGradMethods; }

AttributionMatrix explain_gradient(const models::Model& m, GradMethod method,
                                   const Matrix& explain_x, std::size_t n_explained,
                                   const GradConfig& cfg, std::uint64_t seed,
                                   std::size_t n_threads) {
    if (explain_x.cols() != m.n_features())
        throw ShapeError("explain: sample width != model features");

    std::vector<double> baseline = cfg.ig_baseline;
    if (baseline.empty()) baseline.assign(m.n_features(), 0.0);
    if (baseline.size() != m.n_features())
        throw ShapeError("explain: integrated-gradients baseline width mismatch");
    const double kw = cfg.lime_kernel_width > 0
                          ? cfg.lime_kernel_width
                          : 0.75 * std::sqrt(static_cast<double>(m.n_features()));

    AttributionMatrix am;
    am.method = to_string(method);
    am.sample_ids = pick_explained_rows(explain_x.rows(), n_explained, mix_seed(seed, 0xE0));
    am.n_classes = m.n_classes();
    am.n_features = m.n_features();
    am.base.assign(m.n_classes(), 0.0);
    am.values.resize(am.sample_ids.size());

    parallel_for(am.sample_ids.size(), n_threads, [&](std::size_t i) {
        const std::size_t row_id = am.sample_ids[i];
        const auto x = explain_x.row(row_id);
        Matrix phi(m.n_classes(), m.n_features());
        for (std::size_t c = 0; c < m.n_classes(); ++c) {
            const std::uint64_t sc_seed = mix_seed(mix_seed(seed, row_id), c);
            std::vector<double> attr;
            switch (method) {
                case GradMethod::Saliency: attr = saliency(m, x, c); break;
                case GradMethod::GradientInput: attr = gradient_input(m, x, c); break;
                case GradMethod::IntegratedGradients:
                    attr = integrated_gradients(m, x, baseline, cfg.ig_steps, c);
                    break;
                case GradMethod::SmoothGrad:
                    attr = noise_ensemble(m, x, c, NoiseMode::Smooth, cfg.noise_samples,
                                          cfg.noise_sigma, sc_seed);
                    break;
                case GradMethod::SquareGrad:
                    attr = noise_ensemble(m, x, c, NoiseMode::Square, cfg.noise_samples,
                                          cfg.noise_sigma, sc_seed);
                    break;
                case GradMethod::VarGrad:
                    attr = noise_ensemble(m, x, c, NoiseMode::Var, cfg.noise_samples,
                                          cfg.noise_sigma, sc_seed);
                    break;
                case GradMethod::Occlusion: attr = occlusion(m, x, c, cfg.occlusion_baseline); break;
                case GradMethod::DeconvNet: attr = deconvnet_relu(m, x, c); break;
                case GradMethod::Lime:
                    attr = lime_tabular(m, x, c, cfg.lime_samples, kw, sc_seed, cfg.lime_sigma);
                    break;
            }
            std::copy(attr.begin(), attr.end(), phi.row(c).begin());
        }
        am.values[i] = std::move(phi);
    });
    return am;
}

}  // namespace flowrank::attribution
