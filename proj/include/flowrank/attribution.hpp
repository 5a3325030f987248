#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "flowrank/common.hpp"
#include "flowrank/models.hpp"

namespace flowrank::attribution {

// Vector-valued target function: writes one value per explained output.
// Model-based entry points wrap predict_proba (perturbation methods explain
// class probabilities; gradient methods explain pre-softmax logits).
using VectorFn = std::function<void(std::span<const double>, std::span<double>)>;
using ScalarFn = std::function<double(std::span<const double>)>;

inline constexpr std::size_t kAllCoalitions = std::numeric_limits<std::size_t>::max();

// Reference rows used to impute features outside a coalition.
struct BackgroundSet {
    Matrix samples;  // [b x n_features]
    std::uint64_t seed = 0;

    // Seeded sample without replacement, row order preserved.
    static BackgroundSet sample_from(const Matrix& x, std::size_t count, std::uint64_t seed);
};

// One explained sample: phi is [n_outputs x n_features], base is the
// no-feature value per output (mean model output over the background).
struct Explanation {
    Matrix phi;
    std::vector<double> base;
};

// Attributions for a set of samples under one method.
struct AttributionMatrix {
    std::string method;
    std::vector<std::size_t> sample_ids;  // row indices into the explained matrix
    std::vector<Matrix> values;           // per sample: [n_classes x n_features]
    std::vector<double> base;             // per class; zeros for gradient methods
    std::size_t n_classes = 0;
    std::size_t n_features = 0;
};

struct GlobalImportance {
    Matrix per_class;             // [n_classes x n_features], mean |phi|
    std::vector<double> overall;  // mean of per-class rows
};

// ------------------------------------------------------------------ SHAP

// Shapley values via the kernel-weighted least squares with the efficiency
// constraint eliminated into the system. n_coalitions = kAllCoalitions (or
// any budget >= 2^M - 2) enumerates every coalition exactly; smaller budgets
// enumerate complete coalition-size strata outside-in and sample the rest.
Explanation kernel_shap_fn(const VectorFn& f, std::size_t n_outputs, std::span<const double> x,
                           const Matrix& background, std::size_t n_coalitions, std::uint64_t seed);
Explanation kernel_shap(const models::Model& m, std::span<const double> x, const BackgroundSet& bg,
                        std::size_t n_coalitions, std::uint64_t seed);

// Brute-force Shapley enumeration, n_features <= 12. The independent oracle
// for kernel_shap; phi rows are outputs, columns features.
Matrix exact_shapley_fn(const VectorFn& f, std::size_t n_outputs, std::span<const double> x,
                        const Matrix& background);
Matrix exact_shapley_oracle(const models::Model& m, std::span<const double> x,
                            const BackgroundSet& bg);

GlobalImportance global_importance(const AttributionMatrix& a);

// ------------------------------------------------------- gradient methods

std::vector<double> saliency(const models::Model& m, std::span<const double> x, std::size_t target);
std::vector<double> gradient_input(const models::Model& m, std::span<const double> x,
                                   std::size_t target);
std::vector<double> integrated_gradients(const models::Model& m, std::span<const double> x,
                                         std::span<const double> baseline, std::size_t steps,
                                         std::size_t target);

enum class NoiseMode { Smooth, Square, Var };
std::vector<double> noise_ensemble(const models::Model& m, std::span<const double> x,
                                   std::size_t target, NoiseMode mode, std::size_t n, double sigma,
                                   std::uint64_t seed);

std::vector<double> occlusion_fn(const VectorFn& f, std::size_t n_outputs,
                                 std::span<const double> x, std::size_t target,
                                 double baseline_value);
std::vector<double> occlusion(const models::Model& m, std::span<const double> x, std::size_t target,
                              double baseline_value);

std::vector<double> deconvnet_relu(const models::Model& m, std::span<const double> x,
                                   std::size_t target);

// Weighted ridge surrogate on Gaussian perturbations around x; weights
// exp(-d^2 / kernel_width^2). Returns the surrogate's coefficients.
std::vector<double> lime_fn(const ScalarFn& f, std::span<const double> x, std::size_t n_perturb,
                            double kernel_width, std::uint64_t seed, double perturb_sigma);
std::vector<double> lime_tabular(const models::Model& m, std::span<const double> x,
                                 std::size_t target, std::size_t n_perturb, double kernel_width,
                                 std::uint64_t seed, double perturb_sigma = 0.1);

// ------------------------------------------------------------- engines

enum class GradMethod {
    Saliency,
    GradientInput,
    IntegratedGradients,
    SmoothGrad,
    SquareGrad,
    VarGrad,
    Occlusion,
    DeconvNet,
    Lime,
};
std::string to_string(GradMethod m);
GradMethod grad_method_from_string(const std::string& name);
std::span<const GradMethod> all_grad_methods();

struct GradConfig {
    std::size_t ig_steps = 128;
    std::vector<double> ig_baseline;  // empty = zero vector
    std::size_t noise_samples = 32;
    double noise_sigma = 0.1;
    double occlusion_baseline = 0.0;
    std::size_t lime_samples = 256;
    double lime_kernel_width = 0.0;  // 0 = 0.75 * sqrt(n_features)
    double lime_sigma = 0.1;
};

// Seeded choice of explained rows: up to n_explained distinct row indices,
// ascending, so downstream output is independent of worker count.
std::vector<std::size_t> pick_explained_rows(std::size_t n_rows, std::size_t n_explained,
                                             std::uint64_t seed);

// Kernel SHAP over a sample set; per-sample seeds derive from (seed, row id).
AttributionMatrix explain_shap(const models::Model& m, const BackgroundSet& bg,
                               const Matrix& explain_x, std::size_t n_explained,
                               std::size_t n_coalitions, std::uint64_t seed,
                               std::size_t n_threads = 1);

// One gradient/perturbation method over a sample set (all classes).
AttributionMatrix explain_gradient(const models::Model& m, GradMethod method,
                                   const Matrix& explain_x, std::size_t n_explained,
                                   const GradConfig& cfg, std::uint64_t seed,
                                   std::size_t n_threads = 1);

// --------------------------------------------------------------- persistence

void save_attributions(const AttributionMatrix& a, const std::string& values_path,
                       const std::string& base_path,
                       const std::vector<std::string>& feature_names,
                       const std::vector<std::string>& class_names);
void save_importance(const GlobalImportance& g, const std::string& path,
                     const std::vector<std::string>& feature_names,
                     const std::vector<std::string>& class_names);
GlobalImportance load_importance(const std::string& path,
                                 const std::vector<std::string>& feature_names,
                                 const std::vector<std::string>& class_names);

}  // namespace flowrank::attribution
