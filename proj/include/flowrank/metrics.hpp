#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "flowrank/common.hpp"

namespace flowrank::metrics {

// Rows are the true class, columns the predicted class.
struct ConfusionMatrix {
    std::size_t n_classes = 0;
    std::vector<std::size_t> counts;  // row-major [n_classes x n_classes]

    ConfusionMatrix() = default;
    explicit ConfusionMatrix(std::size_t n) : n_classes(n), counts(n * n, 0) {}

    std::size_t& at(std::size_t t, std::size_t p) { return counts[t * n_classes + p]; }
    std::size_t at(std::size_t t, std::size_t p) const { return counts[t * n_classes + p]; }
    std::size_t total() const;
    std::size_t row_sum(std::size_t t) const;
    std::size_t col_sum(std::size_t p) const;
};

struct MetricSet {
    double acc = 0, prec = 0, rec = 0, f1 = 0, bacc = 0, mcc = 0, aucroc = 0, fpr = 0;
    // Set when an empty class forced a per-class ratio to the declared 0.
    bool degenerate = false;
};

ConfusionMatrix confusion(std::span<const std::size_t> truth, std::span<const std::size_t> pred,
                          std::size_t n_classes);

// acc = trace/total; prec/rec/f1 macro-averaged; bacc = mean per-class
// recall; mcc in the multiclass confusion-matrix form; fpr = macro average
// of FP_c/(FP_c+TN_c). aucroc is left 0 (see auc_roc_ovr).
MetricSet classification_metrics(const ConfusionMatrix& cm);

// One-vs-rest AUC via the midrank statistic, macro-averaged over classes
// present in `truth`. Classes absent from `truth` are skipped.
double auc_roc_ovr(const Matrix& probs, std::span<const std::size_t> truth);

// One-vs-rest accuracy (TP_c + TN_c) / total per class.
std::vector<double> per_class_accuracy(const ConfusionMatrix& cm);

// Fraction of truly benign rows flagged as any attack class.
double false_positive_rate(const ConfusionMatrix& cm, std::size_t normal_class);

}  // namespace flowrank::metrics
