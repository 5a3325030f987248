#include "flowrank/metrics.hpp"

#include <algorithm>
#include <numeric>

namespace flowrank::metrics {

std::size_t ConfusionMatrix::total() const {
    return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

std::size_t ConfusionMatrix::row_sum(std::size_t t) const {
    std::size_t s = 0;
    for (std::size_t p = 0; p < n_classes; ++p) s += at(t, p);
    return s;
}

std::size_t ConfusionMatrix::col_sum(std::size_t p) const {
    std::size_t s = 0;
    for (std::size_t t = 0; t < n_classes; ++t) s += at(t, p);
    return s;
}

ConfusionMatrix confusion(std::span<const std::size_t> truth, std::span<const std::size_t> pred,
                          std::size_t n_classes) {
    if (truth.size() != pred.size()) throw ShapeError("confusion: label vectors differ in length");
    ConfusionMatrix cm(n_classes);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] >= n_classes || pred[i] >= n_classes)
            throw LabelError("confusion: label out of range");
        ++cm.at(truth[i], pred[i]);
    }
    return cm;
}

MetricSet classification_metrics(const ConfusionMatrix& cm) {
    const std::size_t n = cm.n_classes;
    const auto total = static_cast<double>(cm.total());
    if (total == 0.0) throw DataError("metrics: empty confusion matrix");

    MetricSet m;
    double trace = 0;
    for (std::size_t c = 0; c < n; ++c) trace += static_cast<double>(cm.at(c, c));
    m.acc = trace / total;

    double prec_sum = 0, rec_sum = 0, f1_sum = 0, fpr_sum = 0;
    for (std::size_t c = 0; c < n; ++c) {
        const auto tp = static_cast<double>(cm.at(c, c));
        const auto fn = static_cast<double>(cm.row_sum(c)) - tp;
        const auto fp = static_cast<double>(cm.col_sum(c)) - tp;
        const auto tn = total - tp - fn - fp;
        // Empty denominators contribute 0 so values stay reproducible.
        double prec = 0, rec = 0;
        if (tp + fp > 0) prec = tp / (tp + fp);
        else m.degenerate = true;
        if (tp + fn > 0) rec = tp / (tp + fn);
        else m.degenerate = true;
        double f1 = prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0.0;
        double fpr = fp + tn > 0 ? fp / (fp + tn) : 0.0;
        prec_sum += prec;
        rec_sum += rec;
        f1_sum += f1;
        fpr_sum += fpr;
    }
    const auto nd = static_cast<double>(n);
    m.prec = prec_sum / nd;
    m.rec = rec_sum / nd;
    m.f1 = f1_sum / nd;
    m.bacc = rec_sum / nd;  // mean per-class recall
    m.fpr = fpr_sum / nd;

    // Multiclass MCC straight from the confusion matrix.
    double cxs = 0;  // sum_k c_kk * s  handled via trace below
    double sum_pk_tk = 0, sum_pk2 = 0, sum_tk2 = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const auto tk = static_cast<double>(cm.row_sum(k));
        const auto pk = static_cast<double>(cm.col_sum(k));
        sum_pk_tk += pk * tk;
        sum_pk2 += pk * pk;
        sum_tk2 += tk * tk;
    }
    cxs = trace * total - sum_pk_tk;
    const double denom = std::sqrt(total * total - sum_pk2) * std::sqrt(total * total - sum_tk2);
    m.mcc = denom > 0 ? cxs / denom : 0.0;
    if (denom == 0) m.degenerate = true;
    return m;
}

double auc_roc_ovr(const Matrix& probs, std::span<const std::size_t> truth) {
    if (probs.rows() != truth.size()) throw ShapeError("auc: row count mismatch");
    const std::size_t n = probs.rows();
    const std::size_t n_classes = probs.cols();
    if (n == 0) throw DataError("auc: no samples");

    double auc_sum = 0;
    std::size_t classes_present = 0;
    std::vector<std::size_t> order(n);
    std::vector<double> ranks(n);
    for (std::size_t c = 0; c < n_classes; ++c) {
        std::size_t n_pos = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (truth[i] == c) ++n_pos;
        if (n_pos == 0 || n_pos == n) continue;  // class absent (or only class): skip
        ++classes_present;

        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return probs.at(a, c) < probs.at(b, c); });
        // midranks over tied scores
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j + 1 < n && probs.at(order[j + 1], c) == probs.at(order[i], c)) ++j;
            const double mid = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
            for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mid;
            i = j + 1;
        }
        double rank_pos = 0;
        for (std::size_t k = 0; k < n; ++k)
            if (truth[k] == c) rank_pos += ranks[k];
        const auto np = static_cast<double>(n_pos);
        const auto nn = static_cast<double>(n - n_pos);
        auc_sum += (rank_pos - np * (np + 1) / 2.0) / (np * nn);
    }
    if (classes_present == 0) throw DataError("auc: no class present in truth with both labels");
    return auc_sum / static_cast<double>(classes_present);
}

std::vector<double> per_class_accuracy(const ConfusionMatrix& cm) {
    const auto total = static_cast<double>(cm.total());
    if (total == 0.0) throw DataError("per-class accuracy: empty confusion matrix");
    std::vector<double> out(cm.n_classes);
    for (std::size_t c = 0; c < cm.n_classes; ++c) {
        const auto tp = static_cast<double>(cm.at(c, c));
        const auto fn = static_cast<double>(cm.row_sum(c)) - tp;
        const auto fp = static_cast<double>(cm.col_sum(c)) - tp;
        const auto tn = total - tp - fn - fp;
        out[c] = (tp + tn) / total;
    }
    return out;
}

double false_positive_rate(const ConfusionMatrix& cm, std::size_t normal_class) {
    if (normal_class >= cm.n_classes) throw LabelError("fpr: normal class out of range");
    const auto normals = static_cast<double>(cm.row_sum(normal_class));
    if (normals == 0.0) throw DataError("fpr: no normal samples");
    const auto correct = static_cast<double>(cm.at(normal_class, normal_class));
    return (normals - correct) / normals;
}

}  // namespace flowrank::metrics
