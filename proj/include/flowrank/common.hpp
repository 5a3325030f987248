#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <functional>
#include <mutex>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace flowrank {

// Error taxonomy mirrored by the CLI exit codes: usage -> 1, data -> 2,
// internal -> 3.
enum class ErrorKind { Usage, Data, Internal };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

struct UsageError : Error {
    explicit UsageError(const std::string& msg) : Error(ErrorKind::Usage, msg) {}
};
struct DataError : Error {
    explicit DataError(const std::string& msg) : Error(ErrorKind::Data, msg) {}
};
struct SchemaError : DataError {
    explicit SchemaError(const std::string& msg) : DataError(msg) {}
};
struct LabelError : DataError {
    explicit LabelError(const std::string& msg) : DataError(msg) {}
};
struct ShapeError : DataError {
    explicit ShapeError(const std::string& msg) : DataError(msg) {}
};
// Raised when an operation needs a capability the model kind lacks
// (e.g. input gradients on a tree ensemble).
struct CapabilityError : DataError {
    explicit CapabilityError(const std::string& msg) : DataError(msg) {}
};
struct InternalError : Error {
    explicit InternalError(const std::string& msg) : Error(ErrorKind::Internal, msg) {}
};

// Dense row-major matrix of doubles. The one tabular currency between
// modules; deliberately minimal.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix from_rows(const std::vector<std::vector<double>>& rows) {
        if (rows.empty()) return {};
        Matrix m(rows.size(), rows.front().size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != m.cols_) throw ShapeError("ragged row data");
            std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
        }
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return rows_ == 0; }

    double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    // New matrix keeping only the given columns, in the given order.
    Matrix select_columns(std::span<const std::size_t> cols) const {
        Matrix out(rows_, cols.size());
        for (std::size_t r = 0; r < rows_; ++r) {
            auto src = row(r);
            auto dst = out.row(r);
            for (std::size_t j = 0; j < cols.size(); ++j) dst[j] = src[cols[j]];
        }
        return out;
    }

    Matrix select_rows(std::span<const std::size_t> idx) const {
        Matrix out(idx.size(), cols_);
        for (std::size_t r = 0; r < idx.size(); ++r) {
            auto src = row(idx[r]);
            std::copy(src.begin(), src.end(), out.row(r).begin());
        }
        return out;
    }

    bool all_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// splitmix64, used to derive per-unit seeds from a master seed so worker
// count never changes a result.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

// Shortest decimal form that round-trips the exact double. Keeps CSV
// re-parses byte-faithful and runs byte-identical.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw DataError("not a number: '" + s + "'");
    return v;
}

// Index of the maximum, ties broken toward the lowest index.
inline std::size_t argmax_tie_low(std::span<const double> v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

// Runs fn(i) for i in [0, n). Each index writes only its own slot, so the
// result is independent of n_threads.
inline void parallel_for(std::size_t n, unsigned n_threads, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    if (n_threads <= 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    unsigned workers = std::min<unsigned>(n_threads, static_cast<unsigned>(n));
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::exception_ptr first_error;
    std::mutex err_mutex;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace flowrank
