/**
 * @file som.hpp
 * @brief Kohonen self-organizing map on a rectangular grid.
 *
 * Used twice: a 2-D map over the joint (condition, decision) space that
 * produces the crisp granules, and k-neuron 1-D maps that discretize single
 * attributes into ordered classes (low / middle / high for k = 3).
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sonfis/common.hpp"
#include "sonfis/dataset.hpp"

namespace sonfis {

class SomCodebook {
public:
    SomCodebook() = default;
    SomCodebook(std::size_t n1, std::size_t n2, std::size_t dim, Vector weights)
        : n1_(n1), n2_(n2), dim_(dim), weights_(std::move(weights)) {
        if (n1_ == 0 || n2_ == 0 || dim_ == 0) throw std::invalid_argument("SomCodebook: empty grid");
        if (weights_.size() != n1_ * n2_ * dim_) throw std::invalid_argument("SomCodebook: weight size mismatch");
    }

    std::size_t rows() const { return n1_; }
    std::size_t cols() const { return n2_; }
    std::size_t size() const { return n1_ * n2_; }
    std::size_t dim() const { return dim_; }

    std::span<const double> weight(std::size_t k) const { return {weights_.data() + k * dim_, dim_}; }
    std::span<double> weight(std::size_t k) { return {weights_.data() + k * dim_, dim_}; }
    const Vector& raw() const { return weights_; }

    std::size_t grid_row(std::size_t k) const { return k / n2_; }
    std::size_t grid_col(std::size_t k) const { return k % n2_; }

    std::size_t grid_distance2(std::size_t a, std::size_t b) const {
        const auto dr = static_cast<long>(grid_row(a)) - static_cast<long>(grid_row(b));
        const auto dc = static_cast<long>(grid_col(a)) - static_cast<long>(grid_col(b));
        return static_cast<std::size_t>(dr * dr + dc * dc);
    }

private:
    std::size_t n1_ = 0, n2_ = 0, dim_ = 0;
    Vector weights_;
};

struct SomTrainParams {
    std::size_t epochs = 40;
    double lr0 = 0.5;
    double lr_end = 0.01;
    double sigma0 = -1.0;  ///< <= 0 selects max(n1, n2) / 2
    double sigma_end = 0.5;
    std::uint64_t seed = 1;

    void validate() const {
        if (epochs < 1) throw std::invalid_argument("SOM epochs must be >= 1");
        if (!(lr0 > 0.0 && lr0 <= 1.0)) throw std::invalid_argument("SOM lr0 must lie in (0, 1]");
        if (!(lr_end > 0.0 && lr_end <= lr0)) throw std::invalid_argument("SOM lr_end must lie in (0, lr0]");
        if (!(sigma_end > 0.0)) throw std::invalid_argument("SOM sigma_end must be > 0");
        if (sigma0 > 0.0 && sigma0 < sigma_end) throw std::invalid_argument("SOM sigma0 must be >= sigma_end");
    }
};

struct SomTrainStats {
    Vector quantization_error;  ///< one entry per epoch, measured after the epoch
};

namespace detail {

inline void check_dims(const SomCodebook& cb, const std::vector<Vector>& data, const char* what) {
    if (data.empty()) throw std::invalid_argument(std::string(what) + ": empty data");
    for (const auto& x : data)
        if (x.size() != cb.dim()) throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

inline double schedule(double start, double end, std::size_t epoch, std::size_t epochs) {
    if (epochs <= 1) return start;
    const double frac = static_cast<double>(epoch) / static_cast<double>(epochs - 1);
    return start * std::pow(end / start, frac);
}

}  // namespace detail

/// Weights drawn uniformly inside the per-dimension [min, max] of data.
inline SomCodebook init_grid(std::size_t n1, std::size_t n2, std::size_t dim, const std::vector<Vector>& data,
                             std::uint64_t seed) {
    if (n1 == 0 || n2 == 0) throw std::invalid_argument("init_grid: n1 and n2 must be >= 1");
    if (data.empty()) throw std::invalid_argument("init_grid: empty data");
    Vector lo(dim, INFINITY), hi(dim, -INFINITY);
    for (const auto& x : data) {
        if (x.size() != dim) throw std::invalid_argument("init_grid: dimension mismatch");
        for (std::size_t d = 0; d < dim; ++d) {
            lo[d] = std::min(lo[d], x[d]);
            hi[d] = std::max(hi[d], x[d]);
        }
    }
    Rng rng(seed);
    Vector w(n1 * n2 * dim);
    for (std::size_t k = 0; k < n1 * n2; ++k)
        for (std::size_t d = 0; d < dim; ++d) w[k * dim + d] = rng.uniform(lo[d], hi[d]);
    return SomCodebook(n1, n2, dim, std::move(w));
}

/// Best-matching unit by Euclidean distance; ties go to the lowest index.
inline std::size_t bmu(const SomCodebook& cb, std::span<const double> x) {
    if (x.size() != cb.dim()) throw std::invalid_argument("bmu: dimension mismatch");
    std::size_t best = 0;
    double best_d = INFINITY;
    for (std::size_t k = 0; k < cb.size(); ++k) {
        const double d = squared_distance(cb.weight(k).data(), x.data(), cb.dim());
        if (d < best_d) {
            best_d = d;
            best = k;
        }
    }
    return best;
}

inline double quantization_error(const SomCodebook& cb, const std::vector<Vector>& data) {
    detail::check_dims(cb, data, "quantization_error");
    double total = 0.0;
    for (const auto& x : data) {
        const auto k = bmu(cb, x);
        total += std::sqrt(squared_distance(cb.weight(k).data(), x.data(), cb.dim()));
    }
    return total / static_cast<double>(data.size());
}

/**
 * @brief Online Kohonen training.
 *
 * Each epoch visits the data in a seeded shuffled order and applies
 * w += lr * h * (x - w) to every neuron, with Gaussian neighborhood
 * h = exp(-d^2 / (2 sigma^2)) over grid distance d to the winner. lr and
 * sigma decay exponentially per epoch from their start to end values.
 */
inline SomCodebook train(SomCodebook cb, const std::vector<Vector>& data, const SomTrainParams& params,
                         SomTrainStats* stats = nullptr) {
    params.validate();
    detail::check_dims(cb, data, "train");
    const double sigma0 =
        params.sigma0 > 0.0 ? params.sigma0 : std::max(0.5 * static_cast<double>(std::max(cb.rows(), cb.cols())),
                                                       params.sigma_end);
    const std::size_t max_d2 = (cb.rows() - 1) * (cb.rows() - 1) + (cb.cols() - 1) * (cb.cols() - 1);
    Vector h(max_d2 + 1);
    Rng rng(params.seed);
    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    const std::size_t dim = cb.dim();

    for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
        const double lr = detail::schedule(params.lr0, params.lr_end, epoch, params.epochs);
        const double sigma = detail::schedule(sigma0, params.sigma_end, epoch, params.epochs);
        for (std::size_t d2 = 0; d2 <= max_d2; ++d2)
            h[d2] = lr * std::exp(-static_cast<double>(d2) / (2.0 * sigma * sigma));
        rng.shuffle(order);
        for (auto i : order) {
            const auto& x = data[i];
            const auto win = bmu(cb, x);
            for (std::size_t k = 0; k < cb.size(); ++k) {
                const double a = h[cb.grid_distance2(win, k)];
                if (a == 0.0) continue;
                auto w = cb.weight(k);
                for (std::size_t d = 0; d < dim; ++d) w[d] += a * (x[d] - w[d]);
            }
        }
        if (stats) stats->quantization_error.push_back(quantization_error(cb, data));
    }
    return cb;
}

/// One row per neuron: the weight vectors reinterpreted as a reduced data table.
inline DataTable codebook_granules(const SomCodebook& cb, const std::vector<std::string>& names) {
    if (names.size() != cb.dim()) throw std::invalid_argument("codebook_granules: names/dimension mismatch");
    std::vector<Vector> rows;
    rows.reserve(cb.size());
    for (std::size_t k = 0; k < cb.size(); ++k) {
        auto w = cb.weight(k);
        rows.emplace_back(w.begin(), w.end());
    }
    return DataTable(names, std::move(rows));
}

/// Per-neuron hit counts (how many rows pick each neuron as BMU).
inline std::vector<std::size_t> hit_histogram(const SomCodebook& cb, const std::vector<Vector>& data) {
    std::vector<std::size_t> hits(cb.size(), 0);
    for (const auto& x : data) ++hits[bmu(cb, x)];
    return hits;
}

inline std::size_t dead_neuron_count(const SomCodebook& cb, const std::vector<Vector>& data) {
    const auto hits = hit_histogram(cb, data);
    return static_cast<std::size_t>(std::count(hits.begin(), hits.end(), std::size_t{0}));
}

/// Debug export: grid row, grid col, weight components.
inline void write_codebook(std::ostream& out, const SomCodebook& cb) {
    out << "row,col";
    for (std::size_t d = 0; d < cb.dim(); ++d) out << ",w" << d;
    out << '\n';
    for (std::size_t k = 0; k < cb.size(); ++k) {
        out << cb.grid_row(k) << ',' << cb.grid_col(k);
        for (double v : cb.weight(k)) out << ',' << format_number(v);
        out << '\n';
    }
}

/// Maps a scalar attribute onto k ordered classes 0..k-1.
class Discretizer1D {
public:
    Discretizer1D() = default;
    Discretizer1D(std::size_t attribute, Vector thresholds) : attribute_(attribute), thresholds_(std::move(thresholds)) {
        for (std::size_t i = 1; i < thresholds_.size(); ++i)
            if (!(thresholds_[i] > thresholds_[i - 1]))
                throw std::invalid_argument("Discretizer1D: thresholds must strictly increase");
    }

    std::size_t attribute() const { return attribute_; }
    std::size_t classes() const { return thresholds_.size() + 1; }
    const Vector& thresholds() const { return thresholds_; }

    /// Number of thresholds strictly below v.
    int label(double v) const {
        return static_cast<int>(std::lower_bound(thresholds_.begin(), thresholds_.end(), v) - thresholds_.begin());
    }

private:
    std::size_t attribute_ = 0;
    Vector thresholds_;
};

inline SomTrainParams discretizer_params(std::size_t k, std::uint64_t seed) {
    SomTrainParams p;
    p.epochs = 40;
    p.lr0 = 0.5;
    p.lr_end = 0.01;
    p.sigma0 = std::max(0.5 * static_cast<double>(k), 0.1);
    p.sigma_end = 0.1;
    p.seed = seed;
    return p;
}

/**
 * Fits a k-neuron 1-D SOM to the values; thresholds are the midpoints of
 * adjacent sorted neuron weights.
 */
inline Discretizer1D fit_discretizer(const Vector& values, std::size_t k, std::uint64_t seed,
                                     std::size_t attribute = 0) {
    if (k == 0) throw std::invalid_argument("fit_discretizer: k must be >= 1");
    const std::set<double> distinct(values.begin(), values.end());
    if (distinct.size() < k)
        throw DataError("fit_discretizer: attribute " + std::to_string(attribute) + " has " +
                        std::to_string(distinct.size()) + " distinct values, need at least " + std::to_string(k));
    if (k == 1) return Discretizer1D(attribute, {});
    std::vector<Vector> data;
    data.reserve(values.size());
    for (double v : values) data.push_back({v});
    auto cb = init_grid(1, k, 1, data, mix_seed(seed, 1));
    cb = train(std::move(cb), data, discretizer_params(k, mix_seed(seed, 2)));
    Vector w(cb.raw());
    std::sort(w.begin(), w.end());
    Vector thresholds;
    for (std::size_t i = 0; i + 1 < w.size(); ++i) {
        if (!(w[i + 1] > w[i]))
            throw DataError("fit_discretizer: attribute " + std::to_string(attribute) +
                            " produced coinciding class prototypes");
        thresholds.push_back(0.5 * (w[i] + w[i + 1]));
    }
    return Discretizer1D(attribute, std::move(thresholds));
}

}  // namespace sonfis
