/**
 * @file nfis.hpp
 * @brief First-order Takagi-Sugeno-Kang fuzzy inference with hybrid
 * (least-squares + gradient) training.
 *
 * Every rule r carries one Gaussian premise per input dimension and an
 * affine consequent f_r(x) = a_r . x + b_r. The model output is the
 * firing-weighted average of the f_r.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sonfis/common.hpp"
#include "sonfis/dataset.hpp"

namespace sonfis {

enum class ConsequentOrder { First, Zero };

struct TskModel {
    std::size_t n_rules = 0;
    std::size_t dim = 0;
    Vector centers;      ///< n_rules x dim
    Vector widths;       ///< n_rules x dim, all > 0
    Vector width_floor;  ///< dim
    Vector consequents;  ///< n_rules x (dim + 1); bias last
    double firing_floor = 1e-12;
    ConsequentOrder order = ConsequentOrder::First;

    double center(std::size_t r, std::size_t d) const { return centers[r * dim + d]; }
    double width(std::size_t r, std::size_t d) const { return widths[r * dim + d]; }
    double coef(std::size_t r, std::size_t d) const { return consequents[r * (dim + 1) + d]; }
    double bias(std::size_t r) const { return consequents[r * (dim + 1) + dim]; }
};

struct NfisTrainParams {
    std::size_t epochs = 50;
    double premise_lr = 0.05;
    double firing_floor = 1e-12;
    std::uint64_t seed = 1;
    ConsequentOrder order = ConsequentOrder::First;

    void validate() const {
        if (!(premise_lr >= 0.0) || !std::isfinite(premise_lr))
            throw std::invalid_argument("NFIS premise learning rate must be finite and >= 0");
        if (!(firing_floor > 0.0 && firing_floor <= 1e-3))
            throw std::invalid_argument("NFIS firing floor must lie in (0, 1e-3]");
    }
};

struct NfisHistory {
    Vector rmse_before_lse;  ///< training RMSE entering each epoch
    Vector rmse_after_lse;   ///< training RMSE right after the epoch's LSE step
    bool least_norm = false; ///< fewer rows than consequent parameters
};

/// Per-rule linear value a_r . x + b_r.
inline double rule_output(const TskModel& m, std::size_t r, std::span<const double> x) {
    double y = m.bias(r);
    for (std::size_t d = 0; d < m.dim; ++d) y += m.coef(r, d) * x[d];
    return y;
}

inline Vector firing_strengths(const TskModel& m, std::span<const double> x) {
    Vector w(m.n_rules);
    for (std::size_t r = 0; r < m.n_rules; ++r) {
        double e = 0.0;
        for (std::size_t d = 0; d < m.dim; ++d) {
            const double z = (x[d] - m.center(r, d)) / m.width(r, d);
            e += 0.5 * z * z;
        }
        w[r] = std::exp(-e);
    }
    return w;
}

/// Firing strengths divided by their sum; uniform when the sum is below the firing floor.
inline Vector normalized_firing(const TskModel& m, std::span<const double> x, bool* fell_back = nullptr) {
    Vector w = firing_strengths(m, x);
    double total = 0.0;
    for (double v : w) total += v;
    const bool fallback = !(total >= m.firing_floor);
    if (fell_back) *fell_back = fallback;
    for (auto& v : w) v = fallback ? 1.0 / static_cast<double>(m.n_rules) : v / total;
    return w;
}

inline double eval_tsk(const TskModel& m, std::span<const double> x) {
    if (x.size() != m.dim) throw std::invalid_argument("eval_tsk: dimension mismatch");
    const Vector w = normalized_firing(m, x);
    double y = 0.0;
    for (std::size_t r = 0; r < m.n_rules; ++r) y += w[r] * rule_output(m, r, x);
    return y;
}

inline Vector predict(const TskModel& m, const DataTable& table) {
    Vector out;
    out.reserve(table.size());
    for (std::size_t i = 0; i < table.size(); ++i) {
        const auto& row = table.row(i);
        out.push_back(eval_tsk(m, std::span<const double>(row.data(), m.dim)));
    }
    return out;
}

/// sqrt(sum (p_i - t_i)^2 / m).
inline double rmse(const Vector& predictions, const Vector& targets) {
    if (predictions.empty()) throw std::invalid_argument("rmse: empty test set");
    if (predictions.size() != targets.size()) throw std::invalid_argument("rmse: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const double d = predictions[i] - targets[i];
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(predictions.size()));
}

inline double rmse(const TskModel& m, const DataTable& test) {
    if (test.empty()) throw std::invalid_argument("rmse: empty test set");
    return rmse(predict(m, test), test.column(test.width() - 1));
}

namespace detail {

/// Seeded k-means++ followed by Lloyd iterations; returns the assignment.
inline std::vector<std::size_t> kmeans(const std::vector<Vector>& points, std::size_t k, std::uint64_t seed,
                                       Vector& centers, std::size_t max_iter = 100) {
    const std::size_t n = points.size();
    const std::size_t dim = points.front().size();
    Rng rng(seed);
    centers.assign(k * dim, 0.0);
    auto set_center = [&](std::size_t c, const Vector& p) { std::copy(p.begin(), p.end(), centers.begin() + c * dim); };
    set_center(0, points[rng.index(n)]);
    Vector nearest(n, INFINITY);
    for (std::size_t c = 1; c < k; ++c) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            nearest[i] = std::min(nearest[i], squared_distance(points[i].data(), centers.data() + (c - 1) * dim, dim));
            total += nearest[i];
        }
        std::size_t pick = n - 1;
        if (total > 0.0) {
            double target = rng.uniform() * total;
            for (std::size_t i = 0; i < n; ++i) {
                target -= nearest[i];
                if (target < 0.0) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = rng.index(n);
        }
        set_center(c, points[pick]);
    }

    std::vector<std::size_t> assign(n, k);
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            double best_d = INFINITY;
            for (std::size_t c = 0; c < k; ++c) {
                const double d = squared_distance(points[i].data(), centers.data() + c * dim, dim);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            if (assign[i] != best) {
                assign[i] = best;
                changed = true;
            }
        }
        Vector sums(k * dim, 0.0);
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            ++counts[assign[i]];
            for (std::size_t d = 0; d < dim; ++d) sums[assign[i] * dim + d] += points[i][d];
        }
        for (std::size_t c = 0; c < k; ++c)
            if (counts[c] > 0)  // empty clusters keep their previous center
                for (std::size_t d = 0; d < dim; ++d)
                    centers[c * dim + d] = sums[c * dim + d] / static_cast<double>(counts[c]);
        if (!changed) break;
    }
    return assign;
}

inline void apply_width_floor(TskModel& m) {
    for (std::size_t r = 0; r < m.n_rules; ++r)
        for (std::size_t d = 0; d < m.dim; ++d) {
            auto& s = m.widths[r * m.dim + d];
            if (!(s >= m.width_floor[d])) s = m.width_floor[d];
        }
}

}  // namespace detail

/**
 * Premises from seeded k-means over the condition space: centers are the
 * cluster means, widths the per-dimension cluster standard deviations
 * floored at 5% of the attribute range (0.05 for constant attributes).
 */
inline TskModel init_tsk(std::size_t n_rules, const DataTable& train, std::uint64_t seed) {
    if (n_rules == 0) throw std::invalid_argument("init_tsk: n_rules must be >= 1");
    if (train.size() < n_rules)
        throw DataError("init_tsk: " + std::to_string(train.size()) + " training rows for " +
                        std::to_string(n_rules) + " rules");
    const std::size_t dim = train.conditions();
    std::vector<Vector> points;
    points.reserve(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) points.push_back(train.condition(i));

    TskModel m;
    m.n_rules = n_rules;
    m.dim = dim;
    m.width_floor.assign(dim, 0.0);
    for (std::size_t d = 0; d < dim; ++d) {
        double lo = INFINITY, hi = -INFINITY;
        for (const auto& p : points) {
            lo = std::min(lo, p[d]);
            hi = std::max(hi, p[d]);
        }
        m.width_floor[d] = hi > lo ? 0.05 * (hi - lo) : 0.05;
    }
    const auto assign = detail::kmeans(points, n_rules, seed, m.centers);
    m.widths.assign(n_rules * dim, 0.0);
    std::vector<std::size_t> counts(n_rules, 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
        ++counts[assign[i]];
        for (std::size_t d = 0; d < dim; ++d) {
            const double z = points[i][d] - m.centers[assign[i] * dim + d];
            m.widths[assign[i] * dim + d] += z * z;
        }
    }
    for (std::size_t r = 0; r < n_rules; ++r)
        for (std::size_t d = 0; d < dim; ++d)
            if (counts[r] > 0) m.widths[r * dim + d] = std::sqrt(m.widths[r * dim + d] / static_cast<double>(counts[r]));
    detail::apply_width_floor(m);
    m.consequents.assign(n_rules * (dim + 1), 0.0);
    return m;
}

/// Row of the LSE design matrix: normalized firing times [x, 1] per rule.
inline Vector design_row(const TskModel& m, std::span<const double> x) {
    const Vector w = normalized_firing(m, x);
    const std::size_t stride = m.dim + 1;
    Vector row(m.n_rules * stride, 0.0);
    for (std::size_t r = 0; r < m.n_rules; ++r) {
        if (m.order == ConsequentOrder::First)
            for (std::size_t d = 0; d < m.dim; ++d) row[r * stride + d] = w[r] * x[d];
        row[r * stride + m.dim] = w[r];
    }
    return row;
}

/// Pivots below this fraction of the largest one count as rank deficiency.
inline constexpr double kLseRankTolerance = 1e-7;

/**
 * Consequents by linear least squares over the normalized-firing design
 * matrix with premises held fixed. A complete orthogonal decomposition gives
 * the minimum-norm solution when the system is rank deficient.
 */
inline TskModel fit_consequents_lse(TskModel m, const DataTable& train, bool* least_norm = nullptr) {
    const std::size_t cols = m.n_rules * (m.dim + 1);
    Eigen::MatrixXd a(train.size(), cols);
    Eigen::VectorXd b(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) {
        const auto& row = train.row(i);
        const Vector dr = design_row(m, std::span<const double>(row.data(), m.dim));
        for (std::size_t j = 0; j < cols; ++j) {
            if (!std::isfinite(dr[j]))
                throw DataError("fit_consequents_lse: non-finite design entry at row " + std::to_string(i));
            a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = dr[j];
        }
        b(static_cast<Eigen::Index>(i)) = row.back();
    }
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
    cod.setThreshold(kLseRankTolerance);
    cod.compute(a);
    const Eigen::VectorXd sol = cod.solve(b);
    if (least_norm) *least_norm = cod.rank() < static_cast<Eigen::Index>(cols);
    for (std::size_t j = 0; j < cols; ++j) m.consequents[j] = sol(static_cast<Eigen::Index>(j));
    return m;
}

struct PremiseGradient {
    Vector centers;  ///< d(MSE)/d(center), n_rules x dim
    Vector widths;   ///< d(MSE)/d(width), n_rules x dim
};

/// Analytic gradient of the mean squared training error w.r.t. premise parameters.
inline PremiseGradient premise_gradient(const TskModel& m, const DataTable& train) {
    PremiseGradient g{Vector(m.n_rules * m.dim, 0.0), Vector(m.n_rules * m.dim, 0.0)};
    const double scale = 2.0 / static_cast<double>(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) {
        const auto& row = train.row(i);
        std::span<const double> x(row.data(), m.dim);
        const Vector w = firing_strengths(m, x);
        double total = 0.0;
        for (double v : w) total += v;
        if (!(total >= m.firing_floor)) continue;  // uniform fallback has no premise dependence
        Vector f(m.n_rules);
        double y = 0.0;
        for (std::size_t r = 0; r < m.n_rules; ++r) {
            f[r] = rule_output(m, r, x);
            y += w[r] * f[r];
        }
        y /= total;
        const double err = scale * (y - row.back());
        for (std::size_t r = 0; r < m.n_rules; ++r) {
            const double dy_dw = err * (f[r] - y) / total * w[r];
            for (std::size_t d = 0; d < m.dim; ++d) {
                const double s = m.width(r, d);
                const double z = x[d] - m.center(r, d);
                g.centers[r * m.dim + d] += dy_dw * z / (s * s);
                g.widths[r * m.dim + d] += dy_dw * z * z / (s * s * s);
            }
        }
    }
    return g;
}

/**
 * Hybrid learning: each epoch fits consequents by LSE, then takes one
 * gradient step on the premises (widths re-floored). A final LSE pass
 * leaves the consequents optimal for the returned premises.
 */
inline std::pair<TskModel, NfisHistory> train_hybrid(TskModel m, const DataTable& train,
                                                      const NfisTrainParams& params) {
    params.validate();
    if (train.conditions() != m.dim) throw std::invalid_argument("train_hybrid: dimension mismatch");
    m.firing_floor = params.firing_floor;
    m.order = params.order;
    NfisHistory hist;
    const Vector targets = train.column(train.width() - 1);
    bool deficient = false;
    for (std::size_t e = 0; e < params.epochs; ++e) {
        hist.rmse_before_lse.push_back(rmse(predict(m, train), targets));
        m = fit_consequents_lse(std::move(m), train, &deficient);
        hist.rmse_after_lse.push_back(rmse(predict(m, train), targets));
        const auto g = premise_gradient(m, train);
        for (std::size_t j = 0; j < m.centers.size(); ++j) {
            m.centers[j] -= params.premise_lr * g.centers[j];
            m.widths[j] -= params.premise_lr * g.widths[j];
        }
        detail::apply_width_floor(m);
    }
    m = fit_consequents_lse(std::move(m), train, &deficient);
    hist.least_norm = deficient;
    return {std::move(m), std::move(hist)};
}

/// Text export: one line per rule with centers, widths, consequent weights and bias.
inline void write_model(std::ostream& out, const TskModel& m) {
    out << "rule";
    for (std::size_t d = 0; d < m.dim; ++d) out << ",center" << d;
    for (std::size_t d = 0; d < m.dim; ++d) out << ",width" << d;
    for (std::size_t d = 0; d < m.dim; ++d) out << ",coef" << d;
    out << ",bias\n";
    for (std::size_t r = 0; r < m.n_rules; ++r) {
        out << r;
        for (std::size_t d = 0; d < m.dim; ++d) out << ',' << format_number(m.center(r, d));
        for (std::size_t d = 0; d < m.dim; ++d) out << ',' << format_number(m.width(r, d));
        for (std::size_t d = 0; d < m.dim; ++d) out << ',' << format_number(m.coef(r, d));
        out << ',' << format_number(m.bias(r)) << '\n';
    }
}

}  // namespace sonfis
