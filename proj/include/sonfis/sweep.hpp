/**
 * @file sweep.hpp
 * @brief alpha / beta parameter sweeps over the feedback loop, multi-seed
 * aggregation and the order-disorder readout.
 *
 * Disorder at a sweep point is the standard deviation of the pooled
 * post-burn-in neuron counts of all its seeds. The transition interval is a
 * heuristic readout of where that statistic first jumps.
 */

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include "sonfis/common.hpp"
#include "sonfis/controller.hpp"

namespace sonfis {

struct SweepSpec {
    RunConfig base;
    std::vector<double> alphas;  ///< empty: base.alpha only
    std::vector<double> betas;   ///< empty: base.beta only
    std::size_t seeds = 5;       ///< seeds base.seed, base.seed + 1, ...
    std::optional<std::size_t> burn_in;  ///< default: steps / 3

    std::size_t burn_in_steps() const { return burn_in.value_or(base.steps / 3); }

    std::vector<double> alpha_axis() const { return alphas.empty() ? std::vector<double>{base.alpha} : alphas; }
    std::vector<double> beta_axis() const { return betas.empty() ? std::vector<double>{base.beta} : betas; }

    void validate() const {
        if (alphas.empty() && betas.empty()) throw std::invalid_argument("sweep needs at least one alpha or beta value");
        if (seeds < 1) throw std::invalid_argument("sweep needs at least one seed");
        if (burn_in_steps() >= base.steps) throw std::invalid_argument("burn-in must be smaller than the step count");
        base.validate();
    }
};

struct SweepCell {
    double alpha = 0.0;
    double beta = 0.0;
    std::uint64_t seed = 0;
    std::optional<RunTrace> trace;
    std::string error;  ///< non-empty when the run failed
};

struct SweepAggregate {
    double alpha = 0.0;
    double beta = 0.0;
    double mean_ng = NAN;
    double std_ng = NAN;
    double mean_e = NAN;
    double std_e = NAN;
    double mean_dead_fraction = NAN;
    std::size_t runs = 0;  ///< successful seeds
};

/// Post-burn-in series of one run, as stored in the long CSV.
struct SeriesPoint {
    double ng = 0.0;
    double e = 0.0;
    double dead = 0.0;
};

struct SweepResult {
    std::vector<double> alphas;
    std::vector<double> betas;
    std::size_t burn_in = 0;
    std::vector<SweepCell> cells;  ///< alpha-major, then beta, then seed
    std::vector<SweepAggregate> aggregates;  ///< alpha-major, then beta
};

namespace detail {

inline double mean_of(const Vector& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? NAN : s / static_cast<double>(v.size());
}

/// Population standard deviation.
inline double std_of(const Vector& v) {
    if (v.empty()) return NAN;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size()));
}

inline SweepAggregate aggregate_series(double alpha, double beta, const std::vector<std::vector<SeriesPoint>>& runs) {
    SweepAggregate a;
    a.alpha = alpha;
    a.beta = beta;
    a.runs = runs.size();
    Vector ng, e, dead;
    for (const auto& run : runs)
        for (const auto& p : run) {
            ng.push_back(p.ng);
            e.push_back(p.e);
            dead.push_back(p.ng > 0.0 ? p.dead / p.ng : 0.0);
        }
    a.mean_ng = mean_of(ng);
    a.std_ng = std_of(ng);
    a.mean_e = mean_of(e);
    a.std_e = std_of(e);
    a.mean_dead_fraction = mean_of(dead);
    return a;
}

inline std::vector<SeriesPoint> post_burn_in(const RunTrace& trace, std::size_t burn_in) {
    std::vector<SeriesPoint> out;
    for (const auto& s : trace.steps)
        if (s.t >= burn_in)
            out.push_back({static_cast<double>(s.neurons), s.error, static_cast<double>(s.dead)});
    return out;
}

}  // namespace detail

/// Recomputes per-point aggregates from the stored traces.
inline std::vector<SweepAggregate> aggregate_cells(const std::vector<double>& alphas, const std::vector<double>& betas,
                                                   const std::vector<SweepCell>& cells, std::size_t burn_in) {
    std::vector<SweepAggregate> out;
    for (double a : alphas)
        for (double b : betas) {
            std::vector<std::vector<SeriesPoint>> runs;
            for (const auto& c : cells)
                if (c.alpha == a && c.beta == b && c.trace) runs.push_back(detail::post_burn_in(*c.trace, burn_in));
            out.push_back(detail::aggregate_series(a, b, runs));
        }
    return out;
}

/**
 * Runs every (alpha, beta, seed) cell. Cells are independent and seeded
 * only by their seed value, so the result does not depend on execution
 * order or on the worker count (0 = hardware concurrency).
 */
inline SweepResult run_sweep(const SweepSpec& spec, const DataTable& train, const DataTable& test,
                             std::size_t workers = 0) {
    spec.validate();
    SweepResult result;
    result.alphas = spec.alpha_axis();
    result.betas = spec.beta_axis();
    result.burn_in = spec.burn_in_steps();
    for (double a : result.alphas)
        for (double b : result.betas)
            for (std::size_t s = 0; s < spec.seeds; ++s) {
                SweepCell c;
                c.alpha = a;
                c.beta = b;
                c.seed = spec.base.seed + s;
                result.cells.push_back(std::move(c));
            }

    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < result.cells.size(); i = next++) {
            auto& cell = result.cells[i];
            RunConfig cfg = spec.base;
            cfg.alpha = cell.alpha;
            cfg.beta = cell.beta;
            cfg.seed = cell.seed;
            try {
                cell.trace = run(cfg, train, test);
            } catch (const std::exception& e) {
                cell.error = e.what();
            }
        }
    };
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, result.cells.size());
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    result.aggregates = aggregate_cells(result.alphas, result.betas, result.cells, result.burn_in);
    return result;
}

inline const SweepAggregate& find_point(const SweepResult& result, double alpha, double beta) {
    for (const auto& a : result.aggregates)
        if (a.alpha == alpha && a.beta == beta) return a;
    throw std::out_of_range("no sweep point at alpha=" + format_number(alpha) + ", beta=" + format_number(beta));
}

/// Pooled post-burn-in NG standard deviation at one sweep point.
inline double disorder_statistic(const SweepResult& result, double alpha, double beta) {
    return find_point(result, alpha, beta).std_ng;
}

/// Same statistic straight from NG series (each already restricted to post-burn-in steps).
inline double disorder_statistic(const std::vector<Vector>& ng_series) {
    Vector pooled;
    for (const auto& s : ng_series) pooled.insert(pooled.end(), s.begin(), s.end());
    return detail::std_of(pooled);
}

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool overlaps(double a, double b) const { return lo <= b && a <= hi; }
};

/**
 * First axis step [x_{i-1}, x_i] where disorder rises to at least
 * ratio_threshold times (and strictly above) the running minimum of the
 * points to its left. Returns nothing for flat disorder or fewer than 3 points.
 */
inline std::optional<Interval> detect_transition(const Vector& axis, const Vector& disorder, double ratio_threshold) {
    if (axis.size() != disorder.size()) throw std::invalid_argument("detect_transition: size mismatch");
    if (!(ratio_threshold > 1.0)) throw std::invalid_argument("detect_transition: threshold must exceed 1");
    if (axis.size() < 3) return std::nullopt;
    std::vector<std::size_t> order(axis.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return axis[a] < axis[b]; });
    double running_min = disorder[order[0]];
    for (std::size_t k = 1; k < order.size(); ++k) {
        const double d = disorder[order[k]];
        if (std::isfinite(d) && std::isfinite(running_min) && d > running_min && d >= ratio_threshold * running_min)
            return Interval{axis[order[k - 1]], axis[order[k]]};
        if (std::isfinite(d)) running_min = std::isfinite(running_min) ? std::min(running_min, d) : d;
    }
    return std::nullopt;
}

enum class Axis { Alpha, Beta };

/// Transition along one axis of a sweep; the other axis must be single-valued.
inline std::optional<Interval> detect_transition(const SweepResult& result, double ratio_threshold = 2.0) {
    Axis axis;
    if (result.betas.size() == 1)
        axis = Axis::Alpha;
    else if (result.alphas.size() == 1)
        axis = Axis::Beta;
    else
        throw std::invalid_argument("detect_transition: sweep is two-dimensional; fix one axis");
    Vector xs, ds;
    for (const auto& a : result.aggregates) {
        xs.push_back(axis == Axis::Alpha ? a.alpha : a.beta);
        ds.push_back(a.std_ng);
    }
    return detect_transition(xs, ds, ratio_threshold);
}

/// Long format: alpha,beta,seed,t,NG,E,dead,flags (successful cells only).
inline void write_sweep_long(std::ostream& out, const SweepResult& r) {
    out << "alpha,beta,seed,t,NG,E,dead,flags\n";
    for (const auto& c : r.cells) {
        if (!c.trace) continue;
        for (const auto& s : c.trace->steps)
            out << format_number(c.alpha) << ',' << format_number(c.beta) << ',' << c.seed << ',' << s.t << ','
                << s.neurons << ',' << format_number(s.error) << ',' << s.dead << ',' << join_flags(s.flags) << '\n';
    }
}

inline void write_sweep_aggregate(std::ostream& out, const std::vector<SweepAggregate>& aggregates) {
    out << "alpha,beta,mean_NG,std_NG,mean_E,std_E,mean_dead_fraction,runs\n";
    for (const auto& a : aggregates)
        out << format_number(a.alpha) << ',' << format_number(a.beta) << ',' << format_number(a.mean_ng) << ','
            << format_number(a.std_ng) << ',' << format_number(a.mean_e) << ',' << format_number(a.std_e) << ','
            << format_number(a.mean_dead_fraction) << ',' << a.runs << '\n';
}

namespace detail {

inline double parse_cell(const std::string& field, std::size_t line, const char* what) {
    double v;
    if (field == "nan") return NAN;
    if (!parse_finite(field, v))
        throw DataError(std::string(what) + ": cannot parse '" + field + "' on line " + std::to_string(line));
    return v;
}

inline std::vector<std::vector<std::string>> read_csv_rows(std::istream& in, std::size_t min_fields, const char* what) {
    std::string line;
    if (!std::getline(in, line)) throw DataError(std::string(what) + ": empty file");
    std::vector<std::vector<std::string>> rows;
    std::size_t n = 1;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        auto f = split_fields(line);
        if (f.size() < min_fields)
            throw DataError(std::string(what) + ": line " + std::to_string(n) + " has too few fields");
        rows.push_back(std::move(f));
    }
    return rows;
}

}  // namespace detail

inline std::vector<SweepAggregate> read_sweep_aggregate(std::istream& in) {
    std::vector<SweepAggregate> out;
    std::size_t line = 1;
    for (const auto& f : detail::read_csv_rows(in, 6, "aggregate CSV")) {
        ++line;
        SweepAggregate a;
        a.alpha = detail::parse_cell(f[0], line, "aggregate CSV");
        a.beta = detail::parse_cell(f[1], line, "aggregate CSV");
        a.mean_ng = detail::parse_cell(f[2], line, "aggregate CSV");
        a.std_ng = detail::parse_cell(f[3], line, "aggregate CSV");
        a.mean_e = detail::parse_cell(f[4], line, "aggregate CSV");
        a.std_e = detail::parse_cell(f[5], line, "aggregate CSV");
        if (f.size() > 6) a.mean_dead_fraction = detail::parse_cell(f[6], line, "aggregate CSV");
        if (f.size() > 7) a.runs = static_cast<std::size_t>(detail::parse_cell(f[7], line, "aggregate CSV"));
        out.push_back(a);
    }
    return out;
}

/// Aggregates recomputed from a long CSV, in first-appearance order of (alpha, beta).
inline std::vector<SweepAggregate> aggregate_long_csv(std::istream& in, std::size_t burn_in) {
    using Key = std::pair<double, double>;
    std::vector<Key> order;
    std::map<Key, std::map<std::uint64_t, std::vector<SeriesPoint>>> runs;
    std::size_t line = 1;
    for (const auto& f : detail::read_csv_rows(in, 7, "long CSV")) {
        ++line;
        const Key key{detail::parse_cell(f[0], line, "long CSV"), detail::parse_cell(f[1], line, "long CSV")};
        const auto seed = static_cast<std::uint64_t>(std::stoull(f[2]));
        const auto t = static_cast<std::size_t>(detail::parse_cell(f[3], line, "long CSV"));
        if (!runs.count(key)) order.push_back(key);
        auto& series = runs[key][seed];
        if (t >= burn_in)
            series.push_back({detail::parse_cell(f[4], line, "long CSV"), detail::parse_cell(f[5], line, "long CSV"),
                              detail::parse_cell(f[6], line, "long CSV")});
    }
    std::vector<SweepAggregate> out;
    for (const auto& key : order) {
        std::vector<std::vector<SeriesPoint>> series;
        for (auto& [seed, s] : runs[key]) series.push_back(s);
        out.push_back(detail::aggregate_series(key.first, key.second, series));
    }
    return out;
}

/// True when stored aggregates equal the ones recomputed from the long CSV (relative tolerance).
inline bool aggregates_consistent(const std::vector<SweepAggregate>& stored, const std::vector<SweepAggregate>& recomputed,
                                  double rel_tol = 1e-12) {
    if (stored.size() != recomputed.size()) return false;
    auto close = [&](double a, double b) {
        if (std::isnan(a) || std::isnan(b)) return std::isnan(a) && std::isnan(b);
        return std::abs(a - b) <= rel_tol * std::max({1.0, std::abs(a), std::abs(b)});
    };
    for (std::size_t i = 0; i < stored.size(); ++i) {
        const auto &s = stored[i], &r = recomputed[i];
        if (s.alpha != r.alpha || s.beta != r.beta) return false;
        if (!close(s.mean_ng, r.mean_ng) || !close(s.std_ng, r.std_ng) || !close(s.mean_e, r.mean_e) ||
            !close(s.std_e, r.std_e))
            return false;
    }
    return true;
}

}  // namespace sonfis
