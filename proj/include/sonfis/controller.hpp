/**
 * @file controller.hpp
 * @brief The close-open feedback loop coupling the SOM granulation layer to
 * a TSK (SONFIS) or rough-set (SORST) second layer.
 *
 * Each step trains a fresh SOM with the current neuron budget, builds the
 * second layer from the SOM granules, measures its error E_t on the real
 * test data and updates the budget with
 *     N_{t+1} = alpha N_t + beta E_t + gamma.
 */

#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sonfis/common.hpp"
#include "sonfis/dataset.hpp"
#include "sonfis/nfis.hpp"
#include "sonfis/rst.hpp"
#include "sonfis/som.hpp"

namespace sonfis {

/**
 * Neuron budget of the feedback recurrence. The budget is carried as a real
 * number clamped to [n_min, n_max]; the grid size used at step t is its
 * half-up rounding.
 */
struct FeedbackState {
    std::size_t t = 0;
    double budget = 25.0;
    double error = 0.0;
    double alpha = 0.9;
    double beta = 0.001;
    double gamma = 0.5;
    std::size_t n_min = 2;
    std::size_t n_max = 150;

    void validate() const {
        if (n_min < 2) throw std::invalid_argument("N_min must be >= 2");
        if (n_max < n_min) throw std::invalid_argument("N_max must be >= N_min");
        if (!std::isfinite(alpha) || !std::isfinite(beta) || !std::isfinite(gamma))
            throw std::invalid_argument("feedback coefficients must be finite");
        if (!std::isfinite(budget)) throw std::invalid_argument("neuron budget must be finite");
    }
};

inline std::size_t round_half_up(double v) { return static_cast<std::size_t>(std::floor(v + 0.5)); }

inline std::size_t clamp_count(double v, std::size_t lo, std::size_t hi) {
    if (!(v >= static_cast<double>(lo))) return lo;
    if (v >= static_cast<double>(hi)) return hi;
    return std::clamp(round_half_up(v), lo, hi);
}

/// alpha N_t + beta E_t + gamma, unclamped.
inline double raw_next_budget(const FeedbackState& s) {
    if (!std::isfinite(s.error)) throw std::invalid_argument("next_neuron_count: non-finite error E_t");
    s.validate();
    return s.alpha * s.budget + s.beta * s.error + s.gamma;
}

/// Real-valued successor budget clamped to [n_min, n_max].
inline double next_budget(const FeedbackState& s) {
    return std::clamp(raw_next_budget(s), static_cast<double>(s.n_min), static_cast<double>(s.n_max));
}

/// clamp(round_half_up(alpha N_t + beta E_t + gamma), n_min, n_max)
inline std::size_t next_neuron_count(const FeedbackState& s) {
    return clamp_count(raw_next_budget(s), s.n_min, s.n_max);
}

struct GridShape {
    std::size_t n1 = 1;
    std::size_t n2 = 1;
    std::size_t neurons() const { return n1 * n2; }
    bool operator==(const GridShape&) const = default;
};

/// Factor pair of n with the smallest |n1 - n2|, n1 <= n2.
inline GridShape squarest_factors(std::size_t n) {
    auto n1 = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
    while (n1 * n1 > n) --n1;
    while ((n1 + 1) * (n1 + 1) <= n) ++n1;
    while (n % n1 != 0) --n1;
    return {n1, n / n1};
}

/**
 * Grid for a budget: tries N, N-1, N+1, N-2, N+2, ... inside [n_min, n_max]
 * and takes the first whose squarest factorization has aspect ratio <= 3.
 */
inline GridShape factor_grid(std::size_t n, std::size_t n_min = 2, std::size_t n_max = 150) {
    if (n == 0) throw std::invalid_argument("factor_grid: N must be >= 1");
    const std::size_t span = std::max(n, n_max) + 1;
    for (std::size_t off = 0; off <= span; ++off) {
        for (int sign : {-1, +1}) {
            if (off == 0 && sign > 0) continue;
            const long cand = static_cast<long>(n) + sign * static_cast<long>(off);
            if (cand < static_cast<long>(std::max<std::size_t>(n_min, 1)) || cand > static_cast<long>(n_max)) continue;
            const auto g = squarest_factors(static_cast<std::size_t>(cand));
            if (g.n2 <= 3 * g.n1) return g;
        }
    }
    return squarest_factors(n);
}

enum class Mode { Sonfis, Sorst };

inline std::string to_string(Mode m) { return m == Mode::Sonfis ? "sonfis" : "sorst"; }

struct RunConfig {
    Mode mode = Mode::Sonfis;
    std::size_t steps = 30;
    std::size_t n_rules = 2;   ///< SONFIS rule count (n.r)
    std::size_t classes = 3;   ///< SORST discretizer class count
    double alpha = 0.9;
    double beta = 0.001;
    double gamma = 0.5;
    double n0 = 25.0;
    std::size_t n_min = 2;
    std::size_t n_max = 150;
    SomTrainParams som;
    NfisTrainParams nfis;
    std::uint64_t seed = 1;

    static RunConfig sonfis_defaults() { return RunConfig{}; }
    static RunConfig sorst_defaults() {
        RunConfig c;
        c.mode = Mode::Sorst;
        c.steps = 9;
        c.alpha = 0.8;
        c.gamma = 1.0;
        return c;
    }

    void validate() const {
        if (steps < 1) throw std::invalid_argument("steps must be >= 1");
        if (n_rules < 1) throw std::invalid_argument("rules must be >= 1");
        if (classes < 1) throw std::invalid_argument("classes must be >= 1");
        if (!std::isfinite(n0) || n0 < static_cast<double>(n_min) || n0 > static_cast<double>(n_max))
            throw std::invalid_argument("n0 must lie in [nmin, nmax]");
        FeedbackState s;
        s.alpha = alpha;
        s.beta = beta;
        s.gamma = gamma;
        s.n_min = n_min;
        s.n_max = n_max;
        s.validate();
        som.validate();
        nfis.validate();
    }
};

struct StepRecord {
    std::size_t t = 0;
    double budget_real = 0.0;
    std::size_t budget = 0;    ///< integer neuron budget N_t
    std::size_t neurons = 0;   ///< n1 * n2 actually trained
    std::size_t n1 = 0, n2 = 0;
    double error = 0.0;        ///< E_t fed back into the recurrence
    std::size_t dead = 0;
    std::size_t rules = 0;     ///< TSK rules used, or induced rough-set rule count
    double train_error = 0.0;  ///< TSK training RMSE on the granules (SONFIS only)
    std::vector<std::string> flags;
};

struct RunTrace {
    Mode mode = Mode::Sonfis;
    std::vector<StepRecord> steps;
    std::optional<TskModel> final_model;
    std::optional<RuleSet> final_rules;
};

namespace detail {

inline std::vector<Vector> joint_vectors(const DataTable& t) { return t.rows(); }

struct Granulation {
    GridShape shape;
    SomCodebook codebook;
    std::size_t dead = 0;
};

inline Granulation granulate(const RunConfig& cfg, const std::vector<Vector>& joint, std::size_t budget,
                             std::size_t t) {
    Granulation g;
    g.shape = factor_grid(budget, cfg.n_min, cfg.n_max);
    const auto step_seed = mix_seed(cfg.seed, t);
    auto cb = init_grid(g.shape.n1, g.shape.n2, joint.front().size(), joint, mix_seed(step_seed, 1));
    SomTrainParams p = cfg.som;
    p.seed = mix_seed(step_seed, 2);
    g.codebook = train(std::move(cb), joint, p);
    g.dead = dead_neuron_count(g.codebook, joint);
    return g;
}

inline StepRecord begin_record(std::size_t t, double budget_real, std::size_t budget, const Granulation& g) {
    StepRecord r;
    r.t = t;
    r.budget_real = budget_real;
    r.budget = budget;
    r.n1 = g.shape.n1;
    r.n2 = g.shape.n2;
    r.neurons = g.shape.neurons();
    r.dead = g.dead;
    if (r.neurons != budget) r.flags.emplace_back("budget_adjusted");
    return r;
}

template <typename Layer>
RunTrace feedback_loop(const RunConfig& cfg, const std::vector<Vector>& joint, Layer&& layer) {
    RunTrace trace;
    trace.mode = cfg.mode;
    FeedbackState state;
    state.alpha = cfg.alpha;
    state.beta = cfg.beta;
    state.gamma = cfg.gamma;
    state.n_min = cfg.n_min;
    state.n_max = cfg.n_max;
    state.budget = cfg.n0;
    for (std::size_t t = 0; t < cfg.steps; ++t) {
        state.t = t;
        const std::size_t budget = clamp_count(state.budget, cfg.n_min, cfg.n_max);
        const auto g = granulate(cfg, joint, budget, t);
        StepRecord rec = begin_record(t, state.budget, budget, g);
        layer(g, rec, trace, t);
        state.error = rec.error;
        const double raw = raw_next_budget(state);
        if (raw < static_cast<double>(cfg.n_min) || raw > static_cast<double>(cfg.n_max))
            rec.flags.emplace_back("clamped");
        state.budget = next_budget(state);
        trace.steps.push_back(std::move(rec));
    }
    return trace;
}

}  // namespace detail

/**
 * SOM + TSK loop. Tables are raw; both are min/max scaled with the training
 * scaler, and E_t is the test RMSE in raw decision units.
 */
inline RunTrace run_sonfis(const RunConfig& cfg, const DataTable& train, const DataTable& test) {
    if (cfg.mode != Mode::Sonfis) throw std::invalid_argument("run_sonfis: config mode is not sonfis");
    cfg.validate();
    if (train.width() != test.width()) throw std::invalid_argument("run_sonfis: train/test width mismatch");
    const auto scaler = MinMaxScaler::fit(train);
    const auto ntrain = scaler.transform(train);
    const auto ntest = scaler.transform(test);
    const auto joint = detail::joint_vectors(ntrain);
    const std::size_t dcol = train.width() - 1;
    const Vector targets = test.column(dcol);
    const std::size_t params_per_rule = train.conditions() + 1;

    return detail::feedback_loop(cfg, joint, [&](const detail::Granulation& g, StepRecord& rec, RunTrace& trace,
                                                 std::size_t t) {
        const auto granules = codebook_granules(g.codebook, ntrain.names());
        std::size_t rules = cfg.n_rules;
        if (granules.size() < rules) {
            rules = granules.size();
            rec.flags.emplace_back("rules_reduced");
        }
        auto model = init_tsk(rules, granules, mix_seed(mix_seed(cfg.seed, t), 3));
        NfisTrainParams np = cfg.nfis;
        np.seed = mix_seed(mix_seed(cfg.seed, t), 4);
        auto [trained, hist] = train_hybrid(std::move(model), granules, np);
        if (granules.size() < rules * params_per_rule || hist.least_norm) rec.flags.emplace_back("least_norm");
        Vector pred = predict(trained, ntest);
        for (auto& p : pred) p = scaler.unscale(dcol, p);
        rec.error = rmse(pred, targets);
        rec.rules = rules;
        rec.train_error = hist.rmse_after_lse.empty() ? rmse(trained, granules) : hist.rmse_after_lse.back();
        if (rec.dead > 0) rec.flags.emplace_back("dead_neurons");
        trace.final_model = std::move(trained);
    });
}

/// Per-column 1-D SOM discretizers fitted on a (scaled) training table, decision last.
inline std::vector<Discretizer1D> fit_discretizers(const DataTable& table, std::size_t k, std::uint64_t seed) {
    std::vector<Discretizer1D> out;
    for (std::size_t j = 0; j < table.width(); ++j) out.push_back(fit_discretizer(table.column(j), k, mix_seed(seed, 1000 + j), j));
    return out;
}

/**
 * SOM + rough-set loop. Discretizers are fitted once on the scaled training
 * data; E_t is the class-label MSE on the discretized test data.
 */
inline RunTrace run_sorst(const RunConfig& cfg, const DataTable& train, const DataTable& test) {
    if (cfg.mode != Mode::Sorst) throw std::invalid_argument("run_sorst: config mode is not sorst");
    cfg.validate();
    if (train.width() != test.width()) throw std::invalid_argument("run_sorst: train/test width mismatch");
    const auto scaler = MinMaxScaler::fit(train);
    const auto ntrain = scaler.transform(train);
    const auto ntest = scaler.transform(test);
    const auto discretizers = fit_discretizers(ntrain, cfg.classes, cfg.seed);
    const auto test_system = build_information_system(ntest, discretizers);
    const auto joint = detail::joint_vectors(ntrain);

    return detail::feedback_loop(cfg, joint, [&](const detail::Granulation& g, StepRecord& rec, RunTrace& trace,
                                                 std::size_t) {
        const auto granules = codebook_granules(g.codebook, ntrain.names());
        const auto system = build_information_system(granules, discretizers);
        auto rules = induce_rules(system);
        rec.error = mse(rules, test_system);
        rec.rules = rules.rules.size();
        if (rec.dead > 0) rec.flags.emplace_back("dead_neurons");
        trace.final_rules = std::move(rules);
    });
}

inline RunTrace run(const RunConfig& cfg, const DataTable& train, const DataTable& test) {
    return cfg.mode == Mode::Sonfis ? run_sonfis(cfg, train, test) : run_sorst(cfg, train, test);
}

inline std::string join_flags(const std::vector<std::string>& flags) {
    std::string out;
    for (std::size_t i = 0; i < flags.size(); ++i) out += (i ? "|" : "") + flags[i];
    return out;
}

/// Columns: t,N_budget,N_actual,n1,n2,E,dead_neurons,flags
inline void write_trace(std::ostream& out, const RunTrace& trace) {
    out << "t,N_budget,N_actual,n1,n2,E,dead_neurons,flags\n";
    for (const auto& s : trace.steps)
        out << s.t << ',' << s.budget << ',' << s.neurons << ',' << s.n1 << ',' << s.n2 << ','
            << format_number(s.error) << ',' << s.dead << ',' << join_flags(s.flags) << '\n';
}

}  // namespace sonfis
