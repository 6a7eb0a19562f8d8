// Command-line driver: synthetic data, single SONFIS/SORST runs, sweeps,
// rule inspection and SVG charts.
//
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sonfis/sonfis.hpp"

namespace {

struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct DataOptions {
    std::string input;
    std::string decision = "lugeon";
    std::size_t rows = 693;
    std::size_t arity = 3;
    double noise = 0.05;
    std::uint64_t data_seed = 1;
    std::size_t n_train = 600;
    std::size_t n_test = 93;
    std::optional<std::uint64_t> split_seed;

    void add(CLI::App& app) {
        app.add_option("--input", input, "CSV table (header row); synthetic surrogate when omitted");
        app.add_option("--decision", decision, "Decision column name")->capture_default_str();
        app.add_option("--rows", rows, "Synthetic row count")->capture_default_str();
        app.add_option("--arity", arity, "Synthetic condition attribute count")->capture_default_str();
        app.add_option("--noise", noise, "Synthetic decision noise sd")->capture_default_str();
        app.add_option("--data-seed", data_seed, "Synthetic data seed")->capture_default_str();
        app.add_option("--n-train", n_train, "Training rows")->capture_default_str();
        app.add_option("--n-test", n_test, "Test rows")->capture_default_str();
        app.add_option("--split-seed", split_seed, "Shuffle before splitting with this seed");
    }

    sonfis::DataTable table() const {
        if (!input.empty()) return sonfis::load_table(input, decision);
        if (rows < 1 || arity < 1) throw UsageError("--rows and --arity must be >= 1");
        if (!(noise >= 0.0)) throw UsageError("--noise must be >= 0");
        return sonfis::gen_synthetic(rows, arity, noise, data_seed);
    }

    std::pair<sonfis::DataTable, sonfis::DataTable> split() const {
        const auto t = table();
        if (n_train < 1 || n_test < 1) throw UsageError("--n-train and --n-test must be >= 1");
        if (n_train + n_test > t.size())
            throw sonfis::DataError("--n-train + --n-test = " + std::to_string(n_train + n_test) +
                                    " exceeds the " + std::to_string(t.size()) + " available rows");
        return sonfis::split(t, {n_train, n_test, split_seed});
    }
};

struct ModelOptions {
    std::string mode = "sonfis";
    std::optional<double> alpha, beta, gamma;
    std::optional<long long> steps;
    long long rules = 2;
    long long classes = 3;
    double n0 = 25;
    long long nmin = 2;
    long long nmax = 150;
    std::uint64_t seed = 1;
    long long som_epochs = 40;
    double som_lr0 = 0.5, som_lr_end = 0.01, som_sigma0 = -1.0, som_sigma_end = 0.5;
    long long nfis_epochs = 50;
    double nfis_lr = 0.05;
    double firing_floor = 1e-12;

    void add(CLI::App& app) {
        app.add_option("--mode", mode, "sonfis | sorst")->capture_default_str();
        app.add_option("--alpha", alpha, "Recurrence coefficient on N_t (default 0.9 sonfis, 0.8 sorst)");
        app.add_option("--beta", beta, "Recurrence coefficient on E_t (default 0.001)");
        app.add_option("--gamma", gamma, "Recurrence constant (default 0.5 sonfis, 1 sorst)");
        app.add_option("--steps", steps, "Close-open iterations (default 30 sonfis, 9 sorst)");
        app.add_option("--rules", rules, "TSK rule count (sonfis)")->capture_default_str();
        app.add_option("--classes", classes, "Discretizer classes (sorst)")->capture_default_str();
        app.add_option("--n0", n0, "Initial neuron budget")->capture_default_str();
        app.add_option("--nmin", nmin, "Minimum neuron budget")->capture_default_str();
        app.add_option("--nmax", nmax, "Maximum neuron budget")->capture_default_str();
        app.add_option("--seed", seed, "Master seed")->capture_default_str();
        app.add_option("--som-epochs", som_epochs)->capture_default_str();
        app.add_option("--som-lr0", som_lr0)->capture_default_str();
        app.add_option("--som-lr-end", som_lr_end)->capture_default_str();
        app.add_option("--som-sigma0", som_sigma0, "<= 0 selects max(n1,n2)/2")->capture_default_str();
        app.add_option("--som-sigma-end", som_sigma_end)->capture_default_str();
        app.add_option("--nfis-epochs", nfis_epochs)->capture_default_str();
        app.add_option("--nfis-lr", nfis_lr)->capture_default_str();
        app.add_option("--firing-floor", firing_floor)->capture_default_str();
    }

    sonfis::RunConfig config() const {
        sonfis::RunConfig c;
        if (mode == "sonfis")
            c = sonfis::RunConfig::sonfis_defaults();
        else if (mode == "sorst")
            c = sonfis::RunConfig::sorst_defaults();
        else
            throw UsageError("--mode must be 'sonfis' or 'sorst', got '" + mode + "'");
        if (alpha) c.alpha = *alpha;
        if (beta) c.beta = *beta;
        if (gamma) c.gamma = *gamma;
        if (steps) {
            if (*steps < 1) throw UsageError("--steps must be >= 1");
            c.steps = static_cast<std::size_t>(*steps);
        }
        if (rules < 1) throw UsageError("--rules must be >= 1");
        if (classes < 1) throw UsageError("--classes must be >= 1");
        if (nmin < 2) throw UsageError("--nmin must be >= 2");
        if (nmax < nmin) throw UsageError("--nmax must be >= --nmin");
        if (som_epochs < 1) throw UsageError("--som-epochs must be >= 1");
        if (nfis_epochs < 0) throw UsageError("--nfis-epochs must be >= 0");
        c.n_rules = static_cast<std::size_t>(rules);
        c.classes = static_cast<std::size_t>(classes);
        c.n0 = n0;
        c.n_min = static_cast<std::size_t>(nmin);
        c.n_max = static_cast<std::size_t>(nmax);
        c.seed = seed;
        c.som.epochs = static_cast<std::size_t>(som_epochs);
        c.som.lr0 = som_lr0;
        c.som.lr_end = som_lr_end;
        c.som.sigma0 = som_sigma0;
        c.som.sigma_end = som_sigma_end;
        c.nfis.epochs = static_cast<std::size_t>(nfis_epochs);
        c.nfis.premise_lr = nfis_lr;
        c.nfis.firing_floor = firing_floor;
        try {
            c.validate();
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
        return c;
    }
};

/// "start:stop:step" (inclusive) or a comma list.
std::vector<double> parse_axis(const std::string& text, const std::string& flag) {
    std::vector<double> out;
    if (text.empty()) return out;
    if (text.find(':') != std::string::npos) {
        const auto parts = sonfis::split_fields(text, ':');
        double a, b, s;
        if (parts.size() != 3 || !sonfis::parse_finite(parts[0], a) || !sonfis::parse_finite(parts[1], b) ||
            !sonfis::parse_finite(parts[2], s) || !(s > 0) || b < a)
            throw UsageError(flag + ": expected start:stop:step with step > 0 and stop >= start, got '" + text + "'");
        const auto n = static_cast<std::size_t>(std::floor((b - a) / s + 1e-9));
        for (std::size_t i = 0; i <= n; ++i) out.push_back(std::round((a + s * static_cast<double>(i)) * 1e10) / 1e10);
        return out;
    }
    for (const auto& f : sonfis::split_fields(text, ',')) {
        double v;
        if (!sonfis::parse_finite(f, v)) throw UsageError(flag + ": cannot parse value '" + f + "'");
        out.push_back(v);
    }
    return out;
}

void write_to(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw sonfis::DataError("cannot write file '" + path + "'");
    out << content;
}

// --config is consumed by expand_config before parsing; it is declared here for --help only.
void add_config(CLI::App& app) {
    static std::string unused;
    app.add_option("--config", unused, "Flat 'key = value' file; keys mirror the long flag names");
}

/**
 * Replaces "--config FILE" with one --key=value token per file entry,
 * placed right after the subcommand name so explicit flags come later and
 * win. Returns the arguments in the reversed order CLI11 expects.
 */
std::vector<std::string> expand_config(int argc, char** argv) {
    std::vector<std::string> args;
    std::optional<std::string> path;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--config") {
            if (i + 1 >= argc) throw UsageError("--config needs a file path");
            path = argv[++i];
        } else if (a.rfind("--config=", 0) == 0) {
            path = a.substr(9);
        } else {
            args.push_back(a);
        }
    }
    if (path) {
        std::ifstream in(*path);
        if (!in) throw sonfis::DataError("cannot open config file '" + *path + "'");
        std::vector<std::string> injected;
        for (const auto& item : CLI::ConfigINI().from_config(in)) {
            if (!item.parents.empty() && !(item.parents.size() == 1 && item.parents[0] == "default"))
                throw UsageError("config file '" + *path + "': sections are not supported ('" + item.fullname() + "')");
            if (item.name == "config") throw UsageError("config file '" + *path + "': nested 'config' key");
            for (const auto& v : item.inputs) injected.push_back("--" + item.name + "=" + v);
            if (item.inputs.empty()) injected.push_back("--" + item.name);
        }
        auto at = std::find_if(args.begin(), args.end(), [](const std::string& a) { return a.rfind("-", 0) != 0; });
        if (at != args.end()) ++at;
        args.insert(at, injected.begin(), injected.end());
    }
    std::reverse(args.begin(), args.end());
    return args;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SOM-coupled neuro-fuzzy / rough-set granulation with neuron-growth feedback"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "Write the synthetic surrogate table as CSV");
    add_config(*gen);
    std::size_t gen_rows = 693, gen_arity = 3;
    double gen_noise = 0.05;
    std::uint64_t gen_seed = 1;
    std::string gen_out;
    gen->add_option("--rows", gen_rows)->capture_default_str();
    gen->add_option("--arity", gen_arity)->capture_default_str();
    gen->add_option("--noise", gen_noise)->capture_default_str();
    gen->add_option("--seed", gen_seed)->capture_default_str();
    gen->add_option("--out", gen_out, "Output path (stdout when omitted)");

    // run
    auto* run = app.add_subcommand("run", "One SONFIS or SORST feedback run -> trace CSV");
    add_config(*run);
    DataOptions run_data;
    ModelOptions run_model;
    std::string run_out, run_dump;
    run_data.add(*run);
    run_model.add(*run);
    run->add_option("--out", run_out, "Trace CSV path (stdout when omitted)");
    run->add_option("--dump", run_dump, "Write the final TSK model / rule set here");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "alpha / beta sweep -> long + aggregate CSVs");
    add_config(*sweep);
    DataOptions sweep_data;
    ModelOptions sweep_model;
    std::string alpha_axis, beta_axis, out_long = "sweep_long.csv", out_agg = "sweep_aggregate.csv";
    long long seeds = 5, workers = 0;
    std::optional<long long> burn_in;
    double threshold = 2.0;
    sweep_data.add(*sweep);
    sweep_model.add(*sweep);
    sweep->remove_option(sweep->get_option("--alpha"));
    sweep->remove_option(sweep->get_option("--beta"));
    sweep->add_option("--alpha", alpha_axis, "start:stop:step or comma list");
    sweep->add_option("--beta", beta_axis, "start:stop:step or comma list");
    sweep->add_option("--seeds", seeds, "Seeds per sweep point")->capture_default_str();
    sweep->add_option("--burn-in", burn_in, "Discarded leading steps (default steps/3)");
    sweep->add_option("--workers", workers, "Parallel runs (0 = hardware concurrency)")->capture_default_str();
    sweep->add_option("--threshold", threshold, "Disorder ratio for the transition readout")->capture_default_str();
    sweep->add_option("--out-long", out_long)->capture_default_str();
    sweep->add_option("--out-agg", out_agg)->capture_default_str();

    // rules
    auto* rules = app.add_subcommand("rules", "Discretize a table and print its induced rough-set rules");
    add_config(*rules);
    DataOptions rules_data;
    long long rules_classes = 3;
    std::uint64_t rules_seed = 1;
    bool rules_csv = false;
    rules->add_option("--input", rules_data.input, "CSV table; synthetic surrogate when omitted");
    rules->add_option("--decision", rules_data.decision)->capture_default_str();
    rules->add_option("--rows", rules_data.rows)->capture_default_str();
    rules->add_option("--arity", rules_data.arity)->capture_default_str();
    rules->add_option("--noise", rules_data.noise)->capture_default_str();
    rules->add_option("--data-seed", rules_data.data_seed)->capture_default_str();
    rules->add_option("--classes", rules_classes)->capture_default_str();
    rules->add_option("--seed", rules_seed)->capture_default_str();
    rules->add_flag("--csv", rules_csv, "CSV instead of text");

    // chart
    auto* chart = app.add_subcommand("chart", "Aggregate CSV -> static SVG chart");
    add_config(*chart);
    std::string chart_in, chart_out, chart_axis = "alpha", chart_title = "sweep summary";
    chart->add_option("--input", chart_in, "Aggregate CSV from 'sweep'")->required();
    chart->add_option("--out", chart_out, "SVG path (stdout when omitted)");
    chart->add_option("--axis", chart_axis, "alpha | beta")->capture_default_str();
    chart->add_option("--title", chart_title)->capture_default_str();

    std::vector<std::string> args;
    try {
        args = expand_config(argc, argv);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }

    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*gen) {
            if (gen_rows < 1 || gen_arity < 1) throw UsageError("--rows and --arity must be >= 1");
            if (!(gen_noise >= 0.0)) throw UsageError("--noise must be >= 0");
            std::ostringstream os;
            sonfis::write_table(os, sonfis::gen_synthetic(gen_rows, gen_arity, gen_noise, gen_seed));
            write_to(gen_out, os.str());
        } else if (*run) {
            const auto cfg = run_model.config();
            const auto [train, test] = run_data.split();
            const auto trace = sonfis::run(cfg, train, test);
            std::ostringstream os;
            sonfis::write_trace(os, trace);
            write_to(run_out, os.str());
            if (!run_dump.empty()) {
                std::ostringstream dump;
                if (trace.final_model) sonfis::write_model(dump, *trace.final_model);
                if (trace.final_rules) sonfis::write_rules_text(dump, *trace.final_rules);
                write_to(run_dump, dump.str());
            }
        } else if (*sweep) {
            sonfis::SweepSpec spec;
            spec.base = sweep_model.config();
            spec.alphas = parse_axis(alpha_axis, "--alpha");
            spec.betas = parse_axis(beta_axis, "--beta");
            if (spec.alphas.empty() && spec.betas.empty()) throw UsageError("sweep needs --alpha and/or --beta values");
            if (seeds < 1) throw UsageError("--seeds must be >= 1");
            if (workers < 0) throw UsageError("--workers must be >= 0");
            if (!(threshold > 1.0)) throw UsageError("--threshold must exceed 1");
            spec.seeds = static_cast<std::size_t>(seeds);
            if (burn_in) {
                if (*burn_in < 0) throw UsageError("--burn-in must be >= 0");
                spec.burn_in = static_cast<std::size_t>(*burn_in);
            }
            try {
                spec.validate();
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
            const auto [train, test] = sweep_data.split();
            const auto result = sonfis::run_sweep(spec, train, test, static_cast<std::size_t>(workers));
            for (const auto& c : result.cells)
                if (!c.error.empty())
                    std::cerr << "cell alpha=" << c.alpha << " beta=" << c.beta << " seed=" << c.seed
                              << " failed: " << c.error << '\n';
            std::ostringstream lo, ag;
            sonfis::write_sweep_long(lo, result);
            sonfis::write_sweep_aggregate(ag, result.aggregates);
            write_to(out_long, lo.str());
            write_to(out_agg, ag.str());

            std::cout << "alpha,beta,mean_NG,std_NG(disorder),mean_E,std_E\n";
            for (const auto& a : result.aggregates)
                std::cout << sonfis::format_number(a.alpha) << ',' << sonfis::format_number(a.beta) << ','
                          << sonfis::format_number(a.mean_ng) << ',' << sonfis::format_number(a.std_ng) << ','
                          << sonfis::format_number(a.mean_e) << ',' << sonfis::format_number(a.std_e) << '\n';
            if (result.alphas.size() == 1 || result.betas.size() == 1) {
                const auto iv = sonfis::detect_transition(result, threshold);
                std::cout << "transition readout (heuristic, disorder ratio >= " << threshold << "): ";
                if (iv)
                    std::cout << '[' << iv->lo << ", " << iv->hi << "]\n";
                else
                    std::cout << "none\n";
            }
        } else if (*rules) {
            if (rules_classes < 1) throw UsageError("--classes must be >= 1");
            const auto table = rules_data.table();
            const auto scaled = sonfis::MinMaxScaler::fit(table).transform(table);
            const auto disc = sonfis::fit_discretizers(scaled, static_cast<std::size_t>(rules_classes), rules_seed);
            const auto rs = sonfis::induce_rules(sonfis::build_information_system(scaled, disc));
            if (rules_csv)
                sonfis::write_rules_csv(std::cout, rs);
            else
                sonfis::write_rules_text(std::cout, rs);
        } else if (*chart) {
            if (chart_axis != "alpha" && chart_axis != "beta")
                throw UsageError("--axis must be 'alpha' or 'beta', got '" + chart_axis + "'");
            std::ifstream in(chart_in);
            if (!in) throw sonfis::DataError("cannot open file '" + chart_in + "'");
            const auto agg = sonfis::read_sweep_aggregate(in);
            if (agg.empty()) throw sonfis::DataError(chart_in + ": no aggregate rows");
            write_to(chart_out, sonfis::render_chart(agg, chart_axis == "alpha" ? sonfis::Axis::Alpha : sonfis::Axis::Beta,
                                                     chart_title));
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
