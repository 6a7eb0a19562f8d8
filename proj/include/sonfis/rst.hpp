/**
 * @file rst.hpp
 * @brief Rough-set layer: information systems, indiscernibility classes,
 * lower/upper approximations, discernibility matrix and function, exact
 * prime-implicant (reduct) computation, rule induction and classification.
 *
 * Attribute subsets are 64-bit masks, so an information system may carry
 * at most 64 condition attributes. Exact Boolean minimization is limited to
 * 20 attributes; greedy_implicant covers larger tables.
 */

#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sonfis/dataset.hpp"
#include "sonfis/som.hpp"

namespace sonfis {

using AttrSet = std::uint64_t;

inline constexpr std::size_t kMaxAttributes = 64;
inline constexpr std::size_t kExactImplicantLimit = 20;

inline AttrSet attr_bit(std::size_t a) { return AttrSet{1} << a; }
inline std::size_t attr_count(AttrSet s) { return static_cast<std::size_t>(std::popcount(s)); }

inline std::vector<std::size_t> attr_list(AttrSet s) {
    std::vector<std::size_t> out;
    while (s) {
        out.push_back(static_cast<std::size_t>(std::countr_zero(s)));
        s &= s - 1;
    }
    return out;
}

/// Symbolic decision table: n objects x m condition attributes plus a decision.
struct InformationSystem {
    std::size_t n_objects = 0;
    std::size_t n_attributes = 0;
    std::vector<int> values;     ///< row-major n_objects x n_attributes
    std::vector<int> decisions;  ///< n_objects
    std::vector<std::size_t> symbol_counts;  ///< per condition attribute
    std::size_t decision_classes = 0;
    std::vector<std::string> attribute_names;
    std::string decision_name = "d";

    int value(std::size_t object, std::size_t attribute) const { return values[object * n_attributes + attribute]; }
    std::span<const int> object(std::size_t i) const { return {values.data() + i * n_attributes, n_attributes}; }

    static InformationSystem from_symbols(const std::vector<std::vector<int>>& rows, const std::vector<int>& decisions,
                                          std::size_t symbols = 0, std::size_t decision_classes = 0) {
        if (rows.size() != decisions.size()) throw std::invalid_argument("from_symbols: row/decision count mismatch");
        InformationSystem s;
        s.n_objects = rows.size();
        s.n_attributes = rows.empty() ? 0 : rows.front().size();
        if (s.n_attributes > kMaxAttributes) throw std::invalid_argument("information system: more than 64 attributes");
        s.symbol_counts.assign(s.n_attributes, symbols);
        int max_d = -1;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != s.n_attributes) throw std::invalid_argument("from_symbols: ragged rows");
            for (std::size_t a = 0; a < s.n_attributes; ++a) {
                if (rows[i][a] < 0) throw std::invalid_argument("from_symbols: negative symbol");
                s.values.push_back(rows[i][a]);
                s.symbol_counts[a] = std::max(s.symbol_counts[a], static_cast<std::size_t>(rows[i][a]) + 1);
            }
            if (decisions[i] < 0) throw std::invalid_argument("from_symbols: negative decision");
            max_d = std::max(max_d, decisions[i]);
        }
        s.decisions = decisions;
        s.decision_classes = std::max(decision_classes, static_cast<std::size_t>(max_d + 1));
        for (std::size_t a = 0; a < s.n_attributes; ++a) s.attribute_names.push_back("a" + std::to_string(a + 1));
        return s;
    }
};

/// Replaces each numeric cell by its class label; one discretizer per column, decision last.
inline InformationSystem build_information_system(const DataTable& table, const std::vector<Discretizer1D>& discretizers) {
    if (discretizers.size() != table.width())
        throw std::invalid_argument("build_information_system: " + std::to_string(discretizers.size()) +
                                    " discretizers for " + std::to_string(table.width()) + " columns");
    InformationSystem s;
    s.n_objects = table.size();
    s.n_attributes = table.conditions();
    if (s.n_attributes > kMaxAttributes) throw std::invalid_argument("information system: more than 64 attributes");
    s.values.reserve(s.n_objects * s.n_attributes);
    for (std::size_t i = 0; i < table.size(); ++i) {
        const auto& row = table.row(i);
        for (std::size_t a = 0; a < s.n_attributes; ++a) s.values.push_back(discretizers[a].label(row[a]));
        s.decisions.push_back(discretizers.back().label(row.back()));
    }
    for (std::size_t a = 0; a < s.n_attributes; ++a) s.symbol_counts.push_back(discretizers[a].classes());
    s.decision_classes = discretizers.back().classes();
    s.attribute_names.assign(table.names().begin(), table.names().end() - 1);
    s.decision_name = table.names().back();
    return s;
}

using Partition = std::vector<std::vector<std::size_t>>;

/**
 * Equivalence classes of I_B: objects agreeing on every attribute in B.
 * Blocks are ordered by their smallest member. B = {} yields one block.
 */
inline Partition indiscernibility(const InformationSystem& s, std::span<const std::size_t> attributes) {
    for (auto a : attributes)
        if (a >= s.n_attributes) throw std::out_of_range("indiscernibility: unknown attribute " + std::to_string(a));
    std::map<std::vector<int>, std::size_t> block_of;
    Partition blocks;
    std::vector<int> key(attributes.size());
    for (std::size_t i = 0; i < s.n_objects; ++i) {
        for (std::size_t j = 0; j < attributes.size(); ++j) key[j] = s.value(i, attributes[j]);
        auto [it, inserted] = block_of.emplace(key, blocks.size());
        if (inserted) blocks.emplace_back();
        blocks[it->second].push_back(i);
    }
    return blocks;
}

inline Partition indiscernibility(const InformationSystem& s, AttrSet attributes) {
    const auto list = attr_list(attributes);
    return indiscernibility(s, std::span<const std::size_t>(list));
}

struct Approximation {
    std::vector<std::size_t> lower;
    std::vector<std::size_t> upper;
};

/// B-lower and B-upper approximations of the concept X (object indices).
inline Approximation lower_upper(const InformationSystem& s, std::span<const std::size_t> attributes,
                                 const std::vector<std::size_t>& target) {
    std::vector<bool> in_x(s.n_objects, false);
    for (auto x : target) {
        if (x >= s.n_objects) throw std::out_of_range("lower_upper: concept object out of range");
        in_x[x] = true;
    }
    Approximation out;
    for (const auto& block : indiscernibility(s, attributes)) {
        std::size_t inside = 0;
        for (auto o : block) inside += in_x[o] ? 1 : 0;
        if (inside == block.size()) out.lower.insert(out.lower.end(), block.begin(), block.end());
        if (inside > 0) out.upper.insert(out.upper.end(), block.begin(), block.end());
    }
    std::sort(out.lower.begin(), out.lower.end());
    std::sort(out.upper.begin(), out.upper.end());
    return out;
}

class DiscernibilityMatrix {
public:
    explicit DiscernibilityMatrix(std::size_t n = 0) : n_(n), entries_(n * n, 0) {}
    std::size_t size() const { return n_; }
    AttrSet at(std::size_t i, std::size_t j) const { return entries_[i * n_ + j]; }
    void set(std::size_t i, std::size_t j, AttrSet v) {
        entries_[i * n_ + j] = v;
        entries_[j * n_ + i] = v;
    }

private:
    std::size_t n_;
    std::vector<AttrSet> entries_;
};

/// Attributes on which objects i and j differ.
inline AttrSet discerning_attributes(const InformationSystem& s, std::size_t i, std::size_t j) {
    AttrSet c = 0;
    for (std::size_t a = 0; a < s.n_attributes; ++a)
        if (s.value(i, a) != s.value(j, a)) c |= attr_bit(a);
    return c;
}

/**
 * Plain mode: c_ij = {a : a(x_i) != a(x_j)}. Decision-relative mode keeps
 * c_ij only for pairs with different decisions.
 */
inline DiscernibilityMatrix discernibility_matrix(const InformationSystem& s, bool decision_relative) {
    DiscernibilityMatrix m(s.n_objects);
    for (std::size_t i = 0; i < s.n_objects; ++i)
        for (std::size_t j = 0; j < i; ++j) {
            if (decision_relative && s.decisions[i] == s.decisions[j]) continue;
            m.set(i, j, discerning_attributes(s, i, j));
        }
    return m;
}

/// Conjunction of disjunctive clauses; an empty clause list is constant true.
struct Cnf {
    std::size_t n_attributes = 0;
    std::vector<AttrSet> clauses;

    bool evaluate(AttrSet assignment) const {
        return std::all_of(clauses.begin(), clauses.end(), [&](AttrSet c) { return (c & assignment) != 0; });
    }
};

namespace detail {

/// Drops duplicates and every set that contains another member; sorts by (size, value).
inline std::vector<AttrSet> absorb(std::vector<AttrSet> sets) {
    std::sort(sets.begin(), sets.end(), [](AttrSet a, AttrSet b) {
        const auto ca = attr_count(a), cb = attr_count(b);
        return ca != cb ? ca < cb : a < b;
    });
    sets.erase(std::unique(sets.begin(), sets.end()), sets.end());
    std::vector<AttrSet> kept;
    for (auto s : sets)
        if (std::none_of(kept.begin(), kept.end(), [&](AttrSet k) { return (k & s) == k; })) kept.push_back(s);
    return kept;
}

inline bool lex_less(AttrSet a, AttrSet b) {
    const auto la = attr_list(a), lb = attr_list(b);
    return std::lexicographical_compare(la.begin(), la.end(), lb.begin(), lb.end());
}

}  // namespace detail

/// Clauses built from the nonempty lower-triangle entries; duplicates removed, supersets absorbed.
inline Cnf discernibility_function(const DiscernibilityMatrix& m, std::size_t n_attributes) {
    Cnf f;
    f.n_attributes = n_attributes;
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (m.at(i, j) != 0) f.clauses.push_back(m.at(i, j));
    f.clauses = detail::absorb(std::move(f.clauses));
    return f;
}

/**
 * Exact CNF -> DNF expansion with absorption. Each returned set is a
 * minimal hitting set of the clauses; sorted by size then lexicographically
 * by attribute index. The empty CNF yields the single empty implicant.
 */
inline std::vector<AttrSet> prime_implicants(const Cnf& cnf) {
    if (cnf.n_attributes > kExactImplicantLimit)
        throw std::invalid_argument("prime_implicants: " + std::to_string(cnf.n_attributes) +
                                    " attributes exceed the exact limit of " + std::to_string(kExactImplicantLimit) +
                                    "; use greedy_implicant instead");
    std::vector<AttrSet> dnf{0};
    for (AttrSet clause : detail::absorb(cnf.clauses)) {
        std::vector<AttrSet> next;
        for (AttrSet term : dnf) {
            if (term & clause) {
                next.push_back(term);
                continue;
            }
            for (auto a : attr_list(clause)) next.push_back(term | attr_bit(a));
        }
        dnf = detail::absorb(std::move(next));
    }
    std::sort(dnf.begin(), dnf.end(), [](AttrSet a, AttrSet b) {
        const auto ca = attr_count(a), cb = attr_count(b);
        return ca != cb ? ca < cb : detail::lex_less(a, b);
    });
    return dnf;
}

/// One minimal hitting set by greedy set cover followed by redundancy pruning.
inline AttrSet greedy_implicant(const Cnf& cnf) {
    std::vector<AttrSet> open = detail::absorb(cnf.clauses);
    AttrSet chosen = 0;
    while (!open.empty()) {
        std::size_t best = 0, best_hits = 0;
        for (std::size_t a = 0; a < kMaxAttributes; ++a) {
            std::size_t hits = 0;
            for (auto c : open) hits += (c & attr_bit(a)) ? 1 : 0;
            if (hits > best_hits) {
                best_hits = hits;
                best = a;
            }
        }
        if (best_hits == 0) throw std::invalid_argument("greedy_implicant: empty clause is unsatisfiable");
        chosen |= attr_bit(best);
        std::erase_if(open, [&](AttrSet c) { return (c & chosen) != 0; });
    }
    for (auto a : attr_list(chosen)) {
        const AttrSet trial = chosen & ~attr_bit(a);
        if (cnf.evaluate(trial)) chosen = trial;
    }
    return chosen;
}

struct Descriptor {
    std::size_t attribute;
    int symbol;
    auto operator<=>(const Descriptor&) const = default;
};

struct Rule {
    std::vector<Descriptor> descriptors;  ///< sorted by attribute
    int decision = 0;
    std::size_t support = 0;

    bool matches(std::span<const int> object) const {
        return std::all_of(descriptors.begin(), descriptors.end(),
                           [&](const Descriptor& d) { return object[d.attribute] == d.symbol; });
    }
    std::size_t distance(std::span<const int> object) const {
        std::size_t n = 0;
        for (const auto& d : descriptors) n += object[d.attribute] != d.symbol ? 1 : 0;
        return n;
    }
};

struct RuleSet {
    std::vector<Rule> rules;
    std::size_t n_attributes = 0;
    std::size_t decision_classes = 0;
    std::vector<std::string> attribute_names;
    std::string decision_name = "d";
    std::vector<std::size_t> symbol_counts;
    bool greedy = false;  ///< induced with greedy_implicant instead of exact expansion
};

/**
 * Object-local reducts: for each object, the decision-relative clauses
 * against objects of other decisions form a CNF whose prime implicants,
 * instantiated with the object's own values, become rules. Identical rules
 * are merged and their support (number of generating objects) summed.
 */
inline RuleSet induce_rules(const InformationSystem& s) {
    if (s.n_objects == 0) throw std::invalid_argument("induce_rules: empty information system");
    RuleSet out;
    out.n_attributes = s.n_attributes;
    out.decision_classes = s.decision_classes;
    out.attribute_names = s.attribute_names;
    out.decision_name = s.decision_name;
    out.symbol_counts = s.symbol_counts;
    out.greedy = s.n_attributes > kExactImplicantLimit;

    std::map<std::pair<std::vector<Descriptor>, int>, std::size_t> index;
    for (std::size_t i = 0; i < s.n_objects; ++i) {
        Cnf local;
        local.n_attributes = s.n_attributes;
        for (std::size_t j = 0; j < s.n_objects; ++j) {
            if (s.decisions[i] == s.decisions[j]) continue;
            const AttrSet c = discerning_attributes(s, i, j);
            if (c) local.clauses.push_back(c);
        }
        const std::vector<AttrSet> implicants =
            out.greedy ? std::vector<AttrSet>{greedy_implicant(local)} : prime_implicants(local);
        for (AttrSet imp : implicants) {
            std::vector<Descriptor> desc;
            for (auto a : attr_list(imp)) desc.push_back({a, s.value(i, a)});
            auto key = std::make_pair(desc, s.decisions[i]);
            auto it = index.find(key);
            if (it == index.end()) {
                index.emplace(std::move(key), out.rules.size());
                out.rules.push_back({std::move(desc), s.decisions[i], 1});
            } else {
                ++out.rules[it->second].support;
            }
        }
    }
    return out;
}

/**
 * Decision for a symbolic object. Conflicting matches resolve to the
 * highest decision symbol. With no match, the rules at minimum descriptor
 * Hamming distance are used under the same policy.
 */
inline int classify(const RuleSet& rules, std::span<const int> object) {
    if (rules.rules.empty()) throw std::invalid_argument("classify: empty rule set");
    if (object.size() != rules.n_attributes) throw std::invalid_argument("classify: object arity mismatch");
    int best = -1;
    for (const auto& r : rules.rules)
        if (r.matches(object)) best = std::max(best, r.decision);
    if (best >= 0) return best;
    std::size_t min_dist = SIZE_MAX;
    for (const auto& r : rules.rules) {
        const auto d = r.distance(object);
        if (d < min_dist) {
            min_dist = d;
            best = r.decision;
        } else if (d == min_dist) {
            best = std::max(best, r.decision);
        }
    }
    return best;
}

/// sum (d_real - d_classified)^2 / m over integer class labels.
inline double mse(const std::vector<int>& real, const std::vector<int>& classified) {
    if (real.empty()) throw std::invalid_argument("mse: empty test set");
    if (real.size() != classified.size()) throw std::invalid_argument("mse: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < real.size(); ++i) {
        const double d = static_cast<double>(real[i]) - static_cast<double>(classified[i]);
        s += d * d;
    }
    return s / static_cast<double>(real.size());
}

inline double mse(const RuleSet& rules, const InformationSystem& test) {
    if (test.n_objects == 0) throw std::invalid_argument("mse: empty test set");
    std::vector<int> classified;
    classified.reserve(test.n_objects);
    for (std::size_t i = 0; i < test.n_objects; ++i) classified.push_back(classify(rules, test.object(i)));
    return mse(test.decisions, classified);
}

inline std::string symbol_name(int symbol, std::size_t classes) {
    if (classes == 3) {
        static const char* names[] = {"low", "middle", "high"};
        return names[symbol];
    }
    if (classes == 2) return symbol == 0 ? "low" : "high";
    return "c" + std::to_string(symbol);
}

/// "x1=low AND x3=high => lugeon=middle (support=7)"
inline std::string rule_text(const RuleSet& rs, const Rule& r) {
    std::string out;
    for (std::size_t i = 0; i < r.descriptors.size(); ++i) {
        const auto& d = r.descriptors[i];
        if (i) out += " AND ";
        out += rs.attribute_names[d.attribute] + "=" + symbol_name(d.symbol, rs.symbol_counts[d.attribute]);
    }
    if (r.descriptors.empty()) out = "TRUE";
    out += " => " + rs.decision_name + "=" + symbol_name(r.decision, rs.decision_classes);
    out += " (support=" + std::to_string(r.support) + ")";
    return out;
}

inline void write_rules_text(std::ostream& out, const RuleSet& rs) {
    for (const auto& r : rs.rules) out << rule_text(rs, r) << '\n';
}

/// One column per condition attribute (symbol index, empty if unused), then decision and support.
inline void write_rules_csv(std::ostream& out, const RuleSet& rs) {
    for (const auto& name : rs.attribute_names) out << name << ',';
    out << rs.decision_name << ",support\n";
    for (const auto& r : rs.rules) {
        std::vector<std::string> cells(rs.n_attributes);
        for (const auto& d : r.descriptors) cells[d.attribute] = std::to_string(d.symbol);
        for (const auto& c : cells) out << c << ',';
        out << r.decision << ',' << r.support << '\n';
    }
}

}  // namespace sonfis
