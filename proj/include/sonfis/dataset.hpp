/**
 * @file dataset.hpp
 * @brief Numeric decision tables: CSV ingestion, train/test split,
 * min/max scaling and the synthetic surrogate generator.
 *
 * A DataTable stores c condition attributes followed by exactly one
 * decision attribute; the decision is always the last column.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sonfis/common.hpp"

namespace sonfis {

class DataTable {
public:
    DataTable() = default;

    /// Rows must each hold names.size() finite values; names.size() >= 2.
    DataTable(std::vector<std::string> names, std::vector<Vector> rows)
        : names_(std::move(names)), rows_(std::move(rows)) {
        validate();
    }

    std::size_t conditions() const { return names_.empty() ? 0 : names_.size() - 1; }
    std::size_t width() const { return names_.size(); }
    std::size_t size() const { return rows_.size(); }
    bool empty() const { return rows_.empty(); }

    const std::vector<std::string>& names() const { return names_; }
    const std::vector<Vector>& rows() const { return rows_; }
    const Vector& row(std::size_t i) const { return rows_.at(i); }
    double decision(std::size_t i) const { return rows_.at(i).back(); }

    /// Condition part of row i.
    Vector condition(std::size_t i) const {
        const auto& r = rows_.at(i);
        return Vector(r.begin(), r.end() - 1);
    }

    Vector column(std::size_t j) const {
        Vector out;
        out.reserve(rows_.size());
        for (const auto& r : rows_) out.push_back(r.at(j));
        return out;
    }

    DataTable subset(const std::vector<std::size_t>& indices) const {
        std::vector<Vector> picked;
        picked.reserve(indices.size());
        for (auto i : indices) picked.push_back(rows_.at(i));
        return DataTable(names_, std::move(picked));
    }

private:
    void validate() const {
        if (names_.size() < 2)
            throw std::invalid_argument("DataTable needs at least one condition and one decision column");
        if (rows_.empty()) throw DataError("DataTable has no data rows");
        for (std::size_t i = 0; i < rows_.size(); ++i) {
            if (rows_[i].size() != names_.size())
                throw DataError("row " + std::to_string(i) + " has " + std::to_string(rows_[i].size()) +
                                " values, expected " + std::to_string(names_.size()));
            for (std::size_t j = 0; j < rows_[i].size(); ++j)
                if (!std::isfinite(rows_[i][j]))
                    throw DataError("non-finite value at row " + std::to_string(i) + ", column " +
                                    std::to_string(j));
        }
    }

    std::vector<std::string> names_;
    std::vector<Vector> rows_;
};

struct SplitSpec {
    std::size_t n_train = 600;
    std::size_t n_test = 93;
    std::optional<std::uint64_t> shuffle_seed;
};

/// Parse CSV text; the decision column is moved to the last position.
inline DataTable parse_table(std::istream& in, const std::string& decision_column,
                             const std::string& source = "<input>") {
    std::string line;
    if (!std::getline(in, line)) throw DataError(source + ": empty file (no header row)");
    auto header = split_fields(line);
    std::size_t decision_index = header.size();
    for (std::size_t j = 0; j < header.size(); ++j)
        if (header[j] == decision_column) decision_index = j;
    if (decision_index == header.size())
        throw DataError(source + ": decision column '" + decision_column + "' not found in header");
    if (header.size() < 2) throw DataError(source + ": need at least two columns");

    std::vector<std::string> names;
    for (std::size_t j = 0; j < header.size(); ++j)
        if (j != decision_index) names.push_back(header[j]);
    names.push_back(header[decision_index]);

    std::vector<Vector> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto fields = split_fields(line);
        const std::size_t row_index = rows.size();
        if (fields.size() != header.size())
            throw DataError(source + ": data row " + std::to_string(row_index) + " (line " +
                            std::to_string(line_no) + ") has " + std::to_string(fields.size()) +
                            " cells, expected " + std::to_string(header.size()));
        Vector row;
        row.reserve(header.size());
        double decision = 0.0;
        for (std::size_t j = 0; j < fields.size(); ++j) {
            double v;
            if (!parse_finite(fields[j], v))
                throw DataError(source + ": cannot parse cell at data row " + std::to_string(row_index) +
                                ", column " + std::to_string(j) + " ('" + header[j] + "'): '" + fields[j] +
                                "'");
            if (j == decision_index)
                decision = v;
            else
                row.push_back(v);
        }
        row.push_back(decision);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw DataError(source + ": no data rows");
    return DataTable(std::move(names), std::move(rows));
}

inline DataTable load_table(const std::string& path, const std::string& decision_column) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file '" + path + "'");
    return parse_table(in, decision_column, path);
}

inline void write_table(std::ostream& out, const DataTable& table) {
    const auto& names = table.names();
    for (std::size_t j = 0; j < names.size(); ++j) out << (j ? "," : "") << names[j];
    out << '\n';
    for (const auto& row : table.rows()) {
        for (std::size_t j = 0; j < row.size(); ++j) out << (j ? "," : "") << format_number(row[j]);
        out << '\n';
    }
}

inline void save_table(const std::string& path, const DataTable& table) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file '" + path + "'");
    write_table(out, table);
}

inline std::pair<DataTable, DataTable> split(const DataTable& table, const SplitSpec& spec) {
    if (spec.n_train == 0 || spec.n_test == 0)
        throw std::invalid_argument("split: n_train and n_test must both be >= 1");
    if (spec.n_train + spec.n_test > table.size())
        throw std::invalid_argument("split: n_train + n_test = " + std::to_string(spec.n_train + spec.n_test) +
                                    " exceeds table size " + std::to_string(table.size()));
    std::vector<std::size_t> order(table.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    if (spec.shuffle_seed) Rng(*spec.shuffle_seed).shuffle(order);
    std::vector<std::size_t> train(order.begin(), order.begin() + spec.n_train);
    std::vector<std::size_t> test(order.begin() + spec.n_train, order.begin() + spec.n_train + spec.n_test);
    return {table.subset(train), table.subset(test)};
}

/// Per-attribute affine map onto [0,1]; constant attributes map to 0.5.
class MinMaxScaler {
public:
    MinMaxScaler() = default;
    MinMaxScaler(Vector lo, Vector hi) : lo_(std::move(lo)), hi_(std::move(hi)) {}

    static MinMaxScaler fit(const DataTable& table) {
        Vector lo(table.width(), INFINITY), hi(table.width(), -INFINITY);
        for (const auto& r : table.rows())
            for (std::size_t j = 0; j < r.size(); ++j) {
                lo[j] = std::min(lo[j], r[j]);
                hi[j] = std::max(hi[j], r[j]);
            }
        return MinMaxScaler(std::move(lo), std::move(hi));
    }

    bool constant(std::size_t j) const { return !(hi_[j] > lo_[j]); }
    double scale(std::size_t j, double v) const {
        return constant(j) ? 0.5 : (v - lo_[j]) / (hi_[j] - lo_[j]);
    }
    /// Inverse of scale; constant attributes map back to their single value.
    double unscale(std::size_t j, double v) const {
        return constant(j) ? lo_[j] : lo_[j] + v * (hi_[j] - lo_[j]);
    }

    DataTable transform(const DataTable& table) const { return apply(table, false); }
    DataTable inverse(const DataTable& table) const { return apply(table, true); }

    const Vector& lower() const { return lo_; }
    const Vector& upper() const { return hi_; }

private:
    DataTable apply(const DataTable& table, bool inverse) const {
        if (table.width() != lo_.size()) throw std::invalid_argument("MinMaxScaler: width mismatch");
        std::vector<Vector> rows = table.rows();
        for (auto& r : rows)
            for (std::size_t j = 0; j < r.size(); ++j) r[j] = inverse ? unscale(j, r[j]) : scale(j, r[j]);
        return DataTable(table.names(), std::move(rows));
    }

    Vector lo_, hi_;
};

inline std::pair<DataTable, MinMaxScaler> normalize(const DataTable& table) {
    auto scaler = MinMaxScaler::fit(table);
    return {scaler.transform(table), scaler};
}

/**
 * Noiseless surrogate response over the unit cube:
 *   0.8 exp(-|x - 0.3|^2 / 0.08) + 0.6 exp(-|x - 0.75|^2 / 0.05) + 0.4 mean(x)
 * where the bump centers are the constant vectors (0.3,...) and (0.75,...).
 */
inline double surrogate_response(const Vector& x) {
    double d1 = 0.0, d2 = 0.0, mean = 0.0;
    for (double v : x) {
        d1 += (v - 0.3) * (v - 0.3);
        d2 += (v - 0.75) * (v - 0.75);
        mean += v;
    }
    mean /= static_cast<double>(x.size());
    return 0.8 * std::exp(-d1 / 0.08) + 0.6 * std::exp(-d2 / 0.05) + 0.4 * mean;
}

/// Synthetic stand-in for a monitored data set: c uniform conditions and a noisy decision "lugeon".
inline DataTable gen_synthetic(std::size_t n_rows, std::size_t c, double noise_sd, std::uint64_t seed) {
    if (n_rows == 0 || c == 0) throw std::invalid_argument("gen_synthetic: n_rows and c must be >= 1");
    if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd))
        throw std::invalid_argument("gen_synthetic: noise_sd must be a finite non-negative number");
    Rng rng(seed);
    std::vector<std::string> names;
    for (std::size_t j = 0; j < c; ++j) names.push_back("x" + std::to_string(j + 1));
    names.emplace_back("lugeon");
    std::vector<Vector> rows;
    rows.reserve(n_rows);
    for (std::size_t i = 0; i < n_rows; ++i) {
        Vector x(c);
        for (auto& v : x) v = rng.uniform();
        const double noise = rng.normal();
        const double y = surrogate_response(x) + noise_sd * noise;
        x.push_back(y);
        rows.push_back(std::move(x));
    }
    return DataTable(std::move(names), std::move(rows));
}

}  // namespace sonfis
