#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bbt/error.hpp"
#include "bbt/random.hpp"

namespace bbt {

enum class Direction { higher_is_better, lower_is_better };

inline const char* to_string(Direction d) {
    return d == Direction::higher_is_better ? "higher" : "lower";
}

// Benchmark measurements indexed by (data set, algorithm). A cell holds the
// fold measurements in fold order; absent cells are missing results.
class ResultsTable {
public:
    using Cell = std::optional<std::vector<double>>;

    ResultsTable() = default;
    ResultsTable(std::vector<std::string> algorithms, std::vector<std::string> datasets,
                 Direction direction, bool folded)
        : algorithms_(std::move(algorithms)), datasets_(std::move(datasets)),
          direction_(direction), folded_(folded),
          cells_(datasets_.size(), std::vector<Cell>(algorithms_.size())),
          fold_labels_(datasets_.size()) {}

    const std::vector<std::string>& algorithms() const { return algorithms_; }
    const std::vector<std::string>& datasets() const { return datasets_; }
    std::size_t num_algorithms() const { return algorithms_.size(); }
    std::size_t num_datasets() const { return datasets_.size(); }
    Direction direction() const { return direction_; }
    void set_direction(Direction d) { direction_ = d; }

    // True when the measurements came with a fold column.
    bool folded() const { return folded_; }

    const Cell& cell(std::size_t dataset, std::size_t algorithm) const {
        return cells_.at(dataset).at(algorithm);
    }
    bool has(std::size_t dataset, std::size_t algorithm) const {
        return cell(dataset, algorithm).has_value();
    }
    void set_cell(std::size_t dataset, std::size_t algorithm, std::vector<double> values) {
        cells_.at(dataset).at(algorithm) = std::move(values);
    }

    const std::vector<std::string>& fold_labels(std::size_t dataset) const {
        return fold_labels_.at(dataset);
    }
    void set_fold_labels(std::size_t dataset, std::vector<std::string> labels) {
        fold_labels_.at(dataset) = std::move(labels);
    }

    std::optional<std::size_t> algorithm_index(std::string_view name) const {
        auto it = std::find(algorithms_.begin(), algorithms_.end(), name);
        if (it == algorithms_.end()) return std::nullopt;
        return static_cast<std::size_t>(it - algorithms_.begin());
    }
    std::optional<std::size_t> dataset_index(std::string_view name) const {
        auto it = std::find(datasets_.begin(), datasets_.end(), name);
        if (it == datasets_.end()) return std::nullopt;
        return static_cast<std::size_t>(it - datasets_.begin());
    }

    // Mean of a cell; the cell must be present.
    double mean(std::size_t dataset, std::size_t algorithm) const {
        const auto& v = *cell(dataset, algorithm);
        return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    }

    bool complete() const {
        for (const auto& row : cells_)
            for (const auto& c : row)
                if (!c) return false;
        return true;
    }

    // Checks the structural invariants; throws on violation.
    void validate() const {
        check_names(algorithms_, "algorithm");
        check_names(datasets_, "dataset");
        for (std::size_t d = 0; d < datasets_.size(); ++d) {
            std::optional<std::size_t> folds;
            for (std::size_t a = 0; a < algorithms_.size(); ++a) {
                const auto& c = cells_[d][a];
                if (!c) continue;
                if (c->empty())
                    throw ConfigError("cell (" + datasets_[d] + ", " + algorithms_[a] + ") is empty");
                for (double v : *c)
                    if (!std::isfinite(v))
                        throw ConfigError("non-finite measure in (" + datasets_[d] + ", " +
                                          algorithms_[a] + ")");
                if (folded_) {
                    if (folds && *folds != c->size())
                        throw ConfigError("data set " + datasets_[d] +
                                          " has cells with different fold counts");
                    folds = c->size();
                }
            }
        }
    }

    bool operator==(const ResultsTable&) const = default;

private:
    static void check_names(const std::vector<std::string>& names, const char* kind) {
        std::vector<std::string> sorted = names;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            if (sorted[i].empty()) throw ConfigError(std::string("empty ") + kind + " name");
            if (i > 0 && sorted[i] == sorted[i - 1])
                throw ConfigError(std::string("duplicate ") + kind + " name '" + sorted[i] + "'");
        }
    }

    std::vector<std::string> algorithms_;
    std::vector<std::string> datasets_;
    Direction direction_ = Direction::higher_is_better;
    bool folded_ = false;
    std::vector<std::vector<Cell>> cells_;
    std::vector<std::vector<std::string>> fold_labels_;
};

struct ParseOptions {
    // Unset means: take it from a `direction` column if present, else higher.
    std::optional<Direction> direction;
    char delimiter = ',';
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return s;
}

inline std::vector<std::string> split(std::string_view line, char delim) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        std::size_t pos = line.find(delim, start);
        out.emplace_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline std::optional<double> parse_double(std::string_view s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

inline std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

// Numeric fold labels sort numerically, others lexicographically.
inline bool fold_less(const std::string& a, const std::string& b) {
    auto na = parse_double(a), nb = parse_double(b);
    if (na && nb) return *na < *nb;
    if (na != nb) return na.has_value();
    return a < b;
}

inline std::optional<Direction> parse_direction(std::string_view s) {
    if (s == "higher" || s == "max" || s == "maximize") return Direction::higher_is_better;
    if (s == "lower" || s == "min" || s == "minimize") return Direction::lower_is_better;
    return std::nullopt;
}

} // namespace detail

// Parses long-format results: header with `dataset,algorithm,measure` and an
// optional `fold` (and optional `direction`) column, in any order.
inline ResultsTable parse_results(std::string_view text, const ParseOptions& options = {}) {
    std::vector<std::string_view> lines;
    {
        std::size_t start = 0;
        while (start <= text.size()) {
            std::size_t pos = text.find('\n', start);
            if (pos == std::string_view::npos) {
                lines.push_back(text.substr(start));
                break;
            }
            lines.push_back(text.substr(start, pos - start));
            start = pos + 1;
        }
    }

    std::size_t header_line = 0;
    while (header_line < lines.size() && detail::trim(lines[header_line]).empty()) ++header_line;
    if (header_line == lines.size()) throw EmptyInputError("empty input: no header row");
    // Skip a UTF-8 byte order mark.
    std::string_view header_text = lines[header_line];
    if (header_text.substr(0, 3) == "\xEF\xBB\xBF") header_text.remove_prefix(3);

    const auto header = detail::split(header_text, options.delimiter);
    auto column = [&](std::string_view name) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        return std::nullopt;
    };
    const auto c_dataset = column("dataset");
    const auto c_algorithm = column("algorithm");
    const auto c_measure = column("measure");
    const auto c_fold = column("fold");
    const auto c_direction = column("direction");
    if (!c_dataset || !c_algorithm || !c_measure)
        throw ParseError(header_line + 1,
                         "header must contain dataset, algorithm and measure columns");

    struct Row {
        std::string dataset, algorithm, fold;
        double value;
        std::size_t line;
    };
    std::vector<Row> rows;
    std::optional<Direction> file_direction;
    std::vector<std::string> algorithms, datasets;
    std::map<std::string, std::size_t> alg_index, ds_index;

    for (std::size_t li = header_line + 1; li < lines.size(); ++li) {
        const std::size_t line_no = li + 1;
        if (detail::trim(lines[li]).empty()) continue;
        auto fields = detail::split(lines[li], options.delimiter);
        if (fields.size() != header.size())
            throw ParseError(line_no, "expected " + std::to_string(header.size()) + " fields, got " +
                                          std::to_string(fields.size()));
        Row row;
        row.dataset = fields[*c_dataset];
        row.algorithm = fields[*c_algorithm];
        row.line = line_no;
        if (row.dataset.empty() || row.algorithm.empty())
            throw ParseError(line_no, "empty dataset or algorithm name");
        auto v = detail::parse_double(fields[*c_measure]);
        if (!v) throw ParseError(line_no, "measure '" + fields[*c_measure] + "' is not a number");
        if (!std::isfinite(*v)) throw ParseError(line_no, "measure is not finite");
        row.value = *v;
        if (c_fold) {
            row.fold = fields[*c_fold];
            if (row.fold.empty()) throw ParseError(line_no, "empty fold label");
        }
        if (c_direction) {
            auto d = detail::parse_direction(fields[*c_direction]);
            if (!d)
                throw ParseError(line_no, "direction must be higher or lower, got '" +
                                              fields[*c_direction] + "'");
            if (file_direction && *file_direction != *d)
                throw ConfigError("mixed-direction metrics in one file are not supported (line " +
                                  std::to_string(line_no) + ")");
            file_direction = d;
        }
        if (alg_index.emplace(row.algorithm, algorithms.size()).second)
            algorithms.push_back(row.algorithm);
        if (ds_index.emplace(row.dataset, datasets.size()).second) datasets.push_back(row.dataset);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw EmptyInputError("empty input: no data rows");

    Direction direction = Direction::higher_is_better;
    if (options.direction) {
        if (file_direction && *file_direction != *options.direction)
            throw ConfigError("direction column contradicts the requested direction");
        direction = *options.direction;
    } else if (file_direction) {
        direction = *file_direction;
    }

    ResultsTable table(algorithms, datasets, direction, c_fold.has_value());

    // (dataset, algorithm) -> (fold, value, line)
    std::map<std::pair<std::size_t, std::size_t>, std::vector<std::pair<std::string, double>>> grouped;
    std::map<std::pair<std::size_t, std::size_t>, std::map<std::string, std::size_t>> seen;
    for (const auto& r : rows) {
        const auto key = std::make_pair(ds_index[r.dataset], alg_index[r.algorithm]);
        auto [it, fresh] = seen[key].emplace(r.fold, r.line);
        if (!fresh)
            throw ConflictError("duplicate entry for (" + r.dataset + ", " + r.algorithm +
                                (c_fold ? ", fold " + r.fold : std::string()) + ") on lines " +
                                std::to_string(it->second) + " and " + std::to_string(r.line));
        grouped[key].emplace_back(r.fold, r.value);
    }

    for (auto& [key, entries] : grouped) {
        std::stable_sort(entries.begin(), entries.end(),
                         [](const auto& a, const auto& b) { return detail::fold_less(a.first, b.first); });
        std::vector<double> values;
        std::vector<std::string> labels;
        for (auto& [fold, value] : entries) {
            values.push_back(value);
            labels.push_back(fold);
        }
        table.set_cell(key.first, key.second, std::move(values));
        if (c_fold) {
            const auto& existing = table.fold_labels(key.first);
            if (existing.empty()) {
                table.set_fold_labels(key.first, labels);
            } else if (existing != labels) {
                throw ConfigError("data set " + table.datasets()[key.first] +
                                  " has cells with different folds; fold data must be aligned");
            }
        }
    }
    table.validate();
    return table;
}

// Writes the table in the long format accepted by parse_results.
inline std::string to_csv(const ResultsTable& table) {
    std::ostringstream os;
    os << (table.folded() ? "dataset,algorithm,fold,measure\n" : "dataset,algorithm,measure\n");
    for (std::size_t d = 0; d < table.num_datasets(); ++d) {
        for (std::size_t a = 0; a < table.num_algorithms(); ++a) {
            const auto& c = table.cell(d, a);
            if (!c) continue;
            for (std::size_t f = 0; f < c->size(); ++f) {
                os << table.datasets()[d] << ',' << table.algorithms()[a] << ',';
                if (table.folded()) os << table.fold_labels(d)[f] << ',';
                os << detail::format_double((*c)[f]) << '\n';
            }
        }
    }
    return os.str();
}

// Converts a wide table (`dataset,<alg1>,<alg2>,...`, empty cell = missing)
// into the long format.
inline std::string wide_to_long(std::string_view text, char delimiter = ',') {
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    std::ostringstream os;
    os << "dataset,algorithm,measure\n";
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        auto fields = detail::split(line, delimiter);
        if (header.empty()) {
            if (fields.size() < 2) throw ParseError(line_no, "wide header needs at least two columns");
            header = fields;
            continue;
        }
        if (fields.size() != header.size())
            throw ParseError(line_no, "expected " + std::to_string(header.size()) + " fields, got " +
                                          std::to_string(fields.size()));
        for (std::size_t i = 1; i < fields.size(); ++i) {
            if (fields[i].empty() || fields[i] == "NA") continue;
            if (!detail::parse_double(fields[i]))
                throw ParseError(line_no, "measure '" + fields[i] + "' is not a number");
            os << fields[0] << ',' << header[i] << ',' << fields[i] << '\n';
        }
    }
    if (header.empty()) throw EmptyInputError("empty input: no header row");
    return os.str();
}

// Replaces every cell by the mean of its folds.
inline ResultsTable aggregate_folds(const ResultsTable& table) {
    ResultsTable out(table.algorithms(), table.datasets(), table.direction(), false);
    for (std::size_t d = 0; d < table.num_datasets(); ++d)
        for (std::size_t a = 0; a < table.num_algorithms(); ++a)
            if (table.has(d, a)) out.set_cell(d, a, {table.mean(d, a)});
    return out;
}

// Returns a table restricted to the given algorithm and data set indices
// (kept in the given order).
inline ResultsTable select(const ResultsTable& table, const std::vector<std::size_t>& algorithms,
                           const std::vector<std::size_t>& datasets) {
    std::vector<std::string> alg_names, ds_names;
    for (auto a : algorithms) alg_names.push_back(table.algorithms().at(a));
    for (auto d : datasets) ds_names.push_back(table.datasets().at(d));
    ResultsTable out(alg_names, ds_names, table.direction(), table.folded());
    for (std::size_t i = 0; i < datasets.size(); ++i) {
        out.set_fold_labels(i, table.fold_labels(datasets[i]));
        for (std::size_t j = 0; j < algorithms.size(); ++j)
            if (const auto& c = table.cell(datasets[i], algorithms[j])) out.set_cell(i, j, *c);
    }
    return out;
}

// Drops one cell, leaving it missing.
inline ResultsTable remove_cell(const ResultsTable& table, std::string_view dataset,
                                std::string_view algorithm) {
    auto d = table.dataset_index(dataset);
    auto a = table.algorithm_index(algorithm);
    if (!d || !a) throw ConfigError("no cell (" + std::string(dataset) + ", " + std::string(algorithm) + ")");
    ResultsTable copy(table.algorithms(), table.datasets(), table.direction(), table.folded());
    for (std::size_t i = 0; i < table.num_datasets(); ++i) {
        copy.set_fold_labels(i, table.fold_labels(i));
        for (std::size_t j = 0; j < table.num_algorithms(); ++j)
            if (!(i == *d && j == *a) && table.has(i, j)) copy.set_cell(i, j, *table.cell(i, j));
    }
    return copy;
}

struct Subsample {
    ResultsTable train;
    ResultsTable held_out;
};

namespace detail {

// First `k` entries of a seeded Fisher-Yates shuffle of 0..n-1.
inline std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, Rng& rng) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
}

} // namespace detail

// Random algorithm subset plus disjoint train / held-out data set subsets.
// Selected indices keep their original relative order.
inline Subsample subsample(const ResultsTable& table, std::size_t n_algorithms,
                           std::size_t n_datasets, std::size_t n_held_out, std::uint64_t seed) {
    if (n_algorithms > table.num_algorithms())
        throw SizeError("requested " + std::to_string(n_algorithms) + " algorithms but only " +
                        std::to_string(table.num_algorithms()) + " available");
    if (n_datasets + n_held_out > table.num_datasets())
        throw SizeError("requested " + std::to_string(n_datasets) + " + " +
                        std::to_string(n_held_out) + " data sets but only " +
                        std::to_string(table.num_datasets()) + " available");
    Rng rng(derive_seed(seed, 0x5b5));
    auto algs = detail::sample_indices(table.num_algorithms(), n_algorithms, rng);
    auto ds = detail::sample_indices(table.num_datasets(), n_datasets + n_held_out, rng);
    std::sort(algs.begin(), algs.end());
    std::vector<std::size_t> train_ds(ds.begin(), ds.begin() + static_cast<std::ptrdiff_t>(n_datasets));
    std::vector<std::size_t> test_ds(ds.begin() + static_cast<std::ptrdiff_t>(n_datasets), ds.end());
    std::sort(train_ds.begin(), train_ds.end());
    std::sort(test_ds.begin(), test_ds.end());
    return {select(table, algs, train_ds), select(table, algs, test_ds)};
}

} // namespace bbt
