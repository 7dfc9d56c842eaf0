#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"

namespace kgraph {

struct TimeSeries {
    std::size_t id = 0;
    std::vector<double> values;

    std::size_t size() const noexcept { return values.size(); }
};

/// A window of `length` consecutive points of one series, starting at `start`.
/// `values` views the parent series and must not outlive it.
struct Subsequence {
    std::size_t series_id = 0;
    std::size_t start = 0;
    std::size_t length = 0;
    std::span<const double> values;
};

struct Dataset {
    std::string name;
    std::vector<TimeSeries> series;
    std::optional<std::vector<int>> true_labels;
    std::size_t k = 1;

    std::size_t size() const noexcept { return series.size(); }

    std::size_t min_length() const {
        std::size_t n = series.empty() ? 0 : series.front().size();
        for (const auto& s : series) n = std::min(n, s.size());
        return n;
    }
};

enum class DatasetFormat { UcrTsv, Csv };

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> cells;
    std::size_t pos = 0;
    while (true) {
        const auto next = line.find(sep, pos);
        cells.push_back(trim(line.substr(pos, next == std::string_view::npos ? next : next - pos)));
        if (next == std::string_view::npos) break;
        pos = next + 1;
    }
    while (!cells.empty() && cells.back().empty()) cells.pop_back();
    return cells;
}

/// Parses a full cell as a double; nullopt if the cell is not a number.
inline std::optional<double> parse_number(std::string_view cell) {
    if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
    if (cell.empty()) return std::nullopt;
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc{} || ptr != cell.data() + cell.size()) return std::nullopt;
    return value;
}

inline double parse_value(std::string_view cell, std::size_t line_no) {
    const auto v = parse_number(cell);
    if (!v) {
        throw DataError("line " + std::to_string(line_no) + ": non-numeric cell '" + std::string(cell) + "'");
    }
    if (!std::isfinite(*v)) {
        throw DataError("line " + std::to_string(line_no) + ": non-finite value '" + std::string(cell) + "'");
    }
    return *v;
}

inline int parse_label(std::string_view cell, std::size_t line_no) {
    const double v = parse_value(cell, line_no);
    if (v != std::floor(v)) {
        throw DataError("line " + std::to_string(line_no) + ": class label is not an integer");
    }
    return static_cast<int>(v);
}

inline std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

} // namespace detail

/// Builds a Dataset from raw rows, remapping labels to 0..k-1 by first occurrence.
inline Dataset make_dataset(std::vector<std::vector<double>> rows, std::optional<std::vector<int>> raw_labels,
                            std::string name = {}) {
    if (rows.empty()) throw DataError("empty dataset");
    Dataset d;
    d.name = std::move(name);
    d.series.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].empty()) throw DataError("series " + std::to_string(i) + " has zero values");
        for (double v : rows[i]) {
            if (!std::isfinite(v)) throw DataError("series " + std::to_string(i) + ": non-finite value");
        }
        d.series.push_back({i, std::move(rows[i])});
    }
    if (raw_labels) {
        if (raw_labels->size() != d.series.size()) throw DataError("label count does not match series count");
        std::map<int, int> remap;
        std::vector<int> labels;
        labels.reserve(raw_labels->size());
        for (int raw : *raw_labels) {
            const auto [it, inserted] = remap.try_emplace(raw, static_cast<int>(remap.size()));
            labels.push_back(it->second);
        }
        d.k = remap.size();
        d.true_labels = std::move(labels);
    }
    return d;
}

/// Reads a UCR-style TSV (label, values...) or a CSV with an optional header row.
inline Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read dataset file '" + path.string() + "'");

    const char sep = format == DatasetFormat::UcrTsv ? '\t' : ',';
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    std::size_t label_col = 0;
    bool first = true;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        const auto cells = detail::split(line, sep);
        if (format == DatasetFormat::Csv && first) {
            first = false;
            const bool header = std::any_of(cells.begin(), cells.end(),
                                            [](auto c) { return !c.empty() && !detail::parse_number(c); });
            if (header) {
                for (std::size_t c = 0; c < cells.size(); ++c) {
                    if (detail::lower(cells[c]) == "label") label_col = c;
                }
                continue;
            }
        }
        first = false;
        if (cells.size() < 2) {
            throw DataError("line " + std::to_string(line_no) + ": row has zero values");
        }
        if (label_col >= cells.size()) {
            throw DataError("line " + std::to_string(line_no) + ": missing label column");
        }
        labels.push_back(detail::parse_label(cells[label_col], line_no));
        std::vector<double> values;
        values.reserve(cells.size() - 1);
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (c == label_col) continue;
            values.push_back(detail::parse_value(cells[c], line_no));
        }
        rows.push_back(std::move(values));
    }
    if (rows.empty()) throw DataError("empty dataset: '" + path.string() + "'");
    return make_dataset(std::move(rows), std::move(labels), path.stem().string());
}

/// Writes the dataset as UCR TSV with round-trip precision. Unlabelled series get label 0.
inline void save_dataset(const std::filesystem::path& path, const Dataset& d) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write dataset file '" + path.string() + "'");
    char buf[32];
    for (std::size_t i = 0; i < d.size(); ++i) {
        out << (d.true_labels ? (*d.true_labels)[i] : 0);
        for (double v : d.series[i].values) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out << '\t' << buf;
        }
        out << '\n';
    }
}

inline constexpr double kFlatStdThreshold = 1e-8;

/// Z-normalizes in place. Near-constant input (std < 1e-8) becomes all zeros.
inline void znormalize_inplace(std::span<double> v) {
    if (v.empty()) return;
    const double n = static_cast<double>(v.size());
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= n;
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    const double sd = std::sqrt(var / n);
    if (sd < kFlatStdThreshold) {
        std::fill(v.begin(), v.end(), 0.0);
        return;
    }
    for (double& x : v) x = (x - mean) / sd;
}

inline std::vector<double> znormalize(std::span<const double> values) {
    std::vector<double> out(values.begin(), values.end());
    znormalize_inplace(out);
    return out;
}

inline TimeSeries znormalize(const TimeSeries& s) {
    return {s.id, znormalize(std::span<const double>(s.values))};
}

/// All stride-1 windows of length `length`, in increasing start order.
inline std::vector<Subsequence> extract_subsequences(const TimeSeries& s, std::size_t length) {
    if (length == 0) throw DataError("subsequence length must be >= 1");
    if (length > s.size()) {
        throw DataError("subsequence length " + std::to_string(length) + " exceeds series length " +
                        std::to_string(s.size()));
    }
    std::vector<Subsequence> out;
    out.reserve(s.size() - length + 1);
    const std::span<const double> all(s.values);
    for (std::size_t i = 0; i + length <= s.size(); ++i) {
        out.push_back({s.id, i, length, all.subspan(i, length)});
    }
    return out;
}

inline constexpr std::size_t kMinLengthFloor = 4;

/// Candidate subsequence lengths: `m` points linearly spaced from ceil(5%) to
/// floor(40%) of `min_length`, rounded up, clamped to >= 4 and deduplicated.
inline std::vector<std::size_t> candidate_lengths(std::size_t min_length, std::size_t m) {
    if (m == 0) throw ConfigError("number of candidate lengths must be >= 1");
    if (min_length < 8) {
        throw DataError("dataset too short: shortest series has " + std::to_string(min_length) +
                        " points, need >= 8");
    }
    const std::size_t lo = (5 * min_length + 99) / 100;
    const std::size_t hi = (2 * min_length) / 5;
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < m; ++i) {
        std::size_t len = lo;
        if (m > 1) len += ((hi - lo) * i + (m - 2)) / (m - 1);
        len = std::max(len, kMinLengthFloor);
        if (out.empty() || out.back() != len) out.push_back(len);
    }
    return out;
}

inline std::vector<std::size_t> candidate_lengths(const Dataset& d, std::size_t m) {
    return candidate_lengths(d.min_length(), m);
}

} // namespace kgraph
