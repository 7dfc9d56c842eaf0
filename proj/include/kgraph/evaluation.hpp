#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "clustering.hpp"
#include "errors.hpp"
#include "timeseries.hpp"

namespace kgraph {

/// Counts n_ij of elements with label i in A and label j in B, plus marginals.
struct ContingencyTable {
    std::vector<std::vector<std::int64_t>> counts;
    std::vector<std::int64_t> rows; // a_i
    std::vector<std::int64_t> cols; // b_j
    std::int64_t total = 0;

    ContingencyTable(std::span<const int> a, std::span<const int> b) {
        if (a.size() != b.size()) throw DataError("label vectors differ in length");
        const auto ra = relabel_first_occurrence(a);
        const auto rb = relabel_first_occurrence(b);
        const auto ka = ra.empty() ? 0 : static_cast<std::size_t>(*std::max_element(ra.begin(), ra.end())) + 1;
        const auto kb = rb.empty() ? 0 : static_cast<std::size_t>(*std::max_element(rb.begin(), rb.end())) + 1;
        counts.assign(ka, std::vector<std::int64_t>(kb, 0));
        rows.assign(ka, 0);
        cols.assign(kb, 0);
        for (std::size_t i = 0; i < ra.size(); ++i) {
            const auto x = static_cast<std::size_t>(ra[i]);
            const auto y = static_cast<std::size_t>(rb[i]);
            ++counts[x][y];
            ++rows[x];
            ++cols[y];
        }
        total = static_cast<std::int64_t>(a.size());
    }

    /// True when A and B induce the same set partition.
    bool same_partition() const {
        if (rows.size() != cols.size()) return false;
        for (const auto& r : counts) {
            if (std::count_if(r.begin(), r.end(), [](std::int64_t c) { return c != 0; }) != 1) return false;
        }
        return true;
    }
};

namespace detail {

inline std::int64_t pairs(std::int64_t n) { return n * (n - 1) / 2; }

struct PairSums {
    std::int64_t index = 0; // sum C(n_ij, 2)
    std::int64_t a = 0;     // sum C(a_i, 2)
    std::int64_t b = 0;     // sum C(b_j, 2)
    std::int64_t all = 0;   // C(n, 2)
};

inline PairSums pair_sums(const ContingencyTable& t) {
    PairSums s;
    for (const auto& r : t.counts) {
        for (auto c : r) s.index += pairs(c);
    }
    for (auto r : t.rows) s.a += pairs(r);
    for (auto c : t.cols) s.b += pairs(c);
    s.all = pairs(t.total);
    return s;
}

inline double entropy(std::span<const std::int64_t> marginal, double n) {
    double h = 0.0;
    for (auto c : marginal) {
        if (c > 0) {
            const double p = static_cast<double>(c) / n;
            h -= p * std::log(p);
        }
    }
    return h;
}

} // namespace detail

/// Adjusted Rand Index. Computed over exact integer pair counts so that
/// small cases (e.g. -0.5) come out exact.
inline double ari(std::span<const int> a, std::span<const int> b) {
    if (a.size() != b.size()) throw DataError("ari: label vectors differ in length");
    if (a.size() < 2) throw DataError("ari: need at least 2 elements");
    const ContingencyTable t(a, b);
    const auto s = detail::pair_sums(t);
    // (index - a*b/all) / ((a+b)/2 - a*b/all), scaled by 2*all.
    __extension__ using wide = __int128;
    const wide num = 2 * static_cast<wide>(s.index) * s.all - 2 * static_cast<wide>(s.a) * s.b;
    const wide den = static_cast<wide>(s.a + s.b) * s.all - 2 * static_cast<wide>(s.a) * s.b;
    if (den == 0) return t.same_partition() ? 1.0 : 0.0;
    return static_cast<double>(num) / static_cast<double>(den);
}

inline double rand_index(std::span<const int> a, std::span<const int> b) {
    if (a.size() != b.size()) throw DataError("rand_index: label vectors differ in length");
    if (a.size() < 2) return 1.0;
    const ContingencyTable t(a, b);
    const auto s = detail::pair_sums(t);
    // agreements = pairs together in both + pairs apart in both
    const std::int64_t agree = s.all + 2 * s.index - s.a - s.b;
    return static_cast<double>(agree) / static_cast<double>(s.all);
}

/// Mutual information normalized by the arithmetic mean of the two entropies.
inline double nmi(std::span<const int> a, std::span<const int> b) {
    if (a.size() != b.size()) throw DataError("nmi: label vectors differ in length");
    if (a.empty()) return 1.0;
    const ContingencyTable t(a, b);
    const double n = static_cast<double>(t.total);
    const double ha = detail::entropy(t.rows, n);
    const double hb = detail::entropy(t.cols, n);
    if (ha == 0.0 && hb == 0.0) return 1.0;
    if (ha == 0.0 || hb == 0.0) return 0.0;
    double mi = 0.0;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        for (std::size_t j = 0; j < t.cols.size(); ++j) {
            const auto c = t.counts[i][j];
            if (c == 0) continue;
            const double pij = static_cast<double>(c) / n;
            mi += pij * std::log(pij * n * n / (static_cast<double>(t.rows[i]) * static_cast<double>(t.cols[j])));
        }
    }
    return std::clamp(mi / (0.5 * (ha + hb)), 0.0, 1.0);
}

/// Fraction of elements whose predicted cluster's majority truth class matches.
inline double purity(std::span<const int> predicted, std::span<const int> truth) {
    if (predicted.size() != truth.size()) throw DataError("purity: label vectors differ in length");
    if (predicted.empty()) return 1.0;
    const ContingencyTable t(predicted, truth);
    std::int64_t hit = 0;
    for (const auto& r : t.counts) hit += *std::max_element(r.begin(), r.end());
    return static_cast<double>(hit) / static_cast<double>(t.total);
}

struct Scores {
    double ari = 0.0;
    double ri = 0.0;
    double nmi = 0.0;
    double purity = 0.0;
};

inline Scores score_all(std::span<const int> predicted, std::span<const int> truth) {
    return {ari(predicted, truth), rand_index(predicted, truth), nmi(predicted, truth), purity(predicted, truth)};
}

/// Raw-shape baseline: z-normalized series, truncated to the shortest length, clustered with kmeans.
inline Partition baseline_kmeans(const Dataset& d, std::size_t k, std::uint64_t seed) {
    const std::size_t n = d.min_length();
    Matrix x(d.size(), n);
    for (std::size_t s = 0; s < d.size(); ++s) {
        const auto z = znormalize(std::span<const double>(d.series[s].values.data(), n));
        std::copy(z.begin(), z.end(), x.row(s).begin());
    }
    return kmeans(x, k, seed);
}

} // namespace kgraph
