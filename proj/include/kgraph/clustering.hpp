#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <vector>

#include "embedding.hpp"
#include "errors.hpp"
#include "random.hpp"

namespace kgraph {

/// Dense row-major matrix of doubles.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
    std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
};

/// Per-series node-visit and edge-traversal frequencies. Columns are all nodes
/// (by id) followed by all edges (in key order); each block is L1-normalized per row.
struct FeatureMatrix {
    Matrix values;
    std::size_t node_columns = 0;
    std::vector<int> node_ids;
    std::vector<EdgeKey> edge_keys;

    std::size_t edge_columns() const noexcept { return edge_keys.size(); }
};

struct Partition {
    std::vector<int> labels;
    std::size_t k = 0;
    std::size_t length = 0; // subsequence length it came from, 0 for consensus/baseline

    std::size_t size() const noexcept { return labels.size(); }
};

namespace detail {

inline void l1_normalize(std::span<double> block) {
    double sum = 0.0;
    for (double v : block) sum += v;
    if (sum <= 0.0) return;
    for (double& v : block) v /= sum;
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double t = a[i] - b[i];
        d += t * t;
    }
    return d;
}

} // namespace detail

/// Raw counts before normalization are available through `normalize = false`.
inline FeatureMatrix features(const EmbeddedGraph& g, bool normalize = true) {
    FeatureMatrix f;
    f.node_columns = g.nodes.size();
    for (const auto& n : g.nodes) f.node_ids.push_back(n.id);
    std::map<EdgeKey, std::size_t> edge_col;
    for (const auto& [key, w] : g.edges) {
        edge_col.emplace(key, f.node_columns + f.edge_keys.size());
        f.edge_keys.push_back(key);
    }
    const std::size_t rows = g.assignments.size();
    f.values = Matrix(rows, f.node_columns + f.edge_keys.size());
    for (std::size_t s = 0; s < rows; ++s) {
        for (int node : g.assignments[s]) f.values(s, static_cast<std::size_t>(node)) += 1.0;
        const auto& path = g.paths[s];
        for (std::size_t i = 1; i < path.size(); ++i) f.values(s, edge_col.at({path[i - 1], path[i]})) += 1.0;
        if (normalize) {
            auto row = f.values.row(s);
            detail::l1_normalize(row.subspan(0, f.node_columns));
            detail::l1_normalize(row.subspan(f.node_columns));
        }
    }
    return f;
}

struct KMeansOptions {
    std::size_t max_iter = 300;
    double tol = 1e-4;
};

struct KMeansResult {
    Partition partition;
    Matrix centroids;
    std::vector<double> objective_trace; // sum of squared distances after each assignment step
    std::size_t iterations = 0;
};

/// Renumbers labels so they appear in first-occurrence order 0, 1, 2, ...
inline std::vector<int> relabel_first_occurrence(std::span<const int> labels) {
    std::map<int, int> remap;
    std::vector<int> out;
    out.reserve(labels.size());
    for (int l : labels) {
        const auto [it, inserted] = remap.try_emplace(l, static_cast<int>(remap.size()));
        out.push_back(it->second);
    }
    return out;
}

/// Lloyd's k-means with k-means++ seeding. Deterministic given `seed`.
inline KMeansResult kmeans_detailed(const Matrix& x, std::size_t k, std::uint64_t seed,
                                    const KMeansOptions& opt = {}) {
    const std::size_t n = x.rows;
    if (k == 0) throw ConfigError("k must be >= 1");
    if (k > n) throw ConfigError("k (" + std::to_string(k) + ") exceeds number of rows (" + std::to_string(n) + ")");

    Rng rng(seed);
    Matrix c(k, x.cols);
    std::vector<double> d2(n, std::numeric_limits<double>::infinity());
    std::vector<bool> chosen(n, false);

    auto seed_center = [&](std::size_t ci, std::size_t row) {
        std::copy_n(x.row(row).begin(), x.cols, c.row(ci).begin());
        chosen[row] = true;
        for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], detail::squared_distance(x.row(i), c.row(ci)));
    };
    seed_center(0, uniform_index(rng, n));
    for (std::size_t ci = 1; ci < k; ++ci) {
        double total = 0.0;
        for (double v : d2) total += v;
        std::size_t pick = n;
        if (total > 0.0) {
            const double target = uniform01(rng) * total;
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                acc += d2[i];
                if (d2[i] > 0.0 && acc > target) {
                    pick = i;
                    break;
                }
            }
            if (pick == n) {
                for (std::size_t i = n; i-- > 0;) {
                    if (d2[i] > 0.0) {
                        pick = i;
                        break;
                    }
                }
            }
        } else {
            // Fewer distinct points than k: take the first unused row.
            pick = static_cast<std::size_t>(std::find(chosen.begin(), chosen.end(), false) - chosen.begin());
        }
        seed_center(ci, pick);
    }

    KMeansResult res;
    std::vector<int> label(n, 0);
    std::vector<double> dist(n, 0.0);
    std::vector<std::size_t> count(k, 0);
    for (std::size_t it = 0; it < opt.max_iter; ++it) {
        double objective = 0.0;
        std::fill(count.begin(), count.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            std::size_t arg = 0;
            for (std::size_t j = 0; j < k; ++j) {
                const double d = detail::squared_distance(x.row(i), c.row(j));
                if (d < best) {
                    best = d;
                    arg = j;
                }
            }
            label[i] = static_cast<int>(arg);
            dist[i] = best;
            objective += best;
            ++count[arg];
        }
        res.objective_trace.push_back(objective);

        // Empty cluster: steal the point farthest from its centroid among clusters with > 1 member.
        for (std::size_t j = 0; j < k; ++j) {
            if (count[j] != 0) continue;
            std::size_t far = n;
            for (std::size_t i = 0; i < n; ++i) {
                if (count[static_cast<std::size_t>(label[i])] > 1 && (far == n || dist[i] > dist[far])) far = i;
            }
            --count[static_cast<std::size_t>(label[far])];
            label[far] = static_cast<int>(j);
            dist[far] = 0.0;
            count[j] = 1;
        }

        Matrix next(k, x.cols);
        for (std::size_t i = 0; i < n; ++i) {
            auto dst = next.row(static_cast<std::size_t>(label[i]));
            const auto src = x.row(i);
            for (std::size_t d = 0; d < x.cols; ++d) dst[d] += src[d];
        }
        double shift = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            for (double& v : next.row(j)) v /= static_cast<double>(count[j]);
            shift = std::max(shift, detail::squared_distance(next.row(j), c.row(j)));
        }
        c = std::move(next);
        res.iterations = it + 1;
        if (std::sqrt(shift) < opt.tol) break;
    }

    // Final assignment against the converged centroids, kept only if no cluster empties.
    std::vector<int> final_label(n, 0);
    std::vector<std::size_t> final_count(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < k; ++j) {
            const double d = detail::squared_distance(x.row(i), c.row(j));
            if (d < best) {
                best = d;
                final_label[i] = static_cast<int>(j);
            }
        }
        ++final_count[static_cast<std::size_t>(final_label[i])];
    }
    if (std::find(final_count.begin(), final_count.end(), 0) == final_count.end()) label = std::move(final_label);

    res.partition.labels = relabel_first_occurrence(label);
    res.partition.k = k;
    res.centroids = std::move(c);
    return res;
}

inline Partition kmeans(const Matrix& x, std::size_t k, std::uint64_t seed, const KMeansOptions& opt = {}) {
    return kmeans_detailed(x, k, seed, opt).partition;
}

/// One k-means partition per graph; graph i is clustered with seed + i.
inline std::vector<Partition> partition_all(std::span<const EmbeddedGraph> graphs, std::size_t k,
                                            std::uint64_t seed) {
    if (graphs.empty()) throw ConfigError("partition_all needs at least one graph");
    std::vector<Partition> out;
    out.reserve(graphs.size());
    for (std::size_t i = 0; i < graphs.size(); ++i) {
        auto p = kmeans(features(graphs[i]).values, k, seed + i);
        p.length = graphs[i].length;
        out.push_back(std::move(p));
    }
    return out;
}

} // namespace kgraph
