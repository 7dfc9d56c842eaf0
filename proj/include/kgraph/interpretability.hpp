#pragma once

#include <algorithm>
#include <set>
#include <span>
#include <string_view>
#include <vector>

#include "clustering.hpp"
#include "embedding.hpp"
#include "errors.hpp"
#include "evaluation.hpp"

namespace kgraph {

/// How the series of each cluster cross one graph element (node or edge).
///   representativity[c] = crossing[c] / |C_c|
///   exclusivity[c]      = crossing[c] / total
struct ClusterStats {
    std::vector<std::size_t> crossing;
    std::size_t total = 0;
    std::vector<double> representativity;
    std::vector<double> exclusivity;

    /// Cluster with the highest exclusivity, smallest id on ties.
    std::size_t dominant_cluster() const {
        return static_cast<std::size_t>(std::max_element(exclusivity.begin(), exclusivity.end()) - exclusivity.begin());
    }
};

struct NodeStats {
    int node = 0;
    ClusterStats stats;
};

struct EdgeStats {
    EdgeKey edge;
    ClusterStats stats;
};

struct GraphStats {
    std::vector<std::size_t> cluster_sizes;
    std::vector<NodeStats> nodes; // index == node id
    std::vector<EdgeStats> edges; // graph edge-map order
};

namespace detail {

inline ClusterStats finish_stats(std::vector<std::size_t> crossing, std::span<const std::size_t> sizes) {
    ClusterStats s;
    s.crossing = std::move(crossing);
    for (auto c : s.crossing) s.total += c;
    s.representativity.resize(sizes.size(), 0.0);
    s.exclusivity.resize(sizes.size(), 0.0);
    for (std::size_t c = 0; c < sizes.size(); ++c) {
        if (sizes[c] > 0) s.representativity[c] = static_cast<double>(s.crossing[c]) / static_cast<double>(sizes[c]);
        if (s.total > 0) s.exclusivity[c] = static_cast<double>(s.crossing[c]) / static_cast<double>(s.total);
    }
    return s;
}

} // namespace detail

/// Representativity and exclusivity of every node and edge for every cluster.
/// A series crosses a node/edge if its collapsed path visits it at least once.
inline GraphStats node_stats(const EmbeddedGraph& g, const Partition& labels) {
    if (labels.size() != g.paths.size()) throw DataError("labels do not cover every series of the graph");
    const std::size_t k = labels.k;
    GraphStats out;
    out.cluster_sizes.assign(k, 0);
    for (int l : labels.labels) {
        if (l < 0 || static_cast<std::size_t>(l) >= k) throw DataError("label out of range [0, k)");
        ++out.cluster_sizes[static_cast<std::size_t>(l)];
    }

    std::vector<std::vector<std::size_t>> node_cross(g.nodes.size(), std::vector<std::size_t>(k, 0));
    std::map<EdgeKey, std::vector<std::size_t>> edge_cross;
    for (const auto& [key, w] : g.edges) edge_cross.emplace(key, std::vector<std::size_t>(k, 0));

    for (std::size_t s = 0; s < g.paths.size(); ++s) {
        const auto c = static_cast<std::size_t>(labels.labels[s]);
        const auto& path = g.paths[s];
        const std::set<int> visited(path.begin(), path.end());
        for (int n : visited) ++node_cross[static_cast<std::size_t>(n)][c];
        std::set<EdgeKey> traversed;
        for (std::size_t i = 1; i < path.size(); ++i) traversed.insert({path[i - 1], path[i]});
        for (const auto& e : traversed) ++edge_cross.at(e)[c];
    }

    out.nodes.reserve(g.nodes.size());
    for (std::size_t n = 0; n < g.nodes.size(); ++n) {
        out.nodes.push_back({g.nodes[n].id, detail::finish_stats(std::move(node_cross[n]), out.cluster_sizes)});
    }
    for (auto& [key, cross] : edge_cross) {
        out.edges.push_back({key, detail::finish_stats(std::move(cross), out.cluster_sizes)});
    }
    return out;
}

/// Consistency W_c: agreement between the final labels and one length's labels.
inline double consistency(const Partition& final_labels, const Partition& per_length) {
    if (final_labels.size() != per_length.size()) throw DataError("consistency: partitions differ in length");
    if (final_labels.size() < 2) return 1.0;
    return ari(final_labels.labels, per_length.labels);
}

/// Interpretability factor W_e: mean over clusters of the best node exclusivity.
inline double interpretability_factor(const GraphStats& stats) {
    const std::size_t k = stats.cluster_sizes.size();
    if (k == 0) return 0.0;
    double sum = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        if (stats.cluster_sizes[c] == 0) continue;
        double best = 0.0;
        for (const auto& n : stats.nodes) best = std::max(best, n.stats.exclusivity[c]);
        sum += best;
    }
    return sum / static_cast<double>(k);
}

inline double interpretability_factor(const EmbeddedGraph& g, const Partition& final_labels) {
    if (g.nodes.empty()) throw DataError("interpretability factor needs a non-empty graph");
    return interpretability_factor(node_stats(g, final_labels));
}

struct LengthScore {
    std::size_t length = 0;
    double wc = 0.0;
    double we = 0.0;

    double product() const noexcept { return wc * we; }
};

/// Length maximizing W_c * W_e; ties go to the smallest length.
inline std::size_t select_length(std::span<const LengthScore> scores) {
    if (scores.empty()) throw DataError("select_length needs at least one score");
    const LengthScore* best = &scores.front();
    for (const auto& s : scores) {
        if (s.product() > best->product() || (s.product() == best->product() && s.length < best->length)) best = &s;
    }
    return best->length;
}

enum class GraphoidKind { Lambda, Gamma, Combined };

inline std::string_view to_string(GraphoidKind k) {
    switch (k) {
    case GraphoidKind::Lambda: return "lambda";
    case GraphoidKind::Gamma: return "gamma";
    case GraphoidKind::Combined: return "combined";
    }
    return "?";
}

struct Graphoid {
    std::size_t cluster = 0;
    GraphoidKind kind = GraphoidKind::Combined;
    double lambda = 0.0;
    double gamma = 0.0;
    std::vector<int> nodes;
    std::vector<EdgeKey> edges;
};

/// Elements of one cluster's graphoid. Thresholds are inclusive: lambda filters on
/// representativity, gamma on exclusivity, combined requires both.
inline Graphoid graphoid(const GraphStats& stats, std::size_t cluster, GraphoidKind kind, double lambda,
                         double gamma) {
    if (cluster >= stats.cluster_sizes.size()) throw DataError("unknown cluster id " + std::to_string(cluster));
    if (!(lambda >= 0.0 && lambda <= 1.0) || !(gamma >= 0.0 && gamma <= 1.0)) {
        throw ConfigError("graphoid thresholds must lie in [0, 1]");
    }
    auto keep = [&](const ClusterStats& s) {
        const bool rep = s.representativity[cluster] >= lambda;
        const bool exc = s.exclusivity[cluster] >= gamma;
        switch (kind) {
        case GraphoidKind::Lambda: return rep;
        case GraphoidKind::Gamma: return exc;
        case GraphoidKind::Combined: return rep && exc;
        }
        return false;
    };
    Graphoid out{cluster, kind, lambda, gamma, {}, {}};
    for (const auto& n : stats.nodes) {
        if (keep(n.stats)) out.nodes.push_back(n.node);
    }
    for (const auto& e : stats.edges) {
        if (keep(e.stats)) out.edges.push_back(e.edge);
    }
    return out;
}

/// Display rule: an element is colored when its dominant cluster meets both thresholds.
inline bool colored(const ClusterStats& s, double lambda, double gamma) {
    if (s.total == 0 || s.exclusivity.empty()) return false;
    const auto c = s.dominant_cluster();
    return s.representativity[c] >= lambda && s.exclusivity[c] >= gamma;
}

} // namespace kgraph
