#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "random.hpp"
#include "timeseries.hpp"

namespace kgraph {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

/// Top-2 principal directions of a set of length-l vectors.
struct Projection2D {
    std::size_t length = 0;
    std::vector<double> mean;
    std::vector<double> pc1;
    std::vector<double> pc2;
};

struct Node {
    int id = 0;
    int angle_bin = 0;
    double radius = 0.0;
    Point2 position;
    double density = 0.0;
};

struct MemberRef {
    std::size_t series_id = 0;
    std::size_t start = 0;

    friend bool operator==(const MemberRef&, const MemberRef&) = default;
};

using EdgeKey = std::pair<int, int>;

struct EmbeddedGraph {
    std::size_t length = 0;
    std::vector<Node> nodes;                     // node id == index
    std::map<EdgeKey, std::size_t> edges;        // (src, dst) -> transition count
    std::vector<std::vector<int>> paths;         // per series, consecutive duplicates collapsed
    std::vector<std::vector<int>> assignments;   // per series, node of every stride-1 window

    /// Every raw window assigned to each node, in (series, start) order.
    std::vector<std::vector<MemberRef>> node_members() const {
        std::vector<std::vector<MemberRef>> members(nodes.size());
        for (std::size_t s = 0; s < assignments.size(); ++s) {
            for (std::size_t i = 0; i < assignments[s].size(); ++i) {
                members[static_cast<std::size_t>(assignments[s][i])].push_back({s, i});
            }
        }
        return members;
    }

    std::size_t total_edge_weight() const {
        std::size_t total = 0;
        for (const auto& [key, w] : edges) total += w;
        return total;
    }
};

struct EmbeddingParams {
    int sectors = 64;
    double min_density_frac = 0.1;
    std::size_t grid_points = 128;
    double bandwidth_floor = 1e-6;
    std::size_t pca_sample = 10'000;
};

namespace detail {

// Flip so the largest-magnitude entry is positive (first one on ties).
template <class Vec>
void canonical_sign(Vec& v) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i) {
        if (std::abs(v[i]) > std::abs(v[best])) best = i;
    }
    if (v[best] < 0) v = -v;
}

} // namespace detail

/// Fits PC1/PC2 on the given vectors. Populations above `max_sample` are
/// subsampled uniformly with `seed`.
inline Projection2D fit_projection(const std::vector<std::vector<double>>& vectors, std::size_t length,
                                   std::uint64_t seed, std::size_t max_sample = 10'000) {
    if (length < 2) throw DataError("projection needs subsequence length >= 2");
    if (vectors.size() < 3) throw DataError("projection needs at least 3 sample vectors");
    for (const auto& v : vectors) {
        if (v.size() != length) throw DataError("sample vector length mismatch");
    }

    std::vector<std::size_t> rows;
    if (vectors.size() > max_sample) {
        Rng rng(seed);
        rows = sample_without_replacement(rng, vectors.size(), max_sample);
        std::sort(rows.begin(), rows.end());
    } else {
        rows.resize(vectors.size());
        std::iota(rows.begin(), rows.end(), std::size_t{0});
    }

    const auto m = static_cast<Eigen::Index>(rows.size());
    const auto l = static_cast<Eigen::Index>(length);
    Eigen::MatrixXd x(m, l);
    for (Eigen::Index r = 0; r < m; ++r) {
        const auto& v = vectors[rows[static_cast<std::size_t>(r)]];
        for (Eigen::Index c = 0; c < l; ++c) x(r, c) = v[static_cast<std::size_t>(c)];
    }
    const Eigen::RowVectorXd mean = x.colwise().mean();
    x.rowwise() -= mean;
    const Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(m - 1);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success) throw DataError("covariance eigendecomposition failed");
    Eigen::VectorXd pc1 = eig.eigenvectors().col(l - 1);
    Eigen::VectorXd pc2 = eig.eigenvectors().col(l - 2);
    detail::canonical_sign(pc1);
    detail::canonical_sign(pc2);

    Projection2D p;
    p.length = length;
    p.mean.assign(mean.data(), mean.data() + l);
    p.pc1.assign(pc1.data(), pc1.data() + l);
    p.pc2.assign(pc2.data(), pc2.data() + l);
    return p;
}

inline Point2 project(const Projection2D& p, std::span<const double> v) {
    if (v.size() != p.length) throw DataError("projected vector length mismatch");
    Point2 out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double c = v[i] - p.mean[i];
        out.x += c * p.pc1[i];
        out.y += c * p.pc2[i];
    }
    return out;
}

/// Gaussian KDE of `samples` on `grid`, normalised to integrate to one.
inline std::vector<double> gaussian_kde(std::span<const double> samples, std::span<const double> grid,
                                        double bandwidth) {
    const double norm = 1.0 / (static_cast<double>(samples.size()) * bandwidth * std::sqrt(2.0 * std::numbers::pi));
    std::vector<double> density(grid.size(), 0.0);
    for (std::size_t g = 0; g < grid.size(); ++g) {
        double acc = 0.0;
        for (double s : samples) {
            const double z = (grid[g] - s) / bandwidth;
            acc += std::exp(-0.5 * z * z);
        }
        density[g] = acc * norm;
    }
    return density;
}

inline double scott_bandwidth(std::span<const double> samples, double floor) {
    const double n = static_cast<double>(samples.size());
    double mean = 0.0;
    for (double s : samples) mean += s;
    mean /= n;
    double var = 0.0;
    for (double s : samples) var += (s - mean) * (s - mean);
    const double sd = std::sqrt(var / n);
    return std::max(1.06 * sd * std::pow(n, -0.2), floor);
}

/// Radial scan: split the plane into equal angular sectors around the origin,
/// then place a node at every KDE peak of the radii inside each sector.
inline std::vector<Node> radial_nodes(std::span<const Point2> points, const EmbeddingParams& params = {}) {
    if (points.empty()) throw DataError("radial scan needs at least one point");
    if (params.sectors < 4) throw ConfigError("angular sector count must be >= 4");
    if (params.grid_points < 2) throw ConfigError("KDE grid needs >= 2 points");

    const auto sectors = static_cast<std::size_t>(params.sectors);
    const double width = 2.0 * std::numbers::pi / static_cast<double>(sectors);
    std::vector<std::vector<double>> radii(sectors);
    for (const auto& p : points) {
        double theta = std::atan2(p.y, p.x);
        if (theta < 0.0) theta += 2.0 * std::numbers::pi;
        auto bin = static_cast<std::size_t>(theta / width);
        if (bin >= sectors) bin = sectors - 1;
        radii[bin].push_back(std::hypot(p.x, p.y));
    }

    std::vector<Node> nodes;
    const std::size_t g = params.grid_points;
    std::vector<double> grid(g);
    for (std::size_t b = 0; b < sectors; ++b) {
        const auto& r = radii[b];
        if (r.empty()) continue;
        const double max_r = *std::max_element(r.begin(), r.end());
        if (max_r <= 0.0) continue;
        for (std::size_t i = 0; i < g; ++i) grid[i] = max_r * static_cast<double>(i) / static_cast<double>(g - 1);
        grid[g - 1] = max_r;

        const auto density = gaussian_kde(r, grid, scott_bandwidth(r, params.bandwidth_floor));
        const double peak = *std::max_element(density.begin(), density.end());
        const double center = (static_cast<double>(b) + 0.5) * width;
        auto emit = [&](std::size_t i) {
            Node n;
            n.id = static_cast<int>(nodes.size());
            n.angle_bin = static_cast<int>(b);
            n.radius = grid[i];
            n.position = {grid[i] * std::cos(center), grid[i] * std::sin(center)};
            n.density = density[i];
            nodes.push_back(n);
        };

        bool found = false;
        for (std::size_t i = 0; i < g; ++i) {
            const double left = i > 0 ? density[i - 1] : -1.0;
            const double right = i + 1 < g ? density[i + 1] : -1.0;
            if (density[i] > left && density[i] > right && density[i] > 0.0 &&
                density[i] >= params.min_density_frac * peak) {
                emit(i);
                found = true;
            }
        }
        if (!found && peak > 0.0) {
            emit(static_cast<std::size_t>(std::max_element(density.begin(), density.end()) - density.begin()));
        }
    }
    if (nodes.empty()) throw DataError("degenerate projection: all points at the origin");
    return nodes;
}

/// Nearest node (Euclidean) per point; ties go to the smallest node id.
inline std::vector<int> assign_subsequences(std::span<const Point2> points, std::span<const Node> nodes) {
    if (nodes.empty()) throw DataError("cannot assign points to an empty node set");
    std::vector<int> out(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        int best_id = nodes.front().id;
        for (const auto& n : nodes) {
            const double dx = points[i].x - n.position.x;
            const double dy = points[i].y - n.position.y;
            const double d = dx * dx + dy * dy;
            if (d < best || (d == best && n.id < best_id)) {
                best = d;
                best_id = n.id;
            }
        }
        out[i] = best_id;
    }
    return out;
}

/// Merges consecutive duplicates of a raw assignment sequence.
inline std::vector<int> collapse_path(std::span<const int> raw) {
    std::vector<int> path;
    for (int v : raw) {
        if (path.empty() || path.back() != v) path.push_back(v);
    }
    return path;
}

/// Embeds every stride-1 window of length `length` of the dataset into one
/// directed graph. Windows are z-normalized before projection.
inline EmbeddedGraph build_graph(const Dataset& d, std::size_t length, const EmbeddingParams& params,
                                 std::uint64_t seed) {
    if (d.series.empty()) throw DataError("empty dataset");
    if (length > d.min_length()) {
        throw DataError("subsequence length " + std::to_string(length) + " exceeds shortest series");
    }

    std::vector<std::size_t> offset(d.size() + 1, 0);
    for (std::size_t s = 0; s < d.size(); ++s) offset[s + 1] = offset[s] + d.series[s].size() - length + 1;
    const std::size_t population = offset.back();

    auto window = [&](std::size_t flat, std::vector<double>& buf) {
        const auto s = static_cast<std::size_t>(std::upper_bound(offset.begin(), offset.end(), flat) - offset.begin()) - 1;
        const auto start = flat - offset[s];
        const auto& v = d.series[s].values;
        buf.assign(v.begin() + static_cast<std::ptrdiff_t>(start),
                   v.begin() + static_cast<std::ptrdiff_t>(start + length));
        znormalize_inplace(buf);
    };

    std::vector<std::size_t> picked;
    if (population > params.pca_sample) {
        Rng rng(seed);
        picked = sample_without_replacement(rng, population, params.pca_sample);
        std::sort(picked.begin(), picked.end());
    } else {
        picked.resize(population);
        std::iota(picked.begin(), picked.end(), std::size_t{0});
    }
    std::vector<std::vector<double>> sample(picked.size());
    for (std::size_t i = 0; i < picked.size(); ++i) window(picked[i], sample[i]);
    const Projection2D proj = fit_projection(sample, length, seed, params.pca_sample);

    std::vector<Point2> points;
    points.reserve(population);
    std::vector<double> buf;
    for (const auto& s : d.series) {
        for (std::size_t start = 0; start + length <= s.size(); ++start) {
            buf.assign(s.values.begin() + static_cast<std::ptrdiff_t>(start),
                       s.values.begin() + static_cast<std::ptrdiff_t>(start + length));
            znormalize_inplace(buf);
            points.push_back(project(proj, buf));
        }
    }

    EmbeddedGraph g;
    g.length = length;
    const bool all_at_origin =
        std::all_of(points.begin(), points.end(), [](const Point2& p) { return p.x == 0.0 && p.y == 0.0; });
    if (all_at_origin) {
        Node origin;
        origin.density = 1.0 / (params.bandwidth_floor * std::sqrt(2.0 * std::numbers::pi));
        g.nodes.push_back(origin);
    } else {
        g.nodes = radial_nodes(points, params);
    }

    auto labels = assign_subsequences(points, g.nodes);

    // Drop nodes no window is nearest to, then compact ids. Removing them cannot
    // change any nearest-node assignment.
    std::vector<int> remap(g.nodes.size(), -1);
    for (int l : labels) remap[static_cast<std::size_t>(l)] = 0;
    std::vector<Node> kept;
    for (const auto& n : g.nodes) {
        if (remap[static_cast<std::size_t>(n.id)] < 0) continue;
        remap[static_cast<std::size_t>(n.id)] = static_cast<int>(kept.size());
        kept.push_back(n);
        kept.back().id = static_cast<int>(kept.size()) - 1;
    }
    g.nodes = std::move(kept);
    for (int& l : labels) l = remap[static_cast<std::size_t>(l)];
    g.assignments.resize(d.size());
    g.paths.resize(d.size());
    for (std::size_t s = 0; s < d.size(); ++s) {
        g.assignments[s].assign(labels.begin() + static_cast<std::ptrdiff_t>(offset[s]),
                                labels.begin() + static_cast<std::ptrdiff_t>(offset[s + 1]));
        g.paths[s] = collapse_path(g.assignments[s]);
        for (std::size_t i = 1; i < g.paths[s].size(); ++i) ++g.edges[{g.paths[s][i - 1], g.paths[s][i]}];
    }
    return g;
}

} // namespace kgraph
