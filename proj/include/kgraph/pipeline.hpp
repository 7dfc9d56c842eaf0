#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "clustering.hpp"
#include "consensus.hpp"
#include "embedding.hpp"
#include "errors.hpp"
#include "evaluation.hpp"
#include "interpretability.hpp"
#include "random.hpp"
#include "timeseries.hpp"

namespace kgraph {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

struct RunConfig {
    std::filesystem::path dataset;
    DatasetFormat format = DatasetFormat::UcrTsv;
    std::size_t k = 0;
    std::size_t m = 10;
    std::uint64_t seed = 42;
    int sectors = 64;
    double min_density_frac = 0.1;
    double lambda = 0.8;
    double gamma = 0.8;
    std::filesystem::path out;
    std::size_t threads = 1;
    bool dump_features = false;
};

/// Range checks that need no data. Throws ConfigError.
inline void validate(const RunConfig& c) {
    if (c.k < 1) throw ConfigError("--k must be >= 1");
    if (c.m < 1) throw ConfigError("--m must be >= 1");
    if (c.sectors < 4) throw ConfigError("--sectors must be >= 4");
    if (!(c.min_density_frac >= 0.0 && c.min_density_frac <= 1.0)) {
        throw ConfigError("min_density_frac must lie in [0, 1]");
    }
    if (!(c.lambda >= 0.0 && c.lambda <= 1.0)) throw ConfigError("--lambda must lie in [0, 1]");
    if (!(c.gamma >= 0.0 && c.gamma <= 1.0)) throw ConfigError("--gamma must lie in [0, 1]");
    if (c.threads < 1) throw ConfigError("--threads must be >= 1");
}

inline void validate(const RunConfig& c, const Dataset& d) {
    validate(c);
    if (c.k > d.size()) {
        throw ConfigError("k = " + std::to_string(c.k) + " exceeds the number of series (" +
                          std::to_string(d.size()) + ")");
    }
}

struct FeatureShape {
    std::size_t length = 0;
    std::size_t rows = 0;
    std::size_t node_columns = 0;
    std::size_t edge_columns = 0;
};

struct RunArtifact {
    RunConfig config;
    Dataset dataset;
    std::vector<std::size_t> lengths;
    std::vector<EmbeddedGraph> graphs;
    std::vector<Partition> partitions;
    std::vector<FeatureShape> feature_shapes;
    std::vector<FeatureMatrix> feature_dumps; // filled only with config.dump_features
    ConsensusMatrix consensus;
    Partition final_labels;
    std::vector<LengthScore> scores;
    std::size_t selected_length = 0;
    std::size_t selected_index = 0;
    GraphStats selected_stats;
    std::vector<Graphoid> graphoids;
    Partition baseline;
    std::vector<std::pair<std::string, double>> timings; // seconds per stage
};

namespace detail {

class StageTimer {
public:
    StageTimer(std::vector<std::pair<std::string, double>>& sink, std::string name)
        : sink_(sink), name_(std::move(name)), start_(std::chrono::steady_clock::now()) {}
    ~StageTimer() {
        const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start_;
        sink_.emplace_back(std::move(name_), dt.count());
    }
    StageTimer(const StageTimer&) = delete;
    StageTimer& operator=(const StageTimer&) = delete;

private:
    std::vector<std::pair<std::string, double>>& sink_;
    std::string name_;
    std::chrono::steady_clock::time_point start_;
};

template <class F>
auto tagged(const std::string& stage, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(stage, e.what());
    }
}

/// Runs body(i) for i in [0, count) on `workers` threads; results must be written by index.
/// Rethrows the exception of the smallest failing index.
template <class F>
void parallel_for(std::size_t count, std::size_t workers, F body) {
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                body(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    workers = std::min(workers, count);
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

} // namespace detail

/// Full pipeline on an in-memory dataset. Deterministic given config.seed,
/// independent of config.threads.
inline RunArtifact run(const RunConfig& config, Dataset dataset) {
    validate(config, dataset);
    RunArtifact a;
    a.config = config;
    a.dataset = std::move(dataset);
    const auto& d = a.dataset;
    const std::size_t k = config.k;

    {
        detail::StageTimer t(a.timings, "lengths");
        a.lengths = detail::tagged("lengths", [&] { return candidate_lengths(d, config.m); });
    }

    EmbeddingParams params;
    params.sectors = config.sectors;
    params.min_density_frac = config.min_density_frac;

    const std::size_t count = a.lengths.size();
    a.graphs.resize(count);
    a.partitions.resize(count);
    a.feature_shapes.resize(count);
    if (config.dump_features) a.feature_dumps.resize(count);
    const std::uint64_t cluster_seed = stage_seed(config.seed, "clustering");
    {
        detail::StageTimer t(a.timings, "embedding+clustering");
        detail::parallel_for(count, config.threads, [&](std::size_t i) {
            const std::size_t len = a.lengths[i];
            const std::string tag = "l=" + std::to_string(len);
            a.graphs[i] = detail::tagged("embedding " + tag, [&] {
                return build_graph(d, len, params, stage_seed(config.seed, "embedding", len));
            });
            detail::tagged("clustering " + tag, [&] {
                auto f = features(a.graphs[i]);
                a.feature_shapes[i] = {len, f.values.rows, f.node_columns, f.edge_columns()};
                // Same seeding as partition_all: stage seed + graph index.
                a.partitions[i] = kmeans(f.values, k, cluster_seed + i);
                a.partitions[i].length = len;
                if (config.dump_features) a.feature_dumps[i] = std::move(f);
            });
        });
    }

    {
        detail::StageTimer t(a.timings, "consensus");
        a.consensus = detail::tagged("consensus", [&] { return consensus_matrix(a.partitions); });
        a.final_labels = detail::tagged("spectral", [&] {
            return spectral_cluster(a.consensus, k, stage_seed(config.seed, "spectral"));
        });
    }

    {
        detail::StageTimer t(a.timings, "interpretability");
        detail::tagged("interpretability", [&] {
            a.scores.resize(count);
            detail::parallel_for(count, config.threads, [&](std::size_t i) {
                a.scores[i] = {a.lengths[i], consistency(a.final_labels, a.partitions[i]),
                               interpretability_factor(a.graphs[i], a.final_labels)};
            });
            a.selected_length = select_length(a.scores);
            a.selected_index = static_cast<std::size_t>(
                std::find(a.lengths.begin(), a.lengths.end(), a.selected_length) - a.lengths.begin());
            a.selected_stats = node_stats(a.graphs[a.selected_index], a.final_labels);
            for (std::size_t c = 0; c < k; ++c) {
                for (auto kind : {GraphoidKind::Lambda, GraphoidKind::Gamma, GraphoidKind::Combined}) {
                    a.graphoids.push_back(graphoid(a.selected_stats, c, kind, config.lambda, config.gamma));
                }
            }
        });
    }

    {
        detail::StageTimer t(a.timings, "baseline");
        a.baseline = detail::tagged("baseline", [&] { return baseline_kmeans(d, k, stage_seed(config.seed, "baseline")); });
    }
    return a;
}

inline RunArtifact run(const RunConfig& config) {
    validate(config);
    auto d = detail::tagged("load", [&] { return load_dataset(config.dataset, config.format); });
    validate(config, d);
    return run(config, std::move(d));
}

// ---------------------------------------------------------------------------
// JSON

inline std::string to_string(DatasetFormat f) { return f == DatasetFormat::UcrTsv ? "ucr-tsv" : "csv"; }

inline Json graph_to_json(const EmbeddedGraph& g, bool with_assignments = false) {
    Json j;
    j["length"] = g.length;
    Json nodes = Json::array();
    for (const auto& n : g.nodes) {
        nodes.push_back({{"id", n.id},
                         {"x", n.position.x},
                         {"y", n.position.y},
                         {"angle_bin", n.angle_bin},
                         {"radius", n.radius},
                         {"density", n.density}});
    }
    j["nodes"] = std::move(nodes);
    Json edges = Json::array();
    for (const auto& [key, w] : g.edges) edges.push_back({{"src", key.first}, {"dst", key.second}, {"weight", w}});
    j["edges"] = std::move(edges);
    j["paths"] = g.paths;
    if (with_assignments) j["assignments"] = g.assignments;
    return j;
}

inline Json stats_to_json(const ClusterStats& s) {
    return {{"crossing", s.crossing},
            {"total", s.total},
            {"representativity", s.representativity},
            {"exclusivity", s.exclusivity}};
}

inline Json scores_to_json(const Scores& s) {
    return {{"ari", s.ari}, {"ri", s.ri}, {"nmi", s.nmi}, {"purity", s.purity}};
}

/// Deterministic artifact document. Timings are excluded (see write_artifact).
inline Json artifact_to_json(const RunArtifact& a) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["config"] = {{"dataset", a.config.dataset.string()},
                   {"format", to_string(a.config.format)},
                   {"k", a.config.k},
                   {"m", a.config.m},
                   {"seed", a.config.seed},
                   {"sectors", a.config.sectors},
                   {"min_density_frac", a.config.min_density_frac},
                   {"lambda", a.config.lambda},
                   {"gamma", a.config.gamma}};

    Json series = Json::array();
    for (const auto& s : a.dataset.series) series.push_back(s.values);
    j["dataset"] = {{"name", a.dataset.name},
                    {"n_series", a.dataset.size()},
                    {"series", std::move(series)},
                    {"true_labels", a.dataset.true_labels ? Json(*a.dataset.true_labels) : Json(nullptr)}};

    Json lengths = Json::array();
    for (const auto& s : a.scores) lengths.push_back({{"l", s.length}, {"wc", s.wc}, {"we", s.we}, {"product", s.product()}});
    j["lengths"] = std::move(lengths);
    j["selected_length"] = a.selected_length;

    Json graphs = Json::array();
    for (std::size_t i = 0; i < a.graphs.size(); ++i) graphs.push_back(graph_to_json(a.graphs[i], i == a.selected_index));
    j["graphs"] = std::move(graphs);

    Json parts = Json::array();
    for (const auto& p : a.partitions) parts.push_back({{"length", p.length}, {"labels", p.labels}});
    j["partitions"] = std::move(parts);

    Json shapes = Json::array();
    for (const auto& f : a.feature_shapes) {
        shapes.push_back({{"length", f.length},
                          {"rows", f.rows},
                          {"node_columns", f.node_columns},
                          {"edge_columns", f.edge_columns}});
    }
    j["feature_shapes"] = std::move(shapes);

    j["consensus"] = {{"n", a.consensus.size()}, {"partitions", a.consensus.partitions}, {"matrix", a.consensus.values.data}};
    j["final_labels"] = a.final_labels.labels;

    Json ns = Json::array();
    for (const auto& n : a.selected_stats.nodes) {
        Json e = {{"id", n.node}};
        e.update(stats_to_json(n.stats));
        ns.push_back(std::move(e));
    }
    j["node_stats"] = std::move(ns);
    Json es = Json::array();
    for (const auto& s : a.selected_stats.edges) {
        Json e = {{"src", s.edge.first}, {"dst", s.edge.second}};
        e.update(stats_to_json(s.stats));
        es.push_back(std::move(e));
    }
    j["edge_stats"] = std::move(es);
    j["cluster_sizes"] = a.selected_stats.cluster_sizes;

    Json gs = Json::array();
    for (const auto& g : a.graphoids) {
        Json edges = Json::array();
        for (const auto& e : g.edges) edges.push_back({e.first, e.second});
        gs.push_back({{"cluster", g.cluster},
                      {"kind", std::string(to_string(g.kind))},
                      {"lambda", g.lambda},
                      {"gamma", g.gamma},
                      {"nodes", g.nodes},
                      {"edges", std::move(edges)}});
    }
    j["graphoids"] = std::move(gs);

    j["baseline"] = {{"method", "kmeans"}, {"labels", a.baseline.labels}};

    Json eval;
    if (a.dataset.true_labels) {
        eval["kgraph"] = scores_to_json(score_all(a.final_labels.labels, *a.dataset.true_labels));
        eval["baseline"] = scores_to_json(score_all(a.baseline.labels, *a.dataset.true_labels));
    }
    eval["kgraph_vs_baseline_ari"] = a.final_labels.size() >= 2 ? ari(a.final_labels.labels, a.baseline.labels) : 1.0;
    j["evaluation"] = std::move(eval);
    return j;
}

inline std::string dump_artifact(const RunArtifact& a) { return artifact_to_json(a).dump(1) + "\n"; }

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << text;
}

inline void write_features_csv(const std::filesystem::path& path, const FeatureMatrix& f) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << "series";
    for (int id : f.node_ids) out << ",node_" << id;
    for (const auto& [s, t] : f.edge_keys) out << ",edge_" << s << "_" << t;
    out << '\n';
    char buf[32];
    for (std::size_t r = 0; r < f.values.rows; ++r) {
        out << r;
        for (double v : f.values.row(r)) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out << ',' << buf;
        }
        out << '\n';
    }
}

/// Writes <out>/artifact.json (deterministic) and <out>/timings.json (wall-clock sidecar).
inline std::filesystem::path write_artifact(const RunArtifact& a, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    const auto path = out_dir / "artifact.json";
    write_text(path, dump_artifact(a));
    Json timings = Json::object();
    for (const auto& [stage, secs] : a.timings) timings[stage] = secs;
    write_text(out_dir / "timings.json", timings.dump(1) + "\n");
    for (std::size_t i = 0; i < a.feature_dumps.size(); ++i) {
        write_features_csv(out_dir / ("features_l" + std::to_string(a.lengths[i]) + ".csv"), a.feature_dumps[i]);
    }
    return path;
}

} // namespace kgraph
