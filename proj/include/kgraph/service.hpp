#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <numeric>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "errors.hpp"
#include "interpretability.hpp"
#include "timeseries.hpp"

// Read-only JSON API over run artifacts. Handlers return (status, body) so they
// can be exercised without a socket; http.hpp wires them to cpp-httplib.
namespace kgraph::service {

using Json = nlohmann::ordered_json;

struct Response {
    int status = 200;
    Json body;
};

inline Response error(int status, const std::string& message) { return {status, {{"error", message}}}; }

inline constexpr std::size_t kMaxDisplayPoints = 1024;

/// Uniform-stride indices into a series of length n, at most `max_points`,
/// always keeping the first and last point.
inline std::vector<std::size_t> downsample_indices(std::size_t n, std::size_t max_points = kMaxDisplayPoints) {
    std::vector<std::size_t> idx;
    if (n == 0) return idx;
    if (n <= max_points) {
        idx.resize(n);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        return idx;
    }
    idx.reserve(max_points);
    for (std::size_t i = 0; i < max_points; ++i) idx.push_back(i * (n - 1) / (max_points - 1));
    return idx;
}

/// Structural checks an artifact must pass to be served. Throws Error.
inline void validate_artifact(const Json& a) {
    auto need = [&](const char* key) {
        if (!a.contains(key)) throw Error(std::string("missing field '") + key + "'");
    };
    if (!a.is_object()) throw Error("artifact is not a JSON object");
    need("schema_version");
    if (a["schema_version"] != 1) throw Error("unsupported schema_version");
    for (const char* key : {"config", "dataset", "lengths", "selected_length", "graphs", "partitions",
                            "feature_shapes", "consensus", "final_labels", "node_stats", "edge_stats",
                            "cluster_sizes", "baseline", "evaluation"}) {
        need(key);
    }
    const auto n = a["dataset"]["series"].size();
    if (a["final_labels"].size() != n || a["baseline"]["labels"].size() != n) {
        throw Error("label vectors do not match the number of series");
    }
    const auto selected = a["selected_length"].get<std::size_t>();
    const Json* graph = nullptr;
    for (const auto& g : a["graphs"]) {
        if (g["length"].get<std::size_t>() == selected) graph = &g;
    }
    if (graph == nullptr || !graph->contains("assignments")) throw Error("selected graph missing");
    const auto nodes = (*graph)["nodes"].size();
    for (const auto& s : a["node_stats"]) {
        if (s["id"].get<std::size_t>() >= nodes) throw Error("node_stats references unknown node");
    }
    for (const auto& s : a["edge_stats"]) {
        if (s["src"].get<std::size_t>() >= nodes || s["dst"].get<std::size_t>() >= nodes) {
            throw Error("edge_stats references unknown node");
        }
    }
}

/// Discovers artifacts under a directory and caches parsed documents.
/// Layouts: DIR/<id>/artifact.json or DIR/<id>.json. Loads are lazy and
/// single-flight per id; invalid artifacts are cached as null.
class ArtifactStore {
public:
    using Doc = std::shared_ptr<const Json>;

    explicit ArtifactStore(std::filesystem::path dir) : dir_(std::move(dir)) {}

    const std::filesystem::path& directory() const noexcept { return dir_; }

    std::map<std::string, std::filesystem::path> discover() const {
        std::map<std::string, std::filesystem::path> found;
        std::error_code ec;
        for (const auto& entry : std::filesystem::directory_iterator(dir_, ec)) {
            const auto& p = entry.path();
            if (entry.is_directory() && std::filesystem::exists(p / "artifact.json")) {
                found.emplace(p.filename().string(), p / "artifact.json");
            } else if (entry.is_regular_file() && p.extension() == ".json" && p.filename() != "timings.json") {
                found.emplace(p.stem().string(), p);
            }
        }
        return found;
    }

    /// nullptr when the id is unknown or the artifact is invalid.
    Doc get(const std::string& id) {
        std::promise<Doc> promise;
        std::shared_future<Doc> future;
        std::optional<std::filesystem::path> to_load;
        {
            std::lock_guard lock(mutex_);
            if (auto it = cache_.find(id); it != cache_.end()) {
                future = it->second;
            } else {
                const auto all = discover();
                const auto path = all.find(id);
                if (path == all.end()) return nullptr;
                future = promise.get_future().share();
                cache_.emplace(id, future);
                to_load = path->second;
            }
        }
        if (to_load) promise.set_value(load(id, *to_load));
        return future.get();
    }

private:
    static Doc load(const std::string& id, const std::filesystem::path& path) {
        try {
            std::ifstream in(path);
            auto doc = std::make_shared<Json>(Json::parse(in));
            validate_artifact(*doc);
            return doc;
        } catch (const std::exception& e) {
            std::cerr << "warning: skipping artifact '" << id << "': " << e.what() << "\n";
            return nullptr;
        }
    }

    std::filesystem::path dir_;
    std::mutex mutex_;
    std::map<std::string, std::shared_future<Doc>> cache_;
};

namespace detail {

inline const Json& selected_graph(const Json& a) {
    const auto selected = a["selected_length"].get<std::size_t>();
    for (const auto& g : a["graphs"]) {
        if (g["length"].get<std::size_t>() == selected) return g;
    }
    throw Error("selected graph missing");
}

inline ClusterStats stats_from_json(const Json& j) {
    ClusterStats s;
    s.crossing = j["crossing"].get<std::vector<std::size_t>>();
    s.total = j["total"].get<std::size_t>();
    s.representativity = j["representativity"].get<std::vector<double>>();
    s.exclusivity = j["exclusivity"].get<std::vector<double>>();
    return s;
}

inline Json stats_view(const Json& j) {
    return {{"crossing", j["crossing"]},
            {"total", j["total"]},
            {"representativity", j["representativity"]},
            {"exclusivity", j["exclusivity"]}};
}

inline std::optional<double> parse_threshold(const std::optional<std::string>& raw, double fallback) {
    if (!raw) return fallback;
    const auto v = kgraph::detail::parse_number(*raw);
    if (!v || !(*v >= 0.0 && *v <= 1.0)) return std::nullopt;
    return *v;
}

inline Json grouping(const std::vector<int>& labels) {
    int k = 0;
    for (int l : labels) k = std::max(k, l + 1);
    Json groups = Json::array();
    for (int c = 0; c < k; ++c) {
        Json members = Json::array();
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] == c) members.push_back(i);
        }
        groups.push_back(std::move(members));
    }
    return {{"labels", labels}, {"groups", std::move(groups)}};
}

} // namespace detail

class ExplorerService {
public:
    explicit ExplorerService(std::filesystem::path artifacts) : store_(std::move(artifacts)) {}

    ArtifactStore& store() noexcept { return store_; }

    Response runs() {
        Json out = Json::array();
        for (const auto& [id, path] : store_.discover()) {
            const auto a = store_.get(id);
            if (!a) continue;
            const auto& doc = *a;
            Json summary = {{"id", id},
                            {"dataset", doc["dataset"]["name"]},
                            {"k", doc["config"]["k"]},
                            {"n_series", doc["dataset"]["n_series"]},
                            {"selected_length", doc["selected_length"]}};
            const auto& eval = doc["evaluation"];
            summary["ari_kgraph"] = eval.contains("kgraph") ? eval["kgraph"]["ari"] : Json(nullptr);
            summary["ari_baseline"] = eval.contains("baseline") ? eval["baseline"]["ari"] : Json(nullptr);
            out.push_back(std::move(summary));
        }
        return {200, std::move(out)};
    }

    Response graph(const std::string& id, const std::optional<std::string>& lambda_raw,
                   const std::optional<std::string>& gamma_raw) {
        const auto a = store_.get(id);
        if (!a) return error(404, "unknown run '" + id + "'");
        const auto& doc = *a;
        const auto lambda = detail::parse_threshold(lambda_raw, doc["config"]["lambda"].get<double>());
        const auto gamma = detail::parse_threshold(gamma_raw, doc["config"]["gamma"].get<double>());
        if (!lambda || !gamma) return error(400, "lambda and gamma must be numbers in [0, 1]");

        const auto& g = detail::selected_graph(doc);
        std::vector<std::size_t> members(g["nodes"].size(), 0);
        for (const auto& row : g["assignments"]) {
            for (const auto& n : row) ++members[n.get<std::size_t>()];
        }
        Json nodes = Json::array();
        std::size_t colored_nodes = 0;
        for (const auto& n : g["nodes"]) {
            const auto id_n = n["id"].get<std::size_t>();
            const auto& sj = doc["node_stats"][id_n];
            const auto s = detail::stats_from_json(sj);
            const bool c = colored(s, *lambda, *gamma);
            colored_nodes += c ? 1 : 0;
            Json node = n;
            node["members"] = members[id_n];
            node["cluster"] = s.dominant_cluster();
            node["stats"] = detail::stats_view(sj);
            node["colored"] = c;
            nodes.push_back(std::move(node));
        }
        Json edges = Json::array();
        std::size_t colored_edges = 0;
        std::size_t i = 0;
        for (const auto& e : g["edges"]) {
            const auto& sj = doc["edge_stats"][i++];
            const auto s = detail::stats_from_json(sj);
            const bool c = colored(s, *lambda, *gamma);
            colored_edges += c ? 1 : 0;
            Json edge = e;
            edge["cluster"] = s.dominant_cluster();
            edge["stats"] = detail::stats_view(sj);
            edge["colored"] = c;
            edges.push_back(std::move(edge));
        }
        return {200,
                {{"run", id},
                 {"length", g["length"]},
                 {"k", doc["config"]["k"]},
                 {"lambda", *lambda},
                 {"gamma", *gamma},
                 {"colored_nodes", colored_nodes},
                 {"colored_edges", colored_edges},
                 {"nodes", std::move(nodes)},
                 {"edges", std::move(edges)}}};
    }

    Response node(const std::string& id, const std::string& node_raw) {
        const auto a = store_.get(id);
        if (!a) return error(404, "unknown run '" + id + "'");
        const auto& doc = *a;
        const auto& g = detail::selected_graph(doc);
        const auto parsed = kgraph::detail::parse_number(node_raw);
        if (!parsed || *parsed < 0 || *parsed != std::floor(*parsed) ||
            *parsed >= static_cast<double>(g["nodes"].size())) {
            return error(404, "unknown node '" + node_raw + "'");
        }
        const auto node_id = static_cast<std::size_t>(*parsed);
        const auto length = g["length"].get<std::size_t>();
        Json members = Json::array();
        const auto& assignments = g["assignments"];
        for (std::size_t s = 0; s < assignments.size(); ++s) {
            for (std::size_t start = 0; start < assignments[s].size(); ++start) {
                if (assignments[s][start].get<std::size_t>() == node_id) {
                    members.push_back({{"series_id", s}, {"start", start}, {"length", length}});
                }
            }
        }
        return {200,
                {{"run", id},
                 {"node", g["nodes"][node_id]},
                 {"length", length},
                 {"stats", detail::stats_view(doc["node_stats"][node_id])},
                 {"members", std::move(members)}}};
    }

    Response clusters(const std::string& id) {
        const auto a = store_.get(id);
        if (!a) return error(404, "unknown run '" + id + "'");
        const auto& doc = *a;
        Json series = Json::array();
        std::size_t sid = 0;
        for (const auto& s : doc["dataset"]["series"]) {
            const auto idx = downsample_indices(s.size());
            Json x = Json::array();
            Json y = Json::array();
            for (auto i : idx) {
                x.push_back(i);
                y.push_back(s[i]);
            }
            series.push_back({{"id", sid++}, {"length", s.size()}, {"x", std::move(x)}, {"values", std::move(y)}});
        }
        const auto& truth = doc["dataset"]["true_labels"];
        Json groupings = {{"kgraph", detail::grouping(doc["final_labels"].get<std::vector<int>>())},
                          {"baseline", detail::grouping(doc["baseline"]["labels"].get<std::vector<int>>())},
                          {"truth", truth.is_null() ? Json(nullptr) : detail::grouping(truth.get<std::vector<int>>())}};
        return {200,
                {{"run", id},
                 {"series", std::move(series)},
                 {"groupings", std::move(groupings)},
                 {"metrics", doc["evaluation"]}}};
    }

    Response underhood(const std::string& id) {
        const auto a = store_.get(id);
        if (!a) return error(404, "unknown run '" + id + "'");
        const auto& doc = *a;
        Json lengths = Json::array(), wc = Json::array(), we = Json::array(), product = Json::array();
        for (const auto& s : doc["lengths"]) {
            lengths.push_back(s["l"]);
            wc.push_back(s["wc"]);
            we.push_back(s["we"]);
            product.push_back(s["product"]);
        }
        return {200,
                {{"run", id},
                 {"lengths", std::move(lengths)},
                 {"wc", std::move(wc)},
                 {"we", std::move(we)},
                 {"product", std::move(product)},
                 {"selected_length", doc["selected_length"]},
                 {"final_labels", doc["final_labels"]},
                 {"consensus", doc["consensus"]},
                 {"feature_shapes", doc["feature_shapes"]}}};
    }

private:
    ArtifactStore store_;
};

} // namespace kgraph::service
