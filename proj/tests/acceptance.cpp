// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

#include "fixtures.hpp"
#include "kgraph/pipeline.hpp"

using namespace kgraph;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok && pass) {
            pass = false;
            detail = what;
        }
    }
};

RunConfig config(std::size_t k, std::size_t threads = 1) {
    RunConfig c;
    c.k = k;
    c.threads = threads;
    return c;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double variance_along(const std::vector<std::vector<double>>& x, const std::vector<double>& dir) {
    double mean = 0.0;
    std::vector<double> proj;
    for (const auto& v : x) proj.push_back(dot(v, dir));
    for (double p : proj) mean += p;
    mean /= static_cast<double>(proj.size());
    double var = 0.0;
    for (double p : proj) var += (p - mean) * (p - mean);
    return var / static_cast<double>(proj.size());
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

Outcome synthetic_recovery() {
    Outcome o;
    for (std::uint64_t seed : {7u, 8u, 9u}) {
        const auto d = fixtures::sine_square(20, 128, 0.1, seed);
        const auto t0 = std::chrono::steady_clock::now();
        const auto a = run(config(2), d);
        const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
        const double score = ari(a.final_labels.labels, *d.true_labels);
        o.require(score >= 0.9, "seed " + std::to_string(seed) + ": ARI " + fmt("%.3f", score));
        o.require(dt.count() < 60.0, "seed " + std::to_string(seed) + ": " + fmt("%.1f s", dt.count()));
    }
    return o;
}

Outcome interpretability_soundness() {
    Outcome o;
    const auto d = fixtures::private_motifs();
    const auto a = run(config(3), d);
    const double we = a.scores[a.selected_index].we;
    o.require(we >= 0.8, "W_e at selected length " + fmt("%.3f", we));
    for (std::size_t c = 0; c < 3; ++c) {
        const auto g = graphoid(a.selected_stats, c, GraphoidKind::Gamma, 0.0, 0.8);
        o.require(!g.nodes.empty() || !g.edges.empty(), "empty gamma graphoid for cluster " + std::to_string(c));
    }
    return o;
}

Outcome ari_oracle() {
    Outcome o;
    Rng rng(2024);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 2 + uniform_index(rng, 199);
        const auto x = fixtures::random_labels(rng, n, 1 + uniform_index(rng, 10));
        const auto y = fixtures::random_labels(rng, n, 1 + uniform_index(rng, 10));
        const double err = std::abs(ari(x, y) - fixtures::ari_pair_oracle(x, y));
        o.require(err <= 1e-12, "trial " + std::to_string(trial) + " error " + fmt("%.3g", err));
    }
    o.require(ari(std::vector{0, 0, 1, 1}, std::vector{0, 1, 0, 1}) == -0.5, "ARI([0,0,1,1],[0,1,0,1]) != -0.5");
    return o;
}

void check_consensus(Outcome& o, const ConsensusMatrix& mc) {
    const std::size_t n = mc.size();
    const double m = static_cast<double>(mc.partitions);
    for (std::size_t i = 0; i < n; ++i) {
        o.require(mc.values(i, i) == 1.0, "diagonal not 1");
        for (std::size_t j = 0; j < n; ++j) {
            const double v = mc.values(i, j);
            o.require(v == mc.values(j, i), "not symmetric");
            const double nearest = std::round(v * m) / m;
            o.require(std::abs(v - nearest) <= 1e-12 && v >= 0.0 && v <= 1.0, "entry not a multiple of 1/M in [0,1]");
        }
    }
}

Outcome consensus_properties() {
    Outcome o;
    Rng rng(77);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 2 + uniform_index(rng, 50);
        const std::size_t m = 1 + uniform_index(rng, 10);
        std::vector<Partition> parts;
        for (std::size_t p = 0; p < m; ++p) parts.push_back({fixtures::random_labels(rng, n, 4), 4, 0});
        check_consensus(o, consensus_matrix(parts));
    }
    check_consensus(o, run(config(2), fixtures::sine_square()).consensus);
    check_consensus(o, run(config(3), fixtures::private_motifs()).consensus);
    Matrix blocks(20, 20);
    std::vector<int> truth(20);
    for (std::size_t i = 0; i < 20; ++i) {
        truth[i] = i < 10 ? 0 : 1;
        for (std::size_t j = 0; j < 20; ++j) blocks(i, j) = (i < 10) == (j < 10) ? 1.0 : 0.0;
    }
    o.require(ari(spectral_cluster(blocks, 2, 1).labels, truth) == 1.0, "10+10 block matrix not recovered");
    return o;
}

Outcome graphoid_monotonicity() {
    Outcome o;
    const auto a = run(config(3), fixtures::private_motifs(8));
    Rng rng(5);
    for (std::size_t g = 0; g < a.graphs.size(); ++g) {
        const auto stats = node_stats(a.graphs[g], a.final_labels);
        for (int trial = 0; trial < 20; ++trial) {
            const double lo = uniform01(rng), hi = lo + (1.0 - lo) * uniform01(rng);
            for (std::size_t c = 0; c < 3; ++c) {
                for (auto kind : {GraphoidKind::Lambda, GraphoidKind::Gamma, GraphoidKind::Combined}) {
                    const auto big = graphoid(stats, c, kind, lo, lo);
                    const auto small = graphoid(stats, c, kind, hi, hi);
                    o.require(std::includes(big.nodes.begin(), big.nodes.end(), small.nodes.begin(), small.nodes.end()) &&
                                  std::includes(big.edges.begin(), big.edges.end(), small.edges.begin(),
                                                small.edges.end()),
                              "raising thresholds added elements");
                }
            }
        }
        for (const auto& n : stats.nodes) {
            double sum = 0.0;
            for (double e : n.stats.exclusivity) sum += e;
            o.require(n.stats.total == 0 || std::abs(sum - 1.0) <= 1e-9, "node exclusivities do not sum to 1");
        }
    }
    return o;
}

Outcome pca_and_kmeans() {
    Outcome o;
    const auto d = fixtures::sine_square();
    const std::size_t l = 16;
    std::vector<std::vector<double>> x;
    for (const auto& s : d.series) {
        for (const auto& sub : extract_subsequences(s, l)) x.push_back(znormalize(sub.values));
    }
    const auto p = fit_projection(x, l, 1);
    o.require(std::abs(dot(p.pc1, p.pc2)) <= 1e-8, "PCs not orthogonal");
    o.require(std::abs(std::sqrt(dot(p.pc1, p.pc1)) - 1.0) <= 1e-8, "PC1 not unit");
    o.require(std::abs(std::sqrt(dot(p.pc2, p.pc2)) - 1.0) <= 1e-8, "PC2 not unit");
    const double v1 = variance_along(x, p.pc1);
    Rng rng(3);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> dir(l);
        for (auto& c : dir) c = normal01(rng);
        const double n = std::sqrt(dot(dir, dir));
        for (auto& c : dir) c /= n;
        o.require(v1 + 1e-9 >= variance_along(x, dir), "random direction beats PC1");
    }
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto m = fixtures::blobs(4, 30, 6, 2.0, seed);
        const auto r = kmeans_detailed(m, 3 + seed % 4, seed);
        for (std::size_t i = 1; i < r.objective_trace.size(); ++i) {
            o.require(r.objective_trace[i] <= r.objective_trace[i - 1] * (1 + 1e-12), "k-means objective increased");
        }
    }
    return o;
}

Outcome determinism() {
    Outcome o;
    const auto d = fixtures::private_motifs(8);
    const auto ref = dump_artifact(run(config(3, 1), d));
    o.require(ref == dump_artifact(run(config(3, 1), d)), "rerun differs");
    o.require(ref == dump_artifact(run(config(3, 2), d)), "2 workers differ");
    o.require(ref == dump_artifact(run(config(3, 4), d)), "4 workers differ");
    return o;
}

Outcome accounting() {
    Outcome o;
    auto d = fixtures::sine_square(10, 128, 0.1, 4);
    d.series[3].values.resize(100);
    d.series[15].values.resize(90);
    for (auto l : candidate_lengths(d, 10)) {
        const auto g = build_graph(d, l, {}, l);
        std::size_t members = 0, expected = 0;
        for (const auto& m : g.node_members()) members += m.size();
        for (const auto& s : d.series) expected += s.size() - l + 1;
        o.require(members == expected, "member count mismatch at l=" + std::to_string(l));
        const auto f = features(g);
        for (std::size_t r = 0; r < f.values.rows; ++r) {
            double nodes = 0.0, edges = 0.0;
            for (std::size_t c = 0; c < f.values.cols; ++c) (c < f.node_columns ? nodes : edges) += f.values(r, c);
            o.require(std::abs(nodes - 1.0) <= 1e-9, "node block does not sum to 1");
            o.require(std::abs(edges - 1.0) <= 1e-9 || edges == 0.0, "edge block sums to neither 1 nor 0");
        }
    }
    return o;
}

} // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"synthetic recovery: sine vs square ARI >= 0.9 in under 60 s", synthetic_recovery},
        {"interpretability: non-empty gamma=0.8 graphoids and W_e >= 0.8 on private motifs",
         interpretability_soundness},
        {"ARI matches pair-count oracle on 1000 random pairs; -0.5 example exact", ari_oracle},
        {"consensus matrix symmetric, unit diagonal, multiples of 1/M; block matrix recovered",
         consensus_properties},
        {"graphoids shrink as thresholds rise; node exclusivities sum to 1", graphoid_monotonicity},
        {"PCA orthonormal and PC1 maximal; k-means objective non-increasing", pca_and_kmeans},
        {"artifact byte-identical across reruns and worker counts", determinism},
        {"subsequence accounting and feature block normalization", accounting},
    };
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (o.pass) {
            std::printf("PASS  %s\n", name);
        } else {
            std::printf("FAIL  %s (%s)\n", name, o.detail.c_str());
            ++failed;
        }
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
