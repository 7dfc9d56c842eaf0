// kgraph command line: run the pipeline, serve artifacts, compare label files.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "kgraph/evaluation.hpp"
#include "kgraph/http.hpp"
#include "kgraph/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

std::vector<int> read_labels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw kgraph::ConfigError("cannot read label file '" + path + "'");
    const auto j = nlohmann::json::parse(in);
    if (j.is_array()) return j.get<std::vector<int>>();
    if (j.contains("labels")) return j["labels"].get<std::vector<int>>();
    if (j.contains("final_labels")) return j["final_labels"].get<std::vector<int>>();
    throw kgraph::ConfigError("'" + path + "' holds no label array");
}

int cmd_run(const kgraph::RunConfig& cfg) {
    const auto artifact = kgraph::run(cfg);
    const auto path = kgraph::write_artifact(artifact, cfg.out);
    std::printf("lengths   : %zu candidate(s), selected l = %zu\n", artifact.lengths.size(),
                artifact.selected_length);
    if (artifact.dataset.true_labels) {
        const auto& truth = *artifact.dataset.true_labels;
        std::printf("ARI       : k-graph %.4f, baseline k-means %.4f\n", kgraph::ari(artifact.final_labels.labels, truth),
                    kgraph::ari(artifact.baseline.labels, truth));
    }
    std::printf("artifact  : %s\n", path.string().c_str());
    return kExitOk;
}

int cmd_metrics(const std::string& a_path, const std::string& b_path) {
    const auto a = read_labels(a_path);
    const auto b = read_labels(b_path);
    if (a.size() != b.size()) throw kgraph::ConfigError("label files differ in length");
    if (a.size() < 2) throw kgraph::ConfigError("need at least 2 labels");
    const auto s = kgraph::score_all(a, b);
    std::printf("ARI    %.6f\nRI     %.6f\nNMI    %.6f\npurity %.6f\n", s.ari, s.ri, s.nmi, s.purity);
    return kExitOk;
}

int cmd_serve(const std::string& dir, const std::string& host, int port) {
    kgraph::service::ExplorerService svc(dir);
    auto server = kgraph::service::make_http_server(svc);
    std::printf("serving %s on http://%s:%d\n", dir.c_str(), host.c_str(), port);
    std::fflush(stdout);
    if (!server->listen(host, port)) {
        std::fprintf(stderr, "error: cannot listen on %s:%d\n", host.c_str(), port);
        return kExitRuntime;
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"k-Graph time series clustering"};
    app.require_subcommand(1);

    kgraph::RunConfig cfg;
    std::string format = "ucr-tsv";
    auto* run = app.add_subcommand("run", "cluster a dataset and write a run artifact");
    run->add_option("--dataset", cfg.dataset, "dataset file")->required();
    run->add_option("--format", format, "ucr-tsv or csv")->check(CLI::IsMember({"ucr-tsv", "csv"}));
    run->add_option("--k", cfg.k, "number of clusters")->required();
    run->add_option("--m", cfg.m, "number of candidate subsequence lengths")->capture_default_str();
    run->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
    run->add_option("--sectors", cfg.sectors, "angular sectors of the radial scan")->capture_default_str();
    run->add_option("--min-density", cfg.min_density_frac, "KDE peak threshold relative to sector max")
        ->capture_default_str();
    run->add_option("--lambda", cfg.lambda, "representativity threshold")->capture_default_str();
    run->add_option("--gamma", cfg.gamma, "exclusivity threshold")->capture_default_str();
    run->add_option("--out", cfg.out, "output directory")->required();
    run->add_option("--threads", cfg.threads, "worker threads across lengths")->capture_default_str();
    run->add_flag("--dump-features", cfg.dump_features, "also write per-length feature matrices as CSV");

    std::string artifacts;
    std::string host = "127.0.0.1";
    int port = 8080;
    auto* serve = app.add_subcommand("serve", "serve run artifacts over HTTP");
    serve->add_option("--artifacts", artifacts, "directory of run artifacts")->required();
    serve->add_option("--host", host)->capture_default_str();
    serve->add_option("--port", port)->capture_default_str();

    std::string labels_a, labels_b;
    auto* metrics = app.add_subcommand("metrics", "compare two label files (JSON arrays)");
    metrics->add_option("a", labels_a)->required();
    metrics->add_option("b", labels_b)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return kExitConfig;
    }

    try {
        if (*run) {
            cfg.format = format == "csv" ? kgraph::DatasetFormat::Csv : kgraph::DatasetFormat::UcrTsv;
            return cmd_run(cfg);
        }
        if (*serve) return cmd_serve(artifacts, host, port);
        if (*metrics) return cmd_metrics(labels_a, labels_b);
    } catch (const kgraph::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitRuntime;
}
