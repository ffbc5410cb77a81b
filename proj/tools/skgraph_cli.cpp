// skgraph: index a labeled image corpus as a clustered signature graph and
// query it. Subcommands: index, query, bench, inspect, calibrate, gen-corpus.

#include <CLI11.hpp>

#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "skgraph/corpus.hpp"
#include "skgraph/eval.hpp"
#include "skgraph/image.hpp"
#include "skgraph/store.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitIndexFormat = 3;

struct Options {
    skg::SignatureConfig sig;
    skg::FeatureConfig feat;
    double theta = 0.25;
    int k_edge = 3;
    int k_query = 3;
    int topk = 20;
    std::string palette_path;
    bool deterministic = false;
    bool leave_self_out = false;
    int threads = 0;
};

// Defaults may come from a JSON config named by SKGRAPH_CONFIG; command-line
// flags override it.
void apply_config_file(Options& o) {
    const char* path = std::getenv("SKGRAPH_CONFIG");
    if (!path || !*path) return;
    std::ifstream in(path);
    if (!in)
        throw skg::data_error(std::string("cannot open SKGRAPH_CONFIG file: ") +
                              path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw skg::data_error(std::string("bad JSON in SKGRAPH_CONFIG: ") +
                              e.what());
    }
    auto get = [&](const char* key, auto& out) {
        if (j.contains(key)) out = j.at(key).get<std::decay_t<decltype(out)>>();
    };
    get("theta", o.theta);
    get("k_edge", o.k_edge);
    get("k_query", o.k_query);
    get("topk", o.topk);
    get("n_bins", o.sig.n_bins);
    get("m", o.sig.m);
    get("offset", o.sig.offset);
    get("n_max", o.sig.n_max);
    get("alpha", o.feat.alpha);
    get("sigma_d", o.feat.sigma_d);
    get("sigma_i", o.feat.sigma_i);
    get("percentile", o.feat.percentile);
    get("size", o.feat.size);
    get("palette", o.palette_path);
    get("deterministic", o.deterministic);
    get("threads", o.threads);
}

void add_signature_flags(CLI::App* cmd, Options& o) {
    cmd->add_option("--n-bins", o.sig.n_bins, "Histogram bins (= palette size)");
    cmd->add_option("--m", o.sig.m, "Bits per signature block");
    cmd->add_option("--offset", o.sig.offset, "Encoder offset in [0,1)");
    cmd->add_option("--n-max", o.sig.n_max, "Maximum regions per image");
    cmd->add_option("--alpha", o.feat.alpha, "Corner response trace weight");
    cmd->add_option("--sigma-d", o.feat.sigma_d, "Differentiation scale");
    cmd->add_option("--sigma-i", o.feat.sigma_i, "Integration scale");
    cmd->add_option("--percentile", o.feat.percentile,
                    "Detection threshold percentile");
    cmd->add_option("--size", o.feat.size, "Standardized image side");
    cmd->add_option("--palette", o.palette_path,
                    "Palette file (one R G B triple per line)");
    cmd->add_option("--threads", o.threads, "Extraction workers (0 = auto)");
}

skg::Palette resolve_palette(const Options& o) {
    return o.palette_path.empty() ? skg::Palette::uniform_lattice()
                                  : skg::Palette::load(o.palette_path);
}

skg::ImageDescriptor extract_query_descriptor(const skg::Index& index,
                                              const std::string& image_path) {
    skg::RasterImage img = skg::decode_image(image_path);
    return skg::extract_descriptor(img, "__query__", index.graph.config(),
                                   index.feat, index.palette);
}

int cmd_index(const std::string& manifest, const std::string& out_path,
              const Options& o) {
    auto corpus = skg::LabeledCorpus::load(manifest);
    auto palette = resolve_palette(o);
    auto extraction =
        skg::extract_corpus(corpus, o.sig, o.feat, palette, o.threads);
    for (const auto& [oid, why] : extraction.failures)
        std::cerr << "warning: skipping " << oid << ": " << why << "\n";
    auto descriptors = std::move(extraction.descriptors);
    if (descriptors.empty())
        throw skg::data_error("no image in the manifest could be indexed");
    if (o.deterministic)
        std::sort(descriptors.begin(), descriptors.end(),
                  [](const auto& a, const auto& b) { return a.oid < b.oid; });

    auto graph = skg::SKGraph::build(descriptors, o.sig, o.theta, o.k_edge);
    skg::save_index(skg::Index{o.feat, palette, graph}, out_path);

    std::cout << "indexed " << graph.size() << " of " << corpus.size()
              << " images into " << graph.clusters().size() << " clusters\n";
    std::cout << "mean occupancy " << graph.mean_occupancy() << ", "
              << graph.edges().size() << " edges\n";
    std::cout << "build comparisons " << graph.build_stats().phi_evaluations
              << ", extraction " << extraction.wall_time_seconds
              << " s, build " << graph.build_stats().wall_time_seconds << " s\n";
    return kExitOk;
}

int cmd_query(const std::string& index_path, const std::string& image_path,
              int k_query, int topk) {
    auto index = skg::load_index(index_path);
    if (index.graph.size() == 0)
        throw skg::data_error("index is empty: " + index_path);
    auto q = extract_query_descriptor(index, image_path);
    if (!q.has_regions())
        std::cerr << "warning: no feature regions in the query image\n";
    auto [hits, stats] = index.graph.query(q, k_query);

    char phi_text[32];
    int rank = 1;
    for (const auto& h : hits) {
        if (topk >= 0 && rank > topk) break;
        std::snprintf(phi_text, sizeof(phi_text), "%.6f", h.phi);
        std::cout << rank << " " << h.oid << " " << phi_text << "\n";
        ++rank;
    }
    std::cout << "# phi_evaluations=" << stats.phi_evaluations
              << " clusters_visited=" << stats.clusters_visited
              << " candidates=" << stats.candidates_returned
              << " wall_time_ms=" << stats.wall_time_seconds * 1e3 << "\n";
    return kExitOk;
}

int cmd_bench(const std::string& manifest, const std::string& out_path,
              const Options& o) {
    auto corpus = skg::LabeledCorpus::load(manifest);
    skg::BenchOptions bopt;
    bopt.sig = o.sig;
    bopt.feat = o.feat;
    bopt.palette = resolve_palette(o);
    bopt.theta = o.theta;
    bopt.k_edge = o.k_edge;
    bopt.k_query = o.k_query;
    bopt.top_k = o.topk;
    bopt.deterministic = o.deterministic;
    bopt.leave_self_out = o.leave_self_out;
    bopt.threads = o.threads;
    auto report = skg::run_benchmark(corpus, bopt);

    for (const auto& [oid, why] : report.extraction_failures)
        std::cerr << "warning: skipping " << oid << ": " << why << "\n";
    std::cerr << "clusters " << report.cluster_count << ", mean occupancy "
              << report.mean_occupancy << "\n";
    std::cerr << "build comparisons " << report.skgraph_build.phi_evaluations
              << " in " << report.skgraph_build.wall_time_seconds << " s\n";
    auto graph_agg = report.aggregate("skgraph");
    auto ssf_agg = report.aggregate("ssf");
    std::cerr << "mean comparisons/query: skgraph "
              << graph_agg.mean_phi_evaluations << " vs ssf "
              << ssf_agg.mean_phi_evaluations << "\n";

    if (out_path.empty()) {
        report.write_csv(std::cout);
    } else {
        std::ofstream out(out_path);
        if (!out) throw skg::data_error("cannot write report: " + out_path);
        report.write_csv(out);
        std::cout << "report written to " << out_path << "\n";
    }
    return kExitOk;
}

int cmd_inspect(const std::string& index_path, bool with_signatures) {
    auto index = skg::load_index(index_path);
    const auto& g = index.graph;
    std::cout << g.clusters().size() << " clusters, " << g.edges().size()
              << " edges, " << g.size() << " descriptors\n";
    std::cout << "theta " << g.theta() << ", k_edge " << g.k_edge()
              << ", n_bins " << g.config().n_bins << ", m " << g.config().m
              << ", palette checksum " << index.palette.checksum() << "\n";
    for (std::size_t i = 0; i < g.clusters().size(); ++i) {
        const auto& c = g.clusters()[i];
        std::cout << "cluster " << i << " center="
                  << g.descriptors()[c.center].oid << " k=" << c.k
                  << " radius=" << c.k * g.theta()
                  << " members=" << c.members.size() << "\n";
        if (with_signatures)
            std::cout << "  sig " << skg::serialize(g.descriptors()[c.center].signature)
                      << "\n";
    }
    for (const auto& e : g.edges())
        std::cout << "edge " << e.a << " " << e.b << " weight=" << e.weight
                  << "\n";
    return kExitOk;
}

int cmd_calibrate(const std::string& manifest, std::vector<double> thetas,
                  const Options& o) {
    if (thetas.empty()) thetas = {0.05, 0.1, 0.25, 0.5, 1.0};
    auto corpus = skg::LabeledCorpus::load(manifest);
    auto palette = resolve_palette(o);
    auto extraction =
        skg::extract_corpus(corpus, o.sig, o.feat, palette, o.threads);
    for (const auto& [oid, why] : extraction.failures)
        std::cerr << "warning: skipping " << oid << ": " << why << "\n";
    if (extraction.descriptors.empty())
        throw skg::data_error("no image in the manifest could be extracted");
    auto descriptors = std::move(extraction.descriptors);
    if (o.deterministic)
        std::sort(descriptors.begin(), descriptors.end(),
                  [](const auto& a, const auto& b) { return a.oid < b.oid; });

    auto rows = skg::calibrate_theta(descriptors, o.sig, thetas, o.k_edge);
    std::cout << "theta clusters mean_occupancy min_cluster max_cluster\n";
    for (const auto& r : rows)
        std::cout << r.theta << " " << r.clusters << " " << r.mean_occupancy
                  << " " << r.min_cluster << " " << r.max_cluster << "\n";
    return kExitOk;
}

int cmd_gen_corpus(const std::string& out_dir,
                   const skg::SyntheticCorpusOptions& opt) {
    auto corpus = skg::generate_synthetic_corpus(opt, out_dir);
    std::cout << "wrote " << corpus.size() << " images; manifest at "
              << (std::filesystem::path(out_dir) / "manifest.tsv").string()
              << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Region-based image retrieval over binary signatures"};
    app.require_subcommand(1);

    Options o;
    try {
        apply_config_file(o);
    } catch (const skg::error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }

    std::string manifest, index_path, image_path, out_path;
    std::vector<double> thetas;
    skg::SyntheticCorpusOptions corpus_opt;

    auto* index_cmd = app.add_subcommand("index", "Build an index from a manifest");
    index_cmd->add_option("--manifest", manifest, "oid<TAB>label<TAB>path list")
        ->required();
    index_cmd->add_option("--out", out_path, "Index file to write")->required();
    index_cmd->add_option("--theta", o.theta, "Similarity quantum");
    index_cmd->add_option("--k-edge", o.k_edge, "Edge threshold multiplier");
    index_cmd->add_flag("--deterministic", o.deterministic,
                        "Ingest in oid order");
    add_signature_flags(index_cmd, o);

    auto* query_cmd = app.add_subcommand("query", "Query an index with an image");
    query_cmd->add_option("--index", index_path, "Index file")->required();
    query_cmd->add_option("--image", image_path, "Query image (PNG or PPM)")
        ->required();
    query_cmd->add_option("--k-query", o.k_query, "Neighborhood multiplier");
    query_cmd->add_option("--topk", o.topk, "Hits to print (-1 = all)");

    auto* bench_cmd = app.add_subcommand("bench", "Benchmark skgraph vs ssf");
    bench_cmd->add_option("--manifest", manifest)->required();
    bench_cmd->add_option("--output", out_path, "CSV path (default stdout)");
    bench_cmd->add_option("--theta", o.theta, "Similarity quantum");
    bench_cmd->add_option("--k-edge", o.k_edge, "Edge threshold multiplier");
    bench_cmd->add_option("--k-query", o.k_query, "Neighborhood multiplier");
    bench_cmd->add_option("--topk", o.topk, "Precision cutoff K");
    bench_cmd->add_flag("--deterministic", o.deterministic);
    bench_cmd->add_flag("--leave-self-out", o.leave_self_out,
                        "Drop the query from its own results");
    add_signature_flags(bench_cmd, o);

    bool with_signatures = false;
    auto* inspect_cmd = app.add_subcommand("inspect", "Dump clusters and edges");
    inspect_cmd->add_option("--index", index_path)->required();
    inspect_cmd->add_flag("--signatures", with_signatures,
                          "Also print serialized center signatures");

    auto* calibrate_cmd =
        app.add_subcommand("calibrate", "Sweep theta, report occupancy");
    calibrate_cmd->add_option("--manifest", manifest)->required();
    calibrate_cmd->add_option("--thetas", thetas, "Theta values to sweep");
    calibrate_cmd->add_option("--k-edge", o.k_edge);
    calibrate_cmd->add_flag("--deterministic", o.deterministic);
    add_signature_flags(calibrate_cmd, o);

    auto* gen_cmd =
        app.add_subcommand("gen-corpus", "Write a synthetic labeled corpus");
    gen_cmd->add_option("--out", out_path, "Output directory")->required();
    gen_cmd->add_option("--subjects", corpus_opt.subjects);
    gen_cmd->add_option("--per-subject", corpus_opt.per_subject);
    gen_cmd->add_option("--image-size", corpus_opt.image_size);
    gen_cmd->add_option("--seed", corpus_opt.seed);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (index_cmd->parsed()) return cmd_index(manifest, out_path, o);
        if (query_cmd->parsed())
            return cmd_query(index_path, image_path, o.k_query, o.topk);
        if (bench_cmd->parsed()) return cmd_bench(manifest, out_path, o);
        if (inspect_cmd->parsed()) return cmd_inspect(index_path, with_signatures);
        if (calibrate_cmd->parsed()) return cmd_calibrate(manifest, thetas, o);
        if (gen_cmd->parsed()) return cmd_gen_corpus(out_path, corpus_opt);
    } catch (const skg::index_format_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIndexFormat;
    } catch (const skg::error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
