#include "skgraph/eval.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "skgraph/image.hpp"

namespace skg {

LabeledCorpus::LabeledCorpus(std::vector<CorpusItem> items)
    : items_(std::move(items)) {
    for (std::size_t i = 0; i < items_.size(); ++i) {
        const auto& it = items_[i];
        if (it.oid.empty() || it.label.empty() || it.path.empty())
            throw data_error("corpus item " + std::to_string(i) +
                             " has empty fields");
        if (!by_oid_.emplace(it.oid, i).second)
            throw data_error("corpus: duplicate oid: " + it.oid);
        ++label_counts_[it.label];
    }
}

LabeledCorpus LabeledCorpus::load(const std::filesystem::path& manifest) {
    std::ifstream in(manifest);
    if (!in) throw data_error("cannot open manifest: " + manifest.string());
    const auto base = manifest.parent_path();
    std::vector<CorpusItem> items;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        auto t1 = line.find('\t');
        auto t2 = t1 == std::string::npos ? std::string::npos
                                          : line.find('\t', t1 + 1);
        if (t2 == std::string::npos)
            throw data_error("manifest line " + std::to_string(lineno) +
                             " is not oid<TAB>label<TAB>path");
        CorpusItem item;
        item.oid = line.substr(0, t1);
        item.label = line.substr(t1 + 1, t2 - t1 - 1);
        std::filesystem::path p = line.substr(t2 + 1);
        item.path = p.is_absolute() ? p : base / p;
        items.push_back(std::move(item));
    }
    return LabeledCorpus(std::move(items));
}

PrecisionRecall precision_recall(std::span<const RankedHit> retrieved,
                                 const std::string& query_oid,
                                 const std::string& query_label,
                                 const LabeledCorpus& corpus, int k) {
    if (k < 1) throw domain_error("precision_recall: K must be >= 1");
    std::size_t class_size = corpus.label_count(query_label);
    if (class_size == 0)
        throw data_error("precision_recall: unknown query label: " + query_label);
    if (retrieved.empty()) return {0.0, 0.0};

    auto labeled = [&](const RankedHit& h) {
        const CorpusItem* item = corpus.find(h.oid);
        return item && item->label == query_label;
    };

    std::size_t top = std::min<std::size_t>(static_cast<std::size_t>(k),
                                            retrieved.size());
    std::size_t top_hits = 0;
    for (std::size_t i = 0; i < top; ++i)
        if (labeled(retrieved[i])) ++top_hits;

    std::size_t found = 0;
    for (const auto& h : retrieved)
        if (h.oid != query_oid && labeled(h)) ++found;

    PrecisionRecall pr;
    pr.precision = static_cast<double>(top_hits) / static_cast<double>(top);
    std::size_t relevant = class_size - 1;  // the query is not its own target
    pr.recall = relevant == 0
                    ? 1.0
                    : static_cast<double>(found) / static_cast<double>(relevant);
    return pr;
}

ExtractionResult extract_corpus(const LabeledCorpus& corpus,
                                const SignatureConfig& sig_cfg,
                                const FeatureConfig& feat_cfg,
                                const Palette& palette, int threads) {
    auto t0 = std::chrono::steady_clock::now();
    const auto& items = corpus.items();
    std::vector<std::optional<ImageDescriptor>> slots(items.size());
    std::vector<std::pair<std::string, std::string>> failures;
    std::mutex failures_mutex;
    std::atomic<std::size_t> next{0};

    unsigned n_workers = threads > 0 ? static_cast<unsigned>(threads)
                                     : std::max(1u, std::thread::hardware_concurrency());
    n_workers = std::min<unsigned>(n_workers,
                                   std::max<std::size_t>(items.size(), 1));

    auto work = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= items.size()) return;
            try {
                RasterImage img = decode_image(items[i].path);
                slots[i] = extract_descriptor(img, items[i].oid, sig_cfg,
                                              feat_cfg, palette);
            } catch (const std::exception& e) {
                std::lock_guard lock(failures_mutex);
                failures.emplace_back(items[i].oid, e.what());
            }
        }
    };
    if (n_workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }

    ExtractionResult result;
    for (auto& slot : slots)
        if (slot) result.descriptors.push_back(std::move(*slot));
    std::sort(failures.begin(), failures.end());
    result.failures = std::move(failures);
    result.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return result;
}

BenchAggregate BenchReport::aggregate(const std::string& method) const {
    BenchAggregate agg;
    std::size_t n = 0;
    for (const auto& r : rows) {
        if (r.method != method) continue;
        agg.mean_phi_evaluations += static_cast<double>(r.phi_evaluations);
        agg.mean_wall_time_seconds += r.wall_time_seconds;
        agg.mean_precision_at_k += r.precision_at_k;
        agg.mean_recall += r.recall;
        ++n;
    }
    if (n > 0) {
        agg.mean_phi_evaluations /= static_cast<double>(n);
        agg.mean_wall_time_seconds /= static_cast<double>(n);
        agg.mean_precision_at_k /= static_cast<double>(n);
        agg.mean_recall /= static_cast<double>(n);
    }
    return agg;
}

void BenchReport::write_csv(std::ostream& out) const {
    out << "oid,method,phi_evaluations,wall_time_seconds,precision_at_k,recall\n";
    auto row = [&](const std::string& oid, const std::string& method,
                   double evals, double wall, double prec, double rec) {
        out << oid << ',' << method << ',' << evals << ',' << wall << ','
            << prec << ',' << rec << '\n';
    };
    for (const auto& r : rows)
        row(r.oid, r.method, static_cast<double>(r.phi_evaluations),
            r.wall_time_seconds, r.precision_at_k, r.recall);
    for (const auto* method : {"skgraph", "ssf"}) {
        auto agg = aggregate(method);
        row("MEAN", method, agg.mean_phi_evaluations, agg.mean_wall_time_seconds,
            agg.mean_precision_at_k, agg.mean_recall);
    }
}

BenchReport run_benchmark(const LabeledCorpus& corpus, const BenchOptions& opt) {
    if (corpus.size() == 0) throw data_error("run_benchmark: empty corpus");

    BenchReport report;
    report.corpus_size = corpus.size();

    // Phase 1: extract, then build both structures.
    auto extraction = extract_corpus(corpus, opt.sig, opt.feat, opt.palette,
                                     opt.threads);
    report.extraction_failures = extraction.failures;
    auto descriptors = std::move(extraction.descriptors);
    if (descriptors.empty())
        throw data_error("run_benchmark: no image could be extracted");
    if (opt.deterministic)
        std::sort(descriptors.begin(), descriptors.end(),
                  [](const ImageDescriptor& a, const ImageDescriptor& b) {
                      return a.oid < b.oid;
                  });

    SKGraph graph = SKGraph::build(descriptors, opt.sig, opt.theta, opt.k_edge);
    report.skgraph_build = graph.build_stats();
    report.cluster_count = graph.clusters().size();
    report.mean_occupancy = graph.mean_occupancy();

    auto t0 = std::chrono::steady_clock::now();
    SignatureFile ssf(opt.sig);
    for (const auto& d : descriptors) ssf.append(d);
    report.ssf_build_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();

    // Phase 2: every extracted image queries both structures at the matched
    // threshold.
    const double theta_q = opt.k_query * opt.theta;
    for (const auto& q : descriptors) {
        const CorpusItem* item = corpus.find(q.oid);
        const std::string& label = item->label;

        auto [g_hits, g_stats] = graph.query(q, opt.k_query);
        std::vector<RankedHit> g_kept;
        for (const auto& h : g_hits) {
            if (h.phi > theta_q) break;  // ranked ascending
            if (opt.leave_self_out && h.oid == q.oid) continue;
            g_kept.push_back(h);
        }
        auto g_pr = precision_recall(g_kept, q.oid, label, corpus, opt.top_k);
        report.rows.push_back({q.oid, "skgraph", g_stats.phi_evaluations,
                               g_stats.wall_time_seconds, g_pr.precision,
                               g_pr.recall});

        auto [s_hits, s_stats] = ssf.scan_threshold(q, theta_q);
        std::vector<RankedHit> s_kept;
        for (const auto& h : s_hits) {
            if (opt.leave_self_out && h.oid == q.oid) continue;
            s_kept.push_back(h);
        }
        auto s_pr = precision_recall(s_kept, q.oid, label, corpus, opt.top_k);
        report.rows.push_back({q.oid, "ssf", s_stats.phi_evaluations,
                               s_stats.wall_time_seconds, s_pr.precision,
                               s_pr.recall});
    }
    return report;
}

std::vector<CalibrationRow> calibrate_theta(
    std::span<const ImageDescriptor> descriptors, const SignatureConfig& cfg,
    std::span<const double> thetas, int k_edge) {
    std::vector<CalibrationRow> rows;
    for (double theta : thetas) {
        SKGraph g = SKGraph::build(descriptors, cfg, theta, k_edge);
        CalibrationRow row;
        row.theta = theta;
        row.clusters = g.clusters().size();
        row.mean_occupancy = g.mean_occupancy();
        if (!g.clusters().empty()) {
            row.min_cluster = g.clusters()[0].members.size();
            row.max_cluster = g.clusters()[0].members.size();
            for (const auto& c : g.clusters()) {
                row.min_cluster = std::min(row.min_cluster, c.members.size());
                row.max_cluster = std::max(row.max_cluster, c.members.size());
            }
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace skg
