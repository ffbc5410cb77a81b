#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "skgraph/features.hpp"
#include "skgraph/skgraph.hpp"
#include "skgraph/ssf.hpp"

namespace skg {

struct CorpusItem {
    std::string oid;
    std::string label;
    std::filesystem::path path;
};

/// Directory-labeled corpus described by a tab-separated manifest:
/// "oid<TAB>label<TAB>path", one item per line. Relative paths resolve
/// against the manifest's directory.
class LabeledCorpus {
public:
    LabeledCorpus() = default;
    explicit LabeledCorpus(std::vector<CorpusItem> items);

    static LabeledCorpus load(const std::filesystem::path& manifest);

    std::size_t size() const { return items_.size(); }
    const std::vector<CorpusItem>& items() const { return items_; }

    const CorpusItem* find(const std::string& oid) const {
        auto it = by_oid_.find(oid);
        return it == by_oid_.end() ? nullptr : &items_[it->second];
    }

    /// Number of items carrying the label.
    std::size_t label_count(const std::string& label) const {
        auto it = label_counts_.find(label);
        return it == label_counts_.end() ? 0 : it->second;
    }

private:
    std::vector<CorpusItem> items_;
    std::unordered_map<std::string, std::size_t> by_oid_;
    std::unordered_map<std::string, std::size_t> label_counts_;
};

struct PrecisionRecall {
    double precision = 0.0;
    double recall = 0.0;
};

/// precision@K over the top of the ranked list; recall over the whole list
/// against the query's subject, the query itself excluded from both the
/// relevant set and the recall numerator. An empty list scores (0, 0); a
/// query whose subject has no other member scores recall 1.
PrecisionRecall precision_recall(std::span<const RankedHit> retrieved,
                                 const std::string& query_oid,
                                 const std::string& query_label,
                                 const LabeledCorpus& corpus, int k);

/// Corpus-wide descriptor extraction. Items are processed by a small worker
/// pool and collected into corpus order; per-item failures are recorded,
/// not fatal.
struct ExtractionResult {
    std::vector<ImageDescriptor> descriptors;          ///< successes, corpus order
    std::vector<std::pair<std::string, std::string>> failures;  ///< oid, reason
    double wall_time_seconds = 0.0;
};

ExtractionResult extract_corpus(const LabeledCorpus& corpus,
                                const SignatureConfig& sig_cfg,
                                const FeatureConfig& feat_cfg,
                                const Palette& palette, int threads);

struct BenchOptions {
    SignatureConfig sig;
    FeatureConfig feat;
    Palette palette = Palette::uniform_lattice();
    double theta = 0.25;
    int k_edge = 3;
    int k_query = 3;
    int top_k = 20;
    bool leave_self_out = false;
    bool deterministic = false;  ///< oid-sorted ingestion
    int threads = 0;             ///< 0 = hardware concurrency
};

struct BenchRow {
    std::string oid;
    std::string method;  ///< "skgraph" or "ssf"
    std::size_t phi_evaluations = 0;
    double wall_time_seconds = 0.0;
    double precision_at_k = 0.0;
    double recall = 0.0;
};

struct BenchAggregate {
    double mean_phi_evaluations = 0.0;
    double mean_wall_time_seconds = 0.0;
    double mean_precision_at_k = 0.0;
    double mean_recall = 0.0;
};

struct BenchReport {
    std::vector<BenchRow> rows;  ///< one skgraph + one ssf row per query
    BuildStats skgraph_build;
    double ssf_build_seconds = 0.0;
    std::size_t cluster_count = 0;
    double mean_occupancy = 0.0;
    std::size_t corpus_size = 0;
    std::vector<std::pair<std::string, std::string>> extraction_failures;

    BenchAggregate aggregate(const std::string& method) const;
    /// Fixed-header CSV: per-query rows plus one MEAN row per method.
    void write_csv(std::ostream& out) const;
};

/// Two-phase measurement: extract everything and build both structures,
/// then run every extracted image as a query against both at the matched
/// threshold k_query * theta.
BenchReport run_benchmark(const LabeledCorpus& corpus, const BenchOptions& opt);

struct CalibrationRow {
    double theta = 0.0;
    std::size_t clusters = 0;
    double mean_occupancy = 0.0;
    std::size_t min_cluster = 0;
    std::size_t max_cluster = 0;
};

/// Rebuilds the graph once per candidate theta and reports the cluster-size
/// distribution of each build.
std::vector<CalibrationRow> calibrate_theta(
    std::span<const ImageDescriptor> descriptors, const SignatureConfig& cfg,
    std::span<const double> thetas, int k_edge);

}  // namespace skg
