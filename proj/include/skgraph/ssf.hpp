#pragma once

#include <algorithm>
#include <chrono>
#include <unordered_set>
#include <vector>

#include "skgraph/descriptor.hpp"
#include "skgraph/skgraph.hpp"

namespace skg {

/// Superimposed-coverage test: match iff every set bit of the query
/// signature is also set in the candidate (s_q AND s_i == s_q). Candidates
/// passing this test may still rank poorly under the exact similarity
/// (false drops); the ranking stage resolves them.
inline bool match_superimposed(const BitSignature& s_q, const BitSignature& s_i) {
    if (!s_q.same_config(s_i))
        throw config_error("match_superimposed: signature length mismatch");
    auto wq = s_q.words(), wi = s_i.words();
    for (std::size_t k = 0; k < wq.size(); ++k)
        if ((wq[k] & wi[k]) != wq[k]) return false;
    return true;
}

/// Sequential signature file: the linear-scan baseline. Every query
/// evaluates the similarity against each entry in append order.
class SignatureFile {
public:
    explicit SignatureFile(SignatureConfig cfg) : cfg_(cfg) { cfg_.validate(); }

    void append(ImageDescriptor d) {
        if (d.signature.n_bins() != cfg_.n_bins || d.signature.m() != cfg_.m)
            throw config_error("SignatureFile: descriptor configuration mismatch");
        if (!oids_.insert(d.oid).second)
            throw data_error("SignatureFile: duplicate oid: " + d.oid);
        entries_.push_back(std::move(d));
    }

    std::size_t size() const { return entries_.size(); }
    std::span<const ImageDescriptor> entries() const { return entries_; }
    const SignatureConfig& config() const { return cfg_; }

    /// Full scan: entries within theta_q ranked ascending, ties by oid.
    /// With the coverage pre-filter enabled, only entries whose signature
    /// covers the query's are evaluated (demonstrates false drops).
    std::pair<std::vector<RankedHit>, QueryStats> scan_threshold(
        const ImageDescriptor& q, double theta_q, bool prefilter = false) const {
        auto t0 = std::chrono::steady_clock::now();
        QueryStats stats;
        std::vector<RankedHit> hits;
        for (const auto& e : entries_) {
            if (prefilter && !match_superimposed(q.signature, e.signature))
                continue;
            double phi = image_similarity(q, e, cfg_);
            ++stats.phi_evaluations;
            if (phi <= theta_q) hits.push_back({e.oid, phi});
        }
        std::sort(hits.begin(), hits.end(),
                  [](const RankedHit& a, const RankedHit& b) {
                      return a.phi != b.phi ? a.phi < b.phi : a.oid < b.oid;
                  });
        stats.candidates_returned = hits.size();
        stats.wall_time_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                .count();
        return {std::move(hits), stats};
    }

private:
    SignatureConfig cfg_;
    std::vector<ImageDescriptor> entries_;
    std::unordered_set<std::string> oids_;
};

}  // namespace skg
