#pragma once

// Shared helpers for the test suites: synthetic descriptor generators, a
// naive reference implementation of the graph query, and an exhaustive
// structural checker. Everything here is independent of the indexed code
// paths it is used to verify.

#include <algorithm>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "skgraph/skgraph.hpp"

namespace skg::testsupport {

inline std::vector<double> random_histogram(int n_bins, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(1e-6, 1.0);
    std::vector<double> h(static_cast<std::size_t>(n_bins));
    double sum = 0;
    for (auto& v : h) {
        v = -std::log(u(rng));
        sum += v;
    }
    for (auto& v : h) v /= sum;
    return h;
}

/// Descriptor with an explicit raw signature and centroid (no regions);
/// handy for placing points at controlled similarity values.
inline ImageDescriptor raw_descriptor(std::string oid, const BitSignature& sig,
                                      const RegionCenter& centroid) {
    ImageDescriptor d;
    d.oid = std::move(oid);
    d.signature = sig;
    d.centroid = centroid;
    return d;
}

inline ImageDescriptor point_descriptor(std::string oid, double x, double y,
                                        const SignatureConfig& cfg) {
    return raw_descriptor(std::move(oid), BitSignature::zeros(cfg),
                          RegionCenter(x, y));
}

/// Mixture of `n_clusters` Gaussian clusters in signature/centroid space.
/// Prototypes are random union-form signatures (one to three bits per
/// block, as an OR of one-hot regions would produce) plus a centroid
/// anchor; instances re-randomize a few blocks and add Gaussian noise to
/// the centroid. Pairwise prototype distances concentrate tightly, so the
/// distribution rules produce many clusters instead of one fat ball.
inline std::vector<ImageDescriptor> gaussian_mixture_descriptors(
    int count, int n_clusters, const SignatureConfig& cfg, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, 0.01);

    auto random_block = [&](std::vector<int>& bits) {
        bits.clear();
        int n = 1 + static_cast<int>(rng() % 3);
        for (int i = 0; i < n; ++i)
            bits.push_back(static_cast<int>(rng() % static_cast<unsigned>(cfg.m)));
        std::sort(bits.begin(), bits.end());
        bits.erase(std::unique(bits.begin(), bits.end()), bits.end());
    };

    struct Proto {
        std::vector<std::vector<int>> block_bits;
        RegionCenter anchor;
    };
    std::vector<Proto> protos(static_cast<std::size_t>(n_clusters));
    for (auto& p : protos) {
        p.block_bits.resize(static_cast<std::size_t>(cfg.n_bins));
        for (auto& b : p.block_bits) random_block(b);
        p.anchor = RegionCenter(0.4 + 0.2 * u01(rng), 0.4 + 0.2 * u01(rng));
    }

    std::vector<ImageDescriptor> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        const Proto& p = protos[static_cast<std::size_t>(i % n_clusters)];
        BitSignature sig(cfg.n_bins, cfg.m);
        std::vector<int> bits;
        for (int b = 0; b < cfg.n_bins; ++b) {
            bits = p.block_bits[static_cast<std::size_t>(b)];
            if (u01(rng) < 0.08) random_block(bits);
            for (int j : bits) sig.set(b * cfg.m + j);
        }
        RegionCenter centroid(std::clamp(p.anchor.x() + noise(rng), 0.0, 1.0),
                              std::clamp(p.anchor.y() + noise(rng), 0.0, 1.0));
        out.push_back(
            raw_descriptor("d" + std::to_string(i), sig, centroid));
    }
    return out;
}

/// Naive reference for the retrieval algorithm: nearest center by raw
/// similarity, every cluster whose center lies within k_q * theta of it
/// (all separations recomputed from scratch), members ranked by similarity.
inline std::vector<RankedHit> naive_query(const SKGraph& g,
                                          const ImageDescriptor& q, int k_q) {
    auto clusters = g.clusters();
    auto descs = g.descriptors();
    const auto& cfg = g.config();

    std::size_t m = 0;
    double best = 0;
    for (std::size_t i = 0; i < clusters.size(); ++i) {
        double phi = image_similarity(q, descs[clusters[i].center], cfg);
        if (i == 0 || phi < best) {
            best = phi;
            m = i;
        }
    }
    std::vector<RankedHit> hits;
    for (std::size_t i = 0; i < clusters.size(); ++i) {
        double sep = image_similarity(descs[clusters[m].center],
                                      descs[clusters[i].center], cfg);
        if (sep > k_q * g.theta()) continue;
        for (const auto& mem : clusters[i].members)
            hits.push_back(
                {descs[mem.desc].oid, image_similarity(q, descs[mem.desc], cfg)});
    }
    std::sort(hits.begin(), hits.end(), [](const RankedHit& a, const RankedHit& b) {
        return a.phi != b.phi ? a.phi < b.phi : a.oid < b.oid;
    });
    return hits;
}

struct InvariantReport {
    bool ok = true;
    std::string failure;
};

/// Exhaustive post-hoc check of the structural guarantees: disjointness,
/// totality, membership bounds, center separation and edge consistency.
inline InvariantReport check_graph_invariants(
    const SKGraph& g, const std::vector<ImageDescriptor>& inputs) {
    InvariantReport rep;
    auto fail = [&](std::string why) {
        rep.ok = false;
        rep.failure = std::move(why);
        return rep;
    };
    auto clusters = g.clusters();
    auto descs = g.descriptors();
    const auto& cfg = g.config();
    const double theta = g.theta();

    if (descs.size() != inputs.size()) return fail("descriptor count mismatch");
    std::set<std::string> in_oids, seen;
    for (const auto& d : inputs) in_oids.insert(d.oid);

    for (const auto& c : clusters) {
        if (c.k <= 0) return fail("non-positive k");
        if (c.members.empty() || c.members[0].desc != c.center)
            return fail("center is not the first member");
        if (c.members[0].actual_phi != 0.0)
            return fail("center has nonzero self-similarity");
        for (const auto& mem : c.members) {
            const auto& oid = descs[mem.desc].oid;
            if (!in_oids.count(oid)) return fail("unknown member oid " + oid);
            if (!seen.insert(oid).second)
                return fail("oid in two clusters: " + oid);  // disjointness
            if (mem.effective_phi > c.k * theta + 1e-12)
                return fail("effective phi beyond radius for " + oid);
            if (!(mem.actual_phi < (c.k + 1) * theta + 1e-12))
                return fail("actual phi beyond (k+1) theta for " + oid);
            double phi = image_similarity(descs[c.center], descs[mem.desc], cfg);
            if (std::abs(phi - mem.actual_phi) > 1e-9)
                return fail("stored phi disagrees with recomputation for " + oid);
        }
    }
    if (seen.size() != in_oids.size()) return fail("totality violated");

    for (std::size_t i = 0; i < clusters.size(); ++i)
        for (std::size_t j = i + 1; j < clusters.size(); ++j) {
            double sep = image_similarity(descs[clusters[i].center],
                                          descs[clusters[j].center], cfg);
            if (sep < (clusters[i].k + clusters[j].k) * theta - 1e-9)
                return fail("separation violated between clusters " +
                            std::to_string(i) + "," + std::to_string(j));
            bool has_edge = false;
            for (const auto& e : g.edges())
                if ((e.a == i && e.b == j) || (e.a == j && e.b == i))
                    has_edge = true;
            if (has_edge != (sep <= g.k_edge() * theta))
                return fail("edge presence disagrees with threshold for " +
                            std::to_string(i) + "," + std::to_string(j));
        }
    return rep;
}

}  // namespace skg::testsupport
