#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "skgraph/signature.hpp"

namespace skg {

/// Region/centroid coordinates, normalized to [0,1] by the standardized
/// image side.
using RegionCenter = Eigen::Vector2d;

inline double euclidean(const RegionCenter& a, const RegionCenter& b) {
    return (a - b).norm();
}

/// Circular feature region: normalized center and radius, quantized color
/// histogram and its one-hot signature.
struct FeatureRegion {
    RegionCenter center{0.0, 0.0};
    double radius = 0.0;            ///< normalized, in (0, 0.5]
    std::vector<double> histogram;  ///< n_bins values summing to 1
    BitSignature signature;
};

/// A fully encoded image: its regions, their OR-folded signature and the
/// mean of the region centers. Images without regions get an all-zero
/// signature and centroid (0.5, 0.5).
struct ImageDescriptor {
    std::string oid;
    std::vector<FeatureRegion> regions;
    BitSignature signature;
    RegionCenter centroid{0.5, 0.5};

    bool has_regions() const { return !regions.empty(); }
};

/// Builds a descriptor from encoded regions, computing the union signature
/// and centroid.
inline ImageDescriptor make_descriptor(std::string oid,
                                       std::vector<FeatureRegion> regions,
                                       const SignatureConfig& cfg) {
    if (static_cast<int>(regions.size()) > cfg.n_max)
        throw domain_error("make_descriptor: more regions than n_max");
    ImageDescriptor d;
    d.oid = std::move(oid);
    d.regions = std::move(regions);
    if (d.regions.empty()) {
        d.signature = BitSignature::zeros(cfg);
        d.centroid = RegionCenter(0.5, 0.5);
        return d;
    }
    d.signature = d.regions[0].signature;
    RegionCenter sum = RegionCenter::Zero();
    for (const auto& r : d.regions) sum += r.center;
    for (std::size_t i = 1; i < d.regions.size(); ++i)
        d.signature |= d.regions[i].signature;
    d.centroid = sum / static_cast<double>(d.regions.size());
    return d;
}

/// Center of a region given boundary samples: midpoint of the diameter
/// (the pair of boundary points at maximum Euclidean distance, O(B^2)).
/// Exact distance ties resolve to the lexicographically smallest pair.
inline RegionCenter region_center(std::span<const RegionCenter> boundary) {
    if (boundary.empty())
        throw domain_error("region_center: empty boundary");
    for (const auto& p : boundary)
        if (!(p.x() >= 0.0 && p.x() <= 1.0 && p.y() >= 0.0 && p.y() <= 1.0))
            throw domain_error("region_center: boundary point outside [0,1]^2");

    auto lex_less = [](const RegionCenter& a, const RegionCenter& b) {
        return a.x() != b.x() ? a.x() < b.x() : a.y() < b.y();
    };
    RegionCenter bs = boundary[0], be = boundary[0];
    double best = -1.0;
    for (std::size_t i = 0; i < boundary.size(); ++i) {
        for (std::size_t j = i; j < boundary.size(); ++j) {
            RegionCenter p = boundary[i], q = boundary[j];
            if (lex_less(q, p)) std::swap(p, q);
            double d2 = (p - q).squaredNorm();
            if (d2 > best) {
                best = d2;
                bs = p;
                be = q;
            } else if (d2 == best &&
                       (lex_less(p, bs) ||
                        (!lex_less(bs, p) && lex_less(q, be)))) {
                bs = p;
                be = q;
            }
        }
    }
    return (bs + be) / 2.0;
}

inline RegionCenter region_center(const std::vector<RegionCenter>& boundary) {
    return region_center(std::span<const RegionCenter>(boundary));
}

/// Region distance: Hamming term normalized by its maximum (2 bits per
/// block) plus the Euclidean distance of the centers. A metric.
inline double region_distance(const FeatureRegion& a, const FeatureRegion& b) {
    if (!a.signature.same_config(b.signature))
        throw config_error("region_distance: signature configuration mismatch");
    double ham = static_cast<double>(hamming(a.signature, b.signature));
    return ham / (2.0 * a.signature.n_bins()) + euclidean(a.center, b.center);
}

/// Image similarity: Hamming term normalized by the maximum achievable
/// distance between union signatures (2 * n_bins * n_max) plus the
/// Euclidean distance of the centroids. Lower = more similar; a metric.
inline double image_similarity(const ImageDescriptor& a,
                               const ImageDescriptor& b,
                               const SignatureConfig& cfg) {
    if (!a.signature.same_config(b.signature) ||
        a.signature.n_bins() != cfg.n_bins || a.signature.m() != cfg.m)
        throw config_error("image_similarity: signature configuration mismatch");
    double ham = static_cast<double>(hamming(a.signature, b.signature));
    return ham / (2.0 * cfg.n_bins * cfg.n_max) +
           euclidean(a.centroid, b.centroid);
}

struct RankedHit {
    std::string oid;
    double phi = 0.0;

    friend bool operator==(const RankedHit& a, const RankedHit& b) {
        return a.oid == b.oid && a.phi == b.phi;
    }
};

/// Candidates within threshold, sorted ascending by similarity; ties broken
/// by oid so the ordering is total and independent of input order.
inline std::vector<RankedHit> rank_results(
    const ImageDescriptor& query, std::span<const ImageDescriptor> candidates,
    double theta_q, const SignatureConfig& cfg) {
    std::vector<RankedHit> hits;
    for (const auto& c : candidates) {
        double phi = image_similarity(query, c, cfg);
        if (phi <= theta_q) hits.push_back({c.oid, phi});
    }
    std::sort(hits.begin(), hits.end(), [](const RankedHit& a, const RankedHit& b) {
        return a.phi != b.phi ? a.phi < b.phi : a.oid < b.oid;
    });
    return hits;
}

inline std::vector<RankedHit> rank_results(
    const ImageDescriptor& query, const std::vector<ImageDescriptor>& candidates,
    double theta_q, const SignatureConfig& cfg) {
    return rank_results(query, std::span<const ImageDescriptor>(candidates),
                        theta_q, cfg);
}

}  // namespace skg
