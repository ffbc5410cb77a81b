#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "skgraph/descriptor.hpp"

namespace skg {

/// Instrumentation for one query.
struct QueryStats {
    std::size_t phi_evaluations = 0;
    std::size_t clusters_visited = 0;
    std::size_t candidates_returned = 0;
    double wall_time_seconds = 0.0;
};

/// Instrumentation accumulated while the graph is built.
struct BuildStats {
    std::size_t phi_evaluations = 0;
    double wall_time_seconds = 0.0;
};

/// Clustered signature graph.
///
/// Descriptors live in disjoint ball clusters of radius k_i * theta around a
/// center descriptor; clusters whose centers lie within k_edge * theta are
/// connected by weighted edges. Distribution follows a three-case rule that
/// keeps centers separated by at least (k_i + k_j) * theta, so membership
/// tests can never succeed for two clusters at once.
///
/// Center-to-center similarities are computed while the graph is built (every
/// new center was compared against all existing centers during its own
/// distribution scan) and are kept, so queries only spend similarity
/// evaluations on the query descriptor itself.
class SKGraph {
public:
    struct Member {
        std::size_t desc;      ///< index into descriptors()
        double actual_phi;     ///< true similarity to the cluster center
        double effective_phi;  ///< clamped to k * theta for boundary admits
    };

    struct Cluster {
        std::size_t center;  ///< index into descriptors(); == members[0].desc
        int k;               ///< radius multiplier
        std::vector<Member> members;
    };

    struct Edge {
        std::size_t a, b;
        double weight;
    };

    /// Outcome of distributing one descriptor.
    struct Placement {
        enum class Kind { assigned, new_cluster } kind;
        std::size_t cluster;  ///< target (or freshly created) cluster index
        int k = 0;            ///< multiplier of a freshly created cluster
    };

    SKGraph(SignatureConfig cfg, double theta, int k_edge)
        : cfg_(cfg), theta_(theta), k_edge_(k_edge) {
        cfg_.validate();
        if (!(theta > 0)) throw config_error("SKGraph: theta must be > 0");
        if (k_edge < 0) throw config_error("SKGraph: k_edge must be >= 0");
    }

    /// Folds distribute() over the stream in input order.
    static SKGraph build(std::span<const ImageDescriptor> descriptors,
                         const SignatureConfig& cfg, double theta, int k_edge) {
        SKGraph g(cfg, theta, k_edge);
        auto t0 = std::chrono::steady_clock::now();
        for (const auto& d : descriptors) g.distribute(d);
        g.build_stats_.wall_time_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                .count();
        return g;
    }

    /// Cluster minimizing phi(d, center_i) - k_i * theta; ties to the lowest
    /// index. Second element is that adjusted value.
    std::pair<std::size_t, double> nearest_cluster(const ImageDescriptor& d) const {
        if (clusters_.empty())
            throw state_error("nearest_cluster: graph has no clusters");
        std::size_t best = 0;
        double best_adj = 0.0;
        for (std::size_t i = 0; i < clusters_.size(); ++i) {
            double adj = phi_to_center(d, i) - clusters_[i].k * theta_;
            if (i == 0 || adj < best_adj) {
                best = i;
                best_adj = adj;
            }
        }
        return {best, best_adj};
    }

    /// Places one descriptor per the distribution rules:
    ///   1   inside the best cluster's radius -> join it;
    ///   2.1 k0 = floor((phi - k_m*theta)/theta) > 0 -> new cluster of
    ///       radius k0*theta, edges to centers within k_edge*theta;
    ///   2.2 k0 = 0 -> join the best cluster at effective radius k_m*theta.
    Placement distribute(const ImageDescriptor& d) {
        if (!compatible(d))
            throw config_error("distribute: descriptor configuration mismatch");
        if (oid_index_.count(d.oid))
            throw data_error("distribute: duplicate oid: " + d.oid);

        if (clusters_.empty()) {
            std::size_t di = add_descriptor(d);
            make_cluster(di, 1, {});
            return {Placement::Kind::new_cluster, 0, 1};
        }

        std::vector<double> phis(clusters_.size());
        std::size_t m = 0;
        int inside = 0;
        for (std::size_t i = 0; i < clusters_.size(); ++i) {
            phis[i] = phi_to_center(d, i);
            ++build_stats_.phi_evaluations;
            double adj = phis[i] - clusters_[i].k * theta_;
            if (adj <= 0.0) ++inside;
            if (adj < phis[m] - clusters_[m].k * theta_) m = i;
        }
        if (inside > 1)
            throw state_error(
                "distribute: separation invariant violated, descriptor fits " +
                std::to_string(inside) + " clusters: " + d.oid);

        const double radius = clusters_[m].k * theta_;
        if (phis[m] <= radius) {
            std::size_t di = add_descriptor(d);
            clusters_[m].members.push_back({di, phis[m], phis[m]});
            return {Placement::Kind::assigned, m, 0};
        }
        int k0 = static_cast<int>(std::floor((phis[m] - radius) / theta_));
        if (k0 > 0) {
            std::size_t di = add_descriptor(d);
            std::size_t ci = make_cluster(di, k0, std::move(phis));
            return {Placement::Kind::new_cluster, ci, k0};
        }
        std::size_t di = add_descriptor(d);
        clusters_[m].members.push_back({di, phis[m], radius});
        return {Placement::Kind::assigned, m, 0};
    }

    /// Retrieval: locate the cluster whose center is nearest to the query by
    /// raw similarity, gather every cluster whose center lies within
    /// k_q * theta of it (stored separations, no new evaluations), rank the
    /// members of those clusters by similarity to the query.
    std::pair<std::vector<RankedHit>, QueryStats> query(const ImageDescriptor& q,
                                                        int k_q) const {
        if (clusters_.empty()) throw state_error("query: graph has no clusters");
        if (k_q < 0) throw domain_error("query: k_q must be >= 0");
        if (!compatible(q))
            throw config_error("query: descriptor configuration mismatch");

        auto t0 = std::chrono::steady_clock::now();
        QueryStats stats;

        std::vector<double> phis(clusters_.size());
        std::size_t m = 0;
        for (std::size_t i = 0; i < clusters_.size(); ++i) {
            phis[i] = phi_to_center(q, i);
            ++stats.phi_evaluations;
            if (phis[i] < phis[m]) m = i;
        }

        std::vector<std::size_t> collected;
        if (k_q == k_edge_) {
            // Adjacency already answers the neighborhood test.
            collected.push_back(m);
            for (std::size_t i : adjacency_[m]) collected.push_back(i);
            std::sort(collected.begin(), collected.end());
        } else {
            const double reach = k_q * theta_;
            for (std::size_t i = 0; i < clusters_.size(); ++i)
                if (center_separation(m, i) <= reach) collected.push_back(i);
        }
        stats.clusters_visited = collected.size();

        std::vector<RankedHit> hits;
        for (std::size_t ci : collected) {
            const Cluster& cl = clusters_[ci];
            for (const Member& mem : cl.members) {
                double phi;
                if (mem.desc == cl.center) {
                    phi = phis[ci];  // already evaluated in the center scan
                } else {
                    phi = image_similarity(q, descriptors_[mem.desc], cfg_);
                    ++stats.phi_evaluations;
                }
                hits.push_back({descriptors_[mem.desc].oid, phi});
            }
        }
        stats.candidates_returned = hits.size();
        std::sort(hits.begin(), hits.end(),
                  [](const RankedHit& a, const RankedHit& b) {
                      return a.phi != b.phi ? a.phi < b.phi : a.oid < b.oid;
                  });
        stats.wall_time_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                .count();
        return {std::move(hits), stats};
    }

    const SignatureConfig& config() const { return cfg_; }
    double theta() const { return theta_; }
    int k_edge() const { return k_edge_; }
    std::span<const ImageDescriptor> descriptors() const { return descriptors_; }
    std::span<const Cluster> clusters() const { return clusters_; }
    std::span<const Edge> edges() const { return edges_; }
    const BuildStats& build_stats() const { return build_stats_; }

    std::size_t size() const { return descriptors_.size(); }

    double mean_occupancy() const {
        return clusters_.empty() ? 0.0
                                 : static_cast<double>(descriptors_.size()) /
                                       static_cast<double>(clusters_.size());
    }

    /// Stored center separation phi(center_i, center_j).
    double center_separation(std::size_t i, std::size_t j) const {
        if (i == j) return 0.0;
        return i > j ? center_phi_[i][j] : center_phi_[j][i];
    }

    const ImageDescriptor* find(const std::string& oid) const {
        auto it = oid_index_.find(oid);
        return it == oid_index_.end() ? nullptr : &descriptors_[it->second];
    }

    /// Rebuilds a graph from persisted tables. Center separations are
    /// recomputed (deterministically) rather than stored.
    static SKGraph restore(const SignatureConfig& cfg, double theta, int k_edge,
                           std::vector<ImageDescriptor> descriptors,
                           std::vector<Cluster> clusters,
                           std::vector<Edge> edges) {
        SKGraph g(cfg, theta, k_edge);
        g.descriptors_ = std::move(descriptors);
        g.clusters_ = std::move(clusters);
        g.edges_ = std::move(edges);
        for (std::size_t i = 0; i < g.descriptors_.size(); ++i) {
            if (!g.compatible(g.descriptors_[i]))
                throw index_format_error("restore: descriptor config mismatch");
            if (!g.oid_index_.emplace(g.descriptors_[i].oid, i).second)
                throw index_format_error("restore: duplicate oid in tables");
        }
        for (const auto& c : g.clusters_) {
            if (c.center >= g.descriptors_.size() || c.members.empty() ||
                c.members[0].desc != c.center || c.k <= 0)
                throw index_format_error("restore: malformed cluster table");
            for (const auto& mem : c.members)
                if (mem.desc >= g.descriptors_.size())
                    throw index_format_error("restore: member out of range");
        }
        g.center_phi_.resize(g.clusters_.size());
        for (std::size_t i = 0; i < g.clusters_.size(); ++i) {
            g.center_phi_[i].resize(i);
            for (std::size_t j = 0; j < i; ++j)
                g.center_phi_[i][j] =
                    image_similarity(g.descriptors_[g.clusters_[i].center],
                                     g.descriptors_[g.clusters_[j].center],
                                     g.cfg_);
        }
        g.adjacency_.assign(g.clusters_.size(), {});
        for (const auto& e : g.edges_) {
            if (e.a >= g.clusters_.size() || e.b >= g.clusters_.size() ||
                e.a == e.b)
                throw index_format_error("restore: malformed edge table");
            g.adjacency_[e.a].push_back(e.b);
            g.adjacency_[e.b].push_back(e.a);
        }
        return g;
    }

private:
    bool compatible(const ImageDescriptor& d) const {
        return d.signature.n_bins() == cfg_.n_bins && d.signature.m() == cfg_.m;
    }

    double phi_to_center(const ImageDescriptor& d, std::size_t cluster) const {
        return image_similarity(d, descriptors_[clusters_[cluster].center], cfg_);
    }

    std::size_t add_descriptor(const ImageDescriptor& d) {
        descriptors_.push_back(d);
        oid_index_.emplace(d.oid, descriptors_.size() - 1);
        return descriptors_.size() - 1;
    }

    // center_phis[i] = phi(new center, center_i), captured from the
    // distribution scan that triggered the creation.
    std::size_t make_cluster(std::size_t desc_index, int k,
                             std::vector<double> center_phis) {
        std::size_t ci = clusters_.size();
        clusters_.push_back({desc_index, k, {Member{desc_index, 0.0, 0.0}}});
        adjacency_.emplace_back();
        const double reach = k_edge_ * theta_;
        for (std::size_t j = 0; j < center_phis.size(); ++j) {
            if (center_phis[j] <= reach) {
                edges_.push_back({ci, j, center_phis[j]});
                adjacency_[ci].push_back(j);
                adjacency_[j].push_back(ci);
            }
        }
        center_phi_.push_back(std::move(center_phis));
        return ci;
    }

    SignatureConfig cfg_;
    double theta_;
    int k_edge_;
    std::vector<ImageDescriptor> descriptors_;
    std::vector<Cluster> clusters_;
    std::vector<Edge> edges_;
    std::vector<std::vector<std::size_t>> adjacency_;
    std::vector<std::vector<double>> center_phi_;  // strict lower triangle
    std::unordered_map<std::string, std::size_t> oid_index_;
    BuildStats build_stats_;
};

}  // namespace skg
