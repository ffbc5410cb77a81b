#include "skgraph/store.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

namespace skg {

namespace {

constexpr char kMagic[8] = {'S', 'K', 'G', 'I', 'D', 'X', '0', '1'};
constexpr std::uint32_t kVersion = 1;

class Writer {
public:
    explicit Writer(const std::filesystem::path& path) : out_(path, std::ios::binary) {
        if (!out_) throw data_error("cannot open index for writing: " + path.string());
    }

    void bytes(const void* p, std::size_t n) {
        out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    }
    void u32(std::uint32_t v) { le(v); }
    void u64(std::uint64_t v) { le(v); }
    void f64(double v) { le(std::bit_cast<std::uint64_t>(v)); }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        bytes(s.data(), s.size());
    }
    void finish(const std::filesystem::path& path) {
        out_.flush();
        if (!out_) throw data_error("short write on index: " + path.string());
    }

private:
    template <typename T>
    void le(T v) {
        unsigned char buf[sizeof(T)];
        for (std::size_t i = 0; i < sizeof(T); ++i)
            buf[i] = static_cast<unsigned char>(v >> (8 * i));
        bytes(buf, sizeof(T));
    }

    std::ofstream out_;
};

class Reader {
public:
    explicit Reader(const std::filesystem::path& path) : in_(path, std::ios::binary) {
        if (!in_) throw data_error("cannot open index: " + path.string());
    }

    void bytes(void* p, std::size_t n) {
        in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in_.gcount()) != n)
            throw index_format_error("index truncated");
    }
    std::uint32_t u32() { return le<std::uint32_t>(); }
    std::uint64_t u64() { return le<std::uint64_t>(); }
    double f64() { return std::bit_cast<double>(le<std::uint64_t>()); }
    std::string str() {
        std::uint32_t n = u32();
        if (n > (1u << 20)) throw index_format_error("index string too long");
        std::string s(n, '\0');
        bytes(s.data(), n);
        return s;
    }
    bool at_end() {
        return in_.peek() == std::char_traits<char>::eof();
    }

private:
    template <typename T>
    T le() {
        unsigned char buf[sizeof(T)];
        bytes(buf, sizeof(T));
        T v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i)
            v |= static_cast<T>(buf[i]) << (8 * i);
        return v;
    }

    std::ifstream in_;
};

void write_signature(Writer& w, const BitSignature& sig) {
    for (std::uint64_t word : sig.words()) w.u64(word);
}

BitSignature read_signature(Reader& r, const SignatureConfig& cfg) {
    BitSignature sig(cfg.n_bins, cfg.m);
    const int words = (sig.size() + 63) / 64;
    for (int i = 0; i < words; ++i) {
        std::uint64_t word = r.u64();
        for (int b = 0; b < 64; ++b) {
            if (!((word >> b) & 1)) continue;
            int pos = i * 64 + b;
            if (pos >= sig.size())
                throw index_format_error("index signature has stray bits");
            sig.set(pos);
        }
    }
    return sig;
}

}  // namespace

void save_index(const Index& index, const std::filesystem::path& path) {
    const SKGraph& g = index.graph;
    const SignatureConfig& sig = g.config();
    Writer w(path);

    w.bytes(kMagic, sizeof(kMagic));
    w.u32(kVersion);

    w.u32(static_cast<std::uint32_t>(sig.n_bins));
    w.u32(static_cast<std::uint32_t>(sig.m));
    w.f64(sig.offset);
    w.u32(static_cast<std::uint32_t>(sig.n_max));

    w.u32(static_cast<std::uint32_t>(index.feat.size));
    w.f64(index.feat.alpha);
    w.f64(index.feat.sigma_d);
    w.f64(index.feat.sigma_i);
    w.u32(static_cast<std::uint32_t>(index.feat.neighborhood));
    w.f64(index.feat.percentile);

    w.f64(g.theta());
    w.u32(static_cast<std::uint32_t>(g.k_edge()));

    w.u32(static_cast<std::uint32_t>(index.palette.size()));
    for (const auto& c : index.palette.colors()) w.bytes(c.data(), 3);
    w.u64(index.palette.checksum());

    w.u64(g.descriptors().size());
    for (const auto& d : g.descriptors()) {
        w.str(d.oid);
        w.f64(d.centroid.x());
        w.f64(d.centroid.y());
        write_signature(w, d.signature);
        w.u32(static_cast<std::uint32_t>(d.regions.size()));
        for (const auto& r : d.regions) {
            w.f64(r.center.x());
            w.f64(r.center.y());
            w.f64(r.radius);
            for (double h : r.histogram) w.f64(h);
            write_signature(w, r.signature);
        }
    }

    w.u64(g.clusters().size());
    for (const auto& c : g.clusters()) {
        w.u64(c.center);
        w.u32(static_cast<std::uint32_t>(c.k));
        w.u64(c.members.size());
        for (const auto& m : c.members) {
            w.u64(m.desc);
            w.f64(m.actual_phi);
            w.f64(m.effective_phi);
        }
    }

    w.u64(g.edges().size());
    for (const auto& e : g.edges()) {
        w.u64(e.a);
        w.u64(e.b);
        w.f64(e.weight);
    }
    w.finish(path);
}

Index load_index(const std::filesystem::path& path) {
    Reader r(path);

    char magic[8];
    r.bytes(magic, sizeof(magic));
    if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw index_format_error("not an index file (bad magic): " +
                                 path.string());
    std::uint32_t version = r.u32();
    if (version != kVersion)
        throw index_format_error("index version " + std::to_string(version) +
                                 " unsupported; this build reads version " +
                                 std::to_string(kVersion));

    SignatureConfig sig;
    sig.n_bins = static_cast<int>(r.u32());
    sig.m = static_cast<int>(r.u32());
    sig.offset = r.f64();
    sig.n_max = static_cast<int>(r.u32());
    sig.validate();

    FeatureConfig feat;
    feat.size = static_cast<int>(r.u32());
    feat.alpha = r.f64();
    feat.sigma_d = r.f64();
    feat.sigma_i = r.f64();
    feat.neighborhood = static_cast<int>(r.u32());
    feat.percentile = r.f64();
    feat.validate();

    double theta = r.f64();
    int k_edge = static_cast<int>(r.u32());

    std::uint32_t n_colors = r.u32();
    if (n_colors == 0 || n_colors > 4096)
        throw index_format_error("index palette size out of range");
    std::vector<std::array<std::uint8_t, 3>> colors(n_colors);
    for (auto& c : colors) r.bytes(c.data(), 3);
    Palette palette(std::move(colors));
    if (r.u64() != palette.checksum())
        throw index_format_error("index palette checksum mismatch");

    std::uint64_t n_desc = r.u64();
    std::vector<ImageDescriptor> descriptors;
    descriptors.reserve(n_desc);
    for (std::uint64_t i = 0; i < n_desc; ++i) {
        ImageDescriptor d;
        d.oid = r.str();
        double cx = r.f64(), cy = r.f64();
        d.centroid = RegionCenter(cx, cy);
        d.signature = read_signature(r, sig);
        std::uint32_t n_regions = r.u32();
        if (n_regions > static_cast<std::uint32_t>(sig.n_max))
            throw index_format_error("index descriptor has too many regions");
        for (std::uint32_t k = 0; k < n_regions; ++k) {
            FeatureRegion fr;
            double rx = r.f64(), ry = r.f64();
            fr.center = RegionCenter(rx, ry);
            fr.radius = r.f64();
            fr.histogram.resize(static_cast<std::size_t>(sig.n_bins));
            for (auto& h : fr.histogram) h = r.f64();
            fr.signature = read_signature(r, sig);
            d.regions.push_back(std::move(fr));
        }
        descriptors.push_back(std::move(d));
    }

    std::uint64_t n_clusters = r.u64();
    std::vector<SKGraph::Cluster> clusters;
    clusters.reserve(n_clusters);
    for (std::uint64_t i = 0; i < n_clusters; ++i) {
        SKGraph::Cluster c;
        c.center = r.u64();
        c.k = static_cast<int>(r.u32());
        std::uint64_t n_members = r.u64();
        if (n_members > n_desc)
            throw index_format_error("index cluster member count out of range");
        for (std::uint64_t m = 0; m < n_members; ++m) {
            SKGraph::Member mem;
            mem.desc = r.u64();
            mem.actual_phi = r.f64();
            mem.effective_phi = r.f64();
            c.members.push_back(mem);
        }
        clusters.push_back(std::move(c));
    }

    std::uint64_t n_edges = r.u64();
    std::vector<SKGraph::Edge> edges;
    edges.reserve(n_edges);
    for (std::uint64_t i = 0; i < n_edges; ++i) {
        SKGraph::Edge e;
        e.a = r.u64();
        e.b = r.u64();
        e.weight = r.f64();
        edges.push_back(e);
    }
    if (!r.at_end()) throw index_format_error("trailing bytes in index file");

    SKGraph graph = SKGraph::restore(sig, theta, k_edge, std::move(descriptors),
                                     std::move(clusters), std::move(edges));
    return Index{feat, std::move(palette), std::move(graph)};
}

}  // namespace skg
