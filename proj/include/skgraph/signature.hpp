#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "skgraph/config.hpp"
#include "skgraph/error.hpp"

namespace skg {

/// Fixed-length bit string built from one-hot histogram-bin blocks.
///
/// A signature is `n_bins` consecutive blocks of `m` bits. Bit j of block b
/// (both 1-indexed in the encoding rule) lives at 0-indexed position
/// (b-1)*m + (j-1); block 1 occupies the lowest positions. Freshly encoded
/// region signatures carry at most one set bit per block; image signatures
/// are bitwise unions of region signatures and share the same length.
class BitSignature {
public:
    BitSignature() = default;

    BitSignature(int n_bins, int m) : n_bins_(n_bins), m_(m) {
        if (n_bins <= 0 || m <= 0)
            throw config_error("BitSignature: block counts must be positive");
        words_.assign((static_cast<std::size_t>(size()) + 63) / 64, 0);
    }

    static BitSignature zeros(const SignatureConfig& cfg) {
        return BitSignature(cfg.n_bins, cfg.m);
    }

    int n_bins() const { return n_bins_; }
    int m() const { return m_; }

    /// Total bit length (n_bins * m).
    int size() const { return n_bins_ * m_; }

    bool empty() const { return words_.empty(); }

    bool test(int pos) const {
        check_pos(pos);
        return (words_[static_cast<std::size_t>(pos) >> 6] >>
                (static_cast<unsigned>(pos) & 63)) & 1u;
    }

    void set(int pos) {
        check_pos(pos);
        words_[static_cast<std::size_t>(pos) >> 6] |=
            std::uint64_t{1} << (static_cast<unsigned>(pos) & 63);
    }

    std::span<const std::uint64_t> words() const { return words_; }

    /// Number of set bits.
    int popcount() const {
        int c = 0;
        for (std::uint64_t w : words_) c += std::popcount(w);
        return c;
    }

    bool same_config(const BitSignature& other) const {
        return n_bins_ == other.n_bins_ && m_ == other.m_;
    }

    BitSignature& operator|=(const BitSignature& other) {
        if (!same_config(other))
            throw config_error("BitSignature: union over mismatched lengths");
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= other.words_[i];
        return *this;
    }

    friend bool operator==(const BitSignature& a, const BitSignature& b) {
        return a.n_bins_ == b.n_bins_ && a.m_ == b.m_ && a.words_ == b.words_;
    }

private:
    void check_pos(int pos) const {
        if (pos < 0 || pos >= size())
            throw domain_error("BitSignature: bit position out of range");
    }

    int n_bins_ = 0;
    int m_ = 0;
    std::vector<std::uint64_t> words_;
};

/// Selects the bit for one histogram bin: j = floor((h + offset) * m),
/// clamped to m. Returns the 1-indexed bit within the block; 0 means the
/// block stays empty.
inline int encode_block(double h, const SignatureConfig& cfg) {
    if (!(h >= 0.0 && h <= 1.0))
        throw domain_error("encode_block: bin value outside [0,1]");
    int j = static_cast<int>(std::floor((h + cfg.offset) * cfg.m));
    return j > cfg.m ? cfg.m : j;
}

/// Encodes a normalized histogram as the concatenation of one-hot blocks,
/// in bin order.
inline BitSignature encode_region(std::span<const double> hist,
                                  const SignatureConfig& cfg) {
    cfg.validate();
    if (static_cast<int>(hist.size()) != cfg.n_bins)
        throw config_error("encode_region: histogram bin count mismatch");
    double sum = 0.0;
    for (double h : hist) sum += h;
    if (std::abs(sum - 1.0) > 1e-9)
        throw domain_error("encode_region: histogram not normalized");

    BitSignature sig(cfg.n_bins, cfg.m);
    for (int bin = 0; bin < cfg.n_bins; ++bin) {
        int j = encode_block(hist[static_cast<std::size_t>(bin)], cfg);
        if (j >= 1) sig.set(bin * cfg.m + (j - 1));
    }
    return sig;
}

inline BitSignature encode_region(const std::vector<double>& hist,
                                  const SignatureConfig& cfg) {
    return encode_region(std::span<const double>(hist), cfg);
}

/// Bitwise OR of the inputs; all must share one configuration.
inline BitSignature union_signatures(std::span<const BitSignature> sigs) {
    if (sigs.empty())
        throw config_error("union_signatures: empty input");
    BitSignature out = sigs[0];
    for (std::size_t i = 1; i < sigs.size(); ++i) out |= sigs[i];
    return out;
}

inline BitSignature union_signatures(const std::vector<BitSignature>& sigs) {
    return union_signatures(std::span<const BitSignature>(sigs));
}

/// Count of differing bit positions (L1 distance on bit strings).
inline int hamming(const BitSignature& a, const BitSignature& b) {
    if (!a.same_config(b))
        throw config_error("hamming: signature length mismatch");
    int d = 0;
    auto wa = a.words(), wb = b.words();
    for (std::size_t i = 0; i < wa.size(); ++i) d += std::popcount(wa[i] ^ wb[i]);
    return d;
}

/// "v1:<n_bins>:<m>:<hex>" with the lowest-numbered block first: hex digit t
/// encodes bit positions 4t..4t+3 (0-indexed), position 4t as the digit's
/// least significant bit.
inline std::string serialize(const BitSignature& sig) {
    static const char* digits = "0123456789abcdef";
    std::string out = "v1:" + std::to_string(sig.n_bins()) + ":" +
                      std::to_string(sig.m()) + ":";
    const int nibbles = (sig.size() + 3) / 4;
    auto words = sig.words();
    for (int t = 0; t < nibbles; ++t) {
        unsigned nib = static_cast<unsigned>(
            words[static_cast<std::size_t>(t) >> 4] >> ((t & 15) * 4)) & 0xF;
        out += digits[nib];
    }
    return out;
}

inline BitSignature parse_signature(const std::string& text) {
    auto fail = [&](const char* why) -> BitSignature {
        throw format_error(std::string("parse_signature: ") + why + ": " + text);
    };
    if (text.rfind("v1:", 0) != 0) return fail("missing v1 prefix");
    std::size_t p1 = text.find(':', 3);
    if (p1 == std::string::npos) return fail("missing block count");
    std::size_t p2 = text.find(':', p1 + 1);
    if (p2 == std::string::npos) return fail("missing block length");
    int n_bins = 0, m = 0;
    try {
        n_bins = std::stoi(text.substr(3, p1 - 3));
        m = std::stoi(text.substr(p1 + 1, p2 - p1 - 1));
    } catch (const std::exception&) {
        return fail("non-numeric header field");
    }
    if (n_bins <= 0 || m <= 0) return fail("non-positive header field");

    BitSignature sig(n_bins, m);
    const std::string hex = text.substr(p2 + 1);
    if (static_cast<int>(hex.size()) != (sig.size() + 3) / 4)
        return fail("hex payload length mismatch");
    for (int t = 0; t < static_cast<int>(hex.size()); ++t) {
        char c = hex[static_cast<std::size_t>(t)];
        int nib;
        if (c >= '0' && c <= '9') nib = c - '0';
        else if (c >= 'a' && c <= 'f') nib = c - 'a' + 10;
        else return fail("invalid hex digit");
        for (int b = 0; b < 4; ++b) {
            if (!((nib >> b) & 1)) continue;
            int pos = t * 4 + b;
            if (pos >= sig.size()) return fail("set bit beyond signature length");
            sig.set(pos);
        }
    }
    return sig;
}

}  // namespace skg
