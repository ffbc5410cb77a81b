#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "skgraph/error.hpp"

namespace skg {

/// Quantization palette: the histogram bins are its colors, in order.
class Palette {
public:
    Palette() = default;

    explicit Palette(std::vector<std::array<std::uint8_t, 3>> colors)
        : colors_(std::move(colors)) {
        if (colors_.empty()) throw config_error("Palette: no colors");
        for (std::size_t i = 0; i < colors_.size(); ++i)
            for (std::size_t j = i + 1; j < colors_.size(); ++j)
                if (colors_[i] == colors_[j])
                    throw config_error("Palette: duplicate color at index " +
                                       std::to_string(j));
    }

    /// Default 32-color lattice: cell centers of a 4x4x2 grid over R, G, B.
    /// Index = 8*r + 2*g + b over cell indices.
    static Palette uniform_lattice() {
        std::vector<std::array<std::uint8_t, 3>> c;
        for (int r = 0; r < 4; ++r)
            for (int g = 0; g < 4; ++g)
                for (int b = 0; b < 2; ++b)
                    c.push_back({static_cast<std::uint8_t>(32 + 64 * r),
                                 static_cast<std::uint8_t>(32 + 64 * g),
                                 static_cast<std::uint8_t>(64 + 128 * b)});
        return Palette(std::move(c));
    }

    /// Text format: one "R G B" triple per line; blank lines and lines
    /// starting with '#' are skipped.
    static Palette load(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw format_error("cannot open palette file: " + path.string());
        std::vector<std::array<std::uint8_t, 3>> c;
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty() || line[0] == '#') continue;
            std::istringstream ss(line);
            int r, g, b;
            if (!(ss >> r >> g >> b) || r < 0 || r > 255 || g < 0 || g > 255 ||
                b < 0 || b > 255)
                throw format_error("palette line " + std::to_string(lineno) +
                                   " is not an R G B triple: " + path.string());
            c.push_back({static_cast<std::uint8_t>(r),
                         static_cast<std::uint8_t>(g),
                         static_cast<std::uint8_t>(b)});
        }
        return Palette(std::move(c));
    }

    int size() const { return static_cast<int>(colors_.size()); }

    const std::array<std::uint8_t, 3>& color(int i) const {
        return colors_[static_cast<std::size_t>(i)];
    }

    const std::vector<std::array<std::uint8_t, 3>>& colors() const {
        return colors_;
    }

    /// FNV-1a over the raw triples, used to detect palette/index mismatch.
    std::uint64_t checksum() const {
        std::uint64_t h = 1469598103934665603ull;
        for (const auto& c : colors_)
            for (std::uint8_t byte : c) {
                h ^= byte;
                h *= 1099511628211ull;
            }
        return h;
    }

    friend bool operator==(const Palette& a, const Palette& b) {
        return a.colors_ == b.colors_;
    }

private:
    std::vector<std::array<std::uint8_t, 3>> colors_;
};

/// Index of the nearest palette color (squared Euclidean distance in RGB);
/// exact ties resolve to the lowest index.
inline int quantize_color(const std::array<std::uint8_t, 3>& rgb,
                          const Palette& palette) {
    long best = -1;
    int best_idx = 0;
    for (int i = 0; i < palette.size(); ++i) {
        const auto& c = palette.color(i);
        long dr = static_cast<long>(rgb[0]) - c[0];
        long dg = static_cast<long>(rgb[1]) - c[1];
        long db = static_cast<long>(rgb[2]) - c[2];
        long d = dr * dr + dg * dg + db * db;
        if (best < 0 || d < best) {
            best = d;
            best_idx = i;
        }
    }
    return best_idx;
}

}  // namespace skg
