#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "skgraph/error.hpp"

namespace skg {

/// 8-bit RGB raster, row-major.
struct RasterImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  ///< width*height*3 bytes

    std::array<std::uint8_t, 3> rgb(int x, int y) const {
        std::size_t o = 3 * (static_cast<std::size_t>(y) * width + x);
        return {pixels[o], pixels[o + 1], pixels[o + 2]};
    }

    void set_rgb(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
        std::size_t o = 3 * (static_cast<std::size_t>(y) * width + x);
        pixels[o] = r;
        pixels[o + 1] = g;
        pixels[o + 2] = b;
    }

    static RasterImage filled(int w, int h, std::uint8_t r, std::uint8_t g,
                              std::uint8_t b);
};

/// Decodes a PNG or binary PPM (P6) file, dispatching on the magic bytes.
RasterImage decode_image(const std::filesystem::path& path);

RasterImage decode_ppm(const std::vector<std::uint8_t>& bytes);
RasterImage decode_png_file(const std::filesystem::path& path);

void write_ppm(const RasterImage& img, const std::filesystem::path& path);
void write_png(const RasterImage& img, const std::filesystem::path& path);

/// Bilinear resample to size x size. Sample positions are pixel-center
/// aligned: output (x, y) reads source (x + 0.5) * w / S - 0.5, clamped to
/// the image, so an identical size is an identity copy.
RasterImage standardize(const RasterImage& img, int size);

}  // namespace skg
