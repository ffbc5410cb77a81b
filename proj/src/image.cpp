#include "skgraph/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>

namespace skg {

RasterImage RasterImage::filled(int w, int h, std::uint8_t r, std::uint8_t g,
                                std::uint8_t b) {
    if (w <= 0 || h <= 0) throw format_error("RasterImage: zero dimension");
    RasterImage img;
    img.width = w;
    img.height = h;
    img.pixels.resize(static_cast<std::size_t>(w) * h * 3);
    for (std::size_t i = 0; i < img.pixels.size(); i += 3) {
        img.pixels[i] = r;
        img.pixels[i + 1] = g;
        img.pixels[i + 2] = b;
    }
    return img;
}

namespace {

std::vector<std::uint8_t> read_all(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw format_error("cannot open image file: " + path.string());
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                     std::istreambuf_iterator<char>());
}

// Skips PPM whitespace and '#' comments; returns the next integer token.
int ppm_int(const std::vector<std::uint8_t>& b, std::size_t& i) {
    while (i < b.size()) {
        if (std::isspace(b[i])) {
            ++i;
        } else if (b[i] == '#') {
            while (i < b.size() && b[i] != '\n') ++i;
        } else {
            break;
        }
    }
    if (i >= b.size() || !std::isdigit(b[i]))
        throw format_error("PPM: malformed header");
    int v = 0;
    while (i < b.size() && std::isdigit(b[i])) {
        v = v * 10 + (b[i] - '0');
        if (v > 1 << 30) throw format_error("PPM: header value overflow");
        ++i;
    }
    return v;
}

struct PngReadCloser {
    png_structp png = nullptr;
    png_infop info = nullptr;
    std::FILE* fp = nullptr;
    ~PngReadCloser() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
        if (fp) std::fclose(fp);
    }
};

struct PngWriteCloser {
    png_structp png = nullptr;
    png_infop info = nullptr;
    std::FILE* fp = nullptr;
    ~PngWriteCloser() {
        if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
        if (fp) std::fclose(fp);
    }
};

}  // namespace

RasterImage decode_ppm(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6')
        throw format_error("PPM: missing P6 magic");
    std::size_t i = 2;
    int w = ppm_int(bytes, i);
    int h = ppm_int(bytes, i);
    int maxval = ppm_int(bytes, i);
    if (w <= 0 || h <= 0) throw format_error("PPM: zero dimension");
    if (maxval <= 0 || maxval > 255)
        throw format_error("PPM: unsupported maxval");
    if (i >= bytes.size() || !std::isspace(bytes[i]))
        throw format_error("PPM: missing header terminator");
    ++i;  // single whitespace byte, then raster

    RasterImage img;
    img.width = w;
    img.height = h;
    std::size_t need = static_cast<std::size_t>(w) * h * 3;
    if (bytes.size() - i < need) throw format_error("PPM: truncated raster");
    img.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(i),
                      bytes.begin() + static_cast<std::ptrdiff_t>(i + need));
    if (maxval != 255) {
        for (auto& p : img.pixels)
            p = static_cast<std::uint8_t>(p * 255 / maxval);
    }
    return img;
}

RasterImage decode_png_file(const std::filesystem::path& path) {
    PngReadCloser c;
    c.fp = std::fopen(path.string().c_str(), "rb");
    if (!c.fp) throw format_error("cannot open image file: " + path.string());

    unsigned char sig[8];
    if (std::fread(sig, 1, 8, c.fp) != 8 || png_sig_cmp(sig, 0, 8) != 0)
        throw format_error("PNG: bad signature: " + path.string());

    c.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                                   nullptr);
    if (!c.png) throw format_error("PNG: reader allocation failed");
    c.info = png_create_info_struct(c.png);
    if (!c.info) throw format_error("PNG: info allocation failed");
    if (setjmp(png_jmpbuf(c.png)))
        throw format_error("PNG: corrupt stream: " + path.string());

    png_init_io(c.png, c.fp);
    png_set_sig_bytes(c.png, 8);
    png_read_info(c.png, c.info);

    png_uint_32 w, h;
    int bit_depth, color_type;
    png_get_IHDR(c.png, c.info, &w, &h, &bit_depth, &color_type, nullptr,
                 nullptr, nullptr);
    if (w == 0 || h == 0) throw format_error("PNG: zero dimension");

    // Normalize every layout to 8-bit RGB.
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(c.png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8)
        png_set_expand_gray_1_2_4_to_8(c.png);
    if (png_get_valid(c.png, c.info, PNG_INFO_tRNS))
        png_set_tRNS_to_alpha(c.png);
    if (bit_depth == 16) png_set_strip_16(c.png);
    if (color_type == PNG_COLOR_TYPE_GRAY ||
        color_type == PNG_COLOR_TYPE_GRAY_ALPHA)
        png_set_gray_to_rgb(c.png);
    png_set_strip_alpha(c.png);
    png_read_update_info(c.png, c.info);

    RasterImage img;
    img.width = static_cast<int>(w);
    img.height = static_cast<int>(h);
    img.pixels.resize(static_cast<std::size_t>(w) * h * 3);
    std::vector<png_bytep> rows(h);
    for (png_uint_32 y = 0; y < h; ++y)
        rows[y] = img.pixels.data() + static_cast<std::size_t>(y) * w * 3;
    png_read_image(c.png, rows.data());
    png_read_end(c.png, nullptr);
    return img;
}

RasterImage decode_image(const std::filesystem::path& path) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw format_error("cannot open image file: " + path.string());
    char magic[2] = {0, 0};
    probe.read(magic, 2);
    probe.close();
    if (magic[0] == 'P' && magic[1] == '6') return decode_ppm(read_all(path));
    if (static_cast<unsigned char>(magic[0]) == 0x89 && magic[1] == 'P')
        return decode_png_file(path);
    throw format_error("unsupported image format: " + path.string());
}

void write_ppm(const RasterImage& img, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw format_error("cannot write image file: " + path.string());
    out << "P6\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()),
              static_cast<std::streamsize>(img.pixels.size()));
    if (!out) throw format_error("short write: " + path.string());
}

void write_png(const RasterImage& img, const std::filesystem::path& path) {
    PngWriteCloser c;
    c.fp = std::fopen(path.string().c_str(), "wb");
    if (!c.fp) throw format_error("cannot write image file: " + path.string());
    c.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                                    nullptr);
    if (!c.png) throw format_error("PNG: writer allocation failed");
    c.info = png_create_info_struct(c.png);
    if (!c.info) throw format_error("PNG: info allocation failed");
    if (setjmp(png_jmpbuf(c.png)))
        throw format_error("PNG: write failed: " + path.string());

    png_init_io(c.png, c.fp);
    png_set_IHDR(c.png, c.info, static_cast<png_uint_32>(img.width),
                 static_cast<png_uint_32>(img.height), 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(c.png, c.info);
    for (int y = 0; y < img.height; ++y)
        png_write_row(c.png, const_cast<png_bytep>(
                                 img.pixels.data() +
                                 static_cast<std::size_t>(y) * img.width * 3));
    png_write_end(c.png, nullptr);
}

RasterImage standardize(const RasterImage& img, int size) {
    if (img.width <= 0 || img.height <= 0)
        throw format_error("standardize: zero-dimension input");
    if (size <= 0) throw format_error("standardize: invalid target size");
    if (img.width == size && img.height == size) return img;

    RasterImage out;
    out.width = size;
    out.height = size;
    out.pixels.resize(static_cast<std::size_t>(size) * size * 3);

    const double sx = static_cast<double>(img.width) / size;
    const double sy = static_cast<double>(img.height) / size;
    for (int y = 0; y < size; ++y) {
        double fy = (y + 0.5) * sy - 0.5;
        fy = std::clamp(fy, 0.0, static_cast<double>(img.height - 1));
        int y0 = static_cast<int>(fy);
        int y1 = std::min(y0 + 1, img.height - 1);
        double wy = fy - y0;
        for (int x = 0; x < size; ++x) {
            double fx = (x + 0.5) * sx - 0.5;
            fx = std::clamp(fx, 0.0, static_cast<double>(img.width - 1));
            int x0 = static_cast<int>(fx);
            int x1 = std::min(x0 + 1, img.width - 1);
            double wx = fx - x0;
            for (int ch = 0; ch < 3; ++ch) {
                auto at = [&](int px, int py) {
                    return static_cast<double>(
                        img.pixels[3 * (static_cast<std::size_t>(py) *
                                            img.width +
                                        px) +
                                   ch]);
                };
                double v = (1 - wy) * ((1 - wx) * at(x0, y0) + wx * at(x1, y0)) +
                           wy * ((1 - wx) * at(x0, y1) + wx * at(x1, y1));
                out.pixels[3 * (static_cast<std::size_t>(y) * size + x) + ch] =
                    static_cast<std::uint8_t>(std::lround(v));
            }
        }
    }
    return out;
}

}  // namespace skg
