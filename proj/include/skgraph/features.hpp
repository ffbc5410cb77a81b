#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "skgraph/config.hpp"
#include "skgraph/descriptor.hpp"
#include "skgraph/image.hpp"
#include "skgraph/palette.hpp"

namespace skg {

/// Dense scalar field over the image plane, indexed (y, x).
template <typename Scalar>
using Field = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Interest point in standardized pixel coordinates.
struct InterestPoint {
    int x = 0;
    int y = 0;
    double response = 0.0;
    double scale = 0.0;  ///< characteristic sigma, filled by radius selection
};

namespace detail {

// Mirror index without repeating the edge sample (..., 2, 1, 0, 1, 2, ...).
inline int reflect(int i, int n) {
    if (n == 1) return 0;
    while (i < 0 || i >= n) {
        if (i < 0) i = -i;
        if (i >= n) i = 2 * n - 2 - i;
    }
    return i;
}

}  // namespace detail

/// Normalized 1-D Gaussian taps over radius ceil(3*sigma).
template <typename Scalar>
std::vector<Scalar> gaussian_kernel(Scalar sigma) {
    if (!(sigma > 0)) throw domain_error("gaussian_kernel: sigma must be > 0");
    int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<Scalar> k(static_cast<std::size_t>(2 * radius + 1));
    Scalar sum = 0;
    for (int i = -radius; i <= radius; ++i) {
        Scalar w = std::exp(-Scalar(i) * Scalar(i) / (2 * sigma * sigma));
        k[static_cast<std::size_t>(i + radius)] = w;
        sum += w;
    }
    for (auto& w : k) w /= sum;
    return k;
}

/// Separable Gaussian smoothing with mirrored borders.
template <typename Scalar>
Field<Scalar> gaussian_blur(const Field<Scalar>& f, Scalar sigma) {
    const auto k = gaussian_kernel(sigma);
    const int radius = static_cast<int>(k.size() / 2);
    const int rows = static_cast<int>(f.rows());
    const int cols = static_cast<int>(f.cols());

    Field<Scalar> tmp(rows, cols), out(rows, cols);
    for (int y = 0; y < rows; ++y)
        for (int x = 0; x < cols; ++x) {
            Scalar acc = 0;
            for (int t = -radius; t <= radius; ++t)
                acc += k[static_cast<std::size_t>(t + radius)] *
                       f(y, detail::reflect(x + t, cols));
            tmp(y, x) = acc;
        }
    for (int y = 0; y < rows; ++y)
        for (int x = 0; x < cols; ++x) {
            Scalar acc = 0;
            for (int t = -radius; t <= radius; ++t)
                acc += k[static_cast<std::size_t>(t + radius)] *
                       tmp(detail::reflect(y + t, rows), x);
            out(y, x) = acc;
        }
    return out;
}

/// Visually weighted luminance: BT.601 full-range YCbCr planes, each
/// Gaussian-smoothed at sigma_d, combined 6:2:2.
template <typename Scalar>
Field<Scalar> visual_luminance(const RasterImage& img, Scalar sigma_d) {
    const int rows = img.height, cols = img.width;
    Field<Scalar> y(rows, cols), cb(rows, cols), cr(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            auto p = img.rgb(c, r);
            Scalar R = p[0], G = p[1], B = p[2];
            y(r, c) = Scalar(0.299) * R + Scalar(0.587) * G + Scalar(0.114) * B;
            cb(r, c) = Scalar(128) - Scalar(0.168736) * R -
                       Scalar(0.331264) * G + Scalar(0.5) * B;
            cr(r, c) = Scalar(128) + Scalar(0.5) * R - Scalar(0.418688) * G -
                       Scalar(0.081312) * B;
        }
    return (Scalar(6) * gaussian_blur(y, sigma_d) +
            Scalar(2) * gaussian_blur(cb, sigma_d) +
            Scalar(2) * gaussian_blur(cr, sigma_d)) /
           Scalar(10);
}

/// Corner response det(M) - alpha * tr(M)^2 from the structure tensor M:
/// central-difference gradients scaled by sigma_d, tensor entries smoothed
/// at sigma_i and scaled by sigma_d^2.
template <typename Scalar>
Field<Scalar> harris_response(const Field<Scalar>& L, Scalar alpha,
                              Scalar sigma_i, Scalar sigma_d) {
    const int rows = static_cast<int>(L.rows());
    const int cols = static_cast<int>(L.cols());
    Field<Scalar> lx(rows, cols), ly(rows, cols);
    for (int y = 0; y < rows; ++y)
        for (int x = 0; x < cols; ++x) {
            lx(y, x) = sigma_d *
                       (L(y, detail::reflect(x + 1, cols)) -
                        L(y, detail::reflect(x - 1, cols))) /
                       Scalar(2);
            ly(y, x) = sigma_d *
                       (L(detail::reflect(y + 1, rows), x) -
                        L(detail::reflect(y - 1, rows), x)) /
                       Scalar(2);
        }
    const Scalar s2 = sigma_d * sigma_d;
    Field<Scalar> axx = s2 * gaussian_blur<Scalar>(lx * lx, sigma_i);
    Field<Scalar> ayy = s2 * gaussian_blur<Scalar>(ly * ly, sigma_i);
    Field<Scalar> axy = s2 * gaussian_blur<Scalar>(lx * ly, sigma_i);
    return axx * ayy - axy * axy - alpha * (axx + ayy).square();
}

/// Detection threshold: nearest-rank q-th percentile of the strictly
/// positive responses. Returns +infinity when nothing is positive, which
/// suppresses all detections.
template <typename Scalar>
Scalar detection_threshold(const Field<Scalar>& response, double percentile) {
    std::vector<Scalar> pos;
    for (Eigen::Index i = 0; i < response.size(); ++i)
        if (response(i) > 0) pos.push_back(response(i));
    if (pos.empty()) return std::numeric_limits<Scalar>::infinity();
    std::sort(pos.begin(), pos.end());
    auto n = static_cast<double>(pos.size());
    auto rank = static_cast<std::ptrdiff_t>(std::ceil(percentile / 100.0 * n)) - 1;
    rank = std::clamp<std::ptrdiff_t>(rank, 0, pos.size() - 1);
    return pos[static_cast<std::size_t>(rank)];
}

/// Strict local maxima of the response over the (2*radius+1)^2 in-bounds
/// neighborhood, at or above the threshold. Sorted by response descending,
/// ties by (y, x) ascending, truncated to max_points.
template <typename Scalar>
std::vector<InterestPoint> detect_interest_points(const Field<Scalar>& response,
                                                  Scalar threshold, int radius,
                                                  int max_points) {
    const int rows = static_cast<int>(response.rows());
    const int cols = static_cast<int>(response.cols());
    std::vector<InterestPoint> pts;
    for (int y = 0; y < rows; ++y)
        for (int x = 0; x < cols; ++x) {
            Scalar v = response(y, x);
            if (!(v >= threshold)) continue;
            bool is_max = true;
            for (int dy = -radius; dy <= radius && is_max; ++dy)
                for (int dx = -radius; dx <= radius; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    int ny = y + dy, nx = x + dx;
                    if (ny < 0 || ny >= rows || nx < 0 || nx >= cols) continue;
                    if (response(ny, nx) >= v) {
                        is_max = false;
                        break;
                    }
                }
            if (is_max)
                pts.push_back({x, y, static_cast<double>(v), 0.0});
        }
    std::sort(pts.begin(), pts.end(),
              [](const InterestPoint& a, const InterestPoint& b) {
                  if (a.response != b.response) return a.response > b.response;
                  if (a.y != b.y) return a.y < b.y;
                  return a.x < b.x;
              });
    if (max_points >= 0 && static_cast<int>(pts.size()) > max_points)
        pts.resize(static_cast<std::size_t>(max_points));
    return pts;
}

/// Scale-normalized Laplacian magnitudes |sigma^2 * Lap(G_sigma * L)|, one
/// field per scale.
template <typename Scalar>
std::vector<Field<Scalar>> log_response_stack(const Field<Scalar>& L,
                                              std::span<const Scalar> scales) {
    const int rows = static_cast<int>(L.rows());
    const int cols = static_cast<int>(L.cols());
    std::vector<Field<Scalar>> stack;
    stack.reserve(scales.size());
    for (Scalar sigma : scales) {
        Field<Scalar> g = gaussian_blur(L, sigma);
        Field<Scalar> lap(rows, cols);
        for (int y = 0; y < rows; ++y)
            for (int x = 0; x < cols; ++x)
                lap(y, x) = g(detail::reflect(y - 1, rows), x) +
                            g(detail::reflect(y + 1, rows), x) +
                            g(y, detail::reflect(x - 1, cols)) +
                            g(y, detail::reflect(x + 1, cols)) -
                            Scalar(4) * g(y, x);
        stack.push_back((sigma * sigma * lap).abs());
    }
    return stack;
}

/// Characteristic sigma at (x, y): the scale maximizing the normalized
/// Laplacian magnitude, ties to the smallest scale.
template <typename Scalar>
Scalar select_scale(const std::vector<Field<Scalar>>& stack,
                    std::span<const Scalar> scales, int x, int y) {
    if (scales.empty() || stack.size() != scales.size())
        throw domain_error("select_scale: empty or mismatched scale list");
    Scalar best = stack[0](y, x);
    std::size_t best_i = 0;
    for (std::size_t i = 1; i < scales.size(); ++i)
        if (stack[i](y, x) > best) {
            best = stack[i](y, x);
            best_i = i;
        }
    return scales[best_i];
}

/// Region radius in pixels: sqrt(2) * characteristic sigma, clamped to
/// min(height, width) / 2.
template <typename Scalar>
Scalar log_radius(const Field<Scalar>& L, int x, int y,
                  std::span<const Scalar> scales) {
    auto stack = log_response_stack(L, scales);
    Scalar sigma = select_scale(stack, scales, x, y);
    Scalar cap = Scalar(std::min(L.rows(), L.cols())) / Scalar(2);
    return std::min(Scalar(std::numbers::sqrt2) * sigma, cap);
}

/// Normalized color histogram of the pixels inside the circle
/// (px-cx)^2 + (py-cy)^2 <= r^2, clipped to the image.
inline std::vector<double> region_histogram(const RasterImage& img, double cx,
                                            double cy, double radius_px,
                                            const Palette& palette) {
    std::vector<long> counts(static_cast<std::size_t>(palette.size()), 0);
    long total = 0;
    int x0 = std::max(0, static_cast<int>(std::ceil(cx - radius_px)));
    int x1 = std::min(img.width - 1, static_cast<int>(std::floor(cx + radius_px)));
    int y0 = std::max(0, static_cast<int>(std::ceil(cy - radius_px)));
    int y1 = std::min(img.height - 1, static_cast<int>(std::floor(cy + radius_px)));
    const double r2 = radius_px * radius_px;
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) {
            double dx = x - cx, dy = y - cy;
            if (dx * dx + dy * dy > r2) continue;
            ++counts[static_cast<std::size_t>(quantize_color(img.rgb(x, y), palette))];
            ++total;
        }
    if (total == 0)
        throw domain_error("region_histogram: circle does not cover any pixel");
    std::vector<double> hist(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i)
        hist[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
    return hist;
}

/// Full image -> descriptor pipeline. Deterministic for a fixed input and
/// configuration; an image without any detected corner yields a descriptor
/// with zero regions.
inline ImageDescriptor extract_descriptor(const RasterImage& img,
                                          std::string oid,
                                          const SignatureConfig& sig_cfg,
                                          const FeatureConfig& feat_cfg,
                                          const Palette& palette) {
    sig_cfg.validate();
    feat_cfg.validate();
    if (palette.size() != sig_cfg.n_bins)
        throw config_error("extract_descriptor: palette size must equal n_bins");

    RasterImage std_img = standardize(img, feat_cfg.size);
    Field<double> L = visual_luminance<double>(std_img, feat_cfg.sigma_d);
    Field<double> resp = harris_response<double>(L, feat_cfg.alpha,
                                                 feat_cfg.sigma_i,
                                                 feat_cfg.sigma_d);
    double threshold = detection_threshold(resp, feat_cfg.percentile);
    auto points = detect_interest_points(resp, threshold, feat_cfg.neighborhood,
                                         sig_cfg.n_max);

    std::vector<FeatureRegion> regions;
    if (!points.empty()) {
        const auto scales = feat_cfg.log_scales();
        const auto stack =
            log_response_stack<double>(L, std::span<const double>(scales));
        const double cap = feat_cfg.size / 2.0;
        for (auto& p : points) {
            p.scale = select_scale(stack, std::span<const double>(scales), p.x, p.y);
            double r_px = std::min(std::numbers::sqrt2 * p.scale, cap);
            FeatureRegion region;
            region.center = RegionCenter((p.x + 0.5) / feat_cfg.size,
                                         (p.y + 0.5) / feat_cfg.size);
            region.radius = r_px / feat_cfg.size;
            region.histogram = region_histogram(std_img, p.x, p.y, r_px, palette);
            region.signature = encode_region(region.histogram, sig_cfg);
            regions.push_back(std::move(region));
        }
    }
    return make_descriptor(std::move(oid), std::move(regions), sig_cfg);
}

}  // namespace skg
