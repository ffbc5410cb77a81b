#include "skgraph/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <random>

#include "skgraph/image.hpp"

namespace skg {

namespace {

struct Rect {
    int x, y, w, h;
    std::uint8_t r, g, b;
};

std::uint8_t clamp8(int v) {
    return static_cast<std::uint8_t>(std::clamp(v, 0, 255));
}

std::string two_digits(int v) {
    return (v < 10 ? "0" : "") + std::to_string(v);
}

}  // namespace

LabeledCorpus generate_synthetic_corpus(const SyntheticCorpusOptions& opt,
                                        const std::filesystem::path& dir) {
    if (opt.subjects < 1 || opt.per_subject < 1 || opt.image_size < 48)
        throw domain_error("generate_synthetic_corpus: invalid options");
    namespace fs = std::filesystem;
    fs::create_directories(dir / "images");

    std::mt19937 rng(opt.seed);
    auto uniform = [&](int lo, int hi) {
        return lo + static_cast<int>(rng() % static_cast<unsigned>(hi - lo + 1));
    };

    const int s = opt.image_size;
    std::ofstream manifest(dir / "manifest.tsv");
    if (!manifest)
        throw data_error("cannot write manifest under " + dir.string());

    std::vector<CorpusItem> items;
    for (int subject = 0; subject < opt.subjects; ++subject) {
        // Subject prototype: dark ground, two well-separated bright
        // rectangles (eight corners, matching the default region budget).
        std::uint8_t bg_r = clamp8(uniform(10, 50));
        std::uint8_t bg_g = clamp8(uniform(10, 50));
        std::uint8_t bg_b = clamp8(uniform(10, 50));
        std::vector<Rect> protos;
        int half = s / 2;
        for (int q = 0; q < 2; ++q) {
            Rect rect;
            rect.w = uniform(s / 6, s / 4);
            rect.h = uniform(s / 6, s / 4);
            // One rectangle per image half keeps them apart.
            rect.x = uniform(6, half - rect.w - 6) + (q == 1 ? half : 0);
            rect.y = uniform(6, s - rect.h - 7);
            rect.r = clamp8(uniform(110, 245));
            rect.g = clamp8(uniform(110, 245));
            rect.b = clamp8(uniform(110, 245));
            protos.push_back(rect);
        }

        std::string label = "s" + two_digits(subject);
        for (int inst = 0; inst < opt.per_subject; ++inst) {
            auto img = RasterImage::filled(s, s, bg_r, bg_g, bg_b);
            for (const Rect& p : protos) {
                Rect rect = p;
                rect.x += uniform(-1, 1);
                rect.y += uniform(-1, 1);
                rect.r = clamp8(rect.r + uniform(-6, 6));
                rect.g = clamp8(rect.g + uniform(-6, 6));
                rect.b = clamp8(rect.b + uniform(-6, 6));
                for (int y = rect.y; y < rect.y + rect.h; ++y)
                    for (int x = rect.x; x < rect.x + rect.w; ++x)
                        if (x >= 0 && x < s && y >= 0 && y < s)
                            img.set_rgb(x, y, rect.r, rect.g, rect.b);
            }
            std::string oid = label + "_" + two_digits(inst);
            std::string rel = "images/" + oid + ".ppm";
            write_ppm(img, dir / rel);
            manifest << oid << '\t' << label << '\t' << rel << '\n';
            items.push_back({oid, label, dir / rel});
        }
    }
    manifest.close();
    if (!manifest) throw data_error("short write on manifest");
    return LabeledCorpus(std::move(items));
}

}  // namespace skg
