#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "skgraph/descriptor.hpp"

using namespace skg;

namespace {

SignatureConfig cfg32{};

std::vector<double> random_histogram(int n_bins, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(1e-6, 1.0);
    std::vector<double> h(n_bins);
    double sum = 0;
    for (auto& v : h) {
        v = -std::log(u(rng));
        sum += v;
    }
    for (auto& v : h) v /= sum;
    return h;
}

FeatureRegion random_region(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    FeatureRegion r;
    r.center = RegionCenter(u(rng), u(rng));
    r.radius = 0.05 + 0.4 * u(rng);
    r.histogram = random_histogram(cfg32.n_bins, rng);
    r.signature = encode_region(r.histogram, cfg32);
    return r;
}

ImageDescriptor random_descriptor(const std::string& oid,
                                  std::mt19937_64& rng) {
    std::uniform_int_distribution<int> nr(1, cfg32.n_max);
    std::vector<FeatureRegion> regions;
    int n = nr(rng);
    for (int i = 0; i < n; ++i) regions.push_back(random_region(rng));
    return make_descriptor(oid, std::move(regions), cfg32);
}

}  // namespace

TEST_CASE("region_center finds the diameter midpoint") {
    SUBCASE("unit square corners") {
        std::vector<RegionCenter> b = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
        auto c = region_center(b);
        CHECK(c.x() == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(c.y() == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("single point") {
        std::vector<RegionCenter> b = {{0.2, 0.2}};
        auto c = region_center(b);
        CHECK(c.x() == 0.2);
        CHECK(c.y() == 0.2);
    }
    SUBCASE("sampled circle recovers the circle center") {
        std::vector<RegionCenter> b;
        for (int i = 0; i < 64; ++i) {
            double t = 2.0 * std::numbers::pi * i / 64;
            b.emplace_back(0.3 + 0.1 * std::cos(t), 0.4 + 0.1 * std::sin(t));
        }
        // Oracle: naive scan over all ordered pairs.
        double best = -1;
        RegionCenter mid(0, 0);
        for (const auto& p : b)
            for (const auto& q : b) {
                double d = (p - q).norm();
                if (d > best) {
                    best = d;
                    mid = (p + q) / 2.0;
                }
            }
        auto c = region_center(b);
        CHECK(std::abs(c.x() - mid.x()) < 1e-12);
        CHECK(std::abs(c.y() - mid.y()) < 1e-12);
        CHECK(std::abs(c.x() - 0.3) < 1e-6);
        CHECK(std::abs(c.y() - 0.4) < 1e-6);
    }
    SUBCASE("empty boundary rejected") {
        CHECK_THROWS_AS(region_center(std::vector<RegionCenter>{}),
                        domain_error);
    }
    SUBCASE("out-of-range coordinates rejected") {
        std::vector<RegionCenter> b = {{1.5, 0.0}};
        CHECK_THROWS_AS(region_center(b), domain_error);
    }
}

TEST_CASE("region_distance") {
    std::mt19937_64 rng(17);
    auto a = random_region(rng);

    SUBCASE("identity") { CHECK(region_distance(a, a) == 0.0); }
    SUBCASE("pure geometric term") {
        auto b = a;
        a.center = RegionCenter(0, 0);
        b.center = RegionCenter(1, 1);
        CHECK(region_distance(a, b) ==
              doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    }
    SUBCASE("triangle inequality on random triples") {
        for (int trial = 0; trial < 10000; ++trial) {
            auto x = random_region(rng);
            auto y = random_region(rng);
            auto z = random_region(rng);
            double dxy = region_distance(x, y);
            double dyz = region_distance(y, z);
            double dxz = region_distance(x, z);
            REQUIRE(dxz <= dxy + dyz + 1e-12);
            REQUIRE(dxy == region_distance(y, x));
            REQUIRE(dxy >= 0.0);
        }
    }
    SUBCASE("configuration mismatch rejected") {
        auto b = a;
        SignatureConfig small{.n_bins = 8, .m = 4, .offset = 0.05, .n_max = 8};
        std::vector<double> h(8, 0.125);
        b.signature = encode_region(h, small);
        CHECK_THROWS_AS(region_distance(a, b), config_error);
    }
}

TEST_CASE("image_similarity") {
    std::mt19937_64 rng(19);

    SUBCASE("identity") {
        auto a = random_descriptor("a", rng);
        CHECK(image_similarity(a, a, cfg32) == 0.0);
    }
    SUBCASE("pure geometric term") {
        auto a = random_descriptor("a", rng);
        auto b = a;
        b.centroid = a.centroid + RegionCenter(0.3, 0.0);
        CHECK(image_similarity(a, b, cfg32) == doctest::Approx(0.3).epsilon(1e-12));
    }
    SUBCASE("metric axioms on 1000 random descriptor triples") {
        for (int trial = 0; trial < 1000; ++trial) {
            auto x = random_descriptor("x", rng);
            auto y = random_descriptor("y", rng);
            auto z = random_descriptor("z", rng);
            double dxy = image_similarity(x, y, cfg32);
            double dyz = image_similarity(y, z, cfg32);
            double dxz = image_similarity(x, z, cfg32);
            REQUIRE(dxy >= 0.0);
            REQUIRE(dxy == image_similarity(y, x, cfg32));
            REQUIRE(dxz <= dxy + dyz + 1e-12);
        }
    }
    SUBCASE("bounded by 1 + sqrt(2) under the normalization") {
        for (int trial = 0; trial < 2000; ++trial) {
            auto x = random_descriptor("x", rng);
            auto y = random_descriptor("y", rng);
            REQUIRE(image_similarity(x, y, cfg32) <= 1.0 + std::sqrt(2.0));
        }
    }
    SUBCASE("zero-region descriptors are usable") {
        auto zero = make_descriptor("z", {}, cfg32);
        CHECK(zero.centroid == RegionCenter(0.5, 0.5));
        CHECK(zero.signature.popcount() == 0);
        CHECK(!zero.has_regions());
        auto a = random_descriptor("a", rng);
        CHECK(image_similarity(zero, a, cfg32) >= 0.0);
    }
}

TEST_CASE("rank_results") {
    std::mt19937_64 rng(31);
    auto query = random_descriptor("query", rng);

    SUBCASE("self-match ranks first with zero distance") {
        std::vector<ImageDescriptor> cands = {query};
        auto hits = rank_results(query, cands, 10.0, cfg32);
        REQUIRE(hits.size() == 1);
        CHECK(hits[0].oid == "query");
        CHECK(hits[0].phi == 0.0);
    }
    SUBCASE("zero threshold excludes all distinct candidates") {
        std::vector<ImageDescriptor> cands;
        for (int i = 0; i < 10; ++i)
            cands.push_back(random_descriptor("c" + std::to_string(i), rng));
        auto hits = rank_results(query, cands, 0.0, cfg32);
        CHECK(hits.empty());
    }
    SUBCASE("matches the exhaustive sort-then-filter oracle") {
        std::vector<ImageDescriptor> cands;
        for (int i = 0; i < 100; ++i)
            cands.push_back(random_descriptor("c" + std::to_string(i), rng));
        double theta_q = 0.9;

        std::vector<RankedHit> oracle;
        for (const auto& c : cands) {
            double phi = image_similarity(query, c, cfg32);
            if (phi <= theta_q) oracle.push_back({c.oid, phi});
        }
        std::stable_sort(oracle.begin(), oracle.end(),
                         [](const RankedHit& a, const RankedHit& b) {
                             if (a.phi != b.phi) return a.phi < b.phi;
                             return a.oid < b.oid;
                         });
        auto hits = rank_results(query, cands, theta_q, cfg32);
        CHECK(hits == oracle);

        SUBCASE("permuting the input never changes the output") {
            std::shuffle(cands.begin(), cands.end(), rng);
            CHECK(rank_results(query, cands, theta_q, cfg32) == hits);
        }
        SUBCASE("shrinking the threshold yields a prefix subset") {
            auto narrow = rank_results(query, cands, theta_q / 2, cfg32);
            REQUIRE(narrow.size() <= hits.size());
            for (std::size_t i = 0; i < narrow.size(); ++i)
                CHECK(narrow[i] == hits[i]);
        }
    }
}
