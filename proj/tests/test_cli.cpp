#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <string>
#include <vector>

#include "skgraph/store.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
};

std::string binary() {
    const char* p = std::getenv("SKGRAPH_BIN");
    REQUIRE_MESSAGE(p != nullptr, "SKGRAPH_BIN must point at the CLI binary");
    return p;
}

// Runs a shell command capturing stdout (stderr goes wherever the caller
// redirected it).
RunResult run(const std::string& cmd) {
    RunResult r;
    std::FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof(buf), pipe)) > 0) r.out.append(buf, n);
    int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::vector<char> slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    return std::vector<char>(std::istreambuf_iterator<char>(in),
                             std::istreambuf_iterator<char>());
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> lines;
    std::string line;
    std::istringstream in(text);
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

const fs::path kWork = fs::temp_directory_path() / "skg_cli_test";

struct Fixture {
    Fixture() {
        fs::remove_all(kWork);
        fs::create_directories(kWork);
        auto gen = run(binary() + " gen-corpus --out " + corpus_dir().string() +
                       " --subjects 5 --per-subject 5 --seed 3 2>/dev/null");
        REQUIRE(gen.exit_code == 0);
    }
    static fs::path corpus_dir() { return kWork / "corpus"; }
    static fs::path manifest() { return corpus_dir() / "manifest.tsv"; }
};

}  // namespace

TEST_CASE("index / query / inspect round") {
    Fixture fx;
    auto index_path = kWork / "round.skg";
    auto res = run(binary() + " index --manifest " + fx.manifest().string() +
                   " --out " + index_path.string() +
                   " --size 64 --theta 0.15 --deterministic 2>/dev/null");
    REQUIRE(res.exit_code == 0);
    CHECK(res.out.find("indexed 25 of 25") != std::string::npos);

    SUBCASE("reindexing the same inputs is byte-identical") {
        auto again = kWork / "round2.skg";
        auto res2 = run(binary() + " index --manifest " + fx.manifest().string() +
                        " --out " + again.string() +
                        " --size 64 --theta 0.15 --deterministic 2>/dev/null");
        REQUIRE(res2.exit_code == 0);
        CHECK(slurp(index_path) == slurp(again));
    }
    SUBCASE("query output follows the documented grammar") {
        std::regex hit_re(R"(^([0-9]+) (\S+) ([0-9]+\.[0-9]{6})$)");
        std::regex summary_re(
            R"(^# phi_evaluations=[0-9]+ clusters_visited=[0-9]+ candidates=[0-9]+ wall_time_ms=[0-9.eE+-]+$)");
        int checked = 0;
        for (const auto& entry :
             fs::directory_iterator(fx.corpus_dir() / "images")) {
            for (int k_q = 0; k_q <= 3; ++k_q) {
                auto q = run(binary() + " query --index " + index_path.string() +
                             " --image " + entry.path().string() +
                             " --k-query " + std::to_string(k_q) +
                             " --topk -1 2>/dev/null");
                REQUIRE(q.exit_code == 0);
                auto lines = lines_of(q.out);
                REQUIRE(!lines.empty());
                double prev_phi = -1.0;
                for (std::size_t i = 0; i + 1 < lines.size(); ++i) {
                    std::smatch m;
                    REQUIRE_MESSAGE(std::regex_match(lines[i], m, hit_re),
                                    lines[i]);
                    REQUIRE(std::stoul(m[1]) == i + 1);
                    double phi = std::stod(m[3]);
                    REQUIRE(phi >= prev_phi);
                    prev_phi = phi;
                }
                REQUIRE_MESSAGE(std::regex_match(lines.back(), summary_re),
                                lines.back());
                ++checked;
            }
        }
        CHECK(checked == 100);
    }
    SUBCASE("a query for an indexed image ranks it first at zero") {
        auto q = run(binary() + " query --index " + index_path.string() +
                     " --image " +
                     (fx.corpus_dir() / "images" / "s02_01.ppm").string() +
                     " 2>/dev/null");
        REQUIRE(q.exit_code == 0);
        auto lines = lines_of(q.out);
        REQUIRE(!lines.empty());
        CHECK(lines[0] == "1 s02_01 0.000000");
    }
    SUBCASE("inspect lists clusters and edges") {
        auto res2 = run(binary() + " inspect --index " + index_path.string() +
                        " 2>/dev/null");
        REQUIRE(res2.exit_code == 0);
        CHECK(res2.out.find("clusters") != std::string::npos);
        CHECK(res2.out.find("cluster 0 center=") != std::string::npos);

        auto res3 = run(binary() + " inspect --signatures --index " +
                        index_path.string() + " 2>/dev/null");
        REQUIRE(res3.exit_code == 0);
        CHECK(res3.out.find("sig v1:32:10:") != std::string::npos);
    }
}

TEST_CASE("k_q = 0 against a single-cluster index lists the whole corpus") {
    Fixture fx;
    auto index_path = kWork / "coarse.skg";
    // Theta well above every pairwise distance: one cluster holds all.
    auto res = run(binary() + " index --manifest " + fx.manifest().string() +
                   " --out " + index_path.string() +
                   " --size 64 --theta 3.0 2>/dev/null");
    REQUIRE(res.exit_code == 0);
    auto ins = run(binary() + " inspect --index " + index_path.string() +
                   " 2>/dev/null");
    REQUIRE(ins.out.find("1 clusters") != std::string::npos);
    auto q = run(binary() + " query --index " + index_path.string() +
                 " --image " + (fx.corpus_dir() / "images" / "s00_00.ppm").string() +
                 " --k-query 0 --topk -1 2>/dev/null");
    REQUIRE(q.exit_code == 0);
    CHECK(lines_of(q.out).size() == 25 + 1);  // every image + summary line
}

TEST_CASE("corrupt corpus entries are skipped with a warning") {
    Fixture fx;
    // Three-image manifest, one broken.
    auto dir = kWork / "faulty";
    fs::create_directories(dir);
    std::ofstream(dir / "broken.ppm") << "P6 oops";
    {
        std::ofstream m(dir / "manifest.tsv");
        m << "ok1\ta\t" << (fx.corpus_dir() / "images" / "s00_00.ppm").string()
          << "\n";
        m << "ok2\ta\t" << (fx.corpus_dir() / "images" / "s00_01.ppm").string()
          << "\n";
        m << "bad\tb\tbroken.ppm\n";
    }
    auto index_path = kWork / "faulty.skg";
    auto res = run(binary() + " index --manifest " +
                   (dir / "manifest.tsv").string() + " --out " +
                   index_path.string() + " --size 64 2>" +
                   (kWork / "stderr.txt").string());
    CHECK(res.exit_code == 0);
    CHECK(res.out.find("indexed 2 of 3") != std::string::npos);
    auto err = slurp(kWork / "stderr.txt");
    std::string err_text(err.begin(), err.end());
    CHECK(err_text.find("warning: skipping bad") != std::string::npos);
    // The faulty index stays loadable with the two good descriptors.
    auto ins = run(binary() + " inspect --index " + index_path.string() +
                   " 2>/dev/null");
    REQUIRE(ins.exit_code == 0);
    CHECK(ins.out.find("2 descriptors") != std::string::npos);
}

TEST_CASE("exit codes distinguish usage, data and format errors") {
    Fixture fx;
    CHECK(run(binary() + " index 2>/dev/null").exit_code == 1);
    CHECK(run(binary() + " nosuchcommand 2>/dev/null").exit_code == 1);
    CHECK(run(binary() + " inspect --index /no/such/file 2>/dev/null").exit_code ==
          2);

    auto index_path = kWork / "codes.skg";
    auto res = run(binary() + " index --manifest " + fx.manifest().string() +
                   " --out " + index_path.string() + " --size 64 2>/dev/null");
    REQUIRE(res.exit_code == 0);

    SUBCASE("version mismatch names both versions on exit 3") {
        auto bytes = slurp(index_path);
        bytes[8] = 7;
        auto bad = kWork / "vers.skg";
        std::ofstream(bad, std::ios::binary).write(bytes.data(), bytes.size());
        auto r = run(binary() + " inspect --index " + bad.string() + " 2>" +
                     (kWork / "err2.txt").string());
        CHECK(r.exit_code == 3);
        auto err = slurp(kWork / "err2.txt");
        std::string t(err.begin(), err.end());
        CHECK(t.find("version 7") != std::string::npos);
        CHECK(t.find("version 1") != std::string::npos);
    }
    SUBCASE("truncated index is a format error") {
        auto bytes = slurp(index_path);
        bytes.resize(bytes.size() / 3);
        auto bad = kWork / "trunc.skg";
        std::ofstream(bad, std::ios::binary).write(bytes.data(), bytes.size());
        CHECK(run(binary() + " inspect --index " + bad.string() +
                  " 2>/dev/null").exit_code == 3);
    }
    SUBCASE("all images failing yields a data error") {
        auto dir = kWork / "allbad";
        fs::create_directories(dir);
        std::ofstream(dir / "nope.ppm") << "junk";
        std::ofstream(dir / "manifest.tsv") << "x\ta\tnope.ppm\n";
        CHECK(run(binary() + " index --manifest " +
                  (dir / "manifest.tsv").string() + " --out " +
                  (dir / "o.skg").string() + " 2>/dev/null").exit_code == 2);
    }
}

TEST_CASE("inspect reports an empty index") {
    fs::create_directories(kWork);
    skg::SignatureConfig cfg;
    skg::Index empty{skg::FeatureConfig{}, skg::Palette::uniform_lattice(),
                     skg::SKGraph(cfg, 0.25, 3)};
    auto p = kWork / "empty.skg";
    skg::save_index(empty, p);
    auto res = run(binary() + " inspect --index " + p.string() + " 2>/dev/null");
    REQUIRE(res.exit_code == 0);
    CHECK(res.out.find("0 clusters") != std::string::npos);
}

TEST_CASE("bench emits the CSV and calibrate sweeps theta") {
    Fixture fx;
    auto csv_path = kWork / "report.csv";
    auto res = run(binary() + " bench --manifest " + fx.manifest().string() +
                   " --size 64 --theta 0.15 --k-query 2 --topk 5 --output " +
                   csv_path.string() + " 2>/dev/null");
    REQUIRE(res.exit_code == 0);
    auto csv = slurp(csv_path);
    std::string text(csv.begin(), csv.end());
    auto lines = lines_of(text);
    REQUIRE(!lines.empty());
    CHECK(lines[0] ==
          "oid,method,phi_evaluations,wall_time_seconds,precision_at_k,recall");
    CHECK(lines.size() == 1 + 25 * 2 + 2);

    auto cal = run(binary() + " calibrate --manifest " + fx.manifest().string() +
                   " --size 64 --thetas 0.05 0.1 0.25 0.5 2>/dev/null");
    REQUIRE(cal.exit_code == 0);
    auto cal_lines = lines_of(cal.out);
    REQUIRE(cal_lines.size() == 5);
    long prev = -1;
    for (std::size_t i = 1; i < cal_lines.size(); ++i) {
        std::istringstream ss(cal_lines[i]);
        double theta;
        long clusters;
        REQUIRE((ss >> theta >> clusters));
        if (prev >= 0) CHECK(clusters <= prev);  // coarser theta, fewer clusters
        prev = clusters;
    }
}

TEST_CASE("SKGRAPH_CONFIG provides defaults that flags override") {
    Fixture fx;
    auto cfg_path = kWork / "conf.json";
    std::ofstream(cfg_path) << R"({"theta": 0.4, "size": 64})";
    auto index_path = kWork / "cfg.skg";
    auto res = run("SKGRAPH_CONFIG=" + cfg_path.string() + " " + binary() +
                   " index --manifest " + fx.manifest().string() + " --out " +
                   index_path.string() + " 2>/dev/null");
    REQUIRE(res.exit_code == 0);
    auto ins = run(binary() + " inspect --index " + index_path.string() +
                   " 2>/dev/null");
    CHECK(ins.out.find("theta 0.4") != std::string::npos);

    auto index2 = kWork / "cfg2.skg";
    auto res2 = run("SKGRAPH_CONFIG=" + cfg_path.string() + " " + binary() +
                    " index --manifest " + fx.manifest().string() +
                    " --theta 0.2 --out " + index2.string() + " 2>/dev/null");
    REQUIRE(res2.exit_code == 0);
    auto ins2 = run(binary() + " inspect --index " + index2.string() +
                    " 2>/dev/null");
    CHECK(ins2.out.find("theta 0.2") != std::string::npos);

    SUBCASE("broken config file is a data error") {
        std::ofstream(cfg_path) << "{nope";
        CHECK(run("SKGRAPH_CONFIG=" + cfg_path.string() + " " + binary() +
                  " inspect --index " + index_path.string() +
                  " 2>/dev/null").exit_code == 2);
    }
}
