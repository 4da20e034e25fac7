#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"

#include "convtrack/dataio.hpp"
#include "convtrack/image_io.hpp"
#include "convtrack/synth.hpp"

using namespace convtrack;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("convtrack_" + tag);
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

std::string read_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

GrayImage tiny_frame(double fill) {
    GrayImage img{16, 12};
    for (double& v : img.data) v = fill;
    return img;
}

} // namespace

TEST_SUITE("dataio") {

TEST_CASE("ground-truth parsing") {
    SUBCASE("comma, tab and space separators all work") {
        for (const char* text : {"10,20,30,40", "10\t20\t30\t40", "10 20 30 40"}) {
            const auto boxes = parse_groundtruth_text(text);
            REQUIRE(boxes.size() == 1);
            CHECK(boxes[0].x == 10);
            CHECK(boxes[0].y == 20);
            CHECK(boxes[0].w == 30);
            CHECK(boxes[0].h == 40);
        }
    }
    SUBCASE("comments and blank lines are skipped") {
        const auto boxes = parse_groundtruth_text("# header\n\n1,2,3,4\n\n5,6,7,8\n");
        CHECK(boxes.size() == 2);
    }
    SUBCASE("wrong arity reports the line number") {
        try {
            parse_groundtruth_text("1,2,3,4\n10,20,30\n");
            FAIL("expected a parse error");
        } catch (const std::runtime_error& e) {
            CHECK(std::string(e.what()).find("line 2") != std::string::npos);
        }
        CHECK_THROWS(parse_groundtruth_text("1,2,3,4,5\n"));
        CHECK_THROWS(parse_groundtruth_text("1,2,three,4\n"));
    }
}

TEST_CASE("sequence loading") {
    SUBCASE("frames without ground truth") {
        TempDir dir("seq_holder");
        const fs::path root = dir.path / "seq_nogt"; // sequence name == directory name
        fs::create_directories(root / "img");
        for (int i = 1; i <= 3; ++i) {
            write_pgm(tiny_frame(0.25 * i), (root / "img" / (std::to_string(i) + ".pgm")).string());
        }
        const Sequence seq = load_sequence(root.string());
        CHECK(seq.frames.size() == 3);
        CHECK_FALSE(seq.has_gt());
        CHECK(seq.name == "seq_nogt");
    }
    SUBCASE("matching ground truth is attached") {
        TempDir dir("seq_gt");
        fs::create_directories(dir.path / "img");
        for (int i = 1; i <= 3; ++i) {
            write_pgm(tiny_frame(0.5), (dir.path / "img" / (std::to_string(i) + ".pgm")).string());
        }
        write_text(dir.path / "groundtruth_rect.txt", "1,1,4,4\n2,1,4,4\n3,1,4,4\n");
        const Sequence seq = load_sequence(dir.path.string());
        REQUIRE(seq.has_gt());
        CHECK(seq.gt.size() == 3);
        CHECK(seq.gt[2].x == 3);
    }
    SUBCASE("a frame/ground-truth count mismatch is an error") {
        TempDir dir("seq_mismatch");
        fs::create_directories(dir.path / "img");
        for (int i = 1; i <= 3; ++i) {
            write_pgm(tiny_frame(0.5), (dir.path / "img" / (std::to_string(i) + ".pgm")).string());
        }
        write_text(dir.path / "groundtruth_rect.txt", "1,1,4,4\n2,1,4,4\n");
        CHECK_THROWS(load_sequence(dir.path.string()));
    }
    SUBCASE("frames sort numerically, not lexically") {
        TempDir dir("seq_order");
        fs::create_directories(dir.path / "img");
        for (int i : {10, 2, 1}) {
            write_pgm(tiny_frame(0.5), (dir.path / "img" / (std::to_string(i) + ".pgm")).string());
        }
        const Sequence seq = load_sequence(dir.path.string());
        REQUIRE(seq.frames.size() == 3);
        CHECK(fs::path(seq.frames[0]).filename() == "1.pgm");
        CHECK(fs::path(seq.frames[1]).filename() == "2.pgm");
        CHECK(fs::path(seq.frames[2]).filename() == "10.pgm");
    }
    SUBCASE("missing img directory is an error") {
        TempDir dir("seq_empty");
        CHECK_THROWS(load_sequence(dir.path.string()));
    }
}

TEST_CASE("result files") {
    TempDir dir("results");
    const fs::path file = dir.path / "run.txt";

    SUBCASE("write/read round-trip preserves the record") {
        RunRecord rec;
        rec.sequence_name = "demo";
        rec.config.seed = 42;
        rec.config.variant = Variant::no_shrinkage;
        rec.config.sigma_scale = 0.015;
        rec.boxes = {{1, 2, 3, 4}, {1.25, 2.5, 3.75, 4.125}};
        rec.frame_ms = {12.0, 8.0}; // transient: not serialized, not compared
        write_results(rec, file.string());
        const RunRecord back = read_results(file.string());
        CHECK(back == rec);
        CHECK(back.frame_ms.empty());
    }
    SUBCASE("an empty record writes a header-only file that fails to read") {
        RunRecord rec;
        rec.sequence_name = "empty";
        write_results(rec, file.string());
        CHECK_THROWS(read_results(file.string()));
    }
    SUBCASE("a plain hand-written file parses") {
        write_text(file, "1,2,3,4\n5,6,7,8\n");
        const RunRecord rec = read_results(file.string());
        CHECK(rec.boxes.size() == 2);
        CHECK(rec.config == TrackerConfig{}); // defaults when no header
    }
}

TEST_CASE("config text") {
    SUBCASE("serialize/parse round-trip") {
        TrackerConfig cfg;
        cfg.warp_size = 24;
        cfg.field_size = 5;
        cfg.learning_rate = 0.875;
        cfg.seed = 1234567890123ull;
        cfg.variant = Variant::random_filters;
        cfg.use_motion_prior = true;
        CHECK(parse_config_text(serialize_config(cfg)) == cfg);
    }
    SUBCASE("omitted keys keep their defaults") {
        const TrackerConfig cfg = parse_config_text("seed = 9\n");
        TrackerConfig want;
        want.seed = 9;
        CHECK(cfg == want);
    }
    SUBCASE("unknown, repeated, and malformed keys are errors") {
        CHECK_THROWS(parse_config_text("warp_sise = 32\n"));
        CHECK_THROWS(parse_config_text("seed = 1\nseed = 2\n"));
        CHECK_THROWS(parse_config_text("seed = banana\n"));
        CHECK_THROWS(parse_config_text("learning_rate = 2.0\n")); // fails validation
    }
}

TEST_CASE("synthetic sequences") {
    SUBCASE("zero velocity keeps the ground truth fixed") {
        SynthSpec spec;
        spec.frames = 6;
        spec.vel_x = spec.vel_y = 0;
        for (int t = 1; t < spec.frames; ++t) {
            const BoundingBox b = synth_gt(spec, t), b0 = synth_gt(spec, 0);
            CHECK(b.x == b0.x);
            CHECK(b.y == b0.y);
            CHECK(b.w == b0.w);
            CHECK(b.h == b0.h);
        }
    }
    SUBCASE("unit velocity advances x by exactly one per frame") {
        SynthSpec spec;
        spec.frames = 10;
        spec.vel_x = 1;
        spec.vel_y = 0;
        for (int t = 0; t < spec.frames; ++t) {
            CHECK(synth_gt(spec, t).x == synth_gt(spec, 0).x + t);
        }
    }
    SUBCASE("brightness ramp adds t*rate to every unclamped pixel") {
        SynthSpec spec;
        spec.frames = 5;
        spec.vel_x = 0; // hold the scene still so only the ramp differs
        spec.brightness_rate = 0.01;
        spec.target_contrast = 0.2; // keep everything well inside [0,1]
        spec.background_contrast = 0.2;
        const GrayImage f0 = synth_frame(spec, 0);
        const GrayImage f3 = synth_frame(spec, 3);
        for (std::size_t i = 0; i < f0.data.size(); ++i) {
            CHECK(f3.data[i] == doctest::Approx(f0.data[i] + 3 * 0.01).epsilon(1e-12));
        }
    }
    SUBCASE("materialized sequences are byte-reproducible") {
        SynthSpec spec;
        spec.frames = 3;
        spec.frame_width = spec.frame_height = 64;
        spec.target_size = 20;
        spec.start_x = spec.start_y = 10;
        TempDir a("synth_a"), b("synth_b");
        const Sequence sa = synth_sequence(spec, a.path.string());
        const Sequence sb = synth_sequence(spec, b.path.string());
        REQUIRE(sa.frames.size() == sb.frames.size());
        for (std::size_t i = 0; i < sa.frames.size(); ++i) {
            CHECK(read_bytes(sa.frames[i]) == read_bytes(sb.frames[i]));
        }
        CHECK(read_bytes(a.path / "groundtruth_rect.txt") ==
              read_bytes(b.path / "groundtruth_rect.txt"));
    }
    SUBCASE("spec text round-trips and validates") {
        SynthSpec spec;
        spec.frames = 7;
        spec.scale_amplitude = 0.04;
        spec.seed = 77;
        CHECK(parse_synth_text(serialize_synth_spec(spec)) == spec);
        CHECK_THROWS(parse_synth_text("target_size = 500\n")); // larger than the frame
        CHECK_THROWS(parse_synth_text("synth_key = 1\n"));
    }
}

TEST_CASE("tracking a sequence starts from the given box") {
    SynthSpec spec;
    spec.frames = 3;
    spec.frame_width = spec.frame_height = 96;
    spec.target_size = 28;
    spec.start_x = spec.start_y = 30;
    spec.vel_x = 1;
    TempDir dir("run");
    const Sequence seq = synth_sequence(spec, dir.path.string());

    TrackerConfig cfg;
    cfg.warp_size = 16;
    cfg.field_size = 4;
    cfg.filter_count = 15;
    cfg.particle_count = 60;
    cfg.background_samples = 4;
    const RunRecord rec = run_tracking(seq, seq.gt[0], cfg);
    REQUIRE(rec.boxes.size() == 3);
    CHECK(rec.boxes[0].x == seq.gt[0].x);
    CHECK(rec.boxes[0].y == seq.gt[0].y);
    CHECK(rec.boxes[0].w == seq.gt[0].w);
    CHECK(rec.boxes[0].h == seq.gt[0].h);
    CHECK(rec.frame_ms.size() == 3);
}

} // TEST_SUITE
