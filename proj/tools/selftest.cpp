#include "selftest.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "convtrack/dataio.hpp"
#include "convtrack/eval.hpp"
#include "convtrack/features.hpp"
#include "convtrack/filterbank.hpp"
#include "convtrack/image.hpp"
#include "convtrack/rng.hpp"
#include "convtrack/synth.hpp"
#include "convtrack/tracker.hpp"

namespace {

using namespace convtrack;

int failures = 0;

void check(bool ok, const std::string& name) {
    std::printf("%s — %s\n", ok ? "ok" : "FAIL", name.c_str());
    if (!ok) ++failures;
}

GrayImage noise_image(int n, std::uint64_t seed) {
    Rng rng(seed);
    GrayImage img(n, n);
    for (double& v : img.data) v = rng.uniform();
    return img;
}

void patch_and_rep_dimensions() {
    const GrayImage img = noise_image(32, 7);
    const auto patches = extract_patches(img, 6);
    bool ok = patches.size() == 729;

    FilterBank bank;
    bank.filter_count = 100;
    bank.field_size = 6;
    Rng rng(8);
    for (int i = 0; i < 100; ++i) {
        Patch p(6);
        for (double& v : p.values) v = rng.uniform();
        normalize_patch(p);
        bank.object_filters.push_back(p);
        bank.background_filters.push_back(Patch(6));
    }
    ok = ok && complex_rep(img, bank).dim() == 72900;
    check(ok, "default geometry: 729 patches, 72900-dim representation");
}

void normalization_invariance() {
    Rng rng(21);
    bool ok = true;
    for (int trial = 0; trial < 20; ++trial) {
        Patch p(5);
        for (double& v : p.values) v = rng.uniform();
        Patch q = p;
        for (double& v : q.values) v = 2.5 * v - 0.3;
        normalize_patch(p);
        normalize_patch(q);
        for (std::size_t i = 0; i < p.values.size(); ++i) {
            ok = ok && std::fabs(p.values[i] - q.values[i]) < 1e-9;
        }
    }
    check(ok, "patch normalization cancels brightness/contrast changes");
}

void convolution_oracle() {
    GrayImage img(3, 3);
    for (int i = 0; i < 9; ++i) img.data[i] = i + 1;
    Patch ones(2);
    for (double& v : ones.values) v = 1.0;
    const SimpleCellMap m = convolve_valid(img, ones);
    const bool ok = m.side == 2 && m.at(0, 0) == 12 && m.at(1, 0) == 16 &&
                    m.at(0, 1) == 24 && m.at(1, 1) == 28;
    check(ok, "direct correlation matches a hand-summed 2x2 example");
}

void fft_equivalence() {
    Rng rng(31);
    bool ok = true;
    for (int trial = 0; trial < 8; ++trial) {
        const GrayImage img = noise_image(32, 100 + trial);
        Patch f(6);
        for (double& v : f.values) v = rng.uniform() - 0.5;
        const SimpleCellMap a = convolve_valid(img, f);
        const SimpleCellMap b = convolve_valid_fast(img, f);
        for (std::size_t i = 0; i < a.values.size(); ++i) {
            ok = ok && std::fabs(a.values[i] - b.values[i]) < 1e-6;
        }
    }
    check(ok, "frequency-domain correlation agrees with the direct path");
}

void shrinkage_properties() {
    Rng rng(41);
    bool ok = true;
    for (int trial = 0; trial < 25; ++trial) {
        ComplexCellRep rep;
        rep.map_side = 4;
        rep.map_count = 2;
        rep.values.resize(32);
        for (double& v : rep.values) v = 3.0 * (rng.uniform() - 0.5);
        const double lambda = 1.5 * rng.uniform();
        const ComplexCellRep shrunk = soft_shrink(rep, lambda);
        for (std::size_t i = 0; i < rep.values.size(); ++i) {
            const double v = rep.values[i];
            const double expect = v > lambda ? v - lambda : (v < -lambda ? v + lambda : 0.0);
            ok = ok && shrunk.values[i] == expect;
        }
        // at the adaptive threshold at least half of the entries must vanish
        const ComplexCellRep at_median = soft_shrink(rep, adaptive_lambda(rep));
        int zeros = 0;
        for (double v : at_median.values) zeros += (v == 0.0);
        ok = ok && zeros * 2 >= int(rep.values.size());
    }
    ComplexCellRep tiny;
    tiny.map_side = 1;
    tiny.map_count = 3;
    tiny.values = {-3.0, 1.0, 2.0};
    ok = ok && adaptive_lambda(tiny) == 2.0;
    check(ok, "soft shrinkage formula, median threshold, sparsity >= 50%");
}

void metric_oracles() {
    const BoundingBox a{0, 0, 2, 2}, b{1, 1, 2, 2};
    bool ok = overlap_ratio(a, b) == 1.0 / 7.0;
    ok = ok && overlap_ratio(a, a) == 1.0;
    const BoundingBox c{3, 4, 2, 2};
    ok = ok && center_error(a, c) == 5.0;
    const std::vector<double> perfect(10, 1.0);
    const EvalCurve s = success_curve(perfect);
    for (std::size_t i = 0; i + 1 < s.values.size(); ++i) {
        ok = ok && s.values[i] == 1.0;
    }
    ok = ok && s.values.back() == 0.0; // strict inequality at t = 1
    const EvalCurve p = precision_curve(std::vector<double>(10, 0.0));
    ok = ok && p.summary == 1.0;
    check(ok, "overlap 1/7 example, 3-4-5 center error, perfect-run curves");
}

void kmeans_separation() {
    // two tight, well-separated clusters must be split exactly
    Rng rng(51);
    std::vector<Patch> patches;
    for (int i = 0; i < 10; ++i) {
        Patch p(2);
        for (std::size_t j = 0; j < 4; ++j) {
            p.values[j] = (i < 5 ? 0.0 : 10.0) + 0.1 * rng.uniform();
        }
        patches.push_back(p);
    }
    const KMeansResult km = kmeans_cluster(patches, 2, 7);
    bool ok = true;
    for (int i = 0; i < 10; ++i) {
        ok = ok && (km.assignments[i] == km.assignments[i < 5 ? 0 : 9]);
    }
    ok = ok && (km.assignments[0] != km.assignments[9]);
    for (std::size_t i = 1; i < km.inertia_history.size(); ++i) {
        ok = ok && km.inertia_history[i] <= km.inertia_history[i - 1];
    }
    check(ok, "k-means splits separated clusters; inertia never increases");
}

void template_update_properties() {
    ComplexCellRep a, b;
    a.map_side = b.map_side = 1;
    a.map_count = b.map_count = 2;
    a.values = {1.0, 0.0};
    b.values = {0.0, 1.0};
    const ComplexCellRep mid = update_template(a, b, 0.95);
    // (1-0.95)*1 rounds to 0.05 + 4.4e-17, so compare with a tight tolerance
    bool ok = std::fabs(mid.values[0] - 0.05) < 1e-12 && std::fabs(mid.values[1] - 0.95) < 1e-12;
    ok = ok && update_template(a, b, 0.0).values[0] == 1.0;
    ok = ok && update_template(a, b, 1.0).values[1] == 1.0;
    check(ok, "template blend endpoints and 0.95 example");
}

void background_geometry() {
    const BoundingBox target{100, 100, 40, 20};
    const auto boxes = sample_background_boxes(target, 1000, 1000, 4);
    bool ok = boxes.size() == 4;
    // radius max(w,h) = 40 at angles 0/90/180/270
    ok = ok && std::fabs(boxes[0].cx() - 160.0) < 1e-9 && std::fabs(boxes[0].cy() - 110.0) < 1e-9;
    ok = ok && std::fabs(boxes[1].cx() - 120.0) < 1e-9 && std::fabs(boxes[1].cy() - 150.0) < 1e-9;
    ok = ok && std::fabs(boxes[2].cx() - 80.0) < 1e-9 && std::fabs(boxes[2].cy() - 110.0) < 1e-9;
    ok = ok && std::fabs(boxes[3].cx() - 120.0) < 1e-9 && std::fabs(boxes[3].cy() - 70.0) < 1e-9;
    check(ok, "context boxes ring the target at equal angles");
}

void config_roundtrip() {
    TrackerConfig cfg;
    cfg.warp_size = 16;
    cfg.field_size = 4;
    cfg.filter_count = 20;
    cfg.seed = 42;
    cfg.variant = Variant::no_shrinkage;
    const TrackerConfig back = parse_config_text(serialize_config(cfg));
    check(back == cfg, "config text round-trip");
}

void micro_tracking_determinism() {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "convtrack_selftest_seq";
    fs::remove_all(dir);

    SynthSpec spec;
    spec.frame_width = 96;
    spec.frame_height = 96;
    spec.frames = 6;
    spec.target_size = 28;
    spec.start_x = 10;
    spec.start_y = 34;
    spec.vel_x = 1.5;
    spec.seed = 5;
    const Sequence seq = synth_sequence(spec, dir.string());

    TrackerConfig cfg;
    cfg.warp_size = 16;
    cfg.field_size = 4;
    cfg.filter_count = 20;
    cfg.particle_count = 80;
    cfg.background_samples = 4;
    cfg.seed = 9;

    const RunRecord a = run_tracking(seq, seq.gt.front(), cfg);
    const RunRecord b = run_tracking(seq, seq.gt.front(), cfg);
    const fs::path fa = dir / "a.txt";
    const fs::path fb = dir / "b.txt";
    write_results(a, fa.string());
    write_results(b, fb.string());
    std::ifstream ia(fa, std::ios::binary), ib(fb, std::ios::binary);
    std::stringstream sa, sb;
    sa << ia.rdbuf();
    sb << ib.rdbuf();
    bool ok = !sa.str().empty() && sa.str() == sb.str();
    ok = ok && a.boxes.size() == seq.frames.size();
    fs::remove_all(dir);
    check(ok, "tiny tracking run is byte-reproducible");
}

} // namespace

int run_selftest() {
    failures = 0;
    patch_and_rep_dimensions();
    normalization_invariance();
    convolution_oracle();
    fft_equivalence();
    shrinkage_properties();
    metric_oracles();
    kmeans_separation();
    template_update_properties();
    background_geometry();
    config_roundtrip();
    micro_tracking_determinism();
    if (failures == 0) {
        std::printf("selftest: all 11 checks passed\n");
    } else {
        std::printf("selftest: %d check(s) FAILED\n", failures);
    }
    return failures;
}
