#include <cstdio>
#include <exception>
#include <numeric>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "convtrack/dataio.hpp"
#include "convtrack/eval.hpp"
#include "convtrack/synth.hpp"
#include "convtrack/tracker.hpp"
#include "selftest.hpp"

namespace {

using namespace convtrack;

BoundingBox parse_init_box(const std::string& text) {
    // mini parser for --init "x,y,w,h"
    std::vector<double> f;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        f.push_back(std::stod(text.substr(pos, comma - pos)));
        pos = comma + 1;
    }
    if (f.size() != 4) throw std::runtime_error("--init expects x,y,w,h");
    return BoundingBox{f[0], f[1], f[2], f[3]};
}

int cmd_track(const std::string& seq_dir, const std::string& out_file,
              const std::string& init_text, bool from_gt,
              const std::string& config_file, const std::string& variant_name_opt,
              long long seed_opt) {
    TrackerConfig cfg;
    if (!config_file.empty()) cfg = load_config(config_file);
    if (seed_opt >= 0) cfg.seed = std::uint64_t(seed_opt);
    if (!variant_name_opt.empty()) cfg.variant = parse_variant(variant_name_opt);
    cfg.validate();

    const Sequence seq = load_sequence(seq_dir);
    BoundingBox init;
    if (from_gt) {
        if (!seq.has_gt()) throw std::runtime_error(seq_dir + ": no ground truth to init from");
        init = seq.gt.front();
    } else {
        init = parse_init_box(init_text);
    }

    const RunRecord rec = run_tracking(seq, init, cfg);
    write_results(rec, out_file);

    const double total_ms = std::accumulate(rec.frame_ms.begin(), rec.frame_ms.end(), 0.0);
    std::fprintf(stderr, "tracked %zu frames in %.1f ms (%.1f ms/frame)\n",
                 rec.boxes.size(), total_ms, total_ms / double(rec.boxes.size()));
    return 0;
}

int cmd_eval(const std::string& results_file, const std::string& gt_file,
             const std::string& out_prefix, int success_samples, int precision_max) {
    const RunRecord rec = read_results(results_file);
    const std::vector<BoundingBox> gt = load_groundtruth(gt_file);
    if (gt.size() != rec.boxes.size()) {
        throw std::runtime_error("results have " + std::to_string(rec.boxes.size()) +
                                 " boxes but ground truth has " + std::to_string(gt.size()));
    }
    std::vector<double> overlaps(gt.size()), errors(gt.size());
    for (std::size_t i = 0; i < gt.size(); ++i) {
        overlaps[i] = overlap_ratio(rec.boxes[i], gt[i]);
        errors[i] = center_error(rec.boxes[i], gt[i]);
    }
    const EvalCurve s = success_curve(overlaps, success_samples);
    const EvalCurve p = precision_curve(errors, precision_max);
    write_curve_csv(s, out_prefix + "success.csv");
    write_curve_csv(p, out_prefix + "precision.csv");
    std::printf("AUC = %s\n", format_double(s.summary).c_str());
    std::printf("precision@20 = %s\n", format_double(p.summary).c_str());
    return 0;
}

int cmd_synth(const std::string& spec_file, const std::string& out_dir) {
    const SynthSpec spec = load_synth_spec(spec_file);
    const Sequence seq = synth_sequence(spec, out_dir);
    std::printf("wrote %zu frames under %s\n", seq.frames.size(), out_dir.c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"convolutional-feature particle tracker"};
    app.require_subcommand(1);

    // track
    auto* track = app.add_subcommand("track", "track one sequence and write a result file");
    std::string seq_dir, out_file, init_text, config_file, variant_text;
    long long seed_opt = -1;
    bool from_gt = false;
    track->add_option("--seq", seq_dir, "sequence directory (img/ + optional ground truth)")
        ->required();
    track->add_option("--out", out_file, "result file to write")->required();
    auto* init_opt = track->add_option("--init", init_text, "first-frame box as x,y,w,h");
    auto* gt_flag = track->add_flag("--from-gt", from_gt, "init from the first ground-truth box");
    init_opt->excludes(gt_flag);
    gt_flag->excludes(init_opt);
    track->add_option("--config", config_file, "tracker config file (key = value lines)");
    track->add_option("--seed", seed_opt, "override the config seed");
    track->add_option("--variant", variant_text, "full | random_filters | no_shrinkage");

    // eval
    auto* eval = app.add_subcommand("eval", "score a result file against ground truth");
    std::string results_file, gt_file, out_prefix;
    int success_samples = 101, precision_max = 50;
    eval->add_option("--results", results_file, "result file from `track`")->required();
    eval->add_option("--gt", gt_file, "ground-truth rectangle file")->required();
    eval->add_option("--out-prefix", out_prefix, "prefix for success/precision CSVs")->required();
    eval->add_option("--success-samples", success_samples, "overlap threshold count (default 101)");
    eval->add_option("--precision-max", precision_max, "largest pixel threshold (default 50)");

    // synth
    auto* synth = app.add_subcommand("synth", "render a synthetic sequence");
    std::string spec_file, synth_out;
    synth->add_option("--spec", spec_file, "synthesis spec file (key = value lines)")->required();
    synth->add_option("--out", synth_out, "output sequence directory")->required();

    // selftest
    auto* selftest = app.add_subcommand("selftest", "run the embedded invariant checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2; // usage error
    }

    try {
        if (track->parsed()) {
            if (init_text.empty() && !from_gt) {
                std::fprintf(stderr, "track: need --init or --from-gt\n");
                return 2;
            }
            return cmd_track(seq_dir, out_file, init_text, from_gt, config_file, variant_text,
                             seed_opt);
        }
        if (eval->parsed()) {
            return cmd_eval(results_file, gt_file, out_prefix, success_samples, precision_max);
        }
        if (synth->parsed()) {
            return cmd_synth(spec_file, synth_out);
        }
        if (selftest->parsed()) {
            return run_selftest() == 0 ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
