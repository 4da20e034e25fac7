#pragma once

#include <cstdint>
#include <string>

#include "convtrack/dataio.hpp"

namespace convtrack {

// Scripted sequence: a textured square target on a textured background,
// moving linearly, optionally breathing in scale and brightening over time.
// Ground truth is the exact continuous box, not the rasterized one.
struct SynthSpec {
    int frame_width = 240;
    int frame_height = 240;
    int frames = 50;
    double target_size = 64.0;      // side at scale 1
    double start_x = 24.0;          // top-left of the target at frame 0
    double start_y = 88.0;
    double vel_x = 2.0;             // px/frame, applied to the center
    double vel_y = 0.0;
    double scale_amplitude = 0.0;   // s(t) = 1 + amp * sin(2*pi*t/period)
    double scale_period = 25.0;
    double brightness_rate = 0.0;   // added to every pixel at frame t: rate*t
    std::uint64_t seed = 1;
    // Texture defaults: a fine low-contrast target over strong fine clutter.
    // This family separates the tracker variants cleanly (the sparse template
    // ignores clutter churn in weak coordinates) while staying trackable.
    int target_cells = 32;          // texture detail (value-noise grid size)
    int background_cells = 96;
    double target_contrast = 0.28;  // texture value span around 0.5
    double background_contrast = 1.0;

    void validate() const; // throws std::invalid_argument
    bool operator==(const SynthSpec&) const = default;
};

SynthSpec parse_synth_text(const std::string& text);
SynthSpec load_synth_spec(const std::string& path);
std::string serialize_synth_spec(const SynthSpec& spec);

// Render one frame (t is 0-based) without touching the filesystem.
GrayImage synth_frame(const SynthSpec& spec, int t);

// Exact ground-truth box of frame t.
BoundingBox synth_gt(const SynthSpec& spec, int t);

// Materialize the whole sequence under out_dir (img/0001.pgm ... plus
// groundtruth_rect.txt) and return it loaded.
Sequence synth_sequence(const SynthSpec& spec, const std::string& out_dir);

} // namespace convtrack
