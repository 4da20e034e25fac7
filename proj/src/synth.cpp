#include "convtrack/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "convtrack/image_io.hpp"
#include "convtrack/rng.hpp"
#include "kv_util.hpp"

namespace fs = std::filesystem;

namespace convtrack {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

// smooth random texture: a coarse grid of uniforms, bilinearly upsampled and
// squeezed into [0.5 - contrast/2, 0.5 + contrast/2]
struct ValueNoise {
    int cells;
    std::vector<double> grid; // (cells+1)^2

    ValueNoise(int cells_, double contrast, std::uint64_t seed) : cells(cells_) {
        Rng rng(seed);
        grid.resize(std::size_t(cells + 1) * (cells + 1));
        for (double& v : grid) {
            v = 0.5 + (rng.uniform() - 0.5) * contrast;
        }
    }

    double sample(double u, double v) const {
        const double gx = std::clamp(u, 0.0, 1.0) * cells;
        const double gy = std::clamp(v, 0.0, 1.0) * cells;
        const int x0 = std::min(int(gx), cells - 1);
        const int y0 = std::min(int(gy), cells - 1);
        const double ax = gx - x0;
        const double ay = gy - y0;
        const int stride = cells + 1;
        const double v00 = grid[std::size_t(y0) * stride + x0];
        const double v10 = grid[std::size_t(y0) * stride + x0 + 1];
        const double v01 = grid[std::size_t(y0 + 1) * stride + x0];
        const double v11 = grid[std::size_t(y0 + 1) * stride + x0 + 1];
        const double top = v00 + ax * (v10 - v00);
        const double bot = v01 + ax * (v11 - v01);
        return top + ay * (bot - top);
    }
};

constexpr std::uint64_t kTargetTextureStream = 11;
constexpr std::uint64_t kBackgroundTextureStream = 12;

} // namespace

void SynthSpec::validate() const {
    if (frame_width < 1 || frame_height < 1) {
        throw std::invalid_argument("synth: frame dimensions must be positive");
    }
    if (frames < 1) throw std::invalid_argument("synth: need at least one frame");
    if (!(target_size >= 1.0)) throw std::invalid_argument("synth: target too small");
    if (target_size > frame_width || target_size > frame_height) {
        throw std::invalid_argument("synth: target larger than frame");
    }
    if (!(std::fabs(scale_amplitude) < 1.0)) {
        throw std::invalid_argument("synth: |scale_amplitude| must be below 1");
    }
    if (scale_amplitude != 0.0 && !(scale_period > 0.0)) {
        throw std::invalid_argument("synth: scale_period must be positive");
    }
    if (target_cells < 1 || background_cells < 1) {
        throw std::invalid_argument("synth: texture cells must be positive");
    }
    if (!(target_contrast >= 0.0 && target_contrast <= 1.0) ||
        !(background_contrast >= 0.0 && background_contrast <= 1.0)) {
        throw std::invalid_argument("synth: contrast must be in [0,1]");
    }
}

BoundingBox synth_gt(const SynthSpec& spec, int t) {
    const double s = 1.0 + (spec.scale_amplitude == 0.0
                                ? 0.0
                                : spec.scale_amplitude * std::sin(2.0 * kPi * t / spec.scale_period));
    const double size = spec.target_size * s;
    const double cx = spec.start_x + spec.target_size / 2.0 + spec.vel_x * t;
    const double cy = spec.start_y + spec.target_size / 2.0 + spec.vel_y * t;
    return BoundingBox{cx - size / 2.0, cy - size / 2.0, size, size};
}

GrayImage synth_frame(const SynthSpec& spec, int t) {
    spec.validate();
    const ValueNoise target(spec.target_cells, spec.target_contrast,
                            derive_seed(spec.seed, kTargetTextureStream));
    const ValueNoise background(spec.background_cells, spec.background_contrast,
                                derive_seed(spec.seed, kBackgroundTextureStream));
    const BoundingBox box = synth_gt(spec, t);
    const double brightness = spec.brightness_rate * t;

    GrayImage img(spec.frame_width, spec.frame_height);
    for (int py = 0; py < spec.frame_height; ++py) {
        const double cy = py + 0.5;
        for (int px = 0; px < spec.frame_width; ++px) {
            const double cx = px + 0.5;
            double v;
            if (cx >= box.x && cx < box.x + box.w && cy >= box.y && cy < box.y + box.h) {
                // texture is attached to the box, so it translates and scales
                // with the target
                v = target.sample((cx - box.x) / box.w, (cy - box.y) / box.h);
            } else {
                v = background.sample(cx / spec.frame_width, cy / spec.frame_height);
            }
            img.at(px, py) = std::clamp(v + brightness, 0.0, 1.0);
        }
    }
    return img;
}

Sequence synth_sequence(const SynthSpec& spec, const std::string& out_dir) {
    spec.validate();
    const fs::path root(out_dir);
    fs::create_directories(root / "img");

    std::ofstream gt((root / "groundtruth_rect.txt").string(), std::ios::binary);
    if (!gt) throw std::runtime_error("cannot write ground truth under " + out_dir);
    for (int t = 0; t < spec.frames; ++t) {
        char name[16];
        std::snprintf(name, sizeof(name), "%04d.pgm", t + 1);
        write_pgm(synth_frame(spec, t), (root / "img" / name).string());
        const BoundingBox b = synth_gt(spec, t);
        gt << format_double(b.x) << ',' << format_double(b.y) << ','
           << format_double(b.w) << ',' << format_double(b.h) << '\n';
    }
    gt.close();
    return load_sequence(out_dir);
}

SynthSpec parse_synth_text(const std::string& text) {
    SynthSpec spec;
    std::set<std::string, std::less<>> seen;
    kv::for_each_line(text, [&](std::string_view key, std::string_view value, int) {
        const std::string what = "synth key '" + std::string(key) + "'";
        if (!seen.insert(std::string(key)).second) {
            throw std::runtime_error(what + " given twice");
        }
        if (key == "frame_width") spec.frame_width = int(kv::to_int(value, what));
        else if (key == "frame_height") spec.frame_height = int(kv::to_int(value, what));
        else if (key == "frames") spec.frames = int(kv::to_int(value, what));
        else if (key == "target_size") spec.target_size = kv::to_double(value, what);
        else if (key == "start_x") spec.start_x = kv::to_double(value, what);
        else if (key == "start_y") spec.start_y = kv::to_double(value, what);
        else if (key == "vel_x") spec.vel_x = kv::to_double(value, what);
        else if (key == "vel_y") spec.vel_y = kv::to_double(value, what);
        else if (key == "scale_amplitude") spec.scale_amplitude = kv::to_double(value, what);
        else if (key == "scale_period") spec.scale_period = kv::to_double(value, what);
        else if (key == "brightness_rate") spec.brightness_rate = kv::to_double(value, what);
        else if (key == "seed") spec.seed = kv::to_u64(value, what);
        else if (key == "target_cells") spec.target_cells = int(kv::to_int(value, what));
        else if (key == "background_cells") spec.background_cells = int(kv::to_int(value, what));
        else if (key == "target_contrast") spec.target_contrast = kv::to_double(value, what);
        else if (key == "background_contrast") spec.background_contrast = kv::to_double(value, what);
        else throw std::runtime_error("unknown synth key '" + std::string(key) + "'");
    });
    spec.validate();
    return spec;
}

SynthSpec load_synth_spec(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_synth_text(ss.str());
    } catch (const std::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

std::string serialize_synth_spec(const SynthSpec& spec) {
    std::ostringstream out;
    out << "frame_width = " << spec.frame_width << '\n';
    out << "frame_height = " << spec.frame_height << '\n';
    out << "frames = " << spec.frames << '\n';
    out << "target_size = " << format_double(spec.target_size) << '\n';
    out << "start_x = " << format_double(spec.start_x) << '\n';
    out << "start_y = " << format_double(spec.start_y) << '\n';
    out << "vel_x = " << format_double(spec.vel_x) << '\n';
    out << "vel_y = " << format_double(spec.vel_y) << '\n';
    out << "scale_amplitude = " << format_double(spec.scale_amplitude) << '\n';
    out << "scale_period = " << format_double(spec.scale_period) << '\n';
    out << "brightness_rate = " << format_double(spec.brightness_rate) << '\n';
    out << "seed = " << spec.seed << '\n';
    out << "target_cells = " << spec.target_cells << '\n';
    out << "background_cells = " << spec.background_cells << '\n';
    out << "target_contrast = " << format_double(spec.target_contrast) << '\n';
    out << "background_contrast = " << format_double(spec.background_contrast) << '\n';
    return out.str();
}

} // namespace convtrack
