#include "convtrack/dataio.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "convtrack/image_io.hpp"
#include "kv_util.hpp"

namespace fs = std::filesystem;

namespace convtrack {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

std::string slurp_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool known_image_ext(std::string ext) {
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return char(std::tolower(c)); });
    return ext == ".pgm" || ext == ".ppm" || ext == ".pnm" || ext == ".png" ||
           ext == ".jpg" || ext == ".jpeg";
}

// "10,20,30,40" / tab / space separated; throws with context on bad arity
BoundingBox parse_rect(std::string_view line, int line_no) {
    std::string s(line);
    for (char& c : s) {
        if (c == ',' || c == '\t') c = ' ';
    }
    std::istringstream iss(s);
    double f[4];
    for (int i = 0; i < 4; ++i) {
        if (!(iss >> f[i])) {
            throw std::runtime_error("line " + std::to_string(line_no) +
                                     ": expected 4 numeric fields");
        }
    }
    std::string extra;
    if (iss >> extra) {
        throw std::runtime_error("line " + std::to_string(line_no) +
                                 ": expected 4 numeric fields, got more");
    }
    return BoundingBox{f[0], f[1], f[2], f[3]};
}

std::string rect_line(const BoundingBox& b) {
    return format_double(b.x) + ',' + format_double(b.y) + ',' +
           format_double(b.w) + ',' + format_double(b.h);
}

// Applies one config assignment; `seen` enforces single use per key.
void apply_config_kv(TrackerConfig& cfg, std::string_view key, std::string_view value,
                     std::set<std::string, std::less<>>& seen) {
    const std::string what = "config key '" + std::string(key) + "'";
    if (!seen.insert(std::string(key)).second) {
        throw std::runtime_error(what + " given twice");
    }
    if (key == "warp_size") cfg.warp_size = int(kv::to_int(value, what));
    else if (key == "field_size") cfg.field_size = int(kv::to_int(value, what));
    else if (key == "filter_count") cfg.filter_count = int(kv::to_int(value, what));
    else if (key == "learning_rate") cfg.learning_rate = kv::to_double(value, what);
    else if (key == "sigma_x") cfg.sigma_x = kv::to_double(value, what);
    else if (key == "sigma_y") cfg.sigma_y = kv::to_double(value, what);
    else if (key == "sigma_scale") cfg.sigma_scale = kv::to_double(value, what);
    else if (key == "particle_count") cfg.particle_count = int(kv::to_int(value, what));
    else if (key == "background_samples") cfg.background_samples = int(kv::to_int(value, what));
    else if (key == "seed") cfg.seed = kv::to_u64(value, what);
    else if (key == "variant") cfg.variant = parse_variant(std::string(value));
    else if (key == "use_motion_prior") cfg.use_motion_prior = kv::to_bool(value, what);
    else if (key == "signed_median") cfg.signed_median = kv::to_bool(value, what);
    else if (key == "kmeans_max_iters") cfg.kmeans_max_iters = int(kv::to_int(value, what));
    else throw std::runtime_error("unknown config key '" + std::string(key) + "'");
}

} // namespace

Sequence load_sequence(const std::string& dir) {
    const fs::path root(dir);
    const fs::path img_dir = root / "img";
    if (!fs::is_directory(img_dir)) {
        throw std::runtime_error(dir + ": no img/ directory");
    }
    // numeric sort: frame "2" comes before "10"
    std::vector<std::pair<long long, std::string>> found;
    for (const auto& entry : fs::directory_iterator(img_dir)) {
        if (!entry.is_regular_file()) continue;
        const fs::path& p = entry.path();
        if (!known_image_ext(p.extension().string())) continue;
        const std::string stem = p.stem().string();
        if (stem.empty() || !std::all_of(stem.begin(), stem.end(),
                                         [](unsigned char c) { return std::isdigit(c); })) {
            continue;
        }
        found.emplace_back(std::stoll(stem), p.string());
    }
    if (found.empty()) {
        throw std::runtime_error(dir + ": img/ has no numerically named frames");
    }
    std::sort(found.begin(), found.end());

    Sequence seq;
    fs::path name_path = root.lexically_normal();
    if (name_path.filename().empty()) name_path = name_path.parent_path();
    seq.name = name_path.filename().string();
    if (seq.name.empty()) seq.name = dir;
    seq.frames.reserve(found.size());
    for (auto& [num, path] : found) {
        seq.frames.push_back(std::move(path));
    }
    const fs::path gt_path = root / "groundtruth_rect.txt";
    if (fs::exists(gt_path)) {
        seq.gt = load_groundtruth(gt_path.string());
        if (seq.gt.size() != seq.frames.size()) {
            throw std::runtime_error(dir + ": " + std::to_string(seq.gt.size()) +
                                     " ground-truth lines for " +
                                     std::to_string(seq.frames.size()) + " frames");
        }
    }
    return seq;
}

std::vector<BoundingBox> parse_groundtruth_text(const std::string& text) {
    std::vector<BoundingBox> boxes;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t eol = text.find('\n', pos);
        std::string_view line(text.data() + pos,
                              (eol == std::string::npos ? text.size() : eol) - pos);
        pos = (eol == std::string::npos) ? text.size() + 1 : eol + 1;
        ++line_no;
        line = kv::trim(line);
        if (line.empty() || line.front() == '#') continue;
        boxes.push_back(parse_rect(line, line_no));
    }
    return boxes;
}

std::vector<BoundingBox> load_groundtruth(const std::string& path) {
    try {
        return parse_groundtruth_text(slurp_text(path));
    } catch (const std::runtime_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

bool RunRecord::boxes_equal(const RunRecord& o) const {
    if (boxes.size() != o.boxes.size()) return false;
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        if (boxes[i].x != o.boxes[i].x || boxes[i].y != o.boxes[i].y ||
            boxes[i].w != o.boxes[i].w || boxes[i].h != o.boxes[i].h) {
            return false;
        }
    }
    return true;
}

void write_results(const RunRecord& rec, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "# tracking results\n";
    out << "# sequence = " << rec.sequence_name << '\n';
    std::istringstream cfg(serialize_config(rec.config));
    std::string line;
    while (std::getline(cfg, line)) {
        out << "# cfg " << line << '\n';
    }
    for (const BoundingBox& b : rec.boxes) {
        out << rect_line(b) << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

RunRecord read_results(const std::string& path) {
    const std::string text = slurp_text(path);
    RunRecord rec;
    std::string cfg_text;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t eol = text.find('\n', pos);
        std::string_view line(text.data() + pos,
                              (eol == std::string::npos ? text.size() : eol) - pos);
        pos = (eol == std::string::npos) ? text.size() + 1 : eol + 1;
        ++line_no;
        line = kv::trim(line);
        if (line.empty()) continue;
        if (line.front() == '#') {
            std::string_view body = kv::trim(line.substr(1));
            if (body.rfind("sequence =", 0) == 0) {
                rec.sequence_name = std::string(kv::trim(body.substr(10)));
            } else if (body.rfind("cfg ", 0) == 0) {
                cfg_text.append(body.substr(4));
                cfg_text.push_back('\n');
            }
            continue;
        }
        rec.boxes.push_back(parse_rect(line, line_no));
    }
    if (rec.boxes.empty()) {
        throw std::runtime_error(path + ": no result boxes");
    }
    rec.config = parse_config_text(cfg_text);
    return rec;
}

TrackerConfig parse_config_text(const std::string& text) {
    TrackerConfig cfg;
    std::set<std::string, std::less<>> seen;
    kv::for_each_line(text, [&](std::string_view key, std::string_view value, int) {
        apply_config_kv(cfg, key, value, seen);
    });
    cfg.validate();
    return cfg;
}

std::string serialize_config(const TrackerConfig& cfg) {
    std::ostringstream out;
    out << "warp_size = " << cfg.warp_size << '\n';
    out << "field_size = " << cfg.field_size << '\n';
    out << "filter_count = " << cfg.filter_count << '\n';
    out << "learning_rate = " << format_double(cfg.learning_rate) << '\n';
    out << "sigma_x = " << format_double(cfg.sigma_x) << '\n';
    out << "sigma_y = " << format_double(cfg.sigma_y) << '\n';
    out << "sigma_scale = " << format_double(cfg.sigma_scale) << '\n';
    out << "particle_count = " << cfg.particle_count << '\n';
    out << "background_samples = " << cfg.background_samples << '\n';
    out << "seed = " << cfg.seed << '\n';
    out << "variant = " << variant_name(cfg.variant) << '\n';
    out << "use_motion_prior = " << (cfg.use_motion_prior ? "true" : "false") << '\n';
    out << "signed_median = " << (cfg.signed_median ? "true" : "false") << '\n';
    out << "kmeans_max_iters = " << cfg.kmeans_max_iters << '\n';
    return out.str();
}

TrackerConfig load_config(const std::string& path) {
    try {
        return parse_config_text(slurp_text(path));
    } catch (const std::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

void save_config(const TrackerConfig& cfg, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << serialize_config(cfg);
    if (!out) throw std::runtime_error("write failed: " + path);
}

RunRecord run_tracking(const Sequence& seq, const BoundingBox& init, const TrackerConfig& cfg) {
    if (seq.frames.empty()) throw std::runtime_error("empty sequence");
    using clock = std::chrono::steady_clock;
    RunRecord rec;
    rec.sequence_name = seq.name;
    rec.config = cfg;
    rec.boxes.reserve(seq.frames.size());
    rec.frame_ms.reserve(seq.frames.size());

    auto t0 = clock::now();
    GrayImage frame = load_frame(seq.frames[0]);
    Tracker tracker(frame, init, cfg);
    rec.boxes.push_back(init);
    rec.frame_ms.push_back(std::chrono::duration<double, std::milli>(clock::now() - t0).count());

    for (std::size_t i = 1; i < seq.frames.size(); ++i) {
        t0 = clock::now();
        frame = load_frame(seq.frames[i]);
        const StepResult res = tracker.step(frame);
        rec.boxes.push_back(res.box);
        rec.frame_ms.push_back(std::chrono::duration<double, std::milli>(clock::now() - t0).count());
    }
    return rec;
}

} // namespace convtrack
