#pragma once

#include <string>
#include <vector>

#include "convtrack/image.hpp"
#include "convtrack/tracker.hpp"

namespace convtrack {

// A directory-backed frame sequence: `dir/img/<number>.<ext>` plus an
// optional `dir/groundtruth_rect.txt` with one x,y,w,h line per frame.
struct Sequence {
    std::string name;
    std::vector<std::string> frames; // file paths, numerically sorted
    std::vector<BoundingBox> gt;     // empty when absent

    bool has_gt() const { return !gt.empty(); }
};

Sequence load_sequence(const std::string& dir);

// One x,y,w,h per nonempty line; fields split on commas, tabs or spaces;
// '#' lines are comments. Errors carry the 1-based line number.
std::vector<BoundingBox> parse_groundtruth_text(const std::string& text);
std::vector<BoundingBox> load_groundtruth(const std::string& path);

// A finished tracking run. frame_ms is a wall-clock diagnostic only: it is
// not serialized (result files must be identical across reruns) and does not
// take part in equality.
struct RunRecord {
    std::string sequence_name;
    TrackerConfig config;
    std::vector<BoundingBox> boxes;  // one per frame, first = init box
    std::vector<double> frame_ms;

    bool operator==(const RunRecord& o) const {
        return sequence_name == o.sequence_name && config == o.config && boxes_equal(o);
    }

private:
    bool boxes_equal(const RunRecord& o) const;
};

// '#' header lines carry the sequence name and the full config snapshot, then
// one x,y,w,h line per frame. read(write(r)) == r.
void write_results(const RunRecord& rec, const std::string& path);
RunRecord read_results(const std::string& path);

// Flat "key = value" text, one line per field, keys exactly the TrackerConfig
// field names. Unknown or repeated keys are errors; omitted keys keep their
// defaults. '#' lines are comments.
TrackerConfig parse_config_text(const std::string& text);
std::string serialize_config(const TrackerConfig& cfg);
TrackerConfig load_config(const std::string& path);
void save_config(const TrackerConfig& cfg, const std::string& path);

// Track a whole sequence from the given first-frame box.
RunRecord run_tracking(const Sequence& seq, const BoundingBox& init, const TrackerConfig& cfg);

// Shortest text that parses back to exactly the same double (used everywhere
// a result file must be byte-stable).
std::string format_double(double v);

} // namespace convtrack
