#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "convtrack/features.hpp"
#include "convtrack/filterbank.hpp"
#include "convtrack/image.hpp"
#include "convtrack/rng.hpp"

namespace convtrack {

// Target hypothesis: center position plus a scale multiplier applied to the
// initial box size.
struct TargetState {
    double x = 0.0;
    double y = 0.0;
    double s = 1.0;
};

struct ParticleSet {
    std::vector<TargetState> states;
    std::vector<double> weights; // normalized to sum 1
};

enum class Variant {
    full,           // k-means filters + soft shrinkage
    random_filters, // object filters drawn uniformly instead of by k-means
    no_shrinkage,   // dense template, no soft shrinkage anywhere
};

const char* variant_name(Variant v);
Variant parse_variant(const std::string& name); // throws on unknown name

struct TrackerConfig {
    int warp_size = 32;            // n: everything is resampled to n x n
    int field_size = 6;            // w: filter / patch side
    int filter_count = 100;        // d
    double learning_rate = 0.95;   // template blend weight toward the new frame
    double sigma_x = 4.0;          // diffusion std, pixels
    double sigma_y = 4.0;
    double sigma_scale = 0.01;     // diffusion std of the scale multiplier
    int particle_count = 600;
    int background_samples = 8;    // context boxes per frame
    std::uint64_t seed = 1;
    Variant variant = Variant::full;
    bool use_motion_prior = false; // weight particles by the transition density too
    bool signed_median = false;    // literal signed-median shrinkage threshold
    int kmeans_max_iters = 100;

    void validate() const; // throws std::invalid_argument on bad values
    bool operator==(const TrackerConfig&) const = default;
};

// N states drawn independently per coordinate around prev (Gaussian, stds
// from cfg), scale clamped to [0.1, 10]; weights start uniform.
ParticleSet diffuse_particles(const TargetState& prev, const TrackerConfig& cfg, Rng& rng);

double rep_distance(const ComplexCellRep& a, const ComplexCellRep& b); // Euclidean

// exp(-rep_distance): in (0,1], 1 iff equal, monotone decreasing in distance.
double likelihood(const ComplexCellRep& templ, const ComplexCellRep& cand);

// Element-wise blend (1-rho)*c_prev + rho*c_hat, clamped into the interval
// spanned by the two inputs so convexity survives rounding.
ComplexCellRep update_template(const ComplexCellRep& c_prev, const ComplexCellRep& c_hat,
                               double rho);

struct StepResult {
    BoundingBox box;           // tracked box for this frame
    TargetState state;
    std::size_t best_particle; // index into particles
    double best_distance;      // masked distance of the winning candidate
    ParticleSet particles;
};

// One tracked target. Object filters are learned once from the first frame;
// background context filters are re-learned around the previous estimate at
// every step; the sparse template follows the winner via a temporal low-pass
// blend. Fully deterministic for a fixed (frames, box, config).
class Tracker {
public:
    Tracker(const GrayImage& frame, const BoundingBox& box, const TrackerConfig& cfg);

    StepResult step(const GrayImage& frame);

    const TrackerConfig& config() const { return cfg_; }
    const FilterBank& bank() const { return bank_; }
    const ComplexCellRep& template_rep() const { return template_; }
    const TargetState& state() const { return state_; }
    const BoundingBox& initial_box() const { return init_box_; }
    BoundingBox current_box() const;

private:
    void rebuild_background(const GrayImage& frame);
    BoundingBox state_box(const TargetState& st) const;
    ComplexCellRep shrink_for_update(const ComplexCellRep& raw) const;

    TrackerConfig cfg_;
    FilterBank bank_;
    ComplexCellRep template_;
    TargetState state_;
    BoundingBox init_box_;
    Rng rng_;                  // diffusion stream
    std::uint64_t frame_index_ = 1;

    // per-frame scoring scratch, see step() for the layout
    std::vector<double> diff_filters_;   // w^2 x d, column-major
    std::vector<double> gain_;           // l x w^2 cross-term matrix
    std::vector<std::uint32_t> mask_;    // nonzero template positions
    double template_sq_ = 0.0;
    GrayImage warp_buf_;
    std::vector<double> rows_buf_;       // l x w^2 patch rows
    std::vector<double> rep_buf_;        // l*d candidate responses
    std::vector<double> best_rep_;
};

} // namespace convtrack
