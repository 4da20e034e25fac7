#include "convtrack/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <Eigen/Core>

namespace convtrack {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr double kScaleMin = 0.1;
constexpr double kScaleMax = 10.0;

// seed stream tags; any fixed distinct values work
constexpr std::uint64_t kObjectKMeansStream = 1;
constexpr std::uint64_t kRandomFilterStream = 2;
constexpr std::uint64_t kDiffusionStream = 3;
constexpr std::uint64_t kBackgroundStreamBase = 0x1000;

} // namespace

const char* variant_name(Variant v) {
    switch (v) {
        case Variant::full: return "full";
        case Variant::random_filters: return "random_filters";
        case Variant::no_shrinkage: return "no_shrinkage";
    }
    return "full";
}

Variant parse_variant(const std::string& name) {
    if (name == "full") return Variant::full;
    if (name == "random_filters") return Variant::random_filters;
    if (name == "no_shrinkage") return Variant::no_shrinkage;
    throw std::invalid_argument("unknown variant '" + name + "'");
}

void TrackerConfig::validate() const {
    if (warp_size < 2) throw std::invalid_argument("config: warp_size must be >= 2");
    if (field_size < 2) throw std::invalid_argument("config: field_size must be >= 2");
    if (field_size > warp_size) throw std::invalid_argument("config: field_size exceeds warp_size");
    const int side = warp_size - field_size + 1;
    if (filter_count < 1) throw std::invalid_argument("config: filter_count must be positive");
    if (filter_count > side * side) {
        throw std::invalid_argument("config: filter_count exceeds the number of patches");
    }
    if (!(learning_rate >= 0.0 && learning_rate <= 1.0)) {
        throw std::invalid_argument("config: learning_rate must be in [0,1]");
    }
    if (!(sigma_x >= 0.0) || !(sigma_y >= 0.0) || !(sigma_scale >= 0.0)) {
        throw std::invalid_argument("config: diffusion sigmas must be non-negative");
    }
    if (particle_count < 1) throw std::invalid_argument("config: particle_count must be positive");
    if (background_samples < 1) {
        throw std::invalid_argument("config: background_samples must be positive");
    }
    if (kmeans_max_iters < 1) throw std::invalid_argument("config: kmeans_max_iters must be positive");
}

ParticleSet diffuse_particles(const TargetState& prev, const TrackerConfig& cfg, Rng& rng) {
    ParticleSet set;
    set.states.resize(cfg.particle_count);
    set.weights.assign(cfg.particle_count, 1.0 / double(cfg.particle_count));
    for (TargetState& st : set.states) {
        st.x = prev.x + cfg.sigma_x * rng.gaussian();
        st.y = prev.y + cfg.sigma_y * rng.gaussian();
        st.s = std::clamp(prev.s + cfg.sigma_scale * rng.gaussian(), kScaleMin, kScaleMax);
    }
    return set;
}

double rep_distance(const ComplexCellRep& a, const ComplexCellRep& b) {
    if (a.values.size() != b.values.size()) {
        throw std::invalid_argument("rep_distance: dimension mismatch");
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < a.values.size(); ++j) {
        const double d = a.values[j] - b.values[j];
        sum += d * d;
    }
    return std::sqrt(sum);
}

double likelihood(const ComplexCellRep& templ, const ComplexCellRep& cand) {
    return std::exp(-rep_distance(templ, cand));
}

ComplexCellRep update_template(const ComplexCellRep& c_prev, const ComplexCellRep& c_hat,
                               double rho) {
    if (!(rho >= 0.0 && rho <= 1.0)) {
        throw std::invalid_argument("update_template: rate must be in [0,1]");
    }
    if (c_prev.values.size() != c_hat.values.size()) {
        throw std::invalid_argument("update_template: dimension mismatch");
    }
    ComplexCellRep out = c_prev;
    out.sparse = c_prev.sparse && c_hat.sparse;
    const double keep = 1.0 - rho;
    for (std::size_t j = 0; j < out.values.size(); ++j) {
        const double p = c_prev.values[j];
        const double h = c_hat.values[j];
        // clamp keeps the convex-combination guarantee exact under rounding
        out.values[j] = std::clamp(keep * p + rho * h, std::min(p, h), std::max(p, h));
    }
    return out;
}

Tracker::Tracker(const GrayImage& frame, const BoundingBox& box, const TrackerConfig& cfg)
    : cfg_(cfg), rng_(derive_seed(cfg.seed, kDiffusionStream)) {
    cfg_.validate();
    if (!(box.w > 0.0) || !(box.h > 0.0)) {
        throw std::invalid_argument("init: box must have positive size");
    }
    if (box.w < cfg_.field_size || box.h < cfg_.field_size) {
        throw std::invalid_argument("init: box smaller than the filter field");
    }
    if (box.x < 0.0 || box.y < 0.0 ||
        box.x + box.w > frame.width || box.y + box.h > frame.height) {
        throw std::invalid_argument("init: box extends outside the frame");
    }

    init_box_ = box;
    state_ = TargetState{box.cx(), box.cy(), 1.0};

    const int n = cfg_.warp_size;
    const int w = cfg_.field_size;
    const int d = cfg_.filter_count;
    warp_region_into(frame, box, n, warp_buf_);
    std::vector<Patch> patches = extract_patches(warp_buf_, w);
    for (Patch& p : patches) {
        normalize_patch(p);
    }

    bank_.filter_count = d;
    bank_.field_size = w;
    if (cfg_.variant == Variant::random_filters) {
        // d distinct patches, uniform; partial Fisher-Yates over the indices
        Rng pick(derive_seed(cfg_.seed, kRandomFilterStream));
        std::vector<std::size_t> idx(patches.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        bank_.object_filters.reserve(d);
        for (int i = 0; i < d; ++i) {
            const std::size_t j = i + pick.uniform_index(idx.size() - i);
            std::swap(idx[i], idx[j]);
            bank_.object_filters.push_back(patches[idx[i]]);
        }
    } else {
        const KMeansResult km = kmeans_cluster(
            patches, d, derive_seed(cfg_.seed, kObjectKMeansStream), cfg_.kmeans_max_iters);
        bank_.object_filters = select_filters(patches, km);
    }
    rebuild_background(frame);

    const ComplexCellRep raw = complex_rep(warp_buf_, bank_);
    if (cfg_.variant == Variant::no_shrinkage) {
        template_ = raw;
    } else {
        const MedianMode mode =
            cfg_.signed_median ? MedianMode::signed_value : MedianMode::absolute;
        template_ = soft_shrink(raw, adaptive_lambda(raw, mode));
    }

    const std::size_t l = std::size_t(n - w + 1) * (n - w + 1);
    rep_buf_.resize(l * d);
    best_rep_.resize(l * d);
}

BoundingBox Tracker::state_box(const TargetState& st) const {
    BoundingBox b;
    b.w = init_box_.w * st.s;
    b.h = init_box_.h * st.s;
    b.x = st.x - b.w / 2.0;
    b.y = st.y - b.h / 2.0;
    return b;
}

BoundingBox Tracker::current_box() const {
    return state_box(state_);
}

void Tracker::rebuild_background(const GrayImage& frame) {
    // anchor the context ring on the previous estimate, pulled back inside
    // the frame so the sampler's geometry contract holds near borders
    BoundingBox anchor = state_box(state_);
    anchor.w = std::min(anchor.w, double(frame.width));
    anchor.h = std::min(anchor.h, double(frame.height));
    anchor.x = std::clamp(anchor.x, 0.0, double(frame.width) - anchor.w);
    anchor.y = std::clamp(anchor.y, 0.0, double(frame.height) - anchor.h);
    const std::vector<BoundingBox> boxes =
        sample_background_boxes(anchor, frame.width, frame.height, cfg_.background_samples);
    bank_.background_filters = build_background_filters(
        frame, boxes, cfg_.filter_count, cfg_.field_size, cfg_.warp_size,
        derive_seed(cfg_.seed, kBackgroundStreamBase + frame_index_), cfg_.kmeans_max_iters);
}

ComplexCellRep Tracker::shrink_for_update(const ComplexCellRep& raw) const {
    if (cfg_.variant == Variant::no_shrinkage) {
        return raw;
    }
    const MedianMode mode = cfg_.signed_median ? MedianMode::signed_value : MedianMode::absolute;
    return soft_shrink(raw, adaptive_lambda(raw, mode));
}

StepResult Tracker::step(const GrayImage& frame) {
    const int n = cfg_.warp_size;
    const int w = cfg_.field_size;
    const int d = cfg_.filter_count;
    const int side = n - w + 1;
    const std::size_t l = std::size_t(side) * side;
    const std::size_t w2 = std::size_t(w) * w;
    const std::size_t N = std::size_t(cfg_.particle_count);

    ++frame_index_;
    rebuild_background(frame);
    diff_filters_ = difference_filter_matrix(bank_);

    // frame-constant pieces of the masked distance
    //   dist^2 = |t|^2 - 2 <t, v> + sum_mask v^2
    // where v is a candidate's raw response vector and the mask is the
    // template's nonzero set (t is zero elsewhere, so <t, v> needs no mask).
    mask_.clear();
    template_sq_ = 0.0;
    for (std::size_t j = 0; j < template_.values.size(); ++j) {
        if (template_.values[j] != 0.0) {
            mask_.push_back(std::uint32_t(j));
            template_sq_ += template_.values[j] * template_.values[j];
        }
    }
    // gain = T * Fd^T maps a candidate's patch-row matrix straight to <t, v>:
    // <t, v> = <rows, gain> element-wise, skipping the big per-particle GEMM
    gain_.resize(l * w2);
    {
        Eigen::Map<const Eigen::MatrixXd> T(template_.values.data(), l, d);
        Eigen::Map<const Eigen::MatrixXd> F(diff_filters_.data(), w2, d);
        Eigen::Map<RowMat> G(gain_.data(), l, w2);
        G.noalias() = T * F.transpose();
    }

    ParticleSet particles = diffuse_particles(state_, cfg_, rng_);

    // optimistic score per particle: treat sum_mask v^2 as zero, which can
    // only lower the distance, so the score never underestimates
    std::vector<double> bound_score(N);
    std::vector<double> log_prior(N, 0.0);
    for (std::size_t i = 0; i < N; ++i) {
        warp_region_into(frame, state_box(particles.states[i]), n, warp_buf_);
        patch_rows(warp_buf_, w, rows_buf_);
        const double cross =
            Eigen::Map<const Eigen::VectorXd>(rows_buf_.data(), rows_buf_.size())
                .dot(Eigen::Map<const Eigen::VectorXd>(gain_.data(), gain_.size()));
        const double lb2 = std::max(0.0, template_sq_ - 2.0 * cross);
        double score = -std::sqrt(lb2);
        if (cfg_.use_motion_prior) {
            const TargetState& st = particles.states[i];
            double lp = 0.0;
            if (cfg_.sigma_x > 0.0) lp -= (st.x - state_.x) * (st.x - state_.x) / (2.0 * cfg_.sigma_x * cfg_.sigma_x);
            if (cfg_.sigma_y > 0.0) lp -= (st.y - state_.y) * (st.y - state_.y) / (2.0 * cfg_.sigma_y * cfg_.sigma_y);
            if (cfg_.sigma_scale > 0.0) lp -= (st.s - state_.s) * (st.s - state_.s) / (2.0 * cfg_.sigma_scale * cfg_.sigma_scale);
            log_prior[i] = lp;
            score += lp;
        }
        bound_score[i] = score;
    }

    // evaluate candidates best-bound first; once the best exact score beats
    // every remaining bound the rest cannot win and keep their bound as an
    // (over-optimistic, hence MAP-safe) stand-in weight. The slack absorbs
    // the rounding difference between the decomposed bound and the direct
    // masked sum, so near-ties always get an exact evaluation.
    constexpr double kBoundSlack = 1e-6;
    std::vector<std::uint32_t> order(N);
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        return bound_score[a] > bound_score[b];
    });

    std::vector<double> final_score = bound_score;
    double best_score = -std::numeric_limits<double>::infinity();
    double best_dist = std::numeric_limits<double>::infinity();
    std::size_t best_i = N;
    for (std::uint32_t i : order) {
        if (best_i != N && bound_score[i] < best_score - kBoundSlack) {
            break; // sorted by bound: nobody later can win either
        }
        warp_region_into(frame, state_box(particles.states[i]), n, warp_buf_);
        patch_rows(warp_buf_, w, rows_buf_);
        {
            Eigen::Map<const RowMat> P(rows_buf_.data(), l, w2);
            Eigen::Map<const Eigen::MatrixXd> F(diff_filters_.data(), w2, d);
            Eigen::Map<Eigen::MatrixXd> M(rep_buf_.data(), l, d);
            M.noalias() = P * F;
        }
        double d2 = 0.0;
        for (const std::uint32_t j : mask_) {
            const double diff = template_.values[j] - rep_buf_[j];
            d2 += diff * diff;
        }
        const double dist = std::sqrt(d2);
        const double score = -dist + log_prior[i];
        final_score[i] = score;
        if (best_i == N || score > best_score || (score == best_score && i < best_i)) {
            best_score = score;
            best_dist = dist;
            best_i = i;
            best_rep_.assign(rep_buf_.begin(), rep_buf_.end());
        }
    }

    double wsum = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        particles.weights[i] = std::exp(final_score[i] - best_score);
        wsum += particles.weights[i];
    }
    for (double& wt : particles.weights) {
        wt /= wsum;
    }

    state_ = particles.states[best_i];

    ComplexCellRep raw;
    raw.map_side = side;
    raw.map_count = d;
    raw.sparse = false;
    raw.values = best_rep_;
    template_ = update_template(template_, shrink_for_update(raw), cfg_.learning_rate);

    StepResult res;
    res.box = state_box(state_);
    res.state = state_;
    res.best_particle = best_i;
    res.best_distance = best_dist;
    res.particles = std::move(particles);
    return res;
}

} // namespace convtrack
