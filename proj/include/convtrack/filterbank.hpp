#pragma once

#include <cstdint>
#include <vector>

#include "convtrack/image.hpp"

namespace convtrack {

// Fixed per-target filter dictionary. object_filters are actual normalized
// patches picked from the first frame's target region; background_filters are
// index-aligned element-wise averages of the filters learned from the
// surrounding context samples.
struct FilterBank {
    int filter_count = 0; // d
    int field_size = 0;   // w
    std::vector<Patch> object_filters;
    std::vector<Patch> background_filters;
};

struct KMeansResult {
    std::vector<Patch> centroids;
    std::vector<int> assignments;        // per input patch
    double inertia = 0.0;                // sum of squared distances at the end
    std::vector<double> inertia_history; // one entry per completed iteration
    int iterations = 0;
};

// Seeded k-means++ / Lloyd. Deterministic for a fixed seed and input order:
// ties in assignment and seeding break toward the lowest index, and an empty
// cluster steals the point lying farthest from its current centroid.
KMeansResult kmeans_cluster(const std::vector<Patch>& patches, int k,
                            std::uint64_t seed, int max_iters = 100);

// For each centroid, the input patch nearest to it (lowest index on ties).
// The dictionary stays a subset of the real patch set; centroids are only an
// intermediate.
std::vector<Patch> select_filters(const std::vector<Patch>& patches, const KMeansResult& km);

// m boxes of the target's size, centers at m equally spaced angles (starting
// at angle 0 = +x) on a circle of radius max(target.w, target.h) around the
// target center; each box is shifted back inside the frame if it overhangs.
std::vector<BoundingBox> sample_background_boxes(const BoundingBox& target,
                                                 int frame_w, int frame_h, int m);

// Learn a d-filter dictionary from each context box (warp to n x n, extract
// and normalize patches, k-means with the SAME seed for every box) and
// average the j-th filters element-wise across boxes.
std::vector<Patch> build_background_filters(const GrayImage& frame,
                                            const std::vector<BoundingBox>& boxes,
                                            int d, int w, int n, std::uint64_t seed,
                                            int max_iters = 100);

} // namespace convtrack
