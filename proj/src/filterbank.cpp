#include "convtrack/filterbank.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "convtrack/features.hpp"
#include "convtrack/rng.hpp"

namespace convtrack {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

double dist2(const double* a, const double* b, std::size_t dim) {
    double s = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

// Nearest centroid per point, exact. A single GEMM gives the expanded
// distances (|c|^2 - 2 x.c up to the constant |x|^2); the few centroids whose
// expanded score sits within `tau` of the minimum are then re-measured with
// exact subtractions, so rounding in the expansion can never change the
// winner or violate tie-breaking by lowest index.
void assign_nearest(const std::vector<double>& pts, std::size_t npts,
                    const std::vector<double>& cents, std::size_t k, std::size_t dim,
                    std::vector<int>& assign, std::vector<double>& point_d2) {
    static constexpr double tau = 1e-8;
    Eigen::Map<const RowMat> P(pts.data(), npts, dim);
    Eigen::Map<const RowMat> C(cents.data(), k, dim);
    RowMat dots(npts, k);
    dots.noalias() = P * C.transpose();
    Eigen::VectorXd csq(k);
    for (std::size_t c = 0; c < k; ++c) {
        csq[c] = C.row(c).squaredNorm();
    }
    assign.resize(npts);
    point_d2.resize(npts);
    for (std::size_t j = 0; j < npts; ++j) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < k; ++c) {
            best = std::min(best, csq[c] - 2.0 * dots(j, c));
        }
        int winner = -1;
        double winner_d2 = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < k; ++c) {
            if (csq[c] - 2.0 * dots(j, c) > best + tau) continue;
            const double d2 = dist2(&pts[j * dim], &cents[c * dim], dim);
            if (d2 < winner_d2) {
                winner_d2 = d2;
                winner = int(c);
            }
        }
        assign[j] = winner;
        point_d2[j] = winner_d2;
    }
}

// Give every empty cluster the point currently farthest from its centroid
// (ties -> lowest point index); never steals a cluster's last member.
void fix_empty_clusters(std::size_t npts, std::size_t k,
                        std::vector<int>& assign, std::vector<double>& point_d2) {
    std::vector<int> counts(k, 0);
    for (std::size_t j = 0; j < npts; ++j) {
        ++counts[assign[j]];
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] != 0) continue;
        std::size_t far = npts;
        double far_d2 = -1.0;
        for (std::size_t j = 0; j < npts; ++j) {
            if (counts[assign[j]] <= 1) continue;
            if (point_d2[j] > far_d2) {
                far_d2 = point_d2[j];
                far = j;
            }
        }
        if (far == npts) continue; // k > npts cannot happen (checked upstream)
        --counts[assign[far]];
        assign[far] = int(c);
        counts[c] = 1;
        point_d2[far] = 0.0; // it will define the new centroid
    }
}

void update_centroids(const std::vector<double>& pts, std::size_t npts,
                      const std::vector<int>& assign, std::size_t k, std::size_t dim,
                      std::vector<double>& cents) {
    std::fill(cents.begin(), cents.end(), 0.0);
    std::vector<double> counts(k, 0.0);
    for (std::size_t j = 0; j < npts; ++j) {
        const std::size_t c = assign[j];
        counts[c] += 1.0;
        double* dst = &cents[c * dim];
        const double* src = &pts[j * dim];
        for (std::size_t i = 0; i < dim; ++i) {
            dst[i] += src[i];
        }
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] > 0.0) {
            double* dst = &cents[c * dim];
            for (std::size_t i = 0; i < dim; ++i) {
                dst[i] /= counts[c];
            }
        }
    }
}

double exact_inertia(const std::vector<double>& pts, std::size_t npts,
                     const std::vector<double>& cents, const std::vector<int>& assign,
                     std::size_t dim, std::vector<double>& point_d2) {
    double total = 0.0;
    for (std::size_t j = 0; j < npts; ++j) {
        point_d2[j] = dist2(&pts[j * dim], &cents[std::size_t(assign[j]) * dim], dim);
        total += point_d2[j];
    }
    return total;
}

// k-means++: first centroid uniform, the rest sampled with probability
// proportional to the squared distance to the nearest chosen centroid.
std::vector<double> seed_centroids(const std::vector<double>& pts, std::size_t npts,
                                   std::size_t k, std::size_t dim, Rng& rng) {
    std::vector<double> cents(k * dim);
    std::vector<double> min_d2(npts);
    const std::size_t first = rng.uniform_index(npts);
    std::copy_n(&pts[first * dim], dim, &cents[0]);
    for (std::size_t j = 0; j < npts; ++j) {
        min_d2[j] = dist2(&pts[j * dim], &cents[0], dim);
    }
    for (std::size_t c = 1; c < k; ++c) {
        double total = 0.0;
        for (double v : min_d2) total += v;
        std::size_t pick = npts;
        if (total > 0.0) {
            const double r = rng.uniform() * total;
            double cum = 0.0;
            for (std::size_t j = 0; j < npts; ++j) {
                if (min_d2[j] <= 0.0) continue;
                cum += min_d2[j];
                pick = j;
                if (cum > r) break;
            }
        }
        if (pick == npts) {
            // all remaining mass is zero (duplicate-heavy input); any point works
            pick = rng.uniform_index(npts);
        }
        double* dst = &cents[c * dim];
        std::copy_n(&pts[pick * dim], dim, dst);
        for (std::size_t j = 0; j < npts; ++j) {
            min_d2[j] = std::min(min_d2[j], dist2(&pts[j * dim], dst, dim));
        }
    }
    return cents;
}

std::vector<double> flatten(const std::vector<Patch>& patches, std::size_t dim) {
    std::vector<double> pts(patches.size() * dim);
    for (std::size_t j = 0; j < patches.size(); ++j) {
        std::copy(patches[j].values.begin(), patches[j].values.end(), pts.begin() + j * dim);
    }
    return pts;
}

} // namespace

KMeansResult kmeans_cluster(const std::vector<Patch>& patches, int k,
                            std::uint64_t seed, int max_iters) {
    if (k < 1) throw std::invalid_argument("kmeans: k must be positive");
    if (max_iters < 1) throw std::invalid_argument("kmeans: max_iters must be positive");
    if (patches.size() < std::size_t(k)) {
        throw std::invalid_argument("kmeans: fewer patches than clusters");
    }
    const int side = patches.front().side;
    for (const Patch& p : patches) {
        if (p.side != side) throw std::invalid_argument("kmeans: mixed patch sizes");
    }
    const std::size_t dim = std::size_t(side) * side;
    const std::size_t npts = patches.size();
    const std::vector<double> pts = flatten(patches, dim);

    Rng rng(seed);
    std::vector<double> cents = seed_centroids(pts, npts, k, dim, rng);

    KMeansResult res;
    std::vector<int> assign;
    std::vector<int> prev_assign;
    std::vector<double> point_d2;
    bool stable = false;
    int iter = 0;
    while (iter < max_iters) {
        assign_nearest(pts, npts, cents, k, dim, assign, point_d2);
        fix_empty_clusters(npts, k, assign, point_d2);
        ++iter;
        if (!prev_assign.empty() && assign == prev_assign) {
            stable = true;
            break;
        }
        prev_assign = assign;
        update_centroids(pts, npts, assign, k, dim, cents);
        res.inertia_history.push_back(exact_inertia(pts, npts, cents, assign, dim, point_d2));
    }
    if (!stable) {
        // ran out of iterations after a centroid move: re-assign once so the
        // result is consistent (every point at its nearest final centroid)
        assign_nearest(pts, npts, cents, k, dim, assign, point_d2);
        double total = 0.0;
        for (double v : point_d2) total += v;
        res.inertia_history.push_back(total);
    }
    res.assignments = std::move(assign);
    res.inertia = res.inertia_history.back();
    res.iterations = iter;
    res.centroids.reserve(k);
    for (int c = 0; c < k; ++c) {
        Patch p(side);
        std::copy_n(&cents[std::size_t(c) * dim], dim, p.values.begin());
        res.centroids.push_back(std::move(p));
    }
    return res;
}

std::vector<Patch> select_filters(const std::vector<Patch>& patches, const KMeansResult& km) {
    if (patches.empty() || km.centroids.empty()) {
        throw std::invalid_argument("select_filters: empty input");
    }
    const std::size_t dim = patches.front().values.size();
    const std::size_t npts = patches.size();
    const std::size_t k = km.centroids.size();
    const std::vector<double> pts = flatten(patches, dim);
    const std::vector<double> cents = flatten(km.centroids, dim);

    // nearest actual patch per centroid: same exact-rescan trick as
    // assign_nearest, with the roles of points and centroids swapped
    static constexpr double tau = 1e-8;
    Eigen::Map<const RowMat> P(pts.data(), npts, dim);
    Eigen::Map<const RowMat> C(cents.data(), k, dim);
    RowMat dots(k, npts);
    dots.noalias() = C * P.transpose();
    Eigen::VectorXd psq(npts);
    for (std::size_t j = 0; j < npts; ++j) {
        psq[j] = P.row(j).squaredNorm();
    }
    std::vector<Patch> out;
    out.reserve(k);
    for (std::size_t c = 0; c < k; ++c) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < npts; ++j) {
            best = std::min(best, psq[j] - 2.0 * dots(c, j));
        }
        std::size_t winner = 0;
        double winner_d2 = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < npts; ++j) {
            if (psq[j] - 2.0 * dots(c, j) > best + tau) continue;
            const double d2 = dist2(&pts[j * dim], &cents[c * dim], dim);
            if (d2 < winner_d2) {
                winner_d2 = d2;
                winner = j;
            }
        }
        out.push_back(patches[winner]);
    }
    return out;
}

std::vector<BoundingBox> sample_background_boxes(const BoundingBox& target,
                                                 int frame_w, int frame_h, int m) {
    if (m < 1) throw std::invalid_argument("sample_background_boxes: m must be positive");
    if (target.w <= 0.0 || target.h <= 0.0) {
        throw std::invalid_argument("sample_background_boxes: degenerate target");
    }
    if (target.w > frame_w || target.h > frame_h) {
        throw std::invalid_argument("sample_background_boxes: frame smaller than target");
    }
    const double radius = std::max(target.w, target.h);
    const double cx = target.cx();
    const double cy = target.cy();
    constexpr double two_pi = 2.0 * 3.141592653589793238462643383279502884;
    std::vector<BoundingBox> boxes;
    boxes.reserve(m);
    for (int j = 0; j < m; ++j) {
        const double angle = two_pi * double(j) / double(m);
        BoundingBox b;
        b.w = target.w;
        b.h = target.h;
        b.x = cx + radius * std::cos(angle) - target.w / 2.0;
        b.y = cy + radius * std::sin(angle) - target.h / 2.0;
        b.x = std::clamp(b.x, 0.0, double(frame_w) - b.w);
        b.y = std::clamp(b.y, 0.0, double(frame_h) - b.h);
        boxes.push_back(b);
    }
    return boxes;
}

std::vector<Patch> build_background_filters(const GrayImage& frame,
                                            const std::vector<BoundingBox>& boxes,
                                            int d, int w, int n, std::uint64_t seed,
                                            int max_iters) {
    if (boxes.empty()) throw std::invalid_argument("build_background_filters: no boxes");
    std::vector<Patch> avg;
    for (std::size_t j = 0; j < boxes.size(); ++j) {
        const GrayImage warped = warp_region(frame, boxes[j], n);
        std::vector<Patch> patches = extract_patches(warped, w);
        for (Patch& p : patches) {
            normalize_patch(p);
        }
        // identical seed for every sample: pixel-identical boxes then yield
        // identical filter sets, and the i-th filters correspond by k-means
        // centroid order
        const KMeansResult km = kmeans_cluster(patches, d, seed, max_iters);
        std::vector<Patch> filters = select_filters(patches, km);
        if (j == 0) {
            avg = std::move(filters);
        } else {
            for (int i = 0; i < d; ++i) {
                for (std::size_t t = 0; t < avg[i].values.size(); ++t) {
                    avg[i].values[t] += filters[i].values[t];
                }
            }
        }
    }
    const double inv = 1.0 / double(boxes.size());
    for (Patch& p : avg) {
        for (double& v : p.values) {
            v *= inv;
        }
    }
    return avg;
}

} // namespace convtrack
