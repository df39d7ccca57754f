#pragma once

#include <algorithm>
#include <functional>
#include <numeric>
#include <vector>

#include "sicover/shapes.hpp"

namespace sicover {

namespace rbu_detail {

/// Rationals in [0,1] enumerated by denominator then numerator, reduced:
/// 0, 1, 1/2, 1/3, 2/3, 1/4, 3/4, 1/5, ...
inline std::vector<double> rationals(int count) {
    std::vector<double> out;
    out.push_back(0.0);
    if (count > 1) out.push_back(1.0);
    for (long q = 2; int(out.size()) < count; ++q)
        for (long p = 1; p < q && int(out.size()) < count; ++p)
            if (std::gcd(p, q) == 1) out.push_back(double(p) / double(q));
    out.resize(size_t(count));
    return out;
}

/// Index tuples (1-based) ordered by coordinate sum, then lexicographically.
inline std::vector<std::vector<int>> index_tuples(int d, int count) {
    std::vector<std::vector<int>> out;
    for (int total = d; int(out.size()) < count; ++total) {
        std::vector<int> t(size_t(d), 1);
        // enumerate compositions of `total` into d parts >= 1, lexicographic
        std::function<void(int, int)> rec = [&](int pos, int rem) {
            if (int(out.size()) >= count) return;
            if (pos == d - 1) {
                t[size_t(pos)] = rem;
                out.push_back(t);
                return;
            }
            for (int v = 1; v <= rem - (d - 1 - pos); ++v) {
                t[size_t(pos)] = v;
                rec(pos + 1, rem - v);
            }
        };
        rec(0, total);
    }
    out.resize(size_t(count));
    return out;
}

}  // namespace rbu_detail

/// Truncated union of open boxes centred at an enumeration of the rational
/// points of [0,1]^d: box k has side 2^-(k-1). Keeps k <= k_max boxes, then
/// rescales the union to diameter 1 and recentres at its centre of mass
/// (computed exactly from the arrangement of box faces).
class RationalBoxUnionTemplate final : public ShapeTemplate {
public:
    explicit RationalBoxUnionTemplate(int k_max = 20)
        : ShapeTemplate(ShapeKind::RationalBoxUnion, 2, "rational-box-union"), k_max_(k_max) {
        if (k_max < 1 || k_max > 40) throw std::invalid_argument("rational-box-union: k_max in [1,40]");
        build();
    }

    int k_max() const { return k_max_; }

    bool contains_local(const Vec& p) const override {
        for (const auto& b : boxes_) {
            bool in = true;
            for (int i = 0; i < dim_ && in; ++i) in = p[i] > b.lo[i] && p[i] < b.hi[i];
            if (in) return true;
        }
        return false;
    }

    double boundary_distance_local(const Vec& p) const override {
        if (!contains_local(p)) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& b : boxes_) best = std::min(best, b.dist2(p));
            return std::sqrt(best);
        }
        // inside: distance to the complement = nearest uncovered arrangement
        // cell or the outside of the union's bounding box
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < dim_; ++i)
            best = std::min({best, p[i] - bbox_.lo[i], bbox_.hi[i] - p[i]});
        best = best * best;
        for (const auto& c : uncovered_cells_) best = std::min(best, c.dist2(p));
        return std::sqrt(std::max(best, 0.0));
    }

    AxisBox bounding_box_local() const override { return bbox_; }
    Vec interior_point_local() const override { return boxes_[0].center(); }

    bool box_touches_local(const OrientedBox& q) const override {
        AxisBox a = q.aabb();
        for (const auto& b : boxes_) {
            bool hit = true;
            for (int i = 0; i < dim_ && hit; ++i) hit = a.hi[i] > b.lo[i] && a.lo[i] < b.hi[i];
            if (hit && q.axis_aligned()) return true;
            if (hit) {
                // rotated query: exact test via distance from box to query
                Vec c = b.center();
                double r2 = q.dist2(c);
                double inr = 0.5 * (b.hi[0] - b.lo[0]);
                if (r2 < inr * inr) return true;
                // corner membership
                for (int mask = 0; mask < (1 << dim_); ++mask) {
                    Vec p = b.lo;
                    for (int i = 0; i < dim_; ++i)
                        if (mask >> i & 1) p[i] = b.hi[i];
                    if (q.dist2(p) == 0) return true;
                }
            }
        }
        return false;
    }

    bool box_inside_local(const OrientedBox& q) const override {
        // Sufficient single-constituent test; conservative for jointly-covered
        // boxes (containment is never falsely certified).
        AxisBox a = q.aabb();
        for (const auto& b : boxes_) {
            bool in = true;
            for (int i = 0; i < dim_ && in; ++i) in = a.lo[i] > b.lo[i] && a.hi[i] < b.hi[i];
            if (in) return true;
        }
        return false;
    }

    std::vector<Vec> boundary_points(int target) const override {
        std::vector<Vec> pts;
        int per_box = std::max(4, target / std::max(1, k_max_));
        for (const auto& b : boxes_) {
            int per_edge = std::max(1, per_box / 4);
            for (int e = 0; e < 4; ++e)
                for (int i = 0; i < per_edge; ++i) {
                    double t = double(i) / per_edge;
                    Vec p = b.lo;
                    switch (e) {
                        case 0: p[0] = b.lo[0] + t * (b.hi[0] - b.lo[0]); p[1] = b.lo[1]; break;
                        case 1: p[0] = b.hi[0]; p[1] = b.lo[1] + t * (b.hi[1] - b.lo[1]); break;
                        case 2: p[0] = b.hi[0] - t * (b.hi[0] - b.lo[0]); p[1] = b.hi[1]; break;
                        default: p[0] = b.lo[0]; p[1] = b.hi[1] - t * (b.hi[1] - b.lo[1]); break;
                    }
                    if (!contains_local(p)) pts.push_back(p);  // interior walls are not boundary
                }
        }
        return pts;
    }

    /// Fine-grid counting bracket at resolution 2^-k over the bounding box:
    /// [cells certainly inside, cells possibly touching] * cell volume.
    Estimate volume_bracket(int k_resolution = 12) const {
        const int n = 1 << k_resolution;
        const double hx = (bbox_.hi[0] - bbox_.lo[0]) / n;
        const double hy = (bbox_.hi[1] - bbox_.lo[1]) / n;
        long inside = 0, maybe = 0;
        for (int j = 0; j < n; ++j) {
            double y0 = bbox_.lo[1] + j * hy, y1 = y0 + hy;
            for (int i = 0; i < n; ++i) {
                double x0 = bbox_.lo[0] + i * hx, x1 = x0 + hx;
                bool in = false, touch = false;
                for (const auto& b : boxes_) {
                    if (x0 > b.lo[0] && x1 < b.hi[0] && y0 > b.lo[1] && y1 < b.hi[1]) in = true;
                    if (x1 > b.lo[0] && x0 < b.hi[0] && y1 > b.lo[1] && y0 < b.hi[1]) touch = true;
                    if (in) break;
                }
                if (in) ++inside;
                else if (touch) ++maybe;
            }
        }
        double cell = hx * hy;
        return Estimate::bracket(inside * cell, (inside + maybe) * cell, "grid");
    }

    const std::vector<AxisBox>& constituent_boxes() const { return boxes_; }
    double rescale_factor() const { return scale_; }

private:
    void build() {
        auto rats = rbu_detail::rationals(std::max(8, k_max_ + 2));
        auto tuples = rbu_detail::index_tuples(dim_, k_max_);
        std::vector<AxisBox> raw;
        for (int k = 1; k <= k_max_; ++k) {
            Vec c = Vec::zero(dim_);
            for (int i = 0; i < dim_; ++i) c[i] = rats[size_t(tuples[size_t(k - 1)][size_t(i)] - 1)];
            raw.push_back(AxisBox::cube(c, std::pow(2.0, -(k + 1))));
        }
        // Diameter of the closure: extreme points lie on constituent corners.
        double diam2 = 0;
        std::vector<Vec> corners;
        for (const auto& b : raw)
            for (int mask = 0; mask < (1 << dim_); ++mask) {
                Vec p = b.lo;
                for (int i = 0; i < dim_; ++i)
                    if (mask >> i & 1) p[i] = b.hi[i];
                corners.push_back(p);
            }
        for (size_t i = 0; i < corners.size(); ++i)
            for (size_t j = i + 1; j < corners.size(); ++j)
                diam2 = std::max(diam2, (corners[i] - corners[j]).norm2());
        scale_ = 1.0 / std::sqrt(diam2);

        // Exact area and centroid from the arrangement of box faces.
        std::vector<double> xs, ys;
        for (const auto& b : raw) {
            xs.push_back(b.lo[0]);
            xs.push_back(b.hi[0]);
            ys.push_back(b.lo[1]);
            ys.push_back(b.hi[1]);
        }
        std::sort(xs.begin(), xs.end());
        xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
        std::sort(ys.begin(), ys.end());
        ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
        double area = 0, mx = 0, my = 0;
        std::vector<AxisBox> uncovered;
        for (size_t j = 0; j + 1 < ys.size(); ++j)
            for (size_t i = 0; i + 1 < xs.size(); ++i) {
                double cx = 0.5 * (xs[i] + xs[i + 1]), cy = 0.5 * (ys[j] + ys[j + 1]);
                bool in = false;
                for (const auto& b : raw)
                    if (cx > b.lo[0] && cx < b.hi[0] && cy > b.lo[1] && cy < b.hi[1]) {
                        in = true;
                        break;
                    }
                double a = (xs[i + 1] - xs[i]) * (ys[j + 1] - ys[j]);
                if (in) {
                    area += a;
                    mx += a * cx;
                    my += a * cy;
                } else {
                    AxisBox u;
                    u.lo = Vec(xs[i], ys[j]);
                    u.hi = Vec(xs[i + 1], ys[j + 1]);
                    uncovered.push_back(u);
                }
            }
        Vec centroid(mx / area, my / area);

        // Move to the template frame: centre of mass at the origin, diameter 1.
        for (auto& b : raw) {
            AxisBox t;
            t.lo = (b.lo - centroid) * scale_;
            t.hi = (b.hi - centroid) * scale_;
            boxes_.push_back(t);
        }
        for (auto& u : uncovered) {
            AxisBox t;
            t.lo = (u.lo - centroid) * scale_;
            t.hi = (u.hi - centroid) * scale_;
            uncovered_cells_.push_back(t);
        }
        canonical_volume_ = geometry_volume_ = area * std::pow(scale_, dim_);
        bbox_.lo = (Vec(xs.front(), ys.front()) - centroid) * scale_;
        bbox_.hi = (Vec(xs.back(), ys.back()) - centroid) * scale_;
    }

    int k_max_;
    double scale_ = 1;
    std::vector<AxisBox> boxes_;
    std::vector<AxisBox> uncovered_cells_;
    AxisBox bbox_;
};

}  // namespace sicover
