#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "sicover/shapes.hpp"

namespace sicover {

namespace koch_detail {

inline double cross(const Vec& a, const Vec& b) { return a[0] * b[1] - a[1] * b[0]; }

/// Inclusive point-in-triangle for CCW-ordered vertices.
inline bool in_tri(const Vec& p, const Vec& a, const Vec& b, const Vec& c) {
    if (cross(b - a, p - a) < 0) return false;
    if (cross(c - b, p - b) < 0) return false;
    if (cross(a - c, p - c) < 0) return false;
    return true;
}

/// Apex of the roof triangle over the directed segment a->b (bump side is the
/// right-hand side; height |ab| * sqrt(3)/6). The Koch curve over a->b stays
/// inside triangle (a, apex, b).
inline Vec roof_apex(const Vec& a, const Vec& b) {
    Vec m = (a + b) * 0.5;
    Vec v = b - a;
    Vec perp(v[1], -v[0]);  // right-hand normal
    const double k = std::sqrt(3.0) / 6.0;
    return m + perp * k;
}

inline Vec rot_m60(const Vec& v) {
    // rotate by -60 degrees
    const double c = 0.5, s = -std::sqrt(3.0) / 2.0;
    return Vec(v[0] * c - v[1] * s, v[0] * s + v[1] * c);
}

/// Is p inside the depth-K bump region between segment a->b and the Koch
/// curve over it (bumps to the right of a->b)?
inline bool in_bump(const Vec& p, const Vec& a, const Vec& b, int depth) {
    if (depth == 0) return false;
    Vec p1 = a + (b - a) * (1.0 / 3.0);
    Vec p2 = a + (b - a) * (2.0 / 3.0);
    Vec t = p1 + rot_m60(p2 - p1);
    if (in_tri(p, p1, t, p2)) return true;
    const Vec seg[5] = {a, p1, t, p2, b};
    for (int i = 0; i < 4; ++i) {
        const Vec &u = seg[i], &v = seg[i + 1];
        if (in_tri(p, u, roof_apex(u, v), v) && in_bump(p, u, v, depth - 1)) return true;
    }
    return false;
}

inline void emit_curve(const Vec& a, const Vec& b, int depth, std::vector<Vec>& out) {
    if (depth == 0) {
        out.push_back(a);
        return;
    }
    Vec p1 = a + (b - a) * (1.0 / 3.0);
    Vec p2 = a + (b - a) * (2.0 / 3.0);
    Vec t = p1 + rot_m60(p2 - p1);
    emit_curve(a, p1, depth - 1, out);
    emit_curve(p1, t, depth - 1, out);
    emit_curve(t, p2, depth - 1, out);
    emit_curve(p2, b, depth - 1, out);
}

inline double seg_dist2(const Vec& p, const Vec& a, const Vec& b) {
    Vec ab = b - a;
    double t = (p - a).dot(ab) / std::max(ab.norm2(), 1e-300);
    t = std::clamp(t, 0.0, 1.0);
    Vec q = a + ab * t;
    return (p - q).norm2();
}

/// Does segment [a,b] meet the closed triangle (t0,t1,t2)?
inline bool seg_hits_triangle(const Vec& a, const Vec& b, const Vec& t0, const Vec& t1, const Vec& t2);

/// Do closed segments [a,b] and [c,e] intersect?
inline bool segments_cross(const Vec& a, const Vec& b, const Vec& c, const Vec& e) {
    auto orient = [](const Vec& p, const Vec& q, const Vec& r) {
        double v = cross(q - p, r - p);
        return v > 0 ? 1 : (v < 0 ? -1 : 0);
    };
    auto on_seg = [](const Vec& p, const Vec& q, const Vec& r) {
        return std::min(p[0], q[0]) <= r[0] && r[0] <= std::max(p[0], q[0]) &&
               std::min(p[1], q[1]) <= r[1] && r[1] <= std::max(p[1], q[1]);
    };
    int o1 = orient(a, b, c), o2 = orient(a, b, e);
    int o3 = orient(c, e, a), o4 = orient(c, e, b);
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && on_seg(a, b, c)) return true;
    if (o2 == 0 && on_seg(a, b, e)) return true;
    if (o3 == 0 && on_seg(c, e, a)) return true;
    if (o4 == 0 && on_seg(c, e, b)) return true;
    return false;
}

inline bool seg_hits_triangle(const Vec& a, const Vec& b, const Vec& t0, const Vec& t1,
                              const Vec& t2) {
    if (in_tri(a, t0, t1, t2) || in_tri(b, t0, t1, t2)) return true;
    return segments_cross(a, b, t0, t1) || segments_cross(a, b, t1, t2) ||
           segments_cross(a, b, t2, t0);
}

/// Does segment [a,b] cross the depth-K Koch curve over the directed segment
/// (A,B)? The curve is contained in the roof triangle of (A,B), which prunes
/// the recursion; typical query segments touch only a handful of roofs.
inline bool seg_hits_curve(const Vec& a, const Vec& b, const Vec& A, const Vec& B, int depth) {
    if (depth == 0) return segments_cross(a, b, A, B);
    if (!seg_hits_triangle(a, b, A, roof_apex(A, B), B)) return false;
    Vec p1 = A + (B - A) * (1.0 / 3.0);
    Vec p2 = A + (B - A) * (2.0 / 3.0);
    Vec t = p1 + rot_m60(p2 - p1);
    return seg_hits_curve(a, b, A, p1, depth - 1) || seg_hits_curve(a, b, p1, t, depth - 1) ||
           seg_hits_curve(a, b, t, p2, depth - 1) || seg_hits_curve(a, b, p2, B, depth - 1);
}

}  // namespace koch_detail

/// Von Koch snowflake, iteration-K polygon, diameter 1, centroid at origin.
/// Membership is exact for the K-polygon via an O(K) roof-pruned recursion.
/// The family volume mass is the limit area 3*sqrt(3)/10; the polygon area
/// (smaller by a factor (3/8)(4/9)^K) is exposed as geometry_volume().
class KochTemplate final : public ShapeTemplate {
public:
    explicit KochTemplate(int iterations = 8)
        : ShapeTemplate(ShapeKind::KochSnowflake, 2, "koch-snowflake"), k_(iterations) {
        if (iterations < 0 || iterations > 9) throw std::invalid_argument("koch: iterations in [0,9]");
        side_ = iterations >= 1 ? std::sqrt(3.0) / 2.0 : 1.0;
        const double a0 = std::sqrt(3.0) / 4.0 * side_ * side_;
        geometry_volume_ = a0 * (1.0 + 0.6 * (1.0 - std::pow(4.0 / 9.0, k_)));
        canonical_volume_ = 3.0 * std::sqrt(3.0) / 10.0;  // limit area at diameter 1
        if (iterations == 0) canonical_volume_ = geometry_volume_;
        // Base triangle, CCW, centroid at origin, circumradius side/sqrt(3).
        const double r = side_ / std::sqrt(3.0);
        for (int i = 0; i < 3; ++i) {
            double ang = kPi / 2 + 2 * kPi * i / 3;
            tri_[i] = Vec(r * std::cos(ang), r * std::sin(ang));
        }
        build_edges();
    }

    int iterations() const { return k_; }
    double area_gap_to_limit() const { return canonical_volume_ - geometry_volume_; }

    bool contains_local(const Vec& p) const override {
        using namespace koch_detail;
        if (p.norm2() > 0.2500000001) return false;  // circumscribed disc
        if (in_tri(p, tri_[0], tri_[1], tri_[2])) return true;
        for (int i = 0; i < 3; ++i) {
            // CCW triangle: interior lies left of each edge, so the right-hand
            // bump side of a->b points outward as required.
            const Vec &a = tri_[i], &b = tri_[(i + 1) % 3];
            if (in_tri(p, a, roof_apex(a, b), b) && in_bump(p, a, b, k_)) return true;
        }
        return false;
    }

    double boundary_distance_local(const Vec& p) const override {
        using namespace koch_detail;
        // Coarse upper bound from a vertex subsample, then a ring search over
        // the edge grid bounded by it.
        double best2 = 1e300;
        for (size_t i = 0; i < verts_.size(); i += coarse_stride_)
            best2 = std::min(best2, (p - verts_[i]).norm2());
        int ci = cell_of(p[0]), cj = cell_of(p[1]);
        for (int ring = 0;; ++ring) {
            double ring_lb = (ring - 1) * cell_;
            if (ring > 0 && ring_lb > 0 && ring_lb * ring_lb > best2) break;
            bool any = false;
            for (int dj = -ring; dj <= ring; ++dj)
                for (int di = -ring; di <= ring; ++di) {
                    if (std::max(std::abs(di), std::abs(dj)) != ring) continue;
                    int i = ci + di, j = cj + dj;
                    if (i < 0 || j < 0 || i >= grid_n_ || j >= grid_n_) continue;
                    any = true;
                    for (int e : cells_[size_t(j) * grid_n_ + i]) {
                        const Vec& a = verts_[size_t(e)];
                        const Vec& b = verts_[(size_t(e) + 1) % verts_.size()];
                        best2 = std::min(best2, seg_dist2(p, a, b));
                    }
                }
            if (!any && ring > 2 * grid_n_) break;
        }
        return std::sqrt(best2);
    }

    AxisBox bounding_box_local() const override { return bbox_; }

    // Exact polygon-box interaction: the box meets the polygon iff a box
    // corner is inside, or the polygon sits inside the box, or the two
    // boundaries cross. Boundary crossings are detected by walking the edge
    // grid along the four box sides only.
    bool box_touches_local(const OrientedBox& b) const override {
        double d2 = b.dist2(Vec::zero(2));
        if (d2 > 0.25) return false;                   // outside circumscribed disc
        if (d2 < sqr(inradius_ * 0.999)) return true;  // box reaches the incircle
        int coarse = coarse_scan(b);
        if (coarse == kAllInside) return true;
        if (coarse == kAllOutside) return false;
        std::vector<Vec> cs;
        b.corners(cs);
        for (const auto& c : cs)
            if (contains_local(c)) return true;
        if (b.dist2(verts_[0]) == 0) return true;  // polygon inside the box
        return boundary_crosses(cs);
    }

    bool box_inside_local(const OrientedBox& b) const override {
        if (b.far_dist2(Vec::zero(2)) < sqr(inradius_ * 0.999)) return true;
        int coarse = coarse_scan(b);
        if (coarse == kAllInside) return true;
        if (coarse == kAllOutside) return false;
        std::vector<Vec> cs;
        b.corners(cs);
        for (const auto& c : cs)
            if (!contains_local(c)) return false;
        return !boundary_crosses(cs);
    }

    std::vector<Vec> boundary_points(int target) const override {
        std::vector<Vec> pts;
        size_t stride = std::max<size_t>(1, verts_.size() / size_t(std::max(1, target)));
        for (size_t i = 0; i < verts_.size(); i += stride) pts.push_back(verts_[i]);
        return pts;
    }

    const std::vector<Vec>& vertices() const { return verts_; }

private:
    void build_edges() {
        using namespace koch_detail;
        verts_.clear();
        for (int i = 0; i < 3; ++i) emit_curve(tri_[i], tri_[(i + 1) % 3], k_, verts_);
        inradius_ = side_ / (2 * std::sqrt(3.0));
        // Uniform grid index over the bounding square [-0.5, 0.5]^2.
        grid_n_ = k_ <= 4 ? 64 : 512;
        cell_ = 1.02 / grid_n_;
        origin_ = -0.51;
        cells_.assign(size_t(grid_n_) * grid_n_, {});
        const size_t m = verts_.size();
        for (size_t e = 0; e < m; ++e) {
            const Vec& a = verts_[e];
            const Vec& b = verts_[(e + 1) % m];
            int i0 = cell_of(std::min(a[0], b[0])), i1 = cell_of(std::max(a[0], b[0]));
            int j0 = cell_of(std::min(a[1], b[1])), j1 = cell_of(std::max(a[1], b[1]));
            for (int j = j0; j <= j1; ++j)
                for (int i = i0; i <= i1; ++i) cells_[size_t(j) * grid_n_ + i].push_back(int(e));
        }
        coarse_stride_ = std::max<size_t>(1, verts_.size() / 2048);
        bbox_.lo = bbox_.hi = verts_[0];
        for (const auto& v : verts_)
            for (int i = 0; i < 2; ++i) {
                bbox_.lo[i] = std::min(bbox_.lo[i], v[i]);
                bbox_.hi[i] = std::max(bbox_.hi[i], v[i]);
            }
        // coarse cells aggregate 4x4 fine edge-grid cells
        coarse_n_ = grid_n_ / 4;
        coarse_.assign(size_t(coarse_n_) * coarse_n_, 0);
        for (int j = 0; j < coarse_n_; ++j)
            for (int i = 0; i < coarse_n_; ++i) {
                bool boundary = false;
                for (int fj = 4 * j; fj < 4 * j + 4 && !boundary; ++fj)
                    for (int fi = 4 * i; fi < 4 * i + 4 && !boundary; ++fi)
                        boundary = !cells_[size_t(fj) * grid_n_ + fi].empty();
                if (boundary) {
                    coarse_[size_t(j) * coarse_n_ + i] = 2;
                } else {
                    Vec centre(origin_ + (i + 0.5) * cell_ * 4, origin_ + (j + 0.5) * cell_ * 4);
                    coarse_[size_t(j) * coarse_n_ + i] = contains_local(centre) ? 1 : 0;
                }
            }
    }

    int cell_of(double x) const {
        int i = int((x - origin_) / cell_);
        return std::clamp(i, 0, grid_n_ - 1);
    }

    // Coarse interior/exterior scan over the query's bounding box. Cells with
    // no polygon edges are uniformly in or out, so a range where every cell is
    // interior (exterior) certifies the answer without exact geometry.
    static constexpr int kAllInside = 1, kAllOutside = 2, kMixed = 0;
    int coarse_scan(const OrientedBox& b) const {
        AxisBox bb = b.aabb();
        int i0 = coarse_of(bb.lo[0]), i1 = coarse_of(bb.hi[0]);
        int j0 = coarse_of(bb.lo[1]), j1 = coarse_of(bb.hi[1]);
        bool any_in = false, any_out = false;
        for (int j = j0; j <= j1; ++j)
            for (int i = i0; i <= i1; ++i) {
                uint8_t s = coarse_[size_t(j) * coarse_n_ + i];
                if (s == 2) return kMixed;  // boundary cell
                (s == 1 ? any_in : any_out) = true;
                if (any_in && any_out) return kMixed;
            }
        return any_in ? kAllInside : kAllOutside;
    }
    int coarse_of(double x) const {
        int i = int((x - origin_) / (cell_ * 4));
        return std::clamp(i, 0, coarse_n_ - 1);
    }

    /// Does the polygon boundary cross the quadrilateral with the given
    /// corners? Roof-triangle pruned recursion over the three base curves.
    bool boundary_crosses(const std::vector<Vec>& corners) const {
        using namespace koch_detail;
        // corner order from OrientedBox::corners is (--, +-, -+, ++)
        static const int order[5] = {0, 1, 3, 2, 0};
        for (int side = 0; side < 4; ++side) {
            const Vec& p = corners[size_t(order[side])];
            const Vec& q = corners[size_t(order[side + 1])];
            for (int i = 0; i < 3; ++i)
                if (seg_hits_curve(p, q, tri_[i], tri_[(i + 1) % 3], k_)) return true;
        }
        return false;
    }

    int k_;
    double side_;
    double inradius_ = 0.25;
    Vec tri_[3];
    std::vector<Vec> verts_;
    AxisBox bbox_;
    std::vector<std::vector<int>> cells_;
    std::vector<uint8_t> coarse_;  // 0 outside, 1 inside, 2 boundary
    int grid_n_ = 64;
    int coarse_n_ = 16;
    double cell_ = 0, origin_ = 0;
    size_t coarse_stride_ = 1;
};

}  // namespace sicover
