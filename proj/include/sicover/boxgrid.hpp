#pragma once

#include <cstdint>
#include <vector>

#include "sicover/sampler.hpp"

namespace sicover {

enum class BoxStatus : uint8_t {
    Untouched = 0,  // no set of the truncated process meets the box
    Touched = 1,    // met but not contained in any single set
    Covered = 2,    // contained in a single set
};

/// Classification of every level-n box of [0,1]^d against a realization:
/// m_n = untouched boxes, M_n = boxes not singly covered.
struct BoxClassification {
    int level = 0;
    int dim = 2;
    std::vector<uint8_t> status;  // row-major over the lattice (2^-n Z)^d
    long untouched = 0;
    long touched = 0;
    long covered = 0;

    long boxes() const { return long(status.size()); }
    long m_count() const { return untouched; }
    long M_count() const { return untouched + touched; }

    size_t index(const std::vector<long>& idx) const {
        size_t acc = 0;
        for (int i = dim - 1; i >= 0; --i) acc = (acc << level) | size_t(idx[size_t(i)]);
        return acc;
    }
};

namespace boxgrid_detail {

inline void classify_set_into(const PlacedSet& g, int n, std::vector<uint8_t>& status, int dim) {
    const double side = std::pow(2.0, -n);
    const long cells = 1l << n;
    AxisBox bb = g.bounding_box();
    long lo[kMaxDim], hi[kMaxDim];
    for (int i = 0; i < dim; ++i) {
        lo[i] = std::max<long>(0, long(std::floor(bb.lo[i] / side)));
        hi[i] = std::min<long>(cells - 1, long(std::floor(bb.hi[i] / side)));
        if (lo[i] > hi[i]) return;
    }
    const bool ball = g.tmpl->kind() == ShapeKind::BallOpen || g.tmpl->kind() == ShapeKind::BallClosed;
    const bool open = g.tmpl->kind() == ShapeKind::BallOpen;
    const double r = g.rho / 2, r2 = r * r;
    const bool can_contain = g.rho >= side;  // cheap prefilter for containment

    long idx[kMaxDim];
    for (int i = 0; i < dim; ++i) idx[i] = lo[i];
    while (true) {
        size_t flat = 0;
        for (int i = dim - 1; i >= 0; --i) flat = (flat << n) | size_t(idx[i]);
        if (status[flat] != uint8_t(BoxStatus::Covered)) {
            AxisBox box;
            box.lo = Vec::zero(dim);
            box.hi = Vec::zero(dim);
            for (int i = 0; i < dim; ++i) {
                box.lo[i] = idx[i] * side;
                box.hi[i] = box.lo[i] + side;
            }
            bool touch, contain = false;
            if (ball) {
                double d2 = box.dist2(g.pos);
                touch = open ? d2 < r2 : d2 <= r2;
                if (touch && can_contain) {
                    double f2 = box.far_dist2(g.pos);
                    contain = open ? f2 < r2 : f2 <= r2;
                }
            } else {
                touch = touches_box(g, box);
                if (touch && can_contain) contain = contains_box(g, box);
            }
            if (contain) status[flat] = uint8_t(BoxStatus::Covered);
            else if (touch && status[flat] == uint8_t(BoxStatus::Untouched))
                status[flat] = uint8_t(BoxStatus::Touched);
        }
        int axis = 0;
        while (axis < dim) {
            if (++idx[axis] <= hi[axis]) break;
            idx[axis] = lo[axis];
            ++axis;
        }
        if (axis == dim) break;
    }
}

}  // namespace boxgrid_detail

/// Classify all 2^{dn} level-n boxes against the sets of Phi_{lambda,n}
/// (bands 1..n of the realization; deeper bands do not count at level n).
inline BoxClassification classify_boxes(const ProcessRealization& r, int n) {
    if (n < 1) throw std::invalid_argument("classify_boxes: n >= 1");
    if (r.depth < n) throw std::invalid_argument("classify_boxes: realization depth < n");
    const int d = r.dim;
    if (size_t(d) * size_t(n) > 26) throw std::invalid_argument("classify_boxes: grid too large");
    BoxClassification c;
    c.level = n;
    c.dim = d;
    c.status.assign(size_t(1) << (size_t(d) * n), uint8_t(BoxStatus::Untouched));
    for (int l = 1; l <= n; ++l)
        for (const auto& g : r.bands[size_t(l - 1)])
            boxgrid_detail::classify_set_into(g, n, c.status, d);
    for (uint8_t s : c.status) {
        if (s == uint8_t(BoxStatus::Untouched)) ++c.untouched;
        else if (s == uint8_t(BoxStatus::Touched)) ++c.touched;
        else ++c.covered;
    }
    return c;
}

/// Child boxes (at level child_n) of the given parent box that are untouched
/// by the realization's sets in bands [band_lo, band_hi]. Children are
/// returned as lattice indices on the child grid.
inline std::vector<std::vector<long>> subbox_untouched(const ProcessRealization& r,
                                                       const std::vector<long>& parent_idx, int parent_n,
                                                       int child_n, int band_lo, int band_hi) {
    if (child_n <= parent_n) throw std::invalid_argument("subbox_untouched: child level must be finer");
    const int d = r.dim;
    const long span = 1l << (child_n - parent_n);
    const double child_side = std::pow(2.0, -child_n);
    std::vector<uint8_t> touched(size_t(1) << (size_t(d) * (child_n - parent_n)), 0);

    AxisBox parent;
    parent.lo = Vec::zero(d);
    parent.hi = Vec::zero(d);
    for (int i = 0; i < d; ++i) {
        parent.lo[i] = parent_idx[size_t(i)] * std::pow(2.0, -parent_n);
        parent.hi[i] = parent.lo[i] + std::pow(2.0, -parent_n);
    }

    for (int l = std::max(1, band_lo); l <= std::min(r.depth, band_hi); ++l)
        for (const auto& g : r.bands[size_t(l - 1)]) {
            AxisBox bb = g.bounding_box();
            if (!bb.intersects(parent)) continue;
            long lo[kMaxDim], hi[kMaxDim];
            bool skip = false;
            for (int i = 0; i < d; ++i) {
                lo[i] = std::max<long>(0, long(std::floor((bb.lo[i] - parent.lo[i]) / child_side)));
                hi[i] = std::min<long>(span - 1, long(std::floor((bb.hi[i] - parent.lo[i]) / child_side)));
                if (lo[i] > hi[i]) skip = true;
            }
            if (skip) continue;
            const bool ball = g.tmpl->kind() == ShapeKind::BallOpen || g.tmpl->kind() == ShapeKind::BallClosed;
            const bool open = g.tmpl->kind() == ShapeKind::BallOpen;
            const double r2 = sqr(g.rho / 2);
            long idx[kMaxDim];
            for (int i = 0; i < d; ++i) idx[i] = lo[i];
            while (true) {
                size_t flat = 0;
                for (int i = d - 1; i >= 0; --i) flat = (flat << (child_n - parent_n)) | size_t(idx[i]);
                if (!touched[flat]) {
                    AxisBox box;
                    box.lo = Vec::zero(d);
                    box.hi = Vec::zero(d);
                    for (int i = 0; i < d; ++i) {
                        box.lo[i] = parent.lo[i] + idx[i] * child_side;
                        box.hi[i] = box.lo[i] + child_side;
                    }
                    bool touch;
                    if (ball) {
                        double dist2 = box.dist2(g.pos);
                        touch = open ? dist2 < r2 : dist2 <= r2;
                    } else {
                        touch = touches_box(g, box);
                    }
                    if (touch) touched[flat] = 1;
                }
                int axis = 0;
                while (axis < d) {
                    if (++idx[axis] <= hi[axis]) break;
                    idx[axis] = lo[axis];
                    ++axis;
                }
                if (axis == d) break;
            }
        }

    std::vector<std::vector<long>> out;
    std::vector<long> child(size_t(d), 0);
    for (size_t flat = 0; flat < touched.size(); ++flat) {
        if (touched[flat]) continue;
        size_t rem = flat;
        std::vector<long> abs_idx(size_t(d), 0);
        for (int i = 0; i < d; ++i) {
            long rel = long(rem & ((1l << (child_n - parent_n)) - 1));
            rem >>= (child_n - parent_n);
            abs_idx[size_t(i)] = (parent_idx[size_t(i)] << (child_n - parent_n)) + rel;
        }
        out.push_back(abs_idx);
    }
    (void)child;
    return out;
}

struct CoverCount {
    long value = 0;  // boxes owning an uncovered sample point (tie rule: points
                     // sit at cell centres, so each belongs to exactly one box)
    long lower = 0;  // forced boxes, a true lower bound for L_n
    long upper = 0;  // |M_n|
    int subgrid = 4;
};

/// Approximate minimal cover count L_n via a subgrid of sample points per box.
inline CoverCount minimal_cover_count(const ProcessRealization& r, int n, int subgrid = 4) {
    if (r.depth < n) throw std::invalid_argument("minimal_cover_count: realization depth < n");
    const int d = r.dim;
    int extra = 0;
    while ((1 << extra) < subgrid) ++extra;
    const int fine = n + extra;
    if (size_t(d) * size_t(fine) > 26) throw std::invalid_argument("minimal_cover_count: grid too large");

    // Mark fine cells whose centre is covered by some set.
    const double fside = std::pow(2.0, -fine);
    const long fcells = 1l << fine;
    std::vector<uint8_t> covered(size_t(1) << (size_t(d) * fine), 0);
    for (int l = 1; l <= n; ++l)
        for (const auto& g : r.bands[size_t(l - 1)]) {
            AxisBox bb = g.bounding_box();
            long lo[kMaxDim], hi[kMaxDim];
            bool skip = false;
            for (int i = 0; i < d; ++i) {
                lo[i] = std::max<long>(0, long(std::floor(bb.lo[i] / fside)));
                hi[i] = std::min<long>(fcells - 1, long(std::floor(bb.hi[i] / fside)));
                if (lo[i] > hi[i]) skip = true;
            }
            if (skip) continue;
            long idx[kMaxDim];
            for (int i = 0; i < d; ++i) idx[i] = lo[i];
            while (true) {
                size_t flat = 0;
                for (int i = d - 1; i >= 0; --i) flat = (flat << fine) | size_t(idx[i]);
                if (!covered[flat]) {
                    Vec p = Vec::zero(d);
                    for (int i = 0; i < d; ++i) p[i] = (idx[i] + 0.5) * fside;
                    if (contains(g, p)) covered[flat] = 1;
                }
                int axis = 0;
                while (axis < d) {
                    if (++idx[axis] <= hi[axis]) break;
                    idx[axis] = lo[axis];
                    ++axis;
                }
                if (axis == d) break;
            }
        }

    // Count level-n boxes owning at least one uncovered sample point.
    const long per = 1l << extra;
    const long cells = 1l << n;
    CoverCount cc;
    cc.subgrid = 1 << extra;
    std::vector<long> box_idx(size_t(d), 0);
    while (true) {
        bool has_uncovered = false;
        std::vector<long> sub(size_t(d), 0);
        while (true) {
            size_t flat = 0;
            for (int i = d - 1; i >= 0; --i)
                flat = (flat << fine) | size_t((box_idx[size_t(i)] << extra) + sub[size_t(i)]);
            if (!covered[flat]) {
                has_uncovered = true;
                break;
            }
            int axis = 0;
            while (axis < d) {
                if (++sub[size_t(axis)] < per) break;
                sub[size_t(axis)] = 0;
                ++axis;
            }
            if (axis == d) break;
        }
        if (has_uncovered) ++cc.value;
        int axis = 0;
        while (axis < d) {
            if (++box_idx[size_t(axis)] < cells) break;
            box_idx[size_t(axis)] = 0;
            ++axis;
        }
        if (axis == d) break;
    }
    cc.lower = cc.value;  // sample points are strictly interior: all forced
    BoxClassification cls = classify_boxes(r, n);
    cc.upper = cls.M_count();
    return cc;
}

}  // namespace sicover
