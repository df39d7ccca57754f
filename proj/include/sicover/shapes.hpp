#pragma once

#include <algorithm>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "sicover/common.hpp"
#include "sicover/rng.hpp"

namespace sicover {

enum class ShapeKind {
    BallOpen,
    BallClosed,
    Cube,
    KochSnowflake,
    RationalBoxUnion,
    SieveComplement,
    Reference,  // stored constants only, not samplable (e.g. loop-soup outer boundaries)
};

inline const char* shape_kind_name(ShapeKind k) {
    switch (k) {
        case ShapeKind::BallOpen: return "ball-open";
        case ShapeKind::BallClosed: return "ball-closed";
        case ShapeKind::Cube: return "cube";
        case ShapeKind::KochSnowflake: return "koch-snowflake";
        case ShapeKind::RationalBoxUnion: return "rational-box-union";
        case ShapeKind::SieveComplement: return "sieve-complement";
        case ShapeKind::Reference: return "reference";
    }
    return "?";
}

/// Oriented box query in template-local coordinates: center c, rotation angle
/// theta (d=2 only; 0 for axis-aligned), half-sides h. Covers the axis-aligned
/// case with theta == 0 in any dimension.
struct OrientedBox {
    Vec center;
    double half = 0;      // half side (queries are cubes from the dyadic grids)
    double theta = 0;     // world->local residual rotation, d=2 only
    int dim() const { return center.d; }

    bool axis_aligned() const { return theta == 0.0; }

    /// Corners of the box (2^d of them).
    void corners(std::vector<Vec>& out) const {
        const int d = dim();
        out.clear();
        const double c = std::cos(theta), s = std::sin(theta);
        for (int mask = 0; mask < (1 << d); ++mask) {
            Vec p = Vec::zero(d);
            for (int i = 0; i < d; ++i) p[i] = (mask >> i & 1) ? half : -half;
            if (theta != 0.0) {
                double x = p[0] * c - p[1] * s, y = p[0] * s + p[1] * c;
                p[0] = x;
                p[1] = y;
            }
            out.push_back(center + p);
        }
    }

    /// Squared distance from a point to this box.
    double dist2(const Vec& p) const {
        Vec q = p - center;
        if (theta != 0.0) {
            const double c = std::cos(-theta), s = std::sin(-theta);
            double x = q[0] * c - q[1] * s, y = q[0] * s + q[1] * c;
            q[0] = x;
            q[1] = y;
        }
        double acc = 0;
        for (int i = 0; i < dim(); ++i) {
            double g = std::abs(q[i]) - half;
            if (g > 0) acc += g * g;
        }
        return acc;
    }
    /// Squared distance from a point to the farthest point of this box.
    double far_dist2(const Vec& p) const {
        Vec q = p - center;
        if (theta != 0.0) {
            const double c = std::cos(-theta), s = std::sin(-theta);
            double x = q[0] * c - q[1] * s, y = q[0] * s + q[1] * c;
            q[0] = x;
            q[1] = y;
        }
        double acc = 0;
        for (int i = 0; i < dim(); ++i) {
            double g = std::abs(q[i]) + half;
            acc += g * g;
        }
        return acc;
    }
    AxisBox aabb() const {
        double r = half;
        if (theta != 0.0) r = half * (std::abs(std::cos(theta)) + std::abs(std::sin(theta)));
        AxisBox b;
        b.lo = b.hi = center;
        for (int i = 0; i < dim(); ++i) {
            b.lo[i] -= r;
            b.hi[i] += r;
        }
        return b;
    }
};

/// Immutable shape template: a set H with diam(H) = 1 anchored at its center
/// of mass. All geometric queries are in this local frame. Templates are
/// shareable across threads; every operation is const.
class ShapeTemplate {
public:
    virtual ~ShapeTemplate() = default;

    ShapeKind kind() const { return kind_; }
    int dim() const { return dim_; }
    const std::string& name() const { return name_; }
    bool samplable() const { return samplable_; }

    /// Family volume mass used by the measure calculus. For the snowflake this
    /// is the limit-curve area; the sampled polygon's area is geometry_volume().
    double volume() const { return canonical_volume_; }
    /// Lebesgue volume of the concrete sampled geometry.
    double geometry_volume() const { return geometry_volume_; }
    /// |volume() - geometry_volume()|, zero except for truncated constructions.
    double volume_gap() const { return std::abs(canonical_volume_ - geometry_volume_); }

    virtual bool contains_local(const Vec& p) const = 0;
    /// Distance from p to the topological boundary of H.
    virtual double boundary_distance_local(const Vec& p) const = 0;
    virtual AxisBox bounding_box_local() const = 0;
    /// Some point guaranteed to lie in H (used by box-intersection tests).
    virtual Vec interior_point_local() const { return Vec::zero(dim_); }

    /// Lebesgue volume of the enlargement E(H,r) = { x : d(x,H) < r }.
    virtual Estimate enlarged_volume_local(double r) const { return cloud_enlarged(r); }
    /// Lebesgue volume of the shrinkage S(H,r) = { x in H : d(x, dH) >= r }.
    virtual Estimate shrunken_volume_local(double r) const { return cloud_shrunken(r); }

    /// Does H meet the (closed) box b? May overcount for conservative families,
    /// never misses a true intersection.
    virtual bool box_touches_local(const OrientedBox& b) const = 0;
    /// Is the box b entirely inside H? Never reports true unless certain.
    virtual bool box_inside_local(const OrientedBox& b) const = 0;

    /// Deterministic sample of boundary points for covering estimates.
    virtual std::vector<Vec> boundary_points(int target) const = 0;

protected:
    ShapeTemplate(ShapeKind k, int d, std::string name) : kind_(k), dim_(d), name_(std::move(name)) {}

    // Shared Monte Carlo point cloud with boundary distances, built once per
    // template and reused for every enlargement/shrinkage radius: a volume
    // query is then a binary search over sorted distances. Deterministic.
    void ensure_cloud() const {
        std::call_once(cloud_once_, [&] {
            const int n = 400000;
            AxisBox bb = bounding_box_local().enlarged(cloud_margin_);
            cloud_box_volume_ = bb.volume();
            cloud_total_ = n;
            Rng rng(StreamKey{0xC10ADull, 0, 0, 0, uint64_t(kind_)});
            Vec p = Vec::zero(dim_);
            for (int i = 0; i < n; ++i) {
                for (int k = 0; k < dim_; ++k) p[k] = rng.uniform(bb.lo[k], bb.hi[k]);
                float dd = float(boundary_distance_local(p));
                if (contains_local(p)) cloud_inside_.push_back(dd);
                else cloud_outside_.push_back(dd);
            }
            std::sort(cloud_inside_.begin(), cloud_inside_.end());
            std::sort(cloud_outside_.begin(), cloud_outside_.end());
        });
    }

    Estimate cloud_enlarged(double r) const {
        if (r > cloud_margin_) return mc_enlarged(r);
        ensure_cloud();
        auto it = std::lower_bound(cloud_outside_.begin(), cloud_outside_.end(), float(r));
        double count = double(cloud_inside_.size()) + double(it - cloud_outside_.begin());
        double f = count / cloud_total_;
        double se = cloud_box_volume_ * std::sqrt(std::max(f * (1 - f), 1e-12) / cloud_total_);
        return Estimate::mc(cloud_box_volume_ * f, se);
    }
    Estimate cloud_shrunken(double r) const {
        ensure_cloud();
        auto it = std::lower_bound(cloud_inside_.begin(), cloud_inside_.end(), float(r));
        double count = double(cloud_inside_.end() - it);
        double f = count / cloud_total_;
        double se = cloud_box_volume_ * std::sqrt(std::max(f * (1 - f), 1e-12) / cloud_total_);
        return Estimate::mc(cloud_box_volume_ * f, se);
    }

    Estimate mc_enlarged(double r, int n = 60000) const {
        AxisBox bb = bounding_box_local().enlarged(r);
        Rng rng(StreamKey{0x5e1fCAFE, 0, 0, 0, uint64_t(r * (1ull << 40))});
        long hits = 0;
        Vec p = Vec::zero(dim_);
        for (int i = 0; i < n; ++i) {
            for (int k = 0; k < dim_; ++k) p[k] = rng.uniform(bb.lo[k], bb.hi[k]);
            bool in = contains_local(p) || boundary_distance_local(p) < r;
            hits += in ? 1 : 0;
        }
        double vol = bb.volume();
        double f = double(hits) / n;
        double se = vol * std::sqrt(std::max(f * (1 - f), 1e-12) / n);
        return Estimate::mc(vol * f, se);
    }
    Estimate mc_shrunken(double r, int n = 60000) const {
        AxisBox bb = bounding_box_local();
        Rng rng(StreamKey{0x5e1fBEEF, 0, 0, 0, uint64_t(r * (1ull << 40))});
        long hits = 0;
        Vec p = Vec::zero(dim_);
        for (int i = 0; i < n; ++i) {
            for (int k = 0; k < dim_; ++k) p[k] = rng.uniform(bb.lo[k], bb.hi[k]);
            bool in = contains_local(p) && boundary_distance_local(p) >= r;
            hits += in ? 1 : 0;
        }
        double vol = bb.volume();
        double f = double(hits) / n;
        double se = vol * std::sqrt(std::max(f * (1 - f), 1e-12) / n);
        return Estimate::mc(vol * f, se);
    }

    ShapeKind kind_;
    int dim_;
    std::string name_;
    bool samplable_ = true;
    double canonical_volume_ = 0;
    double geometry_volume_ = 0;

private:
    mutable std::once_flag cloud_once_;
    mutable std::vector<float> cloud_inside_;   // boundary distances, sorted
    mutable std::vector<float> cloud_outside_;
    mutable double cloud_box_volume_ = 0;
    mutable double cloud_total_ = 1;
    double cloud_margin_ = 0.55;
};

using ShapePtr = std::shared_ptr<const ShapeTemplate>;

// ---------------------------------------------------------------------------
// Balls
// ---------------------------------------------------------------------------

class BallTemplate final : public ShapeTemplate {
public:
    BallTemplate(int d, bool open)
        : ShapeTemplate(open ? ShapeKind::BallOpen : ShapeKind::BallClosed, d,
                        open ? "ball-open" : "ball-closed"),
          open_(open) {
        canonical_volume_ = geometry_volume_ = unit_ball_volume(d) * std::pow(0.5, d);
    }

    bool open() const { return open_; }

    bool contains_local(const Vec& p) const override {
        double r2 = p.norm2();
        return open_ ? r2 < 0.25 : r2 <= 0.25;
    }
    double boundary_distance_local(const Vec& p) const override { return std::abs(p.norm() - 0.5); }
    AxisBox bounding_box_local() const override { return AxisBox::cube(Vec::zero(dim_), 1.0); }

    Estimate enlarged_volume_local(double r) const override {
        return Estimate::exact(unit_ball_volume(dim_) * std::pow(0.5 + r, dim_));
    }
    Estimate shrunken_volume_local(double r) const override {
        return Estimate::exact(unit_ball_volume(dim_) * std::pow(std::max(0.5 - r, 0.0), dim_));
    }

    bool box_touches_local(const OrientedBox& b) const override {
        double d2 = b.dist2(Vec::zero(dim_));
        return open_ ? d2 < 0.25 : d2 <= 0.25;
    }
    bool box_inside_local(const OrientedBox& b) const override {
        double f2 = b.far_dist2(Vec::zero(dim_));
        return open_ ? f2 < 0.25 : f2 <= 0.25;
    }

    std::vector<Vec> boundary_points(int target) const override {
        std::vector<Vec> pts;
        if (dim_ == 2) {
            for (int i = 0; i < target; ++i) {
                double a = 2 * kPi * i / target;
                pts.push_back(Vec(0.5 * std::cos(a), 0.5 * std::sin(a)));
            }
        } else {
            // Fibonacci-type spiral on the sphere / uniform-ish lattice fallback.
            Rng rng(StreamKey{0xB0817, 0, 0, 0, uint64_t(dim_)});
            while (int(pts.size()) < target) {
                Vec p = Vec::zero(dim_);
                double n2 = 0;
                for (int k = 0; k < dim_; ++k) {
                    double u1 = rng.u01(), u2 = rng.u01();
                    p[k] = std::sqrt(-2 * std::log(std::max(u1, 1e-300))) * std::cos(2 * kPi * u2);
                    n2 += p[k] * p[k];
                }
                if (n2 < 1e-12) continue;
                pts.push_back(p * (0.5 / std::sqrt(n2)));
            }
        }
        return pts;
    }

private:
    bool open_;
};

// ---------------------------------------------------------------------------
// Axis-aligned cube, side 1/sqrt(d) so the space diagonal (diameter) is 1
// ---------------------------------------------------------------------------

class CubeTemplate final : public ShapeTemplate {
public:
    explicit CubeTemplate(int d) : ShapeTemplate(ShapeKind::Cube, d, "cube") {
        side_ = 1.0 / std::sqrt(double(d));
        canonical_volume_ = geometry_volume_ = std::pow(side_, d);
    }

    double side() const { return side_; }

    bool contains_local(const Vec& p) const override {
        for (int i = 0; i < dim_; ++i)
            if (std::abs(p[i]) > side_ / 2) return false;
        return true;
    }
    double boundary_distance_local(const Vec& p) const override {
        AxisBox b = AxisBox::cube(Vec::zero(dim_), side_);
        if (!b.contains(p)) return std::sqrt(b.dist2(p));
        double m = std::numeric_limits<double>::infinity();
        for (int i = 0; i < dim_; ++i) m = std::min(m, side_ / 2 - std::abs(p[i]));
        return m;
    }
    AxisBox bounding_box_local() const override { return AxisBox::cube(Vec::zero(dim_), side_); }

    Estimate enlarged_volume_local(double r) const override {
        double v = 0;
        for (int j = 0; j <= dim_; ++j)
            v += binomial(dim_, j) * std::pow(side_, dim_ - j) * unit_ball_volume(j) * std::pow(r, j);
        return Estimate::exact(v);
    }
    Estimate shrunken_volume_local(double r) const override {
        return Estimate::exact(std::pow(std::max(side_ - 2 * r, 0.0), dim_));
    }

    bool box_touches_local(const OrientedBox& b) const override {
        AxisBox self = bounding_box_local();
        if (b.axis_aligned()) {
            AxisBox q = b.aabb();
            return self.intersects(q);
        }
        // d=2 OBB vs AABB separating-axis test.
        std::vector<Vec> cs;
        b.corners(cs);
        // Axes of the AABB.
        for (int axis = 0; axis < 2; ++axis) {
            double mn = 1e300, mx = -1e300;
            for (auto& p : cs) {
                mn = std::min(mn, p[axis]);
                mx = std::max(mx, p[axis]);
            }
            if (mx < self.lo[axis] || mn > self.hi[axis]) return false;
        }
        // Axes of the OBB.
        const double c = std::cos(b.theta), s = std::sin(b.theta);
        const Vec axes[2] = {Vec(c, s), Vec(-s, c)};
        for (auto& ax : axes) {
            double qc = (b.center).dot(ax);
            double qlo = qc - b.half, qhi = qc + b.half;
            double mn = 1e300, mx = -1e300;
            for (int mask = 0; mask < 4; ++mask) {
                Vec p((mask & 1) ? self.hi[0] : self.lo[0], (mask & 2) ? self.hi[1] : self.lo[1]);
                double t = p.dot(ax);
                mn = std::min(mn, t);
                mx = std::max(mx, t);
            }
            if (mx < qlo || mn > qhi) return false;
        }
        return true;
    }
    bool box_inside_local(const OrientedBox& b) const override {
        std::vector<Vec> cs;
        b.corners(cs);
        for (auto& p : cs)
            if (!contains_local(p)) return false;
        return true;  // cube is convex
    }

    std::vector<Vec> boundary_points(int target) const override {
        std::vector<Vec> pts;
        if (dim_ == 2) {
            int per = std::max(1, target / 4);
            for (int e = 0; e < 4; ++e)
                for (int i = 0; i < per; ++i) {
                    double t = -side_ / 2 + side_ * i / per;
                    switch (e) {
                        case 0: pts.push_back(Vec(t, -side_ / 2)); break;
                        case 1: pts.push_back(Vec(side_ / 2, t)); break;
                        case 2: pts.push_back(Vec(-t, side_ / 2)); break;
                        default: pts.push_back(Vec(-side_ / 2, -t)); break;
                    }
                }
        } else {
            Rng rng(StreamKey{0xC0BE, 0, 0, 0, uint64_t(dim_)});
            for (int i = 0; i < target; ++i) {
                Vec p = Vec::zero(dim_);
                for (int k = 0; k < dim_; ++k) p[k] = rng.uniform(-side_ / 2, side_ / 2);
                int face = int(rng.u01() * dim_) % dim_;
                p[face] = rng.u01() < 0.5 ? -side_ / 2 : side_ / 2;
                pts.push_back(p);
            }
        }
        return pts;
    }

private:
    double side_;
};

// ---------------------------------------------------------------------------
// Reference-only template: stored volume mass, no geometry
// ---------------------------------------------------------------------------

class ReferenceTemplate final : public ShapeTemplate {
public:
    ReferenceTemplate(int d, double volume_mass, std::string name)
        : ShapeTemplate(ShapeKind::Reference, d, std::move(name)) {
        canonical_volume_ = geometry_volume_ = volume_mass;
        samplable_ = false;
    }

    bool contains_local(const Vec&) const override { throw std::logic_error(name_ + ": reference template has no geometry"); }
    double boundary_distance_local(const Vec&) const override { throw std::logic_error(name_ + ": reference template has no geometry"); }
    AxisBox bounding_box_local() const override { throw std::logic_error(name_ + ": reference template has no geometry"); }
    bool box_touches_local(const OrientedBox&) const override { throw std::logic_error(name_ + ": reference template has no geometry"); }
    bool box_inside_local(const OrientedBox&) const override { throw std::logic_error(name_ + ": reference template has no geometry"); }
    std::vector<Vec> boundary_points(int) const override { throw std::logic_error(name_ + ": reference template has no geometry"); }
};

// ---------------------------------------------------------------------------
// Placed sets G = rho * R_theta * H + x
// ---------------------------------------------------------------------------

struct PlacedSet {
    ShapePtr tmpl;
    double rho = 1;    // diameter of the placed set, in (0,1) when sampled
    double theta = 0;  // rotation, d=2 families with a rotation kernel only
    Vec pos;           // anchor position (center of mass of G)
    double mark = 0;   // uniform coupling mark for thinning
    int atom = 0;      // index of the originating measure atom

    int dim() const { return pos.d; }

    Vec to_local(const Vec& p) const {
        Vec q = p - pos;
        if (theta != 0.0) {
            const double c = std::cos(-theta), s = std::sin(-theta);
            double x = q[0] * c - q[1] * s, y = q[0] * s + q[1] * c;
            q[0] = x;
            q[1] = y;
        }
        return q * (1.0 / rho);
    }

    AxisBox bounding_box() const {
        AxisBox local = tmpl->bounding_box_local();
        double rad = 0;
        for (int i = 0; i < dim(); ++i)
            rad = std::max({rad, std::abs(local.lo[i]), std::abs(local.hi[i])});
        if (theta == 0.0) {
            AxisBox b;
            b.lo = pos;
            b.hi = pos;
            for (int i = 0; i < dim(); ++i) {
                b.lo[i] += rho * local.lo[i];
                b.hi[i] += rho * local.hi[i];
            }
            return b;
        }
        // rotated: use the circumscribed ball of the local bbox
        double r = 0;
        for (int i = 0; i < dim(); ++i) r += sqr(std::max(std::abs(local.lo[i]), std::abs(local.hi[i])));
        r = std::sqrt(r) * rho;
        return AxisBox::cube(pos, 2 * r);
    }
};

/// Membership test, exact per family semantics (strict for open balls).
inline bool contains(const PlacedSet& g, const Vec& p) {
    if (g.dim() != p.d) throw std::invalid_argument("contains: dimension mismatch");
    return g.tmpl->contains_local(g.to_local(p));
}

/// Does G meet the closed axis box [lo,hi]?
inline bool touches_box(const PlacedSet& g, const AxisBox& box) {
    OrientedBox q;
    q.center = box.center() - g.pos;
    if (g.theta != 0.0) {
        const double c = std::cos(-g.theta), s = std::sin(-g.theta);
        double x = q.center[0] * c - q.center[1] * s, y = q.center[0] * s + q.center[1] * c;
        q.center[0] = x;
        q.center[1] = y;
        q.theta = -g.theta;
    }
    q.center = q.center * (1.0 / g.rho);
    q.half = 0.5 * (box.hi[0] - box.lo[0]) / g.rho;
    return g.tmpl->box_touches_local(q);
}

/// Is the closed axis box [lo,hi] inside G? Conservative for grid families.
inline bool contains_box(const PlacedSet& g, const AxisBox& box) {
    OrientedBox q;
    q.center = box.center() - g.pos;
    if (g.theta != 0.0) {
        const double c = std::cos(-g.theta), s = std::sin(-g.theta);
        double x = q.center[0] * c - q.center[1] * s, y = q.center[0] * s + q.center[1] * c;
        q.center[0] = x;
        q.center[1] = y;
        q.theta = -g.theta;
    }
    q.center = q.center * (1.0 / g.rho);
    q.half = 0.5 * (box.hi[0] - box.lo[0]) / g.rho;
    return g.tmpl->box_inside_local(q);
}

/// Volume of the placed geometry: L(rho H) = rho^d L(H).
inline double volume(const PlacedSet& g) { return std::pow(g.rho, g.dim()) * g.tmpl->geometry_volume(); }

enum class LayerMode { Enlarge, Shrink, InnerLayer };

struct BoundaryLayerQuery {
    double r = 0;
    LayerMode mode = LayerMode::Enlarge;
};

/// Volumes of E(G,r), S(G,r) and the inner layer [dG]^r = G \ S(G,r).
inline Estimate layer_volume(const PlacedSet& g, const BoundaryLayerQuery& q) {
    if (!(q.r > 0)) throw std::invalid_argument("layer_volume: r must be positive");
    const double scale = std::pow(g.rho, g.dim());
    const double rl = q.r / g.rho;
    auto scaled = [&](Estimate e) {
        e.value *= scale;
        e.lo *= scale;
        e.hi *= scale;
        e.se *= scale;
        return e;
    };
    switch (q.mode) {
        case LayerMode::Enlarge: return scaled(g.tmpl->enlarged_volume_local(rl));
        case LayerMode::Shrink: return scaled(g.tmpl->shrunken_volume_local(rl));
        case LayerMode::InnerLayer: {
            Estimate s = g.tmpl->shrunken_volume_local(rl);
            double vol = g.tmpl->geometry_volume();
            Estimate out;
            out.value = scale * (vol - s.value);
            out.lo = scale * (vol - s.hi);
            out.hi = scale * (vol - s.lo);
            out.se = scale * s.se;
            out.method = s.method;
            return out;
        }
    }
    throw std::logic_error("unreachable");
}

// ---------------------------------------------------------------------------
// Greedy boundary covers (upper bound on the covering number of dH)
// ---------------------------------------------------------------------------

/// |P_r(H)|: size of a greedy cover of a boundary discretization by r-balls.
/// Deterministic; returns an upper bound on the true covering number.
inline int covering_number(const ShapeTemplate& shape, double r, int boundary_samples = 20000) {
    if (!(r > 0)) throw std::invalid_argument("covering_number: need r > 0");
    if (r >= 1) return 1;  // one ball of radius >= diam(H) covers everything
    auto pts = shape.boundary_points(boundary_samples);
    std::vector<Vec> centers;
    const double r2 = r * r;
    for (const auto& p : pts) {
        bool covered = false;
        for (const auto& c : centers) {
            if ((p - c).norm2() <= r2) {
                covered = true;
                break;
            }
        }
        if (!covered) centers.push_back(p);
    }
    return std::max<int>(1, int(centers.size()));
}

/// Least-squares slope of log N(r) against log(1/r) over dyadic radii
/// [2^-k_hi, 2^-k_lo]: an upper box-dimension estimate for dH.
inline double boundary_dimension_fit(const ShapeTemplate& shape, int k_lo = 4, int k_hi = 10,
                                     int boundary_samples = 20000) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (int k = k_lo; k <= k_hi; ++k) {
        double r = std::pow(2.0, -k);
        double x = std::log(1.0 / r);
        double y = std::log(double(covering_number(shape, r, boundary_samples)));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace sicover
