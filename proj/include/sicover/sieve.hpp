#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "sicover/shapes.hpp"

namespace sicover {

namespace sieve_detail {

/// 1-D squared-distance transform (Felzenszwalb-Huttenlocher lower envelope).
inline void dt1d(const double* f, double* d, int n, int* v, double* z) {
    int k = 0;
    v[0] = 0;
    z[0] = -1e300;
    z[1] = 1e300;
    for (int q = 1; q < n; ++q) {
        double s;
        while (true) {
            s = ((f[q] + q * double(q)) - (f[v[k]] + v[k] * double(v[k]))) / (2.0 * q - 2.0 * v[k]);
            if (s <= z[k]) --k;
            else break;
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = 1e300;
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        double dq = q - double(v[k]);
        d[q] = dq * dq + f[v[k]];
    }
}

/// Full 2-D squared Euclidean distance transform on an n x n grid.
/// mask[j*n+i] != 0 marks obstacle cells (distance 0 there).
inline std::vector<float> edt2(const std::vector<uint8_t>& mask, int n) {
    const double INF = 1e300;
    std::vector<float> out(size_t(n) * n);
    const size_t un = size_t(n);
    std::vector<double> col(un);
    std::vector<double> dcol(un);
    std::vector<double> row(un);
    std::vector<double> drow(un);
    std::vector<double> z(un + 1);
    std::vector<int> v(un);
    std::vector<float> tmp(size_t(n) * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) col[size_t(j)] = mask[size_t(j) * n + i] ? 0.0 : INF;
        dt1d(col.data(), dcol.data(), n, v.data(), z.data());
        for (int j = 0; j < n; ++j) tmp[size_t(j) * n + i] = float(dcol[size_t(j)]);
    }
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) row[size_t(i)] = double(tmp[size_t(j) * n + i]);
        dt1d(row.data(), drow.data(), n, v.data(), z.data());
        for (int i = 0; i < n; ++i) out[size_t(j) * n + i] = float(drow[size_t(i)]);
    }
    return out;
}

}  // namespace sieve_detail

/// The sequential sieve counterexample: closed box collections K_1 > K_2 > ...
/// on dyadic grids (K_1 = all level-1 boxes, K_2 a chequerboard, and level
/// n+1 keeps ceil(2^{d(n+1)}/(n+1)) children, at least one per parent). The
/// template is H = (0,1)^d \ K_{n_max}, rescaled to diameter 1 with its centre
/// of mass at the origin. Its boundary satisfies Assumption 2 (vanishing
/// Lebesgue measure in the limit) while the inner boundary layers stay fat,
/// which is what drives the divergent covering integral.
class SieveComplementTemplate final : public ShapeTemplate {
public:
    explicit SieveComplementTemplate(int n_max = 12)
        : ShapeTemplate(ShapeKind::SieveComplement, 2, "sieve-complement"), n_max_(n_max) {
        if (n_max < 2 || n_max > 13) throw std::invalid_argument("sieve-complement: n_max in [2,13]");
        build();
    }

    int n_max() const { return n_max_; }
    /// L(K_n) for n = 1..n_max in construction-frame units.
    const std::vector<double>& level_volumes() const { return level_volumes_; }
    double rescale_factor() const { return scale_; }

    bool contains_local(const Vec& p) const override {
        Vec f = to_frame(p);
        if (f[0] <= 0 || f[0] >= 1 || f[1] <= 0 || f[1] >= 1) return false;
        return !kcell(f);
    }

    double boundary_distance_local(const Vec& p) const override {
        Vec f = to_frame(p);
        const int n = grid_n_;
        double frame_d;
        bool inside_frame = f[0] > 0 && f[0] < 1 && f[1] > 0 && f[1] < 1;
        if (inside_frame) {
            frame_d = std::min(std::min(f[0], 1 - f[0]), std::min(f[1], 1 - f[1]));
            int i = std::clamp(int(f[0] * n), 0, n - 1);
            int j = std::clamp(int(f[1] * n), 0, n - 1);
            double dk = std::sqrt(double(dist2_to_k_[size_t(j) * n + i])) / n;  // +- half diagonal
            return std::max(0.0, std::min(frame_d, dk)) / scale_inv_();
        }
        // outside the frame: distance to the closure of H ~ distance to frame
        double dx = std::max({0.0, -f[0], f[0] - 1});
        double dy = std::max({0.0, -f[1], f[1] - 1});
        return std::sqrt(dx * dx + dy * dy) / scale_inv_();
    }

    AxisBox bounding_box_local() const override { return bbox_; }
    Vec interior_point_local() const override { return interior_; }

    Estimate shrunken_volume_local(double r) const override {
        double rf = r * scale_inv_();  // template -> frame units
        double lo = count_at_least(shrink_keys_lo_, rf) * cell_area_();
        double hi = count_at_least(shrink_keys_hi_, rf) * cell_area_();
        lo *= sqr(scale_);
        hi *= sqr(scale_);
        return Estimate::bracket(lo, hi, "grid");
    }

    Estimate enlarged_volume_local(double r) const override {
        double rf = r * scale_inv_();
        // H plus the K-cells within r of H plus an outer collar bound.
        double inner_lo = count_less(enlarge_keys_hi_, rf) * cell_area_();
        double inner_hi = count_less(enlarge_keys_lo_, rf) * cell_area_();
        double collar_hi = sqr(1 + 2 * rf) - 1.0;
        double lo = (frame_volume_ + inner_lo) * sqr(scale_);
        double hi = (frame_volume_ + inner_hi + collar_hi) * sqr(scale_);
        return Estimate::bracket(lo, hi, "grid");
    }

    bool box_touches_local(const OrientedBox& q) const override {
        AxisBox a = q.aabb();
        Vec flo = to_frame(a.lo), fhi = to_frame(a.hi);
        const int n = grid_n_;
        if (fhi[0] <= 0 || flo[0] >= 1 || fhi[1] <= 0 || flo[1] >= 1) return false;
        int i0 = std::clamp(int(std::floor(flo[0] * n)), 0, n - 1);
        int i1 = std::clamp(int(std::ceil(fhi[0] * n)) - 1, 0, n - 1);
        int j0 = std::clamp(int(std::floor(flo[1] * n)), 0, n - 1);
        int j1 = std::clamp(int(std::ceil(fhi[1] * n)) - 1, 0, n - 1);
        long range = (long(i1) - i0 + 1) * (long(j1) - j0 + 1);
        if (range <= 4096) {
            for (int j = j0; j <= j1; ++j)
                for (int i = i0; i <= i1; ++i)
                    if (!kmask_[size_t(j) * n + i]) {
                        // open overlap of the free cell with the query rect
                        double clo = double(i) / n, chi = double(i + 1) / n;
                        double dlo = double(j) / n, dhi = double(j + 1) / n;
                        if (fhi[0] > clo && flo[0] < chi && fhi[1] > dlo && flo[1] < dhi) return true;
                    }
            return false;
        }
        return true;  // large ranges always contain free cells at these densities
    }

    bool box_inside_local(const OrientedBox& q) const override {
        AxisBox a = q.aabb();
        Vec flo = to_frame(a.lo), fhi = to_frame(a.hi);
        const int n = grid_n_;
        if (flo[0] <= 0 || fhi[0] >= 1 || flo[1] <= 0 || fhi[1] >= 1) return false;
        int i0 = std::clamp(int(std::floor(flo[0] * n)), 0, n - 1);
        int i1 = std::clamp(int(std::ceil(fhi[0] * n)) - 1, 0, n - 1);
        int j0 = std::clamp(int(std::floor(flo[1] * n)), 0, n - 1);
        int j1 = std::clamp(int(std::ceil(fhi[1] * n)) - 1, 0, n - 1);
        long range = (long(i1) - i0 + 1) * (long(j1) - j0 + 1);
        if (range > 100000) return false;  // conservative
        for (int j = j0; j <= j1; ++j)
            for (int i = i0; i <= i1; ++i)
                if (kmask_[size_t(j) * n + i]) return false;
        return true;
    }

    std::vector<Vec> boundary_points(int target) const override {
        std::vector<Vec> pts;
        const int n = grid_n_;
        size_t stride = std::max<size_t>(1, kcells_.size() / size_t(std::max(1, target)));
        for (size_t idx = 0; idx < kcells_.size(); idx += stride) {
            uint32_t c = kcells_[idx];
            int i = int(c % uint32_t(n)), j = int(c / uint32_t(n));
            Vec f(double(i) / n, double(j) / n);
            pts.push_back(from_frame(f));
        }
        return pts;
    }

private:
    double scale_inv_() const { return 1.0 / scale_; }
    double cell_area_() const { return 1.0 / (double(grid_n_) * grid_n_); }

    Vec to_frame(const Vec& p) const {
        Vec f = p * (1.0 / scale_);
        return f + centroid_;
    }
    Vec from_frame(const Vec& f) const { return (f - centroid_) * scale_; }

    bool kcell(const Vec& f) const {
        const int n = grid_n_;
        int i = std::clamp(int(f[0] * n), 0, n - 1);
        int j = std::clamp(int(f[1] * n), 0, n - 1);
        return kmask_[size_t(j) * n + i] != 0;
    }

    static double count_at_least(const std::vector<float>& sorted, double r) {
        auto it = std::lower_bound(sorted.begin(), sorted.end(), float(r));
        return double(sorted.end() - it);
    }
    static double count_less(const std::vector<float>& sorted, double r) {
        auto it = std::lower_bound(sorted.begin(), sorted.end(), float(r));
        return double(it - sorted.begin());
    }

    void build();

    int n_max_;
    int grid_n_ = 0;
    double scale_ = 1;           // template = (frame - centroid) * scale_
    double frame_volume_ = 0;    // L(H) in frame units
    Vec centroid_;
    Vec interior_;
    AxisBox bbox_;
    std::vector<uint8_t> kmask_;
    std::vector<uint32_t> kcells_;
    std::vector<float> dist2_to_k_;     // per cell, in cell units, to K cells
    std::vector<float> shrink_keys_lo_;  // sorted certain/possible S membership keys
    std::vector<float> shrink_keys_hi_;
    std::vector<float> enlarge_keys_lo_;  // K-side distance-to-H keys
    std::vector<float> enlarge_keys_hi_;
    std::vector<double> level_volumes_;
};

inline void SieveComplementTemplate::build() {
    const int d = 2;
    grid_n_ = 1 << n_max_;
    const int N = grid_n_;

    // Level lists of kept cells, row-major indices on the level-n grid.
    std::vector<uint32_t> cur;
    for (uint32_t j = 0; j < 2; ++j)
        for (uint32_t i = 0; i < 2; ++i) cur.push_back(j * 2 + i);  // K_1 = all of B_1
    level_volumes_.assign(1, 1.0);
    for (int n = 1; n < n_max_; ++n) {
        const uint32_t side = 1u << n;
        const uint32_t side2 = side * 2;
        std::vector<uint32_t> next;
        uint64_t target;
        if (n == 1) {
            // K_2: chequerboard of level-2 boxes with even index sum
            for (uint32_t c : cur) {
                uint32_t i = c % side, j = c / side;
                for (uint32_t cj = 0; cj < 2; ++cj)
                    for (uint32_t ci = 0; ci < 2; ++ci) {
                        uint32_t ii = 2 * i + ci, jj = 2 * j + cj;
                        if ((ii + jj) % 2 == 0) next.push_back(jj * side2 + ii);
                    }
            }
            target = next.size();
        } else {
            const uint64_t total = 1ull << (d * (n + 1));
            target = (total + uint64_t(n)) / uint64_t(n + 1);  // ceil(2^{d(n+1)}/(n+1))
            const uint64_t parents = cur.size();
            // diagonal-first child order spreads the kept cells
            static const int off[4][2] = {{0, 0}, {1, 1}, {0, 1}, {1, 0}};
            for (uint64_t p = 0; p < parents; ++p) {
                uint64_t quota = ((p + 1) * target) / parents - (p * target) / parents;
                uint32_t c = cur[size_t(p)];
                uint32_t i = c % side, j = c / side;
                for (uint64_t q = 0; q < quota && q < 4; ++q) {
                    uint32_t ii = 2 * i + uint32_t(off[size_t(q)][0]);
                    uint32_t jj = 2 * j + uint32_t(off[size_t(q)][1]);
                    next.push_back(jj * side2 + ii);
                }
            }
        }
        std::sort(next.begin(), next.end());
        cur.swap(next);
        level_volumes_.push_back(double(cur.size()) / double(1ull << (d * (n + 1))));
    }
    kcells_ = cur;
    kmask_.assign(size_t(N) * N, 0);
    for (uint32_t c : kcells_) kmask_[c] = 1;
    frame_volume_ = 1.0 - double(kcells_.size()) / (double(N) * N);

    // Distance transforms (in cell units).
    dist2_to_k_ = sieve_detail::edt2(kmask_, N);
    std::vector<uint8_t> fmask(size_t(N) * N);
    for (size_t i = 0; i < fmask.size(); ++i) fmask[i] = kmask_[i] ? 0 : 1;
    std::vector<float> dist2_to_h = sieve_detail::edt2(fmask, N);

    // Exact centroid of H over the frame.
    double kx = 0, ky = 0;
    for (uint32_t c : kcells_) {
        kx += (double(c % uint32_t(N)) + 0.5);
        ky += (double(c / uint32_t(N)) + 0.5);
    }
    kx /= N;
    ky /= N;
    const double karea = double(kcells_.size()) / (double(N) * N);
    const double cell = 1.0 / N;
    Vec centroid_frame((0.5 - kx * cell * cell) / (1 - karea), (0.5 - ky * cell * cell) / (1 - karea));

    // Diameter of cl(H) from extreme free-cell corners per column.
    std::vector<Vec> cand;
    for (int i = 0; i < N; ++i) {
        int jmin = -1, jmax = -1;
        for (int j = 0; j < N; ++j)
            if (!kmask_[size_t(j) * N + i]) {
                if (jmin < 0) jmin = j;
                jmax = j;
            }
        if (jmin < 0) continue;
        cand.push_back(Vec(i * cell, jmin * cell));
        cand.push_back(Vec((i + 1) * cell, jmin * cell));
        cand.push_back(Vec(i * cell, (jmax + 1) * cell));
        cand.push_back(Vec((i + 1) * cell, (jmax + 1) * cell));
    }
    double diam2 = 0;
    // extremes dominate; prune with a coarse hull over 64 angular directions
    std::vector<Vec> hull;
    for (int a = 0; a < 64; ++a) {
        double ang = kPi * a / 64;
        Vec dir(std::cos(ang), std::sin(ang));
        double mn = 1e300, mx = -1e300;
        size_t imn = 0, imx = 0;
        for (size_t t = 0; t < cand.size(); ++t) {
            double s = cand[t].dot(dir);
            if (s < mn) { mn = s; imn = t; }
            if (s > mx) { mx = s; imx = t; }
        }
        hull.push_back(cand[imn]);
        hull.push_back(cand[imx]);
    }
    for (size_t a = 0; a < hull.size(); ++a)
        for (size_t b = a + 1; b < hull.size(); ++b) diam2 = std::max(diam2, (hull[a] - hull[b]).norm2());
    scale_ = 1.0 / std::sqrt(diam2);
    centroid_ = centroid_frame;

    bbox_.lo = from_frame(Vec(0, 0));
    bbox_.hi = from_frame(Vec(1, 1));

    // Shrink keys: per free cell, certain [lo] and possible [hi] membership
    // radius for S(H,r), cell units converted to frame units (/N).
    const double half_diag = std::sqrt(2.0) / 2.0;
    shrink_keys_lo_.reserve(size_t(N) * N - kcells_.size());
    shrink_keys_hi_.reserve(shrink_keys_lo_.capacity());
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < N; ++i) {
            size_t idx = size_t(j) * N + i;
            if (kmask_[idx]) continue;
            double dk = std::sqrt(double(dist2_to_k_[idx]));
            double fx = (i + 0.5), fy = (j + 0.5);
            double frame_d = std::min(std::min(fx, N - fx), std::min(fy, N - fy));
            double base = std::min(dk, frame_d);
            shrink_keys_lo_.push_back(float(std::max(0.0, base - 2 * half_diag) / N));
            shrink_keys_hi_.push_back(float((base + half_diag) / N));
        }
    std::sort(shrink_keys_lo_.begin(), shrink_keys_lo_.end());
    std::sort(shrink_keys_hi_.begin(), shrink_keys_hi_.end());

    enlarge_keys_lo_.reserve(kcells_.size());
    enlarge_keys_hi_.reserve(kcells_.size());
    for (uint32_t c : kcells_) {
        double dh = std::sqrt(double(dist2_to_h[c]));
        enlarge_keys_lo_.push_back(float(std::max(0.0, dh - 2 * half_diag) / N));
        enlarge_keys_hi_.push_back(float((dh + half_diag) / N));
    }
    std::sort(enlarge_keys_lo_.begin(), enlarge_keys_lo_.end());
    std::sort(enlarge_keys_hi_.begin(), enlarge_keys_hi_.end());

    // Interior point: centre of the first free cell.
    for (int j = 0; j < N && interior_.norm2() == 0; ++j)
        for (int i = 0; i < N; ++i)
            if (!kmask_[size_t(j) * N + i]) {
                interior_ = from_frame(Vec((i + 0.5) * cell, (j + 0.5) * cell));
                break;
            }

    canonical_volume_ = geometry_volume_ = frame_volume_ * sqr(scale_);
    dist2_to_h.clear();
    dist2_to_h.shrink_to_fit();
}

}  // namespace sicover
