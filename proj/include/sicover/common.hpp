#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace sicover {

// Ambient dimensions supported by the value types below.
inline constexpr int kMaxDim = 4;

inline constexpr double kPi = 3.14159265358979323846;

/// Volume of the unit ball in R^d.
inline double unit_ball_volume(int d) {
    switch (d) {
        case 0: return 1.0;
        case 1: return 2.0;
        case 2: return kPi;
        case 3: return 4.0 * kPi / 3.0;
        case 4: return kPi * kPi / 2.0;
        default: throw std::invalid_argument("unit_ball_volume: dimension out of range");
    }
}

inline double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * double(n - k + i) / double(i);
    return r;
}

/// Point/vector in R^d with d <= kMaxDim. Value type, fixed capacity.
struct Vec {
    std::array<double, kMaxDim> c{};
    int d = 2;

    Vec() = default;
    Vec(double x, double y) : c{x, y, 0, 0}, d(2) {}
    Vec(double x, double y, double z) : c{x, y, z, 0}, d(3) {}
    static Vec zero(int dim) {
        Vec v;
        v.d = dim;
        return v;
    }

    double& operator[](int i) { return c[size_t(i)]; }
    double operator[](int i) const { return c[size_t(i)]; }

    Vec operator+(const Vec& o) const {
        Vec r = *this;
        for (int i = 0; i < d; ++i) r.c[size_t(i)] += o.c[size_t(i)];
        return r;
    }
    Vec operator-(const Vec& o) const {
        Vec r = *this;
        for (int i = 0; i < d; ++i) r.c[size_t(i)] -= o.c[size_t(i)];
        return r;
    }
    Vec operator*(double s) const {
        Vec r = *this;
        for (int i = 0; i < d; ++i) r.c[size_t(i)] *= s;
        return r;
    }
    double dot(const Vec& o) const {
        double s = 0;
        for (int i = 0; i < d; ++i) s += c[size_t(i)] * o.c[size_t(i)];
        return s;
    }
    double norm2() const { return dot(*this); }
    double norm() const { return std::sqrt(norm2()); }
};

/// Axis-aligned box [lo, hi] in R^d.
struct AxisBox {
    Vec lo, hi;

    int dim() const { return lo.d; }

    static AxisBox unit(int d) {
        AxisBox b;
        b.lo = Vec::zero(d);
        b.hi = Vec::zero(d);
        for (int i = 0; i < d; ++i) b.hi[i] = 1.0;
        return b;
    }
    static AxisBox cube(const Vec& center, double side) {
        AxisBox b;
        b.lo = b.hi = center;
        for (int i = 0; i < center.d; ++i) {
            b.lo[i] -= side / 2;
            b.hi[i] += side / 2;
        }
        return b;
    }

    double volume() const {
        double v = 1;
        for (int i = 0; i < dim(); ++i) v *= (hi[i] - lo[i]);
        return v;
    }
    AxisBox enlarged(double m) const {
        AxisBox b = *this;
        for (int i = 0; i < dim(); ++i) {
            b.lo[i] -= m;
            b.hi[i] += m;
        }
        return b;
    }
    bool contains(const Vec& p) const {
        for (int i = 0; i < dim(); ++i)
            if (p[i] < lo[i] || p[i] > hi[i]) return false;
        return true;
    }
    bool intersects(const AxisBox& o) const {
        for (int i = 0; i < dim(); ++i)
            if (o.hi[i] < lo[i] || o.lo[i] > hi[i]) return false;
        return true;
    }
    /// Squared Euclidean distance from p to this (closed) box.
    double dist2(const Vec& p) const {
        double s = 0;
        for (int i = 0; i < dim(); ++i) {
            double g = 0;
            if (p[i] < lo[i]) g = lo[i] - p[i];
            else if (p[i] > hi[i]) g = p[i] - hi[i];
            s += g * g;
        }
        return s;
    }
    /// Squared distance from p to the farthest point of the box.
    double far_dist2(const Vec& p) const {
        double s = 0;
        for (int i = 0; i < dim(); ++i) {
            double g = std::max(std::abs(p[i] - lo[i]), std::abs(p[i] - hi[i]));
            s += g * g;
        }
        return s;
    }
    Vec center() const {
        Vec v = lo;
        for (int i = 0; i < dim(); ++i) v[i] = 0.5 * (lo[i] + hi[i]);
        return v;
    }
};

/// A numeric result with an uncertainty bracket. `method` is one of
/// "analytic", "quadrature", "monte-carlo", "grid". For analytic values
/// lo == value == hi and se == 0.
struct Estimate {
    double value = 0;
    double lo = 0;
    double hi = 0;
    double se = 0;
    std::string method = "analytic";

    static Estimate exact(double v, const char* m = "analytic") { return {v, v, v, 0.0, m}; }
    static Estimate bracket(double lo, double hi, const char* m = "grid") {
        return {0.5 * (lo + hi), lo, hi, 0.0, m};
    }
    static Estimate mc(double v, double se) { return {v, v - 3 * se, v + 3 * se, se, "monte-carlo"}; }
};

inline double sqr(double x) { return x * x; }

}  // namespace sicover
