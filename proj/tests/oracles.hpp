#pragma once

// Test-side oracles, deliberately independent of the library's quadrature and
// estimators: composite Simpson integration, brute-force Monte Carlo
// membership counting, and fine-grid counting.

#include <cmath>
#include <functional>

#include "sicover/shapes.hpp"

namespace oracles {

/// Composite Simpson rule with a fixed odd node count.
inline double simpson(const std::function<double(double)>& f, double a, double b, int nodes = 4001) {
    if (nodes % 2 == 0) ++nodes;
    const double h = (b - a) / (nodes - 1);
    double acc = f(a) + f(b);
    for (int i = 1; i < nodes - 1; ++i) acc += f(a + i * h) * (i % 2 ? 4 : 2);
    return acc * h / 3.0;
}

struct McArea {
    double value = 0;
    double se = 0;
};

/// Monte Carlo area of {p : pred(p)} inside the box, fixed seed.
inline McArea mc_area(const sicover::AxisBox& box, const std::function<bool(const sicover::Vec&)>& pred,
                      long samples, uint64_t seed = 20240811) {
    sicover::Rng rng(sicover::StreamKey{seed, 0, 0, 0, 99});
    long hits = 0;
    const int d = box.dim();
    sicover::Vec p = sicover::Vec::zero(d);
    for (long i = 0; i < samples; ++i) {
        for (int k = 0; k < d; ++k) p[k] = rng.uniform(box.lo[k], box.hi[k]);
        hits += pred(p) ? 1 : 0;
    }
    const double vol = box.volume();
    const double f = double(hits) / double(samples);
    return {vol * f, vol * std::sqrt(std::max(f * (1 - f), 1e-12) / double(samples))};
}

struct GridBracket {
    double lower = 0;
    double upper = 0;
};

/// Fine-grid counting bracket of {p : pred(p)} over the box: cells whose
/// 3x3 probe points all satisfy pred count to the lower bound, cells with any
/// probe satisfying count to the upper bound.
inline GridBracket grid_bracket(const sicover::AxisBox& box,
                                const std::function<bool(const sicover::Vec&)>& pred, int cells_per_axis) {
    const int d = box.dim();
    if (d != 2) throw std::invalid_argument("grid_bracket: d=2 oracle");
    const double hx = (box.hi[0] - box.lo[0]) / cells_per_axis;
    const double hy = (box.hi[1] - box.lo[1]) / cells_per_axis;
    long full = 0, any = 0;
    for (int j = 0; j < cells_per_axis; ++j)
        for (int i = 0; i < cells_per_axis; ++i) {
            int in = 0;
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b) {
                    sicover::Vec p(box.lo[0] + (i + 0.25 * (a + 1)) * hx,
                                   box.lo[1] + (j + 0.25 * (b + 1)) * hy);
                    in += pred(p) ? 1 : 0;
                }
            if (in == 9) ++full;
            if (in > 0) ++any;
        }
    const double cell = hx * hy;
    return {full * cell, any * cell};
}

}  // namespace oracles
