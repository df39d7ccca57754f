#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "sicover/koch.hpp"
#include "sicover/quadrature.hpp"
#include "sicover/shapes.hpp"
#include "sicover/sieve.hpp"
#include "sicover/union_boxes.hpp"

namespace sicover {

// ---------------------------------------------------------------------------
// Measures: nu_o x rho^-(d+1) drho x Lebesgue, cutoff at diameter one.
// ---------------------------------------------------------------------------

struct MeasureAtom {
    ShapePtr shape;
    double weight = 1.0;  // nu_o point mass on this template
};

enum class RotationKernel { None, Uniform2D };

/// Finite base measure nu_o: point masses on diameter-one templates anchored
/// at their centre of mass, plus an optional uniform rotation kernel (d=2).
struct BaseMeasure {
    std::vector<MeasureAtom> atoms;
    RotationKernel rotation = RotationKernel::None;

    double total_mass() const {
        double m = 0;
        for (const auto& a : atoms) m += a.weight;
        return m;
    }
    /// nu_o(L(H)) = sum of weight * volume over atoms.
    double volume_mass() const {
        double m = 0;
        for (const auto& a : atoms) m += a.weight * a.shape->volume();
        return m;
    }
    bool samplable() const {
        for (const auto& a : atoms)
            if (!a.shape->samplable() || a.shape->geometry_volume() <= 0) return false;
        return !atoms.empty();
    }
};

/// The full semi scale invariant measure: base templates, the rho^-(d+1)
/// scale kernel on (0,1) and Lebesgue translations. Immutable.
struct ScaleInvariantMeasure {
    BaseMeasure base;
    int dim = 2;
    std::string name = "custom";

    /// Mass of the scale kernel over diameter band l: rho in [2^-l, 2^-l+1).
    double band_scale_mass(int l) const {
        const double d = dim;
        return (std::pow(2.0, d * l) - std::pow(2.0, d * (l - 1))) / d;
    }
};

// --- canonical model factories ---------------------------------------------

/// Fractal ball model. The radius parametrization nu(dr) = r^-(d+1) dr on
/// (0,1/2] maps to the diameter parametrization as a point mass of weight 2^d
/// on the unit-diameter ball: r = rho/2 gives r^-(d+1) dr = 2^d rho^-(d+1) drho.
inline double ball_radius_kernel_weight(int d) { return std::pow(2.0, d); }

inline ScaleInvariantMeasure ball_model(int d, bool open_balls = false) {
    ScaleInvariantMeasure m;
    m.dim = d;
    m.name = open_balls ? "ball-open" : "ball-closed";
    m.base.atoms.push_back({std::make_shared<BallTemplate>(d, open_balls), ball_radius_kernel_weight(d)});
    return m;
}

inline ScaleInvariantMeasure cube_model(int d) {
    ScaleInvariantMeasure m;
    m.dim = d;
    m.name = "cube";
    m.base.atoms.push_back({std::make_shared<CubeTemplate>(d), 1.0});
    return m;
}

/// Scale invariant snowflake model: uniform rotations, nu(dl) = l^-3 dl on
/// diameters. Unit nu_o mass on the iteration-K polygon template.
inline ScaleInvariantMeasure snowflake_model(int iterations = 8) {
    ScaleInvariantMeasure m;
    m.dim = 2;
    m.name = "koch-snowflake";
    m.base.rotation = RotationKernel::Uniform2D;
    m.base.atoms.push_back({std::make_shared<KochTemplate>(iterations), 1.0});
    return m;
}

inline ScaleInvariantMeasure rational_box_model(int k_max = 20) {
    ScaleInvariantMeasure m;
    m.dim = 2;
    m.name = "rational-box-union";
    m.base.atoms.push_back({std::make_shared<RationalBoxUnionTemplate>(k_max), 1.0});
    return m;
}

inline ScaleInvariantMeasure sieve_model(int n_max = 12) {
    ScaleInvariantMeasure m;
    m.dim = 2;
    m.name = "sieve-complement";
    m.base.atoms.push_back({std::make_shared<SieveComplementTemplate>(n_max), 1.0});
    return m;
}

/// Brownian loop soup outer boundaries: stored reference constants only
/// (mu(A_1) = log(2)/5 in d=2), not samplable here.
inline ScaleInvariantMeasure loop_soup_reference() {
    ScaleInvariantMeasure m;
    m.dim = 2;
    m.name = "loop-soup-reference";
    m.base.atoms.push_back({std::make_shared<ReferenceTemplate>(2, 0.2, "loop-soup-outer-boundary"), 1.0});
    return m;
}

/// Reference measure with unit volume mass (lambda_e = d).
inline ScaleInvariantMeasure unit_volume_reference(int d) {
    ScaleInvariantMeasure m;
    m.dim = d;
    m.name = "unit-volume-reference";
    m.base.atoms.push_back({std::make_shared<ReferenceTemplate>(d, 1.0, "unit-volume"), 1.0});
    return m;
}

// ---------------------------------------------------------------------------
// mu(A_1) and the critical intensity
// ---------------------------------------------------------------------------

/// mu(A_1) = nu_o(L(H)) log 2.
inline double mu_A1(const ScaleInvariantMeasure& m) { return m.base.volume_mass() * std::log(2.0); }

/// mu(A_1) by quadrature of the scale kernel against the template volumes:
/// integral over rho in [1/2,1) of rho^d nu_o(L(H)) rho^-(d+1) drho.
inline double mu_A1_quadrature(const ScaleInvariantMeasure& m) {
    const double mass = m.base.volume_mass();
    const int d = m.dim;
    return integrate([&](double rho) { return mass * std::pow(rho, d) * std::pow(rho, -(d + 1)); },
                     0.5, 1.0, 1e-12);
}

struct CriticalValue {
    double value = 0;
    bool infinite = false;
};

/// lambda_e = d log2 / mu(A_1) = d / nu_o(L(H)); infinite when the measure
/// puts no mass on positive-volume sets.
inline CriticalValue lambda_e_closed(const ScaleInvariantMeasure& m) {
    const double mass = m.base.volume_mass();
    if (mass <= 0) return {std::numeric_limits<double>::infinity(), true};
    return {double(m.dim) / mass, false};
}

// ---------------------------------------------------------------------------
// Sandwich sequences a_{1,n} (enlargement) and b_{1,n} (shrinkage)
// ---------------------------------------------------------------------------

struct SequenceReport {
    int n = 0;
    double value = 0;
    double limit = 0;      // mu(A_1)
    double error = 0;      // quadrature/MC error estimate
    std::string method = "quadrature";
};

namespace measure_detail {

/// integral over A_1 of f-functional via the nu_o route:
/// sum_atoms w * integral_{1/2}^{1} vol_fn(H, c / rho) / rho drho.
template <class VolFn>
inline Estimate a1_band_functional(const ScaleInvariantMeasure& m, double c, const VolFn& vol_fn) {
    double total = 0, err = 0, se = 0;
    std::string method = "quadrature";
    for (const auto& a : m.base.atoms) {
        if (!a.shape->samplable()) throw std::invalid_argument("measure functional: reference atoms have no geometry");
        // Probe the estimator type once to pick the integration rule.
        Estimate probe = vol_fn(*a.shape, c / 0.75);
        if (probe.method == "analytic") {
            double e = 0;
            total += a.weight * integrate(
                                    [&](double rho) { return vol_fn(*a.shape, c / rho).value / rho; },
                                    0.5, 1.0, 1e-12, &e);
            err += a.weight * e;
        } else {
            // grid / monte-carlo volumes: fixed Simpson nodes, propagate spread
            method = probe.method;
            const int nodes = 33;
            double acc = 0, acc_lo = 0, acc_hi = 0;
            for (int i = 0; i < nodes; ++i) {
                double t = 0.5 + 0.5 * i / (nodes - 1);
                double wq = (i == 0 || i == nodes - 1) ? 1 : (i % 2 ? 4 : 2);
                Estimate e = vol_fn(*a.shape, c / t);
                acc += wq * e.value / t;
                acc_lo += wq * e.lo / t;
                acc_hi += wq * e.hi / t;
                se += e.se;
            }
            const double h = 0.5 / (nodes - 1) / 3.0;
            total += a.weight * acc * h;
            err += a.weight * (acc_hi - acc_lo) * h * 0.5;
        }
    }
    Estimate out;
    out.value = total;
    out.lo = total - err;
    out.hi = total + err;
    out.se = se;
    out.method = method;
    return out;
}

}  // namespace measure_detail

/// a_{1,n}: enlargement functional with radius c = d 2^-n. Nonincreasing in n,
/// converging down to mu(A_1).
inline SequenceReport a1_sequence(const ScaleInvariantMeasure& m, int n) {
    if (n < 1) throw std::invalid_argument("a1_sequence: n >= 1");
    const double c = m.dim * std::pow(2.0, -n);
    Estimate e = measure_detail::a1_band_functional(
        m, c, [](const ShapeTemplate& h, double s) { return h.enlarged_volume_local(s); });
    return {n, e.value, mu_A1(m), std::max(e.hi - e.value, e.se), e.method};
}

/// b_{1,n}: shrinkage functional with radius 2^-(n+1). Nondecreasing in n,
/// converging up to mu(A_1).
inline SequenceReport b1_sequence(const ScaleInvariantMeasure& m, int n) {
    if (n < 1) throw std::invalid_argument("b1_sequence: n >= 1");
    const double c = std::pow(2.0, -(n + 1));
    Estimate e = measure_detail::a1_band_functional(
        m, c, [](const ShapeTemplate& h, double s) { return h.shrunken_volume_local(s); });
    return {n, e.value, mu_A1(m), std::max(e.hi - e.value, e.se), e.method};
}

/// Closed forms for the ball family (any d), radius parametrization
/// integral_{1/4}^{1/2} v_d (r + c)^d r^-(d+1) dr and the shrinkage analogue.
inline double ball_a1_closed(int d, int n) {
    const double c = d * std::pow(2.0, -n);
    double acc = std::log(2.0);
    for (int j = 1; j <= d; ++j)
        acc += binomial(d, j) * std::pow(c, j) * (std::pow(4.0, j) - std::pow(2.0, j)) / j;
    return unit_ball_volume(d) * acc;
}

inline double ball_b1_closed(int d, int n) {
    const double c = std::pow(2.0, -(n + 1));  // c <= 1/4 for n >= 1
    double acc = std::log(2.0);
    for (int j = 1; j <= d; ++j)
        acc += binomial(d, j) * std::pow(-c, j) * (std::pow(4.0, j) - std::pow(2.0, j)) / j;
    return unit_ball_volume(d) * acc;
}

/// integral over A_1 of L([dG]^c)/L(G) dmu_p = mu(A_1)-side boundary layer
/// functional; equals mu(A_1) - b at the matching radius for exact families.
inline Estimate boundary_layer_functional(const ScaleInvariantMeasure& m, double c) {
    return measure_detail::a1_band_functional(m, c, [](const ShapeTemplate& h, double s) {
        Estimate sh = h.shrunken_volume_local(s);
        double vol = h.geometry_volume();
        Estimate out;
        out.value = vol - sh.value;
        out.lo = vol - sh.hi;
        out.hi = vol - sh.lo;
        out.se = sh.se;
        out.method = sh.method;
        return out;
    });
}

// ---------------------------------------------------------------------------
// Truncated covering-condition integrals with divergence-trend reports
// ---------------------------------------------------------------------------

struct TrendReport {
    std::vector<int> k;              // truncation exponents, r_min = 2^-k
    std::vector<double> value;       // truncated integral at r_min
    std::vector<double> normalized;  // value / nu_o(L(H)) : rescale-invariant
    std::vector<double> step;        // normalized increments per dyadic step
    bool divergent = false;          // last four steps all exceed the threshold
    bool thin_by_dimension = false;  // Proposition-style fast path engaged
    double step_threshold = 0.2;
    std::string method = "quadrature";
};

namespace measure_detail {

template <class InnerFn>
inline TrendReport dyadic_trend(const ScaleInvariantMeasure& m, int k_max, double step_threshold,
                                const InnerFn& inner) {
    TrendReport rep;
    rep.step_threshold = step_threshold;
    const double mass = m.base.volume_mass();
    double acc = 0;
    std::string method = "quadrature";
    for (int k = 1; k <= k_max; ++k) {
        // slice integral over r in [2^-k, 2^-k+1) of (1/r) inner(r) dr
        const double lo = std::pow(2.0, -k), hi = std::pow(2.0, -k + 1);
        // Simpson in log r over the dyadic slice; the 1/r weight is absorbed
        // by the substitution u = log r.
        const int nodes = 17;
        double slice = 0;
        for (int i = 0; i < nodes; ++i) {
            double t = lo * std::pow(hi / lo, double(i) / (nodes - 1));
            double wq = (i == 0 || i == nodes - 1) ? 1 : (i % 2 ? 4 : 2);
            Estimate e = inner(t);
            if (e.method != "analytic" && e.method != "quadrature") method = e.method;
            slice += wq * e.value;
        }
        slice *= std::log(hi / lo) / (nodes - 1) / 3.0;
        acc += slice;
        rep.k.push_back(k);
        rep.value.push_back(acc);
        rep.normalized.push_back(acc / mass);
        if (k > 1) rep.step.push_back(rep.normalized[size_t(k - 1)] - rep.normalized[size_t(k - 2)]);
    }
    // values accumulate from coarse slices down; report truncated integrals
    // value_at(r_min = 2^-k) = sum of slices down to that k (already so).
    int consec = 0;
    for (size_t i = rep.step.size() >= 4 ? rep.step.size() - 4 : 0; i < rep.step.size(); ++i)
        consec += rep.step[i] > step_threshold ? 1 : 0;
    rep.divergent = rep.step.size() >= 4 && consec == 4;
    rep.method = method;
    return rep;
}

}  // namespace measure_detail

/// Truncated condition integral
///   integral_{r_min}^{1} (1/r) integral_{A_1} L([dG]^r)/L(G) dmu_p dr
/// reported at r_min = 2^-k for k = 1..k_max. The normalized column divides
/// by nu_o(L(H)) so the divergence diagnostic does not depend on the
/// diameter-1 rescaling convention of truncated templates.
inline TrendReport extracond_trend(const ScaleInvariantMeasure& m, int k_max = 12,
                                   double step_threshold = 0.2) {
    return measure_detail::dyadic_trend(m, k_max, step_threshold, [&](double r) {
        return boundary_layer_functional(m, r);
    });
}

/// Truncated thinness integral integral (1/r) nu_o(L(E(H,r) \ S(H,r))) dr.
/// Fast path: when every atom has fitted boundary box dimension < d the
/// measure is declared thin without quadrature (analytic and snowflake
/// families); truncated counterexample families always run the quadrature.
inline TrendReport thinness_trend(const ScaleInvariantMeasure& m, int k_max = 12,
                                  double step_threshold = 0.2, bool allow_fast_path = true) {
    bool fast = allow_fast_path;
    for (const auto& a : m.base.atoms) {
        ShapeKind k = a.shape->kind();
        if (k == ShapeKind::RationalBoxUnion || k == ShapeKind::SieveComplement || k == ShapeKind::Reference) {
            fast = false;  // truncation makes the fitted dimension unrepresentative
            break;
        }
    }
    if (fast) {
        for (const auto& a : m.base.atoms)
            if (boundary_dimension_fit(*a.shape, 4, 9, 4000) >= m.dim - 0.05) {
                fast = false;
                break;
            }
    }
    if (fast) {
        TrendReport rep;
        rep.thin_by_dimension = true;
        rep.divergent = false;
        rep.method = "dimension-fit";
        return rep;
    }
    return measure_detail::dyadic_trend(m, k_max, step_threshold, [&](double r) {
        double total = 0, lo = 0, hi = 0, se = 0;
        std::string method = "analytic";
        for (const auto& a : m.base.atoms) {
            Estimate e = a.shape->enlarged_volume_local(r);
            Estimate s = a.shape->shrunken_volume_local(r);
            total += a.weight * (e.value - s.value);
            lo += a.weight * (e.lo - s.hi);
            hi += a.weight * (e.hi - s.lo);
            se += a.weight * (e.se + s.se);
            if (e.method != "analytic") method = e.method;
        }
        Estimate out;
        out.value = total;
        out.lo = lo;
        out.hi = hi;
        out.se = se;
        out.method = method;
        return out;
    });
}

// ---------------------------------------------------------------------------
// Exact exclusion and containment measures for dyadic boxes
// ---------------------------------------------------------------------------

namespace measure_detail {

/// integral over a diameter band [a,b) of rho^j * rho^-(d+1) drho.
inline double band_power_integral(int j, int d, double a, double b) {
    if (j == d) return std::log(b / a);
    return (std::pow(b, j - d) - std::pow(a, j - d)) / (j - d);
}

/// Valid-centre area for a closed ball of radius r to contain a closed box of
/// side s (d=2): the intersection of the four corner discs.
inline double ball_contains_box_area_2d(double r, double s) {
    const double h = s / 2;
    if (r * r < 2 * h * h) return 0.0;
    auto F = [&](double u) { return 0.5 * u * std::sqrt(std::max(r * r - u * u, 0.0)) + 0.5 * r * r * std::asin(std::min(1.0, u / r)); };
    const double t = std::sqrt(r * r - h * h);
    double q = F(t) - F(h) - h * (t - h);
    return 4.0 * std::max(q, 0.0);
}

}  // namespace measure_detail

/// mu({G in diameter bands [l_lo, l_hi) : G meets a closed box of side s}).
/// Exact Steiner forms for balls and cubes; Monte Carlo otherwise.
inline Estimate exclusion_measure(const ScaleInvariantMeasure& m, double s, int l_lo, int l_hi) {
    if (!(s > 0)) throw std::invalid_argument("exclusion_measure: box side must be positive");
    if (l_hi < l_lo) throw std::invalid_argument("exclusion_measure: bad band range");
    const int d = m.dim;
    double total = 0, se = 0;
    std::string method = "analytic";
    for (const auto& a : m.base.atoms) {
        for (int l = l_lo; l < l_hi; ++l) {
            const double blo = std::pow(2.0, -l), bhi = std::pow(2.0, -l + 1);
            switch (a.shape->kind()) {
                case ShapeKind::BallOpen:
                case ShapeKind::BallClosed: {
                    // hit volume of box side s by ball diameter rho:
                    // sum_j C(d,j) s^(d-j) v_j (rho/2)^j
                    double acc = 0;
                    for (int j = 0; j <= d; ++j)
                        acc += binomial(d, j) * std::pow(s, d - j) * unit_ball_volume(j) *
                               std::pow(0.5, j) * measure_detail::band_power_integral(j, d, blo, bhi);
                    total += a.weight * acc;
                    break;
                }
                case ShapeKind::Cube: {
                    const double side = 1.0 / std::sqrt(double(d));
                    double acc = integrate(
                        [&](double rho) { return std::pow(s + side * rho, d) * std::pow(rho, -(d + 1)); },
                        blo, bhi, 1e-13);
                    total += a.weight * acc;
                    method = method == "analytic" ? "quadrature" : method;
                    break;
                }
                default: {
                    // Monte Carlo hit volume per scale node, rotation averaged.
                    method = "monte-carlo";
                    Rng rng(StreamKey{0xE0C1u, uint64_t(l), uint64_t(&a - m.base.atoms.data()),
                                      uint64_t(s * (1ull << 40)), 0});
                    const int rho_nodes = 9, samples = 4000;
                    double acc = 0, var = 0;
                    for (int i = 0; i < rho_nodes; ++i) {
                        double node_lo = blo * std::pow(bhi / blo, double(i) / rho_nodes);
                        double node_hi = blo * std::pow(bhi / blo, double(i + 1) / rho_nodes);
                        double rho = std::sqrt(node_lo * node_hi);
                        AxisBox bb = AxisBox::cube(Vec::zero(d), s + 2.1 * rho);
                        long hit = 0;
                        for (int t = 0; t < samples; ++t) {
                            PlacedSet g;
                            g.tmpl = a.shape;
                            g.rho = rho;
                            g.theta = m.base.rotation == RotationKernel::Uniform2D ? rng.uniform(0, 2 * kPi) : 0.0;
                            g.pos = Vec::zero(d);
                            for (int q = 0; q < d; ++q) g.pos[q] = rng.uniform(bb.lo[q], bb.hi[q]);
                            AxisBox target = AxisBox::cube(Vec::zero(d), s);
                            hit += touches_box(g, target) ? 1 : 0;
                        }
                        double f = double(hit) / samples;
                        double wslice = measure_detail::band_power_integral(0, d, node_lo, node_hi);
                        acc += bb.volume() * f * wslice;
                        var += sqr(bb.volume() * std::sqrt(std::max(f * (1 - f), 1e-12) / samples) * wslice);
                    }
                    total += a.weight * acc;
                    se += a.weight * std::sqrt(var);
                    break;
                }
            }
        }
    }
    Estimate out = Estimate::exact(total, method.c_str());
    out.se = se;
    out.lo = total - 3 * se;
    out.hi = total + 3 * se;
    return out;
}

/// mu({G in bands [l_lo, l_hi) : G contains a closed box of side s}).
inline Estimate containment_measure(const ScaleInvariantMeasure& m, double s, int l_lo, int l_hi) {
    if (!(s > 0)) throw std::invalid_argument("containment_measure: box side must be positive");
    const int d = m.dim;
    double total = 0, se = 0;
    std::string method = "quadrature";
    for (const auto& a : m.base.atoms) {
        for (int l = l_lo; l < l_hi; ++l) {
            const double blo = std::pow(2.0, -l), bhi = std::pow(2.0, -l + 1);
            switch (a.shape->kind()) {
                case ShapeKind::BallOpen:
                case ShapeKind::BallClosed: {
                    if (d != 2) throw std::invalid_argument("containment_measure: ball closed form is d=2 only");
                    const double split = s * std::sqrt(2.0);  // kink: smallest containing diameter
                    auto f = [&](double rho) {
                        return measure_detail::ball_contains_box_area_2d(rho / 2, s) * std::pow(rho, -(d + 1));
                    };
                    double acc = 0;
                    if (bhi > split) acc = integrate(f, std::max(blo, split), bhi, 1e-13);
                    total += a.weight * acc;
                    break;
                }
                case ShapeKind::Cube: {
                    const double side = 1.0 / std::sqrt(double(d));
                    auto f = [&](double rho) {
                        return std::pow(std::max(side * rho - s, 0.0), d) * std::pow(rho, -(d + 1));
                    };
                    const double split = s / side;
                    double acc = 0;
                    if (bhi > split) acc = integrate(f, std::max(blo, split), bhi, 1e-13);
                    total += a.weight * acc;
                    break;
                }
                default: {
                    method = "monte-carlo";
                    Rng rng(StreamKey{0xC0417u, uint64_t(l), uint64_t(&a - m.base.atoms.data()),
                                      uint64_t(s * (1ull << 40)), 1});
                    const int rho_nodes = 9, samples = 4000;
                    double acc = 0, var = 0;
                    for (int i = 0; i < rho_nodes; ++i) {
                        double node_lo = blo * std::pow(bhi / blo, double(i) / rho_nodes);
                        double node_hi = blo * std::pow(bhi / blo, double(i + 1) / rho_nodes);
                        double rho = std::sqrt(node_lo * node_hi);
                        AxisBox bb = AxisBox::cube(Vec::zero(d), s + 2.1 * rho);
                        long hit = 0;
                        for (int t = 0; t < samples; ++t) {
                            PlacedSet g;
                            g.tmpl = a.shape;
                            g.rho = rho;
                            g.theta = m.base.rotation == RotationKernel::Uniform2D ? rng.uniform(0, 2 * kPi) : 0.0;
                            g.pos = Vec::zero(d);
                            for (int q = 0; q < d; ++q) g.pos[q] = rng.uniform(bb.lo[q], bb.hi[q]);
                            AxisBox target = AxisBox::cube(Vec::zero(d), s);
                            hit += contains_box(g, target) ? 1 : 0;
                        }
                        double f = double(hit) / samples;
                        double wslice = measure_detail::band_power_integral(0, d, node_lo, node_hi);
                        acc += bb.volume() * f * wslice;
                        var += sqr(bb.volume() * std::sqrt(std::max(f * (1 - f), 1e-12) / samples) * wslice);
                    }
                    total += a.weight * acc;
                    se += a.weight * std::sqrt(var);
                    break;
                }
            }
        }
    }
    Estimate out = Estimate::exact(total, method.c_str());
    out.se = se;
    out.lo = total - 3 * se;
    out.hi = total + 3 * se;
    return out;
}

/// Closed-form E|m_n| = 2^{dn} exp(-lambda mu(hit events for a level-n box)).
inline double expected_untouched_boxes(const ScaleInvariantMeasure& m, double lambda, int n) {
    Estimate mu = exclusion_measure(m, std::pow(2.0, -n), 1, n + 1);
    return std::pow(2.0, m.dim * n) * std::exp(-lambda * mu.value);
}

/// Closed-form E|M_n| = 2^{dn} exp(-lambda mu(containment events)).
inline double expected_noncovered_boxes(const ScaleInvariantMeasure& m, double lambda, int n) {
    Estimate mu = containment_measure(m, std::pow(2.0, -n), 1, n + 1);
    return std::pow(2.0, m.dim * n) * std::exp(-lambda * mu.value);
}

}  // namespace sicover
