#pragma once

#include <cmath>
#include <cstdlib>
#include <functional>

namespace sicover {

namespace detail {

// Gauss 7 / Kronrod 15 nodes and weights on [-1,1].
// Column 0: abscissa, column 1: Gauss weight, column 2: Kronrod weight.
inline constexpr double kGK15[8][3] = {
    {0.000000000000000, 0.417959183673469, 0.209482141084728},
    {0.405845151377397, 0.381830050505119, 0.190350578064785},
    {0.741531185599394, 0.279705391489277, 0.140653259715525},
    {0.949107912342759, 0.129484966168870, 0.063092092629979},
    {0.207784955007898, 0.0, 0.204432940075298},
    {0.586087235467691, 0.0, 0.169004726639267},
    {0.864864423359769, 0.0, 0.104790010322250},
    {0.991455371120813, 0.0, 0.022935322010529},
};

template <class F>
double gk15(const F& f, double a, double b, double& err) {
    const double x0 = 0.5 * (a + b);
    const double m = b - x0;
    double y0 = f(x0);
    double g7 = kGK15[0][1] * y0;
    double k15 = kGK15[0][2] * y0;
    for (int i = 1; i < 8; ++i) {
        double mx = m * kGK15[i][0];
        double yi = f(x0 + mx) + f(x0 - mx);
        g7 += kGK15[i][1] * yi;
        k15 += kGK15[i][2] * yi;
    }
    g7 *= m;
    k15 *= m;
    err = std::abs(k15 - g7);
    return k15;
}

template <class F>
double adapt(const F& f, double a, double b, double tol, int depth, double& err_out) {
    double err;
    double v = gk15(f, a, b, err);
    if (err <= tol || depth >= 48) {
        err_out += err;
        return v;
    }
    double mid = 0.5 * (a + b);
    return adapt(f, a, mid, tol / 2, depth + 1, err_out) +
           adapt(f, mid, b, tol / 2, depth + 1, err_out);
}

}  // namespace detail

/// Adaptive Gauss-Kronrod integration of f over [a,b] to absolute tolerance.
/// Reports the accumulated error estimate through err if non-null.
template <class F>
double integrate(const F& f, double a, double b, double abs_tol = 1e-10, double* err = nullptr) {
    if (!(a < b)) return 0.0;
    double acc_err = 0.0;
    double v = detail::adapt(f, a, b, abs_tol, 0, acc_err);
    if (err) *err = acc_err;
    return v;
}

/// Integration on a log-spaced split of [a,b]; integrands here are smooth in
/// log scale, so split the interval at dyadic points first.
template <class F>
double integrate_log(const F& f, double a, double b, double abs_tol = 1e-10, double* err = nullptr) {
    if (!(a < b) || a <= 0) return 0.0;
    double total = 0, total_err = 0;
    double hi = b;
    while (hi > 2 * a) {
        double lo = std::max(a, hi / 2);
        double e = 0;
        total += integrate(f, lo, hi, abs_tol / 4, &e);
        total_err += e;
        hi = lo;
    }
    if (hi > a) {
        double e = 0;
        total += integrate(f, a, hi, abs_tol / 4, &e);
        total_err += e;
    }
    if (err) *err = total_err;
    return total;
}

}  // namespace sicover
