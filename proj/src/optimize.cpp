#include "riskgen/optimize.hpp"

#include <algorithm>
#include <vector>

namespace riskgen {

Extremum golden_maximize(const ScalarFn& f, double lo, double hi, double tol) {
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = f(c), fd = f(d);
    Extremum best{a, f(a)};
    const double fb = f(b);
    if (fb > best.value) best = {b, fb};
    while (b - a > tol) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if (fc > best.value || (fc == best.value && c < best.arg)) best = {c, fc};
    if (fd > best.value) best = {d, fd};
    return best;
}

Extremum scan_golden_maximize(const ScalarFn& f, double lo, double hi, int points, double tol) {
    if (hi <= lo || points < 2) return {lo, f(lo)};
    const double step = (hi - lo) / (points - 1);
    int ibest = 0;
    double vbest = f(lo);
    for (int i = 1; i < points; ++i) {
        const double v = f(lo + i * step);
        if (v > vbest) {
            vbest = v;
            ibest = i;
        }
    }
    Extremum grid{lo + ibest * step, vbest};
    const double a = lo + std::max(0, ibest - 1) * step;
    const double b = lo + std::min(points - 1, ibest + 1) * step;
    Extremum refined = golden_maximize(f, a, b, tol);
    return refined.value > grid.value ? refined : grid;
}

Extremum scan_golden_minimize(const ScalarFn& f, double lo, double hi, int points, double tol) {
    Extremum e = scan_golden_maximize([&](double x) { return -f(x); }, lo, hi, points, tol);
    e.value = -e.value;
    return e;
}

}  // namespace riskgen
