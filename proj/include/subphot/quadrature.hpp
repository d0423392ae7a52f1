#ifndef SUBPHOT_QUADRATURE_HPP
#define SUBPHOT_QUADRATURE_HPP

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace subphot {

// Adaptive Gauss-Kronrod (7-15) quadrature. The integrand may be real or
// complex; the error estimate is taken on the magnitude of the K15-G7
// difference. Interval bisection proceeds worst-first up to a bounded
// number of subdivisions.

namespace gk {

// 15-point Kronrod nodes on [-1,1] (positive half) and weights; the
// embedded 7-point Gauss rule uses every second node.
inline constexpr double xgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.000000000000000};
inline constexpr double wgk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
inline constexpr double wg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469};

} // namespace gk

struct QuadratureResult {
    std::complex<double> value{0.0, 0.0};
    double error = 0.0;
    std::size_t intervals = 0;
};

namespace detail_quad {

struct Segment {
    double a, b, err;
    std::complex<double> val;
};

template <typename F>
inline void eval_segment(F&& f, double a, double b, Segment& s) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    std::complex<double> resk{0.0, 0.0}, resg{0.0, 0.0};
    for (int j = 0; j < 7; ++j) {
        std::complex<double> fsum = f(c - h * gk::xgk[j]) + f(c + h * gk::xgk[j]);
        resk += gk::wgk[j] * fsum;
        if (j % 2 == 1) resg += gk::wg[j / 2] * fsum;
    }
    std::complex<double> fc = f(c);
    resk += gk::wgk[7] * fc;
    resg += gk::wg[3] * fc;
    s.a = a;
    s.b = b;
    s.val = h * resk;
    s.err = std::abs(h * (resk - resg));
}

} // namespace detail_quad

// Integrate complex f over [a,b] to the requested relative tolerance.
template <typename F>
inline QuadratureResult integrate_complex(F&& f, double a, double b,
                                          double rel_tol = 1e-6,
                                          std::size_t max_intervals = 2000) {
    if (!(b > a)) throw std::invalid_argument("integrate_complex: need b > a");
    if (!(rel_tol > 0.0)) throw std::invalid_argument("integrate_complex: tolerance must be > 0");
    std::vector<detail_quad::Segment> segs;
    segs.reserve(64);
    detail_quad::Segment s0;
    detail_quad::eval_segment(f, a, b, s0);
    segs.push_back(s0);
    while (segs.size() < max_intervals) {
        std::complex<double> total{0.0, 0.0};
        double toterr = 0.0;
        std::size_t worst = 0;
        for (std::size_t i = 0; i < segs.size(); ++i) {
            total += segs[i].val;
            toterr += segs[i].err;
            if (segs[i].err > segs[worst].err) worst = i;
        }
        if (toterr <= rel_tol * std::max(std::abs(total), 1e-300)) {
            return {total, toterr, segs.size()};
        }
        detail_quad::Segment left, right;
        double mid = 0.5 * (segs[worst].a + segs[worst].b);
        detail_quad::eval_segment(f, segs[worst].a, mid, left);
        detail_quad::eval_segment(f, mid, segs[worst].b, right);
        segs[worst] = left;
        segs.push_back(right);
    }
    std::complex<double> total{0.0, 0.0};
    double toterr = 0.0;
    for (const auto& s : segs) {
        total += s.val;
        toterr += s.err;
    }
    return {total, toterr, segs.size()};
}

template <typename F>
inline double integrate(F&& f, double a, double b, double rel_tol = 1e-6,
                        std::size_t max_intervals = 2000) {
    auto wrap = [&f](double x) { return std::complex<double>(f(x), 0.0); };
    return integrate_complex(wrap, a, b, rel_tol, max_intervals).value.real();
}

// Composite trapezoid on a fixed grid; used where a deterministic,
// schedule-independent reduction is required.
template <typename F>
inline double trapezoid(F&& f, double a, double b, std::size_t n) {
    if (n < 2) throw std::invalid_argument("trapezoid: need at least 2 nodes");
    const double h = (b - a) / double(n - 1);
    double sum = 0.5 * (f(a) + f(b));
    for (std::size_t i = 1; i + 1 < n; ++i) sum += f(a + h * double(i));
    return sum * h;
}

} // namespace subphot

#endif
