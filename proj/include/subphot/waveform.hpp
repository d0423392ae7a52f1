#ifndef SUBPHOT_WAVEFORM_HPP
#define SUBPHOT_WAVEFORM_HPP

#include <cmath>
#include <stdexcept>
#include <vector>

namespace subphot {

enum class WaveformShape { cw, rectangular, semicircular, sampled };

// Periodic optical power waveform. Exactly one of peak_power/mean_power
// is supplied; the other is derived from the shape.
struct Waveform {
    WaveformShape shape = WaveformShape::cw;
    double tau0 = 0.0;    // pulse full width (s)
    double tau1 = 0.0;    // pulse-train period (s)
    double peak_power = 0.0;   // W (0 = not given)
    double mean_power = 0.0;   // W (0 = not given)
    double sample_period = 0.0;            // s, sampled shape
    std::vector<double> samples;           // W, one period, sampled shape

    static Waveform cw_mean(double mean_w) {
        Waveform w;
        w.shape = WaveformShape::cw;
        w.mean_power = mean_w;
        w.peak_power = mean_w;
        return w;
    }
    static Waveform rectangular_peak(double tau0, double tau1, double peak_w) {
        Waveform w;
        w.shape = WaveformShape::rectangular;
        w.tau0 = tau0;
        w.tau1 = tau1;
        w.peak_power = peak_w;
        return w;
    }
    static Waveform semicircular_peak(double tau0, double tau1, double peak_w) {
        Waveform w;
        w.shape = WaveformShape::semicircular;
        w.tau0 = tau0;
        w.tau1 = tau1;
        w.peak_power = peak_w;
        return w;
    }
    static Waveform sampled_period(double period, std::vector<double> s) {
        Waveform w;
        w.shape = WaveformShape::sampled;
        w.sample_period = period;
        w.samples = std::move(s);
        return w;
    }
};

struct WaveformStats {
    double duty = 1.0;          // Delta = tau0/tau1
    double mean_power = 0.0;    // W
    double mean_square = 0.0;   // W^2
    double gamma = 1.0;         // mean-square / square-mean
    double f1 = 1.0;            // first-harmonic fraction of the ac power of P^2(t)
};

namespace detail {

// integral of (1 - t^2/a^2) cos(w t) over [-a, a]; equals 4a/3 as w -> 0
inline double parabolic_cap_cosine_integral(double a, double w) {
    double x = a * w;
    if (std::abs(x) < 1e-4) {
        return 4.0 * a / 3.0 * (1.0 - x * x / 10.0);
    }
    return 4.0 * (std::sin(x) - x * std::cos(x)) / (a * a * w * w * w);
}

} // namespace detail

inline WaveformStats waveform_stats(const Waveform& w) {
    WaveformStats st;
    switch (w.shape) {
    case WaveformShape::cw: {
        double p = w.mean_power > 0.0 ? w.mean_power : w.peak_power;
        if (!(p > 0.0)) throw std::invalid_argument("waveform_stats: zero-power waveform");
        st.duty = 1.0;
        st.mean_power = p;
        st.mean_square = p * p;
        st.gamma = 1.0;
        st.f1 = 1.0;  // unmodulated direct detection
        return st;
    }
    case WaveformShape::rectangular: {
        if (!(w.tau0 > 0.0 && w.tau0 <= w.tau1))
            throw std::invalid_argument("waveform_stats: need 0 < tau0 <= tau1");
        double delta = w.tau0 / w.tau1;
        double peak = w.peak_power > 0.0 ? w.peak_power : w.mean_power / delta;
        if (!(peak > 0.0)) throw std::invalid_argument("waveform_stats: zero-power waveform");
        st.duty = delta;
        st.mean_power = peak * delta;
        st.mean_square = peak * peak * delta;
        st.gamma = 1.0 / delta;
        // P^2(t) is a pulse train of height peak^2 and duty delta
        double h = peak * peak;
        double a1 = 2.0 * h / M_PI * std::sin(M_PI * delta);
        double var = h * h * delta * (1.0 - delta);
        st.f1 = var > 0.0 ? a1 * a1 / (2.0 * var) : 1.0;
        return st;
    }
    case WaveformShape::semicircular: {
        if (!(w.tau0 > 0.0 && w.tau0 <= w.tau1))
            throw std::invalid_argument("waveform_stats: need 0 < tau0 <= tau1");
        double delta = w.tau0 / w.tau1;
        double peak = w.peak_power > 0.0 ? w.peak_power
                                         : w.mean_power / (M_PI / 4.0 * delta);
        if (!(peak > 0.0)) throw std::invalid_argument("waveform_stats: zero-power waveform");
        st.duty = delta;
        st.mean_power = M_PI / 4.0 * peak * delta;
        st.mean_square = 2.0 / 3.0 * peak * peak * delta;
        st.gamma = st.mean_square / (st.mean_power * st.mean_power);  // = (32/3pi^2)/delta
        // P^2(t): parabolic caps of height peak^2, base width tau0
        double h = peak * peak;
        double a = w.tau0 / 2.0;
        double om = 2.0 * M_PI / w.tau1;
        double a1 = 2.0 * h / w.tau1 * detail::parabolic_cap_cosine_integral(a, om);
        double mean_p4 = 8.0 / 15.0 * h * h * delta;
        double var = mean_p4 - st.mean_square * st.mean_square;
        st.f1 = var > 0.0 ? a1 * a1 / (2.0 * var) : 1.0;
        return st;
    }
    case WaveformShape::sampled: {
        const auto& s = w.samples;
        if (s.size() < 4 || !(w.sample_period > 0.0))
            throw std::invalid_argument("waveform_stats: sampled waveform needs >= 4 samples and a period");
        double p1 = 0.0, p2 = 0.0, p4 = 0.0, ac = 0.0, as = 0.0;
        const size_t n = s.size();
        double pmax = 0.0;
        for (size_t i = 0; i < n; ++i) {
            double p = s[i];
            if (p < 0.0) throw std::invalid_argument("waveform_stats: sampled waveform must be nonnegative");
            pmax = std::max(pmax, p);
            double ph = 2.0 * M_PI * double(i) / double(n);
            p1 += p;
            p2 += p * p;
            p4 += p * p * p * p;
            ac += p * p * std::cos(ph);
            as += p * p * std::sin(ph);
        }
        p1 /= double(n);
        p2 /= double(n);
        p4 /= double(n);
        if (!(p1 > 0.0)) throw std::invalid_argument("waveform_stats: zero-power waveform");
        double a1 = 2.0 * ac / double(n);
        double b1 = 2.0 * as / double(n);
        st.duty = pmax > 0.0 ? p1 / pmax : 1.0;  // effective duty for reporting
        st.mean_power = p1;
        st.mean_square = p2;
        st.gamma = p2 / (p1 * p1);
        double var = p4 - p2 * p2;
        st.f1 = var > 0.0 ? (a1 * a1 + b1 * b1) / (2.0 * var) : 1.0;
        return st;
    }
    }
    throw std::logic_error("waveform_stats: unknown shape");
}

} // namespace subphot

#endif
