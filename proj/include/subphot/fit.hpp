#ifndef SUBPHOT_FIT_HPP
#define SUBPHOT_FIT_HPP

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace subphot {

// Small dense matrix helpers sized for handfuls of parameters.
namespace linalg {

using Matrix = std::vector<std::vector<double>>;

inline Matrix zeros(std::size_t r, std::size_t c) {
    return Matrix(r, std::vector<double>(c, 0.0));
}

// Solve A x = b by Gaussian elimination with partial pivoting.
inline std::vector<double> solve(Matrix a, std::vector<double> b) {
    const std::size_t n = a.size();
    if (n == 0 || a[0].size() != n || b.size() != n)
        throw std::invalid_argument("linalg::solve: shape mismatch");
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        if (std::abs(a[piv][col]) < 1e-300)
            throw std::runtime_error("linalg::solve: singular matrix");
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            double f = a[r][col] / a[col][col];
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t c = i + 1; c < n; ++c) s -= a[i][c] * x[c];
        x[i] = s / a[i][i];
    }
    return x;
}

inline Matrix inverse(const Matrix& a) {
    const std::size_t n = a.size();
    Matrix inv = zeros(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<double> e(n, 0.0);
        e[j] = 1.0;
        auto col = solve(a, e);
        for (std::size_t i = 0; i < n; ++i) inv[i][j] = col[i];
    }
    return inv;
}

} // namespace linalg

// Least-squares slope of log(y) vs log(x); exact for pure power laws.
inline double power_law_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("power_law_slope: need >= 2 matched points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) continue;
        double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    if (n < 2) throw std::invalid_argument("power_law_slope: need >= 2 positive points");
    double denom = double(n) * sxx - sx * sx;
    if (std::abs(denom) < 1e-300)
        throw std::invalid_argument("power_law_slope: degenerate abscissa");
    return (double(n) * sxy - sx * sy) / denom;
}

struct LmOptions {
    std::size_t max_iterations = 200;
    double initial_lambda = 1e-3;
    double tol_step = 1e-12;
    double tol_grad = 1e-14;
    double fd_step = 1e-6;   // relative finite-difference step
};

struct LmResult {
    std::vector<double> params;
    linalg::Matrix covariance;   // (J^T W J)^-1 at the solution
    double chi2 = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

// Damped Gauss-Newton (Levenberg) on weighted residuals r_i(theta); the
// caller supplies residuals already scaled by 1/sigma_i. Jacobian by
// forward differences.
inline LmResult lm_fit(const std::function<std::vector<double>(const std::vector<double>&)>& residuals,
                       std::vector<double> theta, const LmOptions& opt = {}) {
    const std::size_t p = theta.size();
    auto r = residuals(theta);
    const std::size_t n = r.size();
    if (n < p) throw std::invalid_argument("lm_fit: fewer residuals than parameters");
    auto chi2_of = [](const std::vector<double>& rr) {
        double s = 0;
        for (double v : rr) s += v * v;
        return s;
    };
    double chi2 = chi2_of(r);
    double lambda = opt.initial_lambda;
    LmResult out;
    linalg::Matrix jt_j;
    for (out.iterations = 0; out.iterations < opt.max_iterations; ++out.iterations) {
        // Jacobian
        linalg::Matrix J(n, std::vector<double>(p, 0.0));
        for (std::size_t j = 0; j < p; ++j) {
            double h = opt.fd_step * std::max(std::abs(theta[j]), 1e-8);
            auto th = theta;
            th[j] += h;
            auto rh = residuals(th);
            for (std::size_t i = 0; i < n; ++i) J[i][j] = (rh[i] - r[i]) / h;
        }
        jt_j = linalg::zeros(p, p);
        std::vector<double> g(p, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t a = 0; a < p; ++a) {
                g[a] += J[i][a] * r[i];
                for (std::size_t b = 0; b < p; ++b) jt_j[a][b] += J[i][a] * J[i][b];
            }
        double gmax = 0;
        for (double v : g) gmax = std::max(gmax, std::abs(v));
        if (gmax < opt.tol_grad) {
            out.converged = true;
            break;
        }
        bool stepped = false;
        for (int tries = 0; tries < 30; ++tries) {
            auto a = jt_j;
            for (std::size_t d = 0; d < p; ++d) a[d][d] *= (1.0 + lambda);
            std::vector<double> rhs(p);
            for (std::size_t d = 0; d < p; ++d) rhs[d] = -g[d];
            std::vector<double> step;
            try {
                step = linalg::solve(a, rhs);
            } catch (const std::runtime_error&) {
                lambda *= 10.0;
                continue;
            }
            auto th = theta;
            double snorm = 0;
            for (std::size_t d = 0; d < p; ++d) {
                th[d] += step[d];
                snorm = std::max(snorm, std::abs(step[d]) / std::max(std::abs(theta[d]), 1e-30));
            }
            auto rt = residuals(th);
            double c2 = chi2_of(rt);
            if (c2 <= chi2) {
                theta = th;
                r = rt;
                bool small = snorm < opt.tol_step;
                chi2 = c2;
                lambda = std::max(lambda * 0.3, 1e-12);
                stepped = true;
                if (small) out.converged = true;
                break;
            }
            lambda *= 10.0;
        }
        if (!stepped || out.converged) break;
    }
    out.params = theta;
    out.chi2 = chi2;
    try {
        out.covariance = linalg::inverse(jt_j);
    } catch (const std::runtime_error&) {
        out.covariance = linalg::zeros(p, p);
    }
    return out;
}

} // namespace subphot

#endif
