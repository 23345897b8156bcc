#pragma once

// Radial kernels of the rearrangement step.
//
//   I_{p; m_0..m_n}(S_1, .., S_n) = int_0^inf r^p (r^2+1)^{-m_0} prod_i (e^{S_i} r^2 + 1)^{-m_i} dr
//
// evaluated by adaptive Gauss-Kronrod quadrature, and Chebyshev interpolants of such integrals on a
// box of spectral variables.

#include <algorithm>
#include <atomic>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <numbers>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "scalar_functions.hpp"

namespace ncricci {

// Worker count: explicit setting, else NCG_RICCI_THREADS, else hardware concurrency.
inline int& thread_setting() {
    static int n = 0;
    return n;
}
inline int thread_count() {
    if (thread_setting() > 0) return thread_setting();
    if (const char* env = std::getenv("NCG_RICCI_THREADS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

// Runs fn(i) for i in [0, n). Each index is written by exactly one worker, so results are deterministic.
inline void parallel_for(int n, const std::function<void(int)>& fn) {
    int workers = std::min(thread_count(), n);
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr err;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (int i = next++; i < n && !failed; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    if (!failed.exchange(true)) err = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

struct QuadratureOptions {
    double tol = 1e-12;
    double max_error = 1e-10;
    unsigned max_depth = 20;
};

inline double radial_integral(int p, const std::vector<int>& m, const std::vector<double>& shifts,
                              const QuadratureOptions& opt = {}) {
    if (m.size() != shifts.size() + 1) throw InputError("integrator", "radial integral shape mismatch");
    int total = 0;
    for (int mi : m) total += mi;
    if (p + 1 >= 2 * total) throw Error("integrator", "non-integrable radial kernel");
    std::vector<double> w(shifts.size());
    for (std::size_t i = 0; i < shifts.size(); ++i) w[i] = std::exp(shifts[i]);
    auto f = [&](double r) {
        double r2 = r * r;
        double v = std::pow(r, p) / std::pow(r2 + 1.0, m[0]);
        for (std::size_t i = 0; i < w.size(); ++i) v /= std::pow(w[i] * r2 + 1.0, m[i + 1]);
        return v;
    };
    double err = 0.0;
    double val = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        f, 0.0, std::numeric_limits<double>::infinity(), opt.max_depth, opt.tol, &err);
    if (!(err <= opt.max_error * std::max(1.0, std::abs(val))))
        throw Error("integrator", "radial quadrature did not converge (error estimate " + std::to_string(err) + ")");
    return val;
}

// F_{1,1,1}(u1, u2) = 2 int r^3 / ((r^2+1)(u1 r^2+1)(u1 u2 r^2+1)) dr and
// F_{1,2,1}(u1, u2) = 2 int r^5 / ((r^2+1)(u1 r^2+1)^2(u1 u2 r^2+1)) dr, in log variables s, t.
inline double F111(double s, double t) { return 2.0 * radial_integral(3, {1, 1, 1}, {s, s + t}); }
inline double F121(double s, double t) { return 2.0 * radial_integral(5, {1, 2, 1}, {s, s + t}); }

// F_111 g_1 g - F_121 g_2 g at (e^s, e^t).
inline double s_identity_lhs(double s, double t, const CurvatureFunctions& cf = {}) {
    return F111(s, t) * cf.g_j(1, s) * cf.g(t) - F121(s, t) * cf.g_j(2, s) * cf.g(t);
}

// Chebyshev interpolation on [-L, L]^d, d = 1 or 2.
class Chebyshev {
public:
    Chebyshev() = default;

    static Chebyshev fit1(const std::function<double(double)>& f, double L, int degree) {
        Chebyshev c;
        c.L_ = L;
        c.deg_ = degree;
        c.dim_ = 1;
        std::vector<double> vals(degree + 1);
        parallel_for(degree + 1, [&](int i) { vals[i] = f(L * node(i, degree)); });
        c.coef_ = Eigen::MatrixXd(degree + 1, 1);
        for (int k = 0; k <= degree; ++k) {
            double s = 0.0;
            for (int i = 0; i <= degree; ++i) s += vals[i] * std::cos(k * theta(i, degree));
            c.coef_(k, 0) = s * (k == 0 ? 1.0 : 2.0) / (degree + 1);
        }
        return c;
    }

    static Chebyshev fit2(const std::function<double(double, double)>& f, double L, int degree) {
        Chebyshev c;
        c.L_ = L;
        c.deg_ = degree;
        c.dim_ = 2;
        const int n = degree + 1;
        Eigen::MatrixXd vals(n, n);
        parallel_for(n * n, [&](int idx) {
            int i = idx / n, j = idx % n;
            vals(i, j) = f(L * node(i, degree), L * node(j, degree));
        });
        Eigen::MatrixXd T(n, n);
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i) T(k, i) = std::cos(k * theta(i, degree)) * (k == 0 ? 1.0 : 2.0) / n;
        c.coef_ = T * vals * T.transpose();
        return c;
    }

    double half_width() const { return L_; }

    // Rows: Chebyshev polynomials T_0..T_deg at x / L.
    Eigen::MatrixXd basis(const std::vector<double>& xs) const {
        Eigen::MatrixXd B(static_cast<int>(xs.size()), deg_ + 1);
        for (int r = 0; r < B.rows(); ++r) {
            double y = std::clamp(xs[r] / L_, -1.0, 1.0);
            double t0 = 1.0, t1 = y;
            B(r, 0) = 1.0;
            if (deg_ >= 1) B(r, 1) = y;
            for (int k = 2; k <= deg_; ++k) {
                double t2 = 2.0 * y * t1 - t0;
                B(r, k) = t2;
                t0 = t1;
                t1 = t2;
            }
        }
        return B;
    }

    double operator()(double x) const { return (basis({x}) * coef_)(0, 0); }
    double operator()(double x, double y) const { return (basis({x}) * coef_ * basis({y}).transpose())(0, 0); }

    // Values on the tensor grid xs x ys (2D) or on xs (1D, as a column).
    Eigen::MatrixXd grid(const std::vector<double>& xs, const std::vector<double>& ys) const {
        return basis(xs) * coef_ * basis(ys).transpose();
    }
    Eigen::VectorXd values(const std::vector<double>& xs) const { return basis(xs) * coef_.col(0); }

    // Largest coefficient magnitude in the last two degrees, a truncation-error proxy.
    double tail() const {
        double t = 0.0;
        for (int k = std::max(0, deg_ - 1); k <= deg_; ++k)
            for (int j = 0; j < coef_.cols(); ++j) t = std::max(t, std::abs(coef_(k, j)));
        if (dim_ == 2)
            for (int k = std::max(0, deg_ - 1); k <= deg_; ++k)
                for (int j = 0; j < coef_.rows(); ++j) t = std::max(t, std::abs(coef_(j, k)));
        return t;
    }

private:
    static double theta(int i, int degree) { return std::numbers::pi * (i + 0.5) / (degree + 1); }
    static double node(int i, int degree) { return std::cos(theta(i, degree)); }

    double L_ = 1.0;
    int deg_ = 0;
    int dim_ = 1;
    Eigen::MatrixXd coef_;
};

}  // namespace ncricci
