#pragma once

// The scalar spectral functions K, H, S and the auxiliary f, g, g_j.
//
// S and H are rewritten around the smooth building blocks
//   a(x) = 2 sinh(x/2)/x,   b(x) = (sinh x - x)/(x sinh(x/2)),
// which leaves s + t = 0 as the only line where a 0/0 has to be resolved:
//   S = (a(s) b(t) + b(s) a(t)) / sinh((s+t)/2)
//   H = -Psi(s,t) / (2 (s+t) cosh^2((s+t)/4))
//   Psi = -s a(s) b(t) + t a(t) b(s) + 2 a(s)/a(t) - 2 a(t)/a(s) + 2 a(s) cosh(t/2) - 2 a(t) cosh(s/2).
// Inside taylor_radius of that line both are expanded in e = s + t with truncated power-series
// arithmetic; a and b use their own power series near 0, which covers s = 0 and t = 0.

#include <array>
#include <cmath>
#include <algorithm>

namespace ncricci {

// Truncated power series c_0 + c_1 e + ... + c_N e^N.
template <int N>
struct Jet {
    std::array<double, N + 1> c{};

    Jet() = default;
    Jet(double v) { c[0] = v; }  // NOLINT(google-explicit-constructor)
    static Jet variable(double v) {
        Jet j(v);
        if constexpr (N >= 1) j.c[1] = 1.0;
        return j;
    }
    double value() const { return c[0]; }

    double eval(double e, int order = N) const {
        double r = 0.0;
        for (int k = order; k >= 0; --k) r = r * e + c[k];
        return r;
    }

    friend Jet operator+(Jet a, const Jet& b) {
        for (int i = 0; i <= N; ++i) a.c[i] += b.c[i];
        return a;
    }
    friend Jet operator-(Jet a, const Jet& b) {
        for (int i = 0; i <= N; ++i) a.c[i] -= b.c[i];
        return a;
    }
    friend Jet operator-(Jet a) {
        for (auto& x : a.c) x = -x;
        return a;
    }
    friend Jet operator*(const Jet& a, const Jet& b) {
        Jet r(0.0);
        for (int i = 0; i <= N; ++i)
            for (int j = 0; i + j <= N; ++j) r.c[i + j] += a.c[i] * b.c[j];
        return r;
    }
    friend Jet operator/(const Jet& a, const Jet& b) {
        Jet r(0.0);
        for (int k = 0; k <= N; ++k) {
            double s = a.c[k];
            for (int j = 1; j <= k; ++j) s -= b.c[j] * r.c[k - j];
            r.c[k] = s / b.c[0];
        }
        return r;
    }
};

// Divide a removable 0/0: the denominator's exactly-zero leading coefficients fix the valuation v,
// and the first v numerator coefficients (zero up to rounding) are discarded.
template <int N>
Jet<N> divide_removable(const Jet<N>& num, const Jet<N>& den) {
    int v = 0;
    while (v <= N && den.c[v] == 0.0) ++v;
    Jet<N> a(0.0), b(0.0);
    for (int i = 0; i + v <= N; ++i) {
        a.c[i] = num.c[i + v];
        b.c[i] = den.c[i + v];
    }
    Jet<N> r = a / b;
    for (int i = N - v + 1; i <= N; ++i) r.c[i] = 0.0;  // not determined by the truncated input
    return r;
}

template <int N>
Jet<N> exp(const Jet<N>& f) {
    Jet<N> e(0.0);
    e.c[0] = std::exp(f.c[0]);
    for (int k = 1; k <= N; ++k) {
        double s = 0.0;
        for (int j = 1; j <= k; ++j) s += j * f.c[j] * e.c[k - j];
        e.c[k] = s / k;
    }
    return e;
}
template <int N>
Jet<N> sinh(const Jet<N>& f) {
    Jet<N> p = exp(f), m = exp(-f), r;
    for (int i = 0; i <= N; ++i) r.c[i] = 0.5 * (p.c[i] - m.c[i]);
    r.c[0] = std::sinh(f.c[0]);
    return r;
}
template <int N>
Jet<N> cosh(const Jet<N>& f) {
    Jet<N> p = exp(f), m = exp(-f), r;
    for (int i = 0; i <= N; ++i) r.c[i] = 0.5 * (p.c[i] + m.c[i]);
    r.c[0] = std::cosh(f.c[0]);
    return r;
}

namespace detail {

inline double value_of(double x) { return x; }
template <int N>
double value_of(const Jet<N>& x) {
    return x.value();
}
using std::cosh;
using std::sinh;

// a(x) = 2 sinh(x/2)/x = sum x^{2k} / (4^k (2k+1)!)
template <class T>
T block_a(const T& x) {
    if (std::abs(value_of(x)) <= 2.0) {
        T y = x * x;
        T r(0.0);
        for (int k = 24; k >= 0; --k) {
            double ck = 1.0;
            for (int i = 1; i <= 2 * k + 1; ++i) ck /= i;
            ck = std::ldexp(ck, -2 * k);
            r = r * y + T(ck);
        }
        return r;
    }
    return T(2.0) * sinh(x * T(0.5)) / x;
}

// (sinh x - x)/x^3 = sum x^{2k} / (2k+3)!
template <class T>
T block_n(const T& x) {
    if (std::abs(value_of(x)) <= 2.0) {
        T y = x * x;
        T r(0.0);
        for (int k = 24; k >= 0; --k) {
            double ck = 1.0;
            for (int i = 1; i <= 2 * k + 3; ++i) ck /= i;
            r = r * y + T(ck);
        }
        return r;
    }
    return (sinh(x) - x) / (x * x * x);
}

// b(x) = (sinh x - x)/(x sinh(x/2)) = 2 x n(x) / a(x)
template <class T>
T block_b(const T& x) {
    return T(2.0) * x * block_n(x) / block_a(x);
}

template <class T>
T s_numerator(const T& s, const T& t) {
    return block_a(s) * block_b(t) + block_b(s) * block_a(t);
}

template <class T>
T h_numerator(const T& s, const T& t) {
    T as = block_a(s), at = block_a(t), bs = block_b(s), bt = block_b(t);
    return -(s * as * bt) + t * at * bs + T(2.0) * as / at - T(2.0) * at / as + T(2.0) * as * cosh(t * T(0.5)) -
           T(2.0) * at * cosh(s * T(0.5));
}

}  // namespace detail

struct CurvatureFunctions {
    double taylor_radius = 1e-2;
    static constexpr int series_order = 6;

    // K(u) = (1/2 + sinh(u/2)/u) / cosh^2(u/4) = (1 + a(u)) / (2 cosh^2(u/4))
    double K(double u) const {
        if (std::abs(u) < taylor_radius) {
            auto x = Jet<series_order>::variable(0.0);
            auto c = cosh(x * Jet<series_order>(0.25));
            auto k = (Jet<series_order>(1.0) + detail::block_a(x)) / (Jet<series_order>(2.0) * c * c);
            return k.eval(u);
        }
        return K_closed(u);
    }

    double S(double s, double t) const {
        double u = s + t;
        if (std::abs(u) < taylor_radius) {
            using J = Jet<series_order + 1>;
            J e = J::variable(0.0);
            J num = detail::s_numerator(J(s), e - J(s));
            J r = divide_removable(num, sinh(e * J(0.5)));
            return r.eval(u, series_order);
        }
        return detail::s_numerator(s, t) / std::sinh(0.5 * u);
    }

    double H(double s, double t) const {
        double u = s + t;
        if (std::abs(u) < taylor_radius) {
            using J = Jet<series_order + 1>;
            J e = J::variable(0.0);
            J num = detail::h_numerator(J(s), e - J(s));
            J c = cosh(e * J(0.25));
            J r = divide_removable(-num, J(2.0) * e * c * c);
            return r.eval(u, series_order);
        }
        double c = std::cosh(0.25 * u);
        return -detail::h_numerator(s, t) / (2.0 * u * c * c);
    }

    // Literal closed forms, accurate only away from the singular lines.
    static double K_closed(double u) {
        double c = std::cosh(u / 4);
        return (0.5 + std::sinh(u / 2) / u) / (c * c);
    }
    static double S_closed(double s, double t) {
        double num = s + t - t * std::cosh(s) - s * std::cosh(t) - std::sinh(s) - std::sinh(t) + std::sinh(s + t);
        return num / (s * t * (std::sinh(s / 2) * std::sinh(t / 2) * std::sinh((s + t) / 2)));
    }
    static double H_closed(double s, double t) {
        double num = t * (s + t) * std::cosh(s) - s * (s + t) * std::cosh(t) +
                     (s - t) * (s + t + std::sinh(s) + std::sinh(t) - std::sinh(s + t));
        double sh = std::sinh((s + t) / 2);
        return (1.0 - std::cosh((s + t) / 2)) * num /
               (s * t * (s + t) * std::sinh(s / 2) * std::sinh(t / 2) * sh * sh);
    }

    // g(e^s) = 2(e^s - 1)/s, f(e^s) = 2(e^{s/2} - 1)/s, g_j(e^s) = e^{js} g(e^s).
    double g(double s) const {
        if (std::abs(s) < taylor_radius) {
            double r = 0.0, fact = 1.0;
            std::array<double, series_order + 1> c{};
            for (int k = 0; k <= series_order; ++k) {
                fact *= (k + 1);
                c[k] = 2.0 / fact;
            }
            for (int k = series_order; k >= 0; --k) r = r * s + c[k];
            return r;
        }
        return 2.0 * std::expm1(s) / s;
    }
    double f(double s) const { return 0.5 * g(0.5 * s); }
    double g_j(int j, double s) const { return std::exp(j * s) * g(s); }

    // Same functions in the multiplicative variable u = e^s.
    double g_of_u(double u) const { return g(std::log(u)); }
    double f_of_u(double u) const { return f(std::log(u)); }
};

// Divided differences of exp, evaluated by nonnegative series after shifting to the smallest node.
// exp[x0, x1] = (e^{x1} - e^{x0}) / (x1 - x0)
inline double exp_dd1(double x0, double x1) {
    double lo = std::min(x0, x1), d = std::abs(x1 - x0);
    if (d > 30.0) return (std::exp(x1) - std::exp(x0)) / (x1 - x0);
    double term = 1.0, sum = 1.0;
    for (int n = 1; n < 200; ++n) {
        term *= d / (n + 1);
        sum += term;
        if (term < 1e-18 * sum) break;
    }
    return std::exp(lo) * sum;
}

// exp[x0, x1, x2]: the integral of exp(u0 x0 + u1 x1 + u2 x2) over the standard 2-simplex.
inline double exp_dd2(double x0, double x1, double x2) {
    double lo = std::min({x0, x1, x2});
    double a = x0 + x1 + x2 - lo - std::max({x0, x1, x2}) - lo;  // middle - lo
    double b = std::max({x0, x1, x2}) - lo;
    if (b > 30.0) {
        if (b - a > 1e-3 && a > 1e-3)
            return std::exp(lo) * ((exp_dd1(0.0, b) - exp_dd1(0.0, a)) / (b - a));
    }
    // sum_n h_n(a, b) / (n+2)!, h_n the complete homogeneous polynomial.
    double h = 1.0, apow = 1.0, fact = 2.0, sum = 0.5;
    for (int n = 1; n < 400; ++n) {
        apow *= a;
        h = b * h + apow;
        fact *= (n + 2);
        double term = h / fact;
        sum += term;
        if (term < 1e-18 * sum) break;
    }
    return std::exp(lo) * sum;
}

}  // namespace ncricci
