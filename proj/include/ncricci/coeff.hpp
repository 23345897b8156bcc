#pragma once

// Exact scalar coefficients: Laurent polynomials in tau1 = Re tau, tau2 = Im tau and pi
// with Gaussian-rational coefficients.

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <sstream>
#include <string>

namespace ncricci {

using Rational = boost::multiprecision::cpp_rational;

struct GaussRational {
    Rational re{0};
    Rational im{0};

    bool is_zero() const { return re == 0 && im == 0; }
    friend GaussRational operator+(const GaussRational& a, const GaussRational& b) { return {a.re + b.re, a.im + b.im}; }
    friend GaussRational operator-(const GaussRational& a, const GaussRational& b) { return {a.re - b.re, a.im - b.im}; }
    friend GaussRational operator*(const GaussRational& a, const GaussRational& b) {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    GaussRational operator-() const { return {-re, -im}; }
    bool operator==(const GaussRational&) const = default;
    auto operator<=>(const GaussRational& o) const {
        if (re != o.re) return re < o.re ? std::strong_ordering::less : std::strong_ordering::greater;
        if (im != o.im) return im < o.im ? std::strong_ordering::less : std::strong_ordering::greater;
        return std::strong_ordering::equal;
    }
    std::complex<double> to_complex() const {
        return {static_cast<double>(re), static_cast<double>(im)};
    }
    std::string str() const {
        std::ostringstream os;
        if (im == 0) {
            os << re;
        } else if (re == 0) {
            os << im << "i";
        } else {
            os << "(" << re << (im < 0 ? "" : "+") << im << "i)";
        }
        return os.str();
    }
};

struct CoeffMonomial {
    int tau1 = 0;
    int tau2 = 0;
    int pi = 0;
    auto operator<=>(const CoeffMonomial&) const = default;
};

class Coeff {
public:
    using Map = std::map<CoeffMonomial, GaussRational>;

    Coeff() = default;
    Coeff(long long n) { add(CoeffMonomial{}, GaussRational{Rational(n), 0}); }  // NOLINT
    Coeff(const Rational& r) { add(CoeffMonomial{}, GaussRational{r, 0}); }     // NOLINT
    Coeff(const GaussRational& g, CoeffMonomial m = {}) { add(m, g); }

    static Coeff rational(long long num, long long den) { return Coeff(Rational(num, den)); }
    static Coeff imag_unit() { return Coeff(GaussRational{0, 1}); }
    static Coeff tau1(int power = 1) { return Coeff(GaussRational{1, 0}, CoeffMonomial{power, 0, 0}); }
    static Coeff tau2(int power = 1) { return Coeff(GaussRational{1, 0}, CoeffMonomial{0, power, 0}); }
    static Coeff pi(int power = 1) { return Coeff(GaussRational{1, 0}, CoeffMonomial{0, 0, power}); }
    static Coeff tau() { return tau1() + imag_unit() * tau2(); }
    static Coeff tau_bar() { return tau1() - imag_unit() * tau2(); }
    static Coeff tau_abs2() { return tau1(2) + tau2(2); }

    const Map& terms() const { return t_; }
    bool is_zero() const { return t_.empty(); }

    void add(const CoeffMonomial& m, const GaussRational& g) {
        if (g.is_zero()) return;
        auto [it, inserted] = t_.try_emplace(m, g);
        if (!inserted) {
            it->second = it->second + g;
            if (it->second.is_zero()) t_.erase(it);
        }
    }

    friend Coeff operator+(Coeff a, const Coeff& b) {
        for (const auto& [m, g] : b.t_) a.add(m, g);
        return a;
    }
    friend Coeff operator-(Coeff a, const Coeff& b) {
        for (const auto& [m, g] : b.t_) a.add(m, -g);
        return a;
    }
    Coeff operator-() const {
        Coeff r;
        for (const auto& [m, g] : t_) r.t_.emplace(m, -g);
        return r;
    }
    friend Coeff operator*(const Coeff& a, const Coeff& b) {
        Coeff r;
        for (const auto& [ma, ga] : a.t_)
            for (const auto& [mb, gb] : b.t_)
                r.add(CoeffMonomial{ma.tau1 + mb.tau1, ma.tau2 + mb.tau2, ma.pi + mb.pi}, ga * gb);
        return r;
    }
    Coeff& operator+=(const Coeff& b) { return *this = *this + b; }
    bool operator==(const Coeff&) const = default;

    std::complex<double> evaluate(double tau1v, double tau2v) const {
        std::complex<double> s = 0.0;
        for (const auto& [m, g] : t_)
            s += g.to_complex() * std::pow(tau1v, m.tau1) * std::pow(tau2v, m.tau2) *
                 std::pow(std::numbers::pi, m.pi);
        return s;
    }

    std::string str() const {
        if (t_.empty()) return "0";
        std::ostringstream os;
        bool first = true;
        for (const auto& [m, g] : t_) {
            if (!first) os << " + ";
            first = false;
            os << g.str();
            if (m.tau1) os << "*tau1" << (m.tau1 != 1 ? "^" + std::to_string(m.tau1) : "");
            if (m.tau2) os << "*tau2" << (m.tau2 != 1 ? "^" + std::to_string(m.tau2) : "");
            if (m.pi) os << "*pi" << (m.pi != 1 ? "^" + std::to_string(m.pi) : "");
        }
        return os.str();
    }

private:
    Map t_;
};

}  // namespace ncricci
