#pragma once

// Polar substitution and exact angular integration of xi-symbols.
//
// xi1 = r (cos t - (tau1/tau2) sin t), xi2 = (r/tau2) sin t turns Q(xi) into r^2, and
// d xi = r dr dt / ((2 pi)^2 tau2) for the measure d xi = d xi1 d xi2 / (2 pi)^2.

#include <map>
#include <vector>

#include "symbol_io.hpp"

namespace ncricci {

struct PreAngularWord {
    Coeff scalar;
    int r_power = 0;
    int cos_power = 0;
    int sin_power = 0;
    std::vector<Atom> factors;
    MatrixPart mat = MatrixPart::I;
};

struct RadialKey {
    int r_power = 0;
    std::vector<Atom> factors;
    MatrixPart mat = MatrixPart::I;
    auto operator<=>(const RadialKey&) const = default;
};

struct RadialWord {
    Coeff scalar;
    RadialKey key;
    int b0_count() const {
        int c = 0;
        for (const auto& a : key.factors) c += a.is_b0();
        return c;
    }
    bool integrable() const { return key.r_power + 1 < 2 * b0_count(); }
};

using RadialExpr = std::map<RadialKey, Coeff>;

inline Coeff binomial(int n, int k) {
    Rational b = 1;
    for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
    return Coeff(b);
}

// The measure factor r/((2 pi)^2 tau2) is included (as one extra power of r).
inline std::vector<PreAngularWord> to_polar(const SymbolExpr& e) {
    std::vector<PreAngularWord> out;
    const Coeff jac = Coeff::rational(1, 4) * Coeff::pi(-2) * Coeff::tau2(-1);
    for (const auto& [key, c] : e.terms()) {
        // xi1^a xi2^b = r^{a+b} sum_i C(a,i) (-tau1/tau2)^i cos^{a-i} sin^{i+b} / tau2^b
        for (int i = 0; i <= key.xi1; ++i) {
            Coeff s = c * jac * binomial(key.xi1, i) * Coeff::tau1(i) * Coeff::tau2(-i - key.xi2);
            if (i % 2) s = -s;
            out.push_back(PreAngularWord{s, key.xi1 + key.xi2 + 1, key.xi1 - i, i + key.xi2, key.factors, key.mat});
        }
    }
    return out;
}

// Integral of cos^a sin^b over [0, 2 pi]: 2 pi (a-1)!! (b-1)!! / (a+b)!! for a, b even, else 0.
inline Coeff angular_moment(int a, int b) {
    if (a % 2 || b % 2) return Coeff();
    auto dfact = [](int n) {
        Rational r = 1;
        for (int k = n; k > 1; k -= 2) r *= k;
        return r;
    };
    return Coeff(Rational(2) * dfact(a - 1) * dfact(b - 1) / dfact(a + b)) * Coeff::pi();
}

// Derivations commute, so the direction string of a tag may be sorted.
inline std::vector<Atom> canonical_tags(std::vector<Atom> f) {
    for (auto& a : f)
        if (a.is_tag()) std::sort(a.dirs.begin(), a.dirs.end());
    return f;
}

inline RadialExpr angular_integrate(const std::vector<PreAngularWord>& words) {
    RadialExpr out;
    // Words of odd xi-degree only carry odd trig moments.
    for (const auto& w : words) {
        Coeff m = angular_moment(w.cos_power, w.sin_power);
        if ((w.cos_power + w.sin_power) % 2 && !m.is_zero())
            throw Error("integrator", "odd angular moment did not vanish");
        if (m.is_zero()) continue;
        RadialKey k{w.r_power, canonical_tags(w.factors), w.mat};
        auto [it, inserted] = out.try_emplace(k, w.scalar * m);
        if (!inserted) {
            it->second += w.scalar * m;
            if (it->second.is_zero()) out.erase(it);
        }
    }
    for (const auto& [k, c] : out)
        if (!RadialWord{c, k}.integrable())
            throw Error("integrator", "non-integrable radial word r^" + std::to_string(k.r_power) + " " +
                                          word_string(k.factors));
    return out;
}

inline std::vector<FlatTerm> flatten(const RadialExpr& e) {
    std::vector<FlatTerm> out;
    for (const auto& [key, coeff] : e)
        for (const auto& [mono, g] : coeff.terms())
            out.push_back(FlatTerm{key.r_power, 0, 0, key.factors, key.mat, mono, g});
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace ncricci
