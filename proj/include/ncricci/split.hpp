#pragma once

// Elements of the algebra A (x) span{I, sigma}, closed because sigma^2 = 2 i tau2 sigma.

#include "algebra.hpp"

namespace ncricci {

struct SplitElement {
    TorusElement id;
    TorusElement sigma;

    static SplitElement zero(const AlgebraContext& ctx) { return {TorusElement::zero(ctx), TorusElement::zero(ctx)}; }

    SplitElement& operator+=(const SplitElement& o) {
        id += o.id;
        sigma += o.sigma;
        return *this;
    }
    friend SplitElement operator+(SplitElement a, const SplitElement& b) { return a += b; }
    friend SplitElement operator-(const SplitElement& a, const SplitElement& b) {
        return {a.id - b.id, a.sigma - b.sigma};
    }
    friend SplitElement operator*(cplx c, const SplitElement& a) { return {c * a.id, c * a.sigma}; }
    friend SplitElement operator*(const SplitElement& a, const SplitElement& b) {
        const cplx two_i_tau2(0.0, 2.0 * a.id.context().tau2());
        return {mul(a.id, b.id), mul(a.id, b.sigma) + mul(a.sigma, b.id) + two_i_tau2 * mul(a.sigma, b.sigma)};
    }
    double max_abs() const { return std::max(id.max_abs(), sigma.max_abs()); }
};

inline SplitElement delta(int j, const SplitElement& a) { return {delta(j, a.id), delta(j, a.sigma)}; }

}  // namespace ncricci
