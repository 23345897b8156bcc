#pragma once

// Smooth noncommutative torus in the twisted Fourier model.
// Elements are finite sums  sum a_{mn} U^m V^n  with  V U = e^{2 pi i theta} U V.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace ncricci {

using cplx = std::complex<double>;

struct AlgebraContext {
    double theta = 0.0;
    cplx tau{0.0, 1.0};
    double prune_tol = 1e-14;
    int band_cap = 64;

    double tau1() const { return tau.real(); }
    double tau2() const { return tau.imag(); }

    void validate() const {
        if (!(tau.imag() > 0.0)) throw InputError("nctorus-core", "Im(tau) must be positive");
        if (!(prune_tol >= 0.0)) throw InputError("nctorus-core", "prune_tol must be non-negative");
        if (band_cap < 1) throw InputError("nctorus-core", "band_cap must be at least 1");
        if (!std::isfinite(theta)) throw InputError("nctorus-core", "theta must be finite");
    }

    // e^{2 pi i theta k}; the argument is reduced mod 1 first so large k stays accurate.
    cplx phase(long long k) const {
        if (theta == 0.0 || k == 0) return {1.0, 0.0};
        double x = theta * static_cast<double>(k);
        x -= std::floor(x);
        return std::polar(1.0, 2.0 * std::numbers::pi * x);
    }

    bool operator==(const AlgebraContext&) const = default;
};

struct Mode {
    int m = 0;
    int n = 0;
    auto operator<=>(const Mode&) const = default;
};

class TorusElement {
public:
    using Term = std::pair<Mode, cplx>;

    TorusElement() = default;
    explicit TorusElement(const AlgebraContext& ctx) : ctx_(ctx) {}

    // Sums duplicate modes, sorts, prunes and band-caps.
    TorusElement(const AlgebraContext& ctx, std::vector<Term> terms, double loss = 0.0)
        : ctx_(ctx), terms_(std::move(terms)), loss_(loss) {
        normalize();
    }

    static TorusElement zero(const AlgebraContext& ctx) { return TorusElement(ctx); }
    static TorusElement scalar(const AlgebraContext& ctx, cplx c) {
        return TorusElement(ctx, {{Mode{0, 0}, c}});
    }
    static TorusElement one(const AlgebraContext& ctx) { return scalar(ctx, 1.0); }
    static TorusElement monomial(const AlgebraContext& ctx, int m, int n, cplx c = 1.0) {
        return TorusElement(ctx, {{Mode{m, n}, c}});
    }
    static TorusElement U(const AlgebraContext& ctx) { return monomial(ctx, 1, 0); }
    static TorusElement V(const AlgebraContext& ctx) { return monomial(ctx, 0, 1); }

    const AlgebraContext& context() const { return ctx_; }
    const std::vector<Term>& terms() const { return terms_; }
    std::size_t size() const { return terms_.size(); }
    bool is_zero() const { return terms_.empty(); }
    // Upper bound on the l1 mass discarded by pruning and band capping so far.
    double loss() const { return loss_; }

    cplx coeff(int m, int n) const {
        Mode key{m, n};
        auto it = std::lower_bound(terms_.begin(), terms_.end(), key,
                                   [](const Term& t, const Mode& k) { return t.first < k; });
        if (it != terms_.end() && it->first == key) return it->second;
        return {0.0, 0.0};
    }

    double norm_l1() const {
        double s = 0.0;
        for (const auto& t : terms_) s += std::abs(t.second);
        return s;
    }
    double norm_l2() const {
        double s = 0.0;
        for (const auto& t : terms_) s += std::norm(t.second);
        return std::sqrt(s);
    }
    double max_abs() const {
        double s = 0.0;
        for (const auto& t : terms_) s = std::max(s, std::abs(t.second));
        return s;
    }
    // max(|m|, |n|) over the support; -1 for the zero element.
    int radius() const {
        int r = -1;
        for (const auto& t : terms_) r = std::max({r, std::abs(t.first.m), std::abs(t.first.n)});
        return r;
    }

    TorusElement operator-() const {
        TorusElement r = *this;
        for (auto& t : r.terms_) t.second = -t.second;
        return r;
    }
    TorusElement& operator+=(const TorusElement& o) { return *this = combine(*this, o, 1.0); }
    TorusElement& operator-=(const TorusElement& o) { return *this = combine(*this, o, -1.0); }
    TorusElement& operator*=(cplx c) {
        for (auto& t : terms_) t.second *= c;
        loss_ *= std::abs(c);
        normalize();
        return *this;
    }
    friend TorusElement operator+(const TorusElement& a, const TorusElement& b) { return combine(a, b, 1.0); }
    friend TorusElement operator-(const TorusElement& a, const TorusElement& b) { return combine(a, b, -1.0); }
    friend TorusElement operator*(cplx c, TorusElement a) { return a *= c; }
    friend TorusElement operator*(TorusElement a, cplx c) { return a *= c; }
    friend TorusElement operator*(double c, TorusElement a) { return a *= cplx(c); }

private:
    AlgebraContext ctx_{};
    std::vector<Term> terms_;
    double loss_ = 0.0;

    friend TorusElement mul(const TorusElement& a, const TorusElement& b);

    void normalize() {
        std::sort(terms_.begin(), terms_.end(), [](const Term& x, const Term& y) { return x.first < y.first; });
        std::size_t out = 0;
        for (std::size_t i = 0; i < terms_.size();) {
            Mode key = terms_[i].first;
            cplx acc = 0.0;
            while (i < terms_.size() && terms_[i].first == key) acc += terms_[i++].second;
            double mag = std::abs(acc);
            bool capped = std::abs(key.m) > ctx_.band_cap || std::abs(key.n) > ctx_.band_cap;
            if (mag <= ctx_.prune_tol || mag == 0.0 || capped) {
                loss_ += mag;
                continue;
            }
            terms_[out++] = {key, acc};
        }
        terms_.resize(out);
    }

    static TorusElement combine(const TorusElement& a, const TorusElement& b, double sign) {
        if (!(a.ctx_ == b.ctx_)) throw Error("nctorus-core", "mismatched algebra contexts");
        std::vector<Term> t;
        t.reserve(a.terms_.size() + b.terms_.size());
        t.insert(t.end(), a.terms_.begin(), a.terms_.end());
        for (const auto& x : b.terms_) t.push_back({x.first, sign * x.second});
        return TorusElement(a.ctx_, std::move(t), a.loss_ + b.loss_);
    }
};

// Twisted convolution: (U^m V^n)(U^p V^q) = e^{2 pi i theta n p} U^{m+p} V^{n+q}.
inline TorusElement mul(const TorusElement& a, const TorusElement& b) {
    const AlgebraContext& ctx = a.ctx_;
    if (!(ctx == b.ctx_)) throw Error("nctorus-core", "mismatched algebra contexts");
    double loss = a.loss_ * b.norm_l1() + a.norm_l1() * b.loss_;
    if (a.terms_.empty() || b.terms_.empty()) {
        TorusElement z(ctx);
        z.loss_ = loss;
        return z;
    }
    int am0 = a.terms_.front().first.m, am1 = a.terms_.back().first.m;
    int an0 = a.terms_[0].first.n, an1 = an0;
    for (const auto& t : a.terms_) an0 = std::min(an0, t.first.n), an1 = std::max(an1, t.first.n);
    int bm0 = b.terms_.front().first.m, bm1 = b.terms_.back().first.m;
    int bn0 = b.terms_[0].first.n, bn1 = bn0;
    for (const auto& t : b.terms_) bn0 = std::min(bn0, t.first.n), bn1 = std::max(bn1, t.first.n);

    // Phase table indexed by (n of left factor, m of right factor).
    const int nw = an1 - an0 + 1, pw = bm1 - bm0 + 1;
    std::vector<cplx> ph(static_cast<std::size_t>(nw) * pw);
    for (int n = an0; n <= an1; ++n)
        for (int p = bm0; p <= bm1; ++p)
            ph[static_cast<std::size_t>(n - an0) * pw + (p - bm0)] = ctx.phase(static_cast<long long>(n) * p);

    const int m0 = am0 + bm0, n0 = an0 + bn0;
    const int W = (am1 + bm1) - m0 + 1, Hh = (an1 + bn1) - n0 + 1;
    std::vector<cplx> acc(static_cast<std::size_t>(W) * Hh, cplx(0.0));
    for (const auto& [ma, x] : a.terms_) {
        const cplx* row = &ph[static_cast<std::size_t>(ma.n - an0) * pw];
        for (const auto& [mb, y] : b.terms_) {
            std::size_t idx = static_cast<std::size_t>(ma.m + mb.m - m0) * Hh + (ma.n + mb.n - n0);
            acc[idx] += x * y * row[mb.m - bm0];
        }
    }
    std::vector<TorusElement::Term> out;
    for (int i = 0; i < W; ++i)
        for (int j = 0; j < Hh; ++j) {
            cplx c = acc[static_cast<std::size_t>(i) * Hh + j];
            if (c != 0.0) out.push_back({Mode{m0 + i, n0 + j}, c});
        }
    return TorusElement(ctx, std::move(out), loss);
}

inline TorusElement operator*(const TorusElement& a, const TorusElement& b) { return mul(a, b); }

// (U^m V^n)^* = e^{2 pi i theta m n} U^{-m} V^{-n}, fixed by (U^m V^n)^* (U^m V^n) = 1.
inline TorusElement adjoint(const TorusElement& a) {
    std::vector<TorusElement::Term> t;
    t.reserve(a.size());
    for (const auto& [md, c] : a.terms())
        t.push_back({Mode{-md.m, -md.n}, std::conj(c) * a.context().phase(static_cast<long long>(md.m) * md.n)});
    return TorusElement(a.context(), std::move(t), a.loss());
}

inline double self_adjoint_defect(const TorusElement& a) { return (a - adjoint(a)).norm_l1(); }

inline bool is_self_adjoint(const TorusElement& a, double tol = 1e-12) {
    return self_adjoint_defect(a) <= tol * (1.0 + a.norm_l1());
}

// delta_1 multiplies a_{mn} by m, delta_2 by n.
inline TorusElement delta(int j, const TorusElement& a) {
    if (j != 1 && j != 2) throw InputError("nctorus-core", "derivation index must be 1 or 2");
    std::vector<TorusElement::Term> t;
    t.reserve(a.size());
    for (const auto& [md, c] : a.terms()) t.push_back({md, c * static_cast<double>(j == 1 ? md.m : md.n)});
    return TorusElement(a.context(), std::move(t), a.loss());
}

inline cplx trace_phi(const TorusElement& a) { return a.coeff(0, 0); }

// phi(b^* a), the GNS inner product; linear in a.
inline cplx hs_inner(const TorusElement& a, const TorusElement& b) {
    cplx s = 0.0;
    for (const auto& [md, c] : a.terms()) s += c * std::conj(b.coeff(md.m, md.n));
    return s;
}

namespace detail {
inline void check_band_loss(const TorusElement& r, const char* op) {
    if (r.loss() > 1e-6 * std::max(1.0, r.norm_l1()))
        throw Error("nctorus-core", std::string(op) + " not converged within band_cap; truncation-loss estimate " +
                                        std::to_string(r.loss()));
}
}  // namespace detail

// Scaling and squaring: halve until the l1 bound is below 1/2, 20-term series, square back.
inline TorusElement exp_sa(const TorusElement& a) {
    if (!is_self_adjoint(a, 1e-10))
        throw InputError("nctorus-core", "exp_sa requires a self-adjoint argument");
    const AlgebraContext& ctx = a.context();
    double nrm = a.norm_l1();
    int squarings = 0;
    while (nrm / std::ldexp(1.0, squarings) >= 0.5) ++squarings;
    TorusElement x = a * cplx(std::ldexp(1.0, -squarings));
    TorusElement sum = TorusElement::one(ctx);
    TorusElement term = TorusElement::one(ctx);
    for (int k = 1; k <= 20; ++k) {
        term = mul(term, x) * cplx(1.0 / k);
        if (term.is_zero()) break;
        sum += term;
    }
    for (int i = 0; i < squarings; ++i) sum = mul(sum, sum);
    detail::check_band_loss(sum, "exp_sa");
    return sum;
}

// Inverse of a positive invertible element by Newton-Schulz iteration X <- X(2 - A X), run on the
// rescaled element a/|a|_1 so that pruning acts relative to the size of the inverse.
inline TorusElement inverse_positive(const TorusElement& a, int max_iter = 200) {
    const AlgebraContext& ctx = a.context();
    double nrm = a.norm_l1();
    if (nrm == 0.0) throw Error("nctorus-core", "inverse of zero element");
    TorusElement an = a * cplx(1.0 / nrm);
    TorusElement x = TorusElement::one(ctx);
    TorusElement two = TorusElement::scalar(ctx, 2.0);
    double tol = std::max(1e-15, 10.0 * ctx.prune_tol);
    double best = std::numeric_limits<double>::infinity();
    for (int it = 0; it < max_iter; ++it) {
        TorusElement r = mul(an, x);
        double defect = (r - TorusElement::one(ctx)).norm_l1();
        if (defect < tol || (defect < 1e3 * tol && defect >= best)) return x * cplx(1.0 / nrm);
        best = std::min(best, defect);
        x = mul(x, two - r);
    }
    throw Error("nctorus-core", "Newton-Schulz inversion did not converge");
}

// 2x2 matrices over the torus algebra, row-major.
class MatrixElement {
public:
    MatrixElement() = default;
    explicit MatrixElement(const AlgebraContext& ctx) {
        for (auto& e : e_) e = TorusElement(ctx);
    }
    MatrixElement(TorusElement a00, TorusElement a01, TorusElement a10, TorusElement a11)
        : e_{std::move(a00), std::move(a01), std::move(a10), std::move(a11)} {
        for (const auto& e : e_)
            if (!(e.context() == e_[0].context()))
                throw Error("nctorus-core", "matrix entries must share one algebra context");
    }

    // a tensor M for a scalar 2x2 matrix M.
    static MatrixElement tensor(const TorusElement& a, const std::array<cplx, 4>& m) {
        return MatrixElement(a * m[0], a * m[1], a * m[2], a * m[3]);
    }
    static MatrixElement identity_times(const TorusElement& a) { return tensor(a, {1.0, 0.0, 0.0, 1.0}); }

    const TorusElement& operator()(int i, int j) const { return e_[2 * i + j]; }
    TorusElement& operator()(int i, int j) { return e_[2 * i + j]; }
    const AlgebraContext& context() const { return e_[0].context(); }

    TorusElement trace() const { return e_[0] + e_[3]; }

    friend MatrixElement operator+(const MatrixElement& a, const MatrixElement& b) {
        return MatrixElement(a.e_[0] + b.e_[0], a.e_[1] + b.e_[1], a.e_[2] + b.e_[2], a.e_[3] + b.e_[3]);
    }
    friend MatrixElement operator-(const MatrixElement& a, const MatrixElement& b) {
        return MatrixElement(a.e_[0] - b.e_[0], a.e_[1] - b.e_[1], a.e_[2] - b.e_[2], a.e_[3] - b.e_[3]);
    }
    friend MatrixElement operator*(cplx c, const MatrixElement& a) {
        return MatrixElement(c * a.e_[0], c * a.e_[1], c * a.e_[2], c * a.e_[3]);
    }
    friend MatrixElement operator*(const MatrixElement& a, const MatrixElement& b) {
        MatrixElement r;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) r(i, j) = mul(a(i, 0), b(0, j)) + mul(a(i, 1), b(1, j));
        return r;
    }
    // Right multiplication of every entry by an algebra element.
    MatrixElement times_right(const TorusElement& x) const {
        return MatrixElement(mul(e_[0], x), mul(e_[1], x), mul(e_[2], x), mul(e_[3], x));
    }
    double max_abs() const {
        double s = 0.0;
        for (const auto& e : e_) s = std::max(s, e.max_abs());
        return s;
    }

private:
    std::array<TorusElement, 4> e_;
};

inline MatrixElement adjoint(const MatrixElement& a) {
    return MatrixElement(adjoint(a(0, 0)), adjoint(a(1, 0)), adjoint(a(0, 1)), adjoint(a(1, 1)));
}

// Random element with modes |m|, |n| <= band and coefficients uniform in the complex square of
// half-width amp times a 2^{-|m|-|n|} decay.
inline TorusElement random_element(const AlgebraContext& ctx, int band, double amp, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<TorusElement::Term> t;
    for (int m = -band; m <= band; ++m)
        for (int n = -band; n <= band; ++n) {
            double w = amp * std::ldexp(1.0, -std::abs(m) - std::abs(n));
            double re = u(rng), im = u(rng);
            t.push_back({Mode{m, n}, cplx(w * re, w * im)});
        }
    return TorusElement(ctx, std::move(t));
}

inline TorusElement random_self_adjoint(const AlgebraContext& ctx, int band, double amp, std::mt19937_64& rng) {
    TorusElement a = random_element(ctx, band, amp, rng);
    return cplx(0.5) * (a + adjoint(a));
}

inline MatrixElement random_self_adjoint_matrix(const AlgebraContext& ctx, int band, double amp, std::mt19937_64& rng) {
    TorusElement a = random_self_adjoint(ctx, band, amp, rng);
    TorusElement d = random_self_adjoint(ctx, band, amp, rng);
    TorusElement b = random_element(ctx, band, amp, rng);
    return MatrixElement(a, b, adjoint(b), d);
}

}  // namespace ncricci
