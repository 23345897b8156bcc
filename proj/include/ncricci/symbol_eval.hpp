#pragma once

// Numerical evaluation of symbols at a fixed covector xi, and the parametrix remainder
//   R(xi) = sum_{|alpha| <= 2} (1/alpha!) d_xi^alpha (sigma(P) + 1)(xi) delta^alpha(b_0 + b_1 + b_2)(xi) - 1.
// The sum is exact because sigma(P) is quadratic in xi, and delta acts pointwise in xi.

#include <cmath>
#include <map>
#include <mutex>
#include <utility>

#include "split.hpp"
#include "symbol.hpp"

namespace ncricci {

class SymbolEvaluator {
public:
    explicit SymbolEvaluator(TorusElement h) : h_(std::move(h)) {}

    const AlgebraContext& context() const { return h_.context(); }

    // k^q and delta_{dirs}(k^q), computed from h directly.
    const TorusElement& kpow(int q) const {
        std::lock_guard<std::mutex> lock(mu_);
        return kpow_locked(q);
    }
    const TorusElement& tag(int q, const std::string& dirs) const {
        std::lock_guard<std::mutex> lock(mu_);
        auto key = std::make_pair(q, dirs);
        auto it = tags_.find(key);
        if (it != tags_.end()) return it->second;
        TorusElement v = kpow_locked(q);
        for (char d : dirs) v = delta(d - '0', v);
        return tags_.emplace(key, std::move(v)).first->second;
    }

    double quadratic_form(double xi1, double xi2) const {
        const auto& ctx = context();
        return xi1 * xi1 + 2.0 * ctx.tau1() * xi1 * xi2 + std::norm(ctx.tau) * xi2 * xi2;
    }

    // B0 = (k^2 Q(xi) + 1)^{-1}
    TorusElement b0(double xi1, double xi2) const { return (1.0 / quadratic_form(xi1, xi2)) * scaled_b0(xi1, xi2); }

    // Q B0 = (k^2 + 1/Q)^{-1}, of size O(1) for large xi.
    TorusElement scaled_b0(double xi1, double xi2) const {
        const double q = quadratic_form(xi1, xi2);
        if (!(q > 0.0)) throw InputError("symbol-engine", "symbols are evaluated at nonzero xi only");
        return inverse_positive(kpow(2) + TorusElement::scalar(context(), 1.0 / q));
    }

    // Words are multiplied out with Q B0 in place of B0 so that absolute pruning stays relative to O(1)
    // factors; the powers of Q go into the scalar weight.
    SplitElement evaluate(const SymbolExpr& e, double xi1, double xi2) const {
        const auto& ctx = context();
        const double t1 = ctx.tau1(), t2 = ctx.tau2();
        const double q = quadratic_form(xi1, xi2);
        TorusElement B = scaled_b0(xi1, xi2);
        SplitElement out = SplitElement::zero(ctx);
        for (const auto& [key, c] : e.terms()) {
            cplx w = c.evaluate(t1, t2) * std::pow(xi1, key.xi1) * std::pow(xi2, key.xi2) *
                     std::pow(q, -key.b0_count());
            if (w == 0.0) continue;
            TorusElement v = TorusElement::one(ctx);
            for (const auto& a : key.factors) {
                if (a.is_b0())
                    v = mul(v, B);
                else if (a.is_kpow())
                    v = mul(v, kpow(a.q));
                else
                    v = mul(v, tag(a.q, a.dirs));
            }
            (key.mat == MatrixPart::I ? out.id : out.sigma) += w * v;
        }
        return out;
    }

private:
    const TorusElement& kpow_locked(int q) const {
        auto it = kpow_.find(q);
        if (it != kpow_.end()) return it->second;
        return kpow_.emplace(q, exp_sa((0.5 * q) * h_)).first->second;
    }

    TorusElement h_;
    mutable std::mutex mu_;
    mutable std::map<int, TorusElement> kpow_;
    mutable std::map<std::pair<int, std::string>, TorusElement> tags_;
};

inline SplitElement parametrix_remainder(const SymbolEvaluator& ev, const LaplacianSymbol& a, const Parametrix& p,
                                         double xi1, double xi2) {
    const auto& ctx = ev.context();
    const SymbolExpr full = a.a2 + a.a1 + a.a0 + SymbolExpr::constant(1);
    const SplitElement b = ev.evaluate(p.b0 + p.b1 + p.b2, xi1, xi2);
    SplitElement r = SplitElement::zero(ctx);
    for (int a1 = 0; a1 <= 2; ++a1)
        for (int a2 = 0; a1 + a2 <= 2; ++a2) {
            SymbolExpr d = full;
            for (int i = 0; i < a1; ++i) d = xi_derivative(d, 1);
            for (int i = 0; i < a2; ++i) d = xi_derivative(d, 2);
            if (d.is_zero()) continue;
            SplitElement db = b;
            for (int i = 0; i < a1; ++i) db = delta(1, db);
            for (int i = 0; i < a2; ++i) db = delta(2, db);
            const double fact = (a1 == 2 ? 2.0 : 1.0) * (a2 == 2 ? 2.0 : 1.0);
            r += cplx(1.0 / fact) * (ev.evaluate(d, xi1, xi2) * db);
        }
    r.id -= TorusElement::one(ctx);
    return r;
}

}  // namespace ncricci
