#pragma once

// Formal symbol algebra for order-two Laplace-type operators on the noncommutative torus.
//
// A symbol is a finite sum of words  c * xi1^p xi2^q * f_1 f_2 ... f_n (x) M, where c is an exact
// coefficient, the f_i are noncommuting algebra atoms and M is I or sigma. The atoms are
//   B0                    the parametrix atom (k^2 Q(xi) + 1)^{-1}, i.e. lambda = -1,
//   KPow(q)               k^q,
//   Tag(q, dirs)          delta_{dirs[n-1]}( ... delta_{dirs[0]}(k^q)),
// and Q(xi) = xi1^2 + 2 tau1 xi1 xi2 + |tau|^2 xi2^2. B0 and k^q commute, so in normal form every
// maximal run of KPow/B0 atoms is rewritten as one merged k-power followed by the B0 atoms.

#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "coeff.hpp"
#include "errors.hpp"

namespace ncricci {

struct Atom {
    enum class Kind : unsigned char { B0 = 0, KPow = 1, Tag = 2 };
    Kind kind = Kind::B0;
    int q = 0;         // k-exponent of KPow, or of the differentiated power for Tag
    std::string dirs;  // Tag only: derivation directions in order of application

    static Atom b0() { return {Kind::B0, 0, {}}; }
    static Atom kpow(int q) { return {Kind::KPow, q, {}}; }
    static Atom tag(int q, std::string dirs) { return {Kind::Tag, q, std::move(dirs)}; }

    bool is_b0() const { return kind == Kind::B0; }
    bool is_kpow() const { return kind == Kind::KPow; }
    bool is_tag() const { return kind == Kind::Tag; }
    auto operator<=>(const Atom&) const = default;
};

enum class MatrixPart : unsigned char { I = 0, Sigma = 1 };

struct WordKey {
    int xi1 = 0;
    int xi2 = 0;
    std::vector<Atom> factors;
    MatrixPart mat = MatrixPart::I;

    int b0_count() const {
        int c = 0;
        for (const auto& a : factors) c += a.is_b0();
        return c;
    }
    // Homogeneity order in xi; each B0 counts -2.
    int order() const { return xi1 + xi2 - 2 * b0_count(); }
    auto operator<=>(const WordKey&) const = default;
};

inline std::vector<Atom> normalize_factors(const std::vector<Atom>& in) {
    std::vector<Atom> out;
    out.reserve(in.size());
    std::size_t i = 0;
    while (i < in.size()) {
        if (in[i].is_tag()) {
            out.push_back(in[i++]);
            continue;
        }
        int kq = 0, nb = 0;
        for (; i < in.size() && !in[i].is_tag(); ++i) {
            if (in[i].is_b0())
                ++nb;
            else
                kq += in[i].q;
        }
        if (kq != 0) out.push_back(Atom::kpow(kq));
        for (int b = 0; b < nb; ++b) out.push_back(Atom::b0());
    }
    return out;
}

class SymbolExpr {
public:
    using Map = std::map<WordKey, Coeff>;

    SymbolExpr() = default;
    static SymbolExpr word(Coeff c, int xi1, int xi2, std::vector<Atom> factors, MatrixPart mat = MatrixPart::I) {
        SymbolExpr e;
        e.add(WordKey{xi1, xi2, normalize_factors(factors), mat}, c);
        return e;
    }
    static SymbolExpr constant(Coeff c) { return word(std::move(c), 0, 0, {}); }
    static SymbolExpr b0() { return word(1, 0, 0, {Atom::b0()}); }

    const Map& terms() const { return t_; }
    std::size_t size() const { return t_.size(); }
    bool is_zero() const { return t_.empty(); }

    // key.factors must already be in normal form.
    void add(const WordKey& key, const Coeff& c) {
        if (c.is_zero()) return;
        auto [it, inserted] = t_.try_emplace(key, c);
        if (!inserted) {
            it->second += c;
            if (it->second.is_zero()) t_.erase(it);
        }
    }

    SymbolExpr& operator+=(const SymbolExpr& o) {
        for (const auto& [k, c] : o.t_) add(k, c);
        return *this;
    }
    SymbolExpr& operator-=(const SymbolExpr& o) {
        for (const auto& [k, c] : o.t_) add(k, -c);
        return *this;
    }
    friend SymbolExpr operator+(SymbolExpr a, const SymbolExpr& b) { return a += b; }
    friend SymbolExpr operator-(SymbolExpr a, const SymbolExpr& b) { return a -= b; }
    SymbolExpr operator-() const { return SymbolExpr() - *this; }
    friend SymbolExpr operator*(const Coeff& c, const SymbolExpr& e) {
        SymbolExpr r;
        for (const auto& [k, v] : e.t_) r.add(k, c * v);
        return r;
    }
    friend SymbolExpr operator*(const SymbolExpr& a, const SymbolExpr& b) {
        SymbolExpr r;
        for (const auto& [ka, ca] : a.t_)
            for (const auto& [kb, cb] : b.t_) {
                std::vector<Atom> f = ka.factors;
                f.insert(f.end(), kb.factors.begin(), kb.factors.end());
                Coeff c = ca * cb;
                MatrixPart m = MatrixPart::I;
                if (ka.mat == MatrixPart::Sigma && kb.mat == MatrixPart::Sigma) {
                    c = c * (Coeff(2) * Coeff::imag_unit() * Coeff::tau2());  // sigma^2 = 2i Im(tau) sigma
                    m = MatrixPart::Sigma;
                } else if (ka.mat == MatrixPart::Sigma || kb.mat == MatrixPart::Sigma) {
                    m = MatrixPart::Sigma;
                }
                r.add(WordKey{ka.xi1 + kb.xi1, ka.xi2 + kb.xi2, normalize_factors(f), m}, c);
            }
        return r;
    }
    bool operator==(const SymbolExpr&) const = default;

    // Terms of homogeneity order exactly n.
    SymbolExpr of_order(int n) const {
        SymbolExpr r;
        for (const auto& [k, c] : t_)
            if (k.order() == n) r.t_.emplace(k, c);
        return r;
    }
    SymbolExpr matrix_part(MatrixPart m) const {
        SymbolExpr r;
        for (const auto& [k, c] : t_)
            if (k.mat == m) r.t_.emplace(k, c);
        return r;
    }
    // Same words, matrix part replaced.
    SymbolExpr with_matrix(MatrixPart m) const {
        SymbolExpr r;
        for (const auto& [k, c] : t_) {
            WordKey key = k;
            key.mat = m;
            r.add(key, c);
        }
        return r;
    }

private:
    Map t_;
};

// Q(xi) and its partial derivatives.
inline SymbolExpr quadratic_form() {
    return SymbolExpr::word(1, 2, 0, {}) + SymbolExpr::word(Coeff(2) * Coeff::tau1(), 1, 1, {}) +
           SymbolExpr::word(Coeff::tau_abs2(), 0, 2, {});
}
inline SymbolExpr quadratic_form_derivative(int i) {
    if (i == 1) return SymbolExpr::word(2, 1, 0, {}) + SymbolExpr::word(Coeff(2) * Coeff::tau1(), 0, 1, {});
    if (i == 2)
        return SymbolExpr::word(Coeff(2) * Coeff::tau1(), 1, 0, {}) +
               SymbolExpr::word(Coeff(2) * Coeff::tau_abs2(), 0, 1, {});
    throw InputError("symbol-engine", "direction must be 1 or 2");
}

namespace detail {

// Leibniz rule over the factor list; `expand` maps one atom to a replacement expression.
template <class Fn>
SymbolExpr leibniz(const SymbolExpr& e, Fn&& expand) {
    SymbolExpr out;
    for (const auto& [key, c] : e.terms()) {
        for (std::size_t i = 0; i < key.factors.size(); ++i) {
            SymbolExpr rep = expand(key.factors[i]);
            if (rep.is_zero()) continue;
            std::vector<Atom> left(key.factors.begin(), key.factors.begin() + static_cast<long>(i));
            std::vector<Atom> right(key.factors.begin() + static_cast<long>(i) + 1, key.factors.end());
            SymbolExpr w = SymbolExpr::word(c, key.xi1, key.xi2, left, key.mat) * rep *
                           SymbolExpr::word(1, 0, 0, right);
            out += w;
        }
    }
    return out;
}

}  // namespace detail

// d/dxi_i. On B0 it uses d_i B0 = -B0 k^2 (d_i Q) B0.
inline SymbolExpr xi_derivative(const SymbolExpr& e, int i) {
    if (i != 1 && i != 2) throw InputError("symbol-engine", "direction must be 1 or 2");
    SymbolExpr dB0 = -(SymbolExpr::word(1, 0, 0, {Atom::b0(), Atom::kpow(2)}) * quadratic_form_derivative(i) *
                       SymbolExpr::b0());
    SymbolExpr out = detail::leibniz(e, [&](const Atom& a) { return a.is_b0() ? dB0 : SymbolExpr(); });
    for (const auto& [key, c] : e.terms()) {
        int p = i == 1 ? key.xi1 : key.xi2;
        if (p == 0) continue;
        out.add(WordKey{key.xi1 - (i == 1), key.xi2 - (i == 2), key.factors, key.mat}, Coeff(p) * c);
    }
    return out;
}

// The derivation delta_j applied to a symbol. Tags deeper than max_tag_depth are rejected.
inline SymbolExpr delta(const SymbolExpr& e, int j, int max_tag_depth = 2) {
    if (j != 1 && j != 2) throw InputError("symbol-engine", "direction must be 1 or 2");
    const char dj = static_cast<char>('0' + j);
    SymbolExpr dB0 =
        -(SymbolExpr::word(1, 0, 0, {Atom::b0(), Atom::tag(2, std::string(1, dj))}) * quadratic_form() *
          SymbolExpr::b0());
    return detail::leibniz(e, [&](const Atom& a) -> SymbolExpr {
        switch (a.kind) {
            case Atom::Kind::B0:
                return dB0;
            case Atom::Kind::KPow:
                return SymbolExpr::word(1, 0, 0, {Atom::tag(a.q, std::string(1, dj))});
            case Atom::Kind::Tag:
                if (static_cast<int>(a.dirs.size()) >= max_tag_depth)
                    throw Error("symbol-engine", "derivative of k^" + std::to_string(a.q) +
                                                     " beyond the configured tag depth " +
                                                     std::to_string(max_tag_depth));
                return SymbolExpr::word(1, 0, 0, {Atom::tag(a.q, a.dirs + dj)});
        }
        return {};
    });
}

// Composition sum_{|alpha| <= max_order_drop} (1/alpha!) d_xi^alpha(r1) delta^alpha(r2),
// with delta^alpha = delta_1^{alpha_1} delta_2^{alpha_2}.
inline SymbolExpr compose(const SymbolExpr& r1, const SymbolExpr& r2, int max_order_drop, int max_tag_depth = 2) {
    SymbolExpr out;
    for (int a1 = 0; a1 <= max_order_drop; ++a1)
        for (int a2 = 0; a1 + a2 <= max_order_drop; ++a2) {
            SymbolExpr d = r1, e = r2;
            long long fact = 1;
            for (int i = 0; i < a1; ++i) {
                d = xi_derivative(d, 1);
                fact *= (i + 1);
            }
            for (int i = 0; i < a2; ++i) {
                d = xi_derivative(d, 2);
                fact *= (i + 1);
            }
            if (d.is_zero()) continue;
            for (int i = 0; i < a2; ++i) e = delta(e, 2, max_tag_depth);
            for (int i = 0; i < a1; ++i) e = delta(e, 1, max_tag_depth);
            out += Coeff::rational(1, fact) * (d * e);
        }
    return out;
}

enum class LaplacianTarget { DeltaH1, DeltaPhi01, KDelta0K };

inline LaplacianTarget parse_target(const std::string& s) {
    if (s == "delta_h1") return LaplacianTarget::DeltaH1;
    if (s == "delta_phi01") return LaplacianTarget::DeltaPhi01;
    if (s == "k_delta0_k" || s == "delta_h0") return LaplacianTarget::KDelta0K;
    throw InputError("symbol-engine", "unknown Laplacian target '" + s + "'");
}

struct LaplacianSymbol {
    SymbolExpr a2, a1, a0;
};

inline SymbolExpr tag_word(Coeff c, int xi1, int xi2, int q, std::string dirs, MatrixPart m = MatrixPart::I) {
    return SymbolExpr::word(std::move(c), xi1, xi2, {Atom::tag(q, std::move(dirs))}, m);
}

// a1'(xi) = (delta_1(k^2) + tau delta_2(k^2)) (xi1 + conj(tau) xi2)
inline SymbolExpr a1_prime() {
    return tag_word(1, 1, 0, 2, "1") + tag_word(Coeff::tau_bar(), 0, 1, 2, "1") + tag_word(Coeff::tau(), 1, 0, 2, "2") +
           tag_word(Coeff::tau_abs2(), 0, 1, 2, "2");
}
// a1''(xi) = delta_1(k^2) xi2 - delta_2(k^2) xi1
inline SymbolExpr a1_doubleprime() { return tag_word(1, 0, 1, 2, "1") + tag_word(-1, 1, 0, 2, "2"); }

inline SymbolExpr a2_symbol() { return SymbolExpr::word(1, 0, 0, {Atom::kpow(2)}) * quadratic_form(); }

inline LaplacianSymbol laplacian_symbol(LaplacianTarget target) {
    LaplacianSymbol s;
    s.a2 = a2_symbol();
    switch (target) {
        case LaplacianTarget::DeltaPhi01:
            s.a1 = a1_prime();
            break;
        case LaplacianTarget::DeltaH1:
            s.a1 = a1_prime() + a1_doubleprime().with_matrix(MatrixPart::Sigma);
            break;
        case LaplacianTarget::KDelta0K: {
            // k (sum_ij c_ij delta_i delta_j)(k .) with c_11 = 1, c_12 = c_21 = tau1, c_22 = |tau|^2
            const Coeff c[2][2] = {{1, Coeff::tau1()}, {Coeff::tau1(), Coeff::tau_abs2()}};
            for (int i = 1; i <= 2; ++i)
                for (int j = 1; j <= 2; ++j) {
                    const Coeff& cij = c[i - 1][j - 1];
                    auto kdk = [](int d) {
                        return std::vector<Atom>{Atom::kpow(1), Atom::tag(1, std::string(1, static_cast<char>('0' + d)))};
                    };
                    // delta_i delta_j (k f) = k delta_i delta_j f + delta_i(k) delta_j f + delta_j(k) delta_i f + ...
                    s.a1 += SymbolExpr::word(cij, j == 1, j == 2, kdk(i));
                    s.a1 += SymbolExpr::word(cij, i == 1, i == 2, kdk(j));
                    std::string dirs{static_cast<char>('0' + j), static_cast<char>('0' + i)};
                    s.a0 += SymbolExpr::word(cij, 0, 0, {Atom::kpow(1), Atom::tag(1, dirs)});
                }
            break;
        }
    }
    return s;
}

struct Parametrix {
    SymbolExpr b0, b1, b2;
};

inline Parametrix parametrix(const LaplacianSymbol& a, int max_tag_depth = 2) {
    auto d = [&](const SymbolExpr& e, int j) { return delta(e, j, max_tag_depth); };
    auto dx = [](const SymbolExpr& e, int i) { return xi_derivative(e, i); };
    Parametrix p;
    const SymbolExpr& b0 = p.b0 = SymbolExpr::b0();
    p.b1 = -(b0 * a.a1 * b0 + dx(b0, 1) * d(a.a2, 1) * b0 + dx(b0, 2) * d(a.a2, 2) * b0);
    const SymbolExpr& b1 = p.b1;
    const Coeff half = Coeff::rational(1, 2);
    p.b2 = -(b0 * a.a0 * b0 + b1 * a.a1 * b0 + dx(b0, 1) * d(a.a1, 1) * b0 + dx(b0, 2) * d(a.a1, 2) * b0 +
             dx(b1, 1) * d(a.a2, 1) * b0 + dx(b1, 2) * d(a.a2, 2) * b0 + dx(dx(b0, 2), 1) * d(d(a.a2, 2), 1) * b0 +
             half * (dx(dx(b0, 1), 1) * d(d(a.a2, 1), 1) * b0) + half * (dx(dx(b0, 2), 2) * d(d(a.a2, 2), 2) * b0));
    if (!a.a2.is_zero()) {
        for (int n = 0; n <= 2; ++n) {
            const SymbolExpr& b = n == 0 ? p.b0 : n == 1 ? p.b1 : p.b2;
            for (const auto& [key, c] : b.terms())
                if (key.order() != -n - 2)
                    throw Error("symbol-engine", "parametrix term b" + std::to_string(n) + " has order " +
                                                     std::to_string(key.order()));
        }
    }
    return p;
}

// The sigma coefficient of b2 for Delta_{h,1}, assembled term by term from the split symbols.
inline SymbolExpr b2_doubleprime() {
    const SymbolExpr b0 = SymbolExpr::b0();
    const SymbolExpr a2 = a2_symbol(), a1p = a1_prime(), a1pp = a1_doubleprime();
    auto d = [](const SymbolExpr& e, int j) { return delta(e, j); };
    auto dx = [](const SymbolExpr& e, int i) { return xi_derivative(e, i); };
    const SymbolExpr b0a1ppb0 = b0 * a1pp * b0;
    const Coeff two_i_tau2 = Coeff(2) * Coeff::imag_unit() * Coeff::tau2();
    return b0 * a1p * b0a1ppb0 + dx(b0, 1) * d(a2, 1) * b0a1ppb0 + dx(b0, 2) * d(a2, 2) * b0a1ppb0 +
           two_i_tau2 * (b0a1ppb0 * a1pp * b0) + b0a1ppb0 * a1p * b0 - dx(b0, 1) * d(a1pp, 1) * b0 -
           dx(b0, 2) * d(a1pp, 2) * b0 + dx(b0a1ppb0, 1) * d(a2, 1) * b0 + dx(b0a1ppb0, 2) * d(a2, 2) * b0;
}

}  // namespace ncricci
