#pragma once

// Radial integration of post-angular words through the modular operator.
//
// Every tag is rewritten with l = log k = h/2 as
//   delta_j(k^q)             = k^q phi_q(nabla)(delta_j l),                    phi_q(s) = 2(e^{qs/2} - 1)/s
//   delta_i(delta_j(k^q))    = k^q [phi_q(nabla)(delta_i delta_j l)
//                                   + q^2 Phi_q(nabla_1, nabla_2)(delta_i l delta_j l + delta_j l delta_i l)],
//   Phi_q(s, t) = exp[0, qs/2, q(s+t)/2]  (second divided difference),
// so the word becomes a sum of terms k^a E_1 (E_2) with eigen-elements E of nabla. For X with
// nabla X = s X one has X f(h) = f(h + s) X; pushing all k-powers and B0 atoms to the left and
// substituting r -> r/k leaves k^c times a scalar radial integral in the eigenvalues.

#include <map>
#include <mutex>
#include <string>
#include <tuple>
#include <vector>

#include "kernels.hpp"
#include "modular.hpp"
#include "polar.hpp"
#include "split.hpp"

namespace ncricci {

struct RadialOptions {
    int degree_1d = 48;
    int degree_2d = 40;
    double tail_tol = 1e-14;
    bool interpolate = true;  // false: evaluate every kernel value by quadrature
    QuadratureOptions quad{};
};

class RadialIntegrator {
public:
    using Options = RadialOptions;

    explicit RadialIntegrator(const ModularSpectrum& sp, CurvatureFunctions cf = {}, Options opt = {})
        : sp_(sp), cf_(cf), opt_(opt) {
        const TorusElement& h = sp.dilaton;
        TorusElement l = 0.5 * h;
        for (int i = 1; i <= 2; ++i) {
            elems_[std::to_string(i)] = delta(i, l);
            for (int j = i; j <= 2; ++j) elems_[std::to_string(i) + std::to_string(j)] = delta(i, delta(j, l));
        }
        half_width_ = std::max(sp.spectral_radius(), 0.5) * 1.05;
        s_ = sp.cluster_values;
    }

    const TorusElement& element(const std::string& name) const { return elems_.at(name); }
    const ModularSpectrum& spectrum() const { return sp_; }

    SplitElement integrate(const RadialExpr& e) const {
        const int nc = static_cast<int>(s_.size());
        const auto& ctx = sp_.dilaton.context();
        std::map<GroupKey, Eigen::MatrixXcd> two;
        std::map<GroupKey, Eigen::VectorXcd> one;
        for (const auto& [key, coeff] : e) {
            cplx c = coeff.evaluate(ctx.tau1(), ctx.tau2());
            if (c == 0.0) continue;
            for (const auto& term : expand_word(key)) {
                GroupKey g{term.left_k, key.mat, term.elems[0], term.elems.size() > 1 ? term.elems[1] : ""};
                if (term.elems.size() == 1) {
                    Eigen::VectorXd I = kernel_values_1var(term.sig);
                    auto& acc = one.try_emplace(g, Eigen::VectorXcd::Zero(nc)).first->second;
                    for (int i = 0; i < nc; ++i) acc(i) += c * term.weight(s_[i], 0.0) * I(i);
                } else {
                    const Eigen::MatrixXd& I = kernel_values_2var(term.sig);
                    auto& acc = two.try_emplace(g, Eigen::MatrixXcd::Zero(nc, nc)).first->second;
                    for (int j = 0; j < nc; ++j)
                        for (int i = 0; i < nc; ++i) acc(i, j) += c * term.weight(s_[i], s_[j]) * I(i, j);
                }
            }
        }
        SplitElement out{TorusElement::zero(ctx), TorusElement::zero(ctx)};
        auto accumulate = [&](const GroupKey& g, const TorusElement& v) {
            TorusElement r = g.left_k == 0 ? v : mul(exp_sa((0.5 * g.left_k) * sp_.dilaton), v);
            (g.mat == MatrixPart::I ? out.id : out.sigma) = (g.mat == MatrixPart::I ? out.id : out.sigma) + r;
        };
        for (const auto& [g, w] : one) accumulate(g, apply_one_var_weights(sp_.expand_values(w), sp_, elems_.at(g.x)));
        for (const auto& [g, F] : two)
            accumulate(g, apply_two_var_matrix(sp_.expand_pairs(F), sp_, elems_.at(g.x), elems_.at(g.y)));
        return out;
    }

private:
    struct GroupKey {
        int left_k;
        MatrixPart mat;
        std::string x, y;
        auto operator<=>(const GroupKey&) const = default;
    };

    // p, B0 multiplicities per run, and for each run after a tag the number of spectral variables
    // in its shift (1: s, 2: s + t).
    struct Signature {
        int p;
        std::vector<int> m;
        std::vector<int> shift;
        auto operator<=>(const Signature&) const = default;
    };

    struct Term {
        int left_k;
        std::vector<std::string> elems;
        Signature sig;
        std::function<double(double, double)> weight;
    };

    struct Component {
        int a;
        std::vector<std::string> elems;
        double scale;
        std::function<double(double, double)> psi;
    };

    std::vector<Component> tag_components(const Atom& tag) const {
        const int q = tag.q;
        const CurvatureFunctions cf = cf_;
        auto phi = [q, cf](double s, double) { return 0.5 * q * cf.g(0.5 * q * s); };
        if (tag.dirs.size() == 1) return {{q, {tag.dirs}, 1.0, phi}};
        if (tag.dirs.size() == 2) {
            std::string i(1, tag.dirs[1]), j(1, tag.dirs[0]), ij = tag.dirs;
            std::sort(ij.begin(), ij.end());
            auto Phi = [q](double s, double t) { return exp_dd2(0.0, 0.5 * q * s, 0.5 * q * (s + t)); };
            return {{q, {ij}, 1.0, phi}, {q, {i, j}, double(q) * q, Phi}, {q, {j, i}, double(q) * q, Phi}};
        }
        throw Error("integrator", "tag " + atom_string(tag) + " has no modular rewrite");
    }

    std::vector<Term> expand_word(const RadialKey& key) const {
        // runs[i] = (k-power, B0 count) around the tags
        std::vector<std::pair<int, int>> runs(1, {0, 0});
        std::vector<Atom> tags;
        for (const auto& a : key.factors) {
            if (a.is_tag()) {
                tags.push_back(a);
                runs.push_back({0, 0});
            } else if (a.is_b0()) {
                ++runs.back().second;
            } else {
                runs.back().first += a.q;
            }
        }
        if (tags.empty() || tags.size() > 2)
            throw Error("integrator", "unsupported radial word " + word_string(key.factors));
        std::vector<std::vector<Component>> comps;
        for (const auto& t : tags) comps.push_back(tag_components(t));

        std::vector<Term> out;
        std::vector<std::size_t> pick(tags.size(), 0);
        while (true) {
            std::vector<const Component*> sel;
            for (std::size_t i = 0; i < tags.size(); ++i) sel.push_back(&comps[i][pick[i]]);
            out.push_back(make_term(key.r_power, runs, sel));
            std::size_t i = 0;
            while (i < pick.size() && ++pick[i] == comps[i].size()) pick[i++] = 0;
            if (i == pick.size()) break;
        }
        return out;
    }

    Term make_term(int p, const std::vector<std::pair<int, int>>& runs, const std::vector<const Component*>& sel) const {
        Term t;
        t.sig.p = p;
        int ksum = 0;
        for (const auto& [q, m] : runs) {
            ksum += q;
            t.sig.m.push_back(m);
        }
        std::vector<int> offset;
        std::vector<int> k_after;  // k-power passed by the elements of tag i
        double scale = 1.0;
        for (std::size_t i = 0; i < sel.size(); ++i) {
            ksum += sel[i]->a;
            offset.push_back(static_cast<int>(t.elems.size()));
            t.elems.insert(t.elems.end(), sel[i]->elems.begin(), sel[i]->elems.end());
            t.sig.shift.push_back(static_cast<int>(t.elems.size()));
            k_after.push_back(runs[i + 1].first + (i + 1 < sel.size() ? sel[i + 1]->a : 0));
            scale *= sel[i]->scale;
        }
        if (t.elems.size() > 2) throw Error("integrator", "radial word needs more than two spectral variables");
        t.left_k = ksum - (p + 1);
        std::vector<std::function<double(double, double)>> psi;
        for (auto* c : sel) psi.push_back(c->psi);
        std::vector<int> shift = t.sig.shift;
        t.weight = [=](double s, double u) {
            double w = scale;
            for (std::size_t i = 0; i < psi.size(); ++i) {
                double S = shift[i] == 1 ? s : s + u;
                w *= std::exp(0.5 * S * k_after[i]);
                if (offset[i] == 0)
                    w *= psi[i](s, u);  // elements start at variable s; a two-element tag gets (s, u)
                else
                    w *= psi[i](u, 0.0);
            }
            return w;
        };
        return t;
    }

    double kernel(const Signature& sig, double s, double t) const {
        std::vector<double> shifts;
        for (int c : sig.shift) shifts.push_back(c == 1 ? s : s + t);
        return radial_integral(sig.p, sig.m, shifts, opt_.quad);
    }

    // Interpolants. One-variable kernels (all shifts equal) are fitted in the shift variable itself.
    const Chebyshev& interpolant(const Signature& sig) const {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = cheb_.find(sig);
        if (it != cheb_.end()) return it->second;
        bool single = std::all_of(sig.shift.begin(), sig.shift.end(), [&](int c) { return c == sig.shift[0]; });
        Chebyshev fit;
        if (single) {
            auto f = [&](double x) { return kernel(Signature{sig.p, sig.m, std::vector<int>(sig.shift.size(), 1)}, x, 0.0); };
            for (int d = opt_.degree_1d;; d *= 2) {
                fit = Chebyshev::fit1(f, 2.0 * half_width_, d);
                if (fit.tail() < opt_.tail_tol || d >= 4 * opt_.degree_1d) break;
            }
        } else {
            auto f = [&](double s, double t) { return kernel(sig, s, t); };
            for (int d = opt_.degree_2d;; d *= 2) {
                fit = Chebyshev::fit2(f, half_width_, d);
                if (fit.tail() < opt_.tail_tol || d >= 2 * opt_.degree_2d) break;
            }
        }
        return cheb_.emplace(sig, std::move(fit)).first->second;
    }

    Eigen::VectorXd kernel_values_1var(const Signature& sig) const {
        if (!opt_.interpolate) {
            Signature one{sig.p, sig.m, std::vector<int>(sig.shift.size(), 1)};
            Eigen::VectorXd v(static_cast<Eigen::Index>(s_.size()));
            parallel_for(static_cast<int>(s_.size()), [&](int i) { v(i) = kernel(one, s_[i], 0.0); });
            return v;
        }
        return interpolant(sig).values(s_);
    }

    const Eigen::MatrixXd& kernel_values_2var(const Signature& sig) const {
        {
            std::lock_guard<std::mutex> lock(mu_);
            auto it = grid_.find(sig);
            if (it != grid_.end()) return it->second;
        }
        const int nc = static_cast<int>(s_.size());
        Eigen::MatrixXd v(nc, nc);
        if (!opt_.interpolate) {
            parallel_for(nc * nc, [&](int idx) { v(idx % nc, idx / nc) = kernel(sig, s_[idx % nc], s_[idx / nc]); });
            std::lock_guard<std::mutex> lock(mu_);
            return grid_.emplace(sig, std::move(v)).first->second;
        }
        const Chebyshev& f = interpolant(sig);
        bool single = std::all_of(sig.shift.begin(), sig.shift.end(), [&](int c) { return c == sig.shift[0]; });
        if (single) {
            // all shifts are s + t
            std::vector<double> sums(static_cast<std::size_t>(nc) * nc);
            for (int j = 0; j < nc; ++j)
                for (int i = 0; i < nc; ++i) sums[static_cast<std::size_t>(j) * nc + i] = s_[i] + s_[j];
            Eigen::VectorXd vals = f.values(sums);
            for (int j = 0; j < nc; ++j)
                for (int i = 0; i < nc; ++i) v(i, j) = vals(static_cast<Eigen::Index>(j) * nc + i);
        } else {
            v = f.grid(s_, s_);
        }
        std::lock_guard<std::mutex> lock(mu_);
        return grid_.emplace(sig, std::move(v)).first->second;
    }

    const ModularSpectrum& sp_;
    CurvatureFunctions cf_;
    Options opt_;
    std::map<std::string, TorusElement> elems_;
    double half_width_ = 1.0;
    std::vector<double> s_;
    mutable std::mutex mu_;
    mutable std::map<Signature, Chebyshev> cheb_;
    mutable std::map<Signature, Eigen::MatrixXd> grid_;
};

}  // namespace ncricci
