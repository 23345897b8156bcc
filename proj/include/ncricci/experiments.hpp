#pragma once

// End-to-end checks shared by the CLI and the acceptance runner.

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "ricci.hpp"
#include "spectral.hpp"
#include "symbol_eval.hpp"
#include "symbol_io.hpp"

namespace ncricci {

struct IdentityResidual {
    int n = 61;
    double half_width = 3.0;
    std::vector<double> residual;  // row-major over (s_i, t_j)
    double max = 0.0, mean = 0.0;
    double s_at(int i) const { return -half_width + 2.0 * half_width * i / (n - 1); }
};

// |F111 g_1 g - F121 g_2 g - S| on an n x n grid over [-L, L]^2.
inline IdentityResidual verify_s_identity(int n = 61, double L = 3.0, const CurvatureFunctions& cf = {}) {
    if (n < 2) throw InputError("integrator", "identity grid needs at least 2 points per axis");
    IdentityResidual r;
    r.n = n;
    r.half_width = L;
    r.residual.assign(static_cast<std::size_t>(n) * n, 0.0);
    parallel_for(n * n, [&](int idx) {
        double s = r.s_at(idx / n), t = r.s_at(idx % n);
        r.residual[idx] = std::abs(s_identity_lhs(s, t, cf) - cf.S(s, t));
    });
    for (double v : r.residual) {
        r.max = std::max(r.max, v);
        r.mean += v;
    }
    r.mean /= r.residual.size();
    return r;
}

struct GoldenCheck {
    std::vector<FlatTerm> expansion;  // b2'' from its defining formula
    MultisetDiff formula_vs_golden;
    MultisetDiff parametrix_vs_golden;  // sigma part of the generic b2 of Delta_{h,1}
    std::vector<FlatTerm> angular;
    MultisetDiff angular_vs_golden;
    bool ok() const { return formula_vs_golden.empty() && parametrix_vs_golden.empty() && angular_vs_golden.empty(); }
};

inline GoldenCheck b2_golden_check(const std::string& golden_dir) {
    GoldenCheck g;
    SymbolExpr b2pp = b2_doubleprime();
    g.expansion = flatten(b2pp);
    auto golden = load_golden(golden_dir + "/b2_doubleprime.json");
    g.formula_vs_golden = multiset_diff(g.expansion, golden);
    SymbolExpr generic =
        cached_parametrix(LaplacianTarget::DeltaH1).b2.matrix_part(MatrixPart::Sigma).with_matrix(MatrixPart::I);
    g.parametrix_vs_golden = multiset_diff(flatten(generic), golden);
    g.angular = flatten(angular_integrate(to_polar(b2pp)));
    g.angular_vs_golden = multiset_diff(g.angular, load_golden(golden_dir + "/b2_doubleprime_angular.json"));
    return g;
}

struct RicciComparison {
    RicciDensity theorem;
    RicciDensity pipeline;
    double diag_diff = 0.0;
    double offdiag_diff = 0.0;
    double max_diff() const { return std::max(diag_diff, offdiag_diff); }
};

inline RicciComparison compare_ricci(const TorusElement& h, int modular_N, const RadialOptions& ropt = {}) {
    ModularSpectrum sp = eigen_nabla(h, TruncationGrid{modular_N, 0});
    RadialIntegrator ri(sp, {}, ropt);
    RicciComparison c;
    c.theorem = ricci_density(ri);
    c.pipeline = ricci_density_pipeline(ri);
    c.diag_diff = (c.theorem.diagonal_part - c.pipeline.diagonal_part).max_abs();
    c.offdiag_diff = (c.theorem.offdiag_part - c.pipeline.offdiag_part).max_abs();
    return c;
}

// -(1/4 pi) Delta_0(l) e^h, the theta = 0 Ricci density.
inline TorusElement commutative_ricci(const TorusElement& h) {
    const auto& ctx = h.context();
    const double t1 = ctx.tau1(), abs2 = std::norm(ctx.tau);
    TorusElement l = 0.5 * h;
    TorusElement lap = delta(1, delta(1, l)) + (2.0 * t1) * delta(1, delta(2, l)) + abs2 * delta(2, delta(2, l));
    return (-1.0 / (4.0 * std::numbers::pi)) * mul(lap, exp_sa(h));
}

struct SpectralComparison {
    HeatFit fit;
    ZetaResult zeta;
    double local = 0.0;   // (1/tau2) phi(tr(F Ric) e^{-h})
    double scale = 0.0;   // (1/tau2) |tr(F Ric) e^{-h}|_1
    double denominator() const { return std::abs(local) >= 1e-3 * scale ? std::abs(local) : scale; }
    double rel_fit_local() const { return std::abs(fit.a2 - local) / denominator(); }
    double rel_zeta_local() const { return std::abs(zeta.value() - local) / denominator(); }
    double rel_fit_zeta() const { return std::abs(fit.a2 - zeta.value()) / denominator(); }
};

inline SpectralComparison spectral_compare(const SpectralLab& lab, const MatrixElement& F, const RicciDensity& ric,
                                           const TorusElement& h) {
    SpectralComparison c;
    c.fit = lab.ricci_fit(F);
    c.zeta = lab.zeta_ricci(F);
    c.local = ricci_functional(F, ric, h).real();
    c.scale = mul((F * ric.value).trace(), exp_sa(-h)).norm_l1() / h.context().tau2();
    return c;
}

struct RemainderScan {
    std::vector<int> j;
    std::vector<double> radius;
    std::vector<double> max_norm;  // max over angles of the largest coefficient of R(xi)
    double slope = 0.0;            // least-squares slope of log max_norm against log radius
};

inline RemainderScan parametrix_remainder_scan(const TorusElement& h, LaplacianTarget target, int j_lo = 4,
                                               int j_hi = 8, int angles = 8, double phase = 0.1) {
    if (j_hi <= j_lo || angles < 1) throw InputError("symbol-engine", "remainder scan needs two radii and one angle");
    SymbolEvaluator ev(h);
    const LaplacianSymbol a = laplacian_symbol(target);
    const Parametrix& p = cached_parametrix(target);
    const int nj = j_hi - j_lo + 1;
    std::vector<double> norms(static_cast<std::size_t>(nj) * angles);
    parallel_for(nj * angles, [&](int idx) {
        double r = std::ldexp(1.0, j_lo + idx / angles);
        double phi = phase + 2.0 * std::numbers::pi * (idx % angles) / angles;
        norms[idx] = parametrix_remainder(ev, a, p, r * std::cos(phi), r * std::sin(phi)).max_abs();
    });
    RemainderScan s;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < nj; ++i) {
        double m = 0.0;
        for (int k = 0; k < angles; ++k) m = std::max(m, norms[i * angles + k]);
        s.j.push_back(j_lo + i);
        s.radius.push_back(std::ldexp(1.0, j_lo + i));
        s.max_norm.push_back(m);
        double x = std::log(s.radius.back()), y = std::log(m);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    s.slope = (nj * sxy - sx * sy) / (nj * sxx - sx * sx);
    return s;
}

}  // namespace ncricci
