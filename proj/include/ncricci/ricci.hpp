#pragma once

// The second heat coefficient densities c_2, the scalar curvature R^gamma and the Ricci density,
// assembled both from the closed-form spectral functions and from the raw symbol pipeline.

#include <array>
#include <numbers>

#include "rearrange.hpp"
#include "symbol.hpp"

namespace ncricci {

// sigma = [[i tau2, tau2^2], [-1, i tau2]]; sigma^2 = 2 i tau2 sigma.
inline std::array<cplx, 4> sigma_matrix(double tau2) { return {cplx(0, tau2), tau2 * tau2, -1.0, cplx(0, tau2)}; }

// Ric = diagonal (x) I + offdiag (x) sigma.
struct RicciDensity {
    TorusElement diagonal_part;
    TorusElement offdiag_part;
    MatrixElement value;
};

inline RicciDensity make_ricci(TorusElement diag, TorusElement off) {
    double tau2 = diag.context().tau2();
    MatrixElement v = MatrixElement::identity_times(diag) + MatrixElement::tensor(off, sigma_matrix(tau2));
    return RicciDensity{std::move(diag), std::move(off), std::move(v)};
}

inline const Parametrix& cached_parametrix(LaplacianTarget target) {
    static const std::array<Parametrix, 3> table = {parametrix(laplacian_symbol(LaplacianTarget::DeltaH1)),
                                                    parametrix(laplacian_symbol(LaplacianTarget::DeltaPhi01)),
                                                    parametrix(laplacian_symbol(LaplacianTarget::KDelta0K))};
    return table[static_cast<int>(target)];
}

inline RadialExpr radial_words(LaplacianTarget target) {
    return angular_integrate(to_polar(cached_parametrix(target).b2));
}

// c_2(P) = int b_2(xi, -1) d xi, split into its I and sigma parts.
inline SplitElement c2(LaplacianTarget target, const RadialIntegrator& ri) { return ri.integrate(radial_words(target)); }

// Orientation of the box_Im term in R^gamma. The symbol calculus here (VU = e^{2 pi i theta} UV,
// delta_1 U = U, nabla = -[h, .]) produces box_Im = -i tau2 [d1 l, d2 l]; the literal sign is
// i tau2 [d1 l, d2 l] and differs from c_2(k Delta_0 k) - c_2(Delta_phi) at second order.
enum class BoxImSign { Calculus, Literal };

// R^gamma = -(pi/tau2) (K(nabla)(Delta_0 l) + H(nabla_1, nabla_2)(box_Re l) + S(nabla_1, nabla_2)(box_Im l)) e^h
inline TorusElement r_gamma(const RadialIntegrator& ri, const CurvatureFunctions& cf = {},
                            BoxImSign sign = BoxImSign::Calculus) {
    const ModularSpectrum& sp = ri.spectrum();
    const auto& ctx = sp.dilaton.context();
    const double t1 = ctx.tau1(), t2 = ctx.tau2(), abs2 = t1 * t1 + t2 * t2;
    TorusElement lap = ri.element("11") + (2.0 * t1) * ri.element("12") + abs2 * ri.element("22");
    TorusElement sum = apply_one_var([&](double u) { return cf.K(u); }, sp, lap);

    Eigen::MatrixXcd H = sp.sample([&](double s, double t) { return cf.H(s, t); }).cast<cplx>();
    Eigen::MatrixXcd S = sp.sample([&](double s, double t) { return cf.S(s, t); }).cast<cplx>();
    const cplx i_t2(0.0, sign == BoxImSign::Calculus ? -t2 : t2);
    const Eigen::MatrixXcd F[2][2] = {{H, t1 * H + i_t2 * S}, {t1 * H - i_t2 * S, abs2 * H}};
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            sum += apply_two_var_matrix(F[a][b], sp, ri.element(std::to_string(a + 1)), ri.element(std::to_string(b + 1)));
    return (-std::numbers::pi / t2) * mul(sum, exp_sa(sp.dilaton));
}

// S(nabla_1, nabla_2)([delta_1 l, delta_2 l])
inline TorusElement s_commutator_term(const RadialIntegrator& ri, const CurvatureFunctions& cf = {}) {
    const ModularSpectrum& sp = ri.spectrum();
    Eigen::MatrixXcd S = sp.sample([&](double s, double t) { return cf.S(s, t); }).cast<cplx>();
    return apply_two_var_matrix(S, sp, ri.element("1"), ri.element("2")) -
           apply_two_var_matrix(S, sp, ri.element("2"), ri.element("1"));
}

// Closed-form assembly: Ric = (tau2/4pi^2) R^gamma (x) I - (1/4pi) S(nabla_1, nabla_2)([d1 l, d2 l]) e^h (x) sigma.
inline RicciDensity ricci_density(const RadialIntegrator& ri, const CurvatureFunctions& cf = {},
                                  BoxImSign sign = BoxImSign::Calculus) {
    const ModularSpectrum& sp = ri.spectrum();
    const double pi = std::numbers::pi, t2 = sp.dilaton.context().tau2();
    TorusElement diag = (t2 / (4 * pi * pi)) * r_gamma(ri, cf, sign);
    TorusElement off = (-1.0 / (4 * pi)) * mul(s_commutator_term(ri, cf), exp_sa(sp.dilaton));
    return make_ricci(std::move(diag), std::move(off));
}

// Raw pipeline: Ric = tau2 (c_2(Delta_{h,0}) (x) I - c_2(Delta_{h,1})) e^h with Delta_{h,0} = k Delta_0 k.
inline RicciDensity ricci_density_pipeline(const RadialIntegrator& ri) {
    const ModularSpectrum& sp = ri.spectrum();
    const double t2 = sp.dilaton.context().tau2();
    TorusElement eh = exp_sa(sp.dilaton);
    SplitElement c0 = c2(LaplacianTarget::KDelta0K, ri);
    SplitElement c1 = c2(LaplacianTarget::DeltaH1, ri);
    TorusElement diag = t2 * mul(c0.id - c1.id, eh);
    TorusElement off = (-t2) * mul(c1.sigma, eh);
    return make_ricci(std::move(diag), std::move(off));
}

// Ric(F) = (1/tau2) phi(tr(F Ric) e^{-h})
inline cplx ricci_functional(const MatrixElement& F, const RicciDensity& ric, const TorusElement& h) {
    TorusElement tr = (F * ric.value).trace();
    return trace_phi(mul(tr, exp_sa(-h))) / h.context().tau2();
}

}  // namespace ncricci
