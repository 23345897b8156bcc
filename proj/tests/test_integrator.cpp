#include <catch_amalgamated.hpp>

#include <boost/math/quadrature/gauss.hpp>

#include <cmath>

#include "ncricci/experiments.hpp"
#include "ncricci/symbol_eval.hpp"
#include "series.hpp"

using namespace ncricci;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// int_0^inf u du / prod_i (1 + a_i u) by partial fractions, a = (1, e^s, e^{s+t}).
double f111_partial_fractions(double s, double t) {
    const double a[3] = {1.0, std::exp(s), std::exp(s + t)};
    double sum = 0.0;
    for (int i = 0; i < 3; ++i) {
        double c = -1.0 / a[i];
        for (int j = 0; j < 3; ++j)
            if (j != i) c /= 1.0 - a[j] / a[i];
        sum += c / a[i] * std::log(a[i]);
    }
    return sum;
}

// F121 = -d/da of the same integral at the middle weight, by a central difference in s.
double f121_partial_fractions(double s, double t) {
    const double e = 1e-5;
    double up = f111_partial_fractions(s + e, t - e), dn = f111_partial_fractions(s - e, t + e);
    return -(up - dn) / (std::exp(s + e) - std::exp(s - e));
}

TorusElement dilaton(const AlgebraContext& c, double a, double b) {
    TorusElement U = TorusElement::U(c), V = TorusElement::V(c);
    return a * (U + adjoint(U)) + b * (V + adjoint(V));
}

}  // namespace

TEST_CASE("K(0) and S(0,0) agree with exact rational series") {
    CurvatureFunctions cf;
    CHECK(series::k_at_zero() == 1);
    CHECK(series::s_at_zero(1, 1) == boost::multiprecision::cpp_rational(2, 3));
    CHECK_THAT(cf.K(0.0), WithinAbs(static_cast<double>(series::k_at_zero()), 1e-14));
    CHECK_THAT(cf.S(0.0, 0.0), WithinAbs(static_cast<double>(series::s_at_zero(1, 1)), 1e-14));
}

TEST_CASE("radial kernels at the origin") {
    CHECK_THAT(F111(0.0, 0.0), WithinAbs(0.5, 1e-12));
    CHECK_THAT(F121(0.0, 0.0), WithinAbs(1.0 / 3.0, 1e-12));
}

TEST_CASE("radial kernels against partial fractions") {
    for (auto [s, t] : {std::pair{0.7, -1.3}, {-1.9, 0.4}, {2.5, 1.1}, {-0.6, -2.2}}) {
        CAPTURE(s, t);
        CHECK_THAT(F111(s, t), WithinRel(f111_partial_fractions(s, t), 1e-10));
        CHECK_THAT(F121(s, t), WithinRel(f121_partial_fractions(s, t), 1e-7));
    }
}

TEST_CASE("S identity on a coarse grid") {
    IdentityResidual r = verify_s_identity(13, 3.0);
    CHECK(r.max < 1e-8);
    CHECK_THROWS_AS(verify_s_identity(1), InputError);
}

TEST_CASE("series branches join the closed forms at the Taylor radius") {
    CurvatureFunctions cf;
    const double r = cf.taylor_radius;
    for (double u : {r * (1 - 1e-9), -r * (1 - 1e-9)}) {
        CHECK_THAT(cf.K(u), WithinAbs(CurvatureFunctions::K_closed(u), 1e-10));
        for (double s : {0.8, -1.7}) {
            CAPTURE(u, s);
            CHECK_THAT(cf.S(s, u - s), WithinAbs(CurvatureFunctions::S_closed(s, u - s), 1e-9));
            CHECK_THAT(cf.H(s, u - s), WithinAbs(CurvatureFunctions::H_closed(s, u - s), 1e-9));
        }
    }
    // S is even under swapping its arguments and finite across s + t = 0
    CHECK_THAT(cf.S(0.9, -0.9), WithinAbs(cf.S(-0.9, 0.9), 1e-12));
    CHECK(std::isfinite(cf.S(1.3, -1.3)));
    CHECK_THAT(cf.g(1e-4), WithinAbs(2.0 * std::expm1(1e-4) / 1e-4, 1e-14));
}

TEST_CASE("interpolated kernels agree with direct quadrature") {
    AlgebraContext c;
    c.theta = 0.37;
    ModularSpectrum sp = eigen_nabla(dilaton(c, 0.2, 0.1), TruncationGrid{4, 0});
    RadialOptions direct;
    direct.interpolate = false;
    RadialIntegrator fast(sp), slow(sp, {}, direct);
    SplitElement a = c2(LaplacianTarget::DeltaH1, fast), b = c2(LaplacianTarget::DeltaH1, slow);
    CHECK((a - b).max_abs() < 1e-9 * (1.0 + a.max_abs()));
}

TEST_CASE("theorem and pipeline agree and reduce to the commutative density at theta = 0") {
    AlgebraContext c;
    c.theta = 0.0;
    c.tau = {0.3, 0.9};
    TorusElement h = dilaton(c, 0.4, 0.2);
    RicciComparison cmp = compare_ricci(h, 6);
    CHECK(cmp.max_diff() < 1e-8);
    CHECK((cmp.theorem.diagonal_part - commutative_ricci(h)).max_abs() < 1e-8);
    CHECK(cmp.theorem.offdiag_part.max_abs() < 1e-8);
}

TEST_CASE("flat dilaton has zero Ricci density") {
    AlgebraContext c;
    c.theta = 0.37;
    RicciComparison cmp = compare_ricci(TorusElement::zero(c), 4);
    CHECK(cmp.theorem.value.max_abs() < 1e-12);
    CHECK(cmp.pipeline.value.max_abs() < 1e-12);
}

TEST_CASE("c2 of Delta_h1 against direct integration of b2 over the xi plane", "[xi]") {
    AlgebraContext c;
    c.theta = 0.37;
    c.tau = {0.2, 1.1};
    TorusElement h = dilaton(c, 0.25, 0.15);
    ModularSpectrum sp = eigen_nabla(h, TruncationGrid{8, 0});
    RadialIntegrator ri(sp);
    SplitElement radial = c2(LaplacianTarget::DeltaH1, ri);

    // (2 pi)^{-2} int b2(xi) d xi in polar form, r = x/(1-x) with Gauss-Legendre in x, uniform angles.
    SymbolEvaluator ev(h);
    const SymbolExpr& b2 = cached_parametrix(LaplacianTarget::DeltaH1).b2;
    const int angles = 16;
    boost::math::quadrature::gauss<double, 30> gq;
    std::vector<std::pair<double, double>> nodes;  // (x, weight) on (0, 1)
    for (std::size_t i = 0; i < gq.abscissa().size(); ++i)
        for (int sg : {-1, 1}) {
            if (gq.abscissa()[i] == 0.0 && sg < 0) continue;
            nodes.push_back({0.5 * (1.0 + sg * gq.abscissa()[i]), 0.5 * gq.weights()[i]});
        }
    const int n = angles * static_cast<int>(nodes.size());
    std::vector<SplitElement> parts(n, SplitElement::zero(c));
    parallel_for(n, [&](int idx) {
        auto [x, w] = nodes[idx % nodes.size()];
        double phi = 2.0 * std::numbers::pi * (idx / static_cast<int>(nodes.size())) / angles;
        double r = x / (1.0 - x), jac = 1.0 / ((1.0 - x) * (1.0 - x));
        double weight = w * jac * r * (2.0 * std::numbers::pi / angles) / (4.0 * std::numbers::pi * std::numbers::pi);
        parts[idx] = cplx(weight) * ev.evaluate(b2, r * std::cos(phi), r * std::sin(phi));
    });
    SplitElement direct = SplitElement::zero(c);
    for (const auto& p : parts) direct += p;
    CHECK((direct.id - radial.id).max_abs() < 1e-7);
    CHECK((direct.sigma - radial.sigma).max_abs() < 1e-7);
    CHECK(radial.id.max_abs() > 1e-3);
}
