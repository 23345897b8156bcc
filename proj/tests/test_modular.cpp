#include <catch_amalgamated.hpp>

#include <random>

#include "ncricci/modular.hpp"
#include "ncricci/scalar_functions.hpp"

using namespace ncricci;

namespace {
struct Fixture {
    AlgebraContext ctx;
    TorusElement h;
    Fixture() {
        ctx.theta = 0.37;
        TorusElement U = TorusElement::U(ctx), V = TorusElement::V(ctx);
        h = 0.3 * (U + adjoint(U) + V + adjoint(V));
    }
};
}  // namespace

TEST_CASE("nabla matrix is Hermitian and its eigen-decomposition reconstructs it") {
    Fixture f;
    ModularSpectrum sp = eigen_nabla(f.h, TruncationGrid{6, 0});
    CHECK(sp.reconstruction_error < 1e-12);
    Eigen::MatrixXcd A = nabla_matrix(f.h, TruncationGrid{6, 0});
    CHECK((A - A.adjoint()).cwiseAbs().maxCoeff() < 1e-14);
    // spectrum is symmetric: nabla(a^*) = -nabla(a)^*
    CHECK(std::abs(sp.eigenvalues(0) + sp.eigenvalues(sp.eigenvalues.size() - 1)) < 1e-10);
}

TEST_CASE("identity function reproduces nabla") {
    Fixture f;
    ModularSpectrum sp = eigen_nabla(f.h, TruncationGrid{8, 0});
    TorusElement a = delta(1, f.h) + TorusElement::monomial(f.ctx, 1, 1, 0.2);
    TorusElement lhs = apply_one_var([](double s) { return s; }, sp, a);
    CHECK((lhs - nabla(f.h, a)).max_abs() < 1e-12);
}

TEST_CASE("exp of nabla is the modular automorphism e^{-h} a e^{h}") {
    Fixture f;
    ModularSpectrum sp = eigen_nabla(f.h, TruncationGrid{10, 0});
    TorusElement a = delta(2, f.h);
    TorusElement lhs = apply_one_var([](double s) { return std::exp(s); }, sp, a);
    CHECK((lhs - modular_delta(f.h, a)).max_abs() < 1e-10);
}

TEST_CASE("two-variable calculus factorizes on product functions") {
    Fixture f;
    ModularSpectrum sp = eigen_nabla(f.h, TruncationGrid{10, 0});
    TorusElement a = delta(1, f.h), b = delta(2, f.h);
    auto F = [](double s) { return std::tanh(s) + 1.0; };
    auto G = [](double t) { return std::exp(-t * t); };
    TorusElement lhs = apply_two_var([&](double s, double t) { return F(s) * G(t); }, sp, a, b);
    TorusElement rhs = mul(apply_one_var(F, sp, a), apply_one_var(G, sp, b));
    CHECK((lhs - rhs).max_abs() < 1e-10);
}

TEST_CASE("derivative of k^2 through the modular operator") {
    Fixture f;
    // grid truncation error is 5e-10 at N = 8 and 1e-12 at N = 10
    ModularSpectrum sp = eigen_nabla(f.h, TruncationGrid{10, 0});
    CurvatureFunctions cf;
    TorusElement k2 = exp_sa(f.h);
    for (int j = 1; j <= 2; ++j) {
        TorusElement rhs = mul(k2, apply_one_var([&](double s) { return cf.g(s); }, sp, delta(j, 0.5 * f.h)));
        CHECK((delta(j, k2) - rhs).max_abs() < 1e-10);
        // delta_j(k) = k f(nabla)(delta_j l)
        TorusElement k = exp_sa(0.5 * f.h);
        TorusElement rk = mul(k, apply_one_var([&](double s) { return cf.f(s); }, sp, delta(j, 0.5 * f.h)));
        CHECK((delta(j, k) - rk).max_abs() < 1e-10);
    }
}

TEST_CASE("commutative dilaton has a trivial modular operator") {
    AlgebraContext c;
    c.theta = 0.0;
    TorusElement U = TorusElement::U(c);
    TorusElement h = 0.5 * (U + adjoint(U));
    ModularSpectrum sp = eigen_nabla(h, TruncationGrid{4, 0});
    CHECK(sp.eigenvalues.cwiseAbs().maxCoeff() < 1e-12);
    CHECK(sp.cluster_values.size() == 1);
}

TEST_CASE("modular-calculus input errors") {
    Fixture f;
    CHECK_THROWS_AS(eigen_nabla(cplx(0, 1) * f.h, TruncationGrid{4, 0}), InputError);
    TorusElement far = TorusElement::monomial(f.ctx, 5, 0) + TorusElement::monomial(f.ctx, -5, 0);
    CHECK_THROWS_AS(eigen_nabla(far, TruncationGrid{4, 0}), InputError);
}
