#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "ncricci/experiments.hpp"

using namespace ncricci;

namespace {
const std::string golden_dir = NCRICCI_SOURCE_DIR "/data/golden";

AlgebraContext reference_context() {
    AlgebraContext c;
    c.theta = 0.37;
    return c;
}
TorusElement reference_dilaton(const AlgebraContext& c) {
    TorusElement U = TorusElement::U(c), V = TorusElement::V(c);
    return 0.3 * (U + adjoint(U) + V + adjoint(V));
}
}  // namespace

TEST_CASE("expanded b2'' matches the golden transcription as a multiset") {
    GoldenCheck g = b2_golden_check(golden_dir);
    CHECK(g.formula_vs_golden.empty());
    CHECK(g.parametrix_vs_golden.empty());
    CHECK(g.angular_vs_golden.empty());
    CHECK(g.angular.size() == 4);
}

TEST_CASE("a golden file with one perturbed coefficient differs in exactly one term") {
    nlohmann::json j;
    {
        std::ifstream in(golden_dir + "/b2_doubleprime.json");
        in >> j;
    }
    j["terms"][3]["coeff"] = "17";
    auto dir = std::filesystem::temp_directory_path() / "ncricci_golden_perturbed";
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "b2_doubleprime.json") << j.dump();
    auto diff = multiset_diff(flatten(b2_doubleprime()), load_golden((dir / "b2_doubleprime.json").string()));
    CHECK(diff.only_computed.size() == 1);
    CHECK(diff.only_golden.size() == 1);
}

TEST_CASE("golden terms round-trip through JSON") {
    for (const auto& t : flatten(b2_doubleprime())) {
        FlatTerm back = flat_term_from_json(flat_term_to_json(t));
        CHECK(back == t);
    }
}

TEST_CASE("Laplacian symbols") {
    LaplacianSymbol h1 = laplacian_symbol(LaplacianTarget::DeltaH1);
    LaplacianSymbol phi = laplacian_symbol(LaplacianTarget::DeltaPhi01);
    LaplacianSymbol k0k = laplacian_symbol(LaplacianTarget::KDelta0K);
    CHECK(h1.a0.is_zero());
    CHECK(phi.a0.is_zero());
    CHECK_FALSE(k0k.a0.is_zero());  // k Delta_0(k)
    CHECK(h1.a2 == phi.a2);
    CHECK(h1.a2 == k0k.a2);
    CHECK(h1.a1.matrix_part(MatrixPart::I) == phi.a1);
    CHECK(parse_target("delta_h1") == LaplacianTarget::DeltaH1);
    CHECK_THROWS_AS(parse_target("nope"), InputError);
}

TEST_CASE("parametrix homogeneity and structure") {
    for (auto target : {LaplacianTarget::DeltaH1, LaplacianTarget::DeltaPhi01, LaplacianTarget::KDelta0K}) {
        const Parametrix& p = cached_parametrix(target);
        CHECK(p.b0.size() == 1);
        for (int n = 0; n <= 2; ++n) {
            const SymbolExpr& b = n == 0 ? p.b0 : n == 1 ? p.b1 : p.b2;
            for (const auto& [key, c] : b.terms()) CHECK(key.order() == -n - 2);
        }
    }
    // The identity part of b2 for Delta_{h,1} is b2 of Delta_phi: sigma never squares into I.
    const Parametrix& h1 = cached_parametrix(LaplacianTarget::DeltaH1);
    const Parametrix& phi = cached_parametrix(LaplacianTarget::DeltaPhi01);
    CHECK(h1.b2.matrix_part(MatrixPart::I) == phi.b2);
}

TEST_CASE("composition of differential symbols") {
    // delta_1 o k^2 = k^2 delta_1 + delta_1(k^2)
    SymbolExpr xi1 = SymbolExpr::word(1, 1, 0, {});
    SymbolExpr k2 = SymbolExpr::word(1, 0, 0, {Atom::kpow(2)});
    SymbolExpr expected = SymbolExpr::word(1, 1, 0, {Atom::kpow(2)}) + tag_word(1, 0, 0, 2, "1");
    CHECK(compose(xi1, k2, 2) == expected);
    // d_xi B0 = -B0 k^2 (dQ) B0
    SymbolExpr d = xi_derivative(SymbolExpr::b0(), 2);
    for (const auto& [key, c] : d.terms()) CHECK(key.b0_count() == 2);
}

TEST_CASE("tag depth is enforced") {
    SymbolExpr t = tag_word(1, 0, 0, 2, "12");
    CHECK_THROWS_AS(delta(t, 1), Error);
    CHECK_NOTHROW(delta(t, 1, 3));
}

TEST_CASE("sigma algebra: sigma^2 = 2 i tau2 sigma") {
    SymbolExpr s = SymbolExpr::word(1, 0, 0, {}, MatrixPart::Sigma);
    SymbolExpr sq = s * s;
    REQUIRE(sq.size() == 1);
    CHECK(sq.terms().begin()->first.mat == MatrixPart::Sigma);
    cplx c = sq.terms().begin()->second.evaluate(0.3, 1.7);
    CHECK(std::abs(c - cplx(0, 2 * 1.7)) < 1e-14);
    auto m = sigma_matrix(1.7);
    // numeric sigma^2 - 2 i tau2 sigma
    cplx s2[4] = {m[0] * m[0] + m[1] * m[2], m[0] * m[1] + m[1] * m[3], m[2] * m[0] + m[3] * m[2],
                  m[2] * m[1] + m[3] * m[3]};
    for (int i = 0; i < 4; ++i) CHECK(std::abs(s2[i] - cplx(0, 2 * 1.7) * m[i]) < 1e-13);
}

TEST_CASE("numeric symbol evaluation: b0 inverts k^2 Q + 1") {
    AlgebraContext c = reference_context();
    SymbolEvaluator ev(reference_dilaton(c));
    double x1 = 3.0, x2 = -1.5;
    TorusElement B = ev.b0(x1, x2);
    TorusElement a = ev.quadratic_form(x1, x2) * ev.kpow(2) + TorusElement::one(c);
    CHECK((mul(a, B) - TorusElement::one(c)).max_abs() < 1e-12);
    SplitElement e = ev.evaluate(SymbolExpr::b0(), x1, x2);
    CHECK((e.id - B).max_abs() < 1e-14);
    CHECK_THROWS_AS(ev.b0(0.0, 0.0), InputError);
}

TEST_CASE("parametrix remainder decays at least like |xi|^-3") {
    AlgebraContext c = reference_context();
    for (auto target : {LaplacianTarget::DeltaPhi01, LaplacianTarget::KDelta0K}) {
        RemainderScan s = parametrix_remainder_scan(reference_dilaton(c), target, 4, 6, 2);
        CHECK(s.slope <= -2.8);
    }
}

TEST_CASE("dropping b2 leaves a remainder of order -2") {
    // Dropping b2 must worsen the decay to |xi|^-2: a negative control for the remainder check.
    AlgebraContext c = reference_context();
    SymbolEvaluator ev(reference_dilaton(c));
    LaplacianSymbol a = laplacian_symbol(LaplacianTarget::DeltaH1);
    Parametrix p = cached_parametrix(LaplacianTarget::DeltaH1);
    p.b2 = SymbolExpr();
    double r1 = parametrix_remainder(ev, a, p, 32.0, 0.0).max_abs();
    double r2 = parametrix_remainder(ev, a, p, 64.0, 0.0).max_abs();
    double slope = std::log2(r2 / r1);
    CHECK(slope > -2.5);
    CHECK(slope < -1.5);
}
