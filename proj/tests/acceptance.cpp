// Acceptance runner: one PASS/FAIL line per criterion. Exit status is nonzero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "ncricci/experiments.hpp"
#include "properties.hpp"
#include "series.hpp"

using namespace ncricci;

namespace {

struct Line {
    bool pass;
    std::string detail;
};

int failures = 0;

void run(int id, const char* name, const std::function<Line()>& fn) {
    auto t0 = std::chrono::steady_clock::now();
    Line r;
    try {
        r = fn();
    } catch (const std::exception& e) {
        r = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!r.pass) ++failures;
    std::printf("[%s] %d %s: %s (%.1f s)\n", r.pass ? "PASS" : "FAIL", id, name, r.detail.c_str(), secs);
    std::fflush(stdout);
}

double elapsed(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

TorusElement reference_dilaton(const AlgebraContext& ctx) {
    TorusElement U = TorusElement::U(ctx), V = TorusElement::V(ctx);
    return 0.3 * (U + adjoint(U) + V + adjoint(V));
}

AlgebraContext context(double theta) {
    AlgebraContext ctx;
    ctx.theta = theta;
    ctx.tau = {0.0, 1.0};
    ctx.prune_tol = 1e-14;
    return ctx;
}

}  // namespace

int main() {
    run(1, "S-identity", [] {
        auto t0 = std::chrono::steady_clock::now();
        IdentityResidual r = verify_s_identity(61, 3.0);
        double secs = elapsed(t0);
        char buf[160];
        std::snprintf(buf, sizeof buf, "max residual %.3e on 61x61 over [-3,3]^2 (tol 1e-8), runtime %.1f s (limit 30 s)",
                      r.max, secs);
        return Line{r.max < 1e-8 && secs < 30.0, buf};
    });

    run(2, "b2'' golden", [] {
        auto t0 = std::chrono::steady_clock::now();
        GoldenCheck g = b2_golden_check(NCRICCI_SOURCE_DIR "/data/golden");
        double secs = elapsed(t0);
        char buf[200];
        std::snprintf(buf, sizeof buf,
                      "%zu terms; diff formula/golden %zu+%zu, parametrix/golden %zu+%zu, angular %zu+%zu; runtime "
                      "%.1f s (limit 10 s)",
                      g.expansion.size(), g.formula_vs_golden.only_computed.size(),
                      g.formula_vs_golden.only_golden.size(), g.parametrix_vs_golden.only_computed.size(),
                      g.parametrix_vs_golden.only_golden.size(), g.angular_vs_golden.only_computed.size(),
                      g.angular_vs_golden.only_golden.size(), secs);
        return Line{g.ok() && secs < 10.0, buf};
    });

    run(3, "commutative limit", [] {
        AlgebraContext ctx = context(0.0);
        TorusElement U = TorusElement::U(ctx);
        TorusElement h = 0.5 * (U + adjoint(U));
        RicciComparison c = compare_ricci(h, 8);
        TorusElement expected = commutative_ricci(h);
        double d_thm = (c.theorem.diagonal_part - expected).max_abs();
        double d_pipe = (c.pipeline.diagonal_part - expected).max_abs();
        double off = std::max(c.theorem.offdiag_part.max_abs(), c.pipeline.offdiag_part.max_abs());
        double worst = std::max({d_thm, d_pipe, off});
        char buf[200];
        std::snprintf(buf, sizeof buf, "theorem %.2e, pipeline %.2e, sigma part %.2e vs -(1/4pi)Delta_0(l)e^h (tol 1e-8)",
                      d_thm, d_pipe, off);
        return Line{worst < 1e-8, buf};
    });

    run(4, "theorem vs pipeline", [] {
        auto t0 = std::chrono::steady_clock::now();
        AlgebraContext ctx = context(0.37);
        RicciComparison c = compare_ricci(reference_dilaton(ctx), 8);
        double secs = elapsed(t0);
        char buf[200];
        std::snprintf(buf, sizeof buf, "identity part %.2e, sigma part %.2e (tol 1e-8), runtime %.1f s (limit 120 s)",
                      c.diag_diff, c.offdiag_diff, secs);
        return Line{c.max_diff() < 1e-8 && secs < 120.0, buf};
    });

    run(5, "spectral oracle", [] {
        auto t0 = std::chrono::steady_clock::now();
        AlgebraContext ctx = context(0.37);
        TorusElement h = reference_dilaton(ctx);
        ModularSpectrum sp = eigen_nabla(h, TruncationGrid{8, 0});
        RadialIntegrator ri(sp);
        RicciDensity ric = ricci_density(ri);
        SpectralOptions so;
        so.N = 16;
        SpectralLab lab(h, so);
        std::mt19937_64 rng(20240917);
        MatrixElement FI = MatrixElement::identity_times(TorusElement::one(ctx));
        MatrixElement FR = random_self_adjoint_matrix(ctx, 2, 1.0, rng);
        SpectralComparison ci = spectral_compare(lab, FI, ric, h);
        SpectralComparison cr = spectral_compare(lab, FR, ric, h);
        double secs = elapsed(t0);
        char buf[400];
        std::snprintf(buf, sizeof buf,
                      "N=16, t in [%.4f, %.4f]; F=I2: a2 %.3e vs local %.3e, rel %.2e (floor %.3e); random F: a2 %.4e "
                      "vs local %.4e, rel %.2e; zeta route rel %.2e/%.2e (tol 5e-2); runtime %.0f s (limit 300 s)",
                      lab.t_grid().front(), lab.t_grid().back(), ci.fit.a2, ci.local, ci.rel_fit_local(), ci.scale,
                      cr.fit.a2, cr.local, cr.rel_fit_local(), ci.rel_zeta_local(), cr.rel_zeta_local(), secs);
        bool ok = ci.rel_fit_local() < 0.05 && cr.rel_fit_local() < 0.05 && secs < 300.0;
        return Line{ok, buf};
    });

    run(6, "flat case", [] {
        AlgebraContext ctx = context(0.37);
        TorusElement h = TorusElement::zero(ctx);
        RicciComparison c = compare_ricci(h, 8);
        double coeff = std::max(c.theorem.value.max_abs(), c.pipeline.value.max_abs());
        SpectralOptions so;
        so.N = 10;
        SpectralLab lab(h, so);
        std::mt19937_64 rng(7);
        MatrixElement F = random_self_adjoint_matrix(ctx, 2, 1.0, rng);
        HeatFit fit = lab.ricci_fit(F);
        char buf[200];
        std::snprintf(buf, sizeof buf, "max Ric coefficient %.2e (tol 1e-12); fitted a2 %.2e, stderr %.2e", coeff,
                      fit.a2, fit.stderr_a2);
        return Line{coeff < 1e-12 && std::abs(fit.a2) <= fit.stderr_a2, buf};
    });

    run(7, "parametrix remainder", [] {
        AlgebraContext ctx = context(0.37);
        RemainderScan s = parametrix_remainder_scan(reference_dilaton(ctx), LaplacianTarget::DeltaH1, 4, 8, 8);
        std::string norms;
        for (double m : s.max_norm) norms += fmt(" %.2e", m);
        char buf[300];
        std::snprintf(buf, sizeof buf, "Delta_h1, |xi| = 2^4..2^8, 8 angles, max |R|:%s; slope %.2f (limit -2.8)",
                      norms.c_str(), s.slope);
        return Line{s.slope <= -2.8, buf};
    });

    run(8, "algebra properties", [] {
        props::PropertyDefects d = props::check_many(100);
        char buf[300];
        std::snprintf(buf, sizeof buf,
                      "100 random inputs: Leibniz %.1e, trace %.1e, by parts %.1e, involution %.1e, "
                      "delta_j(k^2) %.1e (tol 1e-8)",
                      d.leibniz, d.trace, d.by_parts, d.involution, d.k_derivative);
        return Line{d.worst() < 1e-8, buf};
    });

    run(9, "scalar function values", [] {
        CurvatureFunctions cf;
        double k_oracle = static_cast<double>(series::k_at_zero());
        double s_oracle = static_cast<double>(series::s_at_zero(1, 1));
        double dk = std::abs(cf.K(0.0) - 1.0), ds = std::abs(cf.S(0.0, 0.0) - 2.0 / 3.0);
        double ok_oracle = std::abs(k_oracle - 1.0) + std::abs(s_oracle - 2.0 / 3.0);
        char buf[200];
        std::snprintf(buf, sizeof buf, "K(0) = %.15f (err %.1e), S(0,0) = %.15f (err %.1e); series oracles %.15f, %.15f",
                      cf.K(0.0), dk, cf.S(0.0, 0.0), ds, k_oracle, s_oracle);
        return Line{dk < 1e-10 && ds < 1e-10 && ok_oracle < 1e-15, buf};
    });

    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
