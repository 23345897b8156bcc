#pragma once

// Matrix truncations of the Laplacians on Fourier modes |m|, |n| <= N, smeared heat traces and
// extraction of the constant heat coefficient a_2 by small-t fitting.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "algebra.hpp"
#include "kernels.hpp"
#include "modular.hpp"

namespace ncricci {

enum class OperatorTarget { Delta0, DeltaH0, DeltaH1, DeltaPhi01 };

inline OperatorTarget parse_operator_target(const std::string& s) {
    if (s == "delta0") return OperatorTarget::Delta0;
    if (s == "delta_h0" || s == "k_delta0_k") return OperatorTarget::DeltaH0;
    if (s == "delta_h1") return OperatorTarget::DeltaH1;
    if (s == "delta_phi01") return OperatorTarget::DeltaPhi01;
    throw InputError("spectral-lab", "unknown operator target '" + s + "'");
}

// Left multiplication by x, from grid `from` to grid `to`.
inline Eigen::MatrixXcd left_multiplication(const TorusElement& x, const TruncationGrid& from, const TruncationGrid& to) {
    const AlgebraContext& ctx = x.context();
    Eigen::MatrixXcd L = Eigen::MatrixXcd::Zero(to.dim(), from.dim());
    for (int col = 0; col < from.dim(); ++col) {
        Mode pq = from.mode(col);
        for (const auto& [ab, c] : x.terms()) {
            int m = ab.m + pq.m, n = ab.n + pq.n;
            if (to.contains(m, n)) L(to.index(m, n), col) += c * ctx.phase(static_cast<long long>(ab.n) * pq.m);
        }
    }
    return L;
}

inline Eigen::VectorXd derivation_diagonal(int j, const TruncationGrid& g) {
    Eigen::VectorXd d(g.dim());
    for (int i = 0; i < g.dim(); ++i) {
        Mode md = g.mode(i);
        d(i) = j == 1 ? md.m : md.n;
    }
    return d;
}

// Smallest band radius g with the l1 mass of x outside |m|, |n| <= g below tol |x|_1.
inline int auto_guard(const TorusElement& x, double tol = 1e-15) {
    const double total = x.norm_l1();
    for (int g = 0;; ++g) {
        double outside = 0.0;
        int reach = 0;
        for (const auto& [md, c] : x.terms()) {
            int r = std::max(std::abs(md.m), std::abs(md.n));
            reach = std::max(reach, r);
            if (r > g) outside += std::abs(c);
        }
        if (outside <= tol * total || g >= reach) return g;
    }
}

struct OperatorMatrix {
    OperatorTarget target = OperatorTarget::Delta0;
    TruncationGrid grid;
    int components = 1;              // 1 for functions, 2 for one-forms
    Eigen::MatrixXcd matrix;         // the operator in the monomial basis
    Eigen::VectorXd gram;            // diagonal of the inner product that makes `matrix` self-adjoint
    double restriction_loss = 0.0;   // l1 mass of k outside the guard band

    // S matrix S^{-1} with S = gram^{1/2}; Hermitian up to rounding.
    Eigen::MatrixXcd symmetrized() const {
        Eigen::VectorXd s = gram.cwiseSqrt();
        Eigen::MatrixXcd A = s.asDiagonal() * matrix * s.cwiseInverse().asDiagonal();
        return A;
    }
};

// Delta_0 = delta_1^2 + 2 tau1 delta_1 delta_2 + |tau|^2 delta_2^2, with eigenvalue |m + tau n|^2 on U^m V^n.
inline OperatorMatrix build_operator(OperatorTarget target, const TorusElement& h, const TruncationGrid& grid) {
    const AlgebraContext& ctx = h.context();
    if (!is_self_adjoint(h, 1e-10)) throw InputError("spectral-lab", "dilaton must be self-adjoint");
    const double t1 = ctx.tau1(), t2 = ctx.tau2(), abs2 = std::norm(ctx.tau);
    const cplx tau = ctx.tau;
    OperatorMatrix op;
    op.target = target;
    op.grid = grid;
    const int d = grid.dim();
    Eigen::VectorXd D1 = derivation_diagonal(1, grid), D2 = derivation_diagonal(2, grid);
    Eigen::VectorXd lap0 = (D1.array().square() + 2.0 * t1 * D1.array() * D2.array() + abs2 * D2.array().square()).matrix();

    switch (target) {
        case OperatorTarget::Delta0:
            op.matrix = lap0.cast<cplx>().asDiagonal();
            op.gram = Eigen::VectorXd::Ones(d);
            break;
        case OperatorTarget::DeltaH0: {
            // k Delta_0 k: the inner factor maps the core grid into a guard-banded grid, so only the
            // outer restriction truncates.
            TorusElement k = exp_sa(0.5 * h);
            const int guard = grid.guard > 0 ? grid.guard : auto_guard(k);
            op.grid.guard = guard;
            for (const auto& [md, c] : k.terms())
                if (std::abs(md.m) > guard || std::abs(md.n) > guard) op.restriction_loss += std::abs(c);
            TruncationGrid big{grid.N + guard, 0};
            Eigen::MatrixXcd Lin = left_multiplication(k, grid, big);
            Eigen::MatrixXcd Lout = left_multiplication(k, big, grid);
            Eigen::VectorXd D1b = derivation_diagonal(1, big), D2b = derivation_diagonal(2, big);
            Eigen::VectorXd lapb =
                (D1b.array().square() + 2.0 * t1 * D1b.array() * D2b.array() + abs2 * D2b.array().square()).matrix();
            op.matrix = Lout * lapb.cast<cplx>().asDiagonal() * Lin;
            op.gram = Eigen::VectorXd::Ones(d);
            break;
        }
        case OperatorTarget::DeltaPhi01: {
            // (delta_1 + tau delta_2) k^2 (delta_1 + conj(tau) delta_2)
            Eigen::MatrixXcd L = left_multiplication(exp_sa(h), grid, grid);
            Eigen::VectorXcd a = D1.cast<cplx>() + tau * D2.cast<cplx>();
            Eigen::VectorXcd b = D1.cast<cplx>() + std::conj(tau) * D2.cast<cplx>();
            op.matrix = a.asDiagonal() * L * b.asDiagonal();
            op.gram = Eigen::VectorXd::Ones(d);
            break;
        }
        case OperatorTarget::DeltaH1: {
            // (sum_ij c_ij delta_i k^2 delta_j) (x) I + (delta_1 k^2 delta_2 - delta_2 k^2 delta_1) (x) J,
            // J = [[0, tau2^2], [-1, 0]]; self-adjoint for the component weights (1, tau2^2).
            Eigen::MatrixXcd L = left_multiplication(exp_sa(h), grid, grid);
            auto DLD = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& y) -> Eigen::MatrixXcd {
                return x.cast<cplx>().asDiagonal() * L * y.cast<cplx>().asDiagonal();
            };
            Eigen::MatrixXcd A = DLD(D1, D1) + t1 * (DLD(D1, D2) + DLD(D2, D1)) + abs2 * DLD(D2, D2);
            Eigen::MatrixXcd X = DLD(D1, D2) - DLD(D2, D1);
            op.components = 2;
            op.matrix = Eigen::MatrixXcd::Zero(2 * d, 2 * d);
            op.matrix.block(0, 0, d, d) = A;
            op.matrix.block(d, d, d, d) = A;
            op.matrix.block(0, d, d, d) = (t2 * t2) * X;
            op.matrix.block(d, 0, d, d) = -X;
            op.gram = Eigen::VectorXd::Ones(2 * d);
            op.gram.tail(d).setConstant(t2 * t2);
            break;
        }
    }
    return op;
}

// Left action of F in A (x) M_2 on one-forms (matrix F_ij acting on components), or of a single
// element on functions.
inline Eigen::MatrixXcd smearing_matrix(const TorusElement& f, const TruncationGrid& g) {
    return left_multiplication(f, g, g);
}
inline Eigen::MatrixXcd smearing_matrix(const MatrixElement& F, const TruncationGrid& g) {
    const int d = g.dim();
    Eigen::MatrixXcd M(2 * d, 2 * d);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) M.block(i * d, j * d, d, d) = left_multiplication(F(i, j), g, g);
    return M;
}

// Eigen-decomposition of a truncated operator in its symmetrized frame.
class HeatKernel {
public:
    explicit HeatKernel(const OperatorMatrix& op) : op_(op) {
        Eigen::MatrixXcd A = op.symmetrized();
        hermitian_defect_ = (A - A.adjoint()).cwiseAbs().maxCoeff();
        Eigen::MatrixXcd Ah = 0.5 * (A + A.adjoint());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Ah);
        if (es.info() != Eigen::Success) throw Error("spectral-lab", "eigensolver failure");
        values_ = es.eigenvalues();
        vectors_ = es.eigenvectors();
    }

    const Eigen::VectorXd& eigenvalues() const { return values_; }
    const Eigen::MatrixXcd& eigenvectors() const { return vectors_; }
    const OperatorMatrix& op() const { return op_; }
    double hermitian_defect() const { return hermitian_defect_; }
    double lambda_max() const { return values_(values_.size() - 1); }

    // w_k = (V^* S M S^{-1} V)_kk, so that Tr(M e^{-tP}) = sum_k w_k e^{-t lambda_k}.
    Eigen::VectorXcd weights(const Eigen::MatrixXcd& M) const {
        if (M.rows() != vectors_.rows()) throw InputError("spectral-lab", "smearing matrix has the wrong size");
        Eigen::VectorXd s = op_.gram.cwiseSqrt();
        Eigen::MatrixXcd Ms = s.asDiagonal() * M * s.cwiseInverse().asDiagonal();
        Eigen::MatrixXcd MV = Ms * vectors_;
        Eigen::VectorXcd w(vectors_.cols());
        for (int k = 0; k < vectors_.cols(); ++k) w(k) = vectors_.col(k).dot(MV.col(k));
        return w;
    }
    Eigen::VectorXcd unit_weights() const { return Eigen::VectorXcd::Ones(values_.size()); }

    cplx trace(const Eigen::VectorXcd& w, double t) const {
        cplx s = 0.0;
        for (int k = 0; k < values_.size(); ++k) s += w(k) * std::exp(-t * values_(k));
        return s;
    }

    // Eigenvalues below 1e-9 lambda_max are kernel candidates; the split is accepted only if they sit
    // below thr times the first eigenvalue above them.
    int kernel_dimension(double thr = 1e-6) const {
        const double cut = 1e-9 * std::max(1.0, std::abs(lambda_max()));
        int n = 0;
        while (n < values_.size() && values_(n) < cut) ++n;
        if (n == values_.size()) throw Error("spectral-lab", "operator truncation is numerically zero");
        double top = 0.0;
        for (int k = 0; k < n; ++k) top = std::max(top, std::abs(values_(k)));
        if (n > 0 && top >= thr * values_(n))
            throw Error("spectral-lab", "kernel threshold ambiguous: gap between zero modes and first nonzero "
                                        "eigenvalue is below the threshold");
        return n;
    }

    // w restricted to the non-kernel eigenvalues.
    Eigen::VectorXcd nonzero_weights(const Eigen::VectorXcd& w, double thr = 1e-6) const {
        Eigen::VectorXcd out = w;
        out.head(kernel_dimension(thr)).setZero();
        return out;
    }

private:
    OperatorMatrix op_;
    Eigen::VectorXd values_;
    Eigen::MatrixXcd vectors_;
    double hermitian_defect_ = 0.0;
};

// t-window: geometric grid on [t_min, 4 t_min] with lambda_max t_min = 25.
inline std::vector<double> t_window(double lambda_max, int count = 9, double exponent = 25.0, double span = 4.0) {
    if (count < 4) throw InputError("spectral-lab", "t-window needs at least 4 samples");
    const double tmin = exponent / lambda_max;
    std::vector<double> t(count);
    for (int i = 0; i < count; ++i) t[i] = tmin * std::pow(span, double(i) / (count - 1));
    return t;
}

struct HeatSample {
    double t;
    double value;
};

struct HeatFit {
    std::vector<HeatSample> samples;
    double a0 = 0.0, a2 = 0.0, a4 = 0.0;
    double stderr_a2 = 0.0;  // least-squares standard error
    double stability = 0.0;  // |a2 change| when dropping the smallest or largest t
    double residual = 0.0;   // rms residual
    double error_bar() const { return std::max(stderr_a2, stability); }
};

namespace detail {
inline Eigen::Vector3d fit_model(const std::vector<HeatSample>& s, Eigen::Vector3d* se, double* rms) {
    const int n = static_cast<int>(s.size());
    Eigen::MatrixXd A(n, 3);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        A(i, 0) = 1.0 / s[i].t;
        A(i, 1) = 1.0;
        A(i, 2) = s[i].t;
        y(i) = s[i].value;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.singularValues()(2) < 1e-12 * svd.singularValues()(0))
        throw Error("spectral-lab", "ill-conditioned heat-trace fit");
    Eigen::Vector3d c = svd.solve(y);
    Eigen::VectorXd r = A * c - y;
    if (rms) *rms = std::sqrt(r.squaredNorm() / n);
    if (se) {
        double s2 = n > 3 ? r.squaredNorm() / (n - 3) : 0.0;
        Eigen::Matrix3d cov = s2 * (A.transpose() * A).inverse();
        *se = cov.diagonal().cwiseSqrt();
    }
    return c;
}
}  // namespace detail

// Least-squares fit of a0/t + a2 + a4 t.
inline HeatFit fit_a2(std::vector<HeatSample> samples) {
    if (samples.size() < 4) throw InputError("spectral-lab", "fit needs at least 4 samples");
    std::sort(samples.begin(), samples.end(), [](auto& a, auto& b) { return a.t < b.t; });
    if (!(samples.front().t > 0.0)) throw InputError("spectral-lab", "t samples must be positive");
    if (samples.back().t < 4.0 * samples.front().t * (1.0 - 1e-12))
        throw InputError("spectral-lab", "t samples must span at least a factor 4");
    HeatFit f;
    f.samples = samples;
    Eigen::Vector3d se;
    Eigen::Vector3d c = detail::fit_model(samples, &se, &f.residual);
    f.a0 = c(0);
    f.a2 = c(1);
    f.a4 = c(2);
    f.stderr_a2 = se(1);
    if (samples.size() >= 5) {
        std::vector<HeatSample> lo(samples.begin() + 1, samples.end()), hi(samples.begin(), samples.end() - 1);
        f.stability = std::max(std::abs(detail::fit_model(lo, nullptr, nullptr)(1) - f.a2),
                               std::abs(detail::fit_model(hi, nullptr, nullptr)(1) - f.a2));
    }
    return f;
}

// The operator trace counts lattice modes, i.e. integrates symbols against d_L xi, while the local
// densities c_n are normalized against (2 pi)^{-2} d_L xi. Spectral coefficients are divided by this
// factor before they are compared with local functionals.
inline constexpr double lattice_measure_factor = 4.0 * std::numbers::pi * std::numbers::pi;

struct SpectralOptions {
    int N = 16;
    int guard = 0;  // 0 picks the guard from the support of k
    int t_count = 9;
    double window_exponent = 25.0;
    double window_span = 4.0;
    double kernel_threshold = 1e-6;
    std::vector<double> t_grid;  // explicit grid; overrides the window rule when nonempty
};

struct ZetaResult {
    HeatFit nonzero_fit;       // fit of the difference trace with kernel modes removed
    double zeta0 = 0.0;        // zeta(0, gamma F~, D^2)
    double projection0 = 0.0;  // Tr(tr(F) Q_0)
    double projection1 = 0.0;  // Tr(F Q_1)
    double value() const { return zeta0 + projection0 - projection1; }
};

// Truncations of Delta_{h,0} and Delta_{h,1} with their eigen-decompositions, shared by all smearing
// endomorphisms.
class SpectralLab {
public:
    SpectralLab(const TorusElement& h, SpectralOptions opt) : h_(h), opt_(std::move(opt)) {
        if (opt_.N < 1) throw InputError("spectral-lab", "truncation N must be positive");
        TruncationGrid g{opt_.N, opt_.guard};
        std::vector<std::unique_ptr<HeatKernel>> k(2);
        parallel_for(2, [&](int i) {
            k[i] = std::make_unique<HeatKernel>(
                build_operator(i == 0 ? OperatorTarget::DeltaH0 : OperatorTarget::DeltaH1, h_, g));
        });
        functions_ = std::move(k[0]);
        one_forms_ = std::move(k[1]);
    }

    const HeatKernel& functions() const { return *functions_; }
    const HeatKernel& one_forms() const { return *one_forms_; }
    const SpectralOptions& options() const { return opt_; }
    const TruncationGrid& grid() const { return functions_->op().grid; }

    std::vector<double> t_grid() const {
        if (!opt_.t_grid.empty()) return opt_.t_grid;
        double lmax = std::max(functions_->lambda_max(), one_forms_->lambda_max());
        return t_window(lmax, opt_.t_count, opt_.window_exponent, opt_.window_span);
    }

    // Tr(tr(F) e^{-t Delta_{h,0}}) - Tr(F e^{-t Delta_{h,1}}) in local normalization.
    std::vector<HeatSample> difference_samples(const MatrixElement& F, bool nonzero_only = false) const {
        TruncationGrid g{opt_.N, 0};
        Eigen::VectorXcd w0 = functions_->weights(smearing_matrix(F.trace(), g));
        Eigen::VectorXcd w1 = one_forms_->weights(smearing_matrix(F, g));
        if (nonzero_only) {
            w0 = functions_->nonzero_weights(w0, opt_.kernel_threshold);
            w1 = one_forms_->nonzero_weights(w1, opt_.kernel_threshold);
        }
        std::vector<double> ts = t_grid();
        std::vector<HeatSample> out(ts.size());
        parallel_for(static_cast<int>(ts.size()), [&](int i) {
            cplx v = functions_->trace(w0, ts[i]) - one_forms_->trace(w1, ts[i]);
            out[i] = {ts[i], v.real() / lattice_measure_factor};
        });
        return out;
    }

    // a_2(tr(F), Delta_{h,0}) - a_2(F, Delta_{h,1}).
    HeatFit ricci_fit(const MatrixElement& F) const { return fit_a2(difference_samples(F)); }

    // Zeta-regularized route: constant term on the nonzero modes plus kernel projection traces.
    ZetaResult zeta_ricci(const MatrixElement& F) const {
        TruncationGrid g{opt_.N, 0};
        ZetaResult z;
        z.nonzero_fit = fit_a2(difference_samples(F, true));
        z.zeta0 = z.nonzero_fit.a2;
        Eigen::VectorXcd w0 = functions_->weights(smearing_matrix(F.trace(), g));
        Eigen::VectorXcd w1 = one_forms_->weights(smearing_matrix(F, g));
        const int n0 = functions_->kernel_dimension(opt_.kernel_threshold);
        const int n1 = one_forms_->kernel_dimension(opt_.kernel_threshold);
        z.projection0 = w0.head(n0).sum().real() / lattice_measure_factor;
        z.projection1 = w1.head(n1).sum().real() / lattice_measure_factor;
        return z;
    }

private:
    TorusElement h_;
    SpectralOptions opt_;
    std::unique_ptr<HeatKernel> functions_, one_forms_;
};

}  // namespace ncricci
