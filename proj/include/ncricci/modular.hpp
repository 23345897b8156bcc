#pragma once

// The modular operator nabla = -[h, .] on a truncated monomial basis and its functional calculus.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "algebra.hpp"

namespace ncricci {

// Modes U^m V^n with |m|, |n| <= N; guard is extra room used by operator builds.
struct TruncationGrid {
    int N = 10;
    int guard = 0;

    int side() const { return 2 * N + 1; }
    int dim() const { return side() * side(); }
    bool contains(int m, int n) const { return std::abs(m) <= N && std::abs(n) <= N; }
    int index(int m, int n) const { return (m + N) * side() + (n + N); }
    Mode mode(int idx) const { return Mode{idx / side() - N, idx % side() - N}; }
};

inline TorusElement nabla(const TorusElement& h, const TorusElement& a) { return mul(a, h) - mul(h, a); }

// Delta(a) = e^{-h} a e^{h}
inline TorusElement modular_delta(const TorusElement& h, const TorusElement& a) {
    return mul(mul(exp_sa(-h), a), exp_sa(h));
}

// Matrix of nabla in the monomial basis, compressed to the grid. Hermitian for self-adjoint h.
inline Eigen::MatrixXcd nabla_matrix(const TorusElement& h, const TruncationGrid& grid) {
    const AlgebraContext& ctx = h.context();
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(grid.dim(), grid.dim());
    for (int col = 0; col < grid.dim(); ++col) {
        Mode pq = grid.mode(col);
        for (const auto& [ab, c] : h.terms()) {
            int m = pq.m + ab.m, n = pq.n + ab.n;
            if (!grid.contains(m, n)) continue;
            // U^p V^q h - h U^p V^q on the monomial U^a V^b of h
            cplx w = ctx.phase(static_cast<long long>(pq.n) * ab.m) - ctx.phase(static_cast<long long>(ab.n) * pq.m);
            A(grid.index(m, n), col) += c * w;
        }
    }
    return A;
}

class ModularSpectrum {
public:
    TorusElement dilaton;
    TruncationGrid grid;
    Eigen::VectorXd eigenvalues;    // ascending
    Eigen::MatrixXcd eigenvectors;  // columns, orthonormal under hs_inner
    std::vector<int> cluster_of;    // eigenvalue index -> cluster index
    std::vector<double> cluster_values;
    double reconstruction_error = 0.0;

    int dim() const { return grid.dim(); }

    Eigen::VectorXcd to_vector(const TorusElement& a) const {
        Eigen::VectorXcd v = Eigen::VectorXcd::Zero(grid.dim());
        for (const auto& [md, c] : a.terms()) {
            if (!grid.contains(md.m, md.n))
                throw InputError("modular-calculus", "element support exceeds the truncation grid");
            v(grid.index(md.m, md.n)) = c;
        }
        return v;
    }
    TorusElement from_vector(const Eigen::VectorXcd& v) const {
        std::vector<TorusElement::Term> t;
        for (int i = 0; i < v.size(); ++i)
            if (v(i) != 0.0) t.push_back({grid.mode(i), v(i)});
        return TorusElement(dilaton.context(), std::move(t));
    }

    // Cluster-indexed matrix expanded to all eigenvalue pairs.
    Eigen::MatrixXcd expand_pairs(const Eigen::MatrixXcd& Fc) const {
        const int d = static_cast<int>(eigenvalues.size());
        Eigen::MatrixXcd out(d, d);
        for (int j = 0; j < d; ++j)
            for (int i = 0; i < d; ++i) out(i, j) = Fc(cluster_of[i], cluster_of[j]);
        return out;
    }
    Eigen::VectorXcd expand_values(const Eigen::VectorXcd& wc) const {
        Eigen::VectorXcd out(eigenvalues.size());
        for (int i = 0; i < out.size(); ++i) out(i) = wc(cluster_of[i]);
        return out;
    }
    double spectral_radius() const {
        return eigenvalues.size() ? std::max(std::abs(eigenvalues(0)), std::abs(eigenvalues(eigenvalues.size() - 1)))
                                  : 0.0;
    }

    // fn evaluated once per eigenvalue cluster, expanded to all eigenvalues.
    Eigen::VectorXd sample(const std::function<double(double)>& fn) const {
        std::vector<double> vals(cluster_values.size());
        for (std::size_t c = 0; c < vals.size(); ++c) {
            vals[c] = fn(cluster_values[c]);
            if (!std::isfinite(vals[c]))
                throw Error("modular-calculus", "function undefined at eigenvalue " + std::to_string(cluster_values[c]));
        }
        Eigen::VectorXd out(eigenvalues.size());
        for (int i = 0; i < out.size(); ++i) out(i) = vals[cluster_of[i]];
        return out;
    }
    Eigen::MatrixXd sample(const std::function<double(double, double)>& fn2) const {
        const int nc = static_cast<int>(cluster_values.size());
        Eigen::MatrixXd c(nc, nc);
        for (int i = 0; i < nc; ++i)
            for (int j = 0; j < nc; ++j) {
                c(i, j) = fn2(cluster_values[i], cluster_values[j]);
                if (!std::isfinite(c(i, j)))
                    throw Error("modular-calculus", "function undefined on spectral pair (" +
                                                        std::to_string(cluster_values[i]) + ", " +
                                                        std::to_string(cluster_values[j]) + ")");
            }
        const int d = static_cast<int>(eigenvalues.size());
        Eigen::MatrixXd out(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) out(i, j) = c(cluster_of[i], cluster_of[j]);
        return out;
    }
};

inline ModularSpectrum eigen_nabla(const TorusElement& h, const TruncationGrid& grid, double cluster_tol = 1e-9) {
    if (!is_self_adjoint(h, 1e-10)) throw InputError("modular-calculus", "dilaton must be self-adjoint");
    for (const auto& [md, c] : h.terms())
        if (!grid.contains(md.m, md.n)) throw InputError("modular-calculus", "dilaton support exceeds the grid");
    ModularSpectrum sp;
    sp.dilaton = h;
    sp.grid = grid;
    Eigen::MatrixXcd A = nabla_matrix(h, grid);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(A);
    if (es.info() != Eigen::Success) throw Error("modular-calculus", "eigensolver failure");
    sp.eigenvalues = es.eigenvalues();
    sp.eigenvectors = es.eigenvectors();
    sp.reconstruction_error =
        (sp.eigenvectors * sp.eigenvalues.asDiagonal() * sp.eigenvectors.adjoint() - A).cwiseAbs().maxCoeff();
    sp.cluster_of.resize(sp.eigenvalues.size());
    int start = 0;
    for (int i = 0; i <= sp.eigenvalues.size(); ++i) {
        if (i == sp.eigenvalues.size() || (i > start && sp.eigenvalues(i) - sp.eigenvalues(i - 1) > cluster_tol)) {
            double mean = sp.eigenvalues.segment(start, i - start).mean();
            for (int k = start; k < i; ++k) sp.cluster_of[k] = static_cast<int>(sp.cluster_values.size());
            sp.cluster_values.push_back(mean);
            start = i;
        }
    }
    return sp;
}

// sum_i w_i P_i(a) for weights given per eigenvalue.
inline TorusElement apply_one_var_weights(const Eigen::VectorXcd& w, const ModularSpectrum& sp, const TorusElement& a) {
    Eigen::VectorXcd alpha = sp.eigenvectors.adjoint() * sp.to_vector(a);
    return sp.from_vector(sp.eigenvectors * (w.asDiagonal() * alpha));
}

// sum_i fn(s_i) P_i(a)
inline TorusElement apply_one_var(const std::function<double(double)>& fn, const ModularSpectrum& sp,
                                  const TorusElement& a) {
    Eigen::VectorXcd alpha = sp.eigenvectors.adjoint() * sp.to_vector(a);
    Eigen::VectorXd w = sp.sample(fn);
    return sp.from_vector(sp.eigenvectors * (w.cast<cplx>().asDiagonal() * alpha));
}

// sum_{ij} F_{ij} P_i(a) P_j(b) for a kernel matrix F sampled on eigenvalue pairs.
inline TorusElement apply_two_var_matrix(const Eigen::MatrixXcd& F, const ModularSpectrum& sp, const TorusElement& a,
                                         const TorusElement& b) {
    const TruncationGrid& g = sp.grid;
    const AlgebraContext& ctx = sp.dilaton.context();
    Eigen::VectorXcd alpha = sp.eigenvectors.adjoint() * sp.to_vector(a);
    Eigen::VectorXcd beta = sp.eigenvectors.adjoint() * sp.to_vector(b);
    Eigen::MatrixXcd G = alpha.asDiagonal() * F * beta.asDiagonal();
    Eigen::MatrixXcd M = sp.eigenvectors * (G * sp.eigenvectors.transpose());

    // M(p, q) is the coefficient of U^p V^p' (left) times U^q V^q' (right).
    const int N = g.N, S = 4 * N + 1;
    std::vector<cplx> ph(static_cast<std::size_t>(g.side()) * g.side());
    for (int n = -N; n <= N; ++n)
        for (int m = -N; m <= N; ++m)
            ph[static_cast<std::size_t>(n + N) * g.side() + (m + N)] = ctx.phase(static_cast<long long>(n) * m);
    std::vector<cplx> acc(static_cast<std::size_t>(S) * S, cplx(0.0));
    for (int p = 0; p < g.dim(); ++p) {
        Mode mp = g.mode(p);
        const cplx* row = &ph[static_cast<std::size_t>(mp.n + N) * g.side()];
        for (int q = 0; q < g.dim(); ++q) {
            Mode mq = g.mode(q);
            acc[static_cast<std::size_t>(mp.m + mq.m + 2 * N) * S + (mp.n + mq.n + 2 * N)] +=
                M(p, q) * row[mq.m + N];
        }
    }
    std::vector<TorusElement::Term> t;
    for (int i = 0; i < S; ++i)
        for (int j = 0; j < S; ++j) {
            cplx c = acc[static_cast<std::size_t>(i) * S + j];
            if (c != 0.0) t.push_back({Mode{i - 2 * N, j - 2 * N}, c});
        }
    return TorusElement(ctx, std::move(t));
}

// sum_{ij} fn2(s_i, t_j) P_i(a) P_j(b); nabla_1 acts on the left factor, nabla_2 on the right.
inline TorusElement apply_two_var(const std::function<double(double, double)>& fn2, const ModularSpectrum& sp,
                                  const TorusElement& a, const TorusElement& b) {
    return apply_two_var_matrix(sp.sample(fn2).cast<cplx>(), sp, a, b);
}

}  // namespace ncricci
