#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <vector>

#include "domred/errors.hpp"

namespace domred {

/// Result of a real Schur decomposition reordered so that a selected group of
/// eigenvalues occupies the leading diagonal blocks: A = U * T * U^T.
struct OrderedSchur {
    Eigen::MatrixXd T;  ///< quasi-upper-triangular
    Eigen::MatrixXd U;  ///< orthogonal
    int leading = 0;    ///< dimension of the invariant subspace of the selected group
};

namespace detail {

// Diagonal block of a real Schur form: start row and size (1 or 2).
struct SchurBlock {
    int pos;
    int size;
    bool selected;
};

inline std::complex<double> block_eigenvalue(const Eigen::MatrixXd& T, int pos, int size) {
    if (size == 1) return {T(pos, pos), 0.0};
    const double tr = T(pos, pos) + T(pos + 1, pos + 1);
    const double det = T(pos, pos) * T(pos + 1, pos + 1) - T(pos, pos + 1) * T(pos + 1, pos);
    const double disc = tr * tr / 4.0 - det;
    if (disc >= 0.0) return {tr / 2.0 + std::sqrt(disc), 0.0};
    return {tr / 2.0, std::sqrt(-disc)};
}

// Swaps the adjacent diagonal blocks at (i, i) of sizes p and q via an
// orthogonal similarity, updating T and U in place.
inline void swap_schur_blocks(Eigen::MatrixXd& T, Eigen::MatrixXd& U, int i, int p, int q) {
    const int n = static_cast<int>(T.rows());
    const int w = p + q;
    const Eigen::MatrixXd A11 = T.block(i, i, p, p);
    const Eigen::MatrixXd A12 = T.block(i, i + p, p, q);
    const Eigen::MatrixXd A22 = T.block(i + p, i + p, q, q);

    // Solve A11 X - X A22 = -A12 through the small Kronecker system, so that
    // the columns of [X; I] span the invariant subspace belonging to A22.
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(p * q, p * q);
    Eigen::VectorXd rhs(p * q);
    for (int c = 0; c < q; ++c)
        for (int r = 0; r < p; ++r) {
            rhs(c * p + r) = -A12(r, c);
            for (int k = 0; k < p; ++k) K(c * p + r, c * p + k) += A11(r, k);
            for (int k = 0; k < q; ++k) K(c * p + r, k * p + r) -= A22(k, c);
        }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
    if (!lu.isInvertible())
        throw SylvesterFailure("schur block swap: coincident eigenvalues across blocks");
    Eigen::VectorXd xv = lu.solve(rhs);
    Eigen::MatrixXd X(p, q);
    for (int c = 0; c < q; ++c)
        for (int r = 0; r < p; ++r) X(r, c) = xv(c * p + r);

    // Columns of [X; I] span the invariant subspace belonging to A22.
    Eigen::MatrixXd M(w, q);
    M.topRows(p) = X;
    M.bottomRows(q) = Eigen::MatrixXd::Identity(q, q);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(M);
    const Eigen::MatrixXd Q = qr.householderQ();

    T.block(i, i, w, n - i) = (Q.transpose() * T.block(i, i, w, n - i)).eval();
    T.block(0, i, i + w, w) = (T.block(0, i, i + w, w) * Q).eval();
    U.middleCols(i, w) = (U.middleCols(i, w) * Q).eval();
    T.block(i + q, i, p, q).setZero();
}

}  // namespace detail

/// Real Schur form of A with eigenvalues satisfying `select` moved to the
/// leading block. Complex conjugate pairs are kept together.
inline OrderedSchur ordered_real_schur(const Eigen::MatrixXd& A,
                                       const std::function<bool(std::complex<double>)>& select) {
    Eigen::RealSchur<Eigen::MatrixXd> schur(A);
    if (schur.info() != Eigen::Success) throw EigenFailure("real Schur iteration did not converge");
    OrderedSchur out;
    out.T = schur.matrixT();
    out.U = schur.matrixU();
    const int n = static_cast<int>(A.rows());

    std::vector<detail::SchurBlock> blocks;
    int row = 0;
    while (row < n) {
        int size = (row + 1 < n && out.T(row + 1, row) != 0.0) ? 2 : 1;
        const auto ev = detail::block_eigenvalue(out.T, row, size);
        blocks.push_back({row, size, select(ev)});
        row += size;
    }

    // Bubble selected blocks upward.
    bool moved = true;
    while (moved) {
        moved = false;
        for (std::size_t k = 0; k + 1 < blocks.size(); ++k) {
            if (!blocks[k].selected && blocks[k + 1].selected) {
                detail::swap_schur_blocks(out.T, out.U, blocks[k].pos, blocks[k].size,
                                          blocks[k + 1].size);
                std::swap(blocks[k].size, blocks[k + 1].size);
                std::swap(blocks[k].selected, blocks[k + 1].selected);
                blocks[k + 1].pos = blocks[k].pos + blocks[k].size;
                moved = true;
            }
        }
    }

    out.leading = 0;
    for (const auto& b : blocks)
        if (b.selected) out.leading += b.size;
    return out;
}

/// Solves the Sylvester equation A X + X B + C = 0 by complex Schur reduction
/// of both coefficient matrices and triangular back-substitution.
inline Eigen::MatrixXd solve_sylvester(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                       const Eigen::MatrixXd& C) {
    if (A.rows() != A.cols() || B.rows() != B.cols() || C.rows() != A.rows() ||
        C.cols() != B.cols())
        throw DimensionMismatch("solve_sylvester: incompatible dimensions");
    const int m = static_cast<int>(A.rows());
    const int n = static_cast<int>(B.rows());
    if (m == 0 || n == 0) return Eigen::MatrixXd::Zero(m, n);

    using CMat = Eigen::MatrixXcd;
    Eigen::ComplexSchur<CMat> sa(A.cast<std::complex<double>>());
    Eigen::ComplexSchur<CMat> sb(B.cast<std::complex<double>>());
    if (sa.info() != Eigen::Success || sb.info() != Eigen::Success)
        throw EigenFailure("complex Schur iteration did not converge");
    const CMat& T1 = sa.matrixT();
    const CMat& T2 = sb.matrixT();
    const CMat& U1 = sa.matrixU();
    const CMat& U2 = sb.matrixU();

    CMat D = -(U1.adjoint() * C.cast<std::complex<double>>() * U2);
    CMat Y(m, n);
    const double scale = T1.norm() + T2.norm() + 1.0;
    for (int j = 0; j < n; ++j) {
        Eigen::VectorXcd r = D.col(j);
        for (int k = 0; k < j; ++k) r -= Y.col(k) * T2(k, j);
        // (T1 + T2(j,j) I) y = r, upper triangular
        CMat Tj = T1;
        Tj.diagonal().array() += T2(j, j);
        for (int i = 0; i < m; ++i)
            if (std::abs(Tj(i, i)) < 1e-14 * scale)
                throw NearSingularSpectrum(
                    "solve_sylvester: spectra of A and -B nearly intersect");
        Y.col(j) = Tj.triangularView<Eigen::Upper>().solve(r);
    }
    return (U1 * Y * U2.adjoint()).real();
}

/// Solves A X + X A^T + M = 0 for stable A and symmetric psd M
/// (Bartels-Stewart). Throws UnstableA / NearSingularSpectrum on bad spectra.
inline Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& A, const Eigen::MatrixXd& M) {
    if (A.rows() != A.cols() || M.rows() != M.cols() || M.rows() != A.rows())
        throw DimensionMismatch("solve_lyapunov: incompatible dimensions");
    const int n = static_cast<int>(A.rows());
    if (n == 0) return Eigen::MatrixXd(0, 0);

    Eigen::EigenSolver<Eigen::MatrixXd> es(A, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success) throw EigenFailure("eigensolver did not converge");
    const auto eig = es.eigenvalues();
    const double spread = eig.cwiseAbs().maxCoeff() + 1.0;
    for (int i = 0; i < n; ++i) {
        if (eig(i).real() >= 0.0) throw UnstableA("solve_lyapunov: A is not Hurwitz");
        for (int j = i; j < n; ++j)
            if (std::abs(eig(i) + std::conj(eig(j))) < 1e-13 * spread)
                throw NearSingularSpectrum("solve_lyapunov: eigenvalue pair sums to zero");
    }

    Eigen::MatrixXd Ms = 0.5 * (M + M.transpose());
    Eigen::MatrixXd X = solve_sylvester(A, A.transpose(), Ms);
    return 0.5 * (X + X.transpose());
}

/// Frobenius-scaled residual of a Lyapunov solve, ||AX + XA^T + M||_F.
inline double lyapunov_residual(const Eigen::MatrixXd& A, const Eigen::MatrixXd& M,
                                const Eigen::MatrixXd& X) {
    return (A * X + X * A.transpose() + M).norm();
}

/// 2-norm condition number via SVD.
inline double condition_number(const Eigen::MatrixXd& A) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(s.size() - 1) == 0.0) return std::numeric_limits<double>::infinity();
    return s(0) / s(s.size() - 1);
}

}  // namespace domred
