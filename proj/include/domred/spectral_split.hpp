#pragma once

#include <Eigen/Dense>
#include <complex>

#include "domred/linalg.hpp"
#include "domred/statespace.hpp"

namespace domred {

/// Block-diagonal decomposition of an LTI system at rate lambda:
/// the dominant block carries the eigenvalues with Re > -lambda, the
/// non-dominant block the ones with Re < -lambda, and G = G^+ + G^- (parallel).
struct SpectralSplit {
    StateSpace dominant;
    StateSpace nondominant;
    Eigen::MatrixXd T;  ///< change of coordinates: T^{-1} A T = blkdiag(A+, A-)
    double rate = 0.0;
    int p = 0;
    double cond_T = 1.0;
};

/// Splits `sys` at rate lambda via an ordered real Schur form followed by a
/// Sylvester decoupling of the off-diagonal coupling block. Throws
/// BoundaryEigenvalue when an eigenvalue sits within tol of Re(s) = -lambda.
inline SpectralSplit split(const StateSpace& sys, double lambda, double tol = -1.0) {
    const auto mc = classify_modes(sys, lambda, tol);
    if (mc.boundary_count > 0)
        throw BoundaryEigenvalue("split: eigenvalue on the line Re(s) = -" +
                                 std::to_string(lambda));
    const int n = sys.order();
    const int p = mc.p_dominant;

    const auto schur = ordered_real_schur(
        sys.A, [lambda](std::complex<double> ev) { return ev.real() > -lambda; });
    if (schur.leading != p)
        throw EigenFailure("split: Schur reordering disagrees with mode classification");

    Eigen::MatrixXd T = schur.U;
    if (p > 0 && p < n) {
        const Eigen::MatrixXd T11 = schur.T.topLeftCorner(p, p);
        const Eigen::MatrixXd T12 = schur.T.topRightCorner(p, n - p);
        const Eigen::MatrixXd T22 = schur.T.bottomRightCorner(n - p, n - p);
        // T11 Z - Z T22 + T12 = 0 zeroes the coupling block.
        const Eigen::MatrixXd Z = solve_sylvester(T11, -T22, T12);
        Eigen::MatrixXd S = Eigen::MatrixXd::Identity(n, n);
        S.topRightCorner(p, n - p) = Z;
        T = schur.U * S;
    }

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(T);
    const Eigen::MatrixXd Bt = lu.solve(sys.B);
    const Eigen::MatrixXd Abd = lu.solve(sys.A * T);
    const Eigen::MatrixXd Ct = sys.C * T;

    SpectralSplit out;
    out.rate = lambda;
    out.p = p;
    out.T = T;
    out.cond_T = condition_number(T);
    out.dominant = StateSpace(Abd.topLeftCorner(p, p), Bt.topRows(p), Ct.leftCols(p));
    out.nondominant =
        StateSpace(Abd.bottomRightCorner(n - p, n - p), Bt.bottomRows(n - p), Ct.rightCols(n - p));
    return out;
}

}  // namespace domred
