#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <limits>
#include <string>

#include "domred/errors.hpp"

namespace domred {

using ComplexMatrix = Eigen::MatrixXcd;

/// Linear time-invariant system (A, B, C) with transfer function C(sI-A)^{-1}B.
/// Immutable value type: construct once, share freely.
struct StateSpace {
    Eigen::MatrixXd A;
    Eigen::MatrixXd B;
    Eigen::MatrixXd C;

    StateSpace() = default;

    StateSpace(Eigen::MatrixXd A_, Eigen::MatrixXd B_, Eigen::MatrixXd C_)
        : A(std::move(A_)), B(std::move(B_)), C(std::move(C_)) {
        if (A.rows() != A.cols())
            throw DimensionMismatch("StateSpace: A must be square");
        if (B.rows() != A.rows())
            throw DimensionMismatch("StateSpace: B must have as many rows as A");
        if (C.cols() != A.rows())
            throw DimensionMismatch("StateSpace: C must have as many columns as A");
        if (!A.allFinite() || !B.allFinite() || !C.allFinite())
            throw DimensionMismatch("StateSpace: matrices contain non-finite entries");
    }

    int order() const { return static_cast<int>(A.rows()); }
    int inputs() const { return static_cast<int>(B.cols()); }
    int outputs() const { return static_cast<int>(C.rows()); }
};

/// Eigenvalue counts of A relative to the vertical line Re(s) = -rate.
struct ModeClassification {
    Eigen::VectorXcd eigenvalues;
    double rate = 0.0;
    int p_dominant = 0;      ///< eigenvalues with Re > -rate (outside tolerance band)
    int n_nondominant = 0;   ///< eigenvalues with Re < -rate
    int boundary_count = 0;  ///< eigenvalues within tol of the line
};

/// Scale-aware default tolerance for boundary detection on Re(s) = -rate.
inline double default_boundary_tol(const StateSpace& sys) {
    double rho = 0.0;
    if (sys.order() > 0) {
        Eigen::EigenSolver<Eigen::MatrixXd> es(sys.A, false);
        if (es.info() != Eigen::Success) throw EigenFailure("eigensolver did not converge");
        rho = es.eigenvalues().cwiseAbs().maxCoeff();
    }
    return 1e-9 * (1.0 + rho);
}

/// Evaluates G(s) = C(sI-A)^{-1}B with one LU solve against B.
inline ComplexMatrix eval_transfer(const StateSpace& sys, std::complex<double> s) {
    const int n = sys.order();
    ComplexMatrix R = -sys.A.cast<std::complex<double>>();
    R.diagonal().array() += s;
    Eigen::PartialPivLU<ComplexMatrix> lu(R);
    if (n > 0 && lu.rcond() < std::numeric_limits<double>::epsilon())
        throw SingularResolvent("eval_transfer: sI - A is numerically singular at s = (" +
                                std::to_string(s.real()) + ", " + std::to_string(s.imag()) + ")");
    return sys.C.cast<std::complex<double>>() * lu.solve(sys.B.cast<std::complex<double>>());
}

/// Shifted system (A + lambda I, B, C); its transfer function is G(s - lambda).
inline StateSpace shift(const StateSpace& sys, double lambda) {
    Eigen::MatrixXd As = sys.A;
    As.diagonal().array() += lambda;
    return {std::move(As), sys.B, sys.C};
}

/// Partitions spec(A) against the line Re(s) = -lambda. tol <= 0 picks the
/// scale-aware default.
inline ModeClassification classify_modes(const StateSpace& sys, double lambda, double tol = -1.0) {
    if (tol <= 0.0) tol = default_boundary_tol(sys);
    Eigen::EigenSolver<Eigen::MatrixXd> es(sys.A, false);
    if (es.info() != Eigen::Success) throw EigenFailure("eigensolver did not converge");
    ModeClassification mc;
    mc.eigenvalues = es.eigenvalues();
    mc.rate = lambda;
    for (int i = 0; i < mc.eigenvalues.size(); ++i) {
        const double shifted = mc.eigenvalues(i).real() + lambda;
        if (std::abs(shifted) <= tol)
            ++mc.boundary_count;
        else if (shifted > 0.0)
            ++mc.p_dominant;
        else
            ++mc.n_nondominant;
    }
    return mc;
}

/// Realization of the error system G - Ghat: block-diagonal state map with
/// stacked inputs and output row [C, -Chat].
inline StateSpace compose_error(const StateSpace& full, const StateSpace& reduced) {
    if (full.inputs() != reduced.inputs() || full.outputs() != reduced.outputs())
        throw DimensionMismatch("compose_error: input/output dimensions differ");
    const int n = full.order();
    const int nu = reduced.order();
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n + nu, n + nu);
    A.topLeftCorner(n, n) = full.A;
    A.bottomRightCorner(nu, nu) = reduced.A;
    Eigen::MatrixXd B(n + nu, full.inputs());
    B.topRows(n) = full.B;
    B.bottomRows(nu) = reduced.B;
    Eigen::MatrixXd C(full.outputs(), n + nu);
    C.leftCols(n) = full.C;
    C.rightCols(nu) = -reduced.C;
    return {std::move(A), std::move(B), std::move(C)};
}

}  // namespace domred
