#pragma once

#include <Eigen/Dense>
#include <utility>

#include "domred/linalg.hpp"
#include "domred/lure.hpp"
#include "domred/spectral_split.hpp"
#include "domred/statespace.hpp"

namespace domred {

/// Reachability/observability gramians of the lambda-shifted system.
struct GramianPair {
    Eigen::MatrixXd P;
    Eigen::MatrixXd Q;
    double rate = 0.0;
};

/// Outcome of balanced truncation at a given rate.
struct ReductionResult {
    StateSpace reduced;
    Eigen::VectorXd hsv;        ///< Hankel singular values of the shifted system
    double error_bound = 0.0;   ///< 2 * sum of truncated tail
    Eigen::MatrixXd T;          ///< right projection, n x nu
    Eigen::MatrixXd W;          ///< left projection, n x nu (W^T T = I)
    double rate = 0.0;
    int dominant_order = 0;     ///< filled by reduce_dominant_lure
    bool rank_limited = false;  ///< requested order exceeded numerical rank
    int effective_order = 0;
};

/// Solves the shifted Lyapunov pair
///   (A + lambda I) P + P (A + lambda I)^T + B B^T = 0,
///   (A + lambda I)^T Q + Q (A + lambda I) + C^T C = 0.
/// Requires A + lambda I Hurwitz.
inline GramianPair shifted_gramians(const StateSpace& nondominant, double lambda) {
    Eigen::MatrixXd As = nondominant.A;
    As.diagonal().array() += lambda;
    GramianPair g;
    g.rate = lambda;
    g.P = solve_lyapunov(As, nondominant.B * nondominant.B.transpose());
    g.Q = solve_lyapunov(As.transpose(), nondominant.C.transpose() * nondominant.C);
    return g;
}

/// Square-root balanced truncation of the lambda-shifted system down to order
/// nu_minus. Cholesky factors of both gramians are combined through an SVD,
/// so the balancing transformation is never formed on near-singular gramians.
/// If nu_minus exceeds the numerical rank (sigma < 1e-13 sigma_1) the order is
/// clamped and `rank_limited` is set.
inline ReductionResult balance_and_truncate(const StateSpace& nondominant, double lambda,
                                            int nu_minus) {
    const int n = nondominant.order();
    if (nu_minus < 0 || nu_minus > n)
        throw OrderTooSmall("balance_and_truncate: target order out of range [0, n]");

    ReductionResult out;
    out.rate = lambda;
    if (n == 0) {
        out.reduced = nondominant;
        out.hsv = Eigen::VectorXd(0);
        out.T = Eigen::MatrixXd(0, 0);
        out.W = Eigen::MatrixXd(0, 0);
        return out;
    }

    const GramianPair g = shifted_gramians(nondominant, lambda);
    // Square roots of the (possibly numerically rank-deficient) gramians via
    // eigendecomposition: P = Lp Lp^T with tiny negative eigenvalues clamped.
    // A strict Cholesky would reject fast-decaying Hankel spectra outright.
    const auto psd_factor = [](const Eigen::MatrixXd& M, const char* what) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
        const double emax = es.eigenvalues().cwiseAbs().maxCoeff();
        if (es.eigenvalues().minCoeff() < -1e-10 * (1.0 + emax))
            throw NearSingularSpectrum(std::string("balance_and_truncate: ") + what +
                                       " gramian is indefinite");
        const Eigen::VectorXd sq = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
        return Eigen::MatrixXd(es.eigenvectors() * sq.asDiagonal());
    };
    const Eigen::MatrixXd Lp = psd_factor(g.P, "reachability");
    const Eigen::MatrixXd Lq = psd_factor(g.Q, "observability");

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Lq.transpose() * Lp,
                                          Eigen::ComputeFullU | Eigen::ComputeFullV);
    out.hsv = svd.singularValues();

    int rank = 0;
    while (rank < n && out.hsv(rank) > 1e-13 * out.hsv(0)) ++rank;
    int nu = nu_minus;
    if (nu > rank) {
        nu = rank;
        out.rank_limited = true;
    }
    out.effective_order = nu;

    const Eigen::VectorXd sinv_sqrt = out.hsv.head(nu).cwiseSqrt().cwiseInverse();
    out.T = Lp * svd.matrixV().leftCols(nu) * sinv_sqrt.asDiagonal();
    out.W = Lq * svd.matrixU().leftCols(nu) * sinv_sqrt.asDiagonal();

    out.reduced = StateSpace(out.W.transpose() * nondominant.A * out.T,
                             out.W.transpose() * nondominant.B, nondominant.C * out.T);
    out.error_bound = 2.0 * out.hsv.tail(n - nu).sum();
    return out;
}

/// Algorithm: split the linear block at rate lambda, balance-truncate the
/// non-dominant part to order nu - p, and reassemble with the dominant block
/// (and the static nonlinearity) untouched.
inline std::pair<LureModel, ReductionResult> reduce_dominant_lure(const LureModel& model,
                                                                  double lambda, int nu) {
    const SpectralSplit sp = split(model.linear, lambda);
    if (nu < sp.p)
        throw OrderTooSmall("reduce_dominant_lure: nu = " + std::to_string(nu) +
                            " is below the dominant degree p = " + std::to_string(sp.p));
    const int nu_minus = std::min(nu - sp.p, sp.nondominant.order());

    ReductionResult red = balance_and_truncate(sp.nondominant, lambda, nu_minus);
    red.dominant_order = sp.p;

    const int p = sp.p;
    const int r = red.reduced.order();
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(p + r, p + r);
    A.topLeftCorner(p, p) = sp.dominant.A;
    A.bottomRightCorner(r, r) = red.reduced.A;
    Eigen::MatrixXd B(p + r, 2);
    B.topRows(p) = sp.dominant.B;
    B.bottomRows(r) = red.reduced.B;
    Eigen::MatrixXd C(2, p + r);
    C.leftCols(p) = sp.dominant.C;
    C.rightCols(r) = red.reduced.C;

    LureModel reduced_model(StateSpace(std::move(A), std::move(B), std::move(C)), model.phi);
    return {std::move(reduced_model), std::move(red)};
}

}  // namespace domred
