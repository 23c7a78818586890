#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <ostream>
#include <vector>

#include "domred/linalg.hpp"
#include "domred/lure.hpp"
#include "domred/spectral_split.hpp"
#include "domred/statespace.hpp"

namespace domred {

/// H_{infty,p} norm: sup over omega of sigma_max(G_lambda(i omega)), together
/// with the number p of shifted-unstable poles. The pair (gamma, p) is always
/// reported with the rate it was computed at.
struct HinfResult {
    double gamma = 0.0;
    double rate = 0.0;
    int p = 0;
    double peak_frequency = 0.0;
};

namespace detail {

inline double sigma_max(const ComplexMatrix& M) {
    if (M.rows() == 1 && M.cols() == 1) return std::abs(M(0, 0));
    Eigen::JacobiSVD<ComplexMatrix> svd(M);
    return svd.singularValues()(0);
}

}  // namespace detail

/// Computes the H_{infty,p} norm of `sys` at rate lambda by level-set
/// iteration on the imaginary eigenvalues of the Hamiltonian matrix of the
/// shifted system (valid for any hyperbolic A, stable or not).
inline HinfResult hinf_p_norm(const StateSpace& sys, double lambda, double tol = 1e-6) {
    if (tol < 1e-12) throw BisectionStall("hinf_p_norm: tol below 1e-12 is not resolvable");
    const auto mc = classify_modes(sys, lambda);
    if (mc.boundary_count > 0)
        throw BoundaryPole("hinf_p_norm: pole on the axis Re(s) = -" + std::to_string(lambda));

    HinfResult res;
    res.rate = lambda;
    res.p = mc.p_dominant;
    const int n = sys.order();
    if (n == 0 || sys.B.norm() == 0.0 || sys.C.norm() == 0.0) return res;

    const StateSpace S = shift(sys, lambda);
    const auto sig = [&](double w) { return detail::sigma_max(eval_transfer(S, {0.0, w})); };

    // Lower bound from candidate frequencies: DC, eigenvalue magnitudes and
    // imaginary parts, and a coarse log sweep.
    double rho = 1.0;
    std::vector<double> candidates{0.0};
    for (int i = 0; i < mc.eigenvalues.size(); ++i) {
        const std::complex<double> mu = mc.eigenvalues(i) + lambda;
        rho = std::max(rho, std::abs(mu));
        if (std::abs(mu) > 0.0) candidates.push_back(std::abs(mu));
        if (std::abs(mu.imag()) > 0.0) candidates.push_back(std::abs(mu.imag()));
    }
    for (int k = 0; k <= 60; ++k)
        candidates.push_back(rho * std::pow(10.0, -3.0 + 6.0 * k / 60.0));

    double lb = 0.0;
    for (double w : candidates) {
        const double s = sig(w);
        if (s > lb) {
            lb = s;
            res.peak_frequency = w;
        }
    }
    if (lb < 1e-300) return res;

    Eigen::MatrixXd H(2 * n, 2 * n);
    for (int it = 0; it < 100; ++it) {
        const double gamma = lb * (1.0 + 2.0 * tol);
        H.topLeftCorner(n, n) = S.A;
        H.topRightCorner(n, n) = sys.B * sys.B.transpose() / gamma;
        H.bottomLeftCorner(n, n) = -sys.C.transpose() * sys.C / gamma;
        H.bottomRightCorner(n, n) = -S.A.transpose();
        Eigen::EigenSolver<Eigen::MatrixXd> es(H, false);
        if (es.info() != Eigen::Success)
            throw EigenFailure("hinf_p_norm: Hamiltonian eigensolver did not converge");

        const double tau = 1e-8 * (1.0 + es.eigenvalues().cwiseAbs().maxCoeff());
        std::vector<double> ws;
        for (int i = 0; i < 2 * n; ++i) {
            const auto ev = es.eigenvalues()(i);
            if (std::abs(ev.real()) <= tau && ev.imag() >= 0.0) ws.push_back(ev.imag());
        }
        if (ws.empty()) {
            res.gamma = lb * (1.0 + tol);
            return res;
        }
        std::sort(ws.begin(), ws.end());
        std::vector<double> probes;
        if (ws.size() == 1) probes.push_back(ws[0]);
        for (std::size_t k = 0; k + 1 < ws.size(); ++k) {
            if (ws[k + 1] - ws[k] > 1e-9 * (1.0 + ws[k + 1]))
                probes.push_back(0.5 * (ws[k] + ws[k + 1]));
        }
        bool improved = false;
        for (double w : probes) {
            const double s = sig(w);
            if (s > lb * (1.0 + 0.1 * tol)) {
                lb = s;
                res.peak_frequency = w;
                improved = true;
            }
        }
        if (!improved) {
            // Remaining axis eigenvalues come from the level set touching the
            // peak itself: converged to within tol.
            res.gamma = lb * (1.0 + tol);
            return res;
        }
    }
    throw BisectionStall("hinf_p_norm: level-set iteration did not converge");
}

/// Circle-criterion verdict for p-dominance of a SISO Lure loop at rate
/// lambda, sector [alpha, beta].
struct CircleReport {
    bool pass = false;
    int p_claimed = 0;
    int q_unstable = 0;
    int encirclements = 0;  ///< clockwise positive
    double sector_alpha = 0.0;
    double sector_beta = 0.0;
    char disk_condition = 'a';  ///< which branch applied: 'a' outside / 'b' inside
    double min_margin = 0.0;    ///< distance of the locus to the disk boundary
};

namespace detail {

struct NyquistPoint {
    double omega;
    std::complex<double> value;
};

// Adaptive sample of G_shifted(i omega) on [0, omega_max], refined where the
// locus turns quickly around `focus` (if finite) or moves by more than
// `chord_scale` per segment.
inline std::vector<NyquistPoint> sample_nyquist(const StateSpace& shifted, double omega_min,
                                                double omega_max, double focus_re, bool has_focus,
                                                double chord_scale,
                                                std::size_t budget = 400000) {
    std::vector<NyquistPoint> pts;
    const int base = 1024;
    const auto G = [&](double w) { return eval_transfer(shifted, {0.0, w})(0, 0); };
    pts.push_back({0.0, G(0.0)});
    for (int k = 0; k <= base; ++k) {
        const double w =
            omega_min * std::pow(omega_max / omega_min, static_cast<double>(k) / base);
        pts.push_back({w, G(w)});
    }
    const std::complex<double> x0{focus_re, 0.0};
    bool refined = true;
    while (refined) {
        refined = false;
        std::vector<NyquistPoint> next;
        next.reserve(pts.size() * 2);
        for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
            next.push_back(pts[k]);
            const auto& a = pts[k];
            const auto& b = pts[k + 1];
            const double chord = std::abs(b.value - a.value);
            bool split_seg = chord > chord_scale;
            if (has_focus) {
                const double da = std::abs(a.value - x0);
                const double db = std::abs(b.value - x0);
                const double dmin = std::min(da, db);
                if (dmin <= 0.0)
                    throw GridUnderflow("circle_criterion: locus passes through -1/alpha");
                if (chord > 0.4 * dmin) split_seg = true;
            }
            if (split_seg) {
                const double wm = (a.omega > 0.0) ? std::sqrt(a.omega * b.omega)
                                                  : 0.5 * (a.omega + b.omega);
                if (wm > a.omega && wm < b.omega) {
                    next.push_back({wm, G(wm)});
                    refined = true;
                }
            }
        }
        next.push_back(pts.back());
        pts.swap(next);
        if (pts.size() > budget)
            throw GridUnderflow("circle_criterion: adaptive refinement exceeded point budget");
    }
    return pts;
}

}  // namespace detail

/// Applies the circle criterion to the shifted SISO transfer function:
/// winding number about -1/alpha by accumulated argument plus the disk
/// inclusion/exclusion test for the sector. p_claimed = q + clockwise
/// encirclements. Sector endpoints must be finite; alpha = 0 or beta = 0
/// degenerate the disk into a half-plane.
inline CircleReport circle_criterion(const StateSpace& sys_zw, double lambda, double alpha,
                                     double beta) {
    if (sys_zw.inputs() != 1 || sys_zw.outputs() != 1)
        throw DimensionMismatch("circle_criterion: SISO channel required");
    if (!(alpha < beta) || !std::isfinite(alpha) || !std::isfinite(beta))
        throw StructureMismatch("circle_criterion: need finite alpha < beta");

    const StateSpace S = shift(sys_zw, lambda);
    const auto mc = classify_modes(S, 0.0);
    if (mc.boundary_count > 0)
        throw BoundaryPole("circle_criterion: shifted transfer function has imaginary-axis poles");

    CircleReport rep;
    rep.q_unstable = mc.p_dominant;
    rep.sector_alpha = alpha;
    rep.sector_beta = beta;
    rep.disk_condition = (alpha * beta >= 0.0) ? 'a' : 'b';

    const double rho = std::max(1.0, mc.eigenvalues.cwiseAbs().maxCoeff());

    // Disk geometry; alpha or beta equal to zero degenerates to a half-plane.
    const bool halfplane = (alpha == 0.0 || beta == 0.0);
    double center = 0.0, radius = 0.0;
    if (!halfplane) {
        const double x1 = -1.0 / alpha, x2 = -1.0 / beta;
        center = 0.5 * (x1 + x2);
        radius = 0.5 * std::abs(x1 - x2);
    }
    const double chord_scale =
        halfplane ? 0.02 * (1.0 / std::max(std::abs(alpha), std::abs(beta))) : 0.02 * radius;

    const bool has_focus = (alpha != 0.0);
    const double focus = has_focus ? -1.0 / alpha : 0.0;
    const auto pts = detail::sample_nyquist(S, 1e-4 * rho, 1e4 * rho, focus, has_focus,
                                            std::max(chord_scale, 1e-12));

    // Winding about -1/alpha: the half sweep contributes half the total
    // argument change (conjugate symmetry of a real rational locus).
    if (has_focus) {
        double total = 0.0;
        for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
            const std::complex<double> a = pts[k].value - std::complex<double>(focus, 0.0);
            const std::complex<double> b = pts[k + 1].value - std::complex<double>(focus, 0.0);
            total += std::arg(b / a);
        }
        const double winding_ccw = 2.0 * total / (2.0 * std::numbers::pi);
        rep.encirclements = -static_cast<int>(std::lround(winding_ccw));
    } else {
        rep.encirclements = 0;  // critical point at infinity
    }
    rep.p_claimed = rep.q_unstable + rep.encirclements;

    double margin = std::numeric_limits<double>::infinity();
    for (const auto& pt : pts) {
        double m;
        if (halfplane) {
            // D(0, beta) is the half-plane Re <= -1/beta; D(alpha, 0) is
            // Re >= -1/alpha. "Outside" is the complementary open half-plane.
            m = (alpha == 0.0) ? pt.value.real() + 1.0 / beta : -1.0 / alpha - pt.value.real();
        } else if (rep.disk_condition == 'a') {
            m = std::abs(pt.value - std::complex<double>(center, 0.0)) - radius;
        } else {
            m = radius - std::abs(pt.value - std::complex<double>(center, 0.0));
        }
        margin = std::min(margin, m);
    }
    rep.min_margin = margin;
    rep.pass = margin > 0.0;
    return rep;
}

/// Small L_{2,p}-gain composition: the feedback loop of two blocks with gains
/// gamma_1, gamma_2 and degrees p1, p2 is strictly (p1+p2)-dominant when
/// gamma_1 gamma_2 < 1.
struct SmallGainClaim {
    bool holds = false;
    int degree = 0;
    double margin = 0.0;
};

inline SmallGainClaim small_gain(double gamma1, int p1, double gamma2, int p2) {
    if (gamma1 < 0.0 || gamma2 < 0.0)
        throw StructureMismatch("small_gain: gains must be non-negative");
    SmallGainClaim c;
    c.degree = p1 + p2;
    c.margin = 1.0 - gamma1 * gamma2;
    c.holds = c.margin > 0.0;
    return c;
}

/// Linear dominance certificate: symmetric P with inertia (p, 0, n-p) such
/// that A^T P + P A + 2 lambda P is negative definite.
struct DominanceCertificate {
    Eigen::MatrixXd P;
    double rate = 0.0;
    double epsilon = 0.0;
    double residual_max_eig = 0.0;
    int inertia_neg = 0;
    int inertia_zero = 0;
    int inertia_pos = 0;
};

/// Builds a certificate from the spectral split: P = T^{-T} blkdiag(-P+, P-)
/// T^{-1} with P+/P- solving Lyapunov equations for the anti-shifted dominant
/// and shifted non-dominant blocks. The result is re-verified numerically;
/// CertificateInvalid is thrown rather than returning a bad certificate.
inline DominanceCertificate dominance_certificate(const StateSpace& sys, double lambda) {
    const SpectralSplit sp = split(sys, lambda);
    const int n = sys.order();
    const int p = sp.p;

    Eigen::MatrixXd Pbd = Eigen::MatrixXd::Zero(n, n);
    if (p > 0) {
        Eigen::MatrixXd Mp = sp.dominant.A;
        Mp.diagonal().array() += lambda;  // antistable
        const Eigen::MatrixXd Pplus =
            solve_lyapunov(-Mp.transpose(), Eigen::MatrixXd::Identity(p, p));
        Pbd.topLeftCorner(p, p) = -Pplus;
    }
    if (p < n) {
        Eigen::MatrixXd Mm = sp.nondominant.A;
        Mm.diagonal().array() += lambda;  // stable
        const Eigen::MatrixXd Pminus =
            solve_lyapunov(Mm.transpose(), Eigen::MatrixXd::Identity(n - p, n - p));
        Pbd.bottomRightCorner(n - p, n - p) = Pminus;
    }

    const Eigen::MatrixXd Tinv = sp.T.partialPivLu().inverse();
    DominanceCertificate cert;
    cert.rate = lambda;
    cert.P = Tinv.transpose() * Pbd * Tinv;
    cert.P = 0.5 * (cert.P + cert.P.transpose());

    Eigen::MatrixXd R =
        sys.A.transpose() * cert.P + cert.P * sys.A + 2.0 * lambda * cert.P;
    R = 0.5 * (R + R.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esR(R, Eigen::EigenvaluesOnly);
    cert.residual_max_eig = esR.eigenvalues().maxCoeff();
    cert.epsilon = -cert.residual_max_eig;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esP(cert.P, Eigen::EigenvaluesOnly);
    const double ptol = 1e-12 * (1.0 + esP.eigenvalues().cwiseAbs().maxCoeff());
    for (int i = 0; i < n; ++i) {
        const double ev = esP.eigenvalues()(i);
        if (ev < -ptol)
            ++cert.inertia_neg;
        else if (ev > ptol)
            ++cert.inertia_pos;
        else
            ++cert.inertia_zero;
    }
    if (cert.inertia_neg != p || cert.inertia_zero != 0 || cert.inertia_pos != n - p ||
        cert.residual_max_eig >= 0.0)
        throw CertificateInvalid("dominance_certificate: verification failed (inertia " +
                                 std::to_string(cert.inertia_neg) + "," +
                                 std::to_string(cert.inertia_zero) + "," +
                                 std::to_string(cert.inertia_pos) + ", residual max eig " +
                                 std::to_string(cert.residual_max_eig) + ")");
    return cert;
}

/// H_{infty,0} norm at rate lambda of the error G - Ghat when both systems
/// share the same dominant transfer function (which then cancels exactly).
/// The norm is evaluated on the composed non-dominant remainders so that the
/// error realization is shifted-stable.
inline HinfResult error_system_norm(const StateSpace& full, const StateSpace& reduced,
                                    double lambda, double tol = 1e-6) {
    const SpectralSplit sf = split(full, lambda);
    const SpectralSplit sr = split(reduced, lambda);
    if (sf.p != sr.p)
        throw StructureMismatch("error_system_norm: dominant degrees differ between models");
    if (sf.p > 0) {
        // The dominant parts must agree as transfer functions, otherwise the
        // error has poles right of the line and the 0-norm is undefined.
        for (double w : {0.3, 1.7, 9.1}) {
            const std::complex<double> s{-lambda + 0.5, w};
            const ComplexMatrix d = eval_transfer(sf.dominant, s) - eval_transfer(sr.dominant, s);
            const double ref = eval_transfer(sf.dominant, s).norm() + 1.0;
            if (d.norm() > 1e-6 * ref)
                throw StructureMismatch(
                    "error_system_norm: dominant transfer functions of full and reduced differ");
        }
    }
    return hinf_p_norm(compose_error(sf.nondominant, sr.nondominant), lambda, tol);
}

/// Assumption-by-assumption report for the reduction theorem and its
/// corollary.
struct Theorem1Report {
    bool a1_pass = false, a2_pass = false, a3_pass = false, a4_pass = false;
    double a1_margin = 0.0;  ///< circle-criterion disk margin
    double a3_margin = 0.0;  ///< mu^{-1} - epsilon
    double a4_margin = 0.0;  ///< mu^{-1} - epsilon - checked zw norm
    double epsilon = 0.0;    ///< error bound ||G - Ghat||_{infty,0}
    double mu = 0.0;
    double norm_zw = 0.0;  ///< the zw norm tested in A4 (reduced for the
                           ///< theorem, full for the corollary)
    double gain_product = 0.0;
    int p = 0;
    double rate = 0.0;
    bool conclusion = false;
    std::string note;
};

namespace detail {

inline Theorem1Report verify_reduction(const LureModel& full, const LureModel& reduced, double mu,
                                       double lambda, int p, bool corollary) {
    if (mu <= 0.0) throw StructureMismatch("verify: mu must be positive");
    if (full.phi.kind != reduced.phi.kind || full.phi.gain != reduced.phi.gain ||
        full.phi.offset != reduced.phi.offset)
        throw StructureMismatch("verify: models do not share the static nonlinearity");

    Theorem1Report rep;
    rep.mu = mu;
    rep.p = p;
    rep.rate = lambda;

    // A1: strict p-dominance of the (full / reduced) linear closed loop via
    // mode counting plus the circle criterion on its zw channel.
    const LureModel& a1_model = corollary ? reduced : full;
    const auto mc = classify_modes(a1_model.linear, lambda);
    const auto circle = circle_criterion(a1_model.zw_channel(), lambda, -mu, mu);
    rep.a1_pass = (mc.p_dominant == p) && (mc.boundary_count == 0) && circle.pass &&
                  (circle.p_claimed == p);
    rep.a1_margin = circle.min_margin;

    // A2: differential sector condition on phi.
    rep.a2_pass = sector_bounds_check(full.phi, -mu, mu).pass;

    // A3: ||G - Ghat||_{infty,0} <= epsilon < mu^{-1}.
    rep.epsilon = error_system_norm(full.linear, reduced.linear, lambda).gamma;
    rep.a3_margin = 1.0 / mu - rep.epsilon;
    rep.a3_pass = rep.a3_margin > 0.0;
    if (rep.epsilon == 0.0) rep.note = "identical linear dynamics: epsilon = 0";

    // A4: small-gain condition on the zw channel.
    const LureModel& a4_model = corollary ? full : reduced;
    const auto hr = hinf_p_norm(a4_model.zw_channel(), lambda);
    rep.norm_zw = hr.gamma;
    rep.a4_margin = 1.0 / mu - rep.epsilon - hr.gamma;
    rep.a4_pass = (hr.p == p) && (rep.a4_margin > 0.0);

    const double denom = 1.0 / mu - rep.norm_zw;
    rep.gain_product =
        denom > 0.0 ? rep.epsilon / denom : std::numeric_limits<double>::infinity();
    rep.conclusion = rep.a1_pass && rep.a2_pass && rep.a3_pass && rep.a4_pass;
    return rep;
}

}  // namespace detail

/// Checks assumptions (A1)-(A4): if they pass, the full closed loop is
/// strictly p-dominant with rate lambda.
inline Theorem1Report verify_theorem1(const LureModel& full, const LureModel& reduced, double mu,
                                      double lambda, int p) {
    return detail::verify_reduction(full, reduced, mu, lambda, p, false);
}

/// Mirror statement with G and -Gtilde swapping roles: if (A1*)-(A4*) pass,
/// the reduced closed loop is strictly p-dominant with rate lambda.
inline Theorem1Report verify_corollary1(const LureModel& full, const LureModel& reduced, double mu,
                                        double lambda, int p) {
    return detail::verify_reduction(full, reduced, mu, lambda, p, true);
}

/// Nyquist locus of the shifted SISO transfer function as CSV (omega, re, im).
inline void write_nyquist_csv(std::ostream& os, const StateSpace& sys, double lambda,
                              double omega_min, double omega_max, int points) {
    if (sys.inputs() != 1 || sys.outputs() != 1)
        throw DimensionMismatch("write_nyquist_csv: SISO channel required");
    const StateSpace S = shift(sys, lambda);
    os << "omega,re,im\n";
    for (int k = 0; k < points; ++k) {
        const double w =
            omega_min * std::pow(omega_max / omega_min, static_cast<double>(k) / (points - 1));
        const auto g = eval_transfer(S, {0.0, w})(0, 0);
        os << w << ',' << g.real() << ',' << g.imag() << '\n';
    }
}

/// Magnitude of the shifted frequency response as CSV (omega, magnitude).
inline void write_bode_csv(std::ostream& os, const StateSpace& sys, double lambda,
                           double omega_min, double omega_max, int points) {
    const StateSpace S = shift(sys, lambda);
    os << "omega,magnitude\n";
    for (int k = 0; k < points; ++k) {
        const double w =
            omega_min * std::pow(omega_max / omega_min, static_cast<double>(k) / (points - 1));
        os << w << ',' << detail::sigma_max(eval_transfer(S, {0.0, w})) << '\n';
    }
}

}  // namespace domred
