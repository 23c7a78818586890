#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "domred/dominance.hpp"
#include "domred/heatflow.hpp"
#include "test_util.hpp"

using namespace domred;
using std::complex;

namespace {

StateSpace first_order(double a) {
    Eigen::MatrixXd A(1, 1), B(1, 1), C(1, 1);
    A << a;
    B << 1.0;
    C << 1.0;
    return {A, B, C};
}

// wn^2 / (s^2 + 2 zeta wn s + wn^2) in controllable canonical form.
StateSpace second_order(double wn, double zeta) {
    Eigen::MatrixXd A(2, 2), B(2, 1), C(1, 2);
    A << 0.0, 1.0, -wn * wn, -2.0 * zeta * wn;
    B << 0.0, 1.0;
    C << wn * wn, 0.0;
    return {A, B, C};
}

}  // namespace

TEST_CASE("hinf norm of textbook systems") {
    // ||1/(s+1)||_inf = 1 at omega = 0
    const auto r1 = hinf_p_norm(first_order(-1.0), 0.0);
    CHECK(r1.gamma == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(r1.p == 0);

    // Resonant peak 1 / (2 zeta sqrt(1 - zeta^2))
    const double wn = 3.0, zeta = 0.1;
    const auto r2 = hinf_p_norm(second_order(wn, zeta), 0.0);
    const double peak = 1.0 / (2.0 * zeta * std::sqrt(1.0 - zeta * zeta));
    CHECK(r2.gamma == doctest::Approx(peak).epsilon(1e-5));
    CHECK(r2.peak_frequency ==
          doctest::Approx(wn * std::sqrt(1.0 - 2.0 * zeta * zeta)).epsilon(1e-3));
}

TEST_CASE("hinf norm matches a dense grid oracle on random systems") {
    std::mt19937 rng(301);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 3 + static_cast<int>(rng() % 5);
        const auto sys = testutil::random_stable_system(rng, n, 2, 2, 0.5);
        const auto res = hinf_p_norm(sys, 0.0, 1e-8);
        const double oracle = testutil::grid_hinf_oracle(sys, 0.0, 1e-4, 1e4, 1000000);
        CHECK(std::abs(res.gamma - oracle) < 1e-4 * (1.0 + oracle));
        CHECK(res.gamma >= oracle * (1.0 - 1e-7));  // level set upper-bounds the grid
    }
}

TEST_CASE("hinf norm with unstable poles reports (gamma, p) at the rate") {
    std::mt19937 rng(311);
    for (int trial = 0; trial < 10; ++trial) {
        const auto sys = testutil::random_hyperbolic_system(rng, 3, 2, 1, 1, 0.5);
        const auto res = hinf_p_norm(sys, 0.0, 1e-8);
        CHECK(res.p == 2);
        const double oracle = testutil::grid_hinf_oracle(sys, 0.0, 1e-4, 1e4, 1000000);
        CHECK(std::abs(res.gamma - oracle) < 1e-4 * (1.0 + oracle));
    }
}

TEST_CASE("hinf norm rejects poles on the shifted axis") {
    Eigen::MatrixXd A(2, 2), B(2, 1), C(1, 2);
    A << 0.0, 1.0, -4.0, 0.0;  // poles at +-2i
    B << 0.0, 1.0;
    C << 1.0, 0.0;
    CHECK_THROWS_AS(hinf_p_norm(StateSpace(A, B, C), 0.0), BoundaryPole);
    CHECK_THROWS_AS(hinf_p_norm(first_order(-1.0), 0.0, 1e-15), BisectionStall);
}

TEST_CASE("circle criterion agrees with closed-loop eigenvalue counting") {
    // For a linear feedback w = -k z with slope k inside the sector, the
    // closed-loop matrix A - k Bw Cz must have exactly p_claimed eigenvalues
    // right of Re(s) = -lambda.
    const auto model = loop_transform(build_heatflow({29, 1.0, 20.0}), 10.0);
    const double lambda = 12.0, mu = 10.0;
    const auto rep = circle_criterion(model.zw_channel(), lambda, -mu, mu);
    CHECK(rep.pass);
    CHECK(rep.q_unstable == 2);
    CHECK(rep.p_claimed == 2);
    CHECK(rep.disk_condition == 'b');
    CHECK(rep.min_margin > 0.0);

    for (double k : {-9.0, -4.0, 0.0, 4.0, 9.0}) {
        const Eigen::MatrixXd Acl =
            model.linear.A - k * (model.Bw() * model.Cz());
        Eigen::EigenSolver<Eigen::MatrixXd> es(Acl, false);
        int right = 0;
        for (int i = 0; i < 29; ++i)
            if (es.eigenvalues()(i).real() > -lambda) ++right;
        CHECK(right == rep.p_claimed);
    }
}

TEST_CASE("circle criterion fails when the locus violates the disk") {
    // Same loop but a sector so wide that 1/mu shrinks below the locus.
    const auto model = loop_transform(build_heatflow({29, 1.0, 20.0}), 10.0);
    const auto rep = circle_criterion(model.zw_channel(), 12.0, -500.0, 500.0);
    CHECK_FALSE(rep.pass);
}

TEST_CASE("circle criterion input validation") {
    const auto sys = first_order(-1.0);
    CHECK_THROWS_AS(circle_criterion(sys, 0.0, 2.0, 1.0), StructureMismatch);
    CHECK_THROWS_AS(
        circle_criterion(sys, 0.0, -std::numeric_limits<double>::infinity(), 1.0),
        StructureMismatch);
    Eigen::MatrixXd A(1, 1), B(1, 2), C(1, 1);
    A << -1.0;
    B << 1.0, 0.0;
    C << 1.0;
    CHECK_THROWS_AS(circle_criterion(StateSpace(A, B, C), 0.0, -1.0, 1.0), DimensionMismatch);
    CHECK_THROWS_AS(circle_criterion(first_order(0.0), 0.0, -1.0, 1.0), BoundaryPole);
}

TEST_CASE("circle criterion on a stable loop with a sign-definite sector") {
    // G(s) = 1/(s+1), sector [0.5, 2]: disk D on the negative real axis
    // between -2 and -0.5; the locus stays in Re >= 0, hence outside, no
    // encirclements of -2, and p_claimed = 0 (classical absolute stability).
    const auto rep = circle_criterion(first_order(-1.0), 0.0, 0.5, 2.0);
    CHECK(rep.disk_condition == 'a');
    CHECK(rep.pass);
    CHECK(rep.p_claimed == 0);
    CHECK(rep.encirclements == 0);

    // Linear-slope oracle across the sector interior.
    for (double k : {0.6, 1.0, 1.9}) {
        Eigen::MatrixXd Acl(1, 1);
        Acl << -1.0 - k;
        CHECK(Acl(0, 0) < 0.0);
    }
}

TEST_CASE("small gain composition") {
    const auto c = small_gain(0.5, 0, 1.2, 2);
    CHECK(c.holds);
    CHECK(c.degree == 2);
    CHECK(c.margin == doctest::Approx(0.4));
    CHECK_FALSE(small_gain(2.0, 1, 0.6, 1).holds);
    CHECK_THROWS_AS(small_gain(-1.0, 0, 1.0, 0), StructureMismatch);
}

TEST_CASE("dominance certificate has the right inertia and residual") {
    SUBCASE("heat-flow transformed block at rate 12") {
        const auto model = loop_transform(build_heatflow({29, 1.0, 20.0}), 10.0);
        const auto cert = dominance_certificate(model.linear, 12.0);
        CHECK(cert.inertia_neg == 2);
        CHECK(cert.inertia_zero == 0);
        CHECK(cert.inertia_pos == 27);
        CHECK(cert.residual_max_eig < 0.0);

        // Independent re-verification of the matrix inequality.
        Eigen::MatrixXd R = model.linear.A.transpose() * cert.P + cert.P * model.linear.A +
                            24.0 * cert.P;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (R + R.transpose()),
                                                          Eigen::EigenvaluesOnly);
        CHECK(es.eigenvalues().maxCoeff() < 0.0);
    }
    SUBCASE("random hyperbolic systems") {
        std::mt19937 rng(331);
        for (int trial = 0; trial < 10; ++trial) {
            const int p = 1 + static_cast<int>(rng() % 2);
            const int q = 2 + static_cast<int>(rng() % 3);
            const auto sys = testutil::random_hyperbolic_system(rng, q, p);
            const auto cert = dominance_certificate(sys, 0.0);
            CHECK(cert.inertia_neg == p);
            CHECK(cert.inertia_pos == q);
            CHECK(cert.residual_max_eig < 0.0);
        }
    }
}

TEST_CASE("error_system_norm cancels the shared dominant part") {
    const auto model = loop_transform(build_heatflow({29, 1.0, 20.0}), 10.0);
    const double lambda = 12.0;

    SUBCASE("identical systems give zero") {
        const auto r = error_system_norm(model.zw_channel(), model.zw_channel(), lambda);
        CHECK(r.gamma < 1e-10);
    }
    SUBCASE("matches a dense grid oracle for the actual reduction") {
        auto [reduced, red] = reduce_dominant_lure(model, lambda, 4);
        const auto r = error_system_norm(model.zw_channel(), reduced.zw_channel(), lambda, 1e-8);

        // Oracle: pointwise difference of the shifted transfer functions.
        const auto Sf = shift(model.zw_channel(), lambda);
        const auto Sr = shift(reduced.zw_channel(), lambda);
        double best = 0.0;
        for (int k = 0; k < 200000; ++k) {
            const double w = 1e-3 * std::pow(1e6, k / 199999.0);
            const complex<double> s{0.0, w};
            best = std::max(best,
                            std::abs(eval_transfer(Sf, s)(0, 0) - eval_transfer(Sr, s)(0, 0)));
        }
        CHECK(std::abs(r.gamma - best) < 1e-4 * (1.0 + best));
        CHECK(r.gamma <= red.error_bound * (1.0 + 1e-6));
    }
    SUBCASE("mismatched dominant parts are rejected") {
        auto [reduced, red] = reduce_dominant_lure(model, lambda, 4);
        // Perturb the retained dominant block: the error then has modes right
        // of the line and no 0-norm exists.
        LureModel broken = reduced;
        Eigen::MatrixXd A = broken.linear.A;
        A(0, 0) += 0.5;
        broken.linear = StateSpace(A, broken.linear.B, broken.linear.C);
        CHECK_THROWS_AS(error_system_norm(model.zw_channel(), broken.zw_channel(), lambda),
                        StructureMismatch);
    }
}

TEST_CASE("theorem and corollary verification on the benchmark") {
    const auto model = loop_transform(build_heatflow({29, 1.0, 20.0}), 10.0);
    const double lambda = 12.0, mu = 10.0;
    auto [reduced, red] = reduce_dominant_lure(model, lambda, 5);

    const auto thm = verify_theorem1(model, reduced, mu, lambda, 2);
    CHECK(thm.a1_pass);
    CHECK(thm.a2_pass);
    CHECK(thm.a3_pass);
    CHECK(thm.a4_pass);
    CHECK(thm.conclusion);
    CHECK(thm.epsilon < 1.0 / mu);
    CHECK(thm.norm_zw < 1.0 / mu - thm.epsilon);

    const auto cor = verify_corollary1(model, reduced, mu, lambda, 2);
    CHECK(cor.conclusion);

    CHECK_THROWS_AS(verify_theorem1(model, reduced, -1.0, lambda, 2), StructureMismatch);
    LureModel other = reduced;
    other.phi.gain += 1.0;
    CHECK_THROWS_AS(verify_theorem1(model, other, mu, lambda, 2), StructureMismatch);
}

TEST_CASE("csv writers emit headers and the requested point count") {
    const auto sys = first_order(-1.0);
    std::ostringstream ny, bo;
    write_nyquist_csv(ny, sys, 0.0, 1e-2, 1e2, 50);
    write_bode_csv(bo, sys, 0.0, 1e-2, 1e2, 50);
    const auto count_lines = [](const std::string& s) {
        return std::count(s.begin(), s.end(), '\n');
    };
    CHECK(count_lines(ny.str()) == 51);
    CHECK(count_lines(bo.str()) == 51);
    CHECK(ny.str().rfind("omega,re,im\n", 0) == 0);
    CHECK(bo.str().rfind("omega,magnitude\n", 0) == 0);
}
