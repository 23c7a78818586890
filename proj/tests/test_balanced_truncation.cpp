#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "domred/balanced_truncation.hpp"
#include "domred/heatflow.hpp"
#include "test_util.hpp"

using namespace domred;
using std::complex;

TEST_CASE("shifted gramians satisfy their Lyapunov equations") {
    std::mt19937 rng(201);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 3 + static_cast<int>(rng() % 5);
        const auto sys = testutil::random_stable_system(rng, n, 2, 2, 1.5);
        const double lambda = 0.5;  // A + lambda I stays Hurwitz (margin 1.5)
        const auto g = shifted_gramians(sys, lambda);

        Eigen::MatrixXd As = sys.A;
        As.diagonal().array() += lambda;
        const double scale = As.norm() * g.P.norm() + sys.B.norm() * sys.B.norm() + 1.0;
        CHECK((As * g.P + g.P * As.transpose() + sys.B * sys.B.transpose()).norm() <
              1e-9 * scale);
        CHECK((As.transpose() * g.Q + g.Q * As + sys.C.transpose() * sys.C).norm() <
              1e-9 * (As.norm() * g.Q.norm() + sys.C.norm() * sys.C.norm() + 1.0));

        // Independent Kronecker oracle
        const Eigen::MatrixXd Po = testutil::kron_lyapunov(As, sys.B * sys.B.transpose());
        CHECK((g.P - Po).norm() < 1e-8 * (1.0 + Po.norm()));
    }
}

TEST_CASE("hankel singular values match the PQ eigenvalue oracle") {
    std::mt19937 rng(211);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 4 + static_cast<int>(rng() % 4);
        const auto sys = testutil::random_stable_system(rng, n, 1, 1, 1.0);
        const auto red = balance_and_truncate(sys, 0.0, n / 2);
        const auto g = shifted_gramians(sys, 0.0);

        Eigen::EigenSolver<Eigen::MatrixXd> es(g.P * g.Q, false);
        Eigen::VectorXd sig = es.eigenvalues().real().cwiseMax(0.0).cwiseSqrt();
        std::sort(sig.data(), sig.data() + n, std::greater<double>());
        CHECK((red.hsv - sig).norm() < 1e-8 * (1.0 + sig.norm()));
    }
}

TEST_CASE("truncated model obeys the twice-tail-sum error bound") {
    std::mt19937 rng(221);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 5 + static_cast<int>(rng() % 4);
        const int nu = 1 + static_cast<int>(rng() % (n - 1));
        const auto sys = testutil::random_stable_system(rng, n, 1, 1, 1.0);
        const auto red = balance_and_truncate(sys, 0.0, nu);

        // W^T T = I (oblique projection)
        CHECK((red.W.transpose() * red.T -
               Eigen::MatrixXd::Identity(red.effective_order, red.effective_order))
                  .norm() < 1e-9);

        const double err =
            testutil::grid_hinf_oracle(compose_error(sys, red.reduced), 0.0, 1e-3, 1e3, 4000);
        CHECK(err <= red.error_bound * (1.0 + 1e-6) + 1e-12);
    }
}

TEST_CASE("full-order truncation reproduces the transfer function exactly") {
    std::mt19937 rng(231);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 4 + static_cast<int>(rng() % 3);
        const auto sys = testutil::random_stable_system(rng, n, 2, 1, 1.0);
        const auto red = balance_and_truncate(sys, 0.0, n);
        CHECK(red.error_bound == 0.0);
        std::uniform_real_distribution<double> ud(-1.0, 1.0);
        for (int t = 0; t < 5; ++t) {
            const complex<double> s{0.5 + ud(rng), 3.0 * ud(rng)};
            const auto a = eval_transfer(sys, s);
            const auto b = eval_transfer(red.reduced, s);
            CHECK((a - b).norm() < 1e-8 * (1.0 + a.norm()));
        }
    }
}

TEST_CASE("balanced realization has equal diagonal gramians") {
    std::mt19937 rng(241);
    const auto sys = testutil::random_stable_system(rng, 6, 1, 1, 1.0);
    const auto red = balance_and_truncate(sys, 0.0, 6);
    const auto g = shifted_gramians(red.reduced, 0.0);
    CHECK((g.P - g.Q).norm() < 1e-7 * (1.0 + g.P.norm()));
    for (int i = 0; i < 6; ++i)
        CHECK(g.P(i, i) == doctest::Approx(red.hsv(i)).epsilon(1e-7));
}

TEST_CASE("order validation and rank limiting") {
    std::mt19937 rng(251);
    const auto sys = testutil::random_stable_system(rng, 4, 1, 1, 1.0);
    CHECK_THROWS_AS(balance_and_truncate(sys, 0.0, -1), OrderTooSmall);
    CHECK_THROWS_AS(balance_and_truncate(sys, 0.0, 5), OrderTooSmall);

    // Duplicate the state so the realization is non-minimal: the requested
    // order is clamped to the numerical Hankel rank instead of balancing
    // garbage directions.
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2, 2);
    A.diagonal() << -1.0, -1.0;
    Eigen::MatrixXd B(2, 1), C(1, 2);
    B << 1.0, 1.0;
    C << 1.0, 1.0;
    const auto red = balance_and_truncate(StateSpace(A, B, C), 0.0, 2);
    CHECK(red.rank_limited);
    CHECK(red.effective_order == 1);
    const complex<double> s{0.4, 1.1};
    const auto sys2 = StateSpace(A, B, C);
    CHECK((eval_transfer(sys2, s) - eval_transfer(red.reduced, s)).norm() < 1e-10);
}

TEST_CASE("reduce_dominant_lure keeps the dominant block intact") {
    const auto model = loop_transform(build_heatflow({29, 1.0, 20.0}), 10.0);
    const double lambda = 12.0;
    const auto sp = split(model.linear, lambda);
    auto [reduced, red] = reduce_dominant_lure(model, lambda, 5);

    CHECK(reduced.linear.order() == 5);
    CHECK(red.dominant_order == 2);
    CHECK(reduced.phi.kind == model.phi.kind);
    CHECK(reduced.phi.gain == model.phi.gain);
    CHECK(reduced.phi.offset == model.phi.offset);

    // Eigenvalues of the retained dominant block are preserved exactly.
    Eigen::EigenSolver<Eigen::MatrixXd> e1(sp.dominant.A, false);
    Eigen::EigenSolver<Eigen::MatrixXd> e2(
        Eigen::MatrixXd(reduced.linear.A.topLeftCorner(2, 2)), false);
    Eigen::VectorXd r1 = e1.eigenvalues().real(), r2 = e2.eigenvalues().real();
    std::sort(r1.data(), r1.data() + 2);
    std::sort(r2.data(), r2.data() + 2);
    CHECK((r1 - r2).norm() < 1e-10 * (1.0 + r1.norm()));

    // Dominant part of the reduced model matches the full dominant transfer.
    const auto spr = split(reduced.linear, lambda);
    CHECK(spr.p == 2);
    for (double w : {0.7, 4.2, 19.0}) {
        const complex<double> s{-lambda + 1.0, w};
        const auto a = eval_transfer(sp.dominant, s);
        const auto b = eval_transfer(spr.dominant, s);
        CHECK((a - b).norm() < 1e-7 * (1.0 + a.norm()));
    }

    CHECK_THROWS_AS(reduce_dominant_lure(model, lambda, 1), OrderTooSmall);
}

TEST_CASE("shifted reduction error respects the bound for the shifted system") {
    std::mt19937 rng(261);
    for (int trial = 0; trial < 10; ++trial) {
        const auto sys = testutil::random_stable_system(rng, 6, 1, 1, 2.0);
        const double lambda = 1.0;  // margin 2.0 keeps A + I Hurwitz
        const auto red = balance_and_truncate(sys, lambda, 3);
        const double err = testutil::grid_hinf_oracle(compose_error(sys, red.reduced), lambda,
                                                      1e-3, 1e3, 4000);
        CHECK(err <= red.error_bound * (1.0 + 1e-6) + 1e-12);
    }
}
