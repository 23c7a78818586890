#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "domred/heatflow.hpp"
#include "domred/io.hpp"
#include "test_util.hpp"

using namespace domred;

TEST_CASE("matrix round trip") {
    std::mt19937 rng(601);
    const Eigen::MatrixXd M = testutil::random_matrix(rng, 3, 4);
    const Eigen::MatrixXd back = matrix_from_json(matrix_to_json(M), "A");
    CHECK((M - back).norm() == 0.0);

    CHECK_THROWS_AS(matrix_from_json(json::array(), "A"), ParseError);
    CHECK_THROWS_AS(matrix_from_json(json::parse("[[1,2],[3]]"), "A"), ParseError);
    CHECK_THROWS_AS(matrix_from_json(json::parse("[[1,\"x\"]]"), "A"), ParseError);
}

TEST_CASE("state-space model round trip") {
    std::mt19937 rng(607);
    const auto sys = testutil::random_stable_system(rng, 4, 2, 3);
    const auto loaded = model_from_json(model_to_json(sys));
    REQUIRE(std::holds_alternative<StateSpace>(loaded));
    const auto& back = std::get<StateSpace>(loaded);
    CHECK((sys.A - back.A).norm() == 0.0);
    CHECK((sys.B - back.B).norm() == 0.0);
    CHECK((sys.C - back.C).norm() == 0.0);
}

TEST_CASE("lure model round trip keeps channels and nonlinearity") {
    const auto model = build_heatflow({5, 1.0, 20.0});
    const auto transformed = loop_transform(model, 10.0);
    const auto loaded = model_from_json(model_to_json(transformed));
    REQUIRE(std::holds_alternative<LureModel>(loaded));
    const auto& back = std::get<LureModel>(loaded);
    CHECK((transformed.linear.A - back.linear.A).norm() == 0.0);
    CHECK(back.phi.kind == StaticNonlinearity::Kind::ScaledTanh);
    CHECK(back.phi.gain == 20.0);
    CHECK(back.phi.offset == 10.0);
}

TEST_CASE("channel indices remap columns and rows") {
    json j;
    j["A"] = json::parse("[[-1,0],[0,-2]]");
    j["B"] = json::parse("[[1,5],[2,6]]");
    j["C"] = json::parse("[[1,0],[0,1]]");
    j["channels"] = {{"u", 1}, {"w", 0}, {"y", 1}, {"z", 0}};
    j["phi"] = {{"kind", "linear"}, {"gain", 2.0}};
    const auto loaded = model_from_json(j);
    REQUIRE(std::holds_alternative<LureModel>(loaded));
    const auto& m = std::get<LureModel>(loaded);
    CHECK(m.Bu()(0) == 5.0);
    CHECK(m.Bw()(1) == 2.0);
    CHECK(m.Cy()(1) == 1.0);
    CHECK(m.Cz()(0) == 1.0);
}

TEST_CASE("malformed model documents are rejected with named fields") {
    json j;
    j["A"] = json::parse("[[-1,0],[0,-2]]");
    j["B"] = json::parse("[[1],[2]]");
    CHECK_THROWS_WITH_AS(model_from_json(j), doctest::Contains("\"C\""), ParseError);

    j["C"] = json::parse("[[1,0,0]]");
    CHECK_THROWS_WITH_AS(model_from_json(j), doctest::Contains("\"C\""), DimensionMismatch);

    j["C"] = json::parse("[[1,0]]");
    j["channels"] = {{"u", 0}, {"w", 5}};
    j["phi"] = {{"kind", "linear"}, {"gain", 1.0}};
    CHECK_THROWS_AS(model_from_json(j), DimensionMismatch);

    j["channels"] = {{"u", 0}, {"w", 1}, {"y", 0}, {"z", 1}};
    CHECK_THROWS_AS(model_from_json(j), DimensionMismatch);  // y == z impossible with 1 row

    json j2 = j;
    j2["B"] = json::parse("[[1,5],[2,6]]");
    j2["C"] = json::parse("[[1,0],[0,1]]");
    j2["phi"] = {{"kind", "deadzone"}};
    CHECK_THROWS_AS(model_from_json(j2), UnknownNonlinearityKind);
}

TEST_CASE("load_model reports unreadable and unparsable files") {
    CHECK_THROWS_AS(load_model("/nonexistent/model.json"), ParseError);
    const std::string path = "bad_model_test.json";
    {
        std::ofstream os(path);
        os << "{not json";
    }
    CHECK_THROWS_AS(load_model(path), ParseError);
    std::remove(path.c_str());
}

TEST_CASE("trajectory csv layout") {
    Trajectory traj;
    traj.dt = 0.5;
    for (int k = 0; k < 3; ++k) {
        traj.times.push_back(0.5 * k);
        traj.y.push_back(1.0 * k);
        traj.z.push_back(-1.0 * k);
        Eigen::VectorXd x(2);
        x << k, 10 + k;
        traj.states.push_back(x);
    }
    std::ostringstream plain, with_states;
    write_trajectory_csv(plain, traj, false);
    write_trajectory_csv(with_states, traj, true);
    const std::string p = plain.str(), ws = with_states.str();
    CHECK(p.rfind("t,y,z\n", 0) == 0);
    CHECK(ws.rfind("t,y,z,x1,x2\n", 0) == 0);
    CHECK(std::count(p.begin(), p.end(), '\n') == 4);
    CHECK(ws.find("0.5,1,-1,1,11") != std::string::npos);
}

TEST_CASE("report serializers expose all verdict fields") {
    const auto model = loop_transform(build_heatflow({29, 1.0, 20.0}), 10.0);
    const auto circle = circle_criterion(model.zw_channel(), 12.0, -10.0, 10.0);
    const json jc = circle_report_to_json(circle);
    CHECK(jc["pass"] == true);
    CHECK(jc["p_claimed"] == 2);
    CHECK(jc["disk_condition"] == "b");
    CHECK(jc["sector"][0] == -10.0);

    auto [reduced, red] = reduce_dominant_lure(model, 12.0, 4);
    const auto thm = verify_theorem1(model, reduced, 10.0, 12.0, 2);
    const json jt = theorem_report_to_json(thm);
    for (const char* key : {"a1_pass", "a2_pass", "a3_pass", "a4_pass", "epsilon", "mu",
                            "norm_zw", "conclusion", "rate"})
        CHECK(jt.contains(key));
    CHECK(jt["conclusion"] == true);

    LimitCycleReport lc;
    lc.periodic = true;
    lc.period = 0.25;
    lc.amplitude = 0.5;
    lc.crossings = 12;
    const json jl = limit_cycle_to_json(lc);
    CHECK(jl["period"] == 0.25);
    CHECK(jl["crossings"] == 12);
}

TEST_CASE("benchmark report serialization is structurally complete") {
    const auto rep = reproduce_paper(HeatflowSpec{29, 1.0, 20.0}, 12.0, {4});
    const json j = benchmark_report_to_json(rep);
    CHECK(j["spec"]["n"] == 29);
    CHECK(j["mu"] == 10.0);
    CHECK(j["p"] == 2);
    REQUIRE(j["reductions"].size() == 1);
    const auto& je = j["reductions"][0];
    CHECK(je["nu"] == 4);
    CHECK(je.contains("error_bound_zw"));
    CHECK(je.contains("theorem1"));
    CHECK(je.contains("reduced_model"));
    CHECK_FALSE(je.contains("limit_cycle"));  // no simulations requested
}
