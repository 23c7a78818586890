#pragma once

#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <variant>

#include <json.hpp>

#include "domred/dominance.hpp"
#include "domred/heatflow.hpp"
#include "domred/lure.hpp"
#include "domred/statespace.hpp"

namespace domred {

using json = nlohmann::json;

inline json matrix_to_json(const Eigen::MatrixXd& M) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Eigen::MatrixXd matrix_from_json(const json& j, const std::string& field) {
    if (!j.is_array() || j.empty() || !j[0].is_array())
        throw ParseError("model file: \"" + field + "\" must be a non-empty nested array");
    const auto rows = j.size();
    const auto cols = j[0].size();
    Eigen::MatrixXd M(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        if (!j[i].is_array() || j[i].size() != cols)
            throw ParseError("model file: ragged rows in \"" + field + "\"");
        for (std::size_t k = 0; k < cols; ++k) {
            if (!j[i][k].is_number())
                throw ParseError("model file: non-numeric entry in \"" + field + "\"");
            M(i, k) = j[i][k].get<double>();
        }
    }
    return M;
}

inline json nonlinearity_to_json(const StaticNonlinearity& phi) {
    const char* kind = phi.kind == StaticNonlinearity::Kind::ScaledTanh ? "scaled_tanh" : "linear";
    return {{"kind", kind}, {"gain", phi.gain}, {"offset", phi.offset}};
}

inline StaticNonlinearity nonlinearity_from_json(const json& j) {
    if (!j.contains("kind") || !j["kind"].is_string())
        throw ParseError("model file: \"phi\" needs a string \"kind\"");
    const std::string kind = j["kind"].get<std::string>();
    StaticNonlinearity phi;
    if (kind == "scaled_tanh")
        phi.kind = StaticNonlinearity::Kind::ScaledTanh;
    else if (kind == "linear")
        phi.kind = StaticNonlinearity::Kind::Linear;
    else
        throw UnknownNonlinearityKind("model file: unknown nonlinearity kind \"" + kind + "\"");
    phi.gain = j.value("gain", 0.0);
    phi.offset = j.value("offset", 0.0);
    return phi;
}

using LoadedModel = std::variant<StateSpace, LureModel>;

/// Serializes a plain state-space model.
inline json model_to_json(const StateSpace& sys) {
    return {{"A", matrix_to_json(sys.A)}, {"B", matrix_to_json(sys.B)},
            {"C", matrix_to_json(sys.C)}};
}

/// Serializes a Lure model, including the channel map and nonlinearity.
inline json model_to_json(const LureModel& model) {
    json j = model_to_json(model.linear);
    j["channels"] = {{"u", 0}, {"w", 1}, {"y", 0}, {"z", 1}};
    j["phi"] = nonlinearity_to_json(model.phi);
    return j;
}

/// Parses a model document: the Lure variant is selected iff both "channels"
/// and "phi" are present. Dimension errors name the offending field.
inline LoadedModel model_from_json(const json& j) {
    for (const char* field : {"A", "B", "C"})
        if (!j.contains(field))
            throw ParseError(std::string("model file: missing field \"") + field + "\"");
    const Eigen::MatrixXd A = matrix_from_json(j["A"], "A");
    const Eigen::MatrixXd B = matrix_from_json(j["B"], "B");
    const Eigen::MatrixXd C = matrix_from_json(j["C"], "C");
    if (A.rows() != A.cols()) throw DimensionMismatch("model file: \"A\" is not square");
    if (B.rows() != A.rows())
        throw DimensionMismatch("model file: \"B\" has " + std::to_string(B.rows()) +
                                " rows, expected " + std::to_string(A.rows()));
    if (C.cols() != A.rows())
        throw DimensionMismatch("model file: \"C\" has " + std::to_string(C.cols()) +
                                " columns, expected " + std::to_string(A.rows()));

    const bool lure = j.contains("channels") && j.contains("phi");
    if (!lure) return StateSpace(A, B, C);

    const json& ch = j["channels"];
    const int u = ch.value("u", 0), w = ch.value("w", 1);
    const int y = ch.value("y", 0), z = ch.value("z", 1);
    if (u < 0 || u >= B.cols() || w < 0 || w >= B.cols() || u == w)
        throw DimensionMismatch("model file: \"channels\" u/w indices out of range");
    if (y < 0 || y >= C.rows() || z < 0 || z >= C.rows() || y == z)
        throw DimensionMismatch("model file: \"channels\" y/z indices out of range");
    Eigen::MatrixXd Bp(B.rows(), 2), Cp(2, C.cols());
    Bp.col(0) = B.col(u);
    Bp.col(1) = B.col(w);
    Cp.row(0) = C.row(y);
    Cp.row(1) = C.row(z);
    return LureModel(StateSpace(A, Bp, Cp), nonlinearity_from_json(j["phi"]));
}

inline LoadedModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open model file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ParseError("model file " + path + ": " + e.what());
    }
    return model_from_json(j);
}

inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj,
                                 bool include_states = false) {
    os << "t,y,z";
    if (include_states && !traj.states.empty())
        for (Eigen::Index i = 0; i < traj.states.front().size(); ++i) os << ",x" << (i + 1);
    os << '\n';
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        os << traj.times[k] << ',' << traj.y[k] << ',' << traj.z[k];
        if (include_states)
            for (Eigen::Index i = 0; i < traj.states[k].size(); ++i)
                os << ',' << traj.states[k](i);
        os << '\n';
    }
}

inline json circle_report_to_json(const CircleReport& c) {
    return {{"pass", c.pass},
            {"p_claimed", c.p_claimed},
            {"q_unstable", c.q_unstable},
            {"encirclements", c.encirclements},
            {"sector", {c.sector_alpha, c.sector_beta}},
            {"disk_condition", std::string(1, c.disk_condition)},
            {"min_margin", c.min_margin}};
}

inline json theorem_report_to_json(const Theorem1Report& r) {
    return {{"a1_pass", r.a1_pass},       {"a2_pass", r.a2_pass},
            {"a3_pass", r.a3_pass},       {"a4_pass", r.a4_pass},
            {"a1_margin", r.a1_margin},   {"a3_margin", r.a3_margin},
            {"a4_margin", r.a4_margin},   {"epsilon", r.epsilon},
            {"mu", r.mu},                 {"norm_zw", r.norm_zw},
            {"gain_product", r.gain_product}, {"p", r.p},
            {"rate", r.rate},             {"conclusion", r.conclusion},
            {"note", r.note}};
}

inline json limit_cycle_to_json(const LimitCycleReport& lc) {
    return {{"periodic", lc.periodic},
            {"period", lc.period},
            {"amplitude", lc.amplitude},
            {"crossings", lc.crossings}};
}

inline json benchmark_report_to_json(const BenchmarkReport& rep) {
    json j;
    j["spec"] = {{"n", rep.spec.n}, {"kappa", rep.spec.kappa}, {"kp", rep.spec.kp},
                 {"h", rep.spec.h()}};
    j["rate"] = rep.rate;
    j["mu"] = rep.mu;
    j["p"] = rep.p;
    j["norm_full_zw"] = rep.norm_full_zw;
    j["circle_full"] = circle_report_to_json(rep.circle_full);
    if (rep.simulated) j["limit_cycle_full"] = limit_cycle_to_json(rep.limit_cycle_full);
    json entries = json::array();
    for (const auto& e : rep.entries) {
        json je;
        je["nu"] = e.nu;
        je["error_bound"] = e.error_bound;
        je["error_bound_zw"] = e.error_bound_zw;
        je["error_norm"] = e.error_norm;
        je["norm_reduced_zw"] = e.norm_reduced_zw;
        je["circle_reduced"] = circle_report_to_json(e.circle_reduced);
        je["theorem1"] = theorem_report_to_json(e.theorem1);
        je["corollary1"] = theorem_report_to_json(e.corollary1);
        je["small_gain"] = {{"holds", e.small_gain_claim.holds},
                            {"degree", e.small_gain_claim.degree},
                            {"margin", e.small_gain_claim.margin}};
        if (rep.simulated) je["limit_cycle"] = limit_cycle_to_json(e.limit_cycle);
        je["reduced_model"] = model_to_json(e.reduced_model);
        entries.push_back(std::move(je));
    }
    j["reductions"] = std::move(entries);
    return j;
}

}  // namespace domred
