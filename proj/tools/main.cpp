// domred command-line frontend: model reduction and dominance analysis for
// Lure systems. JSON reports go to stdout, CSV plot data to --out. Exit codes:
// 0 success, 2 analysis failed (assumptions violated), 1 error.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "domred/balanced_truncation.hpp"
#include "domred/dominance.hpp"
#include "domred/heatflow.hpp"
#include "domred/io.hpp"

namespace fs = std::filesystem;
using namespace domred;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitAnalysisFail = 2;

Eigen::VectorXd parse_x0(const std::string& spec, int n) {
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(n);
    if (spec.empty()) return x0;
    std::stringstream ss(spec);
    std::string tok;
    int i = 0;
    while (std::getline(ss, tok, ',')) {
        if (i >= n) throw ParseError("--x0 has more entries than states");
        x0(i++) = std::stod(tok);
    }
    return x0;
}

void write_file(const fs::path& dir, const std::string& name,
                const std::function<void(std::ostream&)>& emit) {
    fs::create_directories(dir);
    std::ofstream os(dir / name);
    if (!os) throw Error("cannot open output file " + (dir / name).string());
    emit(os);
}

const StateSpace& linear_block(const LoadedModel& m) {
    if (std::holds_alternative<LureModel>(m)) return std::get<LureModel>(m).linear;
    return std::get<StateSpace>(m);
}

StateSpace analysis_channel(const LoadedModel& m) {
    if (std::holds_alternative<LureModel>(m)) return std::get<LureModel>(m).zw_channel();
    return std::get<StateSpace>(m);
}

json vector_to_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

int cmd_reduce(const std::string& path, double rate, int order, const std::string& out_dir) {
    const LoadedModel m = load_model(path);
    json report;
    if (std::holds_alternative<LureModel>(m)) {
        auto [reduced, red] = reduce_dominant_lure(std::get<LureModel>(m), rate, order);
        report["reduced_model"] = model_to_json(reduced);
        report["hsv"] = vector_to_json(red.hsv);
        report["error_bound"] = red.error_bound;
        report["dominant_order"] = red.dominant_order;
        report["rank_limited"] = red.rank_limited;
    } else {
        const auto& sys = std::get<StateSpace>(m);
        const SpectralSplit sp = split(sys, rate);
        if (order < sp.p)
            throw OrderTooSmall("reduce: order " + std::to_string(order) +
                                " is below the dominant degree p = " + std::to_string(sp.p));
        const auto red =
            balance_and_truncate(sp.nondominant, rate,
                                 std::min(order - sp.p, sp.nondominant.order()));
        const int p = sp.p, r = red.reduced.order();
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(p + r, p + r);
        A.topLeftCorner(p, p) = sp.dominant.A;
        A.bottomRightCorner(r, r) = red.reduced.A;
        Eigen::MatrixXd B(p + r, sys.inputs());
        B.topRows(p) = sp.dominant.B;
        B.bottomRows(r) = red.reduced.B;
        Eigen::MatrixXd C(sys.outputs(), p + r);
        C.leftCols(p) = sp.dominant.C;
        C.rightCols(r) = red.reduced.C;
        report["reduced_model"] = model_to_json(StateSpace(A, B, C));
        report["hsv"] = vector_to_json(red.hsv);
        report["error_bound"] = red.error_bound;
        report["dominant_order"] = p;
        report["rank_limited"] = red.rank_limited;
    }
    report["rate"] = rate;
    report["order"] = order;
    std::cout << report.dump(2) << '\n';
    (void)out_dir;
    return kExitOk;
}

int cmd_analyze(const std::string& path, double rate, std::optional<std::pair<double, double>> sector,
                const std::string& out_dir) {
    const LoadedModel m = load_model(path);
    const StateSpace& lin = linear_block(m);
    const StateSpace chan = analysis_channel(m);

    json report;
    const auto mc = classify_modes(lin, rate);
    report["rate"] = rate;
    report["p_dominant"] = mc.p_dominant;
    report["n_nondominant"] = mc.n_nondominant;
    report["boundary_count"] = mc.boundary_count;

    bool pass = mc.boundary_count == 0;
    const auto hr = hinf_p_norm(chan, rate);
    report["hinf_p_norm"] = {{"gamma", hr.gamma},
                             {"p", hr.p},
                             {"rate", hr.rate},
                             {"peak_frequency", hr.peak_frequency}};

    if (sector) {
        if (chan.inputs() != 1 || chan.outputs() != 1)
            throw DimensionMismatch("analyze: --sector requires a SISO channel");
        const auto cr = circle_criterion(chan, rate, sector->first, sector->second);
        report["circle"] = circle_report_to_json(cr);
        pass = pass && cr.pass;
    }

    if (!out_dir.empty() && chan.inputs() == 1 && chan.outputs() == 1) {
        const double rho = std::max(1.0, mc.eigenvalues.cwiseAbs().maxCoeff());
        write_file(out_dir, "nyquist.csv", [&](std::ostream& os) {
            write_nyquist_csv(os, chan, rate, 1e-3 * rho, 1e3 * rho, 2000);
        });
        write_file(out_dir, "bode.csv", [&](std::ostream& os) {
            write_bode_csv(os, chan, rate, 1e-3 * rho, 1e3 * rho, 2000);
        });
    }

    report["pass"] = pass;
    std::cout << report.dump(2) << '\n';
    return pass ? kExitOk : kExitAnalysisFail;
}

int cmd_certify(const std::string& path, double rate) {
    const LoadedModel m = load_model(path);
    const StateSpace& lin = linear_block(m);
    json report;
    try {
        const auto cert = dominance_certificate(lin, rate);
        report["rate"] = cert.rate;
        report["epsilon"] = cert.epsilon;
        report["residual_max_eig"] = cert.residual_max_eig;
        report["inertia"] = {cert.inertia_neg, cert.inertia_zero, cert.inertia_pos};
        report["P"] = matrix_to_json(cert.P);
        report["valid"] = true;
        std::cout << report.dump(2) << '\n';
        return kExitOk;
    } catch (const CertificateInvalid& e) {
        report["valid"] = false;
        report["reason"] = e.what();
        std::cout << report.dump(2) << '\n';
        return kExitAnalysisFail;
    }
}

int cmd_simulate(const std::string& path, double t_end, double dt, const std::string& x0_spec,
                 const std::string& out_dir, bool with_states) {
    const LoadedModel m = load_model(path);
    if (!std::holds_alternative<LureModel>(m))
        throw StructureMismatch("simulate: model file must contain a Lure model (channels + phi)");
    const LureModel& model = std::get<LureModel>(m);
    const Eigen::VectorXd x0 = parse_x0(x0_spec, model.linear.order());
    const auto traj = simulate(model, x0, nullptr, t_end, dt);

    json report;
    report["steps"] = traj.times.size();
    report["dt"] = dt;
    report["t_end"] = t_end;
    report["diverged"] = traj.diverged;
    try {
        const auto lc = detect_limit_cycle(traj);
        report["limit_cycle"] = limit_cycle_to_json(lc);
    } catch (const TooShort&) {
        report["limit_cycle"] = nullptr;
    }
    if (!out_dir.empty())
        write_file(out_dir, "trajectory.csv",
                   [&](std::ostream& os) { write_trajectory_csv(os, traj, with_states); });
    std::cout << report.dump(2) << '\n';
    return traj.diverged ? kExitAnalysisFail : kExitOk;
}

int cmd_heatflow(int n, double kappa, double kp, double rate, const std::vector<int>& orders,
                 bool emit_model, bool with_sim, const std::string& out_dir) {
    const HeatflowSpec spec{n, kappa, kp};
    if (emit_model) {
        std::cout << model_to_json(build_heatflow(spec)).dump(2) << '\n';
        return kExitOk;
    }
    std::optional<SimulationOptions> sim;
    if (with_sim) sim = SimulationOptions{};
    const auto rep = reproduce_paper(spec, rate, orders, sim);
    std::cout << benchmark_report_to_json(rep).dump(2) << '\n';

    if (!out_dir.empty()) {
        const double rho = 4.0 * kappa / (spec.h() * spec.h());
        write_file(out_dir, "bode_system.csv", [&](std::ostream& os) {
            write_bode_csv(os, rep.transformed.zw_channel(), rate, 1.0, 1e3, 2000);
        });
        write_file(out_dir, "nyquist_system.csv", [&](std::ostream& os) {
            write_nyquist_csv(os, rep.transformed.zw_channel(), rate, 1e-3 * rho, 1e3 * rho,
                              4000);
        });
        for (const auto& e : rep.entries) {
            write_file(out_dir, "bode_rom_nu" + std::to_string(e.nu) + ".csv",
                       [&](std::ostream& os) {
                           write_bode_csv(os, e.reduced_model.zw_channel(), rate, 1.0, 1e3,
                                          2000);
                       });
        }
    }

    bool ok = rep.circle_full.pass;
    for (const auto& e : rep.entries)
        ok = ok && e.theorem1.conclusion && e.corollary1.conclusion;
    return ok ? kExitOk : kExitAnalysisFail;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dominance-preserving model reduction toolkit for Lure systems"};
    app.require_subcommand(1);

    std::string model_path, out_dir, x0_spec;
    double rate = 0.0, t_end = 1.0, dt = 1e-3;
    int order = 0;
    std::vector<double> sector_vals;
    bool with_states = false;

    auto* reduce = app.add_subcommand("reduce", "split + balanced truncation at a rate");
    reduce->add_option("model", model_path, "model JSON file")->required();
    reduce->add_option("--rate", rate, "dominance rate lambda")->required();
    reduce->add_option("--order", order, "target reduced order nu")->required();
    reduce->add_option("--out", out_dir, "output directory for CSV artifacts");

    auto* analyze = app.add_subcommand("analyze", "mode classification, H-infinity,p norm, circle criterion");
    analyze->add_option("model", model_path)->required();
    analyze->add_option("--rate", rate)->required();
    analyze->add_option("--sector", sector_vals, "sector bounds alpha beta")->expected(2);
    analyze->add_option("--out", out_dir, "output directory for Nyquist/Bode CSV");

    auto* certify = app.add_subcommand("certify", "linear dominance certificate at a rate");
    certify->add_option("model", model_path)->required();
    certify->add_option("--rate", rate)->required();

    auto* simulate_cmd = app.add_subcommand("simulate", "closed-loop RK4 simulation");
    simulate_cmd->add_option("model", model_path)->required();
    simulate_cmd->add_option("--tend", t_end, "final time")->required();
    simulate_cmd->add_option("--dt", dt, "time step")->required();
    simulate_cmd->add_option("--x0", x0_spec, "comma-separated initial state (default zero)");
    simulate_cmd->add_flag("--states", with_states, "include state columns in trajectory CSV");
    simulate_cmd->add_option("--out", out_dir);

    int hf_n = 29;
    double hf_kappa = 1.0, hf_kp = 20.0, hf_rate = 12.0;
    std::vector<int> hf_orders{3, 4, 5};
    bool emit_model = false, hf_sim = false;
    auto* heatflow = app.add_subcommand("heatflow", "heat-flow benchmark pipeline");
    heatflow->add_option("--n", hf_n, "discretization states");
    heatflow->add_option("--kappa", hf_kappa, "thermal diffusivity");
    heatflow->add_option("--kp", hf_kp, "proportional gain");
    heatflow->add_option("--rate", hf_rate, "dominance rate lambda");
    heatflow->add_option("--orders", hf_orders, "reduced orders")->delimiter(',');
    heatflow->add_flag("--emit-model", emit_model, "print the model JSON and exit");
    heatflow->add_flag("--simulate", hf_sim, "also run closed-loop simulations");
    heatflow->add_option("--out", out_dir, "output directory for CSV artifacts");

    try {
        app.parse(argc, argv);
        if (*reduce) return cmd_reduce(model_path, rate, order, out_dir);
        if (*analyze) {
            std::optional<std::pair<double, double>> sector;
            if (!sector_vals.empty()) sector = {sector_vals[0], sector_vals[1]};
            return cmd_analyze(model_path, rate, sector, out_dir);
        }
        if (*certify) return cmd_certify(model_path, rate);
        if (*simulate_cmd)
            return cmd_simulate(model_path, t_end, dt, x0_spec, out_dir, with_states);
        if (*heatflow)
            return cmd_heatflow(hf_n, hf_kappa, hf_kp, hf_rate, hf_orders, emit_model, hf_sim,
                                out_dir);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}
