#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "domred/statespace.hpp"

namespace domred {

/// Static scalar nonlinearity phi with phi(0) = 0. The set of kinds is closed
/// so sector bounds can be certified analytically. A nonzero `offset` c turns
/// any base kind into the loop-transformed phi(z) - c z.
struct StaticNonlinearity {
    enum class Kind { ScaledTanh, Linear };

    Kind kind = Kind::Linear;
    double gain = 0.0;
    double offset = 0.0;

    static StaticNonlinearity scaled_tanh(double k) { return {Kind::ScaledTanh, k, 0.0}; }
    static StaticNonlinearity linear(double k) { return {Kind::Linear, k, 0.0}; }

    double eval(double z) const {
        const double base = (kind == Kind::ScaledTanh) ? std::tanh(gain * z) : gain * z;
        return base - offset * z;
    }

    double deriv(double z) const {
        double base;
        if (kind == Kind::ScaledTanh) {
            const double c = std::cosh(gain * z);
            base = gain / (c * c);
        } else {
            base = gain;
        }
        return base - offset;
    }

    /// Exact range of deriv over R, [sector_low, sector_high].
    std::pair<double, double> sector() const {
        if (kind == Kind::ScaledTanh) {
            const double lo = std::min(0.0, gain);
            const double hi = std::max(0.0, gain);
            return {lo - offset, hi - offset};
        }
        return {gain - offset, gain - offset};
    }

    std::string kind_name() const {
        switch (kind) {
            case Kind::ScaledTanh: return offset != 0.0 ? "shifted_scaled_tanh" : "scaled_tanh";
            case Kind::Linear: return offset != 0.0 ? "shifted_linear" : "linear";
        }
        return "unknown";
    }
};

/// Lure model: a 2-input/2-output linear block (inputs u, w; outputs y, z) in
/// feedback with w = -phi(z). Column 0 of B is Bu, column 1 Bw; row 0 of C is
/// Cy, row 1 Cz.
struct LureModel {
    StateSpace linear;
    StaticNonlinearity phi;

    LureModel() = default;
    LureModel(StateSpace lin, StaticNonlinearity nl) : linear(std::move(lin)), phi(nl) {
        if (linear.inputs() != 2 || linear.outputs() != 2)
            throw DimensionMismatch("LureModel: linear block must be 2x2 (u,w -> y,z)");
    }

    Eigen::VectorXd Bu() const { return linear.B.col(0); }
    Eigen::VectorXd Bw() const { return linear.B.col(1); }
    Eigen::RowVectorXd Cy() const { return linear.C.row(0); }
    Eigen::RowVectorXd Cz() const { return linear.C.row(1); }

    /// SISO channel w -> z of the linear block.
    StateSpace zw_channel() const { return {linear.A, Bw(), Cz()}; }

    /// Closed-loop vector field x' = Ax + Bu u - Bw phi(Cz x).
    Eigen::VectorXd vector_field(const Eigen::VectorXd& x, double u) const {
        const double z = (Cz() * x).value();
        return linear.A * x + Bu() * u - Bw() * phi.eval(z);
    }
};

/// Moves a linear gain c from the nonlinearity into the linear block:
/// A' = A - c Bw Cz and phi'(z) = phi(z) - c z. The closed-loop vector field
/// is unchanged for every (x, u); the zw transfer becomes Gzw/(1 + c Gzw).
inline LureModel loop_transform(const LureModel& model, double c) {
    Eigen::MatrixXd A = model.linear.A - c * (model.Bw() * model.Cz());
    StaticNonlinearity phi = model.phi;
    phi.offset += c;
    return {StateSpace(std::move(A), model.linear.B, model.linear.C), phi};
}

/// Simulated closed-loop trajectory on a uniform time grid.
struct Trajectory {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> states;
    std::vector<double> y;
    std::vector<double> z;
    double dt = 0.0;
    std::string method = "rk4";
    bool diverged = false;  ///< true if the run aborted early on NaN/overflow
};

/// Classical RK4 integration of the closed loop. dt must satisfy the explicit
/// stability guard dt <= 0.5 / rho(A). On divergence (state norm beyond 1e12
/// or non-finite) the partial trajectory is returned with `diverged` set.
inline Trajectory simulate(const LureModel& model, const Eigen::VectorXd& x0,
                           const std::function<double(double)>& u, double t_end, double dt) {
    if (x0.size() != model.linear.order())
        throw DimensionMismatch("simulate: x0 has wrong dimension");
    if (dt <= 0.0 || t_end < 0.0) throw StepTooLarge("simulate: need dt > 0 and t_end >= 0");
    Eigen::EigenSolver<Eigen::MatrixXd> es(model.linear.A, false);
    if (es.info() != Eigen::Success) throw EigenFailure("eigensolver did not converge");
    const double rho = model.linear.order() > 0 ? es.eigenvalues().cwiseAbs().maxCoeff() : 0.0;
    if (rho > 0.0 && dt > 0.5 / rho)
        throw StepTooLarge("simulate: dt exceeds the stability guard 0.5/rho(A) = " +
                           std::to_string(0.5 / rho));

    const auto f = [&](double t, const Eigen::VectorXd& x) {
        return model.vector_field(x, u ? u(t) : 0.0);
    };

    const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
    Trajectory traj;
    traj.dt = dt;
    traj.times.reserve(steps + 1);
    traj.states.reserve(steps + 1);
    traj.y.reserve(steps + 1);
    traj.z.reserve(steps + 1);

    Eigen::VectorXd x = x0;
    for (std::size_t k = 0; k <= steps; ++k) {
        const double t = static_cast<double>(k) * dt;
        traj.times.push_back(t);
        traj.states.push_back(x);
        traj.y.push_back((model.Cy() * x).value());
        traj.z.push_back((model.Cz() * x).value());
        if (!x.allFinite() || x.norm() > 1e12) {
            traj.diverged = true;
            break;
        }
        if (k == steps) break;
        const Eigen::VectorXd k1 = f(t, x);
        const Eigen::VectorXd k2 = f(t + dt / 2, x + (dt / 2) * k1);
        const Eigen::VectorXd k3 = f(t + dt / 2, x + (dt / 2) * k2);
        const Eigen::VectorXd k4 = f(t + dt, x + dt * k3);
        x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return traj;
}

struct LimitCycleReport {
    bool periodic = false;
    double period = 0.0;
    double amplitude = 0.0;
    int crossings = 0;
};

/// Zero-crossing based periodicity witness on the y output. Discards the
/// transient prefix, then requires at least 4 consecutive upward-crossing
/// intervals agreeing within 2% and a half peak-to-peak amplitude over the
/// last period above 1e-6.
inline LimitCycleReport detect_limit_cycle(const Trajectory& traj,
                                           double transient_fraction = 0.5) {
    if (transient_fraction < 0.0 || transient_fraction >= 1.0)
        throw TooShort("detect_limit_cycle: transient_fraction must be in [0, 1)");
    const std::size_t total = traj.y.size();
    const auto start = static_cast<std::size_t>(transient_fraction * static_cast<double>(total));
    if (total < 10 || total - start < 10)
        throw TooShort("detect_limit_cycle: trajectory too short after transient discard");

    double mean = 0.0;
    for (std::size_t k = start; k < total; ++k) mean += traj.y[k];
    mean /= static_cast<double>(total - start);

    // Upward zero crossings of y - mean, with linear interpolation in time.
    std::vector<double> crossings;
    for (std::size_t k = start + 1; k < total; ++k) {
        const double a = traj.y[k - 1] - mean;
        const double b = traj.y[k] - mean;
        if (a < 0.0 && b >= 0.0) {
            const double frac = (b - a) > 0.0 ? -a / (b - a) : 0.0;
            crossings.push_back(traj.times[k - 1] + frac * traj.dt);
        }
    }

    LimitCycleReport rep;
    rep.crossings = static_cast<int>(crossings.size());
    if (crossings.size() < 5) return rep;

    std::vector<double> intervals;
    for (std::size_t k = 1; k < crossings.size(); ++k)
        intervals.push_back(crossings[k] - crossings[k - 1]);
    const std::size_t m = intervals.size();
    const std::size_t tail = std::min<std::size_t>(m, 4);
    double sum = 0.0;
    for (std::size_t k = m - tail; k < m; ++k) sum += intervals[k];
    const double mean_int = sum / static_cast<double>(tail);
    bool regular = true;
    for (std::size_t k = m - tail; k < m; ++k)
        if (std::abs(intervals[k] - mean_int) > 0.02 * mean_int) regular = false;

    // Amplitude over the last full period.
    double lo = traj.y.back(), hi = traj.y.back();
    const double t_from = traj.times.back() - mean_int;
    for (std::size_t k = start; k < total; ++k) {
        if (traj.times[k] >= t_from) {
            lo = std::min(lo, traj.y[k]);
            hi = std::max(hi, traj.y[k]);
        }
    }
    rep.period = mean_int;
    rep.amplitude = 0.5 * (hi - lo);
    rep.periodic = regular && rep.amplitude > 1e-6;
    return rep;
}

struct SectorCheck {
    bool pass = false;
    double worst_z = 0.0;
};

/// Checks alpha <= dphi(z) <= beta. The sampled sweep over [-z_max, z_max] is
/// backed by the exact per-kind derivative range, so the verdict is not
/// grid-limited for the built-in kinds.
inline SectorCheck sector_bounds_check(const StaticNonlinearity& phi, double alpha, double beta,
                                       double z_max = 10.0, int grid_points = 2001) {
    if (alpha >= beta) throw StructureMismatch("sector_bounds_check: need alpha < beta");
    if (grid_points < 1000) grid_points = 1000;
    SectorCheck out;
    out.pass = true;
    double worst_excess = 0.0;
    for (int k = 0; k < grid_points; ++k) {
        const double z = -z_max + 2.0 * z_max * k / (grid_points - 1);
        const double d = phi.deriv(z);
        const double excess = std::max(alpha - d, d - beta);
        if (excess > worst_excess) {
            worst_excess = excess;
            out.worst_z = z;
        }
    }
    const auto [lo, hi] = phi.sector();
    if (worst_excess > 0.0 || lo < alpha || hi > beta) {
        out.pass = false;
        if (worst_excess == 0.0) out.worst_z = 0.0;  // analytic range violated at the extremum
    }
    return out;
}

}  // namespace domred
