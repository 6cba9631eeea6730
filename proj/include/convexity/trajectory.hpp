#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "convexity/architecture.hpp"
#include "convexity/dataset.hpp"
#include "convexity/errors.hpp"
#include "convexity/weights.hpp"

namespace cvx::traj {

/// Second time derivative of gamma(t) = reg_loss(W(t)) under gradient flow,
/// by two independent routes. The hvp route is authoritative.
struct GammaSecond {
    double primary = 0.0;    // 2 <g, H g> with the frozen-piece hvp
    double secondary = 0.0;  // ||g|| * central difference of ||grad||^2 along g-hat
    double discrepancy = 0.0;  // |primary - secondary| / max(1, |primary|)
};
GammaSecond gamma_second(const Architecture& arch, const Weights& w, const Dataset& data,
                         double lambda);

/// gamma_dd / ||grad||^2; absent when ||grad||^2 <= floor_sq (vanishing
/// gradient: the ratio is undefined, never NaN-substituted).
std::optional<double> normalized_second(const Architecture& arch, const Weights& w,
                                        const Dataset& data, double lambda,
                                        double floor_sq = 1e-30);

struct Sample {
    double t = 0.0;
    double loss = 0.0;     // regularized loss gamma(t)
    double grad_sq = 0.0;  // ||grad reg_loss||^2
    double gamma_dd = 0.0; // primary route
    std::optional<double> normalized;
    bool boundary_hit = false;  // switch pattern changed since the previous
                                // logged sample, or the point sits within the
                                // boundary tolerance of a kink
};

struct TrajectoryRecord {
    std::vector<Sample> samples;
    double step = 0.0;        // integrator or optimizer step used
    double t1 = 0.0;          // terminal time (last logged t)
    std::optional<double> t0; // onset of the always-positive gamma_dd regime
    std::optional<double> C;  // min normalized value on [t0, t1]
    Weights final_weights;
};

/// DivergenceError that carries the samples logged before the blow-up, so
/// callers can keep a partial record.
struct TrajectoryDivergence : DivergenceError {
    TrajectoryRecord partial;
    TrajectoryDivergence(const std::string& msg, TrajectoryRecord rec)
        : DivergenceError(msg), partial(std::move(rec)) {}
};

struct FlowConfig {
    double step = 0.0;        // <= 0: use 1e-2 / (1 + ||grad(W0)||)
    double horizon = 1.0;     // integrate t in [0, horizon]
    int log_every = 1;        // record every log_every-th step (plus t = 0)
    double divergence_factor = 1e6;
};
/// Classical fixed-step 4th-order integration of W' = -grad reg_loss(W).
/// Throws DivergenceError when the loss exceeds divergence_factor times its
/// initial value, or (with a step-size suggestion) when a step increases the
/// loss by more than 1e-8 * |loss|.
TrajectoryRecord gradient_flow(const Architecture& arch, const Weights& w0, const Dataset& data,
                               double lambda, const FlowConfig& cfg);

struct RatePiece {
    long from_step = 0;
    double rate = 0.0;
};
struct SgdConfig {
    int batch_size = 0;
    int epochs = 0;
    std::vector<RatePiece> schedule;  // piecewise-constant; sorted by from_step
    std::uint64_t seed = 0;
    int log_every = 1;  // in optimizer steps; t is the step count
    double divergence_factor = 1e6;
};
/// Plain SGD (no momentum); weight decay enters through the regularized
/// gradient. Shuffling is a pure function of (seed, epoch), so records are
/// bit-identical across runs with the same config. Diagnostics are computed
/// on the full dataset at logging boundaries.
TrajectoryRecord sgd_train(const Architecture& arch, const Weights& w0, const Dataset& data,
                           double lambda, const SgdConfig& cfg);

/// Time of the first logged sample after which gamma_dd stays positive;
/// the first sample when all are positive; absent when the final sample has
/// gamma_dd <= 0. smooth_window > 1 applies a centered moving average to
/// gamma_dd before the sign rule (off by default).
std::optional<double> detect_t0(const TrajectoryRecord& traj, int smooth_window = 0);

/// (gamma(t0) - gamma(t1)) / (gamma(0) - gamma(t1)); absent when t0 is absent
/// or the trajectory is flat.
std::optional<double> loss_change_fraction(const TrajectoryRecord& traj);

struct GronwallReport {
    bool holds = false;
    double worst_ratio = 0.0;  // max of grad_sq(t) / (grad_sq(start) e^{-C (t-start)})
    double tol = 0.0;          // 10 * step^4 integrator allowance
    double from_time = 0.0;
};
/// Checks grad_sq(t) <= grad_sq(from_time) * e^{-C (t - from_time)} * (1+tol)
/// at every logged time >= from_time. Meaningful for gradient_flow records.
GronwallReport gronwall_check(const TrajectoryRecord& traj, double C, double from_time = 0.0);

/// Percentile with linear interpolation between order statistics.
double percentile(std::vector<double> values, double p);

struct PercentileStat {
    std::vector<std::optional<double>> per_trial;
    std::optional<double> mean;
    std::optional<double> stdev;  // sample standard deviation (n - 1)
};
/// Per trial: the p-th percentile of normalized values at t >= t0; absent for
/// trials without a regime. Mean/stdev across the trials that have one.
PercentileStat percentile_stat(const std::vector<TrajectoryRecord>& trials, double p);

}  // namespace cvx::traj
