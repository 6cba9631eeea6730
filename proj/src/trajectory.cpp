#include "convexity/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "convexity/errors.hpp"
#include "convexity/loss.hpp"
#include "convexity/net.hpp"
#include "convexity/region.hpp"
#include "convexity/rng.hpp"
#include "convexity/signature.hpp"

namespace cvx::traj {

GammaSecond gamma_second(const Architecture& arch, const Weights& w, const Dataset& data,
                         double lambda) {
    GammaSecond out;
    const Weights g = loss::gradient(arch, w, data, lambda);
    out.primary = 2.0 * g.dot(loss::hvp(arch, w, data, lambda, g));
    const double gn = g.norm();
    if (gn > 0.0) {
        // gamma_dd = <g, grad ||grad||^2> = ||g|| * d/dt ||grad(W + t g-hat)||^2,
        // with true (re-switched) gradients at the displaced points.
        const double h = 1e-6 * (1.0 + w.norm());
        Weights wp = w, wm = w;
        wp.add_scaled(g, h / gn);
        wm.add_scaled(g, -h / gn);
        const double sq_p = loss::gradient(arch, wp, data, lambda).squared_norm();
        const double sq_m = loss::gradient(arch, wm, data, lambda).squared_norm();
        out.secondary = gn * (sq_p - sq_m) / (2.0 * h);
    }
    out.discrepancy = std::abs(out.primary - out.secondary) / std::max(1.0, std::abs(out.primary));
    return out;
}

std::optional<double> normalized_second(const Architecture& arch, const Weights& w,
                                        const Dataset& data, double lambda, double floor_sq) {
    const Weights g = loss::gradient(arch, w, data, lambda);
    const double gsq = g.squared_norm();
    if (gsq <= floor_sq) return std::nullopt;
    return 2.0 * g.dot(loss::hvp(arch, w, data, lambda, g)) / gsq;
}

namespace {

// One logged row: full-data diagnostics at the current weights.
Sample diagnose(const Architecture& arch, const Weights& w, const Dataset& data, double lambda,
                double t, const SwitchSignature* prev_sig, SwitchSignature* sig_out) {
    Sample s;
    s.t = t;
    s.loss = loss::regularized_value(arch, w, data, lambda);
    const Weights g = loss::gradient(arch, w, data, lambda);
    s.grad_sq = g.squared_norm();
    s.gamma_dd = 2.0 * g.dot(loss::hvp(arch, w, data, lambda, g));
    if (s.grad_sq > 1e-30) s.normalized = s.gamma_dd / s.grad_sq;
    const SwitchSignature sig =
        net::switch_signature(arch, w, data, region::default_boundary_eps(w));
    s.boundary_hit = sig.any_boundary() || (prev_sig != nullptr && !sig.bits_equal(*prev_sig));
    if (sig_out) *sig_out = sig;
    return s;
}

void finalize(TrajectoryRecord& rec) {
    rec.t1 = rec.samples.empty() ? 0.0 : rec.samples.back().t;
    rec.t0 = detect_t0(rec);
    if (rec.t0) {
        double c = std::numeric_limits<double>::infinity();
        for (const Sample& s : rec.samples)
            if (s.t >= *rec.t0 && s.normalized) c = std::min(c, *s.normalized);
        if (std::isfinite(c)) rec.C = c;
    }
}

}  // namespace

TrajectoryRecord gradient_flow(const Architecture& arch, const Weights& w0, const Dataset& data,
                               double lambda, const FlowConfig& cfg) {
    check_shape(arch, w0);
    if (!(cfg.horizon > 0.0)) throw InvalidInput("flow horizon must be positive");
    if (cfg.log_every < 1) throw InvalidInput("logging period must be at least 1");

    auto grad = [&](const Weights& w) { return loss::gradient(arch, w, data, lambda); };

    double h = cfg.step;
    if (!(h > 0.0)) h = 1e-2 / (1.0 + grad(w0).norm());
    const long steps = std::max<long>(1, std::lround(std::ceil(cfg.horizon / h - 1e-12)));

    TrajectoryRecord rec;
    rec.step = h;
    Weights w = w0;
    SwitchSignature sig;
    rec.samples.push_back(diagnose(arch, w, data, lambda, 0.0, nullptr, &sig));
    const double initial = rec.samples.front().loss;
    double prev_loss = initial;

    for (long k = 1; k <= steps; ++k) {
        // Classical 4th-order step of W' = -grad.
        const Weights k1 = grad(w);
        Weights w2 = w;
        w2.add_scaled(k1, -0.5 * h);
        const Weights k2 = grad(w2);
        Weights w3 = w;
        w3.add_scaled(k2, -0.5 * h);
        const Weights k3 = grad(w3);
        Weights w4 = w;
        w4.add_scaled(k3, -h);
        const Weights k4 = grad(w4);
        Weights incr = k1;
        incr += k4;
        incr.add_scaled(k2, 2.0);
        incr.add_scaled(k3, 2.0);
        w.add_scaled(incr, -h / 6.0);

        const double cur = loss::regularized_value(arch, w, data, lambda);
        if (cur > prev_loss + 1e-8 * std::abs(prev_loss)) {
            finalize(rec);
            throw TrajectoryDivergence("loss increased along the flow at t = " +
                                           std::to_string(k * h) + "; retry with step <= " +
                                           std::to_string(h / 2.0),
                                       std::move(rec));
        }
        if (cur > cfg.divergence_factor * std::max(initial, 1e-300)) {
            finalize(rec);
            throw TrajectoryDivergence("flow diverged: loss exceeded " +
                                           std::to_string(cfg.divergence_factor) +
                                           "x its initial value",
                                       std::move(rec));
        }
        prev_loss = cur;

        if (k % cfg.log_every == 0 || k == steps) {
            SwitchSignature next;
            rec.samples.push_back(diagnose(arch, w, data, lambda, k * h, &sig, &next));
            sig = next;
        }
    }
    rec.final_weights = w;
    finalize(rec);
    return rec;
}

TrajectoryRecord sgd_train(const Architecture& arch, const Weights& w0, const Dataset& data,
                           double lambda, const SgdConfig& cfg) {
    check_shape(arch, w0);
    const int n = data.size();
    if (cfg.batch_size < 1 || cfg.batch_size > n)
        throw InvalidInput("batch size must lie in [1, N]");
    if (cfg.epochs < 1) throw InvalidInput("need at least one epoch");
    if (cfg.log_every < 1) throw InvalidInput("logging period must be at least 1");
    if (cfg.schedule.empty() || cfg.schedule.front().from_step != 0)
        throw InvalidInput("rate schedule must start at step 0");
    for (std::size_t i = 0; i < cfg.schedule.size(); ++i) {
        if (!(cfg.schedule[i].rate >= 0.0)) throw InvalidInput("learning rates must be nonnegative");
        if (i > 0 && cfg.schedule[i].from_step <= cfg.schedule[i - 1].from_step)
            throw InvalidInput("rate schedule steps must increase");
    }
    auto rate_at = [&](long step) {
        double r = cfg.schedule.front().rate;
        for (const RatePiece& p : cfg.schedule)
            if (p.from_step <= step) r = p.rate;
        return r;
    };

    TrajectoryRecord rec;
    rec.step = 1.0;  // t counts optimizer steps
    Weights w = w0;
    SwitchSignature sig;
    rec.samples.push_back(diagnose(arch, w, data, lambda, 0.0, nullptr, &sig));
    const double initial = rec.samples.front().loss;

    std::vector<int> order(n);
    const long total_steps =
        static_cast<long>(cfg.epochs) * ((n + cfg.batch_size - 1) / cfg.batch_size);
    long step = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), 0);
        const rng::Stream shuffle(cfg.seed, static_cast<std::uint64_t>(epoch));
        std::uint64_t counter = 0;
        for (int i = n - 1; i > 0; --i)
            std::swap(order[i],
                      order[shuffle.below(counter++, static_cast<std::uint64_t>(i) + 1)]);

        for (int at = 0; at < n; at += cfg.batch_size) {
            const int count = std::min(cfg.batch_size, n - at);
            const Weights g = loss::gradient_subset(arch, w, data, lambda, order.data() + at, count);
            w.add_scaled(g, -rate_at(step));
            ++step;
            if (step % cfg.log_every == 0 || step == total_steps) {
                SwitchSignature next;
                rec.samples.push_back(
                    diagnose(arch, w, data, lambda, static_cast<double>(step), &sig, &next));
                sig = next;
                if (rec.samples.back().loss > cfg.divergence_factor * std::max(initial, 1e-300)) {
                    finalize(rec);
                    throw TrajectoryDivergence("training diverged: loss exceeded " +
                                                   std::to_string(cfg.divergence_factor) +
                                                   "x its initial value",
                                               std::move(rec));
                }
            }
        }
    }
    rec.final_weights = w;
    finalize(rec);
    return rec;
}

std::optional<double> detect_t0(const TrajectoryRecord& traj, int smooth_window) {
    if (traj.samples.empty()) throw InvalidInput("empty trajectory");
    const int n = static_cast<int>(traj.samples.size());
    std::vector<double> dd(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) dd[static_cast<std::size_t>(i)] = traj.samples[i].gamma_dd;
    if (smooth_window > 1) {  // centered moving average, shrunk at the ends
        const int half = smooth_window / 2;
        std::vector<double> sm(dd.size());
        for (int i = 0; i < n; ++i) {
            const int lo = std::max(0, i - half), hi = std::min(n - 1, i + half);
            double acc = 0.0;
            for (int k = lo; k <= hi; ++k) acc += dd[static_cast<std::size_t>(k)];
            sm[static_cast<std::size_t>(i)] = acc / (hi - lo + 1);
        }
        dd.swap(sm);
    }
    int last_nonpos = -1;
    for (int i = 0; i < n; ++i)
        if (!(dd[static_cast<std::size_t>(i)] > 0.0)) last_nonpos = i;
    if (last_nonpos < 0) return traj.samples.front().t;
    if (last_nonpos + 1 == static_cast<int>(traj.samples.size())) return std::nullopt;
    return traj.samples[last_nonpos + 1].t;
}

std::optional<double> loss_change_fraction(const TrajectoryRecord& traj) {
    if (traj.samples.empty()) throw InvalidInput("empty trajectory");
    if (!traj.t0) return std::nullopt;
    const double g0 = traj.samples.front().loss;
    const double g1 = traj.samples.back().loss;
    if (g0 == g1) return std::nullopt;
    double gt0 = g0;
    for (const Sample& s : traj.samples)
        if (s.t == *traj.t0) {
            gt0 = s.loss;
            break;
        }
    return (gt0 - g1) / (g0 - g1);
}

GronwallReport gronwall_check(const TrajectoryRecord& traj, double C, double from_time) {
    if (traj.samples.empty()) throw InvalidInput("empty trajectory");
    GronwallReport rep;
    rep.tol = 10.0 * std::pow(traj.step, 4);
    rep.from_time = from_time;
    double base = -1.0, t_base = 0.0;
    rep.worst_ratio = 0.0;
    for (const Sample& s : traj.samples) {
        if (s.t < from_time) continue;
        if (base < 0.0) {
            base = s.grad_sq;
            t_base = s.t;
        }
        const double bound = base * std::exp(-C * (s.t - t_base));
        const double ratio = bound > 0.0
                                 ? s.grad_sq / bound
                                 : (s.grad_sq == 0.0 ? 1.0
                                                     : std::numeric_limits<double>::infinity());
        rep.worst_ratio = std::max(rep.worst_ratio, ratio);
    }
    if (base < 0.0) throw InvalidInput("no logged samples at or after the requested start time");
    rep.holds = rep.worst_ratio <= 1.0 + rep.tol;
    return rep;
}

double percentile(std::vector<double> values, double p) {
    if (values.empty()) throw InvalidInput("percentile of an empty series");
    if (p < 0.0 || p > 100.0) throw InvalidInput("percentile must lie in [0, 100]");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n == 1) return values[0];
    const double h = (static_cast<double>(n) - 1.0) * p / 100.0;
    const std::size_t lo = static_cast<std::size_t>(h);
    const double frac = h - static_cast<double>(lo);
    if (lo + 1 >= n) return values[n - 1];
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

PercentileStat percentile_stat(const std::vector<TrajectoryRecord>& trials, double p) {
    PercentileStat out;
    std::vector<double> have;
    for (const TrajectoryRecord& tr : trials) {
        std::optional<double> v;
        if (tr.t0) {
            std::vector<double> in_regime;
            for (const Sample& s : tr.samples)
                if (s.t >= *tr.t0 && s.normalized) in_regime.push_back(*s.normalized);
            if (!in_regime.empty()) v = percentile(std::move(in_regime), p);
        }
        if (v) have.push_back(*v);
        out.per_trial.push_back(v);
    }
    if (!have.empty()) {
        const double mean = std::accumulate(have.begin(), have.end(), 0.0) /
                            static_cast<double>(have.size());
        out.mean = mean;
        if (have.size() > 1) {
            double ss = 0.0;
            for (double v : have) ss += (v - mean) * (v - mean);
            out.stdev = std::sqrt(ss / (static_cast<double>(have.size()) - 1.0));
        }
    }
    return out;
}

}  // namespace cvx::traj
