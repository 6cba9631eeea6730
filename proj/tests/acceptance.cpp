// Acceptance gate: ten numbered checks over the public API, one pass/fail
// line each. Exits nonzero when any check fails, so ctest reports the gate
// as a single test.

#include "support.hpp"

#include "convexity/data_io.hpp"
#include "convexity/linear.hpp"
#include "convexity/region.hpp"
#include "convexity/trajectory.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool ok = false;
    std::string detail;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// 1. analytic gradient vs central differences: 200 draws, arch <= (8,8,8,1),
//    n <= 32, relative error < 1e-6.
Outcome c01_gradient() {
    const std::vector<std::vector<int>> archs = {
        {2, 3, 1}, {4, 4, 1}, {5, 8, 3, 1}, {8, 8, 8, 1}};
    const double lambdas[3] = {0.0, 0.1, 0.5};
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
        const cvx::Architecture arch(archs[static_cast<std::size_t>(i % 4)]);
        const int n = 4 + (i * 7) % 29;
        const cvx::Dataset data = ts::random_data(arch.width(0), n, 1000 + i, 1.0);
        const cvx::Weights w = ts::smooth_gaussian(arch, data, 2000 + i, 0.7, 1e-3);
        const double lambda = lambdas[i % 3];
        const Eigen::VectorXd g = cvx::loss::gradient(arch, w, data, lambda).to_flat();
        const Eigen::VectorXd fd = ts::fd_gradient(arch, w, data, lambda);
        const double rel = (g - fd).norm() / std::max(1.0, fd.norm());
        worst = std::max(worst, rel);
        if (rel >= 1e-6)
            return {false, "draw " + std::to_string(i) + " rel err " + fmt("%.2e", rel)};
    }
    return {true, "200 draws, max rel err " + fmt("%.1e", worst)};
}

// 2. frozen directional second derivatives never cross the curvature floor:
//    10^4 (W, X) pairs over 20 datasets, plus the hand-checked floor value.
Outcome c02_floor() {
    const double t1_floor =
        cvx::region::curvature_floor(ts::t1_arch(), ts::t1_weights(), ts::t1_data(), 1.0);
    if (std::abs(t1_floor + 1.0) > 1e-12)
        return {false, "fixture floor " + fmt("%.17g", t1_floor) + " != -1"};

    const std::vector<std::vector<int>> archs = {
        {2, 3, 1}, {3, 4, 1}, {2, 4, 2, 1}, {4, 5, 1}};
    long violations = 0;
    double min_slack = std::numeric_limits<double>::infinity();
    for (int ds = 0; ds < 20; ++ds) {
        const cvx::Architecture arch(archs[static_cast<std::size_t>(ds % 4)]);
        const cvx::Dataset data = ts::random_data(arch.width(0), 5 + ds % 8, 400 + ds, 1.3);
        for (int k = 0; k < 5; ++k) {
            const cvx::Weights w =
                cvx::Weights::gaussian(arch, cvx::rng::splitmix(900 + ds * 10 + k),
                                       0.6 + 0.1 * k);
            const auto audit = cvx::region::audit_floor(arch, w, data, 100,
                                                        static_cast<std::uint64_t>(77 + ds * 5 + k));
            violations += audit.violations;
            min_slack = std::min(min_slack, audit.worst_slack);
        }
    }
    if (violations != 0)
        return {false, std::to_string(violations) + " floor violations"};
    return {true, "10000 pairs, 0 violations, min slack " + fmt("%.2e", min_slack)};
}

// 3. every in-region point carries the eigenvalue floor: interpolating
//    teacher students plus 50 perturbed in-region points at depths 1, 2, 3.
Outcome c03_certification() {
    struct Case {
        std::vector<int> widths;
        std::uint64_t seed;
    };
    const std::vector<Case> cases = {
        {{6, 8, 1}, 7}, {{6, 10, 8, 1}, 8}, {{8, 8, 8, 8, 1}, 9}};
    const double lambda = 0.5, theta = 0.1;
    double min_eig = std::numeric_limits<double>::infinity();
    for (const Case& c : cases) {
        const cvx::Architecture arch(c.widths);
        const auto td = cvx::io::gen_teacher({arch, 0.5, 0.0, 16, c.seed, 1.0});
        const cvx::region::RegionSpec spec(lambda, theta, td.data.radius(),
                                           arch.hidden_depth());

        const auto base = cvx::region::certify(arch, td.teacher_weights, td.data, spec);
        if (!base.in_region) return {false, "interpolating point left the region"};
        if (base.min_eig < theta - 1e-6)
            return {false, "interpolating min eig " + fmt("%.3e", base.min_eig)};
        min_eig = std::min(min_eig, base.min_eig);

        int collected = 0, rejects = 0;
        double eps = 0.02;
        for (int trial = 0; trial < 4000 && collected < 50; ++trial) {
            cvx::Weights w = td.teacher_weights;
            w.add_scaled(cvx::Weights::gaussian(
                             arch, cvx::rng::splitmix(c.seed * 77 + static_cast<std::uint64_t>(trial)),
                             1.0),
                         eps);
            if (!cvx::region::membership(arch, w, td.data, spec).in_region) {
                if (++rejects >= 25) {
                    eps *= 0.5;
                    rejects = 0;
                }
                continue;
            }
            rejects = 0;
            const auto cert = cvx::region::certify(arch, w, td.data, spec);
            if (cert.min_eig < theta - 1e-6)
                return {false, "depth " + std::to_string(arch.hidden_depth()) +
                                   " in-region min eig " + fmt("%.3e", cert.min_eig)};
            min_eig = std::min(min_eig, cert.min_eig);
            ++collected;
        }
        if (collected < 50)
            return {false, "only " + std::to_string(collected) + " in-region points at depth " +
                               std::to_string(arch.hidden_depth())};
    }
    return {true, "153 certified points, min eigenvalue " + fmt("%.4f", min_eig)};
}

// 4. the frozen Laplacian is a sum of squares: nonnegative on 1000 smooth
//    points and equal to the Hessian trace to 1e-8.
Outcome c04_laplacian() {
    const std::vector<std::vector<int>> archs = {{2, 3, 1}, {3, 4, 1}, {2, 4, 2, 1}};
    double worst_dev = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const cvx::Architecture arch(archs[static_cast<std::size_t>(i % 3)]);
        const cvx::Dataset data = ts::random_data(arch.width(0), 5 + i % 6, 1700 + i, 1.0);
        const cvx::Weights w = ts::smooth_gaussian(arch, data, 2700 + i, 0.8, 1e-4);
        const double lap = cvx::loss::laplacian(arch, w, data);
        if (lap < 0.0) return {false, "negative laplacian " + fmt("%.3e", lap)};
        const double tr = cvx::loss::full_hessian(arch, w, data, 0.0).trace();
        const double dev = std::abs(tr - lap) / std::max(1.0, std::abs(lap));
        worst_dev = std::max(worst_dev, dev);
        if (dev > 1e-8) return {false, "trace deviation " + fmt("%.3e", dev)};
    }
    return {true, "1000 points >= 0, max trace dev " + fmt("%.1e", worst_dev)};
}

// 5. the second time derivative of the loss along the flow agrees between the
//    hvp route and the finite-difference-of-gradients route.
Outcome c05_two_routes() {
    const std::vector<std::vector<int>> archs = {
        {2, 3, 1}, {3, 4, 1}, {2, 4, 2, 1}, {4, 5, 1}};
    const double lambdas[3] = {0.0, 0.2, 0.7};
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const cvx::Architecture arch(archs[static_cast<std::size_t>(i % 4)]);
        const cvx::Dataset data = ts::random_data(arch.width(0), 4 + i % 7, 3300 + i, 1.0);
        const cvx::Weights w = ts::smooth_gaussian(arch, data, 4400 + i, 0.8, 1e-3);
        const auto gs = cvx::traj::gamma_second(arch, w, data, lambdas[i % 3]);
        worst = std::max(worst, gs.discrepancy);
        if (gs.discrepancy > 1e-5)
            return {false, "draw " + std::to_string(i) + " discrepancy " +
                               fmt("%.2e", gs.discrepancy)};
    }
    return {true, "1000 points, max rel discrepancy " + fmt("%.1e", worst)};
}

// 6. gradient-flow decay: the pure-decay dataset reproduces the closed-form
//    gradient norm at t = 1, and a teacher-data flow satisfies the decay
//    bound with C taken from the trajectory itself.
Outcome c06_flow_decay() {
    const cvx::Architecture arch({2, 3, 1});
    const cvx::Dataset bowl = ts::bowl_data(2, 4);
    const cvx::Weights w0 = cvx::Weights::gaussian(arch, cvx::rng::splitmix(31), 0.5);
    cvx::traj::FlowConfig cfg;
    cfg.step = 0.005;
    cfg.horizon = 1.0;
    cfg.log_every = 200;
    const auto rec = cvx::traj::gradient_flow(arch, w0, bowl, 1.0, cfg);
    const double got = rec.samples.back().grad_sq;
    const double want = rec.samples.front().grad_sq * std::exp(-2.0);
    const double rel = std::abs(got - want) / want;
    if (rec.samples.back().t != 1.0 || rel > 1e-6)
        return {false, "decay mismatch at t=1: rel " + fmt("%.2e", rel)};

    const auto td = cvx::io::gen_teacher({arch, 0.6, 0.0, 10, 55, 1.0});
    cvx::Weights start = td.teacher_weights;
    start.add_scaled(cvx::Weights::gaussian(arch, cvx::rng::splitmix(14), 1.0), 0.05);
    cvx::traj::FlowConfig tcfg;
    tcfg.step = 0.01;
    tcfg.horizon = 5.0;
    tcfg.log_every = 5;
    const auto trec = cvx::traj::gradient_flow(arch, start, td.data, 0.3, tcfg);
    if (!trec.t0 || !trec.C) return {false, "no positive-curvature window on teacher data"};
    const auto g = cvx::traj::gronwall_check(trec, *trec.C, *trec.t0);
    if (!g.holds)
        return {false, "bound violated: worst ratio " + fmt("%.6f", g.worst_ratio)};
    return {true, "closed form rel " + fmt("%.1e", rel) + ", bound ratio " +
                      fmt("%.6f", g.worst_ratio)};
}

// 7. linear nets: multi-start descent finds no nonzero near-critical point
//    inside the region, and the loss is rotation invariant.
Outcome c07_linear() {
    for (int i = 0; i < 10; ++i) {
        const cvx::Architecture arch(i % 2 ? std::vector<int>{2, 3, 1}
                                           : std::vector<int>{3, 4, 1});
        const cvx::Dataset data = ts::random_data(arch.width(0), 10 + i, 5000 + i, 1.0);
        const auto found = cvx::linear::critical_search(arch, data, 0.4, 32,
                                                        static_cast<std::uint64_t>(6000 + i));
        for (const auto& fp : found)
            if (fp.near_critical && fp.norm > 1e-6 && fp.in_region)
                return {false, "dataset " + std::to_string(i) +
                                   ": nonzero critical point in region, norm " +
                                   fmt("%.3e", fp.norm)};
    }

    const cvx::Architecture arch({3, 4, 3, 1});
    const cvx::Dataset data = ts::random_data(3, 8, 7000, 1.0);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        const cvx::Weights w = cvx::Weights::gaussian(arch, cvx::rng::splitmix(7100 + k), 0.9);
        cvx::linear::RotationPlan plan;
        plan.layer = k % 2;
        plan.rotation = cvx::linear::sample_rotation(arch.width(plan.layer + 1),
                                                     0.3 + 0.01 * k,
                                                     static_cast<std::uint64_t>(7200 + k));
        const double before = cvx::linear::value(arch, w, data, 0.3);
        const double after =
            cvx::linear::value(arch, cvx::linear::rotate_weights(w, plan), data, 0.3);
        const double rel = std::abs(after - before) / (1.0 + std::abs(before));
        worst = std::max(worst, rel);
        if (rel > 1e-10)
            return {false, "rotation " + std::to_string(k) + " moved the loss by rel " +
                               fmt("%.2e", rel)};
    }
    return {true, "320 descents clean, max rotation dev " + fmt("%.1e", worst)};
}

// 8. at certified converged critical points, every sphere perturbation at
//    radius 1e-2 increases the loss by at least (theta/2) r^2 (1 - 1e-3).
Outcome c08_isolation() {
    const cvx::Architecture arch({2, 4, 1});
    const double lambda = 0.8, theta = 0.1, radius = 1e-2;
    const double bound = 0.5 * theta * radius * radius * (1.0 - 1e-3);
    double worst_margin = std::numeric_limits<double>::infinity();
    for (int s = 1; s <= 3; ++s) {
        const auto td =
            cvx::io::gen_teacher({arch, 0.08, 0.0, 8, static_cast<std::uint64_t>(40 + s), 1.0});
        const cvx::region::RegionSpec spec(lambda, theta, td.data.radius(), 1);

        cvx::Weights w = td.teacher_weights;
        double gn = cvx::loss::gradient(arch, w, td.data, lambda).norm();
        for (int chunk = 0; chunk < 12 && gn > 1e-8; ++chunk) {
            cvx::traj::FlowConfig cfg;
            cfg.step = 0.005;
            cfg.horizon = 20.0;
            cfg.log_every = 4000;
            try {
                w = cvx::traj::gradient_flow(arch, w, td.data, lambda, cfg).final_weights;
            } catch (const cvx::traj::TrajectoryDivergence& e) {
                w = e.partial.final_weights;
                break;
            }
            gn = cvx::loss::gradient(arch, w, td.data, lambda).norm();
        }
        if (gn > 1e-8) return {false, "seed " + std::to_string(s) + " stalled at ||g|| " +
                                          fmt("%.2e", gn)};

        const auto cert = cvx::region::certify(arch, w, td.data, spec);
        if (!cert.certified)
            return {false, "seed " + std::to_string(s) + " converged outside the certificate"};
        const auto probe = cvx::region::isolation_probe(arch, w, td.data, spec, 200, radius,
                                                        static_cast<std::uint64_t>(77 + s));
        worst_margin = std::min(worst_margin, probe.min_increase / bound);
        if (probe.min_increase < bound)
            return {false, "seed " + std::to_string(s) + " min increase " +
                               fmt("%.3e", probe.min_increase) + " < " + fmt("%.3e", bound)};
    }
    return {true, "3 certified minima, min increase / bound " + fmt("%.2f", worst_margin)};
}

// 9. digit-task SGD at desk scale: 20 trials of a (784,32,16,1) net on a
//    1000-sample binary digit task; the positive-curvature onset exists in
//    >= 18 trials, the mean loss-change fraction past the onset is >= 0.5,
//    and the 10th-percentile normalized curvature is positive in every trial
//    with an onset.
Outcome c09_sgd_digits() {
    const fs::path dir = fs::temp_directory_path() / "cvx_acceptance";
    fs::create_directories(dir);
    const std::string img = (dir / "digits-images.idx").string();
    const std::string lab = (dir / "digits-labels.idx").string();
    ts::write_idx_digits(img, lab, 1000, 2024);
    const cvx::Dataset data = cvx::io::load_idx(img, lab, 0, 3);

    const cvx::Architecture arch({784, 32, 16, 1});
    const double lambda = 5e-4;
    std::vector<cvx::traj::TrajectoryRecord> recs;
    int with_t0 = 0, frac_n = 0;
    double frac_sum = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const std::uint64_t seed = 8100 + static_cast<std::uint64_t>(trial);
        const cvx::Weights w0 = cvx::Weights::gaussian(arch, cvx::rng::splitmix(seed), 0.1);
        cvx::traj::SgdConfig cfg;
        cfg.batch_size = 50;
        cfg.epochs = 20;
        cfg.schedule = {{0, 0.08}, {240, 0.01}};
        cfg.seed = seed;
        cfg.log_every = 16;
        cvx::traj::TrajectoryRecord rec;
        try {
            rec = cvx::traj::sgd_train(arch, w0, data, lambda, cfg);
        } catch (const cvx::traj::TrajectoryDivergence& e) {
            rec = e.partial;
        }
        if (rec.t0) ++with_t0;
        if (const auto f = cvx::traj::loss_change_fraction(rec)) {
            frac_sum += *f;
            ++frac_n;
        }
        recs.push_back(std::move(rec));
    }

    const auto stat = cvx::traj::percentile_stat(recs, 10.0);
    double min_p10 = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < recs.size(); ++i) {
        if (!recs[i].t0) continue;
        if (!stat.per_trial[i] || *stat.per_trial[i] <= 0.0)
            return {false, "trial " + std::to_string(i) +
                               " has an onset but no positive percentile curvature"};
        min_p10 = std::min(min_p10, *stat.per_trial[i]);
    }
    const double frac_mean = frac_n > 0 ? frac_sum / frac_n : 0.0;
    if (with_t0 < 18)
        return {false, "onset in only " + std::to_string(with_t0) + "/20 trials"};
    if (frac_mean < 0.5)
        return {false, "mean loss-change fraction " + fmt("%.3f", frac_mean)};
    return {true, "onset " + std::to_string(with_t0) + "/20, fraction mean " +
                      fmt("%.3f", frac_mean) + ", min p10 " + fmt("%.3g", min_p10)};
}

// 10. the loss-change fraction identities hold exactly in floating point.
Outcome c10_fraction_identity() {
    auto mk = [](double t, double loss) {
        cvx::traj::Sample s;
        s.t = t;
        s.loss = loss;
        s.grad_sq = 1.0;
        s.gamma_dd = 1.0;
        return s;
    };
    cvx::traj::TrajectoryRecord rec;
    rec.samples = {mk(0.0, 1.0), mk(1.0, 0.4), mk(2.0, 0.2)};
    rec.t1 = 2.0;
    rec.t0 = 1.0;
    const auto f = cvx::traj::loss_change_fraction(rec);
    if (!f || *f != 0.25) return {false, "triple (1.0, 0.4, 0.2) gave " +
                                             (f ? fmt("%.17g", *f) : std::string("nothing"))};
    rec.t0 = 0.0;
    const auto g = cvx::traj::loss_change_fraction(rec);
    if (!g || *g != 1.0)
        return {false, "onset at the start gave " +
                           (g ? fmt("%.17g", *g) : std::string("nothing"))};
    return {true, "0.25 and 1.0 exactly"};
}

}  // namespace

int main() {
    struct Entry {
        const char* label;
        Outcome (*fn)();
    };
    const std::vector<Entry> entries = {
        {"analytic gradient vs central differences", c01_gradient},
        {"directional curvature respects the floor", c02_floor},
        {"in-region Hessian eigenvalue floor", c03_certification},
        {"Laplacian nonnegativity and trace cross-check", c04_laplacian},
        {"second-derivative routes agree", c05_two_routes},
        {"gradient-flow decay bounds", c06_flow_decay},
        {"linear nets: critical points and rotations", c07_linear},
        {"isolation probe at certified minima", c08_isolation},
        {"digit-task SGD curvature onset", c09_sgd_digits},
        {"loss-change fraction identities", c10_fraction_identity},
    };

    bool all_ok = true;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = entries[i].fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("[%s] %02zu %s — %s (%.1fs)\n", o.ok ? "PASS" : "FAIL", i + 1,
                    entries[i].label, o.detail.c_str(), secs);
        std::fflush(stdout);
        all_ok = all_ok && o.ok;
    }
    return all_ok ? 0 : 1;
}
