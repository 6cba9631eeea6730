#include "convexity/region.hpp"

#include <cmath>
#include <limits>

#include "convexity/loss.hpp"
#include "convexity/net.hpp"
#include "convexity/rng.hpp"

namespace cvx::region {

namespace {

constexpr double kSqrt2 = 1.4142135623730950488;

// Unit-norm Gaussian direction with every entry a pure function of
// (stream, base counter + entry index). Returns the counter consumed.
Direction unit_direction(const Architecture& arch, const rng::Stream& st, std::uint64_t base) {
    Direction x = Weights::zeros(arch);
    std::uint64_t k = base;
    for (int i = 0; i < x.layer_count(); ++i) {
        Eigen::MatrixXd& m = x.mat(i);
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = st.normal(k++);
    }
    const double n = x.norm();
    if (n > 0.0) x *= 1.0 / n;
    return x;
}

}  // namespace

double spectral_norm(const Eigen::MatrixXd& m) {
    if (m.size() == 0) return 0.0;
    if (m.cwiseAbs().maxCoeff() == 0.0) return 0.0;
    const Eigen::Index n = m.cols();
    Eigen::VectorXd v = Eigen::VectorXd::Ones(n) / std::sqrt(static_cast<double>(n));
    // Deterministic restarts with basis vectors if the start lies in the
    // kernel of m^T m.
    for (Eigen::Index basis = 0; basis < n; ++basis) {
        Eigen::VectorXd mv = m * v;
        if (mv.squaredNorm() > 0.0) break;
        v = Eigen::VectorXd::Unit(n, basis);
    }
    double prev = 0.0;
    for (int it = 0; it < 10000; ++it) {
        Eigen::VectorXd bv = m.transpose() * (m * v);
        const double bn = bv.norm();
        if (bn == 0.0) return 0.0;
        v = bv / bn;
        const double est = (m * v).squaredNorm();  // Rayleigh quotient of m^T m
        if (it > 0 && std::abs(est - prev) <= 1e-10 * std::max(est, 1e-300)) {
            prev = est;
            break;
        }
        prev = est;
    }
    return std::sqrt(prev);
}

double star_norm(const Weights& w) {
    double best = 0.0;
    for (int i = 0; i < w.layer_count(); ++i) best = std::max(best, spectral_norm(w.mat(i)));
    return best;
}

double threshold(const RegionSpec& spec) {
    const double h = static_cast<double>(spec.depth);
    return (spec.lambda - spec.theta) / (kSqrt2 * h * (h + 1.0) * spec.radius);
}

Membership membership(const Architecture& arch, const Weights& w, const Dataset& data,
                      const RegionSpec& spec) {
    if (spec.depth != arch.hidden_depth())
        throw InvalidInput("region spec depth does not match the architecture");
    Membership out;
    out.loss_value = loss::value(arch, w, data);
    out.star = star_norm(w);
    const int h = arch.hidden_depth();
    out.lhs = h == 1 ? std::sqrt(out.loss_value)
                     : std::sqrt(out.loss_value) * std::pow(out.star, h - 1);
    out.margin = threshold(spec) - out.lhs;
    out.in_region = out.margin > 0.0;
    return out;
}

double curvature_floor(const Architecture& arch, const Weights& w, const Dataset& data,
                       double radius) {
    if (!(radius > 0.0)) throw InvalidInput("radius must be positive");
    const double h = static_cast<double>(arch.hidden_depth());
    const double star = star_norm(w);
    const double pow_star = arch.hidden_depth() == 1 ? 1.0 : std::pow(star, h - 1.0);
    return -kSqrt2 * h * (h + 1.0) * pow_star * radius * std::sqrt(loss::value(arch, w, data));
}

FloorAudit audit_floor(const Architecture& arch, const Weights& w, const Dataset& data, int trials,
                       std::uint64_t seed) {
    if (trials < 1) throw InvalidInput("audit needs at least one trial");
    FloorAudit out;
    out.trials = trials;
    out.seed = seed;
    out.floor = curvature_floor(arch, w, data, data.radius());
    out.min_second = std::numeric_limits<double>::infinity();
    const rng::Stream st(seed, 7);
    const std::uint64_t stride = static_cast<std::uint64_t>(Weights::zeros(arch).flat_size());
    for (int k = 0; k < trials; ++k) {
        const Direction x = unit_direction(arch, st, static_cast<std::uint64_t>(k) * stride);
        const double dd = loss::directional_second(arch, w, data, 0.0, x);
        if (dd < out.min_second) out.min_second = dd;
        if (dd < out.floor) {
            if (out.violations == 0) out.first_violation_counter = static_cast<std::uint64_t>(k);
            ++out.violations;
        }
    }
    out.worst_slack = out.min_second - out.floor;
    return out;
}

double global_min_capture(double lambda, int depth, double radius) {
    if (!(lambda > 0.0) || !(radius > 0.0) || depth < 1)
        throw InvalidInput("capture bound needs lambda > 0, radius > 0, depth >= 1");
    const double h = static_cast<double>(depth);
    return std::pow(lambda, 1.0 + 1.0 / h) / (2.0 * std::pow(h * (h + 1.0) * radius, 2.0 / h));
}

Certificate certify(const Architecture& arch, const Weights& w, const Dataset& data,
                    const RegionSpec& spec, int max_params) {
    Certificate cert;
    const Membership mem = membership(arch, w, data, spec);
    cert.in_region = mem.in_region;
    cert.margin = mem.margin;
    cert.lhs = mem.lhs;
    cert.signature = net::switch_signature(arch, w, data, default_boundary_eps(w));
    const Eigen::MatrixXd h = loss::full_hessian(arch, w, data, spec.lambda, max_params);
    const loss::EigenFloor floor = loss::min_eigenvalue(h);
    cert.min_eig = floor.min_eigenvalue;
    cert.eig_residual = floor.residual;
    cert.certified = cert.in_region && cert.min_eig >= spec.theta - 1e-8;
    return cert;
}

IsolationReport isolation_probe(const Architecture& arch, const Weights& w, const Dataset& data,
                                const RegionSpec& spec, int n_perturb, double radius,
                                std::uint64_t seed, double grad_tol) {
    if (n_perturb < 1) throw InvalidInput("probe needs at least one perturbation");
    if (!(radius > 0.0)) throw InvalidInput("probe radius must be positive");
    IsolationReport rep;
    rep.samples = n_perturb;
    rep.radius = radius;
    rep.grad_norm = loss::gradient(arch, w, data, spec.lambda).norm();
    if (rep.grad_norm > grad_tol)
        throw NotACriticalPoint("gradient norm " + std::to_string(rep.grad_norm) +
                                    " exceeds the critical-point tolerance",
                                rep.grad_norm);
    const double base = loss::regularized_value(arch, w, data, spec.lambda);
    const rng::Stream st(seed, 11);
    const std::uint64_t stride = static_cast<std::uint64_t>(Weights::zeros(arch).flat_size());
    rep.min_increase = std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (int k = 0; k < n_perturb; ++k) {
        Direction u = unit_direction(arch, st, static_cast<std::uint64_t>(k) * stride);
        Weights probe = w;
        probe.add_scaled(u, radius);
        const double inc = loss::regularized_value(arch, probe, data, spec.lambda) - base;
        sum += inc;
        if (inc < rep.min_increase) rep.min_increase = inc;
    }
    rep.mean_increase = sum / n_perturb;
    return rep;
}

double default_boundary_eps(const Weights& w) { return 1e-9 * std::max(1.0, star_norm(w)); }

}  // namespace cvx::region
