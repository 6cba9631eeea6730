#include "convexity/linear.hpp"

#include <cmath>

#include "convexity/errors.hpp"
#include "convexity/loss.hpp"
#include "convexity/region.hpp"
#include "convexity/rng.hpp"
#include "convexity/signature.hpp"

namespace cvx::linear {

namespace {

constexpr double kSqrt2 = 1.4142135623730950488;

SwitchSignature all_on(const Architecture& arch, const Dataset& data) {
    return SwitchSignature::all_on(arch, data.size());
}

}  // namespace

double value(const Architecture& arch, const Weights& w, const Dataset& data, double lambda) {
    return loss::frozen_regularized(arch, w, data, all_on(arch, data), lambda);
}

Weights gradient(const Architecture& arch, const Weights& w, const Dataset& data, double lambda) {
    return loss::frozen_gradient(arch, w, data, all_on(arch, data), lambda);
}

double laplacian(const Architecture& arch, const Weights& w, const Dataset& data) {
    return loss::frozen_laplacian(arch, w, data, all_on(arch, data));
}

void validate_rotation(const Eigen::MatrixXd& r) {
    if (r.rows() != r.cols()) throw InvalidInput("rotation matrix must be square");
    const Eigen::MatrixXd gram = r.transpose() * r;
    const double defect =
        (gram - Eigen::MatrixXd::Identity(r.rows(), r.cols())).cwiseAbs().maxCoeff();
    if (defect > 1e-12) throw InvalidInput("matrix is not orthogonal within 1e-12");
    if (std::abs(r.determinant() - 1.0) > 1e-10)
        throw InvalidInput("matrix is orthogonal but not a proper rotation (det != +1)");
}

Eigen::MatrixXd sample_rotation(int n, double angle, std::uint64_t seed, int factors) {
    if (n < 2) throw InvalidInput("rotations need dimension at least 2");
    Eigen::MatrixXd r = Eigen::MatrixXd::Identity(n, n);
    const rng::Stream st(seed, 3);
    std::uint64_t counter = 0;
    const double c = std::cos(angle), s = std::sin(angle);
    for (int f = 0; f < factors; ++f) {
        const int i = static_cast<int>(st.below(counter++, static_cast<std::uint64_t>(n)));
        int j = static_cast<int>(st.below(counter++, static_cast<std::uint64_t>(n) - 1));
        if (j >= i) ++j;
        // Left-multiply by the Givens rotation in the (i, j) plane.
        const Eigen::RowVectorXd ri = r.row(i), rj = r.row(j);
        r.row(i) = c * ri - s * rj;
        r.row(j) = s * ri + c * rj;
    }
    return r;
}

Weights rotate_weights(const Weights& w, const RotationPlan& plan) {
    if (plan.layer < 0 || plan.layer + 1 >= w.layer_count())
        throw InvalidInput("rotation layer out of range");
    validate_rotation(plan.rotation);
    if (w.mat(plan.layer).cols() != plan.rotation.rows())
        throw InvalidInput("rotation size does not match the layer width");
    Weights out = w;
    out.mat(plan.layer) = w.mat(plan.layer) * plan.rotation.transpose();
    out.mat(plan.layer + 1) = plan.rotation * w.mat(plan.layer + 1);
    return out;
}

DegeneracyAudit degeneracy_audit(const Architecture& arch, const Weights& w, const Dataset& data,
                                 double lambda, const std::vector<double>& angles,
                                 std::uint64_t seed) {
    check_shape(arch, w);
    if (w.squared_norm() == 0.0) throw InvalidInput("degeneracy audit needs nonzero weights");
    DegeneracyAudit rep;
    for (int i = 0; i + 1 < w.layer_count(); ++i)
        if (w.mat(i).cwiseAbs().maxCoeff() > 0.0) {
            rep.applicable = true;
            rep.layer = i;
            break;
        }
    if (!rep.applicable) return rep;

    const double base = value(arch, w, data, lambda);
    const int width = arch.width(rep.layer + 1);
    for (std::size_t k = 0; k < angles.size(); ++k) {
        RotationPlan plan;
        plan.layer = rep.layer;
        plan.rotation = sample_rotation(width, angles[k], seed + k);
        const Weights rotated = rotate_weights(w, plan);
        const double dev = std::abs(value(arch, rotated, data, lambda) - base) / (1.0 + base);
        rep.max_rel_dev = std::max(rep.max_rel_dev, dev);
        ++rep.checks;
    }
    rep.passes = rep.max_rel_dev <= 1e-10;
    return rep;
}

std::vector<FoundPoint> critical_search(const Architecture& arch, const Dataset& data,
                                        double lambda, int starts, std::uint64_t seed,
                                        int max_iters) {
    if (starts < 1) throw InvalidInput("need at least one start");
    if (!(lambda > 0.0)) throw InvalidInput("lambda must be positive");
    const double h = static_cast<double>(arch.hidden_depth());
    const double u_threshold = lambda / (kSqrt2 * h * (h + 1.0) * data.radius());

    std::vector<FoundPoint> found;
    found.reserve(starts);
    for (int s = 0; s < starts; ++s) {
        // Start 0 from the origin (always a critical point); the rest from
        // seeded Gaussian draws.
        Weights w = s == 0 ? Weights::zeros(arch)
                           : Weights::gaussian(
                                 arch, rng::splitmix(rng::splitmix(seed) + static_cast<std::uint64_t>(s)),
                                 0.5);
        Weights g = gradient(arch, w, data, lambda);
        const double tol = 1e-8 * (1.0 + g.norm());
        double v = value(arch, w, data, lambda);
        double eta = 1.0;
        int it = 0;
        while (g.norm() > tol && it < max_iters) {
            // Backtracking line search with the Armijo condition.
            const double gsq = g.squared_norm();
            bool moved = false;
            while (eta > 1e-20) {
                Weights cand = w;
                cand.add_scaled(g, -eta);
                const double cv = value(arch, cand, data, lambda);
                if (cv <= v - 1e-4 * eta * gsq) {
                    w = std::move(cand);
                    v = cv;
                    moved = true;
                    break;
                }
                eta *= 0.5;
            }
            if (!moved) break;
            eta = std::min(eta * 2.0, 1e6);
            g = gradient(arch, w, data, lambda);
            ++it;
        }

        const double lin_loss = loss::frozen_value(arch, w, data, all_on(arch, data));
        const double star = region::star_norm(w);
        const double lhs = arch.hidden_depth() == 1
                               ? std::sqrt(lin_loss)
                               : std::sqrt(lin_loss) * std::pow(star, h - 1.0);
        FoundPoint fp;
        fp.value = v;
        fp.grad_norm = g.norm();
        fp.norm = w.norm();
        fp.near_critical = fp.grad_norm <= tol;
        fp.in_region = lhs < u_threshold;
        fp.w = std::move(w);
        found.push_back(std::move(fp));
    }
    return found;
}

}  // namespace cvx::linear
