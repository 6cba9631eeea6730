#pragma once

#include <cstdint>
#include <optional>

#include "convexity/architecture.hpp"
#include "convexity/dataset.hpp"
#include "convexity/errors.hpp"
#include "convexity/signature.hpp"
#include "convexity/weights.hpp"

namespace cvx::region {

/// Parameters of the certified region: weight decay lambda, curvature target
/// theta (0 < theta < lambda), dataset radius r, hidden depth H.
struct RegionSpec {
    double lambda = 0.0;
    double theta = 0.0;
    double radius = 0.0;
    int depth = 0;

    RegionSpec(double lambda_, double theta_, double radius_, int depth_)
        : lambda(lambda_), theta(theta_), radius(radius_), depth(depth_) {
        if (!(lambda > 0.0)) throw InvalidInput("lambda must be positive");
        if (!(theta > 0.0) || !(theta < lambda))
            throw InvalidInput("theta must satisfy 0 < theta < lambda");
        if (!(radius > 0.0)) throw InvalidInput("radius must be positive");
        if (depth < 1) throw InvalidInput("hidden depth must be at least 1");
    }
};

/// ||W||_*: the maximum spectral norm over the weight matrices.
/// Power iteration on M^T M, deterministic all-ones start, 1e-10 relative
/// convergence, at most 1e4 iterations.
double star_norm(const Weights& w);

/// Spectral norm of a single matrix (same iteration as star_norm).
double spectral_norm(const Eigen::MatrixXd& m);

/// (lambda - theta) / (sqrt(2) H (H+1) r): the membership threshold on
/// loss^(1/2) ||W||_*^(H-1).
double threshold(const RegionSpec& spec);

struct Membership {
    bool in_region = false;
    double margin = 0.0;  // threshold - lhs; in_region <=> margin > 0
    double lhs = 0.0;     // loss^(1/2) * star_norm^(H-1)
    double star = 0.0;
    double loss_value = 0.0;
};
Membership membership(const Architecture& arch, const Weights& w, const Dataset& data,
                      const RegionSpec& spec);

/// Coefficient of the curvature lower bound per unit ||X||^2:
/// -sqrt(2) H (H+1) ||W||_*^(H-1) r loss^(1/2).
double curvature_floor(const Architecture& arch, const Weights& w, const Dataset& data,
                       double radius);

/// Monte-Carlo audit: directional_second (lambda = 0, frozen piece) along
/// random unit directions must sit at or above curvature_floor.
struct FloorAudit {
    int trials = 0;
    int violations = 0;
    double floor = 0.0;
    double min_second = 0.0;  // smallest observed second derivative
    double worst_slack = 0.0; // min_second - floor; >= 0 when the audit passes
    std::uint64_t seed = 0;
    std::uint64_t first_violation_counter = 0;  // reproducer when violations > 0
};
FloorAudit audit_floor(const Architecture& arch, const Weights& w, const Dataset& data, int trials,
                       std::uint64_t seed);

/// Upper bound on achievable loss values whose sublevel set is guaranteed to
/// contain every global minimizer of the regularized loss:
/// lambda^(1+1/H) / (2 (H (H+1) r)^(2/H)).
double global_min_capture(double lambda, int depth, double radius);

struct Certificate {
    bool in_region = false;
    double margin = 0.0;
    double lhs = 0.0;
    double min_eig = 0.0;
    double eig_residual = 0.0;
    bool certified = false;  // in_region && min_eig >= theta - 1e-8
    SwitchSignature signature;
};
/// Assembles membership, the switch signature, and the smallest eigenvalue of
/// the frozen regularized Hessian. Throws ResourceError past the dense cap.
Certificate certify(const Architecture& arch, const Weights& w, const Dataset& data,
                    const RegionSpec& spec, int max_params = 4096);

struct IsolationReport {
    int samples = 0;
    double radius = 0.0;
    double min_increase = 0.0;
    double mean_increase = 0.0;
    double grad_norm = 0.0;
};
/// Samples points uniformly on the sphere of the given radius around a
/// near-critical W and reports the smallest observed increase of the
/// regularized loss. Throws NotACriticalPoint when ||grad|| > grad_tol.
IsolationReport isolation_probe(const Architecture& arch, const Weights& w, const Dataset& data,
                                const RegionSpec& spec, int n_perturb, double radius,
                                std::uint64_t seed, double grad_tol = 1e-6);

/// Default boundary tolerance for switch extraction: 1e-9 * max(1, ||W||_*).
double default_boundary_eps(const Weights& w);

}  // namespace cvx::region
