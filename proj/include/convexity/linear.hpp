#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "convexity/architecture.hpp"
#include "convexity/dataset.hpp"
#include "convexity/weights.hpp"

namespace cvx::linear {

/// Regularized loss of the linear specialization: every switch forced on, so
/// y = W_H^T ... W_0^T a.
double value(const Architecture& arch, const Weights& w, const Dataset& data, double lambda);

/// Gradient of the linear regularized loss.
Weights gradient(const Architecture& arch, const Weights& w, const Dataset& data, double lambda);

/// Trace of the Hessian of the unregularized linear loss (sum of squared
/// first derivatives of y); nonnegative everywhere.
double laplacian(const Architecture& arch, const Weights& w, const Dataset& data);

/// Rotation applied between layers `layer` and `layer`+1:
/// W~ = (W_0, ..., W_layer R^T, R W_{layer+1}, ..., W_H).
struct RotationPlan {
    int layer = 0;
    Eigen::MatrixXd rotation;
};

/// Throws InvalidInput unless R^T R = I to 1e-12 and det R = +1 to 1e-10.
void validate_rotation(const Eigen::MatrixXd& r);

/// Product of Givens rotations in pseudo-random coordinate pairs; always a
/// proper rotation. `angle` sets the Givens angle of each factor.
Eigen::MatrixXd sample_rotation(int n, double angle, std::uint64_t seed, int factors = 4);

Weights rotate_weights(const Weights& w, const RotationPlan& plan);

struct DegeneracyAudit {
    bool applicable = false;  // some W_i != 0 with i <= H-1
    int layer = -1;           // rotated layer when applicable
    int checks = 0;
    double max_rel_dev = 0.0;  // max |value(W~) - value(W)| / (1 + value(W))
    bool passes = false;       // max_rel_dev <= 1e-10
};
/// Rotates at the first layer i <= H-1 with W_i != 0 by each angle and checks
/// that the linear regularized loss is unchanged; a pass exhibits a continuum
/// of equal-loss points through W. Throws InvalidInput when W = 0.
DegeneracyAudit degeneracy_audit(const Architecture& arch, const Weights& w, const Dataset& data,
                                 double lambda, const std::vector<double>& angles,
                                 std::uint64_t seed = 0);

struct FoundPoint {
    Weights w;
    double value = 0.0;      // regularized linear loss
    double grad_norm = 0.0;
    double norm = 0.0;       // ||W||
    bool near_critical = false;  // grad_norm <= 1e-8 * (1 + initial grad_norm)
    bool in_region = false;      // loss^(1/2) ||W||_*^(H-1) < lambda / (sqrt(2) H (H+1) r)
};
/// Multi-start full-batch descent (backtracking line search) on the linear
/// regularized loss; each start deterministic from (seed, start index).
std::vector<FoundPoint> critical_search(const Architecture& arch, const Dataset& data,
                                        double lambda, int starts, std::uint64_t seed,
                                        int max_iters = 20000);

}  // namespace cvx::linear
