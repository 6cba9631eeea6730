#pragma once

#include <Eigen/Dense>
#include <optional>

#include "convexity/architecture.hpp"
#include "convexity/dataset.hpp"
#include "convexity/signature.hpp"
#include "convexity/weights.hpp"

namespace cvx::loss {

/// Mean squared error over the dataset: (1/2N) sum_i (f_i - y(a_i, W))^2.
double value(const Architecture& arch, const Weights& w, const Dataset& data);

/// value + (lambda/2) ||W||^2.
double regularized_value(const Architecture& arch, const Weights& w, const Dataset& data,
                         double lambda);

/// Gradient of the regularized loss. The ReLU derivative at exactly zero is
/// taken as 0 (the switch is off), matching switch_signature with eps_b = 0.
Weights gradient(const Architecture& arch, const Weights& w, const Dataset& data, double lambda);

/// Same, and reports whether any pre-activation sits within eps_b of zero
/// (where the value is the one-sided frozen-piece gradient).
Weights gradient(const Architecture& arch, const Weights& w, const Dataset& data, double lambda,
                 double eps_b, bool& boundary_warning);

/// Mean gradient over the subset data[idx[0..count)], plus lambda W.
Weights gradient_subset(const Architecture& arch, const Weights& w, const Dataset& data,
                        double lambda, const int* idx, int count);

/// Hessian-vector product of the regularized loss on the switch-frozen piece
/// at `w`: switches are read off the forward pass and held fixed.
Weights hvp(const Architecture& arch, const Weights& w, const Dataset& data, double lambda,
            const Direction& dir);

/// Second directional derivative d^2/dt^2 ell_lambda(W + tX) |_{t=0} on the
/// frozen piece, evaluated by expanding the product rule over layer pairs.
/// Computed independently of hvp().
double directional_second(const Architecture& arch, const Weights& w, const Dataset& data,
                          double lambda, const Direction& dir);

/// Laplacian (trace of the Hessian) of the unregularized loss on the frozen
/// piece, by the activation/backprop norm product formula.
double laplacian(const Architecture& arch, const Weights& w, const Dataset& data);

/// Dense Hessian of the regularized loss, column by column via hvp, then
/// symmetrized; the largest asymmetry found lands in *asymmetry when given.
/// Throws ResourceError if the parameter count exceeds max_params.
Eigen::MatrixXd full_hessian(const Architecture& arch, const Weights& w, const Dataset& data,
                             double lambda, int max_params = 4096,
                             double* asymmetry = nullptr);

// Frozen-signature variants: the switches come from `sig` instead of the
// forward pass at w, and negative pre-activations pass through open switches.
double frozen_value(const Architecture& arch, const Weights& w, const Dataset& data,
                    const SwitchSignature& sig);
double frozen_regularized(const Architecture& arch, const Weights& w, const Dataset& data,
                          const SwitchSignature& sig, double lambda);
Weights frozen_gradient(const Architecture& arch, const Weights& w, const Dataset& data,
                        const SwitchSignature& sig, double lambda);
Weights frozen_hvp(const Architecture& arch, const Weights& w, const Dataset& data,
                   const SwitchSignature& sig, double lambda, const Direction& dir);
double frozen_laplacian(const Architecture& arch, const Weights& w, const Dataset& data,
                        const SwitchSignature& sig);

/// Smallest eigenvalue of a symmetric matrix, with the symmetry defect and
/// eigen-residual reported. Throws InvalidInput when the matrix is not
/// symmetric to tolerance.
struct EigenFloor {
    double min_eigenvalue = 0.0;
    double symmetry_defect = 0.0;  // max |M - M^T| entry
    double residual = 0.0;         // ||M v - lambda v||_inf for the reported pair
};
EigenFloor min_eigenvalue(const Eigen::MatrixXd& m);

}  // namespace cvx::loss
