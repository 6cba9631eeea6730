#pragma once

#include <Eigen/Dense>
#include <vector>

#include "convexity/architecture.hpp"
#include "convexity/dataset.hpp"
#include "convexity/signature.hpp"
#include "convexity/weights.hpp"

namespace cvx::net {

/// ReLU network value y(a, W). ReLU is applied after every matrix,
/// including the last one, so the output is always >= 0.
double forward(const Architecture& arch, const Weights& w, const Eigen::VectorXd& input);

/// Per-layer activations for one sample: x[0] = input, x[j] = relu(W_{j-1}^T x[j-1]).
/// Returns H + 2 vectors.
std::vector<Eigen::VectorXd> forward_trace(const Architecture& arch, const Weights& w,
                                           const Eigen::VectorXd& input);

/// Switch pattern of every unit on every sample, with boundary flags for
/// pre-activations within eps_b of zero.
SwitchSignature switch_signature(const Architecture& arch, const Weights& w, const Dataset& data,
                                 double eps_b);

/// Value of the switch-frozen (multilinear) network at weights `w` using the
/// switches recorded in `sig` for sample `sample`. No ReLU clamping: negative
/// pre-activations pass through wherever the recorded switch is on.
double frozen_forward(const Architecture& arch, const Weights& w, const SwitchSignature& sig,
                      int sample, const Eigen::VectorXd& input);

/// Smoothness classification of the parameter point on the given data.
RegionClass region_classify(const Architecture& arch, const Weights& w, const Dataset& data,
                            double eps_b);

}  // namespace cvx::net
