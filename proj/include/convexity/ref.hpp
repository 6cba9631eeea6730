#pragma once

#include "convexity/architecture.hpp"
#include "convexity/dataset.hpp"
#include "convexity/weights.hpp"

namespace cvx::ref {

// Serial reference implementations of the sample-reduction kernels, written
// as plain per-sample loops with flat left-to-right accumulation. They trade
// speed for obviousness and exist to pin down the parallel kernels in tests
// and benchmarks.

double loss_value(const Architecture& arch, const Weights& w, const Dataset& data);

Weights gradient(const Architecture& arch, const Weights& w, const Dataset& data, double lambda);

Weights hvp(const Architecture& arch, const Weights& w, const Dataset& data, double lambda,
            const Direction& dir);

double laplacian(const Architecture& arch, const Weights& w, const Dataset& data);

double directional_second(const Architecture& arch, const Weights& w, const Dataset& data,
                          double lambda, const Direction& dir);

}  // namespace cvx::ref
