#pragma once

#include <optional>
#include <string>
#include <vector>

namespace cvx::plot {

/// Loss and normalized-second-derivative curves against time, as a
/// self-contained SVG. Normalized values above `clip_ceiling` are drawn at
/// the ceiling; absent values leave gaps.
void write_time_series(const std::string& path, const std::vector<double>& t,
                       const std::vector<double>& loss,
                       const std::vector<std::optional<double>>& normalized,
                       double clip_ceiling = 10.0);

/// Histogram SVG with equal-width bins over [lo, hi] (auto range when
/// lo >= hi).
void write_histogram(const std::string& path, const std::vector<double>& values, int bins = 10,
                     double lo = 0.0, double hi = 0.0,
                     const std::string& x_label = "value");

}  // namespace cvx::plot
