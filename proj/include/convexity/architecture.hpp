#pragma once

#include <vector>

#include "convexity/errors.hpp"

namespace cvx {

/// Layer widths (n_0, n_1, ..., n_H, 1) of a scalar-output feed-forward net
/// with H hidden layers. Hidden widths must exceed 1.
class Architecture {
public:
    explicit Architecture(std::vector<int> widths) : widths_(std::move(widths)) {
        if (widths_.size() < 3) throw InvalidInput("architecture needs at least one hidden layer");
        if (widths_.back() != 1) throw InvalidInput("output width must be 1");
        if (widths_.front() < 1) throw InvalidInput("input width must be positive");
        for (std::size_t i = 1; i + 1 < widths_.size(); ++i)
            if (widths_[i] < 2) throw InvalidInput("hidden widths must be > 1");
    }

    /// H, the hidden-layer count.
    int hidden_depth() const { return static_cast<int>(widths_.size()) - 2; }
    /// Number of weight matrices, H + 1.
    int matrix_count() const { return hidden_depth() + 1; }
    int width(int layer) const { return widths_[static_cast<std::size_t>(layer)]; }
    const std::vector<int>& widths() const { return widths_; }

    /// m, the total scalar parameter count.
    int param_count() const {
        int m = 0;
        for (int i = 0; i + 1 < static_cast<int>(widths_.size()); ++i)
            m += widths_[i] * widths_[i + 1];
        return m;
    }

    bool operator==(const Architecture&) const = default;

private:
    std::vector<int> widths_;
};

}  // namespace cvx
