#pragma once

#include <Eigen/Dense>

#include "convexity/errors.hpp"

namespace cvx {

/// Labelled training data {a_i, f(a_i)} with a declared input radius r.
/// Inputs are stored one sample per column. Loaders and generators always
/// produce r >= max_i ||a_i||; with_declared_radius lets a caller pin r for
/// bound arithmetic (it is only validated to be positive).
class Dataset {
public:
    /// radius = max over samples of the input 2-norm.
    static Dataset from_samples(Eigen::MatrixXd inputs_cols, Eigen::VectorXd labels) {
        Dataset d(std::move(inputs_cols), std::move(labels));
        d.radius_ = d.max_input_norm();
        if (d.radius_ <= 0.0) d.radius_ = 1.0;  // all-zero inputs still need r > 0
        return d;
    }

    static Dataset with_declared_radius(Eigen::MatrixXd inputs_cols, Eigen::VectorXd labels,
                                        double radius) {
        if (!(radius > 0.0)) throw InvalidInput("dataset radius must be positive");
        Dataset d(std::move(inputs_cols), std::move(labels));
        d.radius_ = radius;
        return d;
    }

    int size() const { return static_cast<int>(labels_.size()); }
    int input_dim() const { return static_cast<int>(inputs_.rows()); }
    double radius() const { return radius_; }

    Eigen::Ref<const Eigen::VectorXd> input(int i) const { return inputs_.col(i); }
    double label(int i) const { return labels_[i]; }
    const Eigen::MatrixXd& inputs() const { return inputs_; }
    const Eigen::VectorXd& labels() const { return labels_; }

    double max_input_norm() const {
        double m = 0.0;
        for (int i = 0; i < inputs_.cols(); ++i) m = std::max(m, inputs_.col(i).norm());
        return m;
    }

private:
    Dataset(Eigen::MatrixXd inputs_cols, Eigen::VectorXd labels)
        : inputs_(std::move(inputs_cols)), labels_(std::move(labels)) {
        if (labels_.size() == 0) throw InvalidInput("dataset must contain at least one sample");
        if (inputs_.cols() != labels_.size())
            throw InvalidInput("input/label count mismatch");
    }

    Eigen::MatrixXd inputs_;  // n0 x N
    Eigen::VectorXd labels_;  // N
    double radius_ = 1.0;
};

}  // namespace cvx
