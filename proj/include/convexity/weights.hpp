#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "convexity/architecture.hpp"

namespace cvx {

/// The weight collection W = (W_0, ..., W_H), W_i of shape n_i x n_{i+1}.
/// Also serves as a perturbation direction X: both live in R^m with the same
/// block structure and the same Euclidean norm.
class Weights {
public:
    Weights() = default;
    explicit Weights(std::vector<Eigen::MatrixXd> mats) : mats_(std::move(mats)) {}

    static Weights zeros(const Architecture& arch);
    /// Entrywise N(0, scale^2), reproducible: entry (layer, r, c) is a pure
    /// function of (seed, layer, r, c).
    static Weights gaussian(const Architecture& arch, std::uint64_t seed, double scale = 1.0);
    /// Coordinate direction e_j under the flat (layer-major, column-major
    /// within a layer) indexing.
    static Weights coordinate(const Architecture& arch, int flat_index);

    int layer_count() const { return static_cast<int>(mats_.size()); }
    Eigen::MatrixXd& mat(int i) { return mats_[static_cast<std::size_t>(i)]; }
    const Eigen::MatrixXd& mat(int i) const { return mats_[static_cast<std::size_t>(i)]; }
    const std::vector<Eigen::MatrixXd>& mats() const { return mats_; }

    int flat_size() const;
    double squared_norm() const;
    /// Euclidean norm over all entries, ||W||.
    double norm() const;
    double dot(const Weights& other) const;

    Weights& operator+=(const Weights& o);
    Weights& operator-=(const Weights& o);
    Weights& operator*=(double s);
    /// this += s * o
    void add_scaled(const Weights& o, double s);
    void set_zero();

    friend Weights operator+(Weights a, const Weights& b) { return a += b; }
    friend Weights operator-(Weights a, const Weights& b) { return a -= b; }
    friend Weights operator*(Weights a, double s) { return a *= s; }
    friend Weights operator*(double s, Weights a) { return a *= s; }

    Eigen::VectorXd to_flat() const;
    static Weights from_flat(const Architecture& arch, const Eigen::Ref<const Eigen::VectorXd>& v);

    bool same_shape(const Weights& o) const;

private:
    std::vector<Eigen::MatrixXd> mats_;
};

using Params = Weights;
using Direction = Weights;

/// Throws InvalidInput unless W's matrix shapes match the architecture.
void check_shape(const Architecture& arch, const Weights& w);

}  // namespace cvx
