#include "convexity/weights.hpp"

#include <cmath>

#include "convexity/errors.hpp"
#include "convexity/rng.hpp"

namespace cvx {

Weights Weights::zeros(const Architecture& arch) {
    std::vector<Eigen::MatrixXd> mats;
    mats.reserve(arch.matrix_count());
    for (int i = 0; i < arch.matrix_count(); ++i)
        mats.emplace_back(Eigen::MatrixXd::Zero(arch.width(i), arch.width(i + 1)));
    return Weights(std::move(mats));
}

Weights Weights::gaussian(const Architecture& arch, std::uint64_t seed, double scale) {
    Weights w = zeros(arch);
    for (int i = 0; i < arch.matrix_count(); ++i) {
        rng::Stream st(seed, static_cast<std::uint64_t>(i));
        Eigen::MatrixXd& m = w.mat(i);
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            for (Eigen::Index r = 0; r < m.rows(); ++r)
                m(r, c) = scale * st.normal(static_cast<std::uint64_t>(c * m.rows() + r));
    }
    return w;
}

Weights Weights::coordinate(const Architecture& arch, int flat_index) {
    if (flat_index < 0) throw InvalidInput("flat index out of range");
    Weights w = zeros(arch);
    int offset = flat_index;
    for (int i = 0; i < arch.matrix_count(); ++i) {
        const int sz = arch.width(i) * arch.width(i + 1);
        if (offset < sz) {
            w.mat(i).data()[offset] = 1.0;
            return w;
        }
        offset -= sz;
    }
    throw InvalidInput("flat index out of range");
}

int Weights::flat_size() const {
    int n = 0;
    for (const auto& m : mats_) n += static_cast<int>(m.size());
    return n;
}

double Weights::squared_norm() const {
    double s = 0.0;
    for (const auto& m : mats_) s += m.squaredNorm();
    return s;
}

double Weights::norm() const { return std::sqrt(squared_norm()); }

double Weights::dot(const Weights& o) const {
    double s = 0.0;
    for (std::size_t i = 0; i < mats_.size(); ++i)
        s += (mats_[i].array() * o.mats_[i].array()).sum();
    return s;
}

Weights& Weights::operator+=(const Weights& o) {
    for (std::size_t i = 0; i < mats_.size(); ++i) mats_[i] += o.mats_[i];
    return *this;
}

Weights& Weights::operator-=(const Weights& o) {
    for (std::size_t i = 0; i < mats_.size(); ++i) mats_[i] -= o.mats_[i];
    return *this;
}

Weights& Weights::operator*=(double s) {
    for (auto& m : mats_) m *= s;
    return *this;
}

void Weights::add_scaled(const Weights& o, double s) {
    for (std::size_t i = 0; i < mats_.size(); ++i) mats_[i] += s * o.mats_[i];
}

void Weights::set_zero() {
    for (auto& m : mats_) m.setZero();
}

Eigen::VectorXd Weights::to_flat() const {
    Eigen::VectorXd v(flat_size());
    int at = 0;
    for (const auto& m : mats_) {
        const int sz = static_cast<int>(m.size());
        v.segment(at, sz) = Eigen::Map<const Eigen::VectorXd>(m.data(), sz);
        at += sz;
    }
    return v;
}

Weights Weights::from_flat(const Architecture& arch, const Eigen::Ref<const Eigen::VectorXd>& v) {
    Weights w = zeros(arch);
    if (v.size() != w.flat_size()) throw InvalidInput("flat vector size mismatch");
    int at = 0;
    for (int i = 0; i < w.layer_count(); ++i) {
        Eigen::MatrixXd& m = w.mat(i);
        const int sz = static_cast<int>(m.size());
        Eigen::Map<Eigen::VectorXd>(m.data(), sz) = v.segment(at, sz);
        at += sz;
    }
    return w;
}

bool Weights::same_shape(const Weights& o) const {
    if (mats_.size() != o.mats_.size()) return false;
    for (std::size_t i = 0; i < mats_.size(); ++i)
        if (mats_[i].rows() != o.mats_[i].rows() || mats_[i].cols() != o.mats_[i].cols())
            return false;
    return true;
}

void check_shape(const Architecture& arch, const Weights& w) {
    if (w.layer_count() != arch.matrix_count())
        throw InvalidInput("weight matrix count does not match architecture");
    for (int i = 0; i < arch.matrix_count(); ++i)
        if (w.mat(i).rows() != arch.width(i) || w.mat(i).cols() != arch.width(i + 1))
            throw InvalidInput("weight matrix shape does not match architecture");
}

}  // namespace cvx
