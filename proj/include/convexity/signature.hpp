#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "convexity/architecture.hpp"

namespace cvx {

/// Per-sample, per-layer switch patterns: bit(i, j, u) = 1 iff the
/// pre-activation of unit u in layer j (1..H+1) is strictly positive for
/// sample i. boundary(i, j, u) marks |pre-activation| <= eps_b.
class SwitchSignature {
public:
    SwitchSignature() = default;
    SwitchSignature(const Architecture& arch, int n_samples) {
        const int layers = arch.hidden_depth() + 1;
        bits_.reserve(layers);
        boundary_.reserve(layers);
        for (int j = 1; j <= layers; ++j) {
            bits_.emplace_back(Mask::Zero(arch.width(j), n_samples));
            boundary_.emplace_back(Mask::Zero(arch.width(j), n_samples));
        }
        n_samples_ = n_samples;
    }

    static SwitchSignature all_on(const Architecture& arch, int n_samples) {
        SwitchSignature s(arch, n_samples);
        for (auto& m : s.bits_) m.setConstant(1);
        return s;
    }

    int samples() const { return n_samples_; }
    /// Number of switch layers, H + 1.
    int layers() const { return static_cast<int>(bits_.size()); }
    int width(int layer) const { return static_cast<int>(bits_[layer - 1].rows()); }

    std::uint8_t bit(int sample, int layer, int unit) const {
        return bits_[layer - 1](unit, sample);
    }
    std::uint8_t boundary(int sample, int layer, int unit) const {
        return boundary_[layer - 1](unit, sample);
    }
    void set(int sample, int layer, int unit, bool on, bool near_zero) {
        bits_[layer - 1](unit, sample) = on ? 1 : 0;
        boundary_[layer - 1](unit, sample) = near_zero ? 1 : 0;
    }

    /// Column view of one sample's bits at a layer (length n_layer).
    Eigen::Ref<const Eigen::Matrix<std::uint8_t, Eigen::Dynamic, 1>> layer_bits(int sample,
                                                                                int layer) const {
        return bits_[layer - 1].col(sample);
    }

    bool any_boundary() const {
        for (const auto& m : boundary_)
            if (m.any()) return true;
        return false;
    }
    long boundary_count() const {
        long c = 0;
        for (const auto& m : boundary_) c += static_cast<long>(m.cast<long>().sum());
        return c;
    }
    double active_fraction(int layer) const {
        const auto& m = bits_[layer - 1];
        return static_cast<double>(m.cast<long>().sum()) / static_cast<double>(m.size());
    }

    /// FNV-1a over the bit pattern; stable across runs.
    std::uint64_t hash() const {
        std::uint64_t h = 1469598103934665603ULL;
        for (const auto& m : bits_)
            for (Eigen::Index k = 0; k < m.size(); ++k) {
                h ^= m.data()[k];
                h *= 1099511628211ULL;
            }
        return h;
    }

    bool bits_equal(const SwitchSignature& o) const {
        if (bits_.size() != o.bits_.size()) return false;
        for (std::size_t k = 0; k < bits_.size(); ++k) {
            if (bits_[k].rows() != o.bits_[k].rows() || bits_[k].cols() != o.bits_[k].cols())
                return false;
            if (bits_[k] != o.bits_[k]) return false;
        }
        return true;
    }
    bool operator==(const SwitchSignature& o) const {
        if (!bits_equal(o)) return false;
        for (std::size_t k = 0; k < boundary_.size(); ++k)
            if (boundary_[k] != o.boundary_[k]) return false;
        return true;
    }

private:
    using Mask = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;
    std::vector<Mask> bits_;      // [layer-1]: n_layer x N
    std::vector<Mask> boundary_;  // same shape
    int n_samples_ = 0;
};

/// Smoothness class of a parameter point, with the first boundary location
/// as witness when not SmoothAnalytic. Witness fields are 1-based ordinals
/// (first sample = 1, first unit = 1), as printed in reports.
struct RegionClass {
    enum class Kind { SmoothAnalytic, SmoothConstant, PotentiallyNonsmooth };
    struct Witness {
        int sample = -1;
        int layer = -1;  // switch layer, 1..H+1
        int unit = -1;
    };
    Kind kind = Kind::SmoothAnalytic;
    Witness witness;
};

}  // namespace cvx
