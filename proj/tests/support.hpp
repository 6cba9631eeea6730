#pragma once

// Shared fixtures and independent oracles for the test binaries. Everything
// here is deliberately written against the public headers only, with naive
// algorithms (finite differences, SVD, shifted power iteration, Lagrange
// interpolation) so library bugs cannot cancel out.

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "convexity/architecture.hpp"
#include "convexity/dataset.hpp"
#include "convexity/loss.hpp"
#include "convexity/net.hpp"
#include "convexity/rng.hpp"
#include "convexity/weights.hpp"

namespace ts {

// ------------------------------------------------------------- T1 fixture
// Hand-checked instance used across the suite: H=1, widths (2,2,1),
// a=(1,0.5), f=1, W0=I, W1=(1,1)^T. y = 1.5, loss = 0.125.

inline cvx::Architecture t1_arch() { return cvx::Architecture({2, 2, 1}); }

inline cvx::Weights t1_weights() {
    cvx::Weights w = cvx::Weights::zeros(t1_arch());
    w.mat(0) << 1, 0, 0, 1;
    w.mat(1) << 1, 1;
    return w;
}

inline Eigen::MatrixXd t1_inputs() {
    Eigen::MatrixXd in(2, 1);
    in << 1, 0.5;
    return in;
}

/// Declared radius 1, matching the bound fixtures.
inline cvx::Dataset t1_data() {
    Eigen::VectorXd lab(1);
    lab << 1;
    return cvx::Dataset::with_declared_radius(t1_inputs(), lab, 1.0);
}

/// Radius from the data itself (sqrt(1.25)).
inline cvx::Dataset t1_data_natural() {
    Eigen::VectorXd lab(1);
    lab << 1;
    return cvx::Dataset::from_samples(t1_inputs(), lab);
}

/// n zero inputs with zero labels: reg loss = (lambda/2)||W||^2 exactly and
/// the Hessian is lambda I on every piece.
inline cvx::Dataset bowl_data(int dim, int n = 4) {
    return cvx::Dataset::from_samples(Eigen::MatrixXd::Zero(dim, n), Eigen::VectorXd::Zero(n));
}

inline double rel_err(double got, double want) {
    return std::abs(got - want) / std::max(1.0, std::abs(want));
}

// ------------------------------------------------------- smooth-point draws

/// Smallest |pre-activation| over all samples, layers, units: the margin to
/// the nearest switch boundary.
inline double min_preact_gap(const cvx::Architecture& arch, const cvx::Weights& w,
                             const cvx::Dataset& data) {
    double gap = std::numeric_limits<double>::infinity();
    for (int s = 0; s < data.size(); ++s) {
        Eigen::VectorXd x = data.input(s);
        for (int i = 0; i < arch.matrix_count(); ++i) {
            const Eigen::VectorXd z = w.mat(i).transpose() * x;
            gap = std::min(gap, z.cwiseAbs().minCoeff());
            x = z.cwiseMax(0.0);
        }
    }
    return gap;
}

/// Gaussian weights resampled until every pre-activation clears `gap`, so
/// finite differences cannot cross a kink.
inline cvx::Weights smooth_gaussian(const cvx::Architecture& arch, const cvx::Dataset& data,
                                    std::uint64_t seed, double scale = 1.0, double gap = 1e-3) {
    for (std::uint64_t attempt = 0; attempt < 500; ++attempt) {
        const std::uint64_t s = cvx::rng::splitmix(seed ^ (attempt * 0x9e3779b97f4a7c15ULL + 1));
        cvx::Weights w = cvx::Weights::gaussian(arch, s, scale);
        if (min_preact_gap(arch, w, data) > gap) return w;
    }
    throw std::runtime_error("no smooth point found; loosen the gap");
}

/// Deterministic generic dataset for smooth-point sweeps.
inline cvx::Dataset random_data(int dim, int n, std::uint64_t seed, double label_scale = 1.0) {
    const cvx::rng::Stream in_stream(seed, 51);
    const cvx::rng::Stream lab_stream(seed, 52);
    Eigen::MatrixXd inputs(dim, n);
    Eigen::VectorXd labels(n);
    std::uint64_t c = 0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < dim; ++i) inputs(i, j) = in_stream.normal(c++);
    for (int j = 0; j < n; ++j) labels(j) = label_scale * lab_stream.normal(j);
    return cvx::Dataset::from_samples(std::move(inputs), std::move(labels));
}

// ------------------------------------------------------------- FD oracles

inline Eigen::VectorXd fd_gradient(const cvx::Architecture& arch, const cvx::Weights& w,
                                   const cvx::Dataset& data, double lambda, double h = 1e-5) {
    const Eigen::VectorXd base = w.to_flat();
    Eigen::VectorXd g(base.size());
    for (int j = 0; j < base.size(); ++j) {
        Eigen::VectorXd up = base, dn = base;
        up(j) += h;
        dn(j) -= h;
        g(j) = (cvx::loss::regularized_value(arch, cvx::Weights::from_flat(arch, up), data, lambda) -
                cvx::loss::regularized_value(arch, cvx::Weights::from_flat(arch, dn), data, lambda)) /
               (2.0 * h);
    }
    return g;
}

/// Central second difference of the true regularized loss along dir. Valid
/// only well inside a smooth piece.
inline double fd_second(const cvx::Architecture& arch, const cvx::Weights& w,
                        const cvx::Dataset& data, double lambda, const cvx::Direction& dir,
                        double h = 1e-4) {
    cvx::Weights up = w, dn = w;
    up.add_scaled(dir, h);
    dn.add_scaled(dir, -h);
    const double c = cvx::loss::regularized_value(arch, w, data, lambda);
    const double u = cvx::loss::regularized_value(arch, up, data, lambda);
    const double d = cvx::loss::regularized_value(arch, dn, data, lambda);
    return (u - 2.0 * c + d) / (h * h);
}

// --------------------------------------------------------- spectral oracles

inline double svd_star_norm(const cvx::Weights& w) {
    double best = 0.0;
    for (int i = 0; i < w.layer_count(); ++i) {
        if (w.mat(i).size() == 0) continue;
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(w.mat(i));
        best = std::max(best, svd.singularValues()(0));
    }
    return best;
}

/// Smallest eigenvalue of a symmetric matrix by power iteration on c I - M
/// with c the Gershgorin upper edge. Slow and independent of Eigen's
/// eigensolvers.
inline double power_min_eig(const Eigen::MatrixXd& m, int max_iters = 200000) {
    const int n = static_cast<int>(m.rows());
    double c = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        double off = 0.0;
        for (int j = 0; j < n; ++j)
            if (j != i) off += std::abs(m(i, j));
        c = std::max(c, m(i, i) + off);
    }
    c += 1.0;  // keep the shifted matrix positive definite
    const Eigen::MatrixXd a = c * Eigen::MatrixXd::Identity(n, n) - m;
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = 1.0 + 1e-3 * i;  // break symmetry
    v.normalize();
    double mu = 0.0;
    for (int it = 0; it < max_iters; ++it) {
        const Eigen::VectorXd av = a * v;
        mu = v.dot(av);
        if ((av - mu * v).norm() <= 1e-11 * std::max(1.0, std::abs(mu))) break;
        v = av.normalized();
    }
    return c - mu;
}

// -------------------------------------------------- polynomial interpolation

/// Lagrange evaluation of the interpolant through (ts, ys) at t.
inline double lagrange_eval(const std::vector<double>& ts, const std::vector<double>& ys,
                            double t) {
    const std::size_t n = ts.size();
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double basis = 1.0;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) basis *= (t - ts[j]) / (ts[i] - ts[j]);
        acc += ys[i] * basis;
    }
    return acc;
}

// ---------------------------------------------------------- IDX test corpus

inline void put_be32(std::ofstream& os, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                                static_cast<unsigned char>(v >> 16),
                                static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

/// Writes an IDX image/label pair of n 28x28 samples. Each digit d has a
/// fixed random prototype image; sample i carries digit i % 10 with per-pixel
/// jitter, so the binary "is it digit k" task is learnable at desk scale.
inline void write_idx_digits(const std::string& images_path, const std::string& labels_path,
                             int n, std::uint64_t seed) {
    std::array<std::array<int, 784>, 10> proto{};
    for (int d = 0; d < 10; ++d) {
        const cvx::rng::Stream s(seed, 100 + static_cast<std::uint64_t>(d));
        for (int p = 0; p < 784; ++p)
            proto[static_cast<std::size_t>(d)][static_cast<std::size_t>(p)] =
                static_cast<int>(s.below(static_cast<std::uint64_t>(p), 256));
    }
    std::ofstream img(images_path, std::ios::binary);
    std::ofstream lab(labels_path, std::ios::binary);
    if (!img || !lab) throw std::runtime_error("cannot write IDX fixtures");
    put_be32(img, 2051);
    put_be32(img, static_cast<std::uint32_t>(n));
    put_be32(img, 28);
    put_be32(img, 28);
    put_be32(lab, 2049);
    put_be32(lab, static_cast<std::uint32_t>(n));
    for (int i = 0; i < n; ++i) {
        const int d = i % 10;
        const cvx::rng::Stream noise(seed, 1000 + static_cast<std::uint64_t>(i));
        for (int p = 0; p < 784; ++p) {
            const int jitter =
                static_cast<int>(noise.below(static_cast<std::uint64_t>(p), 51)) - 25;
            const int px = std::clamp(
                proto[static_cast<std::size_t>(d)][static_cast<std::size_t>(p)] + jitter, 0, 255);
            img.put(static_cast<char>(static_cast<unsigned char>(px)));
        }
        lab.put(static_cast<char>(static_cast<unsigned char>(d)));
    }
}

}  // namespace ts
