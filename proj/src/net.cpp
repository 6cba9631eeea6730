#include "convexity/net.hpp"

#include "convexity/errors.hpp"

namespace cvx::net {

namespace {

void check_input(const Architecture& arch, const Eigen::VectorXd& input) {
    if (input.size() != arch.width(0)) throw InvalidInput("input dimension mismatch");
}

}  // namespace

std::vector<Eigen::VectorXd> forward_trace(const Architecture& arch, const Weights& w,
                                           const Eigen::VectorXd& input) {
    check_shape(arch, w);
    check_input(arch, input);
    std::vector<Eigen::VectorXd> x(static_cast<std::size_t>(arch.matrix_count()) + 1);
    x[0] = input;
    for (int i = 0; i < arch.matrix_count(); ++i)
        x[i + 1] = (w.mat(i).transpose() * x[i]).cwiseMax(0.0);
    return x;
}

double forward(const Architecture& arch, const Weights& w, const Eigen::VectorXd& input) {
    return forward_trace(arch, w, input).back()(0);
}

SwitchSignature switch_signature(const Architecture& arch, const Weights& w, const Dataset& data,
                                 double eps_b) {
    check_shape(arch, w);
    if (data.input_dim() != arch.width(0)) throw InvalidInput("dataset dimension mismatch");
    if (eps_b < 0.0) throw InvalidInput("boundary tolerance must be nonnegative");
    SwitchSignature sig(arch, data.size());
    for (int s = 0; s < data.size(); ++s) {
        Eigen::VectorXd x = data.input(s);
        for (int j = 1; j <= arch.matrix_count(); ++j) {
            const Eigen::VectorXd z = w.mat(j - 1).transpose() * x;
            for (int u = 0; u < z.size(); ++u)
                sig.set(s, j, u, z(u) > 0.0, std::abs(z(u)) <= eps_b);
            x = z.cwiseMax(0.0);
        }
    }
    return sig;
}

double frozen_forward(const Architecture& arch, const Weights& w, const SwitchSignature& sig,
                      int sample, const Eigen::VectorXd& input) {
    check_shape(arch, w);
    check_input(arch, input);
    if (sample < 0 || sample >= sig.samples()) throw InvalidInput("sample index out of range");
    Eigen::VectorXd x = input;
    for (int j = 1; j <= arch.matrix_count(); ++j) {
        Eigen::VectorXd z = w.mat(j - 1).transpose() * x;
        for (int u = 0; u < z.size(); ++u)
            if (!sig.bit(sample, j, u)) z(u) = 0.0;
        x = std::move(z);
    }
    return x(0);
}

RegionClass region_classify(const Architecture& arch, const Weights& w, const Dataset& data,
                            double eps_b) {
    const SwitchSignature sig = switch_signature(arch, w, data, eps_b);
    RegionClass rc;
    if (!sig.any_boundary()) {
        rc.kind = RegionClass::Kind::SmoothAnalytic;
        return rc;
    }

    bool all_zero_weights = true;
    for (int i = 0; i < w.layer_count() && all_zero_weights; ++i)
        if (w.mat(i).cwiseAbs().maxCoeff() > 0.0) all_zero_weights = false;
    // Fully zero weights with H >= 2: the output is O(t^{H+1}) around W, so the
    // loss stays twice differentiable and every zero pre-activation is benign.
    const bool zero_net = all_zero_weights && arch.hidden_depth() >= 2;

    RegionClass::Witness first_flag{-1, -1, -1};
    for (int s = 0; s < data.size(); ++s) {
        // dead <=> the activations feeding the current layer vanish identically
        // in a neighbourhood of W, so a zero pre-activation here cannot kink.
        bool dead = data.input(s).norm() == 0.0;
        for (int j = 1; j <= sig.layers(); ++j) {
            bool layer_all_off = true;
            bool layer_has_flag = false;
            for (int u = 0; u < sig.width(j); ++u) {
                if (sig.bit(s, j, u)) layer_all_off = false;
                if (sig.boundary(s, j, u)) {
                    layer_has_flag = true;
                    if (first_flag.sample < 0) first_flag = {s + 1, j, u + 1};
                    if (!dead && !zero_net) {
                        rc.kind = RegionClass::Kind::PotentiallyNonsmooth;
                        rc.witness = {s + 1, j, u + 1};
                        return rc;
                    }
                }
            }
            dead = dead || (layer_all_off && !layer_has_flag);
        }
    }
    rc.kind = RegionClass::Kind::SmoothConstant;
    rc.witness = first_flag;
    return rc;
}

}  // namespace cvx::net
