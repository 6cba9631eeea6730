#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "convexity/errors.hpp"
#include "convexity/net.hpp"
#include "convexity/region.hpp"
#include "support.hpp"

using namespace cvx;

namespace {

Dataset one_sample(std::initializer_list<double> a, double f) {
    Eigen::MatrixXd in(static_cast<int>(a.size()), 1);
    int i = 0;
    for (double v : a) in(i++, 0) = v;
    Eigen::VectorXd lab(1);
    lab << f;
    return Dataset::from_samples(in, lab);
}

}  // namespace

TEST_CASE("architecture validation") {
    CHECK_THROWS_AS(Architecture({2, 1}), InvalidInput);
    CHECK_THROWS_AS(Architecture({2, 2, 2}), InvalidInput);   // output width 2
    CHECK_THROWS_AS(Architecture({2, 1, 1}), InvalidInput);   // width-1 hidden layer
    CHECK_THROWS_AS(Architecture({0, 2, 1}), InvalidInput);
    const Architecture a({3, 4, 5, 1});
    CHECK(a.hidden_depth() == 2);
    CHECK(a.matrix_count() == 3);
    CHECK(a.param_count() == 3 * 4 + 4 * 5 + 5 * 1);
}

TEST_CASE("forward on the hand fixtures") {
    const Architecture arch = ts::t1_arch();
    CHECK(net::forward(arch, ts::t1_weights(), ts::t1_data().input(0)) == 1.5);

    const Weights zero = Weights::zeros(arch);
    CHECK(net::forward(arch, zero, ts::t1_data().input(0)) == 0.0);
    Eigen::VectorXd other(2);
    other << -3.0, 7.0;
    CHECK(net::forward(arch, zero, other) == 0.0);

    // negative pre-activation kills the second hidden unit
    Weights w = Weights::zeros(arch);
    w.mat(0) << 1, 0, 0, -1;
    w.mat(1) << 0, 5;
    const auto trace = net::forward_trace(arch, w, ts::t1_data().input(0));
    CHECK(trace[1](0) == 1.0);
    CHECK(trace[1](1) == 0.0);
    CHECK(trace[2](0) == 0.0);
    CHECK(net::forward(arch, w, ts::t1_data().input(0)) == 0.0);
}

TEST_CASE("forward_trace layers for T1") {
    const auto trace = net::forward_trace(ts::t1_arch(), ts::t1_weights(), ts::t1_data().input(0));
    REQUIRE(trace.size() == 3);
    CHECK(trace[0](0) == 1.0);
    CHECK(trace[0](1) == 0.5);
    CHECK(trace[1](0) == 1.0);
    CHECK(trace[1](1) == 0.5);
    CHECK(trace[2](0) == 1.5);
}

TEST_CASE("forward rejects dimension mismatches") {
    Eigen::VectorXd bad(3);
    bad << 1, 2, 3;
    CHECK_THROWS_AS(net::forward(ts::t1_arch(), ts::t1_weights(), bad), InvalidInput);
    Weights wrong = Weights::zeros(Architecture({3, 2, 1}));
    CHECK_THROWS_AS(net::forward(ts::t1_arch(), wrong, ts::t1_data().input(0)), InvalidInput);
}

TEST_CASE("positive homogeneity while switches are unchanged") {
    const Architecture arch = ts::t1_arch();
    const double base = net::forward(arch, ts::t1_weights(), ts::t1_data().input(0));
    for (double c : {0.5, 2.0}) {
        const Weights scaled = ts::t1_weights() * c;
        CHECK(net::forward(arch, scaled, ts::t1_data().input(0)) ==
              doctest::Approx(c * c * base).epsilon(1e-14));
    }
}

TEST_CASE("switch_signature bits and boundary flags") {
    const Architecture arch = ts::t1_arch();
    const Dataset d = ts::t1_data();

    const SwitchSignature t1 = net::switch_signature(arch, ts::t1_weights(), d, 1e-9);
    CHECK(t1.bit(0, 1, 0) == 1);
    CHECK(t1.bit(0, 1, 1) == 1);
    CHECK(t1.bit(0, 2, 0) == 1);
    CHECK_FALSE(t1.any_boundary());
    CHECK(t1.active_fraction(1) == 1.0);

    const SwitchSignature zero = net::switch_signature(arch, Weights::zeros(arch), d, 1e-9);
    CHECK(zero.bit(0, 1, 0) == 0);
    CHECK(zero.bit(0, 1, 1) == 0);
    CHECK(zero.bit(0, 2, 0) == 0);
    CHECK(zero.boundary_count() == 3);  // every unit exactly at zero

    Weights w = Weights::zeros(arch);
    w.mat(0) << 1, 0, 0, -1;
    w.mat(1) << 0, 5;
    const SwitchSignature mixed = net::switch_signature(arch, w, d, 1e-9);
    CHECK(mixed.bit(0, 1, 0) == 1);
    CHECK(mixed.bit(0, 1, 1) == 0);

    CHECK_THROWS_AS(net::switch_signature(arch, w, d, -1.0), InvalidInput);
}

TEST_CASE("frozen_forward fixtures") {
    const Architecture arch = ts::t1_arch();
    const Dataset d = ts::t1_data();
    const SwitchSignature sig = net::switch_signature(arch, ts::t1_weights(), d, 1e-9);

    CHECK(net::frozen_forward(arch, ts::t1_weights(), sig, 0, d.input(0)) == 1.5);

    // the frozen output switch stays on even though the true forward clamps
    Weights flipped = ts::t1_weights();
    flipped.mat(1) << -1, -1;
    CHECK(net::frozen_forward(arch, flipped, sig, 0, d.input(0)) == -1.5);
    CHECK(net::forward(arch, flipped, d.input(0)) == 0.0);

    const SwitchSignature off(arch, 1);
    for (std::uint64_t s = 0; s < 5; ++s) {
        const Weights any = Weights::gaussian(arch, s, 1.0);
        CHECK(net::frozen_forward(arch, any, off, 0, d.input(0)) == 0.0);
    }

    CHECK_THROWS_AS(net::frozen_forward(arch, ts::t1_weights(), sig, 2, d.input(0)), InvalidInput);
}

TEST_CASE("frozen and true forward agree exactly at smooth points") {
    const Architecture arch({3, 4, 3, 1});
    const Dataset data = ts::random_data(3, 8, 77);
    for (std::uint64_t k = 0; k < 50; ++k) {
        const Weights w = ts::smooth_gaussian(arch, data, k, 0.9);
        REQUIRE(net::region_classify(arch, w, data, region::default_boundary_eps(w)).kind ==
                RegionClass::Kind::SmoothAnalytic);
        const SwitchSignature sig = net::switch_signature(arch, w, data, 0.0);
        for (int s = 0; s < data.size(); ++s)
            CHECK(net::frozen_forward(arch, w, sig, s, data.input(s)) ==
                  net::forward(arch, w, data.input(s)));
    }
}

TEST_CASE("region_classify hand fixtures") {
    const Architecture arch = ts::t1_arch();
    const Dataset d = ts::t1_data();

    CHECK(net::region_classify(arch, ts::t1_weights(), d, 1e-9).kind ==
          RegionClass::Kind::SmoothAnalytic);

    const Architecture deep({2, 2, 2, 1});
    const auto constant = net::region_classify(deep, Weights::zeros(deep), d, 1e-9);
    CHECK(constant.kind == RegionClass::Kind::SmoothConstant);

    // live input feeding an exactly-zero pre-activation: a genuine kink
    Weights w = Weights::zeros(arch);
    w.mat(0) << 1, 0, -1, 0;  // unit 1 weights (1,-1), unit 2 weights (0,0)
    w.mat(1) << 1, 1;
    const Dataset ones = one_sample({1.0, 1.0}, 1.0);
    const auto kink = net::region_classify(arch, w, ones, 1e-9);
    CHECK(kink.kind == RegionClass::Kind::PotentiallyNonsmooth);
    CHECK(kink.witness.sample == 1);
    CHECK(kink.witness.layer == 1);
    CHECK(kink.witness.unit == 1);

    // H = 1 zero net: the loss is C^1 but not C^2, so stay conservative
    CHECK(net::region_classify(arch, Weights::zeros(arch), d, 1e-9).kind ==
          RegionClass::Kind::PotentiallyNonsmooth);

    // zero input feeding zero pre-activations: locally constant, benign
    const Dataset zin = one_sample({0.0, 0.0}, 1.0);
    const auto benign = net::region_classify(arch, ts::t1_weights(), zin, 1e-9);
    CHECK(benign.kind == RegionClass::Kind::SmoothConstant);
}

TEST_CASE("random gaussian points never land on a kink with eps_b = 0") {
    // Exact zeros do occur (a fully-off hidden layer feeds zeros downstream),
    // but those paths are dead and classify as smooth-constant; an exact zero
    // on a live path would need an exact floating-point cancellation.
    const Architecture arch({2, 3, 1});
    const Dataset data = ts::random_data(2, 4, 13);
    int kinks = 0;
    int constant = 0;
    for (std::uint64_t k = 0; k < 10000; ++k) {
        const Weights w = Weights::gaussian(arch, rng::splitmix(k + 1), 1.0);
        const auto kind = net::region_classify(arch, w, data, 0.0).kind;
        if (kind == RegionClass::Kind::PotentiallyNonsmooth) ++kinks;
        if (kind == RegionClass::Kind::SmoothConstant) ++constant;
    }
    CHECK(kinks == 0);
    CHECK(constant > 0);  // dead layers are common at this width, not an edge case
}

TEST_CASE("forward is a degree-(H+1) polynomial in t inside a region") {
    const Architecture arch({3, 3, 3, 1});
    const int depth = arch.hidden_depth();
    const Dataset data = ts::random_data(3, 4, 99);
    int verified = 0;
    for (std::uint64_t k = 0; verified < 20 && k < 200; ++k) {
        const Weights w = ts::smooth_gaussian(arch, data, 1000 + k, 0.8, 5e-3);
        const Weights x = Weights::gaussian(arch, rng::splitmix(500 + k), 1.0);
        const SwitchSignature base = net::switch_signature(arch, w, data, 0.0);
        const double delta = 1e-5;
        const int nodes = depth + 2;

        std::vector<double> tsv, ys;
        bool same_region = true;
        for (int j = 0; j <= nodes; ++j) {  // nodes interpolation points + 1 probe
            Weights at = w;
            at.add_scaled(x, delta * j);
            if (!net::switch_signature(arch, at, data, 0.0).bits_equal(base)) {
                same_region = false;
                break;
            }
            tsv.push_back(delta * j);
            ys.push_back(net::forward(arch, at, data.input(0)));
        }
        if (!same_region) continue;
        const std::vector<double> nodes_t(tsv.begin(), tsv.begin() + nodes);
        const std::vector<double> nodes_y(ys.begin(), ys.begin() + nodes);
        const double predicted = ts::lagrange_eval(nodes_t, nodes_y, tsv.back());
        CHECK(ts::rel_err(predicted, ys.back()) < 1e-10);
        ++verified;
    }
    CHECK(verified == 20);
}

TEST_CASE("signature hash and equality track the bits") {
    const Architecture arch({2, 3, 1});
    const Dataset data = ts::random_data(2, 6, 5);
    const Weights a = Weights::gaussian(arch, 1, 1.0);
    const Weights b = Weights::gaussian(arch, 2, 1.0);
    const SwitchSignature sa = net::switch_signature(arch, a, data, 1e-9);
    const SwitchSignature sa2 = net::switch_signature(arch, a, data, 1e-9);
    const SwitchSignature sb = net::switch_signature(arch, b, data, 1e-9);
    CHECK(sa == sa2);
    CHECK(sa.hash() == sa2.hash());
    if (!sa.bits_equal(sb)) CHECK(sa.hash() != sb.hash());
}
