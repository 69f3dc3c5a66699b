#include <catch2/catch.hpp>

#include <cmath>

#include "isnn/sampling.hpp"
#include "isnn/train.hpp"

using namespace isnn;

TEST_CASE("lhs_sample stratification in one dimension") {
    const Mat s = lhs_sample(4, 1, 0.0, 1.0, 77);
    std::vector<int> counts(4, 0);
    for (std::size_t i = 0; i < 4; ++i) {
        const double v = s(i, 0);
        REQUIRE(v >= 0.0);
        REQUIRE(v < 1.0);
        counts[static_cast<std::size_t>(v * 4.0)]++;
    }
    for (int c : counts) CHECK(c == 1);
}

TEST_CASE("lhs_sample marginal histograms have one sample per bin") {
    const std::size_t n = 500;
    const Mat s = lhs_sample(n, 4, 0.0, 4.0, 2024);
    for (std::size_t d = 0; d < 4; ++d) {
        std::vector<int> counts(n, 0);
        for (std::size_t i = 0; i < n; ++i) {
            const double u = (s(i, d) - 0.0) / 4.0; // normalize to [0,1)
            counts[static_cast<std::size_t>(u * static_cast<double>(n))]++;
        }
        for (int c : counts) CHECK(c == 1);
    }
}

TEST_CASE("lhs_sample determinism and bounds validation") {
    const Mat a = lhs_sample(32, 3, -1.0, 2.0, 5);
    const Mat b = lhs_sample(32, 3, -1.0, 2.0, 5);
    for (std::size_t i = 0; i < 32; ++i)
        for (std::size_t d = 0; d < 3; ++d) CHECK(a(i, d) == b(i, d));

    CHECK_THROWS_AS(lhs_sample(0, 2, 0.0, 1.0, 1), InvalidBounds);
    CHECK_THROWS_AS(lhs_sample(4, 2, 1.0, 1.0, 1), InvalidBounds);
    CHECK_THROWS_AS(lhs_sample(4, 2, Vec{0.0}, Vec{1.0, 1.0}, 1), InvalidBounds);
}

TEST_CASE("toy_f values") {
    CHECK(toy_f(0, 0, 0, 0) == Approx(1.0 + std::log(2.0) - 0.4).margin(1e-15));
    CHECK(toy_f(0, 0, 0, 0) == Approx(1.2931471805599453).margin(1e-12));
    const double half_pi = 1.5707963267948966;
    CHECK(toy_f(0, 0, 0, half_pi) == Approx(2.2931471805599453).margin(1e-12));
    // exp(-0.5 x) decays: contribution -> 0, decreasing and convex in x
    CHECK(toy_f(40, 0, 0, 0) == Approx(std::log(2.0) + 0.0 - 0.4 + std::exp(-20.0)).margin(1e-12));
    CHECK(toy_f(1, 0, 0, 0) > toy_f(2, 0, 0, 0));
    const double mid = toy_f(1.5, 0, 0, 0);
    CHECK(mid <= 0.5 * toy_f(1, 0, 0, 0) + 0.5 * toy_f(2, 0, 0, 0));
}

TEST_CASE("toy_g values") {
    CHECK(toy_g(1.0, 0.0, 2.0, 3.0) == 0.0);
    CHECK(toy_g(1.0, 2.0, 0.0, 3.0) == 0.0);
    // termwise product oracle
    const double fx = std::exp(-0.3);
    const double fy = std::pow(0.15 * 2.0, 2.0);
    const double ft = std::tanh(0.9);
    const double fz = 0.2 * std::sin(0.5 * 4.0 + 2.0) + 0.5;
    CHECK(toy_g(1, 2, 3, 4) == Approx(fx * fy * ft * fz).margin(1e-15));
}

TEST_CASE("mse basics and two-pass oracle") {
    CHECK(mse({1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}) == 0.0);
    CHECK(mse({1.0, 1.0}, {0.0, 0.0}) == 1.0);
    CHECK_THROWS_AS(mse({1.0}, {1.0, 2.0}), LengthMismatch);

    Rng rng(15);
    Vec a(101), b(101);
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = rng.uniform(-5, 5);
        b[i] = rng.uniform(-5, 5);
    }
    // oracle: separate diff pass then reverse-order accumulation
    Vec d2(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d2[i] = (a[i] - b[i]) * (a[i] - b[i]);
    double s = 0.0;
    for (std::size_t i = a.size(); i-- > 0;) s += d2[i];
    CHECK(mse(a, b) == Approx(s / static_cast<double>(a.size())).margin(1e-14));
}

TEST_CASE("adam first step and zero-gradient fixed point") {
    AdamState st;
    Vec params{1.0};
    adam_step(st, params, {1.0}, 1e-3);
    CHECK(params[0] == Approx(1.0 - 1e-3 / (1.0 + 1e-8)).margin(1e-12));

    AdamState st2;
    Vec params2{0.5, -0.5};
    for (int i = 0; i < 10; ++i) adam_step(st2, params2, {0.0, 0.0}, 1e-3);
    CHECK(params2[0] == 0.5);
    CHECK(params2[1] == -0.5);

    CHECK_THROWS_AS(adam_step(st2, params2, {1.0}, 1e-3), ShapeMismatch);
}

TEST_CASE("train_regression fits an affine map") {
    // y = 2x - 1 with a bias-only FFNN head (no hidden layers)
    ToyDataset data;
    data.inputs = Mat(20, 1);
    data.targets.resize(20);
    for (std::size_t i = 0; i < 20; ++i) {
        const double x = -1.0 + 0.1 * static_cast<double>(i);
        data.inputs(i, 0) = x;
        data.targets[i] = 2.0 * x - 1.0;
    }
    TrainConfig cfg;
    cfg.epochs = 5000;
    cfg.lr = 1e-2;
    cfg.seed = 3;
    const TrainResult r = train_regression(ArchSpec::ffnn(1, {}), data, cfg);
    CHECK(r.final_train_mse < 1e-6);
}

TEST_CASE("train_regression rejects invalid configs") {
    ToyDataset data;
    data.inputs = Mat(1, 1);
    data.targets = {0.0};
    TrainConfig cfg;
    cfg.epochs = 0;
    CHECK_THROWS_AS(train_regression(ArchSpec::ffnn(1, {}), data, cfg), InvalidConfig);

    TrainConfig ok;
    ok.epochs = 1;
    ToyDataset empty;
    empty.inputs = Mat(0, 1);
    CHECK_THROWS_AS(train_regression(ArchSpec::ffnn(1, {}), empty, ok), InvalidConfig);
}

TEST_CASE("train_regression on toy_f decreases and is reproducible") {
    const ToyDataset data = gen_toy('f', 64, 0.0, 4.0, 11);
    TrainConfig cfg;
    cfg.epochs = 800;
    cfg.lr = 1e-3;
    cfg.seed = 1;
    cfg.loss_every = 100;
    const ArchSpec spec = ArchSpec::isnn2(1, 1, 1, 1, 8, 2);
    const TrainResult a = train_regression(spec, data, cfg);
    const TrainResult b = train_regression(spec, data, cfg);
    CHECK(a.params.raw == b.params.raw); // bit-reproducible
    REQUIRE(a.history.size() >= 3);
    for (std::size_t i = 1; i < a.history.size(); ++i)
        CHECK(a.history[i].train_mse <= a.history[i - 1].train_mse + 1e-12);
    CHECK(a.final_train_mse < a.history.front().train_mse);
}
