#include <catch2/catch.hpp>

#include "helpers.hpp"
#include "isnn/deriv.hpp"
#include "isnn/forward.hpp"

using namespace isnn;

TEST_CASE("activations: values and stability") {
    CHECK(softplus(0.0) == Approx(std::log(2.0)).margin(1e-15));
    CHECK(sigmoid(0.0) == 0.5);
    // stable tails: no overflow/NaN, exact underflow to 0
    CHECK(softplus(-800.0) == 0.0);
    CHECK(std::isfinite(softplus(800.0)));
    CHECK(softplus(800.0) == Approx(800.0));
    CHECK(sigmoid(-800.0) == 0.0);
    CHECK(sigmoid(800.0) == 1.0);
    CHECK(softplus(-50.0) == Approx(1.9287e-22).epsilon(1e-3));
    CHECK(softplus(-50.0) > 0.0);
}

TEST_CASE("new_params: determinism and layout") {
    const ArchSpec s = ArchSpec::isnn2(1, 2, 1, 1, 6, 3);
    const IsnnParams a = new_params(s, 123);
    const IsnnParams b = new_params(s, 123);
    REQUIRE(a.raw.size() == b.raw.size());
    CHECK(a.raw == b.raw); // bit-identical

    const IsnnParams c = new_params(s, 124);
    CHECK(a.raw != c.raw);

    // biases start at zero
    for (const ParamBlock& blk : a.blocks)
        if (blk.bias)
            for (std::size_t k = 0; k < blk.size(); ++k) CHECK(a.raw[blk.offset + k] == 0.0);
}

TEST_CASE("degenerate specs are rejected") {
    ArchSpec s;
    s.kind = ArchKind::Isnn2;
    s.n_x = 0;
    CHECK_THROWS_AS(s.validate(), InvalidSpec);
    CHECK_THROWS_AS(ArchSpec::ffnn(0, {4}), InvalidSpec);
}

TEST_CASE("effective_weights maps NonNegative blocks through softplus") {
    const ArchSpec s = ArchSpec::isnn2(1, 1, 1, 1, 3, 2);
    IsnnParams p = new_params(s, 1);
    for (double& v : p.raw) v = 0.0;
    // plant a few markers
    bool saw_nonneg = false, saw_free = false;
    for (const ParamBlock& b : p.blocks) {
        if (b.tag == ParamTag::NonNegative && !saw_nonneg) {
            p.raw[b.offset] = 0.0;
            saw_nonneg = true;
        }
        if (b.tag == ParamTag::Free && !b.bias && !saw_free) {
            p.raw[b.offset] = -3.0;
            saw_free = true;
        }
    }
    REQUIRE(saw_nonneg);
    REQUIRE(saw_free);
    const std::vector<double> eff = effective_weights(p);
    for (const ParamBlock& b : p.blocks) {
        for (std::size_t k = 0; k < b.size(); ++k) {
            if (b.tag == ParamTag::NonNegative) {
                CHECK(eff[b.offset + k] >= 0.0);
                CHECK(eff[b.offset + k] == Approx(softplus(p.raw[b.offset + k])));
            } else {
                CHECK(eff[b.offset + k] == p.raw[b.offset + k]);
            }
        }
    }
    // softplus(0) = ln 2, softplus(-50) tiny but positive
    CHECK(softplus(0.0) == Approx(0.6931471805599453));
}

TEST_CASE("constraint tags match the architecture rules") {
    for (ArchKind kind : {ArchKind::Isnn1, ArchKind::Isnn2}) {
        const ArchSpec s = kind == ArchKind::Isnn1 ? ArchSpec::isnn1(2, 2, 2, 2, 4, 2, 4, 3)
                                                   : ArchSpec::isnn2(2, 2, 2, 2, 4, 3);
        const IsnnParams p = make_param_layout(s);
        // first x weight free, later ones non-negative
        CHECK(p.block(p.w_xx[0]).tag == ParamTag::Free);
        for (std::size_t h = 1; h < p.w_xx.size(); ++h)
            CHECK(p.block(p.w_xx[h]).tag == ParamTag::NonNegative);
        for (int idx : p.w_yy) CHECK(p.block(idx).tag == ParamTag::NonNegative);
        for (int idx : p.w_tt) CHECK(p.block(idx).tag == ParamTag::NonNegative);
        for (int idx : p.w_zz) CHECK(p.block(idx).tag == ParamTag::Free);
        for (int idx : p.w_xy)
            if (idx >= 0) CHECK(p.block(idx).tag == ParamTag::NonNegative);
        for (int idx : p.w_xt)
            if (idx >= 0) CHECK(p.block(idx).tag == ParamTag::NonNegative);
        for (int idx : p.w_xz)
            if (idx >= 0) CHECK(p.block(idx).tag == ParamTag::Free);
        for (int idx : p.w_xx0)
            if (idx >= 0) CHECK(p.block(idx).tag == ParamTag::Free);
        for (const ParamBlock& b : p.blocks)
            if (b.bias) CHECK(b.tag == ParamTag::Free);
    }
}

TEST_CASE("parameter counts for the toy-study configurations") {
    // Sizes chosen to land on the documented trainable-parameter budgets.
    CHECK(make_param_layout(ArchSpec::ffnn(4, {30, 30, 30})).count() == 2041);
    CHECK(make_param_layout(ArchSpec::isnn2(1, 1, 1, 1, 15, 3)).count() == 1877);
    const std::size_t isnn1_count = make_param_layout(ArchSpec::isnn1(1, 1, 1, 1, 10, 4, 10, 4)).count();
    CHECK(isnn1_count >= 1440);
    CHECK(isnn1_count <= 1760);
}

TEST_CASE("zero effective weights give zero output") {
    for (ArchKind kind : {ArchKind::Isnn1, ArchKind::Isnn2}) {
        const ArchSpec s = kind == ArchKind::Isnn1 ? ArchSpec::isnn1(1, 1, 1, 1, 3, 2, 3, 2)
                                                   : ArchSpec::isnn2(1, 1, 1, 1, 3, 2);
        IsnnParams p = new_params(s, 5);
        testing::force_zero_effective(p);
        BranchInput in;
        in.x0 = {0.7}; in.y0 = {-1.1}; in.t0 = {2.0}; in.z0 = {0.3};
        const double out = kind == ArchKind::Isnn1 ? forward_isnn1(p, in) : forward_isnn2(p, in);
        CHECK(out == 0.0);
    }
}

TEST_CASE("single affine layer reduces to the weighted sum") {
    // ISNN-2 with H=1: out = x W0xx^T + y W0xy^T + z W0xz^T + t W0xt^T + b
    const ArchSpec s = ArchSpec::isnn2(1, 1, 1, 1, 4, 1);
    IsnnParams p = new_params(s, 9);
    const std::vector<double> eff = effective_weights(p);
    BranchInput in;
    in.x0 = {0.4}; in.y0 = {1.2}; in.t0 = {-0.7}; in.z0 = {0.9};
    const double got = forward_isnn2(p, in);
    const double want = view(p, eff, p.w_xx[0]).at(0, 0) * in.x0[0]
                      + view(p, eff, p.w_xy[0]).at(0, 0) * in.y0[0]
                      + view(p, eff, p.w_xz[0]).at(0, 0) * in.z0[0]
                      + view(p, eff, p.w_xt[0]).at(0, 0) * in.t0[0]
                      + view(p, eff, p.b_x[0]).bias(0);
    CHECK(got == Approx(want).margin(1e-15));
}

TEST_CASE("ffnn zero weights give the output bias, single layer is affine") {
    const ArchSpec s = ArchSpec::ffnn(3, {4});
    IsnnParams p = new_params(s, 2);
    for (double& v : p.raw) v = 0.0;
    p.raw[p.block(p.b_x[1]).offset] = 1.25;
    CHECK(forward_ffnn(p, {0.1, 0.2, 0.3}) == 1.25);

    const ArchSpec lin = ArchSpec::ffnn(2, {});
    IsnnParams q = new_params(lin, 3);
    q.raw = {1.5, -2.0, 0.25}; // W = [1.5, -2], b = 0.25
    CHECK(forward_ffnn(q, {2.0, 1.0}) == Approx(1.5 * 2.0 - 2.0 + 0.25));
}

TEST_CASE("softplus output activation is accepted") {
    const ArchSpec s = ArchSpec::isnn2(1, 0, 0, 0, 3, 2, OutputAct::Softplus);
    IsnnParams p = new_params(s, 17);
    BranchInput in;
    in.x0 = {0.5};
    const double out = forward_isnn2(p, in);
    CHECK(out > 0.0);
}
