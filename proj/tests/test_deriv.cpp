#include <catch2/catch.hpp>

#include <cmath>

#include "helpers.hpp"
#include "isnn/deriv.hpp"

using namespace isnn;

TEST_CASE("fd_grad on simple functions") {
    auto square = [](const Vec& x) { return x[0] * x[0]; };
    const Vec g = fd_grad(square, {3.0}, 1e-5);
    CHECK(g[0] == Approx(6.0).margin(1e-9));

    auto constant = [](const Vec&) { return 4.2; };
    const Vec gc = fd_grad(constant, {1.0, 2.0, 3.0}, 1e-5);
    for (double v : gc) CHECK(v == 0.0);

    auto sine = [](const Vec& x) { return std::sin(x[0]); };
    CHECK(fd_grad(sine, {0.0}, 1e-5)[0] == Approx(1.0).margin(1e-10));
}

TEST_CASE("fd_hess on simple functions") {
    auto square = [](const Vec& x) { return x[0] * x[0]; };
    CHECK(fd_hess(square, {1.3}, 1e-3)(0, 0) == Approx(2.0).margin(1e-6));

    auto affine = [](const Vec& x) { return 3.0 * x[0] - 2.0 * x[1] + 1.0; };
    const Mat ha = fd_hess(affine, {0.5, -0.25}, 1e-3);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) CHECK(ha(i, j) == Approx(0.0).margin(1e-6));

    auto xy = [](const Vec& x) { return x[0] * x[1]; };
    const Mat hxy = fd_hess(xy, {0.7, -1.1}, 1e-3);
    CHECK(hxy(0, 1) == Approx(1.0).margin(1e-6));
    CHECK(hxy(1, 0) == Approx(1.0).margin(1e-6));
}

TEST_CASE("affine cases: gradient equals the effective first-layer row") {
    // ISNN-2, H=1, linear output: grad_x = W0xx row, grad_y = W0xy row, hess = 0
    const ArchSpec s = ArchSpec::isnn2(2, 2, 1, 1, 4, 1);
    IsnnParams p = new_params(s, 21);
    const std::vector<double> eff = effective_weights(p);
    BranchInput in;
    in.x0 = {0.3, -0.6}; in.y0 = {1.0, 0.2}; in.t0 = {0.1}; in.z0 = {-0.5};
    const EvalBundle eb = eval_full_isnn2(p, eff, in);
    const BlockView wxx = view(p, eff, p.w_xx[0]);
    const BlockView wxy = view(p, eff, p.w_xy[0]);
    const Vec gx = eb.grad_x();
    const Vec gy = eb.grad_y();
    for (int j = 0; j < 2; ++j) {
        CHECK(gx[static_cast<std::size_t>(j)] == Approx(wxx.at(0, j)).margin(1e-14));
        CHECK(gy[static_cast<std::size_t>(j)] == Approx(wxy.at(0, j)).margin(1e-14));
    }
    CHECK(eb.hess.rows() == 6);
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 6; ++j) CHECK(eb.hess(i, j) == 0.0);

    // ISNN-1 with H_x=1 and only an x branch
    const ArchSpec s1 = ArchSpec::isnn1(3, 0, 0, 0, 1, 1, 1, 1);
    IsnnParams p1 = new_params(s1, 22);
    const std::vector<double> eff1 = effective_weights(p1);
    BranchInput in1;
    in1.x0 = {0.1, 0.2, 0.3};
    const EvalBundle eb1 = eval_full_isnn1(p1, eff1, in1);
    const BlockView w1 = view(p1, eff1, p1.w_xx[0]);
    for (int j = 0; j < 3; ++j)
        CHECK(eb1.grad[static_cast<std::size_t>(j)] == Approx(w1.at(0, j)).margin(1e-14));
}

namespace {

double forward_any(const IsnnParams& p, const std::vector<double>& eff, const Vec& flat) {
    return forward(p, eff, BranchInput::concat_view(p.spec, flat));
}

void check_md_vs_fd(ArchKind kind, std::uint64_t seed, int trials) {
    Rng rng(seed);
    for (int t = 0; t < trials; ++t) {
        const ArchSpec s = testing::random_spec(kind, rng);
        const IsnnParams p = new_params(s, rng.raw());
        const std::vector<double> eff = effective_weights(p);
        const BranchInput in = testing::random_input(s, rng, -2.0, 2.0);
        const Vec x = in.flat();

        const EvalBundle eb = eval_full(p, eff, in);
        auto f = [&](const Vec& v) { return forward_any(p, eff, v); };

        // value consistency with the plain forward pass
        CHECK(eb.value == Approx(f(x)).margin(1e-14));

        const Vec gfd = fd_grad(f, x, 1e-5);
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double tol = std::max(1e-6, 1e-4 * std::abs(gfd[i]));
            CHECK(eb.grad[i] == Approx(gfd[i]).margin(tol));
        }

        const Mat hfd = fd_hess(f, x, 1e-3);
        for (std::size_t i = 0; i < x.size(); ++i)
            for (std::size_t j = 0; j < x.size(); ++j) {
                const double tol = std::max(1e-4, 1e-3 * std::abs(hfd(i, j)));
                CHECK(eb.hess(i, j) == Approx(hfd(i, j)).margin(tol));
            }
    }
}

} // namespace

TEST_CASE("manual derivatives match finite differences (isnn1)") {
    check_md_vs_fd(ArchKind::Isnn1, 1001, 25);
}

TEST_CASE("manual derivatives match finite differences (isnn2)") {
    check_md_vs_fd(ArchKind::Isnn2, 1002, 25);
}

TEST_CASE("manual derivatives match finite differences (ffnn)") {
    check_md_vs_fd(ArchKind::Ffnn, 1003, 15);
}

TEST_CASE("constraint properties on random initializations") {
    // reduced-scale sweep of the acceptance constraint suite
    for (ArchKind kind : {ArchKind::Isnn1, ArchKind::Isnn2}) {
        Rng rng(kind == ArchKind::Isnn1 ? 31 : 32);
        for (int t = 0; t < 200; ++t) {
            const ArchSpec s = testing::random_spec(kind, rng, true);
            const IsnnParams p = new_params(s, rng.raw());
            const std::vector<double> eff = effective_weights(p);
            const BranchInput in = testing::random_input(s, rng);
            const EvalBundle eb = eval_full(p, eff, in);

            // monotone branches: non-negative gradient
            for (double g : eb.grad_y()) CHECK(g >= -1e-10);
            for (double g : eb.grad_t()) CHECK(g >= -1e-10);

            // convex branches: PSD Hessian blocks
            if (s.n_x > 0) CHECK(min_eigenvalue(eb.hess_xx()) >= -1e-8);
            if (s.n_y > 0) CHECK(min_eigenvalue(eb.hess_yy()) >= -1e-8);

            // Hessian symmetry
            for (std::size_t i = 0; i < eb.hess.rows(); ++i)
                for (std::size_t j = 0; j < i; ++j)
                    CHECK(eb.hess(i, j) == Approx(eb.hess(j, i)).margin(1e-10));

            // convexity inequality along a random segment in x0 and y0
            Rng seg(rng.raw());
            auto convex_check = [&](bool in_x) {
                BranchInput a = in, b = in;
                Vec& va = in_x ? a.x0 : a.y0;
                Vec& vb = in_x ? b.x0 : b.y0;
                if (va.empty()) return;
                for (double& v : va) v = seg.uniform(-3, 3);
                for (double& v : vb) v = seg.uniform(-3, 3);
                const double lam = seg.uniform();
                BranchInput mid = in;
                Vec& vm = in_x ? mid.x0 : mid.y0;
                for (std::size_t i = 0; i < vm.size(); ++i)
                    vm[i] = lam * va[i] + (1.0 - lam) * vb[i];
                const double pa = forward(p, eff, a);
                const double pb = forward(p, eff, b);
                const double pm = forward(p, eff, mid);
                CHECK(pm <= lam * pa + (1.0 - lam) * pb + 1e-9);
            };
            convex_check(true);
            convex_check(false);

            // monotonicity: coordinatewise increase in y and t cannot lower P
            auto mono_check = [&](bool in_y) {
                BranchInput lo = in, hi = in;
                Vec& vl = in_y ? lo.y0 : lo.t0;
                Vec& vh = in_y ? hi.y0 : hi.t0;
                if (vl.empty()) return;
                for (std::size_t i = 0; i < vh.size(); ++i) vh[i] = vl[i] + seg.uniform(0, 2);
                CHECK(forward(p, eff, lo) <= forward(p, eff, hi) + 1e-9);
            };
            mono_check(true);
            mono_check(false);
        }
    }
}

TEST_CASE("z branch carries no constraint: a dip witness exists") {
    // Hand-built net whose output decreases then increases along z0:
    // z units sigmoid(z-2), sigmoid(-z-2); x layer sums them with weight 6,
    // bias -2, linear output. Minimum sits at z=0, value grows toward both
    // infinities.
    ArchSpec s;
    s.kind = ArchKind::Isnn1;
    s.n_z = 1;
    s.z_widths = {2};
    s.x_widths = {1};
    s.validate();
    IsnnParams p = make_param_layout(s);
    // W0zz = [[1], [-1]], b0z = [-2, -2], W^[xz] = [6, 6], b0x = -2
    const ParamBlock& wzz = p.block(p.w_zz[0]);
    p.raw[wzz.offset + 0] = 1.0;
    p.raw[wzz.offset + 1] = -1.0;
    const ParamBlock& bz = p.block(p.b_z[0]);
    p.raw[bz.offset + 0] = -2.0;
    p.raw[bz.offset + 1] = -2.0;
    const ParamBlock& wxz = p.block(p.w_xz[0]);
    p.raw[wxz.offset + 0] = 6.0;
    p.raw[wxz.offset + 1] = 6.0;
    p.raw[p.block(p.b_x[0]).offset] = -2.0;

    auto eval_at = [&](double z) {
        BranchInput in;
        in.z0 = {z};
        return forward_isnn1(p, in);
    };
    const double left = eval_at(-6.0);
    const double mid = eval_at(0.0);
    const double right = eval_at(6.0);
    CHECK(mid < left);
    CHECK(mid < right);
}
