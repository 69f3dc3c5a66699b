#pragma once

#include <vector>

#include "isnn/arch.hpp"

namespace isnn {

// Read-only view of one block inside a flat parameter vector.
struct BlockView {
    const double* p = nullptr;
    int rows = 0, cols = 0;

    double at(int i, int j) const { return p[i * cols + j]; }
    double bias(int i) const { return p[i]; }

    // y += W x
    void accum_matvec(const Vec& x, Vec& y) const {
        for (int i = 0; i < rows; ++i) {
            double s = 0.0;
            const double* row = p + i * cols;
            for (int j = 0; j < cols; ++j) s += row[j] * x[static_cast<std::size_t>(j)];
            y[static_cast<std::size_t>(i)] += s;
        }
    }
};

inline BlockView view(const IsnnParams& params, const std::vector<double>& flat, int idx) {
    const ParamBlock& b = params.block(idx);
    return BlockView{flat.data() + b.offset, b.rows, b.bias ? 1 : b.cols};
}

namespace detail {

// One constrained branch (y/z/t) run to its full depth.
inline Vec run_branch(const IsnnParams& p, const std::vector<double>& eff, const Vec& in,
                      const std::vector<int>& w_idx, const std::vector<int>& b_idx,
                      Activation act) {
    Vec cur = in;
    for (std::size_t h = 0; h < w_idx.size(); ++h) {
        const BlockView W = view(p, eff, w_idx[h]);
        const BlockView b = view(p, eff, b_idx[h]);
        Vec pre(static_cast<std::size_t>(W.rows), 0.0);
        for (int i = 0; i < W.rows; ++i) pre[static_cast<std::size_t>(i)] = b.bias(i);
        W.accum_matvec(cur, pre);
        for (double& v : pre) v = act_value(act, v);
        cur = std::move(pre);
    }
    return cur;
}

inline double apply_output(const ArchSpec& s, double pre_out) {
    return s.output_activation == OutputAct::Softplus ? softplus(pre_out) : pre_out;
}

} // namespace detail

// ISNN-1 forward pass. The y/z/t branches run independently to their own
// depths; their outputs enter only the first x layer. Later x layers see
// x alone. The output layer is linear unless the spec says otherwise.
inline double forward_isnn1(const IsnnParams& p, const std::vector<double>& eff,
                            const BranchInput& in) {
    check_input_dims(p.spec, in);
    const ArchSpec& s = p.spec;

    Vec yH, zH, tH;
    if (s.n_y > 0) yH = detail::run_branch(p, eff, in.y0, p.w_yy, p.b_y, Activation::Softplus);
    if (s.n_z > 0) zH = detail::run_branch(p, eff, in.z0, p.w_zz, p.b_z, Activation::Sigmoid);
    if (s.n_t > 0) tH = detail::run_branch(p, eff, in.t0, p.w_tt, p.b_t, Activation::Sigmoid);

    const int Hx = s.depth_x();
    Vec cur;
    for (int h = 0; h < Hx; ++h) {
        const int w = s.x_widths[static_cast<std::size_t>(h)];
        const BlockView b = view(p, eff, p.b_x[static_cast<std::size_t>(h)]);
        Vec pre(static_cast<std::size_t>(w), 0.0);
        for (int i = 0; i < w; ++i) pre[static_cast<std::size_t>(i)] = b.bias(i);
        if (h == 0) {
            if (s.n_x > 0) view(p, eff, p.w_xx[0]).accum_matvec(in.x0, pre);
            if (s.n_y > 0) view(p, eff, p.w_xy[0]).accum_matvec(yH, pre);
            if (s.n_z > 0) view(p, eff, p.w_xz[0]).accum_matvec(zH, pre);
            if (s.n_t > 0) view(p, eff, p.w_xt[0]).accum_matvec(tH, pre);
        } else {
            view(p, eff, p.w_xx[static_cast<std::size_t>(h)]).accum_matvec(cur, pre);
        }
        const bool last = h == Hx - 1;
        if (!last)
            for (double& v : pre) v = softplus(v);
        cur = std::move(pre);
    }
    return detail::apply_output(s, cur[0]);
}

// ISNN-2 forward pass. The first x layer mixes the raw inputs of all four
// groups; every later layer adds the x0 pass-through and the per-layer
// branch cross terms.
inline double forward_isnn2(const IsnnParams& p, const std::vector<double>& eff,
                            const BranchInput& in) {
    check_input_dims(p.spec, in);
    const ArchSpec& s = p.spec;

    // branch states y_h etc., h = 1..H-1
    std::vector<Vec> ys, zs, ts;
    auto run_layers = [&](const Vec& in0, const std::vector<int>& w_idx,
                          const std::vector<int>& b_idx, Activation act, std::vector<Vec>& out) {
        Vec cur = in0;
        for (std::size_t h = 0; h < w_idx.size(); ++h) {
            const BlockView W = view(p, eff, w_idx[h]);
            const BlockView b = view(p, eff, b_idx[h]);
            Vec pre(static_cast<std::size_t>(W.rows), 0.0);
            for (int i = 0; i < W.rows; ++i) pre[static_cast<std::size_t>(i)] = b.bias(i);
            W.accum_matvec(cur, pre);
            for (double& v : pre) v = act_value(act, v);
            out.push_back(pre);
            cur = std::move(pre);
        }
    };
    if (s.n_y > 0) run_layers(in.y0, p.w_yy, p.b_y, Activation::Softplus, ys);
    if (s.n_z > 0) run_layers(in.z0, p.w_zz, p.b_z, Activation::Sigmoid, zs);
    if (s.n_t > 0) run_layers(in.t0, p.w_tt, p.b_t, Activation::Sigmoid, ts);

    const int Hx = s.depth_x();
    Vec cur;
    for (int h = 0; h < Hx; ++h) {
        const int w = s.x_widths[static_cast<std::size_t>(h)];
        const BlockView b = view(p, eff, p.b_x[static_cast<std::size_t>(h)]);
        Vec pre(static_cast<std::size_t>(w), 0.0);
        for (int i = 0; i < w; ++i) pre[static_cast<std::size_t>(i)] = b.bias(i);
        if (h == 0) {
            if (s.n_x > 0) view(p, eff, p.w_xx[0]).accum_matvec(in.x0, pre);
            if (s.n_y > 0) view(p, eff, p.w_xy[0]).accum_matvec(in.y0, pre);
            if (s.n_z > 0) view(p, eff, p.w_xz[0]).accum_matvec(in.z0, pre);
            if (s.n_t > 0) view(p, eff, p.w_xt[0]).accum_matvec(in.t0, pre);
        } else {
            view(p, eff, p.w_xx[static_cast<std::size_t>(h)]).accum_matvec(cur, pre);
            if (s.n_x > 0) view(p, eff, p.w_xx0[static_cast<std::size_t>(h)]).accum_matvec(in.x0, pre);
            if (s.n_y > 0) view(p, eff, p.w_xy[static_cast<std::size_t>(h)]).accum_matvec(ys[static_cast<std::size_t>(h - 1)], pre);
            if (s.n_z > 0) view(p, eff, p.w_xz[static_cast<std::size_t>(h)]).accum_matvec(zs[static_cast<std::size_t>(h - 1)], pre);
            if (s.n_t > 0) view(p, eff, p.w_xt[static_cast<std::size_t>(h)]).accum_matvec(ts[static_cast<std::size_t>(h - 1)], pre);
        }
        const bool last = h == Hx - 1;
        if (!last)
            for (double& v : pre) v = softplus(v);
        cur = std::move(pre);
    }
    return detail::apply_output(s, cur[0]);
}

// Plain MLP baseline: sigmoid hidden activations, linear output.
inline double forward_ffnn(const IsnnParams& p, const std::vector<double>& eff, const Vec& in) {
    if (p.spec.kind != ArchKind::Ffnn) throw DimMismatch("forward_ffnn: wrong arch");
    if (static_cast<int>(in.size()) != p.spec.n_x) throw DimMismatch("forward_ffnn: input size");
    Vec cur = in;
    const int H = p.spec.depth_x();
    for (int h = 0; h < H; ++h) {
        const BlockView W = view(p, eff, p.w_xx[static_cast<std::size_t>(h)]);
        const BlockView b = view(p, eff, p.b_x[static_cast<std::size_t>(h)]);
        Vec pre(static_cast<std::size_t>(W.rows), 0.0);
        for (int i = 0; i < W.rows; ++i) pre[static_cast<std::size_t>(i)] = b.bias(i);
        W.accum_matvec(cur, pre);
        if (h != H - 1)
            for (double& v : pre) v = sigmoid(v);
        cur = std::move(pre);
    }
    return detail::apply_output(p.spec, cur[0]);
}

inline double forward_isnn1(const IsnnParams& p, const BranchInput& in) {
    return forward_isnn1(p, effective_weights(p), in);
}
inline double forward_isnn2(const IsnnParams& p, const BranchInput& in) {
    return forward_isnn2(p, effective_weights(p), in);
}
inline double forward_ffnn(const IsnnParams& p, const Vec& in) {
    return forward_ffnn(p, effective_weights(p), in);
}

// Dispatch on the spec's architecture kind.
inline double forward(const IsnnParams& p, const std::vector<double>& eff, const BranchInput& in) {
    switch (p.spec.kind) {
        case ArchKind::Isnn1: return forward_isnn1(p, eff, in);
        case ArchKind::Isnn2: return forward_isnn2(p, eff, in);
        case ArchKind::Ffnn: return forward_ffnn(p, eff, in.flat());
    }
    throw InvalidSpec("unknown arch");
}

} // namespace isnn
