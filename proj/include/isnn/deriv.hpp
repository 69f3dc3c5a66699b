#pragma once

#include <functional>
#include <vector>

#include "isnn/arch.hpp"
#include "isnn/forward.hpp"

namespace isnn {

enum class Branch { X, Y, T, Z };

// Output value plus the input-space gradient and Hessian from one manual
// differentiation pass. Gradient/Hessian coordinates are ordered
// [x0 | y0 | t0 | z0] to match BranchInput::flat().
struct EvalBundle {
    ArchKind arch = ArchKind::Isnn2;
    int n_x = 0, n_y = 0, n_t = 0, n_z = 0;
    double value = 0.0;
    Vec grad;   // size n, n = n_x + n_y + n_t + n_z
    Mat hess;   // n x n

    int dim() const { return n_x + n_y + n_t + n_z; }
    int offset(Branch b) const {
        switch (b) {
            case Branch::X: return 0;
            case Branch::Y: return n_x;
            case Branch::T: return n_x + n_y;
            case Branch::Z: return n_x + n_y + n_t;
        }
        return 0;
    }
    int size(Branch b) const {
        switch (b) {
            case Branch::X: return n_x;
            case Branch::Y: return n_y;
            case Branch::T: return n_t;
            case Branch::Z: return n_z;
        }
        return 0;
    }

    Vec grad_slice(Branch b) const {
        const int o = offset(b), n = size(b);
        return Vec(grad.begin() + o, grad.begin() + o + n);
    }
    Vec grad_x() const { return grad_slice(Branch::X); }
    Vec grad_y() const { return grad_slice(Branch::Y); }
    Vec grad_t() const { return grad_slice(Branch::T); }
    Vec grad_z() const { return grad_slice(Branch::Z); }

    Mat hess_block(Branch a, Branch b) const {
        const int oa = offset(a), na = size(a);
        const int ob = offset(b), nb = size(b);
        Mat m(static_cast<std::size_t>(na), static_cast<std::size_t>(nb));
        for (int i = 0; i < na; ++i)
            for (int j = 0; j < nb; ++j)
                m(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) =
                    hess(static_cast<std::size_t>(oa + i), static_cast<std::size_t>(ob + j));
        return m;
    }
    Mat hess_xx() const { return hess_block(Branch::X, Branch::X); }
    Mat hess_yy() const { return hess_block(Branch::Y, Branch::Y); }
    Mat hess_tt() const { return hess_block(Branch::T, Branch::T); }
    Mat hess_zz() const { return hess_block(Branch::Z, Branch::Z); }
};

namespace detail {

// Per-layer derivative state: activations v (width w), Jacobian d v / d u
// (w x n) and Hessian d2 v / d u2 (w x n x n), u the full input vector.
struct DState {
    int w = 0, n = 0;
    Vec v;
    std::vector<double> jac;   // [k*n + i]
    std::vector<double> hess;  // [k*n*n + i*n + j]

    DState() = default;
    DState(int w_, int n_) : w(w_), n(n_),
        v(static_cast<std::size_t>(w_), 0.0),
        jac(static_cast<std::size_t>(w_) * static_cast<std::size_t>(n_), 0.0),
        hess(static_cast<std::size_t>(w_) * static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_), 0.0) {}

    double& J(int k, int i) { return jac[static_cast<std::size_t>(k * n + i)]; }
    double J(int k, int i) const { return jac[static_cast<std::size_t>(k * n + i)]; }
    double& H(int k, int i, int j) { return hess[static_cast<std::size_t>((k * n + i) * n + j)]; }
    double H(int k, int i, int j) const { return hess[static_cast<std::size_t>((k * n + i) * n + j)]; }
};

// seed state for a raw input group: identity Jacobian on its coordinates
inline DState seed_state(const Vec& vals, int offset, int n) {
    DState s(static_cast<int>(vals.size()), n);
    s.v = vals;
    for (int k = 0; k < s.w; ++k) s.J(k, offset + k) = 1.0;
    return s;
}

// pre += W * src, propagated through value, Jacobian and Hessian
inline void accum_affine(const BlockView& W, const DState& src, DState& pre) {
    for (int k = 0; k < W.rows; ++k) {
        const double* wrow = W.p + k * W.cols;
        double s = 0.0;
        for (int c = 0; c < W.cols; ++c) s += wrow[c] * src.v[static_cast<std::size_t>(c)];
        pre.v[static_cast<std::size_t>(k)] += s;
        for (int i = 0; i < pre.n; ++i) {
            double js = 0.0;
            for (int c = 0; c < W.cols; ++c) js += wrow[c] * src.J(c, i);
            pre.J(k, i) += js;
        }
        for (int i = 0; i < pre.n; ++i)
            for (int j = 0; j < pre.n; ++j) {
                double hs = 0.0;
                for (int c = 0; c < W.cols; ++c) hs += wrow[c] * src.H(c, i, j);
                pre.H(k, i, j) += hs;
            }
    }
}

// pre += W * raw-input group located at coordinate offset
inline void accum_affine_raw(const BlockView& W, const Vec& vals, int offset, DState& pre) {
    for (int k = 0; k < W.rows; ++k) {
        const double* wrow = W.p + k * W.cols;
        double s = 0.0;
        for (int c = 0; c < W.cols; ++c) s += wrow[c] * vals[static_cast<std::size_t>(c)];
        pre.v[static_cast<std::size_t>(k)] += s;
        for (int c = 0; c < W.cols; ++c) pre.J(k, offset + c) += wrow[c];
    }
}

// v = act(pre):  J' = act' o Jpre,  H' = act'' Jpre Jpre^T + act' Hpre
inline void apply_activation(Activation act, DState& st) {
    for (int k = 0; k < st.w; ++k) {
        const double pre = st.v[static_cast<std::size_t>(k)];
        const double d1 = act_d1(act, pre);
        const double d2 = act_d2(act, pre);
        st.v[static_cast<std::size_t>(k)] = act_value(act, pre);
        for (int i = 0; i < st.n; ++i)
            for (int j = 0; j < st.n; ++j)
                st.H(k, i, j) = d2 * st.J(k, i) * st.J(k, j) + d1 * st.H(k, i, j);
        for (int i = 0; i < st.n; ++i) st.J(k, i) *= d1;
    }
}

inline DState run_branch_d(const IsnnParams& p, const std::vector<double>& eff, const Vec& in0,
                           int coord_offset, int n, const std::vector<int>& w_idx,
                           const std::vector<int>& b_idx, Activation act) {
    DState cur = seed_state(in0, coord_offset, n);
    for (std::size_t h = 0; h < w_idx.size(); ++h) {
        const BlockView W = view(p, eff, w_idx[h]);
        const BlockView b = view(p, eff, b_idx[h]);
        DState pre(W.rows, n);
        for (int i = 0; i < W.rows; ++i) pre.v[static_cast<std::size_t>(i)] = b.bias(i);
        accum_affine(W, cur, pre);
        apply_activation(act, pre);
        cur = std::move(pre);
    }
    return cur;
}

inline EvalBundle finalize(const ArchSpec& s, DState out) {
    // output layer is affine; apply the optional output activation
    if (s.output_activation == OutputAct::Softplus) apply_activation(Activation::Softplus, out);
    EvalBundle eb;
    eb.arch = s.kind;
    eb.n_x = s.n_x; eb.n_y = s.n_y; eb.n_t = s.n_t; eb.n_z = s.n_z;
    eb.value = out.v[0];
    const int n = out.n;
    eb.grad.assign(out.jac.begin(), out.jac.begin() + n);
    eb.hess = Mat(static_cast<std::size_t>(n), static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            eb.hess(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = out.H(0, i, j);
    return eb;
}

} // namespace detail

// Single-pass value + gradient + Hessian for ISNN-1. Implements the
// layerwise derivative recursions: each affine block propagates
// (value, Jacobian, Hessian), each activation contributes
// act'' (J o J) + act' H. One forward sweep, no tape.
inline EvalBundle eval_full_isnn1(const IsnnParams& p, const std::vector<double>& eff,
                                  const BranchInput& in) {
    check_input_dims(p.spec, in);
    const ArchSpec& s = p.spec;
    const int n = s.input_dim();
    const int ox = 0, oy = s.n_x, ot = s.n_x + s.n_y, oz = s.n_x + s.n_y + s.n_t;

    detail::DState yH, zH, tH;
    if (s.n_y > 0) yH = detail::run_branch_d(p, eff, in.y0, oy, n, p.w_yy, p.b_y, Activation::Softplus);
    if (s.n_z > 0) zH = detail::run_branch_d(p, eff, in.z0, oz, n, p.w_zz, p.b_z, Activation::Sigmoid);
    if (s.n_t > 0) tH = detail::run_branch_d(p, eff, in.t0, ot, n, p.w_tt, p.b_t, Activation::Sigmoid);

    const int Hx = s.depth_x();
    detail::DState cur;
    for (int h = 0; h < Hx; ++h) {
        const int w = s.x_widths[static_cast<std::size_t>(h)];
        const BlockView b = view(p, eff, p.b_x[static_cast<std::size_t>(h)]);
        detail::DState pre(w, n);
        for (int i = 0; i < w; ++i) pre.v[static_cast<std::size_t>(i)] = b.bias(i);
        if (h == 0) {
            if (s.n_x > 0) detail::accum_affine_raw(view(p, eff, p.w_xx[0]), in.x0, ox, pre);
            if (s.n_y > 0) detail::accum_affine(view(p, eff, p.w_xy[0]), yH, pre);
            if (s.n_z > 0) detail::accum_affine(view(p, eff, p.w_xz[0]), zH, pre);
            if (s.n_t > 0) detail::accum_affine(view(p, eff, p.w_xt[0]), tH, pre);
        } else {
            detail::accum_affine(view(p, eff, p.w_xx[static_cast<std::size_t>(h)]), cur, pre);
        }
        if (h != Hx - 1) detail::apply_activation(Activation::Softplus, pre);
        cur = std::move(pre);
    }
    return detail::finalize(s, std::move(cur));
}

// Single-pass value + gradient + Hessian for ISNN-2. The x-chain Jacobian
// carries the W^[xx0] pass-through contribution at every layer and the
// per-layer branch cross terms.
inline EvalBundle eval_full_isnn2(const IsnnParams& p, const std::vector<double>& eff,
                                  const BranchInput& in) {
    check_input_dims(p.spec, in);
    const ArchSpec& s = p.spec;
    const int n = s.input_dim();
    const int ox = 0, oy = s.n_x, ot = s.n_x + s.n_y, oz = s.n_x + s.n_y + s.n_t;

    std::vector<detail::DState> ys, zs, ts;
    auto run_layers = [&](const Vec& in0, int off, const std::vector<int>& w_idx,
                          const std::vector<int>& b_idx, Activation act,
                          std::vector<detail::DState>& out) {
        detail::DState cur = detail::seed_state(in0, off, n);
        for (std::size_t h = 0; h < w_idx.size(); ++h) {
            const BlockView W = view(p, eff, w_idx[h]);
            const BlockView b = view(p, eff, b_idx[h]);
            detail::DState pre(W.rows, n);
            for (int i = 0; i < W.rows; ++i) pre.v[static_cast<std::size_t>(i)] = b.bias(i);
            detail::accum_affine(W, cur, pre);
            detail::apply_activation(act, pre);
            out.push_back(pre);
            cur = std::move(pre);
        }
    };
    if (s.n_y > 0) run_layers(in.y0, oy, p.w_yy, p.b_y, Activation::Softplus, ys);
    if (s.n_z > 0) run_layers(in.z0, oz, p.w_zz, p.b_z, Activation::Sigmoid, zs);
    if (s.n_t > 0) run_layers(in.t0, ot, p.w_tt, p.b_t, Activation::Sigmoid, ts);

    const int Hx = s.depth_x();
    detail::DState cur;
    for (int h = 0; h < Hx; ++h) {
        const int w = s.x_widths[static_cast<std::size_t>(h)];
        const BlockView b = view(p, eff, p.b_x[static_cast<std::size_t>(h)]);
        detail::DState pre(w, n);
        for (int i = 0; i < w; ++i) pre.v[static_cast<std::size_t>(i)] = b.bias(i);
        if (h == 0) {
            if (s.n_x > 0) detail::accum_affine_raw(view(p, eff, p.w_xx[0]), in.x0, ox, pre);
            if (s.n_y > 0) detail::accum_affine_raw(view(p, eff, p.w_xy[0]), in.y0, oy, pre);
            if (s.n_z > 0) detail::accum_affine_raw(view(p, eff, p.w_xz[0]), in.z0, oz, pre);
            if (s.n_t > 0) detail::accum_affine_raw(view(p, eff, p.w_xt[0]), in.t0, ot, pre);
        } else {
            const auto hs = static_cast<std::size_t>(h);
            detail::accum_affine(view(p, eff, p.w_xx[hs]), cur, pre);
            if (s.n_x > 0) detail::accum_affine_raw(view(p, eff, p.w_xx0[hs]), in.x0, ox, pre);
            if (s.n_y > 0) detail::accum_affine(view(p, eff, p.w_xy[hs]), ys[hs - 1], pre);
            if (s.n_z > 0) detail::accum_affine(view(p, eff, p.w_xz[hs]), zs[hs - 1], pre);
            if (s.n_t > 0) detail::accum_affine(view(p, eff, p.w_xt[hs]), ts[hs - 1], pre);
        }
        if (h != Hx - 1) detail::apply_activation(Activation::Softplus, pre);
        cur = std::move(pre);
    }
    return detail::finalize(s, std::move(cur));
}

// Same machinery for the FFNN baseline (sigmoid hidden layers).
inline EvalBundle eval_full_ffnn(const IsnnParams& p, const std::vector<double>& eff, const Vec& in) {
    if (p.spec.kind != ArchKind::Ffnn) throw DimMismatch("eval_full_ffnn: wrong arch");
    if (static_cast<int>(in.size()) != p.spec.n_x) throw DimMismatch("eval_full_ffnn: input size");
    const int n = p.spec.n_x;
    detail::DState cur = detail::seed_state(in, 0, n);
    const int H = p.spec.depth_x();
    for (int h = 0; h < H; ++h) {
        const BlockView W = view(p, eff, p.w_xx[static_cast<std::size_t>(h)]);
        const BlockView b = view(p, eff, p.b_x[static_cast<std::size_t>(h)]);
        detail::DState pre(W.rows, n);
        for (int i = 0; i < W.rows; ++i) pre.v[static_cast<std::size_t>(i)] = b.bias(i);
        detail::accum_affine(W, cur, pre);
        if (h != H - 1) detail::apply_activation(Activation::Sigmoid, pre);
        cur = std::move(pre);
    }
    return detail::finalize(p.spec, std::move(cur));
}

inline EvalBundle eval_full(const IsnnParams& p, const std::vector<double>& eff,
                            const BranchInput& in) {
    switch (p.spec.kind) {
        case ArchKind::Isnn1: return eval_full_isnn1(p, eff, in);
        case ArchKind::Isnn2: return eval_full_isnn2(p, eff, in);
        case ArchKind::Ffnn: return eval_full_ffnn(p, eff, in.flat());
    }
    throw InvalidSpec("unknown arch");
}

inline EvalBundle eval_full(const IsnnParams& p, const BranchInput& in) {
    return eval_full(p, effective_weights(p), in);
}

// Central-difference gradient, the verification oracle for the manual pass.
inline Vec fd_grad(const std::function<double(const Vec&)>& f, const Vec& x, double h) {
    Vec g(x.size(), 0.0);
    Vec xp = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        xp[i] = x[i] + h;
        const double fp = f(xp);
        xp[i] = x[i] - h;
        const double fm = f(xp);
        xp[i] = x[i];
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

// Second-order central stencil, symmetrized.
inline Mat fd_hess(const std::function<double(const Vec&)>& f, const Vec& x, double h) {
    const std::size_t d = x.size();
    Mat H(d, d);
    const double f0 = f(x);
    Vec xp = x;
    for (std::size_t i = 0; i < d; ++i) {
        xp[i] = x[i] + h;
        const double fp = f(xp);
        xp[i] = x[i] - h;
        const double fm = f(xp);
        xp[i] = x[i];
        H(i, i) = (fp - 2.0 * f0 + fm) / (h * h);
    }
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j) {
            xp[i] = x[i] + h; xp[j] = x[j] + h;
            const double fpp = f(xp);
            xp[j] = x[j] - h;
            const double fpm = f(xp);
            xp[i] = x[i] - h; xp[j] = x[j] + h;
            const double fmp = f(xp);
            xp[j] = x[j] - h;
            const double fmm = f(xp);
            xp[i] = x[i]; xp[j] = x[j];
            const double v = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
            H(i, j) = v;
            H(j, i) = v;
        }
    return H;
}

} // namespace isnn
