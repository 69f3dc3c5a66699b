#pragma once

#include <vector>

#include "isnn/arch.hpp"
#include "isnn/tape.hpp"

namespace isnn {

// Tape expressions for a model: raw parameter leaves plus the effective
// (constraint-mapped) weight nodes derived from them. The effective vector
// mirrors the IsnnParams.raw layout so BlockView-style indexing carries over.
struct ModelVars {
    std::vector<Var> raw;  // leaves, one per raw parameter
    std::vector<Var> eff;  // softplus(leaf) on NonNegative blocks, else the leaf
};

inline ModelVars make_model_vars(Tape& t, const IsnnParams& p) {
    ModelVars mv;
    mv.raw.reserve(p.raw.size());
    for (double v : p.raw) mv.raw.push_back(t.leaf(v));
    mv.eff = mv.raw;
    for (const ParamBlock& b : p.blocks) {
        if (b.tag != ParamTag::NonNegative) continue;
        for (std::size_t k = 0; k < b.size(); ++k)
            mv.eff[b.offset + k] = t.softplus_(mv.raw[b.offset + k]);
    }
    return mv;
}

// copy current raw values into the leaves
inline void sync_model_vars(Tape& t, const ModelVars& mv, const IsnnParams& p) {
    for (std::size_t i = 0; i < p.raw.size(); ++i) t.set_value(mv.raw[i], p.raw[i]);
}

struct VarBranchInput {
    std::vector<Var> x0, y0, t0, z0;

    std::vector<Var> flat() const {
        std::vector<Var> v;
        v.insert(v.end(), x0.begin(), x0.end());
        v.insert(v.end(), y0.begin(), y0.end());
        v.insert(v.end(), t0.begin(), t0.end());
        v.insert(v.end(), z0.begin(), z0.end());
        return v;
    }
};

namespace detail {

inline std::vector<Var> block_row_vars(const IsnnParams& p, const ModelVars& mv, int idx, int row) {
    const ParamBlock& b = p.block(idx);
    std::vector<Var> ws(static_cast<std::size_t>(b.cols));
    for (int c = 0; c < b.cols; ++c)
        ws[static_cast<std::size_t>(c)] = mv.eff[b.offset + static_cast<std::size_t>(row * b.cols + c)];
    return ws;
}

inline Var bias_var(const IsnnParams& p, const ModelVars& mv, int idx, int row) {
    const ParamBlock& b = p.block(idx);
    return mv.eff[b.offset + static_cast<std::size_t>(row)];
}

// one affine block: out_i = act( sum_j W_ij in_j + b_i ), accumulating any
// number of (weight block, input vector) pairs
struct AffineTerm {
    int block_idx;
    const std::vector<Var>* input;
};

inline std::vector<Var> record_layer(Tape& t, const IsnnParams& p, const ModelVars& mv,
                                     const std::vector<AffineTerm>& terms, int bias_idx,
                                     Activation act, bool apply_act) {
    const int rows = p.block(bias_idx).rows;
    std::vector<Var> out(static_cast<std::size_t>(rows));
    for (int i = 0; i < rows; ++i) {
        std::vector<Var> xs, ws;
        for (const AffineTerm& term : terms) {
            const std::vector<Var> row = block_row_vars(p, mv, term.block_idx, i);
            xs.insert(xs.end(), term.input->begin(), term.input->end());
            ws.insert(ws.end(), row.begin(), row.end());
        }
        Var pre = t.affine(xs, ws, bias_var(p, mv, bias_idx, i));
        if (apply_act)
            pre = act == Activation::Softplus ? t.softplus_(pre) : t.sigmoid_(pre);
        out[static_cast<std::size_t>(i)] = pre;
    }
    return out;
}

inline std::vector<std::vector<Var>> record_branch(Tape& t, const IsnnParams& p, const ModelVars& mv,
                                                   const std::vector<Var>& in0,
                                                   const std::vector<int>& w_idx,
                                                   const std::vector<int>& b_idx, Activation act) {
    std::vector<std::vector<Var>> states;
    const std::vector<Var>* cur = &in0;
    for (std::size_t h = 0; h < w_idx.size(); ++h) {
        states.push_back(record_layer(t, p, mv, {{w_idx[h], cur}}, b_idx[h], act, true));
        cur = &states.back();
    }
    return states;
}

} // namespace detail

// Records the forward pass of any of the three architectures as tape
// expressions; mirrors forward_isnn1 / forward_isnn2 / forward_ffnn.
inline Var record_forward(Tape& t, const IsnnParams& p, const ModelVars& mv,
                          const VarBranchInput& in) {
    const ArchSpec& s = p.spec;
    if (static_cast<int>(in.x0.size()) != s.n_x || static_cast<int>(in.y0.size()) != s.n_y ||
        static_cast<int>(in.t0.size()) != s.n_t || static_cast<int>(in.z0.size()) != s.n_z)
        throw DimMismatch("record_forward: input vars do not match spec");

    const int Hx = s.depth_x();

    if (s.kind == ArchKind::Ffnn) {
        std::vector<Var> cur = in.x0;
        for (int h = 0; h < Hx; ++h)
            cur = detail::record_layer(t, p, mv, {{p.w_xx[static_cast<std::size_t>(h)], &cur}},
                                       p.b_x[static_cast<std::size_t>(h)], Activation::Sigmoid, h != Hx - 1);
        Var out = cur[0];
        return s.output_activation == OutputAct::Softplus ? t.softplus_(out) : out;
    }

    std::vector<std::vector<Var>> ys, zs, ts;
    if (s.n_y > 0) ys = detail::record_branch(t, p, mv, in.y0, p.w_yy, p.b_y, Activation::Softplus);
    if (s.n_z > 0) zs = detail::record_branch(t, p, mv, in.z0, p.w_zz, p.b_z, Activation::Sigmoid);
    if (s.n_t > 0) ts = detail::record_branch(t, p, mv, in.t0, p.w_tt, p.b_t, Activation::Sigmoid);

    std::vector<Var> cur;
    for (int h = 0; h < Hx; ++h) {
        const auto hs = static_cast<std::size_t>(h);
        std::vector<detail::AffineTerm> terms;
        if (h == 0) {
            if (s.n_x > 0) terms.push_back({p.w_xx[0], &in.x0});
            if (s.kind == ArchKind::Isnn2) {
                if (s.n_y > 0) terms.push_back({p.w_xy[0], &in.y0});
                if (s.n_z > 0) terms.push_back({p.w_xz[0], &in.z0});
                if (s.n_t > 0) terms.push_back({p.w_xt[0], &in.t0});
            } else {
                if (s.n_y > 0) terms.push_back({p.w_xy[0], &ys.back()});
                if (s.n_z > 0) terms.push_back({p.w_xz[0], &zs.back()});
                if (s.n_t > 0) terms.push_back({p.w_xt[0], &ts.back()});
            }
        } else {
            terms.push_back({p.w_xx[hs], &cur});
            if (s.kind == ArchKind::Isnn2) {
                if (s.n_x > 0) terms.push_back({p.w_xx0[hs], &in.x0});
                if (s.n_y > 0) terms.push_back({p.w_xy[hs], &ys[hs - 1]});
                if (s.n_z > 0) terms.push_back({p.w_xz[hs], &zs[hs - 1]});
                if (s.n_t > 0) terms.push_back({p.w_xt[hs], &ts[hs - 1]});
            }
        }
        cur = detail::record_layer(t, p, mv, terms, p.b_x[hs], Activation::Softplus, h != Hx - 1);
    }
    Var out = cur[0];
    return s.output_activation == OutputAct::Softplus ? t.softplus_(out) : out;
}

// Convenience wrapper: fresh tape, inputs as leaves.
struct RecordedModel {
    Tape tape;
    ModelVars vars;
    std::vector<Var> inputs; // flat [x | y | t | z]
    Var output;
};

inline RecordedModel record_model(const IsnnParams& p, const BranchInput& at) {
    RecordedModel rm;
    rm.vars = make_model_vars(rm.tape, p);
    VarBranchInput vin;
    auto mk = [&](const Vec& v) {
        std::vector<Var> out;
        out.reserve(v.size());
        for (double x : v) out.push_back(rm.tape.leaf(x));
        return out;
    };
    vin.x0 = mk(at.x0);
    vin.y0 = mk(at.y0);
    vin.t0 = mk(at.t0);
    vin.z0 = mk(at.z0);
    rm.inputs = vin.flat();
    rm.output = record_forward(rm.tape, p, rm.vars, vin);
    return rm;
}

} // namespace isnn
