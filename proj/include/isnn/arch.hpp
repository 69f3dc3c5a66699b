#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "isnn/activation.hpp"
#include "isnn/errors.hpp"
#include "isnn/rng.hpp"
#include "isnn/tensor.hpp"

namespace isnn {

enum class ArchKind { Isnn1, Isnn2, Ffnn };
enum class OutputAct { Linear, Softplus };
enum class ParamTag { NonNegative, Free };
enum class InitScheme { Glorot, SmallUniform };

inline const char* to_string(ArchKind k) {
    switch (k) {
        case ArchKind::Isnn1: return "isnn1";
        case ArchKind::Isnn2: return "isnn2";
        case ArchKind::Ffnn: return "ffnn";
    }
    return "?";
}

// Four input groups with different structural guarantees:
//   x0 convex, y0 convex + non-decreasing, t0 non-decreasing, z0 free.
// A branch with input dim 0 is absent and owns no parameters.
struct ArchSpec {
    ArchKind kind = ArchKind::Isnn2;
    int n_x = 0, n_y = 0, n_t = 0, n_z = 0;
    std::vector<int> x_widths;               // affine block output widths, last must be 1
    std::vector<int> y_widths, t_widths, z_widths;
    OutputAct output_activation = OutputAct::Linear;

    int input_dim() const { return n_x + n_y + n_t + n_z; }
    int depth_x() const { return static_cast<int>(x_widths.size()); }

    static ArchSpec isnn1(int nx, int ny, int nt, int nz, int branch_width, int branch_depth,
                          int x_width, int x_depth, OutputAct out = OutputAct::Linear) {
        ArchSpec s;
        s.kind = ArchKind::Isnn1;
        s.n_x = nx; s.n_y = ny; s.n_t = nt; s.n_z = nz;
        s.output_activation = out;
        for (int h = 0; h + 1 < x_depth; ++h) s.x_widths.push_back(x_width);
        s.x_widths.push_back(1);
        auto branch = [&](int n) {
            return n > 0 ? std::vector<int>(static_cast<std::size_t>(branch_depth), branch_width)
                         : std::vector<int>{};
        };
        s.y_widths = branch(ny);
        s.t_widths = branch(nt);
        s.z_widths = branch(nz);
        s.validate();
        return s;
    }

    static ArchSpec isnn2(int nx, int ny, int nt, int nz, int width, int depth,
                          OutputAct out = OutputAct::Linear) {
        ArchSpec s;
        s.kind = ArchKind::Isnn2;
        s.n_x = nx; s.n_y = ny; s.n_t = nt; s.n_z = nz;
        s.output_activation = out;
        for (int h = 0; h + 1 < depth; ++h) s.x_widths.push_back(width);
        s.x_widths.push_back(1);
        auto branch = [&](int n) {
            return n > 0 ? std::vector<int>(static_cast<std::size_t>(depth - 1), width)
                         : std::vector<int>{};
        };
        s.y_widths = branch(ny);
        s.t_widths = branch(nt);
        s.z_widths = branch(nz);
        s.validate();
        return s;
    }

    static ArchSpec ffnn(int n_in, const std::vector<int>& hidden,
                         OutputAct out = OutputAct::Linear) {
        ArchSpec s;
        s.kind = ArchKind::Ffnn;
        s.n_x = n_in;
        s.x_widths = hidden;
        s.x_widths.push_back(1);
        s.output_activation = out;
        s.validate();
        return s;
    }

    void validate() const {
        if (n_x < 0 || n_y < 0 || n_t < 0 || n_z < 0)
            throw InvalidSpec("negative input dimension");
        if (input_dim() < 1) throw InvalidSpec("no inputs");
        if (x_widths.empty()) throw InvalidSpec("empty x chain");
        if (x_widths.back() != 1) throw InvalidSpec("final x layer width must be 1");
        for (int w : x_widths)
            if (w < 1) throw InvalidSpec("x width < 1");
        auto check_branch = [&](int n, const std::vector<int>& widths, const char* name) {
            if (n == 0) {
                if (!widths.empty()) throw InvalidSpec(std::string(name) + " widths on absent branch");
                return;
            }
            for (int w : widths)
                if (w < 1) throw InvalidSpec(std::string(name) + " width < 1");
        };
        if (kind == ArchKind::Ffnn) {
            if (n_y != 0 || n_t != 0 || n_z != 0)
                throw InvalidSpec("ffnn takes a single input group");
            return;
        }
        check_branch(n_y, y_widths, "y");
        check_branch(n_t, t_widths, "t");
        check_branch(n_z, z_widths, "z");
        if (kind == ArchKind::Isnn1) {
            if (n_y > 0 && y_widths.empty()) throw InvalidSpec("isnn1 y branch needs >= 1 layer");
            if (n_t > 0 && t_widths.empty()) throw InvalidSpec("isnn1 t branch needs >= 1 layer");
            if (n_z > 0 && z_widths.empty()) throw InvalidSpec("isnn1 z branch needs >= 1 layer");
        } else {
            // ISNN-2: branch recursions run h = 0..H-2, so each present branch
            // carries exactly H-1 layers.
            const std::size_t want = x_widths.size() - 1;
            if (n_y > 0 && y_widths.size() != want) throw InvalidSpec("isnn2 y depth must equal H-1");
            if (n_t > 0 && t_widths.size() != want) throw InvalidSpec("isnn2 t depth must equal H-1");
            if (n_z > 0 && z_widths.size() != want) throw InvalidSpec("isnn2 z depth must equal H-1");
        }
    }

    bool operator==(const ArchSpec&) const = default;
};

// One affine block's weight matrix or bias inside the flat parameter store.
struct ParamBlock {
    std::string name;
    int rows = 0, cols = 0;      // bias blocks have cols == 1 and bias == true
    bool bias = false;
    ParamTag tag = ParamTag::Free;
    std::size_t offset = 0;

    std::size_t size() const { return static_cast<std::size_t>(rows) * (bias ? 1u : static_cast<std::size_t>(cols)); }
};

// Raw (unconstrained) trainable parameters. Effective weights are produced
// by mapping NonNegative-tagged blocks through softplus; see
// effective_weights below.
struct IsnnParams {
    ArchSpec spec;
    std::uint64_t seed = 0;
    std::vector<ParamBlock> blocks;
    std::vector<double> raw;

    // role -> block index (-1 when absent)
    std::vector<int> w_yy, b_y, w_zz, b_z, w_tt, b_t;
    std::vector<int> w_xx, b_x, w_xx0, w_xy, w_xz, w_xt;

    std::size_t count() const { return raw.size(); }

    const ParamBlock& block(int idx) const { return blocks[static_cast<std::size_t>(idx)]; }
};

namespace detail {

inline int add_block(IsnnParams& p, const std::string& name, int rows, int cols, bool bias,
                     ParamTag tag) {
    ParamBlock b;
    b.name = name;
    b.rows = rows;
    b.cols = cols;
    b.bias = bias;
    b.tag = tag;
    b.offset = p.raw.size();
    p.raw.resize(p.raw.size() + b.size(), 0.0);
    p.blocks.push_back(b);
    return static_cast<int>(p.blocks.size() - 1);
}

inline void build_branch(IsnnParams& p, const char* tag_name, int n_in,
                         const std::vector<int>& widths, ParamTag w_tag,
                         std::vector<int>& w_idx, std::vector<int>& b_idx) {
    int prev = n_in;
    for (std::size_t h = 0; h < widths.size(); ++h) {
        const int w = widths[h];
        w_idx.push_back(add_block(p, std::string("W") + std::to_string(h) + "^[" + tag_name + "]",
                                  w, prev, false, w_tag));
        b_idx.push_back(add_block(p, std::string("b") + std::to_string(h) + "^[" + std::string(1, tag_name[0]) + "]",
                                  w, 1, true, ParamTag::Free));
        prev = w;
    }
}

} // namespace detail

// Builds the block layout for an architecture. Constraint tags follow the
// architecture rules: W_h^[xx] (h>=1), W^[yy], W^[xy], W^[tt], W^[xt] are
// NonNegative; W_0^[xx], W^[xx0], W^[zz], W^[xz] and all biases are Free.
inline IsnnParams make_param_layout(const ArchSpec& spec) {
    spec.validate();
    IsnnParams p;
    p.spec = spec;

    if (spec.kind == ArchKind::Ffnn) {
        int prev = spec.n_x;
        for (std::size_t h = 0; h < spec.x_widths.size(); ++h) {
            const int w = spec.x_widths[h];
            p.w_xx.push_back(detail::add_block(p, "W" + std::to_string(h), w, prev, false, ParamTag::Free));
            p.b_x.push_back(detail::add_block(p, "b" + std::to_string(h), w, 1, true, ParamTag::Free));
            prev = w;
        }
        return p;
    }

    if (spec.n_y > 0) detail::build_branch(p, "yy", spec.n_y, spec.y_widths, ParamTag::NonNegative, p.w_yy, p.b_y);
    if (spec.n_z > 0) detail::build_branch(p, "zz", spec.n_z, spec.z_widths, ParamTag::Free, p.w_zz, p.b_z);
    if (spec.n_t > 0) detail::build_branch(p, "tt", spec.n_t, spec.t_widths, ParamTag::NonNegative, p.w_tt, p.b_t);

    const int Hx = spec.depth_x();
    int prev = spec.n_x;
    for (int h = 0; h < Hx; ++h) {
        const int w = spec.x_widths[static_cast<std::size_t>(h)];
        const std::string hs = std::to_string(h);
        p.w_xx.push_back(spec.n_x > 0 || h > 0
                             ? detail::add_block(p, "W" + hs + "^[xx]", w, prev,
                                                 false, h == 0 ? ParamTag::Free : ParamTag::NonNegative)
                             : -1);
        if (spec.kind == ArchKind::Isnn2) {
            // x0 pass-through for every layer after the first
            p.w_xx0.push_back(h > 0 && spec.n_x > 0
                                  ? detail::add_block(p, "W" + hs + "^[xx0]", w, spec.n_x, false, ParamTag::Free)
                                  : -1);
            const bool branch_here = h == 0 || h - 1 < static_cast<int>(spec.x_widths.size()) - 1;
            const int wy = h == 0 ? spec.n_y : spec.y_widths.empty() ? 0 : spec.y_widths[static_cast<std::size_t>(h - 1)];
            const int wz = h == 0 ? spec.n_z : spec.z_widths.empty() ? 0 : spec.z_widths[static_cast<std::size_t>(h - 1)];
            const int wt = h == 0 ? spec.n_t : spec.t_widths.empty() ? 0 : spec.t_widths[static_cast<std::size_t>(h - 1)];
            p.w_xy.push_back(branch_here && spec.n_y > 0
                                 ? detail::add_block(p, "W" + hs + "^[xy]", w, wy, false, ParamTag::NonNegative)
                                 : -1);
            p.w_xz.push_back(branch_here && spec.n_z > 0
                                 ? detail::add_block(p, "W" + hs + "^[xz]", w, wz, false, ParamTag::Free)
                                 : -1);
            p.w_xt.push_back(branch_here && spec.n_t > 0
                                 ? detail::add_block(p, "W" + hs + "^[xt]", w, wt, false, ParamTag::NonNegative)
                                 : -1);
        } else if (h == 0) {
            // ISNN-1 mixes the finished branch outputs into the first x layer only
            p.w_xx0.push_back(-1);
            p.w_xy.push_back(spec.n_y > 0
                                 ? detail::add_block(p, "W^[xy]", w, spec.y_widths.back(), false, ParamTag::NonNegative)
                                 : -1);
            p.w_xz.push_back(spec.n_z > 0
                                 ? detail::add_block(p, "W^[xz]", w, spec.z_widths.back(), false, ParamTag::Free)
                                 : -1);
            p.w_xt.push_back(spec.n_t > 0
                                 ? detail::add_block(p, "W^[xt]", w, spec.t_widths.back(), false, ParamTag::NonNegative)
                                 : -1);
        } else {
            p.w_xx0.push_back(-1);
            p.w_xy.push_back(-1);
            p.w_xz.push_back(-1);
            p.w_xt.push_back(-1);
        }
        p.b_x.push_back(detail::add_block(p, "b" + hs + "^[x]", w, 1, true, ParamTag::Free));
        prev = w;
    }
    return p;
}

// Reproducible initialization in *effective* weight space. Free matrices
// draw Glorot-uniform raw values directly. NonNegative matrices draw a
// positive effective weight with mean 1/fan_in and store
// raw = softplus^{-1}(u): an all-positive row then has unit expected gain,
// so deep constrained chains start at the input magnitude instead of
// compounding per layer.
inline IsnnParams new_params(const ArchSpec& spec, std::uint64_t seed,
                             InitScheme init = InitScheme::Glorot) {
    IsnnParams p = make_param_layout(spec);
    p.seed = seed;
    Rng rng(seed);
    for (const ParamBlock& b : p.blocks) {
        if (b.bias) continue;
        double limit = 0.1;
        if (init == InitScheme::Glorot)
            limit = std::sqrt(6.0 / (static_cast<double>(b.rows) + static_cast<double>(b.cols)));
        const double mean_pos = 1.0 / static_cast<double>(b.cols);
        for (std::size_t k = 0; k < b.size(); ++k) {
            if (b.tag == ParamTag::NonNegative) {
                const double u = rng.uniform(0.2 * mean_pos, 1.8 * mean_pos);
                p.raw[b.offset + k] = std::log(std::expm1(u)); // softplus(raw) == u
            } else {
                p.raw[b.offset + k] = rng.uniform(-limit, limit);
            }
        }
    }
    return p;
}

// Maps raw parameters to the weights actually used by the network:
// softplus(v) entrywise on NonNegative-tagged matrices, pass-through
// everywhere else. Returned vector shares the layout of params.raw.
inline std::vector<double> effective_weights(const IsnnParams& p) {
    std::vector<double> eff(p.raw);
    for (const ParamBlock& b : p.blocks) {
        if (b.tag != ParamTag::NonNegative) continue;
        for (std::size_t k = 0; k < b.size(); ++k) eff[b.offset + k] = softplus(eff[b.offset + k]);
    }
    return eff;
}

// Inputs for the four branches. Dims must match the ArchSpec.
struct BranchInput {
    Vec x0, y0, t0, z0;

    static BranchInput concat_view(const ArchSpec& s, const Vec& all) {
        if (static_cast<int>(all.size()) != s.input_dim())
            throw DimMismatch("BranchInput: flat input size mismatch");
        BranchInput b;
        auto it = all.begin();
        b.x0.assign(it, it + s.n_x); it += s.n_x;
        b.y0.assign(it, it + s.n_y); it += s.n_y;
        b.t0.assign(it, it + s.n_t); it += s.n_t;
        b.z0.assign(it, it + s.n_z);
        return b;
    }

    Vec flat() const {
        Vec v;
        v.reserve(x0.size() + y0.size() + t0.size() + z0.size());
        v.insert(v.end(), x0.begin(), x0.end());
        v.insert(v.end(), y0.begin(), y0.end());
        v.insert(v.end(), t0.begin(), t0.end());
        v.insert(v.end(), z0.begin(), z0.end());
        return v;
    }
};

inline void check_input_dims(const ArchSpec& s, const BranchInput& in) {
    if (static_cast<int>(in.x0.size()) != s.n_x || static_cast<int>(in.y0.size()) != s.n_y ||
        static_cast<int>(in.t0.size()) != s.n_t || static_cast<int>(in.z0.size()) != s.n_z)
        throw DimMismatch("branch input dims do not match spec");
}

} // namespace isnn
