#pragma once

#include "isnn/arch.hpp"
#include "isnn/rng.hpp"

namespace isnn::testing {

// Small random architecture for property sweeps. Branch dims 0..3 (at
// least one input present), widths 1..5, depths 1..3.
inline ArchSpec random_spec(ArchKind kind, Rng& rng, bool force_all_branches = false) {
    auto dim = [&]() { return force_all_branches ? 1 + static_cast<int>(rng.below(3)) : static_cast<int>(rng.below(4)); };
    int nx = dim(), ny = dim(), nt = dim(), nz = dim();
    if (nx + ny + nt + nz == 0) nx = 1;
    const int width = 1 + static_cast<int>(rng.below(5));
    const int depth = 1 + static_cast<int>(rng.below(3));
    if (kind == ArchKind::Ffnn)
        return ArchSpec::ffnn(std::max(1, nx), std::vector<int>(static_cast<std::size_t>(depth), width));
    if (kind == ArchKind::Isnn1) {
        const int bdepth = 1 + static_cast<int>(rng.below(3));
        return ArchSpec::isnn1(nx, ny, nt, nz, width, bdepth, width, depth);
    }
    return ArchSpec::isnn2(nx, ny, nt, nz, width, depth);
}

inline BranchInput random_input(const ArchSpec& s, Rng& rng, double lo = -3.0, double hi = 3.0) {
    BranchInput in;
    auto fill = [&](int n) {
        Vec v(static_cast<std::size_t>(n));
        for (double& x : v) x = rng.uniform(lo, hi);
        return v;
    };
    in.x0 = fill(s.n_x);
    in.y0 = fill(s.n_y);
    in.t0 = fill(s.n_t);
    in.z0 = fill(s.n_z);
    return in;
}

// Drive every effective weight to exactly zero: softplus underflows to 0.0
// below raw ~ -746, free weights are zeroed directly.
inline void force_zero_effective(IsnnParams& p) {
    for (const ParamBlock& b : p.blocks) {
        const double v = b.tag == ParamTag::NonNegative ? -800.0 : 0.0;
        for (std::size_t k = 0; k < b.size(); ++k) p.raw[b.offset + k] = v;
    }
}

} // namespace isnn::testing
