#pragma once

#include "isnn/errors.hpp"
#include "isnn/rng.hpp"
#include "isnn/tensor.hpp"

namespace isnn {

// Latin Hypercube Sampling: per dimension, exactly one point falls in each
// of n equal strata; strata are visited in a random permutation per dim.
inline Mat lhs_sample(std::size_t n, std::size_t dims, const Vec& lo, const Vec& hi,
                      std::uint64_t seed) {
    if (n < 1) throw InvalidBounds("lhs_sample: n must be >= 1");
    if (lo.size() != dims || hi.size() != dims)
        throw InvalidBounds("lhs_sample: bounds must have `dims` entries");
    for (std::size_t d = 0; d < dims; ++d)
        if (!(lo[d] < hi[d])) throw InvalidBounds("lhs_sample: lo < hi required");

    Rng rng(seed);
    Mat out(n, dims);
    for (std::size_t d = 0; d < dims; ++d) {
        const std::vector<std::size_t> perm = rng.permutation(n);
        const double width = (hi[d] - lo[d]) / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i)
            out(i, d) = lo[d] + (static_cast<double>(perm[i]) + rng.uniform()) * width;
    }
    return out;
}

inline Mat lhs_sample(std::size_t n, std::size_t dims, double lo, double hi,
                      std::uint64_t seed) {
    return lhs_sample(n, dims, Vec(dims, lo), Vec(dims, hi), seed);
}

} // namespace isnn
