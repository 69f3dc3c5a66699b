#pragma once

#include <cmath>
#include <cstdint>

#include "isnn/sampling.hpp"
#include "isnn/tensor.hpp"

namespace isnn {

// Additively split target: convex in x, convex nondecreasing in y,
// nondecreasing in t, arbitrary in z.
inline double toy_f(double x, double y, double t, double z) {
    return std::exp(-0.5 * x) + std::log(1.0 + std::exp(0.4 * y)) + std::tanh(t) + std::sin(z) - 0.4;
}

// Multiplicatively split target with the same structural relationships on
// the sampled domain.
inline double toy_g(double x, double y, double t, double z) {
    const double fx = std::exp(-0.3 * x);
    const double fy = (0.15 * y) * (0.15 * y);
    const double ft = std::tanh(0.3 * t);
    const double fz = 0.2 * std::sin(0.5 * z + 2.0) + 0.5;
    return fx * fy * ft * fz;
}

struct ToyDataset {
    Mat inputs;   // N x 4, columns (x, y, t, z)
    Vec targets;  // N
    Vec lo, hi;   // sampling bounds actually used
    std::uint64_t seed = 0;

    std::size_t size() const { return targets.size(); }
};

inline ToyDataset gen_toy(char which, std::size_t n, const Vec& lo, const Vec& hi,
                          std::uint64_t seed) {
    ToyDataset d;
    d.inputs = lhs_sample(n, 4, lo, hi, seed);
    d.targets.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = d.inputs(i, 0), y = d.inputs(i, 1), t = d.inputs(i, 2), z = d.inputs(i, 3);
        d.targets[i] = which == 'f' ? toy_f(x, y, t, z) : toy_g(x, y, t, z);
    }
    d.lo = lo;
    d.hi = hi;
    d.seed = seed;
    return d;
}

inline ToyDataset gen_toy(char which, std::size_t n, double lo, double hi, std::uint64_t seed) {
    return gen_toy(which, n, Vec(4, lo), Vec(4, hi), seed);
}

} // namespace isnn
