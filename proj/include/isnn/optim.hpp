#pragma once

#include <cmath>
#include <cstdint>

#include "isnn/errors.hpp"
#include "isnn/tensor.hpp"

namespace isnn {

inline double mse(const Vec& pred, const Vec& target) {
    if (pred.size() != target.size()) throw LengthMismatch("mse: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - target[i];
        s += d * d;
    }
    return s / static_cast<double>(pred.size());
}

// Adam with bias correction. Moment buffers are lazily sized to the
// parameter vector on the first step.
struct AdamState {
    Vec m, v;
    std::int64_t step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

inline void adam_step(AdamState& st, Vec& params, const Vec& grads, double lr) {
    if (params.size() != grads.size()) throw ShapeMismatch("adam_step: shape mismatch");
    if (st.m.empty()) {
        st.m.assign(params.size(), 0.0);
        st.v.assign(params.size(), 0.0);
    }
    if (st.m.size() != params.size()) throw ShapeMismatch("adam_step: state shape mismatch");
    st.step += 1;
    const double b1t = std::pow(st.beta1, static_cast<double>(st.step));
    const double b2t = std::pow(st.beta2, static_cast<double>(st.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        st.m[i] = st.beta1 * st.m[i] + (1.0 - st.beta1) * grads[i];
        st.v[i] = st.beta2 * st.v[i] + (1.0 - st.beta2) * grads[i] * grads[i];
        const double mhat = st.m[i] / (1.0 - b1t);
        const double vhat = st.v[i] / (1.0 - b2t);
        params[i] -= lr * mhat / (std::sqrt(vhat) + st.eps);
    }
}

} // namespace isnn
