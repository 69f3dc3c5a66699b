#pragma once

#include <cmath>

namespace isnn {

// sigma_mc: softplus, convex and monotonically non-decreasing.
// Stable for large |x|: exp is only ever taken of a non-positive argument.
inline double softplus(double x) {
    if (x > 0.0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

// sigma_m = sigma_a: logistic sigmoid.
inline double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

inline double softplus_d1(double x) { return sigmoid(x); }
inline double softplus_d2(double x) {
    const double s = sigmoid(x);
    return s * (1.0 - s);
}

inline double sigmoid_d1(double x) {
    const double s = sigmoid(x);
    return s * (1.0 - s);
}
inline double sigmoid_d2(double x) {
    const double s = sigmoid(x);
    return s * (1.0 - s) * (1.0 - 2.0 * s);
}

enum class Activation { Softplus, Sigmoid, Identity };

inline double act_value(Activation a, double x) {
    switch (a) {
        case Activation::Softplus: return softplus(x);
        case Activation::Sigmoid: return sigmoid(x);
        case Activation::Identity: return x;
    }
    return x;
}

inline double act_d1(Activation a, double x) {
    switch (a) {
        case Activation::Softplus: return softplus_d1(x);
        case Activation::Sigmoid: return sigmoid_d1(x);
        case Activation::Identity: return 1.0;
    }
    return 1.0;
}

inline double act_d2(Activation a, double x) {
    switch (a) {
        case Activation::Softplus: return softplus_d2(x);
        case Activation::Sigmoid: return sigmoid_d2(x);
        case Activation::Identity: return 0.0;
    }
    return 0.0;
}

} // namespace isnn
