#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <vector>

#include "isnn/errors.hpp"

namespace isnn {

using Vec = std::vector<double>;

// Dense row-major matrix of small, fixed-at-runtime dimensions.
class Mat {
  public:
    Mat() = default;
    Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Mat identity(std::size_t n) {
        Mat m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    Vec matvec(const Vec& x) const {
        if (x.size() != cols_) throw DimMismatch("Mat::matvec: size mismatch");
        Vec y(rows_, 0.0);
        for (std::size_t i = 0; i < rows_; ++i) {
            double s = 0.0;
            const double* row = data_.data() + i * cols_;
            for (std::size_t j = 0; j < cols_; ++j) s += row[j] * x[j];
            y[i] = s;
        }
        return y;
    }

  private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

// 3x3 tensor, row-major. Used for F, C, S, N, Cof F, Cof C.
struct Tensor3 {
    std::array<double, 9> m{};

    Tensor3() = default;
    Tensor3(double a11, double a12, double a13,
            double a21, double a22, double a23,
            double a31, double a32, double a33)
        : m{a11, a12, a13, a21, a22, a23, a31, a32, a33} {}

    static Tensor3 identity() { return Tensor3(1, 0, 0, 0, 1, 0, 0, 0, 1); }
    static Tensor3 diag(double a, double b, double c) { return Tensor3(a, 0, 0, 0, b, 0, 0, 0, c); }
    static Tensor3 zero() { return Tensor3(); }

    double& operator()(int i, int j) { return m[static_cast<std::size_t>(3 * i + j)]; }
    double operator()(int i, int j) const { return m[static_cast<std::size_t>(3 * i + j)]; }

    Tensor3 transpose() const {
        return Tensor3(m[0], m[3], m[6], m[1], m[4], m[7], m[2], m[5], m[8]);
    }

    Tensor3 operator+(const Tensor3& o) const {
        Tensor3 r;
        for (int i = 0; i < 9; ++i) r.m[static_cast<std::size_t>(i)] = m[static_cast<std::size_t>(i)] + o.m[static_cast<std::size_t>(i)];
        return r;
    }
    Tensor3 operator-(const Tensor3& o) const {
        Tensor3 r;
        for (int i = 0; i < 9; ++i) r.m[static_cast<std::size_t>(i)] = m[static_cast<std::size_t>(i)] - o.m[static_cast<std::size_t>(i)];
        return r;
    }
    Tensor3 operator*(double s) const {
        Tensor3 r;
        for (int i = 0; i < 9; ++i) r.m[static_cast<std::size_t>(i)] = m[static_cast<std::size_t>(i)] * s;
        return r;
    }

    double trace() const { return m[0] + m[4] + m[8]; }

    double max_abs() const {
        double v = 0.0;
        for (double e : m) v = std::max(v, std::abs(e));
        return v;
    }
};

inline Tensor3 matmul(const Tensor3& a, const Tensor3& b) {
    Tensor3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k) s += a(i, k) * b(k, j);
            r(i, j) = s;
        }
    return r;
}

// (a + a^T)/2; stress formulas downstream assume exact symmetry.
inline Tensor3 symmetrize(const Tensor3& a) {
    Tensor3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r(i, j) = 0.5 * (a(i, j) + a(j, i));
    return r;
}

// outer product n (x) n
inline Tensor3 outer(const std::array<double, 3>& n) {
    Tensor3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            r(i, j) = n[static_cast<std::size_t>(i)] * n[static_cast<std::size_t>(j)];
    return r;
}

// Closed-form cofactor expansion; exact and branch-free for 3x3.
inline double det3(const Tensor3& a) {
    return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1))
         - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0))
         + a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
}

// Cof(a)[i][j] = (-1)^{i+j} minor(i,j), so a . Cof(a)^T = det(a) I.
inline Tensor3 cof3(const Tensor3& a) {
    Tensor3 c;
    c(0, 0) = a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1);
    c(0, 1) = -(a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0));
    c(0, 2) = a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0);
    c(1, 0) = -(a(0, 1) * a(2, 2) - a(0, 2) * a(2, 1));
    c(1, 1) = a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0);
    c(1, 2) = -(a(0, 0) * a(2, 1) - a(0, 1) * a(2, 0));
    c(2, 0) = a(0, 1) * a(1, 2) - a(0, 2) * a(1, 1);
    c(2, 1) = -(a(0, 0) * a(1, 2) - a(0, 2) * a(1, 0));
    c(2, 2) = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
    return c;
}

inline Tensor3 inv3(const Tensor3& a) {
    const double d = det3(a);
    if (std::abs(d) <= 1e-14) throw SingularMatrix("inv3: |det| <= 1e-14");
    const Tensor3 c = cof3(a);
    Tensor3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r(i, j) = c(j, i) / d;
    return r;
}

// Cyclic Jacobi eigendecomposition of a symmetric matrix: A = V diag(e) V^T
// with V's columns the eigenvectors. Sizes stay small (Hessian blocks, the
// CMA-ES covariance), so the O(n^3)-per-sweep cost is irrelevant.
inline void jacobi_eigen(Mat a, Vec& evals, Mat& evecs, int max_sweeps = 64) {
    const std::size_t n = a.rows();
    if (a.cols() != n) throw DimMismatch("jacobi_eigen: matrix not square");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = 0.5 * (a(i, j) + a(j, i));
            a(i, j) = v;
            a(j, i) = v;
        }
    evecs = Mat::identity(n);
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
        if (off < 1e-30) break;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                if (a(p, q) == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0.0 ? 1.0 : -1.0)
                                 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = evecs(k, p), vkq = evecs(k, q);
                    evecs(k, p) = c * vkp - s * vkq;
                    evecs(k, q) = s * vkp + c * vkq;
                }
            }
    }
    evals.resize(n);
    for (std::size_t i = 0; i < n; ++i) evals[i] = a(i, i);
}

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations. Only used
// for the small Hessian blocks of the PSD checks; input is symmetrized.
inline Vec jacobi_eigenvalues(Mat a, int max_sweeps = 64) {
    const std::size_t n = a.rows();
    if (a.cols() != n) throw DimMismatch("jacobi_eigenvalues: matrix not square");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = 0.5 * (a(i, j) + a(j, i));
            a(i, j) = v;
            a(j, i) = v;
        }
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
        if (off < 1e-30) break;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                if (a(p, q) == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0.0 ? 1.0 : -1.0)
                                 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
    }
    Vec ev(n);
    for (std::size_t i = 0; i < n; ++i) ev[i] = a(i, i);
    return ev;
}

inline double min_eigenvalue(const Mat& a) {
    const Vec ev = jacobi_eigenvalues(a);
    double m = ev.empty() ? 0.0 : ev[0];
    for (double v : ev) m = std::min(m, v);
    return m;
}

} // namespace isnn
